//! Shared helpers for integration tests: random instances, fixture paths
//! and brute-force reference evaluators written independently of the
//! library code paths.

#![allow(dead_code)]

use std::path::PathBuf;

use hybro_core::bookshelf::{parse_aux, BookshelfDesign};
use hybro_core::model::{Canvas, Cell, CellKind, Net, Netlist, Pin, Placement, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn toy() -> BookshelfDesign {
    parse_aux(&fixture("toy/toy.aux")).expect("toy fixture parses")
}

pub fn synth() -> BookshelfDesign {
    parse_aux(&fixture("synth/synth.aux")).expect("synthetic fixture parses")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub netlist: Netlist,
    pub placement: Placement,
    pub canvas: Canvas,
}

pub struct InstanceShape {
    pub max_cells: usize,
    pub max_nets: usize,
    pub max_degree: usize,
    pub macros: usize,
    pub grid: usize,
    pub fixed_fraction: f64,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            max_cells: 100,
            max_nets: 200,
            max_degree: 8,
            macros: 0,
            grid: 16,
            fixed_fraction: 0.1,
        }
    }
}

/// Random design on a 100 x 100 canvas. The first `shape.macros` cells are
/// movable macros; the rest are small cells, some of them fixed.
pub fn random_instance(rng: &mut ChaCha8Rng, shape: &InstanceShape) -> Instance {
    let side = 100.0;
    let n = rng.random_range(shape.macros.max(2)..=shape.max_cells.max(shape.macros + 2));
    let mut cells = Vec::with_capacity(n);
    for id in 0..n {
        let is_macro = id < shape.macros;
        let (w, h) = if is_macro {
            (rng.random_range(6.0..18.0), rng.random_range(6.0..18.0))
        } else {
            (rng.random_range(0.5..4.0), rng.random_range(0.5..2.0))
        };
        let kind = if !is_macro && rng.random_bool(shape.fixed_fraction) {
            CellKind::Fixed
        } else {
            CellKind::Movable
        };
        cells.push(Cell {
            id,
            name: format!("c{id}"),
            width: w,
            height: h,
            kind,
            is_macro,
        });
    }
    let num_nets = rng.random_range(1..=shape.max_nets);
    let mut nets = Vec::with_capacity(num_nets);
    for id in 0..num_nets {
        let degree = rng.random_range(1..=shape.max_degree);
        let pins = (0..degree)
            .map(|_| {
                let cell = if shape.macros > 0 && rng.random_bool(0.3) {
                    rng.random_range(0..shape.macros)
                } else {
                    rng.random_range(0..n)
                };
                Pin {
                    cell,
                    dx: rng.random_range(0.0..=cells[cell].width),
                    dy: rng.random_range(0.0..=cells[cell].height),
                }
            })
            .collect();
        nets.push(Net {
            id,
            name: format!("n{id}"),
            pins,
        });
    }
    let placement = Placement::new(
        cells
            .iter()
            .map(|c| Point::new(rng.random_range(0.0..side - c.width), rng.random_range(0.0..side - c.height)))
            .collect(),
    );
    Instance {
        netlist: Netlist::new(cells, nets).expect("valid random netlist"),
        placement,
        canvas: Canvas::new(0.0, 0.0, side, side, shape.grid, shape.grid).expect("valid canvas"),
    }
}

pub fn pin_xy(netlist: &Netlist, placement: &Placement, net: usize) -> (Vec<f64>, Vec<f64>) {
    netlist.nets()[net]
        .pins
        .iter()
        .map(|p| {
            let at = placement.get(p.cell);
            (at.x + p.dx, at.y + p.dy)
        })
        .unzip()
}

/// Bounding-box half perimeter computed by sorting coordinates.
pub fn naive_net_hpwl(xs: &[f64], ys: &[f64]) -> f64 {
    let span = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        match (s.first(), s.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    };
    span(xs) + span(ys)
}

pub fn naive_hpwl(netlist: &Netlist, placement: &Placement) -> f64 {
    (0..netlist.num_nets())
        .map(|n| {
            let (xs, ys) = pin_xy(netlist, placement, n);
            naive_net_hpwl(&xs, &ys)
        })
        .sum()
}

/// Increment of the nets incident to `m` when it sits at `at`, measured
/// against the bounding box of the other pins of each net.
pub fn brute_increment(netlist: &Netlist, placement: &Placement, m: usize, at: Point) -> f64 {
    let mut moved = placement.clone();
    moved.set(m, at);
    let mut total = 0.0;
    for (n, net) in netlist.nets().iter().enumerate() {
        if !net.pins.iter().any(|p| p.cell == m) {
            continue;
        }
        let (xs, ys) = pin_xy(netlist, &moved, n);
        let with = naive_net_hpwl(&xs, &ys);
        let (ox, oy): (Vec<f64>, Vec<f64>) = net
            .pins
            .iter()
            .zip(xs.iter().zip(&ys))
            .filter(|(p, _)| p.cell != m)
            .map(|(_, (&x, &y))| (x, y))
            .unzip();
        total += with - naive_net_hpwl(&ox, &oy);
    }
    total
}

/// Candidate lower-left corner of `m` for grid cell `(gx, gy)`, clamped.
pub fn snapped(canvas: &Canvas, cell: &Cell, gx: usize, gy: usize) -> Point {
    let x = canvas.xl + gx as f64 * canvas.bin_w();
    let y = canvas.yl + gy as f64 * canvas.bin_h();
    Point::new(
        x.min(canvas.xh - cell.width).max(canvas.xl),
        y.min(canvas.yh - cell.height).max(canvas.yl),
    )
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
