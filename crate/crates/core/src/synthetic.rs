//! Deterministic synthetic benchmark generator.
//!
//! Every movable cell gets a hidden location; nets join cells that are close
//! in that hidden layout, so the design has a known low-wirelength structure
//! that a placer has to rediscover. All sizes and pin offsets are multiples
//! of 0.25 so the Bookshelf text round-trips exactly.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bookshelf::BookshelfDesign;
use crate::error::Result;
use crate::model::{default_grid_size, Canvas, Cell, CellKind, Net, Netlist, Pin, Placement, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub std_cells: usize,
    pub macros: usize,
    pub nets: usize,
    pub pads: usize,
    /// Movable area over canvas area.
    pub utilization: f64,
    /// Inclusive macro side range in rows.
    pub macro_side: (u32, u32),
    /// Nets joining each macro to nearby standard cells.
    pub nets_per_macro: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            std_cells: 2000,
            macros: 16,
            nets: 3000,
            pads: 64,
            utilization: 0.7,
            macro_side: (8, 16),
            nets_per_macro: 24,
            seed: 2024,
        }
    }
}

fn quarter(rng: &mut ChaCha8Rng, max: f64) -> f64 {
    let steps = (max * 4.0).floor() as u32;
    f64::from(rng.random_range(0..=steps)) * 0.25
}

fn degree(rng: &mut ChaCha8Rng) -> usize {
    match rng.random_range(0..100) {
        0..60 => 2,
        60..80 => 3,
        80..95 => rng.random_range(4..=6),
        _ => rng.random_range(7..=12),
    }
}

fn push_net(nets: &mut Vec<Net>, members: Vec<usize>, rng: &mut ChaCha8Rng, cells: &[Cell]) {
    let id = nets.len();
    let pins = members
        .iter()
        .map(|&c| Pin {
            cell: c,
            dx: quarter(rng, cells[c].width),
            dy: quarter(rng, cells[c].height),
        })
        .collect();
    nets.push(Net {
        id,
        name: format!("n{id}"),
        pins,
    });
}

/// Hidden positions bucketed on a coarse grid for neighbor queries.
struct Buckets {
    side: f64,
    n: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(points: &[(usize, Point)], extent: f64, per_bucket: usize) -> Self {
        let n = ((points.len() / per_bucket.max(1)) as f64).sqrt().ceil().max(1.0) as usize;
        let side = extent / n as f64;
        let mut cells = vec![Vec::new(); n * n];
        let mut b = Buckets { side, n, cells: Vec::new() };
        for &(id, p) in points {
            let (bx, by) = b.locate(p);
            cells[by * n + bx].push(id);
        }
        b.cells = cells;
        b
    }

    fn locate(&self, p: Point) -> (usize, usize) {
        let f = |v: f64| ((v / self.side).floor().max(0.0) as usize).min(self.n - 1);
        (f(p.x), f(p.y))
    }

    fn around(&self, p: Point, radius: usize) -> Vec<usize> {
        let (bx, by) = self.locate(p);
        let mut out = Vec::new();
        for y in by.saturating_sub(radius)..=(by + radius).min(self.n - 1) {
            for x in bx.saturating_sub(radius)..=(bx + radius).min(self.n - 1) {
                out.extend_from_slice(&self.cells[y * self.n + x]);
            }
        }
        out
    }
}

/// Generates a design with rows of height 1 and unit sites. Movable cells
/// start at the origin; pads sit on the canvas boundary.
pub fn generate(spec: &SyntheticSpec) -> Result<BookshelfDesign> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cells = Vec::new();
    let mut area = 0.0;
    for i in 0..spec.std_cells {
        let w = f64::from(rng.random_range(1..=4u32));
        area += w;
        cells.push(Cell {
            id: cells.len(),
            name: format!("o{i}"),
            width: w,
            height: 1.0,
            kind: CellKind::Movable,
            is_macro: false,
        });
    }
    for i in 0..spec.macros {
        let w = f64::from(rng.random_range(spec.macro_side.0..=spec.macro_side.1));
        let h = f64::from(rng.random_range(spec.macro_side.0..=spec.macro_side.1));
        area += w * h;
        cells.push(Cell {
            id: cells.len(),
            name: format!("m{i}"),
            width: w,
            height: h,
            kind: CellKind::Movable,
            is_macro: true,
        });
    }
    let side = (area / spec.utilization).sqrt().ceil().max(4.0);
    let num_movable = cells.len();

    // pads evenly spaced around the boundary, counter-clockwise from the origin
    let perimeter = 4.0 * (side - 1.0);
    let mut pad_points = Vec::new();
    for i in 0..spec.pads {
        let t = (i as f64 * perimeter / spec.pads as f64).floor();
        let s = side - 1.0;
        let p = if t < s {
            Point::new(t, 0.0)
        } else if t < 2.0 * s {
            Point::new(s, t - s)
        } else if t < 3.0 * s {
            Point::new(3.0 * s - t, s)
        } else {
            Point::new(0.0, 4.0 * s - t)
        };
        pad_points.push(p);
        cells.push(Cell {
            id: cells.len(),
            name: format!("p{i}"),
            width: 1.0,
            height: 1.0,
            kind: CellKind::Fixed,
            is_macro: false,
        });
    }

    // hidden layout: macros on a jittered lattice, standard cells uniform
    let mut hidden = vec![Point::default(); num_movable];
    let lattice = (spec.macros as f64).sqrt().ceil().max(1.0) as usize;
    for (k, h) in hidden.iter_mut().enumerate() {
        *h = if k < spec.std_cells {
            Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side))
        } else {
            let m = k - spec.std_cells;
            let step = side / lattice as f64;
            Point::new(
                ((m % lattice) as f64 + rng.random_range(0.3..0.7)) * step,
                ((m / lattice) as f64 + rng.random_range(0.3..0.7)) * step,
            )
        };
    }
    let std_points: Vec<(usize, Point)> = (0..spec.std_cells).map(|i| (i, hidden[i])).collect();
    let buckets = Buckets::new(&std_points, side, 8);

    let mut nets: Vec<Net> = Vec::new();
    let local_group = |rng: &mut ChaCha8Rng, center: Point, count: usize, exclude: usize| -> Vec<usize> {
        let mut radius = 1;
        loop {
            let pool: Vec<usize> = buckets.around(center, radius).into_iter().filter(|&c| c != exclude).collect();
            if pool.len() >= count || radius > buckets.n {
                return pool.choose_multiple(rng, count.min(pool.len())).copied().collect();
            }
            radius += 1;
        }
    };

    // macro nets first, then macro-to-macro, pads, and standard-cell nets
    for (m, &center) in hidden.iter().enumerate().skip(spec.std_cells) {
        for _ in 0..spec.nets_per_macro {
            let d = rng.random_range(2..=4usize);
            let mut members = vec![m];
            members.extend(local_group(&mut rng, center, d - 1, usize::MAX));
            push_net(&mut nets, members, &mut rng, &cells);
        }
    }
    for m in spec.std_cells..num_movable {
        let mut others: Vec<usize> = (spec.std_cells..num_movable).filter(|&o| o != m).collect();
        others.sort_by(|&a, &b| {
            let da = (hidden[a].x - hidden[m].x).abs() + (hidden[a].y - hidden[m].y).abs();
            let db = (hidden[b].x - hidden[m].x).abs() + (hidden[b].y - hidden[m].y).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        });
        for &o in others.iter().take(2) {
            for _ in 0..3 {
                push_net(&mut nets, vec![m, o], &mut rng, &cells);
            }
        }
    }
    for (i, &p) in pad_points.iter().enumerate() {
        let pad = num_movable + i;
        let d = rng.random_range(1..=3usize);
        let mut members = vec![pad];
        members.extend(local_group(&mut rng, p, d, usize::MAX));
        push_net(&mut nets, members, &mut rng, &cells);
    }
    let mut covered = vec![false; num_movable];
    for net in &nets {
        for pin in &net.pins {
            if pin.cell < num_movable {
                covered[pin.cell] = true;
            }
        }
    }
    let mut next_seed = 0;
    while nets.len() < spec.nets && spec.std_cells > 0 {
        while next_seed < spec.std_cells && covered[next_seed] {
            next_seed += 1;
        }
        let seed_cell = if next_seed < spec.std_cells {
            next_seed
        } else {
            rng.random_range(0..spec.std_cells)
        };
        let d = degree(&mut rng);
        let mut members = vec![seed_cell];
        members.extend(local_group(&mut rng, hidden[seed_cell], d - 1, seed_cell));
        for &c in &members {
            covered[c] = true;
        }
        push_net(&mut nets, members, &mut rng, &cells);
    }

    let mut initial = vec![Point::default(); cells.len()];
    initial[num_movable..].copy_from_slice(&pad_points);
    let n_cells = cells.len();
    let grid = default_grid_size(num_movable);
    Ok(BookshelfDesign {
        netlist: Netlist::new(cells, nets)?,
        initial: Placement::new(initial),
        canvas: Canvas::new(0.0, 0.0, side, side, grid, grid)?,
        row_height: Some(1.0),
        non_image: vec![false; n_cells],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_benchmark_shape() {
        let d = generate(&SyntheticSpec::default()).unwrap();
        let nl = &d.netlist;
        assert_eq!(nl.movable_cells().count(), 2016);
        assert_eq!(nl.num_macros(), 16);
        assert_eq!(nl.num_nets(), 3000);
        assert!(nl.incidence_consistent());
        assert!(nl.movable_cells().all(|c| !nl.cell_nets(c.id).is_empty()));
        for c in nl.cells().iter().filter(|c| c.is_fixed()) {
            assert!(d.canvas.fits(c));
            let p = d.initial.get(c.id);
            assert!(p.x >= 0.0 && p.y >= 0.0 && p.x + 1.0 <= d.canvas.xh && p.y + 1.0 <= d.canvas.yh);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec {
            std_cells: 200,
            macros: 4,
            nets: 300,
            pads: 8,
            ..Default::default()
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SyntheticSpec { seed: 7, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }
}
