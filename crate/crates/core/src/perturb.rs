//! Perturbations applied to a converged placement: random position swaps
//! (macros only or all movable cells) and greedy macro relocation guided by
//! per-macro wire masks.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{clamp_to_canvas, Canvas, CellId, Netlist, Placement, Point, Rect};

pub const DEFAULT_STRENGTH: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbKind {
    Shuffle,
    ShuffleAll,
    WireMask,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbStrategy {
    pub kind: PerturbKind,
    /// Percentage of the scope to shuffle, in (0, 100].
    pub p: f64,
    pub seed: u64,
}

impl PerturbStrategy {
    pub fn new(kind: PerturbKind, p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p <= 100.0) {
            return Err(Error::InvalidConfig(format!("perturbation strength must lie in (0, 100], got {p}")));
        }
        Ok(PerturbStrategy { kind, p, seed })
    }
}

impl Default for PerturbStrategy {
    fn default() -> Self {
        PerturbStrategy {
            kind: PerturbKind::WireMask,
            p: DEFAULT_STRENGTH,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Macros,
    All,
}

/// Result of a perturbation. `infeasible` lists macros the wire-mask
/// adjustment could not place; they keep their clamped positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub placement: Placement,
    pub infeasible: Vec<CellId>,
}

/// Number of cells selected from a scope of `m` at strength `p` percent.
pub fn selection_count(p: f64, m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    // the epsilon keeps exact products like 50% of 4 from rounding up
    let k = (p * m as f64 / 100.0 - 1e-9).ceil();
    (k.max(1.0) as usize).min(m)
}

fn scope_members(netlist: &Netlist, scope: Scope) -> Vec<CellId> {
    match scope {
        Scope::Macros => netlist.movable_macros().map(|c| c.id).collect(),
        Scope::All => netlist.movable_cells().map(|c| c.id).collect(),
    }
}

fn draw_selection(members: &[CellId], p: f64, rng: &mut ChaCha8Rng) -> Vec<CellId> {
    let k = selection_count(p, members.len());
    let mut chosen: Vec<CellId> = index::sample(rng, members.len(), k).into_iter().map(|i| members[i]).collect();
    chosen.sort_unstable();
    chosen
}

/// Cells that [`shuffle`] selects for the same arguments, in ascending id
/// order. Empty when the macro scope has fewer than two macros.
pub fn shuffle_selection(netlist: &Netlist, p: f64, seed: u64, scope: Scope) -> Vec<CellId> {
    let members = scope_members(netlist, scope);
    if scope == Scope::Macros && members.len() < 2 {
        return Vec::new();
    }
    draw_selection(&members, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Picks `ceil(p% * m)` cells of the scope uniformly without replacement and
/// permutes their lower-left positions uniformly at random. Cells that no
/// longer fit at their new position are clamped into the canvas.
pub fn shuffle(placement: &Placement, netlist: &Netlist, canvas: &Canvas, p: f64, seed: u64, scope: Scope) -> Placement {
    let members = scope_members(netlist, scope);
    if scope == Scope::Macros && members.len() < 2 {
        return placement.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = draw_selection(&members, p, &mut rng);
    let mut positions: Vec<Point> = chosen.iter().map(|&c| placement.get(c)).collect();
    positions.shuffle(&mut rng);
    let mut out = placement.clone();
    for (&c, p) in chosen.iter().zip(positions) {
        let cell = netlist.cell(c);
        let q = clamp_to_canvas(canvas, cell, p.x, p.y).unwrap_or(p);
        out.set(c, q);
    }
    out
}

/// HPWL increments of moving one macro to each grid cell, row-major
/// (`gy * nx + gx`).
#[derive(Debug, Clone, PartialEq)]
pub struct WireMaskGrid {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl WireMaskGrid {
    pub fn get(&self, gx: usize, gy: usize) -> f64 {
        self.values[gy * self.nx + gx]
    }
}

/// Lower-left position of `macro` when snapped to grid cell `(gx, gy)`,
/// clamped into the canvas.
pub fn grid_position(canvas: &Canvas, netlist: &Netlist, macro_id: CellId, gx: usize, gy: usize) -> Point {
    let cell = netlist.cell(macro_id);
    let x = canvas.xl + gx as f64 * canvas.bin_w();
    let y = canvas.yl + gy as f64 * canvas.bin_h();
    clamp_to_canvas(canvas, cell, x, y).unwrap_or(Point::new(x, y))
}

/// Span of `[lo, hi]` extended by the interval `[a, b]`, minus the span of
/// `[lo, hi]` alone. An empty `[lo, hi]` counts as zero width.
fn axis_increment(other: Option<(f64, f64)>, a: f64, b: f64) -> f64 {
    match other {
        Some((lo, hi)) => (hi.max(b) - lo.min(a)) - (hi - lo),
        None => b - a,
    }
}

struct NetAxes {
    other_x: Option<(f64, f64)>,
    other_y: Option<(f64, f64)>,
    dx: (f64, f64),
    dy: (f64, f64),
}

fn incident_axes(netlist: &Netlist, placement: &Placement, macro_id: CellId) -> Vec<NetAxes> {
    netlist
        .cell_nets(macro_id)
        .iter()
        .map(|&n| {
            let mut ox: Option<(f64, f64)> = None;
            let mut oy: Option<(f64, f64)> = None;
            let mut dx = (f64::INFINITY, f64::NEG_INFINITY);
            let mut dy = (f64::INFINITY, f64::NEG_INFINITY);
            for pin in &netlist.nets()[n].pins {
                if pin.cell == macro_id {
                    dx = (dx.0.min(pin.dx), dx.1.max(pin.dx));
                    dy = (dy.0.min(pin.dy), dy.1.max(pin.dy));
                } else {
                    let at = placement.get(pin.cell);
                    let (x, y) = (at.x + pin.dx, at.y + pin.dy);
                    ox = Some(ox.map_or((x, x), |(l, h)| (l.min(x), h.max(x))));
                    oy = Some(oy.map_or((y, y), |(l, h)| (l.min(y), h.max(y))));
                }
            }
            NetAxes {
                other_x: ox,
                other_y: oy,
                dx,
                dy,
            }
        })
        .collect()
}

/// Wire mask of one macro against the current positions of every other cell.
/// Each incident net contributes its HPWL with the macro at the grid cell
/// minus the HPWL of its remaining pins. Both axes separate, so the grid is
/// the sum of a per-column and a per-row term.
pub fn build_wiremask(netlist: &Netlist, placement: &Placement, canvas: &Canvas, macro_id: CellId) -> WireMaskGrid {
    let nx = canvas.grid_nx;
    let ny = canvas.grid_ny;
    let axes = incident_axes(netlist, placement, macro_id);
    let cols: Vec<f64> = (0..nx)
        .map(|gx| {
            let x = grid_position(canvas, netlist, macro_id, gx, 0).x;
            axes.iter().map(|a| axis_increment(a.other_x, x + a.dx.0, x + a.dx.1)).sum()
        })
        .collect();
    let rows: Vec<f64> = (0..ny)
        .map(|gy| {
            let y = grid_position(canvas, netlist, macro_id, 0, gy).y;
            axes.iter().map(|a| axis_increment(a.other_y, y + a.dy.0, y + a.dy.1)).sum()
        })
        .collect();
    let mut values = Vec::with_capacity(nx * ny);
    for r in &rows {
        values.extend(cols.iter().map(|c| c + r));
    }
    WireMaskGrid { nx, ny, values }
}

/// Grid cells where `macro_id` may not be placed: those that push it past
/// the canvas edge or overlap one of `obstacles`.
pub fn blocked_cells(netlist: &Netlist, canvas: &Canvas, macro_id: CellId, obstacles: &[Rect]) -> Vec<bool> {
    let nx = canvas.grid_nx;
    let ny = canvas.grid_ny;
    let cell = netlist.cell(macro_id);
    let xs: Vec<f64> = (0..nx).map(|gx| canvas.xl + gx as f64 * canvas.bin_w()).collect();
    let ys: Vec<f64> = (0..ny).map(|gy| canvas.yl + gy as f64 * canvas.bin_h()).collect();
    let tol = 1e-9 * canvas.width().max(canvas.height());
    let mut blocked = vec![false; nx * ny];
    for (gy, &y) in ys.iter().enumerate() {
        for (gx, &x) in xs.iter().enumerate() {
            if x + cell.width > canvas.xh + tol || y + cell.height > canvas.yh + tol {
                blocked[gy * nx + gx] = true;
            }
        }
    }
    for o in obstacles {
        let gxs: Vec<usize> = (0..nx).filter(|&g| xs[g] < o.xh && o.xl < xs[g] + cell.width).collect();
        if gxs.is_empty() {
            continue;
        }
        for gy in (0..ny).filter(|&g| ys[g] < o.yh && o.yl < ys[g] + cell.height) {
            for &gx in &gxs {
                blocked[gy * nx + gx] = true;
            }
        }
    }
    blocked
}

/// Movable macros in processing order: descending area, then id.
pub fn macro_order(netlist: &Netlist) -> Vec<CellId> {
    let mut order: Vec<CellId> = netlist.movable_macros().map(|c| c.id).collect();
    order.sort_by(|&a, &b| netlist.cell(b).area().total_cmp(&netlist.cell(a).area()).then(a.cmp(&b)));
    order
}

/// Greedy wire-mask relocation of every movable macro. Each macro moves to
/// the feasible grid cell with the smallest increment; ties go to the cell
/// closest (L1) to its previous position, then to the smallest `(gy, gx)`.
/// Standard cells are untouched.
pub fn wiremask_adjust(netlist: &Netlist, placement: &Placement, canvas: &Canvas) -> Perturbed {
    let mut out = placement.clone();
    let mut obstacles: Vec<Rect> = netlist
        .cells()
        .iter()
        .filter(|c| c.is_fixed())
        .map(|c| Rect::of_cell(c, placement.get(c.id)))
        .collect();
    let mut infeasible = Vec::new();
    for m in macro_order(netlist) {
        let cell = netlist.cell(m);
        let p = out.get(m);
        let origin = clamp_to_canvas(canvas, cell, p.x, p.y).unwrap_or(p);
        out.set(m, origin);
        let mask = build_wiremask(netlist, &out, canvas, m);
        let blocked = blocked_cells(netlist, canvas, m, &obstacles);
        let mut best: Option<(f64, f64, usize, usize, Point)> = None;
        for gy in 0..mask.ny {
            for gx in 0..mask.nx {
                if blocked[gy * mask.nx + gx] {
                    continue;
                }
                let at = grid_position(canvas, netlist, m, gx, gy);
                let key = (mask.get(gx, gy), (at.x - origin.x).abs() + (at.y - origin.y).abs(), gy, gx, at);
                let better = match &best {
                    None => true,
                    Some(b) => key
                        .0
                        .total_cmp(&b.0)
                        .then(key.1.total_cmp(&b.1))
                        .then((key.2, key.3).cmp(&(b.2, b.3)))
                        .is_lt(),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        match best {
            Some((.., at)) => {
                out.set(m, at);
                obstacles.push(Rect::of_cell(cell, at));
            }
            None => {
                log::warn!("no feasible grid cell for macro '{}'", cell.name);
                infeasible.push(m);
            }
        }
    }
    Perturbed { placement: out, infeasible }
}

/// Applies a strategy to a placement.
pub fn apply(strategy: &PerturbStrategy, netlist: &Netlist, placement: &Placement, canvas: &Canvas) -> Perturbed {
    match strategy.kind {
        PerturbKind::Shuffle | PerturbKind::ShuffleAll => {
            let scope = if strategy.kind == PerturbKind::Shuffle { Scope::Macros } else { Scope::All };
            Perturbed {
                placement: shuffle(placement, netlist, canvas, strategy.p, strategy.seed, scope),
                infeasible: Vec::new(),
            }
        }
        PerturbKind::WireMask => wiremask_adjust(netlist, placement, canvas),
    }
}
