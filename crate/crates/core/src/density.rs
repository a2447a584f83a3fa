//! Bin density: a differentiable overflow penalty and the hard overflow
//! metric.
//!
//! Each movable cell contributes the overlap area between its footprint and
//! every bin. Footprints narrower than a bin along an axis are widened to
//! `sqrt(bin * len)` on that axis and their contribution is rescaled so the
//! total area is preserved. Fixed cells reduce bin capacity instead.

use rayon::prelude::*;

use crate::metrics::compensated_sum;
use crate::model::{Canvas, Cell, Netlist, Placement};
use crate::wirelength::Gradient;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub canvas: Canvas,
    pub bin_w: f64,
    pub bin_h: f64,
    /// Smoothed movable area per bin, row-major (`gy * nx + gx`).
    pub usage: Vec<f64>,
    /// Bin area left after fixed-cell blockage.
    pub capacity: Vec<f64>,
    /// Unsmoothed total area of movable cells.
    pub movable_area: f64,
}

impl DensityGrid {
    pub fn nx(&self) -> usize {
        self.canvas.grid_nx
    }

    pub fn ny(&self) -> usize {
        self.canvas.grid_ny
    }

    pub fn index(&self, gx: usize, gy: usize) -> usize {
        gy * self.canvas.grid_nx + gx
    }
}

/// One axis of a (possibly widened) footprint.
#[derive(Debug, Clone, Copy)]
struct Span {
    lo: f64,
    hi: f64,
}

fn smoothed_len(len: f64, bin: f64) -> f64 {
    if len < bin {
        (len * bin).sqrt()
    } else {
        len
    }
}

/// Footprint spans of a movable cell and the density scale applied to it.
fn footprint(cell: &Cell, x: f64, y: f64, bin_w: f64, bin_h: f64) -> (Span, Span, f64) {
    let w = smoothed_len(cell.width, bin_w);
    let h = smoothed_len(cell.height, bin_h);
    let cx = x + 0.5 * cell.width;
    let cy = y + 0.5 * cell.height;
    let sx = Span { lo: cx - 0.5 * w, hi: cx + 0.5 * w };
    let sy = Span { lo: cy - 0.5 * h, hi: cy + 0.5 * h };
    (sx, sy, cell.area() / (w * h))
}

/// Bins along one axis touched by `span`, with their overlap length and
/// the derivative of that length with respect to a shift of the span.
struct AxisBins {
    first: usize,
    overlap: Vec<f64>,
    slope: Vec<f64>,
}

fn axis_bins(span: Span, origin: f64, end: f64, bin: f64, n: usize) -> AxisBins {
    let lo = ((span.lo - origin) / bin).floor();
    let hi = ((span.hi - origin) / bin).ceil();
    let first = lo.max(0.0).min(n as f64) as usize;
    let last = hi.max(0.0).min(n as f64) as usize;
    let mut overlap = Vec::with_capacity(last.saturating_sub(first));
    let mut slope = Vec::with_capacity(overlap.capacity());
    for k in first..last {
        let b_lo = origin + k as f64 * bin;
        let b_hi = if k + 1 == n { end } else { origin + (k + 1) as f64 * bin };
        let ov = span.hi.min(b_hi) - span.lo.max(b_lo);
        if ov > 0.0 {
            overlap.push(ov);
            slope.push(f64::from(u8::from(span.hi < b_hi)) - f64::from(u8::from(span.lo > b_lo)));
        } else {
            overlap.push(0.0);
            slope.push(0.0);
        }
    }
    AxisBins { first, overlap, slope }
}

pub fn build_density(netlist: &Netlist, placement: &Placement, canvas: &Canvas) -> DensityGrid {
    let (nx, ny) = (canvas.grid_nx, canvas.grid_ny);
    let (bin_w, bin_h) = (canvas.bin_w(), canvas.bin_h());
    let mut usage = vec![0.0; nx * ny];
    let mut blocked = vec![0.0; nx * ny];
    for cell in netlist.cells() {
        let p = placement.get(cell.id);
        if cell.is_fixed() {
            let sx = Span { lo: p.x, hi: p.x + cell.width };
            let sy = Span { lo: p.y, hi: p.y + cell.height };
            let bx = axis_bins(sx, canvas.xl, canvas.xh, bin_w, nx);
            let by = axis_bins(sy, canvas.yl, canvas.yh, bin_h, ny);
            for (j, oy) in by.overlap.iter().enumerate() {
                for (i, ox) in bx.overlap.iter().enumerate() {
                    blocked[(by.first + j) * nx + bx.first + i] += ox * oy;
                }
            }
        } else {
            let (sx, sy, scale) = footprint(cell, p.x, p.y, bin_w, bin_h);
            let bx = axis_bins(sx, canvas.xl, canvas.xh, bin_w, nx);
            let by = axis_bins(sy, canvas.yl, canvas.yh, bin_h, ny);
            for (j, oy) in by.overlap.iter().enumerate() {
                for (i, ox) in bx.overlap.iter().enumerate() {
                    usage[(by.first + j) * nx + bx.first + i] += scale * ox * oy;
                }
            }
        }
    }
    let bin_area = |gx: usize, gy: usize| {
        let w = if gx + 1 == nx { canvas.xh - (canvas.xl + gx as f64 * bin_w) } else { bin_w };
        let h = if gy + 1 == ny { canvas.yh - (canvas.yl + gy as f64 * bin_h) } else { bin_h };
        w * h
    };
    let capacity = (0..nx * ny)
        .map(|b| (bin_area(b % nx, b / nx) - blocked[b]).max(0.0))
        .collect();
    DensityGrid {
        canvas: *canvas,
        bin_w,
        bin_h,
        usage,
        capacity,
        movable_area: compensated_sum(netlist.movable_cells().map(Cell::area)),
    }
}

/// `sum_b max(0, usage/capacity - target)^2` over bins with capacity.
pub fn density_penalty(grid: &DensityGrid, target: f64) -> f64 {
    compensated_sum(grid.usage.iter().zip(&grid.capacity).map(|(&u, &c)| {
        if c > 0.0 {
            let excess = (u / c - target).max(0.0);
            excess * excess
        } else {
            0.0
        }
    }))
}

/// Analytic gradient of [`density_penalty`] with respect to every movable
/// cell's lower-left corner. `grid` must have been built from `placement`.
pub fn density_gradient(netlist: &Netlist, placement: &Placement, grid: &DensityGrid, target: f64) -> Gradient {
    let coef: Vec<f64> = grid
        .usage
        .iter()
        .zip(&grid.capacity)
        .map(|(&u, &c)| if c > 0.0 { 2.0 * (u / c - target).max(0.0) / c } else { 0.0 })
        .collect();
    let canvas = &grid.canvas;
    let nx = canvas.grid_nx;
    let cells = netlist.cells();
    let (d_x, d_y) = (0..netlist.num_cells())
        .into_par_iter()
        .map(|id| {
            let cell = &cells[id];
            if cell.is_fixed() {
                return (0.0, 0.0);
            }
            let p = placement.get(id);
            let (sx, sy, scale) = footprint(cell, p.x, p.y, grid.bin_w, grid.bin_h);
            let bx = axis_bins(sx, canvas.xl, canvas.xh, grid.bin_w, nx);
            let by = axis_bins(sy, canvas.yl, canvas.yh, grid.bin_h, canvas.grid_ny);
            let (mut gx, mut gy) = (0.0, 0.0);
            for (j, (oy, sly)) in by.overlap.iter().zip(&by.slope).enumerate() {
                for (i, (ox, slx)) in bx.overlap.iter().zip(&bx.slope).enumerate() {
                    let k = coef[(by.first + j) * nx + bx.first + i];
                    if k != 0.0 {
                        gx += k * slx * oy;
                        gy += k * ox * sly;
                    }
                }
            }
            (scale * gx, scale * gy)
        })
        .unzip();
    Gradient { d_x, d_y }
}

/// Fraction of movable area above `target` times capacity.
pub fn overflow(grid: &DensityGrid, target: f64) -> f64 {
    if grid.movable_area <= 0.0 {
        return 0.0;
    }
    let excess = compensated_sum(
        grid.usage
            .iter()
            .zip(&grid.capacity)
            .map(|(&u, &c)| (u - target * c).max(0.0)),
    );
    (excess / grid.movable_area).clamp(0.0, 1.0)
}
