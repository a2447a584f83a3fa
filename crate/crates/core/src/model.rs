//! Shared domain types: cells, pins, nets, the netlist hypergraph, the
//! placement canvas and placements themselves.
//!
//! Cells and nets are addressed by dense integer ids assigned in file
//! order. Positions are lower-left corners in database units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CellId = usize;
pub type NetId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    Movable,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub kind: CellKind,
    pub is_macro: bool,
}

impl Cell {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn is_fixed(&self) -> bool {
        self.kind == CellKind::Fixed
    }

    pub fn is_movable(&self) -> bool {
        self.kind == CellKind::Movable
    }

    pub fn is_movable_macro(&self) -> bool {
        self.is_macro && self.is_movable()
    }
}

/// A pin, with its offset measured from the owning cell's lower-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub cell: CellId,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub id: NetId,
    pub name: String,
    pub pins: Vec<Pin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Immutable netlist hypergraph with a cell-to-net incidence index.
///
/// Besides the per-net pin lists, pins are also addressed by a flat index
/// (`pin_offset(net) + k`), which the gradient kernels use to assemble
/// per-cell sums in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    cells: Vec<Cell>,
    nets: Vec<Net>,
    pin_offsets: Vec<usize>,
    cell_pins: Vec<Vec<usize>>,
    cell_nets: Vec<Vec<NetId>>,
}

#[derive(Debug, Clone, PartialEq)]
struct Incidence {
    pin_offsets: Vec<usize>,
    cell_pins: Vec<Vec<usize>>,
    cell_nets: Vec<Vec<NetId>>,
}

fn build_incidence(num_cells: usize, nets: &[Net]) -> Incidence {
    let mut pin_offsets = Vec::with_capacity(nets.len() + 1);
    let mut cell_pins = vec![Vec::new(); num_cells];
    let mut cell_nets: Vec<Vec<NetId>> = vec![Vec::new(); num_cells];
    let mut flat = 0;
    for net in nets {
        pin_offsets.push(flat);
        for pin in &net.pins {
            cell_pins[pin.cell].push(flat);
            let incident = &mut cell_nets[pin.cell];
            if incident.last() != Some(&net.id) {
                incident.push(net.id);
            }
            flat += 1;
        }
    }
    pin_offsets.push(flat);
    Incidence {
        pin_offsets,
        cell_pins,
        cell_nets,
    }
}

impl Netlist {
    pub fn new(cells: Vec<Cell>, nets: Vec<Net>) -> Result<Self> {
        for (i, cell) in cells.iter().enumerate() {
            if cell.id != i {
                return Err(Error::InvalidNetlist(format!(
                    "cell '{}' has id {} at index {i}",
                    cell.name, cell.id
                )));
            }
            if !(cell.width > 0.0 && cell.height > 0.0)
                || !cell.width.is_finite()
                || !cell.height.is_finite()
            {
                return Err(Error::InvalidNetlist(format!(
                    "cell '{}' has non-positive size {} x {}",
                    cell.name, cell.width, cell.height
                )));
            }
        }
        for (i, net) in nets.iter().enumerate() {
            if net.id != i {
                return Err(Error::InvalidNetlist(format!(
                    "net '{}' has id {} at index {i}",
                    net.name, net.id
                )));
            }
            if net.pins.is_empty() {
                return Err(Error::InvalidNetlist(format!("net '{}' has no pins", net.name)));
            }
            if let Some(pin) = net.pins.iter().find(|p| p.cell >= cells.len()) {
                return Err(Error::InvalidNetlist(format!(
                    "net '{}' references unknown cell {}",
                    net.name, pin.cell
                )));
            }
        }
        let inc = build_incidence(cells.len(), &nets);
        Ok(Netlist {
            cells,
            nets,
            pin_offsets: inc.pin_offsets,
            cell_pins: inc.cell_pins,
            cell_nets: inc.cell_nets,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id]
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_nets(&self) -> usize {
        self.nets.len()
    }

    pub fn num_pins(&self) -> usize {
        *self.pin_offsets.last().unwrap_or(&0)
    }

    /// Flat index of the first pin of `net`.
    pub fn pin_offset(&self, net: NetId) -> usize {
        self.pin_offsets[net]
    }

    /// Flat pin indices owned by `cell`, ascending.
    pub fn cell_pins(&self, cell: CellId) -> &[usize] {
        &self.cell_pins[cell]
    }

    /// Distinct nets incident to `cell`, ascending.
    pub fn cell_nets(&self, cell: CellId) -> &[NetId] {
        &self.cell_nets[cell]
    }

    pub fn movable_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_movable())
    }

    pub fn movable_macros(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_movable_macro())
    }

    pub fn num_macros(&self) -> usize {
        self.cells.iter().filter(|c| c.is_macro).count()
    }

    /// Recomputes the incidence index from the nets and compares it with
    /// the stored one.
    pub fn incidence_consistent(&self) -> bool {
        let inc = build_incidence(self.cells.len(), &self.nets);
        inc.pin_offsets == self.pin_offsets
            && inc.cell_pins == self.cell_pins
            && inc.cell_nets == self.cell_nets
    }

    /// Re-derives the macro flags. See [`classify_macros`].
    pub fn with_macro_rule(mut self, row_height: Option<f64>, area_factor: f64) -> Self {
        classify_macros(&mut self.cells, row_height, area_factor);
        self
    }

    /// Marks an explicit set of cells as macros, clearing all other flags.
    pub fn with_macros(mut self, macros: &[CellId]) -> Self {
        for c in &mut self.cells {
            c.is_macro = false;
        }
        for &id in macros {
            self.cells[id].is_macro = true;
        }
        self
    }
}

/// Default ratio between a macro's area and the median movable-cell area
/// when no row height is known.
pub const DEFAULT_MACRO_AREA_FACTOR: f64 = 10.0;

/// Flags movable cells as macros: taller than the row height when rows are
/// known, otherwise at least `area_factor` times the median movable area.
/// Fixed cells are never flagged.
pub fn classify_macros(cells: &mut [Cell], row_height: Option<f64>, area_factor: f64) {
    match row_height {
        Some(rh) => {
            for c in cells.iter_mut() {
                c.is_macro = c.is_movable() && c.height > rh;
            }
        }
        None => {
            let mut areas: Vec<f64> = cells.iter().filter(|c| c.is_movable()).map(Cell::area).collect();
            if areas.is_empty() {
                for c in cells.iter_mut() {
                    c.is_macro = false;
                }
                return;
            }
            areas.sort_by(f64::total_cmp);
            let n = areas.len();
            let median = if n % 2 == 1 {
                areas[n / 2]
            } else {
                0.5 * (areas[n / 2 - 1] + areas[n / 2])
            };
            for c in cells.iter_mut() {
                c.is_macro = c.is_movable() && c.area() >= area_factor * median;
            }
        }
    }
}

/// The placement region plus the uniform grid used by density bins and
/// wire masks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub xl: f64,
    pub yl: f64,
    pub xh: f64,
    pub yh: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
}

impl Canvas {
    pub fn new(xl: f64, yl: f64, xh: f64, yh: f64, grid_nx: usize, grid_ny: usize) -> Result<Self> {
        let finite = [xl, yl, xh, yh].iter().all(|v| v.is_finite());
        if !finite || xl >= xh || yl >= yh {
            return Err(Error::InvalidConfig(format!(
                "degenerate canvas [{xl}, {xh}] x [{yl}, {yh}]"
            )));
        }
        if grid_nx == 0 || grid_ny == 0 {
            return Err(Error::InvalidConfig(format!(
                "grid must have at least one bin per axis, got {grid_nx} x {grid_ny}"
            )));
        }
        Ok(Canvas {
            xl,
            yl,
            xh,
            yh,
            grid_nx,
            grid_ny,
        })
    }

    pub fn width(&self) -> f64 {
        self.xh - self.xl
    }

    pub fn height(&self) -> f64 {
        self.yh - self.yl
    }

    pub fn bin_w(&self) -> f64 {
        self.width() / self.grid_nx as f64
    }

    pub fn bin_h(&self) -> f64 {
        self.height() / self.grid_ny as f64
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xl + self.xh), 0.5 * (self.yl + self.yh))
    }

    pub fn with_grid(self, grid_nx: usize, grid_ny: usize) -> Result<Self> {
        Canvas::new(self.xl, self.yl, self.xh, self.yh, grid_nx, grid_ny)
    }

    pub fn fits(&self, cell: &Cell) -> bool {
        cell.width <= self.width() && cell.height <= self.height()
    }
}

/// Default bins per axis: `2^ceil(log2 sqrt(n))`, clamped to `[32, 1024]`.
pub fn default_grid_size(movable_cells: usize) -> usize {
    let root = (movable_cells as f64).sqrt();
    let pow = if root <= 1.0 { 1 } else { 1usize << (root.log2().ceil() as u32) };
    pow.clamp(32, 1024)
}

/// Lower-left corner of every cell, indexed by cell id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub positions: Vec<Point>,
}

impl Placement {
    pub fn new(positions: Vec<Point>) -> Self {
        Placement { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn get(&self, cell: CellId) -> Point {
        self.positions[cell]
    }

    pub fn set(&mut self, cell: CellId, p: Point) {
        self.positions[cell] = p;
    }

    pub fn is_valid_for(&self, netlist: &Netlist) -> bool {
        self.positions.len() == netlist.num_cells()
            && self.positions.iter().all(|p| p.x.is_finite() && p.y.is_finite())
    }
}

/// Absolute coordinate of a pin.
#[inline]
pub fn pin_position(placement: &Placement, pin: &Pin) -> Point {
    let p = placement.positions[pin.cell];
    Point::new(p.x + pin.dx, p.y + pin.dy)
}

/// Pulls a lower-left corner back inside the canvas so the whole cell fits.
pub fn clamp_to_canvas(canvas: &Canvas, cell: &Cell, x: f64, y: f64) -> Result<Point> {
    if !canvas.fits(cell) {
        return Err(Error::CellLargerThanCanvas {
            cell: cell.id,
            width: cell.width,
            height: cell.height,
        });
    }
    Ok(Point::new(
        x.clamp(canvas.xl, canvas.xh - cell.width),
        y.clamp(canvas.yl, canvas.yh - cell.height),
    ))
}

/// Axis-aligned rectangle, used for overlap tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub xl: f64,
    pub yl: f64,
    pub xh: f64,
    pub yh: f64,
}

impl Rect {
    pub fn of_cell(cell: &Cell, at: Point) -> Self {
        Rect {
            xl: at.x,
            yl: at.y,
            xh: at.x + cell.width,
            yh: at.y + cell.height,
        }
    }

    /// True when the interiors intersect; touching edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.xl < other.xh && other.xl < self.xh && self.yl < other.yh && other.yl < self.yh
    }
}
