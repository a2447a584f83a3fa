//! Analytical placement with perturbation-driven restarts.
//!
//! The crate reads Bookshelf designs, evaluates exact and smoothed
//! wirelength, runs a density-aware gradient placer and alternates it with
//! macro perturbations to escape poor local optima.

pub mod bookshelf;
pub mod density;
pub mod error;
pub mod hybro;
pub mod metrics;
pub mod model;
pub mod perturb;
pub mod placer;
pub mod synthetic;
pub mod wirelength;

pub use bookshelf::BookshelfDesign;
pub use error::{Error, Result};
pub use hybro::{run_hybro, run_multiple, HybroConfig, HybroTrace, IterationRecord};
pub use metrics::{hpwl, hpwl_total, macro_hpwl, HpwlReport, MacroHpwlMode};
pub use model::{Canvas, Cell, CellId, CellKind, Net, NetId, Netlist, Pin, Placement, Point};
pub use perturb::{PerturbKind, PerturbStrategy};
pub use placer::{descend, init_placement, InitMode, PlacerConfig, PlacerResult};
pub use wirelength::{Gradient, WaParams};
