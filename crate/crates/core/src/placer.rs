//! First-order global placer.
//!
//! Minimizes `WA(s) + lambda * D(s)` where `WA` is the weighted-average
//! wirelength and `D` the bin overflow penalty. The density weight starts
//! small and grows while the overflow is above the stopping threshold; the
//! smoothing coefficient follows the overflow on a log scale between
//! `gamma_start_bins` and `gamma_end_bins` bin widths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::bookshelf::BookshelfDesign;
use crate::density::{build_density, density_gradient, density_penalty, overflow};
use crate::error::{Error, Result};
use crate::metrics::hpwl;
use crate::model::{clamp_to_canvas, Canvas, Netlist, Placement, Point};
use crate::wirelength::{wa_total, wa_value_and_gradient, Gradient, WaParams};

/// Divergence guard: the objective may not exceed this multiple of its
/// starting value.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
/// Learning-rate halvings attempted after a divergence.
pub const MAX_DIVERGENCE_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    RandomCenter,
    Spread,
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// Adam-style momentum with per-coordinate step scaling.
    Adam,
    /// Plain projected gradient steps with Armijo backtracking on the
    /// wirelength alone (density weight forced to zero, gamma fixed).
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaSchedule {
    /// Interpolated on a log scale from `start_bins` (overflow 1) down to
    /// `end_bins` (overflow at or below the stopping threshold), in
    /// average bin widths.
    Annealed { start_bins: f64, end_bins: f64 },
    /// Constant gamma in length units.
    Fixed(f64),
}

impl Default for GammaSchedule {
    fn default() -> Self {
        GammaSchedule::Annealed {
            start_bins: 4.0,
            end_bins: 0.5,
        }
    }
}

impl GammaSchedule {
    pub fn gamma(&self, overflow: f64, eps_stop: f64, bin: f64) -> f64 {
        match *self {
            GammaSchedule::Fixed(g) => g,
            GammaSchedule::Annealed { start_bins, end_bins } => {
                let u = if eps_stop >= 1.0 {
                    0.0
                } else {
                    ((overflow - eps_stop) / (1.0 - eps_stop)).clamp(0.0, 1.0)
                };
                bin * (end_bins.ln() + u * (start_bins.ln() - end_bins.ln())).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacerConfig {
    /// Explicit starting density weight; `None` balances the two gradient
    /// norms at the first step, scaled by `lambda_ratio`.
    pub lambda0: Option<f64>,
    pub lambda_ratio: f64,
    pub lambda_growth: f64,
    pub gamma: GammaSchedule,
    /// Step length in bin widths.
    pub learning_rate_bins: f64,
    /// Per-step learning-rate factor applied while the overflow target is met.
    pub lr_decay: f64,
    pub max_steps: usize,
    pub stall_window: usize,
    pub stall_tol: f64,
    pub eps_stop: f64,
    pub target_density: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for PlacerConfig {
    fn default() -> Self {
        PlacerConfig {
            lambda0: None,
            lambda_ratio: 1e-4,
            lambda_growth: 1.05,
            gamma: GammaSchedule::default(),
            learning_rate_bins: 0.3,
            lr_decay: 0.98,
            max_steps: 2000,
            stall_window: 50,
            stall_tol: 1e-4,
            eps_stop: 0.10,
            target_density: 1.0,
            optimizer: Optimizer::Adam,
            seed: 1,
        }
    }
}

impl PlacerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if let Some(l) = self.lambda0 {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda0 must be positive, got {l}"));
            }
        }
        if !(self.lambda_ratio > 0.0 && self.lambda_ratio.is_finite()) {
            return bad(format!("lambda_ratio must be positive, got {}", self.lambda_ratio));
        }
        if !(self.lambda_growth >= 1.0 && self.lambda_growth.is_finite()) {
            return bad(format!("lambda_growth must be at least 1, got {}", self.lambda_growth));
        }
        if !(self.learning_rate_bins > 0.0 && self.learning_rate_bins.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate_bins));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad(format!("lr_decay must lie in (0, 1], got {}", self.lr_decay));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if self.stall_window == 0 {
            return bad("stall_window must be at least 1".into());
        }
        if !(self.target_density > 0.0 && self.target_density <= 1.0) {
            return bad(format!("target density must lie in (0, 1], got {}", self.target_density));
        }
        if !(0.0..=1.0).contains(&self.eps_stop) {
            return bad(format!("eps_stop must lie in [0, 1], got {}", self.eps_stop));
        }
        match self.gamma {
            GammaSchedule::Fixed(g) => {
                WaParams::new(g)?;
            }
            GammaSchedule::Annealed { start_bins, end_bins } => {
                if !(start_bins > 0.0 && end_bins > 0.0 && start_bins.is_finite() && end_bins.is_finite()) {
                    return bad("gamma schedule endpoints must be positive".into());
                }
            }
        }
        Ok(())
    }
}

/// One row of the objective trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub wa: f64,
    pub penalty: f64,
    pub lambda: f64,
    pub overflow: f64,
    pub hpwl: f64,
}

impl TraceRow {
    pub fn objective(&self) -> f64 {
        self.wa + self.lambda * self.penalty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacerResult {
    pub placement: Placement,
    pub hpwl: f64,
    pub overflow: f64,
    pub steps_taken: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

fn check_fits(netlist: &Netlist, canvas: &Canvas) -> Result<()> {
    match netlist.movable_cells().find(|c| !canvas.fits(c)) {
        Some(c) => Err(Error::CellLargerThanCanvas {
            cell: c.id,
            width: c.width,
            height: c.height,
        }),
        None => Ok(()),
    }
}

/// Starting placement. Fixed cells always keep their load-time positions
/// and movable cells are clamped into the canvas.
pub fn init_placement(design: &BookshelfDesign, seed: u64, mode: InitMode) -> Result<Placement> {
    let netlist = &design.netlist;
    let canvas = &design.canvas;
    check_fits(netlist, canvas)?;
    let mut placement = design.initial.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        InitMode::Keep => {}
        InitMode::RandomCenter => {
            let c = canvas.center();
            let nx = Normal::new(c.x, 0.05 * canvas.width()).expect("finite sigma");
            let ny = Normal::new(c.y, 0.05 * canvas.height()).expect("finite sigma");
            for cell in netlist.movable_cells() {
                let x = nx.sample(&mut rng) - 0.5 * cell.width;
                let y = ny.sample(&mut rng) - 0.5 * cell.height;
                placement.set(cell.id, Point::new(x, y));
            }
        }
        InitMode::Spread => {
            let movable: Vec<_> = netlist.movable_cells().map(|c| c.id).collect();
            let per_row = ((movable.len() as f64).sqrt().ceil() as usize).max(1);
            let rows = movable.len().div_ceil(per_row).max(1);
            let sw = canvas.width() / per_row as f64;
            let sh = canvas.height() / rows as f64;
            let jitter = Uniform::new(-0.25, 0.25).expect("valid range");
            for (k, &id) in movable.iter().enumerate() {
                let cell = netlist.cell(id);
                let cx = canvas.xl + ((k % per_row) as f64 + 0.5 + jitter.sample(&mut rng)) * sw;
                let cy = canvas.yl + ((k / per_row) as f64 + 0.5 + jitter.sample(&mut rng)) * sh;
                placement.set(id, Point::new(cx - 0.5 * cell.width, cy - 0.5 * cell.height));
            }
        }
    }
    for cell in netlist.movable_cells() {
        let p = placement.get(cell.id);
        placement.set(cell.id, clamp_to_canvas(canvas, cell, p.x, p.y)?);
    }
    for cell in netlist.cells().iter().filter(|c| c.is_fixed()) {
        placement.set(cell.id, design.initial.get(cell.id));
    }
    Ok(placement)
}

/// Objective terms evaluated at one placement.
struct Eval {
    wa: f64,
    wa_grad: Gradient,
    penalty: f64,
    density_grad: Gradient,
    overflow: f64,
}

struct Problem<'a> {
    netlist: &'a Netlist,
    canvas: &'a Canvas,
    config: &'a PlacerConfig,
    bin: f64,
}

impl Problem<'_> {
    fn gamma_for(&self, ovf: f64) -> Result<WaParams> {
        WaParams::new(self.config.gamma.gamma(ovf, self.config.eps_stop, self.bin))
    }

    fn evaluate(&self, placement: &Placement, with_density_grad: bool) -> Result<Eval> {
        let grid = build_density(self.netlist, placement, self.canvas);
        let ovf = overflow(&grid, self.config.target_density);
        let params = self.gamma_for(ovf)?;
        let (wa, wa_grad) = wa_value_and_gradient(self.netlist, placement, &params);
        let penalty = density_penalty(&grid, self.config.target_density);
        let density_grad = if with_density_grad {
            density_gradient(self.netlist, placement, &grid, self.config.target_density)
        } else {
            Gradient::zeros(self.netlist.num_cells())
        };
        Ok(Eval {
            wa,
            wa_grad,
            penalty,
            density_grad,
            overflow: ovf,
        })
    }

    /// Relative objective change over the stall window is below tolerance.
    /// With `spread` set, every step in the window must also meet the
    /// overflow target, so a window straddling the density ramp never counts.
    fn stalled(&self, trace: &[TraceRow], spread: bool) -> bool {
        let w = self.config.stall_window;
        let Some(last) = trace.last() else { return false };
        if trace.len() <= w {
            return false;
        }
        if spread && trace[trace.len() - 1 - w..].iter().any(|r| r.overflow > self.config.eps_stop) {
            return false;
        }
        let prev = trace[trace.len() - 1 - w].objective();
        let cur = last.objective();
        if prev == 0.0 {
            return cur == 0.0;
        }
        ((cur - prev) / prev).abs() < self.config.stall_tol
    }
}

enum RunError {
    Diverged(f64, f64),
    Other(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Other(e)
    }
}

/// Runs the placer from `placement` until convergence or the step budget.
/// Divergence triggers up to [`MAX_DIVERGENCE_RETRIES`] restarts with a
/// halved learning rate.
pub fn descend(design: &BookshelfDesign, placement: &Placement, config: &PlacerConfig) -> Result<PlacerResult> {
    config.validate()?;
    let netlist = &design.netlist;
    let canvas = &design.canvas;
    if !placement.is_valid_for(netlist) {
        return Err(Error::InvalidConfig(format!(
            "placement has {} positions for {} cells",
            placement.len(),
            netlist.num_cells()
        )));
    }
    check_fits(netlist, canvas)?;
    let mut start = placement.clone();
    for cell in netlist.cells() {
        let p = if cell.is_fixed() {
            design.initial.get(cell.id)
        } else {
            let p = start.get(cell.id);
            clamp_to_canvas(canvas, cell, p.x, p.y)?
        };
        start.set(cell.id, p);
    }
    let problem = Problem {
        netlist,
        canvas,
        config,
        bin: 0.5 * (canvas.bin_w() + canvas.bin_h()),
    };
    let base_lr = config.learning_rate_bins * canvas.bin_w();
    let mut lr = base_lr;
    let mut retries = 0;
    loop {
        let outcome = match config.optimizer {
            Optimizer::Adam => run_adam(&problem, start.clone(), lr),
            Optimizer::Backtracking => run_backtracking(&problem, start.clone(), lr),
        };
        match outcome {
            Ok(result) => return Ok(result),
            Err(RunError::Diverged(value, limit)) => {
                if retries == MAX_DIVERGENCE_RETRIES {
                    return Err(Error::DivergenceDetected { value, limit, retries });
                }
                retries += 1;
                lr *= 0.5;
                log::warn!("objective diverged, retrying with learning rate {lr}");
            }
            Err(RunError::Other(e)) => return Err(e),
        }
    }
}

fn finish(problem: &Problem<'_>, placement: Placement, ovf: f64, steps: usize, converged: bool, trace: Vec<TraceRow>) -> PlacerResult {
    PlacerResult {
        hpwl: hpwl(problem.netlist, &placement),
        placement,
        overflow: ovf,
        steps_taken: steps,
        converged,
        trace,
    }
}

fn project(problem: &Problem<'_>, placement: &mut Placement, id: usize, x: f64, y: f64) {
    let cell = problem.netlist.cell(id);
    // fit was checked up front
    let c = problem.canvas;
    placement.set(
        id,
        Point::new(x.clamp(c.xl, c.xh - cell.width), y.clamp(c.yl, c.yh - cell.height)),
    );
}

fn run_adam(problem: &Problem<'_>, mut placement: Placement, lr0: f64) -> Result<PlacerResult, RunError> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-12;
    let config = problem.config;
    let netlist = problem.netlist;
    let movable: Vec<usize> = netlist.movable_cells().map(|c| c.id).collect();
    let n = netlist.num_cells();
    let (mut m_x, mut m_y, mut v_x, mut v_y) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    let mut eval = problem.evaluate(&placement, true)?;
    let mut lambda = config.lambda0;
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut lr = lr0;
    let mut limit = f64::INFINITY;
    let mut converged = false;
    let mut step = 0;
    loop {
        if lambda.is_none() {
            let dn = eval.density_grad.l1_norm();
            if dn > 0.0 {
                lambda = Some(config.lambda_ratio * eval.wa_grad.l1_norm().max(f64::MIN_POSITIVE) / dn);
            }
        }
        let lam = lambda.unwrap_or(0.0);
        let row = TraceRow {
            step,
            wa: eval.wa,
            penalty: eval.penalty,
            lambda: lam,
            overflow: eval.overflow,
            hpwl: hpwl(netlist, &placement),
        };
        let f = row.objective();
        if step == 0 {
            limit = DIVERGENCE_FACTOR * f.abs().max(f64::MIN_POSITIVE);
        }
        if !f.is_finite() || f > limit {
            return Err(RunError::Diverged(f, limit));
        }
        trace.push(row);
        if problem.stalled(&trace, true) {
            converged = true;
            break;
        }
        if step == config.max_steps {
            break;
        }

        step += 1;
        let bc1 = 1.0 - BETA1.powi(step as i32);
        let bc2 = 1.0 - BETA2.powi(step as i32);
        for &id in &movable {
            let gx = eval.wa_grad.d_x[id] + lam * eval.density_grad.d_x[id];
            let gy = eval.wa_grad.d_y[id] + lam * eval.density_grad.d_y[id];
            m_x[id] = BETA1 * m_x[id] + (1.0 - BETA1) * gx;
            m_y[id] = BETA1 * m_y[id] + (1.0 - BETA1) * gy;
            v_x[id] = BETA2 * v_x[id] + (1.0 - BETA2) * gx * gx;
            v_y[id] = BETA2 * v_y[id] + (1.0 - BETA2) * gy * gy;
            let sx = lr * (m_x[id] / bc1) / ((v_x[id] / bc2).sqrt() + EPS);
            let sy = lr * (m_y[id] / bc1) / ((v_y[id] / bc2).sqrt() + EPS);
            let p = placement.get(id);
            project(problem, &mut placement, id, p.x - sx, p.y - sy);
        }
        if eval.overflow > config.eps_stop {
            lambda = lambda.map(|l| l * config.lambda_growth);
        } else {
            lr *= config.lr_decay;
        }
        eval = problem.evaluate(&placement, true)?;
    }
    let ovf = eval.overflow;
    Ok(finish(problem, placement, ovf, step, converged, trace))
}

fn run_backtracking(problem: &Problem<'_>, mut placement: Placement, lr0: f64) -> Result<PlacerResult, RunError> {
    const ARMIJO: f64 = 1e-4;
    const MAX_HALVINGS: usize = 40;
    let config = problem.config;
    let netlist = problem.netlist;
    let movable: Vec<usize> = netlist.movable_cells().map(|c| c.id).collect();
    let gamma = match config.gamma {
        GammaSchedule::Fixed(g) => WaParams::new(g)?,
        GammaSchedule::Annealed { end_bins, .. } => WaParams::new(end_bins * problem.bin)?,
    };
    let density_of = |pl: &Placement| {
        let grid = build_density(netlist, pl, problem.canvas);
        (
            overflow(&grid, config.target_density),
            density_penalty(&grid, config.target_density),
        )
    };

    let (mut f, mut grad) = wa_value_and_gradient(netlist, &placement, &gamma);
    let limit = DIVERGENCE_FACTOR * f.abs().max(f64::MIN_POSITIVE);
    let mut alpha = lr0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut step = 0;
    let mut ovf;
    loop {
        let (o, pen) = density_of(&placement);
        ovf = o;
        trace.push(TraceRow {
            step,
            wa: f,
            penalty: pen,
            lambda: 0.0,
            overflow: ovf,
            hpwl: hpwl(netlist, &placement),
        });
        if !f.is_finite() || f > limit {
            return Err(RunError::Diverged(f, limit));
        }
        if problem.stalled(&trace, false) {
            converged = true;
            break;
        }
        if step == config.max_steps {
            break;
        }
        step += 1;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = placement.clone();
            let mut decrease = 0.0;
            for &id in &movable {
                let p = placement.get(id);
                project(problem, &mut trial, id, p.x - alpha * grad.d_x[id], p.y - alpha * grad.d_y[id]);
                let q = trial.get(id);
                decrease += grad.d_x[id] * (p.x - q.x) + grad.d_y[id] * (p.y - q.y);
            }
            let ft = wa_total(netlist, &trial, &gamma);
            if ft <= f - ARMIJO * decrease && decrease > 0.0 {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                placement = trial;
                let (_, g) = wa_value_and_gradient(netlist, &placement, &gamma);
                f = ft;
                grad = g;
                alpha *= 2.0;
            }
            None => {
                // no descent direction left within the canvas
                converged = true;
                break;
            }
        }
    }
    Ok(finish(problem, placement, ovf, step, converged, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cell, CellKind, Net, Pin};

    fn design(cells: Vec<(f64, f64, CellKind, Point)>, nets: Vec<Vec<usize>>, size: f64, grid: usize) -> BookshelfDesign {
        let initial = Placement::new(cells.iter().map(|c| c.3).collect());
        let cells = cells
            .into_iter()
            .enumerate()
            .map(|(id, (width, height, kind, _))| Cell {
                id,
                name: format!("c{id}"),
                width,
                height,
                kind,
                is_macro: false,
            })
            .collect();
        let nets = nets
            .into_iter()
            .enumerate()
            .map(|(id, cs)| Net {
                id,
                name: format!("n{id}"),
                pins: cs.into_iter().map(|cell| Pin { cell, dx: 0.5, dy: 0.5 }).collect(),
            })
            .collect();
        let n = initial.len();
        BookshelfDesign {
            netlist: Netlist::new(cells, nets).unwrap(),
            initial,
            canvas: Canvas::new(0.0, 0.0, size, size, grid, grid).unwrap(),
            row_height: None,
            non_image: vec![false; n],
        }
    }

    #[test]
    fn gamma_schedule_endpoints() {
        let s = GammaSchedule::default();
        assert!((s.gamma(1.0, 0.1, 2.0) - 8.0).abs() < 1e-12);
        assert!((s.gamma(0.1, 0.1, 2.0) - 1.0).abs() < 1e-12);
        assert!((s.gamma(0.0, 0.1, 2.0) - 1.0).abs() < 1e-12);
        let mid = s.gamma(0.55, 0.1, 2.0);
        assert!((mid - 8.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(PlacerConfig::default().validate().is_ok());
        let bad = [
            PlacerConfig { lambda0: Some(0.0), ..Default::default() },
            PlacerConfig { lambda_growth: 0.9, ..Default::default() },
            PlacerConfig { learning_rate_bins: 0.0, ..Default::default() },
            PlacerConfig { max_steps: 0, ..Default::default() },
            PlacerConfig { gamma: GammaSchedule::Fixed(-1.0), ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn init_is_deterministic_and_keeps_fixed_cells() {
        let d = design(
            vec![
                (1.0, 1.0, CellKind::Movable, Point::new(3.0, 3.0)),
                (1.0, 1.0, CellKind::Movable, Point::new(5.0, 5.0)),
                (1.0, 1.0, CellKind::Fixed, Point::new(9.0, 0.0)),
            ],
            vec![vec![0, 1, 2]],
            10.0,
            4,
        );
        for mode in [InitMode::RandomCenter, InitMode::Spread, InitMode::Keep] {
            let a = init_placement(&d, 7, mode).unwrap();
            let b = init_placement(&d, 7, mode).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.get(2), Point::new(9.0, 0.0));
        }
        assert_eq!(init_placement(&d, 7, InitMode::Keep).unwrap(), d.initial);
        assert_ne!(
            init_placement(&d, 1, InitMode::RandomCenter).unwrap(),
            init_placement(&d, 2, InitMode::RandomCenter).unwrap()
        );
    }

    #[test]
    fn two_cells_collapse_without_density_pressure() {
        let d = design(
            vec![
                (1.0, 1.0, CellKind::Movable, Point::new(10.0, 20.0)),
                (1.0, 1.0, CellKind::Movable, Point::new(70.0, 60.0)),
            ],
            vec![vec![0, 1]],
            100.0,
            32,
        );
        let r = descend(&d, &d.initial, &PlacerConfig::default()).unwrap();
        let initial = hpwl(&d.netlist, &d.initial);
        assert!(r.hpwl < 1e-3 * initial, "hpwl {} from {initial}", r.hpwl);
        assert!(r.trace.iter().all(|t| t.objective().is_finite()));
    }

    #[test]
    fn backtracking_is_monotone() {
        let d = design(
            vec![
                (1.0, 1.0, CellKind::Fixed, Point::new(0.0, 50.0)),
                (1.0, 1.0, CellKind::Movable, Point::new(10.0, 20.0)),
                (1.0, 1.0, CellKind::Movable, Point::new(70.0, 60.0)),
                (1.0, 1.0, CellKind::Fixed, Point::new(99.0, 10.0)),
            ],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 2]],
            100.0,
            16,
        );
        let config = PlacerConfig {
            optimizer: Optimizer::Backtracking,
            gamma: GammaSchedule::Fixed(2.0),
            ..Default::default()
        };
        let r = descend(&d, &d.initial, &config).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].wa <= w[0].wa, "{} -> {}", w[0].wa, w[1].wa);
        }
        assert!(r.trace.last().unwrap().wa < r.trace[0].wa);
    }

    #[test]
    fn oversized_cell_is_rejected() {
        let d = design(vec![(20.0, 1.0, CellKind::Movable, Point::new(0.0, 0.0))], vec![], 10.0, 4);
        assert!(matches!(
            descend(&d, &d.initial, &PlacerConfig::default()),
            Err(Error::CellLargerThanCanvas { .. })
        ));
    }
}
