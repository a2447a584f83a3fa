//! Outer loop alternating a converged descent with a perturbation of its
//! result, keeping the lowest-HPWL solution seen.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bookshelf::BookshelfDesign;
use crate::error::Result;
use crate::metrics::{macro_hpwl, MacroHpwlMode};
use crate::perturb::{apply, PerturbStrategy};
use crate::placer::{descend, init_placement, InitMode, PlacerConfig, PlacerResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybroConfig {
    /// Number of perturbations; the loop runs `iterations + 1` descents.
    pub iterations: usize,
    pub strategy: PerturbStrategy,
    pub placer: PlacerConfig,
    /// Re-initialize from a fresh seed instead of perturbing.
    pub baseline_mode: bool,
    pub init_mode: InitMode,
    /// Perturb the best solution so far rather than the latest one.
    pub perturb_best: bool,
    pub macro_hpwl_mode: MacroHpwlMode,
}

impl Default for HybroConfig {
    fn default() -> Self {
        HybroConfig {
            iterations: 5,
            strategy: PerturbStrategy::default(),
            placer: PlacerConfig::default(),
            baseline_mode: false,
            init_mode: InitMode::RandomCenter,
            perturb_best: false,
            macro_hpwl_mode: MacroHpwlMode::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub hpwl: f64,
    pub macro_hpwl: f64,
    pub best_hpwl: f64,
    pub steps: usize,
    pub converged: bool,
    pub t_descent_s: f64,
    /// Time spent producing the next starting point; zero on the last
    /// iteration.
    pub t_perturb_s: f64,
    pub infeasible_macros: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HybroTrace {
    pub records: Vec<IterationRecord>,
}

impl HybroTrace {
    pub fn best_hpwl(&self) -> Option<f64> {
        self.records.last().map(|r| r.best_hpwl)
    }

    /// Mean descent and perturbation seconds over iterations that were
    /// followed by a perturbation.
    pub fn mean_phase_times(&self) -> Option<(f64, f64)> {
        let n = self.records.len().checked_sub(1).filter(|&n| n > 0)?;
        let r = &self.records[..n];
        let d = r.iter().map(|r| r.t_descent_s).sum::<f64>() / n as f64;
        let p = r.iter().map(|r| r.t_perturb_s).sum::<f64>() / n as f64;
        Some((d, p))
    }
}

/// Runs `iterations + 1` descents with a perturbation (or a fresh start in
/// baseline mode) between consecutive ones and returns the best result.
pub fn run_hybro(design: &BookshelfDesign, config: &HybroConfig) -> Result<(PlacerResult, HybroTrace)> {
    run_hybro_observed(design, config, |_, _| Ok(()))
}

/// [`run_hybro`] with a callback invoked on every descent result, in order.
/// An error from the callback aborts the run.
pub fn run_hybro_observed<F>(
    design: &BookshelfDesign,
    config: &HybroConfig,
    mut observe: F,
) -> Result<(PlacerResult, HybroTrace)>
where
    F: FnMut(usize, &PlacerResult) -> Result<()>,
{
    config.placer.validate()?;
    let netlist = &design.netlist;
    let base_seed = config.placer.seed;
    let mut start = init_placement(design, base_seed, config.init_mode)?;
    let mut best: Option<PlacerResult> = None;
    let mut trace = HybroTrace::default();
    for i in 0..=config.iterations {
        let t0 = Instant::now();
        let result = descend(design, &start, &config.placer)?;
        let t_descent_s = t0.elapsed().as_secs_f64();
        observe(i, &result)?;
        let improved = best.as_ref().is_none_or(|b| result.hpwl < b.hpwl);
        let mhpwl = macro_hpwl(netlist, &result.placement, config.macro_hpwl_mode);
        let mut record = IterationRecord {
            iteration: i,
            hpwl: result.hpwl,
            macro_hpwl: mhpwl,
            best_hpwl: 0.0,
            steps: result.steps_taken,
            converged: result.converged,
            t_descent_s,
            t_perturb_s: 0.0,
            infeasible_macros: 0,
        };
        log::info!(
            "iteration {i}: hpwl {} after {} steps (converged: {})",
            result.hpwl,
            result.steps_taken,
            result.converged
        );
        if improved {
            best = Some(result.clone());
        }
        let best_ref = best.as_ref().expect("set on first iteration");
        record.best_hpwl = best_ref.hpwl;

        if i < config.iterations {
            let t1 = Instant::now();
            if config.baseline_mode {
                start = init_placement(design, base_seed.wrapping_add(i as u64 + 1), config.init_mode)?;
            } else {
                let source = if config.perturb_best { &best_ref.placement } else { &result.placement };
                let strategy = PerturbStrategy {
                    seed: config.strategy.seed.wrapping_add(i as u64),
                    ..config.strategy
                };
                let perturbed = apply(&strategy, netlist, source, &design.canvas);
                record.infeasible_macros = perturbed.infeasible.len();
                start = perturbed.placement;
            }
            record.t_perturb_s = t1.elapsed().as_secs_f64();
        }
        trace.records.push(record);
    }
    Ok((best.expect("at least one descent"), trace))
}

/// Independent restarts: the baseline that keeps the best of
/// `iterations + 1` descents from fresh starting points.
pub fn run_multiple(design: &BookshelfDesign, config: &HybroConfig) -> Result<(PlacerResult, HybroTrace)> {
    let config = HybroConfig {
        baseline_mode: true,
        ..config.clone()
    };
    run_hybro(design, &config)
}
