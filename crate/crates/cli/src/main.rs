mod config;
mod manifest;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hybro_core::bookshelf::{format_pl, parse_aux, parse_aux_with_pl, read_aux, write_design};
use hybro_core::density::{build_density, overflow};
use hybro_core::hybro::{run_hybro_observed, HybroTrace};
use hybro_core::placer::{descend, init_placement};
use hybro_core::synthetic::{generate, SyntheticSpec};
use hybro_core::{hpwl, macro_hpwl, BookshelfDesign, MacroHpwlMode, Placement};
use serde::Serialize;
use serde_json::{json, Value};

use config::{flag_layer, read_file, resolve, Resolved, UsageError};
use manifest::{sibling, RunManifest};

const EXIT_PARSE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "hybro", version, about = "Global placement with perturbation-driven restarts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print HPWL, macro HPWL and overflow of a placement.
    Eval {
        aux: PathBuf,
        /// Placement to evaluate instead of the one named by the .aux file.
        #[arg(long)]
        pl: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        target_density: f64,
    },
    /// Run a single descent.
    Place {
        aux: PathBuf,
        /// Output .pl file; the manifest is written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Starting placement (used with `--init keep`).
        #[arg(long)]
        pl: Option<PathBuf>,
        /// Also render the result as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Alternate descents and perturbations, keeping the best placement.
    Hybro {
        aux: PathBuf,
        /// Output .pl file for the best placement.
        #[arg(long)]
        out: PathBuf,
        /// Trace CSV; defaults to `<out stem>.trace.csv`.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Directory for one SVG per descent.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
        #[arg(long)]
        pl: Option<PathBuf>,
        /// Number of perturbations.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, value_parser = ["shuffle", "shuffle-all", "wiremask", "restart"])]
        strategy: Option<String>,
        /// Perturbation strength in percent, in (0, 100].
        #[arg(long)]
        p: Option<f64>,
        /// Perturb the best placement so far instead of the latest.
        #[arg(long)]
        perturb_best: bool,
        /// Write zeros in the timing columns so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Render a placement as SVG.
    Plot {
        aux: PathBuf,
        #[arg(long)]
        pl: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        target_density: f64,
    },
    /// Write a synthetic benchmark in Bookshelf format.
    Gen {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "synth")]
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        std_cells: Option<usize>,
        #[arg(long)]
        macros: Option<usize>,
        #[arg(long)]
        nets: Option<usize>,
    },
}

/// Knobs shared by commands that run the placer.
#[derive(Args)]
struct RunArgs {
    /// TOML or JSON settings file, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core); overrides HYBRO_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = ["random-center", "spread", "keep"])]
    init: Option<String>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Step length in bin widths.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lambda_growth: Option<f64>,
    #[arg(long)]
    target_density: Option<f64>,
    #[arg(long)]
    eps_stop: Option<f64>,
}

impl RunArgs {
    fn entries(&self) -> Vec<(&'static str, Option<Value>)> {
        vec![
            ("seed", self.seed.map(|v| json!(v))),
            ("threads", self.threads.map(|v| json!(v))),
            ("init", self.init.as_ref().map(|v| json!(v))),
            ("placer.max_steps", self.max_steps.map(|v| json!(v))),
            ("placer.learning_rate_bins", self.lr.map(|v| json!(v))),
            ("placer.lambda_growth", self.lambda_growth.map(|v| json!(v))),
            ("placer.target_density", self.target_density.map(|v| json!(v))),
            ("placer.eps_stop", self.eps_stop.map(|v| json!(v))),
        ]
    }

    fn resolve(&self, extra: Vec<(&'static str, Option<Value>)>) -> Result<Resolved> {
        let file = self.config.as_deref().map(read_file).transpose()?;
        let env_threads = match std::env::var("HYBRO_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| UsageError(format!("HYBRO_THREADS must be a count, got '{v}'")))?,
            ),
            Err(_) => None,
        };
        let mut entries = self.entries();
        entries.extend(extra);
        resolve(file, env_threads, flag_layer(entries))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<hybro_core::Error>() {
            return match e {
                hybro_core::Error::DivergenceDetected { .. } => EXIT_DIVERGED,
                _ => EXIT_PARSE,
            };
        }
        if cause.is::<UsageError>() {
            return EXIT_PARSE;
        }
    }
    1
}

fn load(aux: &Path, pl: Option<&Path>) -> Result<BookshelfDesign> {
    let design = match pl {
        Some(pl) => parse_aux_with_pl(aux, pl)?,
        None => parse_aux(aux)?,
    };
    Ok(design)
}

/// Every file a run reads, for the manifest digests.
fn input_files(aux: &Path, pl: Option<&Path>, config: Option<&Path>) -> Result<Vec<PathBuf>> {
    let files = read_aux(aux)?;
    let mut out = vec![aux.to_path_buf(), files.nodes, files.nets, files.pl];
    out.extend(files.scl);
    out.extend(pl.map(Path::to_path_buf));
    out.extend(config.map(Path::to_path_buf));
    Ok(out)
}

fn install_threads(threads: usize) -> Result<usize> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting the worker pool")?;
    Ok(rayon::current_num_threads())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn machine_line(hpwl: f64, macro_hpwl: f64, overflow: f64) -> String {
    format!("HPWL={hpwl} MACRO_HPWL={macro_hpwl} OVERFLOW={overflow}")
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Eval { aux, pl, target_density } => cmd_eval(&aux, pl.as_deref(), target_density),
        Command::Place { aux, out, pl, svg, run } => cmd_place(&aux, &out, pl.as_deref(), svg.as_deref(), &run),
        Command::Hybro {
            aux,
            out,
            trace,
            svg_dir,
            pl,
            iters,
            strategy,
            p,
            perturb_best,
            no_timing,
            run,
        } => {
            let extra = vec![
                ("iterations", iters.map(|v| json!(v))),
                ("strategy", strategy.map(|v| json!(v))),
                ("p", p.map(|v| json!(v))),
                ("perturb_best", perturb_best.then_some(json!(true))),
            ];
            let resolved = run.resolve(extra)?;
            let trace = trace.unwrap_or_else(|| sibling(&out, "trace.csv"));
            let opts = HybroOutputs {
                out: &out,
                trace: &trace,
                svg_dir: svg_dir.as_deref(),
                no_timing,
            };
            cmd_hybro(&aux, pl.as_deref(), run.config.as_deref(), &resolved, &opts)
        }
        Command::Plot {
            aux,
            pl,
            out,
            target_density,
        } => cmd_plot(&aux, pl.as_deref(), &out, target_density),
        Command::Gen {
            dir,
            name,
            seed,
            std_cells,
            macros,
            nets,
        } => {
            let d = SyntheticSpec::default();
            let spec = SyntheticSpec {
                seed: seed.unwrap_or(d.seed),
                std_cells: std_cells.unwrap_or(d.std_cells),
                macros: macros.unwrap_or(d.macros),
                nets: nets.unwrap_or(d.nets),
                ..d
            };
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let aux = write_design(&generate(&spec)?, &dir, &name)?;
            println!("{}", aux.display());
            Ok(())
        }
    }
}

fn cmd_eval(aux: &Path, pl: Option<&Path>, target_density: f64) -> Result<()> {
    if !(target_density > 0.0 && target_density <= 1.0) {
        return Err(UsageError(format!("target density must lie in (0, 1], got {target_density}")).into());
    }
    let design = load(aux, pl)?;
    let nl = &design.netlist;
    let total = hpwl(nl, &design.initial);
    let macro_total = macro_hpwl(nl, &design.initial, MacroHpwlMode::default());
    let ovf = overflow(&build_density(nl, &design.initial, &design.canvas), target_density);
    println!(
        "cells: {} ({} movable, {} macros), nets: {}",
        nl.num_cells(),
        nl.movable_cells().count(),
        nl.num_macros(),
        nl.num_nets()
    );
    println!("HPWL: {total}");
    println!("macro HPWL: {macro_total}");
    println!("overflow at target density {target_density}: {ovf}");
    println!("{}", machine_line(total, macro_total, ovf));
    Ok(())
}

fn cmd_place(aux: &Path, out: &Path, pl: Option<&Path>, svg: Option<&Path>, args: &RunArgs) -> Result<()> {
    let resolved = args.resolve(Vec::new())?;
    let design = load(aux, pl)?;
    let config = &resolved.config;
    let threads = install_threads(config.threads)?;
    let mut manifest = RunManifest::new("place", &resolved, threads);
    for f in input_files(aux, pl, args.config.as_deref())? {
        manifest.add_input(&f)?;
    }

    let start = init_placement(&design, config.seed, config.init)?;
    let result = descend(&design, &start, &config.placer())?;
    write_file(out, &format_pl(&design, &result.placement))?;
    manifest.add_output(out);
    if let Some(svg) = svg {
        write_file(svg, &plot::render_svg(&design, &result.placement, config.placer.target_density))?;
        manifest.add_output(svg);
    }
    let manifest_path = sibling(out, "manifest.json");
    manifest.write(&manifest_path)?;

    let m = macro_hpwl(&design.netlist, &result.placement, config.macro_hpwl);
    println!(
        "{} steps, converged: {}, HPWL {}",
        result.steps_taken, result.converged, result.hpwl
    );
    println!("{}", machine_line(result.hpwl, m, result.overflow));
    Ok(())
}

struct HybroOutputs<'a> {
    out: &'a Path,
    trace: &'a Path,
    svg_dir: Option<&'a Path>,
    no_timing: bool,
}

#[derive(Serialize)]
struct CsvRow {
    iter: usize,
    hpwl: f64,
    macro_hpwl: f64,
    best_hpwl: f64,
    t_descent_s: f64,
    t_perturb_s: f64,
}

fn trace_csv(trace: &HybroTrace, no_timing: bool) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in &trace.records {
        let (d, p) = if no_timing { (0.0, 0.0) } else { (r.t_descent_s, r.t_perturb_s) };
        w.serialize(CsvRow {
            iter: r.iteration,
            hpwl: r.hpwl,
            macro_hpwl: r.macro_hpwl,
            best_hpwl: r.best_hpwl,
            t_descent_s: d,
            t_perturb_s: p,
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn cmd_hybro(
    aux: &Path,
    pl: Option<&Path>,
    config_file: Option<&Path>,
    resolved: &Resolved,
    outputs: &HybroOutputs<'_>,
) -> Result<()> {
    let config = &resolved.config;
    let hybro_config = config.hybro()?;
    let design = load(aux, pl)?;
    let threads = install_threads(config.threads)?;
    let mut manifest = RunManifest::new("hybro", resolved, threads);
    for f in input_files(aux, pl, config_file)? {
        manifest.add_input(&f)?;
    }
    if let Some(dir) = outputs.svg_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut svg_paths = Vec::new();
    let mut svg_error = None;
    let (best, trace) = run_hybro_observed(&design, &hybro_config, |i, result| {
        if let (Some(dir), None) = (outputs.svg_dir, &svg_error) {
            let path = dir.join(format!("iter_{i:03}.svg"));
            let svg = plot::render_svg(&design, &result.placement, config.placer.target_density);
            match write_file(&path, &svg) {
                Ok(()) => svg_paths.push(path),
                Err(e) => svg_error = Some(e),
            }
        }
        Ok(())
    })?;
    if let Some(e) = svg_error {
        return Err(e);
    }

    write_file(outputs.out, &format_pl(&design, &best.placement))?;
    manifest.add_output(outputs.out);
    write_file(outputs.trace, &trace_csv(&trace, outputs.no_timing)?)?;
    manifest.add_output(outputs.trace);
    for p in &svg_paths {
        manifest.add_output(p);
    }
    manifest.write(&sibling(outputs.out, "manifest.json"))?;

    for r in &trace.records {
        println!(
            "iteration {}: HPWL {} (best {}), {} steps, converged: {}",
            r.iteration, r.hpwl, r.best_hpwl, r.steps, r.converged
        );
    }
    let m = macro_hpwl(&design.netlist, &best.placement, config.macro_hpwl);
    println!("{}", machine_line(best.hpwl, m, best.overflow));
    Ok(())
}

fn cmd_plot(aux: &Path, pl: Option<&Path>, out: &Path, target_density: f64) -> Result<()> {
    if !(target_density > 0.0 && target_density <= 1.0) {
        return Err(UsageError(format!("target density must lie in (0, 1], got {target_density}")).into());
    }
    let design = load(aux, pl)?;
    let placement: &Placement = &design.initial;
    write_file(out, &plot::render_svg(&design, placement, target_density))
}
