use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggrosim::config::RunConfig;
use aggrosim::experiments::{run_experiment, ExperimentKind, ExperimentSpec, Status};
use aggrosim::grid::ScalarField;
use aggrosim::integrator::{Integrator, IntegratorError};
use aggrosim::output::{write_atomic, write_outputs};
use aggrosim::verify::{run_suite, Suite, SuiteOptions};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aggrosim", version, about = "Nonlocal aggregation-diffusion simulations and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write diagnostics, snapshots and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `[run] output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Observer cadence in steps; overrides `[run] observe_every`.
        #[arg(long)]
        observe_every: Option<usize>,
    },
    /// Run a canned experiment over a list of values.
    Sweep {
        #[arg(long)]
        experiment: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated masses (amplitudes for smalldata_probe).
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Read the values as multiples of the critical mass.
        #[arg(long)]
        relative: bool,
        /// Directory for the result table and manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and print one JSON line per check.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Run configuration for the energy and virial suites; its seed is
        /// the default seed.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("AGGROSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("AGGROSIM_THREADS={raw:?} is not a count"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn simulate(config: &Path, out: Option<PathBuf>, observe_every: Option<usize>) -> Result<Status> {
    let mut cfg = load(config)?;
    if let Some(k) = observe_every {
        if k == 0 {
            bail!("--observe-every must be positive");
        }
        cfg.observe_every = k;
    }
    let dir = out.or_else(|| cfg.output.clone()).context("no output directory: pass --out or set [run] output")?;
    let model = cfg.build::<f64>()?;
    let u0 = cfg.initial_field(&model.grid, 1.0);
    let mut it = Integrator::new(model.grid, &model.chemo, model.diffusion, cfg.stepper)?;
    let mut snapshots: Vec<(usize, ScalarField<f64>)> = Vec::new();
    let mut series = Vec::new();
    let result = it.run(u0, cfg.t_end, cfg.observe_every, |s, rec| {
        snapshots.push((s.step_count, s.u.clone()));
        series.push(*rec);
    });
    let status = match result {
        Ok(out) => {
            log::info!("finished at t = {} after {} steps", out.state.t, out.state.step_count);
            Status::Pass
        }
        Err(IntegratorError::BlowupSuspected(b)) => {
            log::warn!("blow-up suspected at t = {} (step {}, {:?}, sup norm {:e})", b.t, b.step, b.reason, b.linf);
            Status::Pass
        }
        Err(IntegratorError::BoundaryReached { t, fraction }) => {
            log::warn!("mass fraction {fraction:e} reached the boundary ring at t = {t}; stopping");
            Status::Inconclusive
        }
        Err(e) => return Err(e.into()),
    };
    let manifest = write_outputs(&series, &snapshots, &[("config.txt", cfg.dump())], &dir)?;
    println!("{}", manifest.render().trim_end());
    Ok(status)
}

fn default_values(kind: ExperimentKind, cfg: &RunConfig, relative: bool) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    match kind {
        ExperimentKind::CriticalMassSweep if relative => vec![0.7, 0.9, 1.1, 1.3],
        ExperimentKind::VirialCheck => vec![4.0 * pi, 6.0 * pi],
        ExperimentKind::SmalldataProbe => vec![0.1, 1.0, 10.0],
        _ => vec![cfg.total_mass()],
    }
}

fn sweep(kind: ExperimentKind, config: &Path, values: Vec<f64>, relative: bool, out: Option<PathBuf>) -> Result<Status> {
    let cfg = load(config)?;
    let mut values = if values.is_empty() { default_values(kind, &cfg, relative) } else { values };
    if relative {
        let model = cfg.build::<f64>()?;
        let mc = model.diffusion.critical_mass(&model.kernel).context("--relative needs a critical mass")?;
        values.iter_mut().for_each(|v| *v *= mc);
    }
    let spec = ExperimentSpec { kind, base: cfg.clone(), values, seed: cfg.seed };
    let report = run_experiment(&spec)?;
    let table = report.to_csv();
    print!("{table}");
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        write_atomic(&dir.join(format!("{kind}.csv")), table.as_bytes())?;
        write_atomic(&dir.join("config.txt"), cfg.dump().as_bytes())?;
    }
    let status = report.status();
    log::info!("{kind}: {status}");
    Ok(status)
}

fn verify(suite: Suite, seed: Option<u64>, trials: Option<usize>, config: Option<PathBuf>) -> Result<Status> {
    let config = config.as_deref().map(load).transpose()?;
    let seed = seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0);
    let rows = run_suite(suite, &SuiteOptions { seed, trials, config })?;
    for r in &rows {
        let line = serde_json::json!({"check": r.check, "seed": r.seed, "lhs": r.lhs, "rhs": r.rhs, "ok": r.ok});
        println!("{line}");
    }
    Ok(if aggrosim::verify::all_ok(&rows) { Status::Pass } else { Status::Fail })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Simulate { config, out, observe_every } => simulate(&config, out, observe_every),
        Command::Sweep { experiment, config, values, relative, out } => sweep(experiment, &config, values, relative, out),
        Command::Verify { suite, seed, trials, config } => verify(suite, seed, trials, config),
    });
    match result {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
