//! Canned desk-scale experiments built on the integrator.
//!
//! Every experiment maps over a list of masses (or mass multipliers for the
//! small-data probe). Runs execute concurrently on the rayon pool and tables
//! keep input order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{ChemoSpec, ConfigError, RunConfig};
use crate::diagnostics::{measured_virial_rate, virial_plan, virial_rate_with, DiagnosticsError, DiagnosticsRecord};
use crate::diffusion::Law;
use crate::grid::{second_moment, ScalarField};
use crate::integrator::{Integrator, IntegratorError};
use crate::kernels::Profile;

mod selfsim;

pub use selfsim::{selfsim_boundedness, SelfSimOptions, SelfSimReport, SelfSimRow, SelfSimTracker};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

impl From<crate::kernels::KernelError> for ExperimentError {
    fn from(e: crate::kernels::KernelError) -> Self {
        Self::Diagnostics(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    CriticalMassSweep,
    DecayRate,
    VirialCheck,
    SmalldataProbe,
    SelfsimBoundedness,
}

impl ExperimentKind {
    pub const ALL: [Self; 5] =
        [Self::CriticalMassSweep, Self::DecayRate, Self::VirialCheck, Self::SmalldataProbe, Self::SelfsimBoundedness];

    pub fn name(self) -> &'static str {
        match self {
            Self::CriticalMassSweep => "critical_mass_sweep",
            Self::DecayRate => "decay_rate",
            Self::VirialCheck => "virial_check",
            Self::SmalldataProbe => "smalldata_probe",
            Self::SelfsimBoundedness => "selfsim_boundedness",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment {s:?}; expected one of {}", names.join(", "))
        })
    }
}

/// Overall verdict. Maps to process exit codes 0, 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Inconclusive => 2,
        }
    }

    /// Fail dominates Inconclusive, which dominates Pass.
    pub fn combine(self, other: Self) -> Self {
        match (self, other) {
            (Self::Fail, _) | (_, Self::Fail) => Self::Fail,
            (Self::Inconclusive, _) | (_, Self::Inconclusive) => Self::Inconclusive,
            _ => Self::Pass,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub base: RunConfig,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.values.is_empty() {
            return Err(ExperimentError::Precondition("value list is empty".into()));
        }
        let zero_ok = self.kind == ExperimentKind::SmalldataProbe;
        if let Some(v) = self.values.iter().find(|&&v| !(v > 0.0 || (zero_ok && v == 0.0)) || !v.is_finite()) {
            return Err(ExperimentError::Precondition(format!("values must be positive, got {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentReport {
    Sweep(SweepTable),
    Decay(Vec<DecayReport>),
    Virial(Vec<VirialReport>),
    Probe(ProbeReport),
    SelfSim(Vec<SelfSimReport>),
}

impl ExperimentReport {
    pub fn status(&self) -> Status {
        match self {
            Self::Sweep(t) => t.status,
            Self::Decay(r) => r.iter().fold(Status::Pass, |s, x| s.combine(x.status)),
            Self::Virial(r) => r.iter().fold(Status::Pass, |s, x| s.combine(x.status)),
            Self::Probe(p) => p.status,
            Self::SelfSim(r) => r.iter().fold(Status::Pass, |s, x| s.combine(x.status)),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Self::Sweep(t) => t.to_csv(),
            Self::Decay(r) => {
                let mut s = String::from("mass,exponent,half_window_exponent,points,status\n");
                for x in r {
                    s += &format!("{:e},{:e},{:e},{},{}\n", x.mass, x.exponent, x.half_window_exponent, x.points, x.status);
                }
                s
            }
            Self::Virial(r) => {
                let mut s = String::from("mass,t,measured,predicted,rel_err\n");
                for x in r {
                    for row in &x.rows {
                        s += &format!("{:e},{:e},{:e},{:e},{:e}\n", x.mass, row.t, row.measured, row.predicted, row.rel_err);
                    }
                }
                s
            }
            Self::Probe(p) => p.to_csv(),
            Self::SelfSim(r) => {
                let mut s = String::from("mass,t,tau,theta_linf,tail,g\n");
                for x in r {
                    for row in &x.rows {
                        s += &format!("{:e},{:e},{:e},{:e},{:e},{:e}\n", x.mass, row.t, row.tau, row.theta_linf, row.tail, row.g);
                    }
                }
                s
            }
        }
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, ExperimentError> {
    spec.validate()?;
    let cfg = &spec.base;
    Ok(match spec.kind {
        ExperimentKind::CriticalMassSweep => {
            ExperimentReport::Sweep(critical_mass_sweep(cfg, &spec.values, &SweepOptions::default())?)
        }
        ExperimentKind::DecayRate => ExperimentReport::Decay(
            spec.values.par_iter().map(|&m| decay_rate(cfg, m, &DecayOptions::default())).collect::<Result<_, _>>()?,
        ),
        ExperimentKind::VirialCheck => ExperimentReport::Virial(
            spec.values.par_iter().map(|&m| virial_check(cfg, m, &VirialOptions::default())).collect::<Result<_, _>>()?,
        ),
        ExperimentKind::SmalldataProbe => ExperimentReport::Probe(smalldata_probe(cfg, &spec.values)?),
        ExperimentKind::SelfsimBoundedness => ExperimentReport::SelfSim(
            spec.values
                .par_iter()
                .map(|&m| selfsim_boundedness(cfg, m, &SelfSimOptions::default()))
                .collect::<Result<_, _>>()?,
        ),
    })
}


/// Integrator and initial data for `cfg` with `cells` per axis and the
/// initial Gaussians rescaled to total mass `mass`.
pub fn prepare(cfg: &RunConfig, cells: usize, mass: f64) -> Result<(Integrator<f64>, ScalarField<f64>), ExperimentError> {
    let mut c = cfg.clone();
    c.cells = cells;
    let model = c.build::<f64>()?;
    let u0 = c.initial_field(&model.grid, mass / cfg.total_mass());
    let it = Integrator::new(model.grid, &model.chemo, model.diffusion, c.stepper)?;
    Ok((it, u0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Global,
    Blowup,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Global => "global",
            Self::Blowup => "blowup",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub cells: usize,
    pub outcome: Outcome,
    pub t_detect: Option<f64>,
    pub max_linf: f64,
    pub linf0: f64,
    pub note: String,
}

/// Runs to `t_end` and classifies the result.
pub fn run_outcome(cfg: &RunConfig, cells: usize, mass: f64) -> Result<RunSummary, ExperimentError> {
    let (mut it, u0) = prepare(cfg, cells, mass)?;
    let linf0 = u0.max_value();
    let mut max_linf = linf0;
    let res = it.run(u0, cfg.t_end, cfg.observe_every, |_, rec| max_linf = max_linf.max(rec.linf));
    let (outcome, t_detect, note) = match res {
        Ok(_) => (Outcome::Global, None, String::new()),
        Err(IntegratorError::BlowupSuspected(b)) => {
            max_linf = max_linf.max(b.linf);
            (Outcome::Blowup, Some(b.t), format!("{:?}", b.reason))
        }
        Err(IntegratorError::BoundaryReached { t, fraction }) => {
            (Outcome::Inconclusive, None, format!("mass fraction {fraction:e} reached the boundary at t = {t}"))
        }
        Err(e) => return Err(e.into()),
    };
    Ok(RunSummary { cells, outcome, t_detect, max_linf, linf0, note })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refine {
    Off,
    /// Re-run only Blowup verdicts at twice the resolution.
    Blowups,
    /// Re-run every row at twice the resolution.
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub refine: Refine,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { refine: Refine::Blowups }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mass: f64,
    /// Verdict after reconciling both resolutions.
    pub outcome: Outcome,
    pub coarse: RunSummary,
    pub fine: Option<RunSummary>,
    /// `M₂(0) / (-dM₂/dt)` when the initial second-moment rate is negative.
    pub t_virial: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub critical_mass: f64,
    pub rows: Vec<SweepRow>,
    /// Largest Global and smallest Blowup mass.
    pub bracket: Option<(f64, f64)>,
    pub monotone: bool,
    pub status: Status,
}

impl SweepTable {
    pub fn bracket_contains(&self, m: f64) -> bool {
        self.bracket.is_some_and(|(lo, hi)| lo < m && m < hi)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        let mut s = String::from("mass,outcome,t_detect,max_linf,t_virial,fine_outcome,fine_t_detect\n");
        for r in &self.rows {
            s += &format!(
                "{:e},{},{},{:e},{},{},{}\n",
                r.mass,
                r.outcome,
                opt(r.coarse.t_detect),
                r.coarse.max_linf,
                opt(r.t_virial),
                r.fine.as_ref().map_or(String::new(), |f| f.outcome.to_string()),
                opt(r.fine.as_ref().and_then(|f| f.t_detect)),
            );
        }
        s
    }
}

/// Runs every mass to `t_end` or detected blow-up and brackets the critical
/// mass. Needs a convolution model whose pair is critical with `m* = 1`.
pub fn critical_mass_sweep(cfg: &RunConfig, masses: &[f64], opts: &SweepOptions) -> Result<SweepTable, ExperimentError> {
    if masses.is_empty() || masses.iter().any(|&m| !(m > 0.0)) {
        return Err(ExperimentError::Precondition("masses must be a non-empty list of positive values".into()));
    }
    if cfg.chemo != ChemoSpec::Convolution {
        return Err(ExperimentError::Precondition("the mass sweep needs model = convolution".into()));
    }
    let model = cfg.build::<f64>()?;
    let critical_mass = model
        .diffusion
        .critical_mass(&model.kernel)
        .map_err(|e| ExperimentError::Precondition(format!("no critical mass: {e}")))?;
    let vplan = virial_plan(&model.kernel, &model.grid)?;
    let fine_cells = 2 * cfg.cells;
    let coarse: Vec<RunSummary> =
        masses.par_iter().map(|&m| run_outcome(cfg, cfg.cells, m)).collect::<Result<_, _>>()?;
    let fine: Vec<Option<RunSummary>> = masses
        .par_iter()
        .zip(&coarse)
        .map(|(&m, c)| {
            let again = match opts.refine {
                Refine::Off => false,
                Refine::Blowups => c.outcome == Outcome::Blowup,
                Refine::All => true,
            };
            again.then(|| run_outcome(cfg, fine_cells, m)).transpose()
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<SweepRow> = masses
        .iter()
        .zip(coarse)
        .zip(fine)
        .map(|((&mass, coarse), fine)| {
            let outcome = match &fine {
                Some(f) if f.outcome != coarse.outcome => Outcome::Inconclusive,
                _ => coarse.outcome,
            };
            let u0 = cfg.initial_field(&model.grid, mass / cfg.total_mass());
            let rate = virial_rate_with(&u0, &vplan, &model.diffusion);
            let t_virial = (rate < 0.0).then(|| second_moment(&u0) / -rate);
            SweepRow { mass, outcome, coarse, fine, t_virial }
        })
        .collect();
    let mut order: Vec<&SweepRow> = rows.iter().collect();
    order.sort_by(|a, b| a.mass.total_cmp(&b.mass));
    let decided: Vec<&&SweepRow> = order.iter().filter(|r| r.outcome != Outcome::Inconclusive).collect();
    let monotone = decided.windows(2).all(|w| !(w[0].outcome == Outcome::Blowup && w[1].outcome == Outcome::Global));
    let lo = decided.iter().filter(|r| r.outcome == Outcome::Global).map(|r| r.mass).fold(None, |a: Option<f64>, m| Some(a.map_or(m, |a| a.max(m))));
    let hi = decided.iter().filter(|r| r.outcome == Outcome::Blowup).map(|r| r.mass).fold(None, |a: Option<f64>, m| Some(a.map_or(m, |a| a.min(m))));
    let bracket = lo.zip(hi).filter(|(l, h)| l < h);
    let status = if !monotone || decided.len() != rows.len() {
        Status::Inconclusive
    } else {
        let below = lo.is_none_or(|l| l < critical_mass);
        let above = hi.is_none_or(|h| h > critical_mass);
        if below && above {
            Status::Pass
        } else {
            Status::Fail
        }
    };
    Ok(SweepTable { critical_mass, rows, bracket, monotone, status })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    /// Fit window in `t`.
    pub window: (f64, f64),
    /// Tolerance on `|exponent + d/2|`.
    pub tol: f64,
    /// Allowed change of the exponent when the window is halved.
    pub stability: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { window: (10.0, 100.0), tol: 0.15, stability: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub mass: f64,
    pub exponent: f64,
    /// Exponent fitted over the first half of the window.
    pub half_window_exponent: f64,
    pub points: usize,
    pub series: Vec<DiagnosticsRecord>,
    pub status: Status,
}

/// Least-squares slope of `log ‖u‖_∞` against `log(1 + t)` over records with
/// `t` in `[t0, t1]`, and the number of records used.
pub fn fit_decay(series: &[DiagnosticsRecord], window: (f64, f64)) -> Option<(f64, usize)> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1 && r.linf > 0.0)
        .map(|r| ((1.0 + r.t).ln(), r.linf.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    (sxx > 0.0).then(|| (sxy / sxx, pts.len()))
}

fn decay_preconditions(cfg: &RunConfig) -> Result<(), ExperimentError> {
    let model = cfg.build::<f64>()?;
    let linear = match model.diffusion.law() {
        Law::Linear => true,
        Law::PorousMedium { m } => (*m - 1.0).abs() < 1e-12,
        Law::Custom(_) => false,
    };
    let kernel_ok = matches!(model.kernel.profile(), Profile::Newtonian | Profile::Logarithmic { .. }) || model.kernel.is_zero();
    if cfg.dim != 2 || !linear || !kernel_ok || cfg.chemo != ChemoSpec::Convolution {
        return Err(ExperimentError::Precondition(
            "decay needs d = 2, linear diffusion and a Newtonian, logarithmic or zero convolution kernel".into(),
        ));
    }
    Ok(())
}

/// Runs to `t_end` and fits the sup-norm decay exponent. Blow-up is an error.
pub fn decay_rate(cfg: &RunConfig, mass: f64, opts: &DecayOptions) -> Result<DecayReport, ExperimentError> {
    decay_preconditions(cfg)?;
    let model = cfg.build::<f64>()?;
    if !model.kernel.is_zero() {
        let mc = model.diffusion.critical_mass(&model.kernel).map_err(|e| ExperimentError::Precondition(e.to_string()))?;
        if mass >= mc {
            return Err(ExperimentError::Precondition(format!("mass {mass} is not below the critical mass {mc}")));
        }
    }
    if cfg.t_end < opts.window.1 {
        return Err(ExperimentError::Precondition(format!("t_end {} ends before the fit window", cfg.t_end)));
    }
    let (mut it, u0) = prepare(cfg, cfg.cells, mass)?;
    let out = it.run(u0, cfg.t_end, cfg.observe_every, |_, _| {})?;
    Ok(decay_report(mass, out.series, cfg.dim, opts))
}

/// Fits a recorded series; see [`decay_rate`].
pub fn decay_report(mass: f64, series: Vec<DiagnosticsRecord>, dim: usize, opts: &DecayOptions) -> DecayReport {
    let (t0, t1) = opts.window;
    let full = fit_decay(&series, opts.window);
    let half = fit_decay(&series, (t0, t0 + (t1 - t0) / 2.0));
    let (exponent, points) = full.unwrap_or((f64::NAN, 0));
    let half_window_exponent = half.map_or(f64::NAN, |h| h.0);
    let status = match (full, half) {
        (Some(_), Some(_)) => {
            let target = -(dim as f64) / 2.0;
            if (exponent - target).abs() <= opts.tol && (exponent - half_window_exponent).abs() <= opts.stability {
                Status::Pass
            } else {
                Status::Fail
            }
        }
        _ => Status::Inconclusive,
    };
    DecayReport { mass, exponent, half_window_exponent, points, series, status }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirialOptions {
    /// Frames are used while `‖u‖_∞` stays below this multiple of the initial peak.
    pub linf_cap: f64,
    pub tol: f64,
}

impl Default for VirialOptions {
    fn default() -> Self {
        Self { linf_cap: 50.0, tol: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialRow {
    pub t: f64,
    /// Centred difference of `M₂` between neighbouring frames.
    pub measured: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirialReport {
    pub mass: f64,
    pub rows: Vec<VirialRow>,
    pub max_rel_err: f64,
    pub status: Status,
}

/// Compares the measured `dM₂/dt` with the second-moment identity. The
/// prediction is the closed form `4M - M²/(2π)` for the planar Newtonian
/// kernel with linear diffusion and the discrete identity otherwise.
pub fn virial_check(cfg: &RunConfig, mass: f64, opts: &VirialOptions) -> Result<VirialReport, ExperimentError> {
    if cfg.chemo != ChemoSpec::Convolution {
        return Err(ExperimentError::Precondition("the virial check needs model = convolution".into()));
    }
    let (mut it, u0) = prepare(cfg, cfg.cells, mass)?;
    let model = cfg.build::<f64>()?;
    let closed = (cfg.dim == 2 && matches!(model.kernel.profile(), Profile::Newtonian) && matches!(model.diffusion.law(), Law::Linear))
        .then(|| 4.0 * mass - mass * mass / (2.0 * std::f64::consts::PI));
    let plan = virial_plan(&model.kernel, &model.grid)?;
    let cap = opts.linf_cap * u0.max_value();
    let mut predicted = Vec::new();
    let mut series = Vec::new();
    let res = it.run(u0, cfg.t_end, cfg.observe_every, |s, rec| {
        if rec.linf < cap {
            predicted.push(closed.unwrap_or_else(|| virial_rate_with(&s.u, &plan, &model.diffusion)));
            series.push(*rec);
        }
    });
    match res {
        Ok(_) | Err(IntegratorError::BlowupSuspected(_)) => {}
        Err(e) => return Err(e.into()),
    }
    let rows: Vec<VirialRow> = (1..series.len().saturating_sub(1))
        .filter_map(|k| {
            let measured = measured_virial_rate(&series, k)?;
            let p = predicted[k];
            let rel_err = if p == 0.0 { (measured - p).abs() } else { ((measured - p) / p).abs() };
            Some(VirialRow { t: series[k].t, measured, predicted: p, rel_err })
        })
        .collect();
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let status = if rows.is_empty() {
        Status::Inconclusive
    } else if max_rel_err <= opts.tol {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(VirialReport { mass, rows, max_rel_err, status })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    Bounded,
    Blowup,
    Inconclusive,
}

impl fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bounded => "bounded",
            Self::Blowup => "blowup",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    /// Multiplier applied to the configured initial data.
    pub amplitude: f64,
    pub outcome: ProbeOutcome,
    /// `max_t ‖u(t)‖_∞ / ‖u₀‖_∞`.
    pub max_ratio: f64,
    pub t_detect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub status: Status,
}

impl ProbeReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("amplitude,outcome,max_ratio,t_detect\n");
        for r in &self.rows {
            let t = r.t_detect.map_or(String::new(), |t| format!("{t:e}"));
            s += &format!("{:e},{},{:e},{}\n", r.amplitude, r.outcome, r.max_ratio, t);
        }
        s
    }
}

/// Growth factor of `‖u‖_∞` that separates Bounded from Blowup.
pub const PROBE_GROWTH: f64 = 10.0;

/// Scales the initial data by each amplitude and records whether `‖u‖_∞`
/// stays below ten times its initial value through `t_end`. Passes when the
/// smallest amplitude is Bounded.
pub fn smalldata_probe(cfg: &RunConfig, amplitudes: &[f64]) -> Result<ProbeReport, ExperimentError> {
    if amplitudes.is_empty() || amplitudes.iter().any(|&a| !(a >= 0.0)) {
        return Err(ExperimentError::Precondition("amplitudes must be a non-empty list of values >= 0".into()));
    }
    let mut probe = cfg.clone();
    probe.stepper.blowup_linf_factor = PROBE_GROWTH;
    let rows: Vec<ProbeRow> = amplitudes
        .par_iter()
        .map(|&amplitude| {
            if amplitude == 0.0 {
                return Ok(ProbeRow { amplitude, outcome: ProbeOutcome::Bounded, max_ratio: 1.0, t_detect: None });
            }
            let s = run_outcome(&probe, cfg.cells, amplitude * cfg.total_mass())?;
            let outcome = match s.outcome {
                Outcome::Global => ProbeOutcome::Bounded,
                Outcome::Blowup => ProbeOutcome::Blowup,
                Outcome::Inconclusive => ProbeOutcome::Inconclusive,
            };
            Ok(ProbeRow { amplitude, outcome, max_ratio: s.max_linf / s.linf0, t_detect: s.t_detect })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let smallest = rows.iter().min_by(|a, b| a.amplitude.total_cmp(&b.amplitude)).expect("non-empty");
    let status = match smallest.outcome {
        ProbeOutcome::Bounded => Status::Pass,
        ProbeOutcome::Blowup => Status::Fail,
        ProbeOutcome::Inconclusive => Status::Inconclusive,
    };
    Ok(ProbeReport { rows, status })
}
