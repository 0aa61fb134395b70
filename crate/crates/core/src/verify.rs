//! Randomised and deterministic verification suites. Every check yields
//! `(check, seed, lhs, rhs, ok)` rows; a suite passes when every row is ok.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chemo::{random_mixture, verify_h1_stability, verify_lp_estimate, ChemoError, Coefficient, EllipticModel, VerifyReport};
use crate::config::RunConfig;
use crate::diagnostics::{
    entropy_lower_bound_check, gns_probe, log_hls_brute_force, log_hls_probe, log_hls_q, DiagnosticsError,
};
use crate::experiments::{prepare, virial_check, ExperimentError, VirialOptions};
use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Chemo(#[from] ChemoError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Elliptic,
    Energy,
    Virial,
    Gns,
    LogHls,
    Entropy,
}

impl Suite {
    pub const ALL: [Self; 6] = [Self::Elliptic, Self::Energy, Self::Virial, Self::Gns, Self::LogHls, Self::Entropy];

    pub fn name(self) -> &'static str {
        match self {
            Self::Elliptic => "elliptic",
            Self::Energy => "energy",
            Self::Virial => "virial",
            Self::Gns => "gns",
            Self::LogHls => "loghls",
            Self::Entropy => "entropy",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown suite {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl CheckRow {
    fn new(check: impl Into<String>, seed: u64, lhs: f64, rhs: f64, ok: bool) -> Self {
        Self { check: check.into(), seed, lhs, rhs, ok }
    }
}

pub fn all_ok(rows: &[CheckRow]) -> bool {
    !rows.is_empty() && rows.iter().all(|r| r.ok)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteOptions {
    /// Base seed; trial `i` uses `seed + i`.
    pub seed: u64,
    /// Random trials per check (elliptic and entropy suites).
    pub trials: Option<usize>,
    /// Run configuration for the energy and virial suites.
    pub config: Option<RunConfig>,
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Vec<CheckRow>, SuiteError> {
    match suite {
        Suite::Elliptic => elliptic_suite(opts.seed, opts.trials.unwrap_or(50)),
        Suite::Energy => energy_suite(&opts.config.clone().unwrap_or_else(subcritical_config)),
        Suite::Virial => virial_suite(&opts.config.clone().unwrap_or_else(virial_config)),
        Suite::Gns => gns_suite(),
        Suite::LogHls => log_hls_suite(),
        Suite::Entropy => entropy_suite(opts.seed, opts.trials.unwrap_or(100)),
    }
}

/// Planar Keller-Segel at `0.9 · 8π` on `[-16, 16]²`, `n = 256`, `t ≤ 10`.
pub fn subcritical_config() -> RunConfig {
    RunConfig::parse(&format!(
        "[grid]\nL = 16\nn = 256\n[init]\ngaussian = {:?} 1 0 0\n[stepper]\nring_tol = 1e-2\n[run]\nt_end = 10\nobserve_every = 1\n",
        0.9 * 8.0 * std::f64::consts::PI
    ))
    .expect("built-in configuration")
}

/// Planar Keller-Segel on `[-8, 8]²`, `n = 256`, `t ≤ 1`; the masses are
/// `4π` and `6π`.
pub fn virial_config() -> RunConfig {
    RunConfig::parse("[grid]\nL = 8\nn = 256\n[init]\ngaussian = 1 1 0 0\n[stepper]\nring_tol = 1e-3\n[run]\nt_end = 1\nobserve_every = 5\n")
        .expect("built-in configuration")
}

fn from_report(report: VerifyReport, label: &str) -> Vec<CheckRow> {
    report.rows.into_iter().map(|r| CheckRow::new(label, r.seed, r.lhs, r.rhs, r.ok)).collect()
}

/// `‖c‖_p ≤ ‖f‖_p / inf γ` for `p ∈ {2, 4}` and `‖∇c‖₂ ≤ ‖F‖₂ / inf a` on a
/// variable-coefficient planar problem.
pub fn elliptic_suite(seed: u64, trials: usize) -> Result<Vec<CheckRow>, SuiteError> {
    let a = Coefficient::Gauss { amp: 0.5, width: 1.0, base: 1.0 };
    let gamma = Coefficient::Gauss { amp: 1.0, width: 1.5, base: 0.5 };
    let model = EllipticModel::new(2, a, gamma)?;
    let grid = GridSpec::<f64>::new(2, 4.0, 64).expect("valid grid");
    let mut rows = Vec::new();
    for p in [2.0, 4.0] {
        rows.extend(from_report(verify_lp_estimate(&model, &grid, trials, p, seed, 1e-10)?, &format!("inhomog_lp_p{p}")));
    }
    rows.extend(from_report(verify_h1_stability(&model, &grid, trials, seed, 1e-10)?, "h1_stability"));
    Ok(rows)
}

/// Frame-to-frame `F(u_{k+1}) - F(u_k) ≤ 1e-3 (1 + |F₀|) Δt` over a whole
/// run, plus the total increase against `1e-3 |F₀|`.
pub fn energy_suite(cfg: &RunConfig) -> Result<Vec<CheckRow>, SuiteError> {
    let (mut it, u0) = prepare(cfg, cfg.cells, cfg.total_mass())?;
    let out = it.run(u0, cfg.t_end, cfg.observe_every, |_, _| {}).map_err(ExperimentError::from)?;
    Ok(energy_rows(&out.series))
}

pub fn energy_rows(series: &[crate::diagnostics::DiagnosticsRecord]) -> Vec<CheckRow> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    let f0 = first.free_energy;
    let scale = 1e-3 * (1.0 + f0.abs());
    let mut rows: Vec<CheckRow> = series
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let rise = w[1].free_energy - w[0].free_energy;
            let tol = scale * (w[1].t - w[0].t);
            CheckRow::new("energy_step", k as u64 + 1, rise, tol, rise <= tol)
        })
        .collect();
    let total: f64 = series.windows(2).map(|w| (w[1].free_energy - w[0].free_energy).max(0.0)).sum();
    rows.push(CheckRow::new("energy_total_rise", 0, total, 1e-3 * f0.abs(), total <= 1e-3 * f0.abs()));
    rows
}

/// Measured `dM₂/dt` against `4M - M²/(2π)` for `M ∈ {4π, 6π}` while
/// `‖u‖_∞` stays below 50 times its initial value.
pub fn virial_suite(cfg: &RunConfig) -> Result<Vec<CheckRow>, SuiteError> {
    let pi = std::f64::consts::PI;
    let mut rows = Vec::new();
    for mass in [4.0 * pi, 6.0 * pi] {
        let rep = virial_check(cfg, mass, &VirialOptions::default())?;
        let label = format!("virial_m{:.0}pi", mass / pi);
        if rep.rows.is_empty() {
            rows.push(CheckRow::new(label.clone(), 0, f64::NAN, 0.05, false));
        }
        for (k, r) in rep.rows.iter().enumerate() {
            rows.push(CheckRow::new(label.clone(), k as u64, r.rel_err, 0.05, r.rel_err <= 0.05));
        }
    }
    Ok(rows)
}

/// Dilation invariance of the Gagliardo-Nirenberg-Sobolev ratio within 1%
/// for three exponent tuples and two profiles. `lhs` is the deviation.
pub fn gns_suite() -> Result<Vec<CheckRow>, SuiteError> {
    let grid = GridSpec::<f64>::new(2, 8.0, 256).expect("valid grid");
    let gauss = |x: [f64; 3]| (-(x[0] * x[0] + x[1] * x[1])).exp();
    let bumps = |x: [f64; 3]| {
        (-2.0 * ((x[0] - 1.0).powi(2) + x[1] * x[1])).exp() + 0.5 * (-((x[0] + 1.0).powi(2) + (x[1] - 0.5).powi(2))).exp()
    };
    let mut rows = Vec::new();
    for exps in [(1.0, 2.0, 2.0, 1.0), (2.0, 4.0, 2.0, 1.0), (1.0, 3.0, 2.0, 2.0)] {
        for (name, rep) in [
            ("gaussian", gns_probe(&grid, gauss, exps, &[1.0, 0.5, 2.0])?),
            ("two_bump", gns_probe(&grid, bumps, exps, &[1.0, 0.5, 2.0])?),
        ] {
            let label = format!("gns_{name}_p{}_q{}_r{}_k{}", exps.0, exps.1, exps.2, exps.3);
            rows.push(CheckRow::new(label, 0, rep.max_deviation, 0.01, rep.invariant_within(0.01)));
        }
    }
    Ok(rows)
}

/// Scale stability of `Q(λ)` on the Gaussian family (variation ≤ 10% for
/// `λ ≤ 1`) and agreement of the convolution and double-sum evaluations at
/// `n = 64` within 1%.
pub fn log_hls_suite() -> Result<Vec<CheckRow>, SuiteError> {
    let grid = GridSpec::<f64>::new(2, 8.0, 256).expect("valid grid");
    let mut rows = Vec::new();
    for eps in [0.5, 1.0, 2.0] {
        let u = ScalarField::gaussian(grid, 1.0, eps, [0.0; 3]);
        let rep = log_hls_probe(&u, &[1.0, 0.75, 0.5, 0.35])?;
        let bounded = rep.q.iter().all(|q| q.is_finite());
        rows.push(CheckRow::new(format!("loghls_scale_eps{eps}"), 0, rep.variation, 0.1, bounded && rep.variation <= 0.1));
    }
    let small = GridSpec::<f64>::new(2, 4.0, 64).expect("valid grid");
    for eps in [1.0, 2.0] {
        let u = ScalarField::gaussian(small, 1.0, eps, [0.3, -0.2, 0.0]);
        let (fast, slow) = (log_hls_q(&u)?, log_hls_brute_force(&u)?);
        let rel = ((fast - slow) / slow).abs();
        rows.push(CheckRow::new(format!("loghls_bruteforce_eps{eps}"), 0, rel, 0.01, rel <= 0.01));
    }
    Ok(rows)
}

/// Equality for the matching Gaussian (1e-6 relative) and the inequality
/// `∫u log u ≥ M log(ε^{d/2} M / π^{d/2}) - ε M₂` on random fields.
pub fn entropy_suite(seed: u64, trials: usize) -> Result<Vec<CheckRow>, SuiteError> {
    let mut rows = Vec::new();
    let grid = GridSpec::<f64>::new(2, 10.0, 256).expect("valid grid");
    for (m, eps) in [(1.0, 1.0), (3.0, 4.0), (0.5, 0.25)] {
        let b = entropy_lower_bound_check(&ScalarField::gaussian(grid, m, eps, [0.0; 3]), eps);
        let rel = ((b.lhs - b.rhs) / b.rhs.abs().max(1.0)).abs();
        rows.push(CheckRow::new(format!("entropy_equality_m{m}_eps{eps}"), 0, rel, 1e-6, rel <= 1e-6));
    }
    let small = GridSpec::<f64>::new(2, 4.0, 64).expect("valid grid");
    for trial in 0..trials {
        let s = seed.wrapping_add(trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let u = random_mixture(&small, &mut rng);
        let eps = rng.gen_range(0.1..10.0);
        let b = entropy_lower_bound_check(&u, eps);
        rows.push(CheckRow::new("entropy_bound", s, b.lhs, b.rhs, b.ok));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn entropy_suite_replays_seeds() {
        let a = entropy_suite(7, 5).unwrap();
        let b = entropy_suite(7, 5).unwrap();
        assert_eq!(a, b);
        assert!(all_ok(&a));
        assert_eq!(a.last().unwrap().seed, 11);
    }

    #[test]
    fn energy_rows_flag_rises() {
        use crate::diagnostics::DiagnosticsRecord;
        let rec = |t: f64, f: f64| DiagnosticsRecord { t, free_energy: f, ..Default::default() };
        let rows = energy_rows(&[rec(0.0, 1.0), rec(0.1, 0.5), rec(0.2, 0.6)]);
        assert!(rows[0].ok);
        assert!(!rows[1].ok);
        assert!(!rows[2].ok);
        assert!(energy_rows(&[]).is_empty());
        assert!(!all_ok(&[]));
    }
}
