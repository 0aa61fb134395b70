use super::{prepare, ExperimentError, Status};
use crate::config::{ChemoSpec, Model, RunConfig};
use crate::diagnostics::{modified_free_energy_with, self_similar_time, DiagnosticsError};
use crate::diffusion::Law;
use crate::grid::{tail_norm, GridSpec, ScalarField};
use crate::kernels::{convolution_plan, Kernel, Profile};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimOptions {
    /// `τ` range over which `‖θ‖_∞` must stay level.
    pub window: (f64, f64),
    /// Allowed `(max - min) / min` of `‖θ‖_∞` over the window.
    pub max_variation: f64,
    /// Level `k` of the tail functional `‖(θ - k)_+‖_1`.
    pub tail_level: f64,
}

impl Default for SelfSimOptions {
    fn default() -> Self {
        Self { window: (1.0, 2.3), max_variation: 0.2, tail_level: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimRow {
    pub t: f64,
    pub tau: f64,
    pub theta_linf: f64,
    pub tail: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimReport {
    pub mass: f64,
    pub rows: Vec<SelfSimRow>,
    pub linf_variation: f64,
    pub max_tail: f64,
    /// Sum of the increases of `G` beyond the per-frame tolerance.
    pub g_violation: f64,
    pub g_violations: usize,
    pub status: Status,
}

/// Maps observer frames to self-similar variables and records `‖θ‖_∞`, the
/// tail functional and the modified free energy. `θ` is sampled on the
/// co-moving grid `[-L e^{-τ}, L e^{-τ}]^d`, where it is exact at cell
/// centres.
pub struct SelfSimTracker {
    law: Law<f64>,
    kernel: Kernel<f64>,
    tail_level: f64,
    rows: Vec<SelfSimRow>,
}

impl SelfSimTracker {
    pub fn new(model: &Model<f64>, tail_level: f64) -> Result<Self, ExperimentError> {
        let log_kernel = matches!(model.kernel.profile(), Profile::Newtonian | Profile::Logarithmic { .. });
        if model.grid.dim() != 2 || !matches!(model.diffusion.law(), Law::Linear) || !log_kernel {
            return Err(ExperimentError::Precondition(
                "self-similar analysis needs d = 2, linear diffusion and a logarithmic kernel".into(),
            ));
        }
        Ok(Self {
            law: model.diffusion.law().clone(),
            kernel: model.kernel.clone(),
            tail_level,
            rows: Vec::new(),
        })
    }

    pub fn observe(&mut self, t: f64, u: &ScalarField<f64>) -> Result<ScalarField<f64>, ExperimentError> {
        let g0 = u.grid();
        let tau = self_similar_time(g0.dim(), t)?;
        let s = tau.exp();
        let grid = GridSpec::new(g0.dim(), g0.half_width() / s, g0.cells_per_axis()).map_err(DiagnosticsError::from)?;
        let scale = s.powi(g0.dim() as i32);
        let theta = ScalarField::new(grid, u.values().iter().map(|&v| scale * v).collect()).map_err(DiagnosticsError::from)?;
        let tail = tail_norm(&theta, self.tail_level, 1.0).map_err(DiagnosticsError::from)?;
        let plan = convolution_plan(&self.kernel, &grid)?;
        let g = modified_free_energy_with(&theta, &self.law, &self.kernel, &plan)?;
        self.rows.push(SelfSimRow { t, tau, theta_linf: theta.max_value(), tail, g });
        Ok(theta)
    }

    pub fn rows(&self) -> &[SelfSimRow] {
        &self.rows
    }

    /// `G` may rise by at most `1e-3 (1 + |G₀|) Δτ` between frames.
    pub fn report(&self, mass: f64, opts: &SelfSimOptions) -> SelfSimReport {
        let rows = self.rows.clone();
        let inside: Vec<f64> = rows
            .iter()
            .filter(|r| r.tau >= opts.window.0 && r.tau <= opts.window.1)
            .map(|r| r.theta_linf)
            .collect();
        let (lo, hi) = inside.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let linf_variation = if inside.len() >= 2 && lo > 0.0 { (hi - lo) / lo } else { f64::NAN };
        let max_tail = rows.iter().map(|r| r.tail).fold(0.0, f64::max);
        let scale = 1e-3 * (1.0 + rows.first().map_or(0.0, |r| r.g.abs()));
        let (mut g_violation, mut g_violations) = (0.0, 0);
        for w in rows.windows(2) {
            let excess = w[1].g - w[0].g - scale * (w[1].tau - w[0].tau);
            if excess > 0.0 {
                g_violation += excess;
                g_violations += 1;
            }
        }
        let covered = rows.last().is_some_and(|r| r.tau >= opts.window.1) && inside.len() >= 2;
        let status = if !covered {
            Status::Inconclusive
        } else if linf_variation <= opts.max_variation && g_violations == 0 {
            Status::Pass
        } else {
            Status::Fail
        };
        SelfSimReport { mass, rows, linf_variation, max_tail, g_violation, g_violations, status }
    }
}

/// Runs `cfg` at `mass`, transforms every observer frame and checks that
/// `θ` stays bounded while `G(θ)` does not increase.
pub fn selfsim_boundedness(cfg: &RunConfig, mass: f64, opts: &SelfSimOptions) -> Result<SelfSimReport, ExperimentError> {
    if cfg.chemo != ChemoSpec::Convolution {
        return Err(ExperimentError::Precondition("self-similar analysis needs model = convolution".into()));
    }
    let model = cfg.build::<f64>()?;
    let mut tracker = SelfSimTracker::new(&model, opts.tail_level)?;
    let t_needed = ((2.0 * opts.window.1).exp() - 1.0) / 2.0;
    if self_similar_time(2, cfg.t_end)? < opts.window.1 {
        return Err(ExperimentError::Precondition(format!("t_end must reach {t_needed:.3} to cover the τ window")));
    }
    let (mut it, u0) = prepare(cfg, cfg.cells, mass)?;
    let mut failure = None;
    it.run(u0, cfg.t_end, cfg.observe_every, |s, _| {
        if failure.is_none() {
            if let Err(e) = tracker.observe(s.t, &s.u) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(tracker.report(mass, opts))
}
