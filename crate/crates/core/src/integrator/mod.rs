//! Positivity-preserving finite-volume time stepping for
//! `u_t + ∇·(u ∇c) = ΔA(u)`.

mod advect;
mod cosine;
mod diffuse;

use std::fmt;

use crate::chemo::{ChemoError, ChemoModel, ChemoSolver};
use crate::diagnostics::{guard_exponent, record, DiagnosticsRecord};
use crate::diffusion::{DiffusionError, DiffusionModel, EntropyDensity, Law};
use crate::grid::{face_gradient, integrate, lp_norm, GridError, GridSpec, ScalarField, VectorField};
use crate::linalg::CgError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    /// Advective Courant number, in `(0, 1]`.
    pub cfl_advect: f64,
    /// Implicitness of the diffusion step, in `[1/2, 1]`.
    pub diff_theta: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub blowup_linf_factor: f64,
    /// Guard norm exponent; `None` picks `2(2-m)/(2-m*)`.
    pub blowup_lp: Option<f64>,
    pub picard_sweeps: usize,
    /// Relative residual for the linear solves.
    pub solver_tol: f64,
    /// Width of the monitored outer ring as a fraction of `L`.
    pub ring_width: f64,
    /// Largest tolerated fraction of mass inside the ring.
    pub ring_tol: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            cfl_advect: 0.4,
            diff_theta: 1.0,
            dt_max: 0.05,
            dt_min: 1e-10,
            blowup_linf_factor: 100.0,
            blowup_lp: None,
            picard_sweeps: 2,
            solver_tol: 1e-10,
            ring_width: 0.05,
            ring_tol: 1e-6,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |m: &str| Err(IntegratorError::Config(m.into()));
        if !(self.cfl_advect > 0.0 && self.cfl_advect <= 1.0) {
            return bad("cfl_advect must lie in (0, 1]");
        }
        if !(0.5..=1.0).contains(&self.diff_theta) {
            return bad("diff_theta must lie in [1/2, 1]");
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max && self.dt_max.is_finite()) {
            return bad("need 0 < dt_min < dt_max");
        }
        if !(self.blowup_linf_factor > 1.0) {
            return bad("blowup_linf_factor must exceed 1");
        }
        if let Some(p) = self.blowup_lp {
            if !(p >= 1.0) {
                return bad("blowup_lp must be at least 1");
            }
        }
        if self.picard_sweeps == 0 {
            return bad("picard_sweeps must be positive");
        }
        if !(self.solver_tol > 1e-14 && self.solver_tol < 1e-2) {
            return bad("solver_tol must lie in (1e-14, 1e-2)");
        }
        if !(self.ring_width > 0.0 && self.ring_width < 1.0) {
            return bad("ring_width must lie in (0, 1)");
        }
        if !(self.ring_tol > 0.0) {
            return bad("ring_tol must be positive");
        }
        Ok(())
    }
}

/// `min(cfl h / max|v|, dt_max)`, clamped below by `dt_min`.
pub fn adapt_dt<T: Real>(v: &VectorField<T>, cfg: &StepperConfig) -> T {
    let h = v.grid().spacing();
    let vmax = v.max_abs();
    let mut dt = T::lit(cfg.dt_max);
    if vmax > T::zero() {
        dt = dt.min(T::lit(cfg.cfl_advect) * h / vmax);
    }
    dt.max(T::lit(cfg.dt_min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupReason {
    /// `‖u‖_∞` exceeded the configured multiple of its initial value.
    LinfGrowth,
    /// The guard norm more than doubled within one step.
    GuardDoubling,
    /// Positivity required a step below `dt_min`.
    StepUnderflow,
}

impl fmt::Display for BlowupReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LinfGrowth => "sup norm growth",
            Self::GuardDoubling => "guard norm doubling",
            Self::StepUnderflow => "time step underflow",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blowup {
    pub t: f64,
    pub step: usize,
    pub reason: BlowupReason,
    pub linf: f64,
    /// Records up to and including the detection frame.
    pub series: Vec<DiagnosticsRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum IntegratorError {
    #[error("blow-up suspected at t = {:.6} (step {}): {}", .0.t, .0.step, .0.reason)]
    BlowupSuspected(Box<Blowup>),
    #[error("{fraction:e} of the mass reached the outer boundary ring at t = {t:.6}; enlarge L")]
    BoundaryReached { t: f64, fraction: f64 },
    #[error("invalid stepper configuration: {0}")]
    Config(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error(transparent)]
    Chemo(#[from] ChemoError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("diffusion solve failed: {0}")]
    Solve(#[from] CgError),
}

#[derive(Debug, Clone)]
pub struct SimState<T> {
    pub t: T,
    pub u: ScalarField<T>,
    /// Chemoattractant of the current `u`.
    pub c: ScalarField<T>,
    /// Last step taken.
    pub dt: T,
    pub step_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub solver_iterations: usize,
    /// Mass change from round-off and solver tolerance, before correction.
    pub mass_defect: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub state: SimState<T>,
    pub series: Vec<DiagnosticsRecord>,
}

/// Time stepper bound to one grid and model.
pub struct Integrator<T: Real> {
    grid: GridSpec<T>,
    chemo: ChemoSolver<T>,
    diffusion: DiffusionModel<T>,
    entropy: EntropyDensity<T>,
    cfg: StepperConfig,
    guard_p: T,
    ring: Vec<usize>,
    linf0: T,
    direct: Option<cosine::CosineSolver<T>>,
}

impl<T: Real> Integrator<T> {
    pub fn new(
        grid: GridSpec<T>,
        chemo: &ChemoModel<T>,
        diffusion: DiffusionModel<T>,
        cfg: StepperConfig,
    ) -> Result<Self, IntegratorError> {
        cfg.validate()?;
        let m_star = match chemo {
            ChemoModel::Convolution(k) => k.critical_exponent().m_star.as_f64(),
            ChemoModel::Elliptic(_) => 2.0 - 2.0 / grid.dim() as f64,
        };
        let m = match diffusion.law() {
            Law::PorousMedium { m } => m.as_f64(),
            _ => 1.0,
        };
        let guard_p = T::lit(cfg.blowup_lp.unwrap_or_else(|| guard_exponent(m, m_star)));
        let entropy = diffusion.entropy_density()?;
        let solver = ChemoSolver::new(chemo, grid, T::lit(cfg.solver_tol))?;
        let ring = (0..grid.len()).filter(|&i| grid.in_outer_ring(i, T::lit(cfg.ring_width))).collect();
        let direct = diffusion.constant_slope().map(|_| cosine::CosineSolver::new(grid));
        Ok(Self { grid, chemo: solver, diffusion, entropy, cfg, guard_p, ring, linf0: T::zero(), direct })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn guard_exponent(&self) -> T {
        self.guard_p
    }

    pub fn entropy(&self) -> &EntropyDensity<T> {
        &self.entropy
    }

    pub fn diffusion(&self) -> &DiffusionModel<T> {
        &self.diffusion
    }

    /// State at `t = 0`; also fixes the reference sup norm for blow-up detection.
    pub fn init(&mut self, u0: ScalarField<T>) -> Result<SimState<T>, IntegratorError> {
        if *u0.grid() != self.grid {
            return Err(IntegratorError::State("initial data lives on a different grid".into()));
        }
        if !u0.is_nonnegative() || u0.values().iter().any(|v| !v.is_finite()) {
            return Err(IntegratorError::State("initial data must be finite and non-negative".into()));
        }
        self.linf0 = u0.max_value();
        let c = self.chemo.potential(&u0)?;
        Ok(SimState { t: T::zero(), u: u0, c, dt: T::zero(), step_count: 0 })
    }

    pub fn record(&self, state: &SimState<T>) -> Result<DiagnosticsRecord, IntegratorError> {
        Ok(record(state.t, &state.u, &state.c, &self.entropy, self.guard_p)?)
    }

    /// One step, not advancing past `t_limit`.
    pub fn step(&mut self, state: &mut SimState<T>, t_limit: T) -> Result<StepReport, IntegratorError> {
        let mass_before = integrate(&state.u);
        let v = face_gradient(&state.c);
        let flux = advect::fluxes(&state.u, &v);
        let mut dt = adapt_dt(&v, &self.cfg).min(t_limit - state.t);
        let pos = advect::positivity_limit(&state.u, &flux) * T::lit(0.9);
        if pos < dt {
            if pos < T::lit(self.cfg.dt_min) {
                return Err(self.blowup(state, BlowupReason::StepUnderflow, Vec::new()));
            }
            dt = pos;
        }
        if self.cfg.diff_theta < 1.0 {
            // explicit part of the diffusion step must stay monotone
            let amax = state.u.values().iter().map(|&z| self.diffusion.a_prime(z)).fold(T::zero(), T::max);
            let h2 = self.grid.spacing() * self.grid.spacing();
            let bound = h2 / (T::from_count(2 * self.grid.dim()) * T::lit(1.0 - self.cfg.diff_theta) * amax);
            dt = dt.min(bound.max(T::lit(self.cfg.dt_min)));
        }
        let mut u = state.u.clone();
        advect::apply(&mut u, &flux, dt);
        let iterations = diffuse::diffuse(
            self.direct.as_ref(),
            &self.diffusion,
            &mut u,
            dt,
            T::lit(self.cfg.diff_theta),
            self.cfg.picard_sweeps,
            T::lit(self.cfg.solver_tol),
        )?;
        for v in u.values_mut() {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        let mass_after = integrate(&u);
        if mass_after > T::zero() {
            u.scale(mass_before / mass_after);
        }
        if u.values().iter().any(|v| !v.is_finite()) {
            return Err(IntegratorError::State(format!("non-finite density at t = {}", state.t.as_f64())));
        }
        state.c = self.chemo.potential(&u)?;
        state.u = u;
        state.t = state.t + dt;
        if t_limit - state.t <= T::lit(1024.0) * T::epsilon() * t_limit.abs().max(T::one()) {
            state.t = state.t.max(t_limit);
        }
        state.dt = dt;
        state.step_count += 1;
        let defect = if mass_before > T::zero() { ((mass_after - mass_before) / mass_before).as_f64() } else { 0.0 };
        Ok(StepReport { dt: dt.as_f64(), solver_iterations: iterations, mass_defect: defect })
    }

    fn blowup(&self, state: &SimState<T>, reason: BlowupReason, series: Vec<DiagnosticsRecord>) -> IntegratorError {
        IntegratorError::BlowupSuspected(Box::new(Blowup {
            t: state.t.as_f64(),
            step: state.step_count,
            reason,
            linf: state.u.max_value().as_f64(),
            series,
        }))
    }

    fn ring_fraction(&self, u: &ScalarField<T>, mass: T) -> f64 {
        if !(mass > T::zero()) {
            return 0.0;
        }
        let ring: T = self.ring.iter().map(|&i| u[i]).sum::<T>() * self.grid.cell_volume();
        (ring / mass).as_f64()
    }

    /// Advances from `u0` to `t_end`, recording diagnostics at step 0, every
    /// `observe_every` steps and at the final step. `observer` sees each
    /// recorded frame.
    pub fn run(
        &mut self,
        u0: ScalarField<T>,
        t_end: T,
        observe_every: usize,
        mut observer: impl FnMut(&SimState<T>, &DiagnosticsRecord),
    ) -> Result<RunOutput<T>, IntegratorError> {
        if !(t_end >= T::zero()) {
            return Err(IntegratorError::Config("t_end must be non-negative".into()));
        }
        let mut state = self.init(u0)?;
        let mut series = Vec::new();
        if t_end == T::zero() {
            return Ok(RunOutput { state, series });
        }
        let every = observe_every.max(1);
        let mass0 = integrate(&state.u);
        let linf_cap = self.linf0 * T::lit(self.cfg.blowup_linf_factor);
        let mut guard = lp_norm(&state.u, self.guard_p)?;
        let first = self.record(&state)?;
        observer(&state, &first);
        series.push(first);
        while state.t < t_end {
            match self.step(&mut state, t_end) {
                Ok(_) => {}
                Err(IntegratorError::BlowupSuspected(mut b)) => {
                    let last = self.record(&state)?;
                    observer(&state, &last);
                    series.push(last);
                    b.series = series;
                    return Err(IntegratorError::BlowupSuspected(b));
                }
                Err(e) => return Err(e),
            }
            let done = state.t >= t_end;
            let new_guard = lp_norm(&state.u, self.guard_p)?;
            let reason = if state.u.max_value() > linf_cap {
                Some(BlowupReason::LinfGrowth)
            } else if new_guard > guard * T::lit(2.0) {
                Some(BlowupReason::GuardDoubling)
            } else {
                None
            };
            guard = new_guard;
            if done || reason.is_some() || state.step_count % every == 0 {
                let rec = self.record(&state)?;
                observer(&state, &rec);
                series.push(rec);
            }
            if let Some(reason) = reason {
                return Err(self.blowup(&state, reason, series));
            }
            let frac = self.ring_fraction(&state.u, mass0);
            if frac > self.cfg.ring_tol {
                return Err(IntegratorError::BoundaryReached { t: state.t.as_f64(), fraction: frac });
            }
        }
        Ok(RunOutput { state, series })
    }
}

#[cfg(test)]
mod tests;
