//! Scalar functionals: free energy, dissipation, second-moment rate,
//! entropy bounds, inequality probes and the self-similar change of variables.

mod probes;
mod selfsim;

pub use probes::{gns_exponents, gns_probe, gns_ratio, log_hls_brute_force, log_hls_probe, log_hls_q, GnsReport, LogHlsReport};
pub use selfsim::{
    inverse_self_similar, modified_free_energy, modified_free_energy_with, self_similar_time, self_similar_transform,
};

use crate::chemo::ChemoError;
use crate::diffusion::{DiffusionError, DiffusionModel, EntropyDensity};
use crate::fft::ConvolutionPlan;
use crate::grid::{integrate, lp_norm, second_moment, GridError, GridSpec, ScalarField};
use crate::kernels::{cell_average, radial_table, Kernel, KernelError};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Chemo(#[from] ChemoError),
    #[error("exponents rejected: {0}")]
    Exponents(String),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("rescaled profile leaves the box (lost mass fraction {0:e}); enlarge L")]
    Support(f64),
    #[error("self-similar time needs t >= 0, got {0}")]
    Time(f64),
}

/// Cells (or faces) with density below this contribute nothing to `D[u]`.
pub const DISSIPATION_FLOOR: f64 = 1e-12;

pub const CSV_HEADER: &str = "t,mass,linf,l2,lp_guard,m2,free_energy,dissipation,entropy,interaction";

/// One row of the diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub linf: f64,
    pub l2: f64,
    pub lp_guard: f64,
    pub m2: f64,
    pub free_energy: f64,
    pub dissipation: f64,
    pub entropy: f64,
    pub interaction: f64,
}

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let v = [
            self.t,
            self.mass,
            self.linf,
            self.l2,
            self.lp_guard,
            self.m2,
            self.free_energy,
            self.dissipation,
            self.entropy,
            self.interaction,
        ];
        v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
    }
}

/// Header plus one line per record.
pub fn series_csv(series: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in series {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy<T> {
    /// `S = ∫ Φ(u)`.
    pub entropy: T,
    /// `W = ½ ∫ u c`.
    pub interaction: T,
    /// `F = S - W`.
    pub total: T,
}

pub fn free_energy<T: Real>(u: &ScalarField<T>, c: &ScalarField<T>, entropy: &EntropyDensity<T>) -> Result<FreeEnergy<T>, GridError> {
    let vol = u.grid().cell_volume();
    let s = u.values().iter().map(|&z| entropy.phi(z)).sum::<T>() * vol;
    let w = integrate(&u.mul(c)?) / T::lit(2.0);
    Ok(FreeEnergy { entropy: s, interaction: w, total: s - w })
}

/// `∫ (1/u) |∇A(u) - u ∇c|^2`, evaluated on faces with the face density
/// `(u_i + u_j)/2`; faces below [`DISSIPATION_FLOOR`] are skipped.
pub fn dissipation<T: Real>(u: &ScalarField<T>, c: &ScalarField<T>, model: &DiffusionModel<T>) -> T {
    let g = *u.grid();
    let n = g.cells_per_axis();
    let h = g.spacing();
    let floor = T::lit(DISSIPATION_FLOOR);
    let a: Vec<T> = u.values().iter().map(|&z| model.a(z)).collect();
    let (uv, cv) = (u.values(), c.values());
    let mut acc = T::zero();
    for axis in 0..g.dim() {
        let s = g.stride(axis);
        for i in 0..g.len() {
            if (i / s) % n + 1 == n {
                continue;
            }
            let ubar = (uv[i] + uv[i + s]) / T::lit(2.0);
            if ubar < floor {
                continue;
            }
            let flux = (a[i + s] - a[i]) / h - ubar * (cv[i + s] - cv[i]) / h;
            acc = acc + flux * flux / ubar;
        }
    }
    acc * g.cell_volume()
}

/// Guard exponent `2(2-m)/(2-m*)`, or 2 when that is not a valid exponent.
pub fn guard_exponent(m: f64, m_star: f64) -> f64 {
    let p = 2.0 * (2.0 - m) / (2.0 - m_star);
    if p.is_finite() && p >= 1.0 { p } else { 2.0 }
}

/// Full record for `(u, c)` at time `t`.
pub fn record<T: Real>(
    t: T,
    u: &ScalarField<T>,
    c: &ScalarField<T>,
    entropy: &EntropyDensity<T>,
    guard_p: T,
) -> Result<DiagnosticsRecord, GridError> {
    let fe = free_energy(u, c, entropy)?;
    Ok(DiagnosticsRecord {
        t: t.as_f64(),
        mass: integrate(u).as_f64(),
        linf: u.max_value().max(T::zero()).as_f64(),
        l2: lp_norm(u, T::lit(2.0))?.as_f64(),
        lp_guard: lp_norm(u, guard_p)?.as_f64(),
        m2: second_moment(u).as_f64(),
        free_energy: fe.total.as_f64(),
        dissipation: dissipation(u, c, entropy.model()).as_f64(),
        entropy: fe.entropy.as_f64(),
        interaction: fe.interaction.as_f64(),
    })
}

/// Convolution with the radial weight `W(r) = r k'(r)`, used by the
/// second-moment identity.
pub fn virial_plan<T: Real>(kernel: &Kernel<T>, grid: &GridSpec<T>) -> Result<ConvolutionPlan<T>, KernelError> {
    let w = |r: T| if kernel.is_zero() { T::zero() } else { r * kernel.grad_unchecked(r) };
    let origin = cell_average(grid.dim(), grid.spacing(), |r| if r > T::zero() { w(r) } else { T::zero() })?;
    Ok(ConvolutionPlan::new(*grid, &radial_table(grid, w, origin)))
}

/// Predicted `dM₂/dt = 2d ∫ A(u) + ∫∫ u(x) u(y) (x-y)·∇K(x-y)`.
pub fn virial_rate<T: Real>(u: &ScalarField<T>, kernel: &Kernel<T>, model: &DiffusionModel<T>) -> Result<T, KernelError> {
    let plan = virial_plan(kernel, u.grid())?;
    Ok(virial_rate_with(u, &plan, model))
}

pub fn virial_rate_with<T: Real>(u: &ScalarField<T>, plan: &ConvolutionPlan<T>, model: &DiffusionModel<T>) -> T {
    let g = u.grid();
    let diff = u.values().iter().map(|&z| model.a(z)).sum::<T>() * g.cell_volume() * T::from_count(2 * g.dim());
    let wu = plan.apply(u);
    let inter = u.values().iter().zip(wu.values()).map(|(&a, &b)| a * b).sum::<T>() * g.cell_volume();
    diff + inter
}

/// Centred difference of `m2` at interior record `k` of a series.
pub fn measured_virial_rate(series: &[DiagnosticsRecord], k: usize) -> Option<f64> {
    if k == 0 || k + 1 >= series.len() {
        return None;
    }
    let (a, b) = (&series[k - 1], &series[k + 1]);
    Some((b.m2 - a.m2) / (b.t - a.t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBound {
    /// `∫ u log u`.
    pub lhs: f64,
    /// `M log(ε^{d/2} M / π^{d/2}) - ε M₂`.
    pub rhs: f64,
    pub ok: bool,
}

pub fn entropy_lower_bound_check<T: Real>(u: &ScalarField<T>, epsilon: T) -> EntropyBound {
    let g = u.grid();
    let d = T::from_count(g.dim());
    let ulogu = u
        .values()
        .iter()
        .map(|&z| if z > T::zero() { z * z.ln() } else { T::zero() })
        .sum::<T>()
        * g.cell_volume();
    let m = integrate(u);
    if !(m > T::zero()) {
        return EntropyBound { lhs: ulogu.as_f64(), rhs: 0.0, ok: ulogu >= T::zero() };
    }
    let rhs = m * ((epsilon / T::PI()).powf(d / T::lit(2.0)) * m).ln() - epsilon * second_moment(u);
    let (lhs, rhs) = (ulogu.as_f64(), rhs.as_f64());
    EntropyBound { lhs, rhs, ok: lhs >= rhs - 1e-8 * (1.0 + rhs.abs()) }
}
