use super::DiagnosticsError;
use crate::diffusion::Law;
use crate::grid::{dilate_conservative, dilate_interpolated, integrate, second_moment, ScalarField};
use crate::fft::ConvolutionPlan;
use crate::kernels::{convolution_plan, Kernel, Profile};
use crate::scalar::Real;

/// `τ = (1/d) log(1 + d t)`.
pub fn self_similar_time<T: Real>(dim: usize, t: T) -> Result<T, DiagnosticsError> {
    if !(t >= T::zero()) {
        return Err(DiagnosticsError::Time(t.as_f64()));
    }
    let d = T::from_count(dim);
    Ok((T::one() + d * t).ln() / d)
}

fn dilate_checked<T: Real>(f: &ScalarField<T>, s: T) -> Result<ScalarField<T>, DiagnosticsError> {
    let (out, lost) = dilate_conservative(f, s);
    let mass = integrate(f);
    if mass > T::zero() && (lost / mass).as_f64().abs() > 1e-6 {
        return Err(DiagnosticsError::Support((lost / mass).as_f64()));
    }
    Ok(out)
}

/// `θ(η) = e^{dτ} u(e^τ η)` on the same grid, with `τ` from [`self_similar_time`].
pub fn self_similar_transform<T: Real>(u: &ScalarField<T>, t: T) -> Result<(ScalarField<T>, T), DiagnosticsError> {
    let tau = self_similar_time(u.grid().dim(), t)?;
    Ok((dilate_checked(u, (-tau).exp())?, tau))
}

/// `u(x) = e^{-dτ} θ(x e^{-τ})`, by multilinear interpolation renormalised to
/// the mass of `θ`. Fails when `θ` has mass outside the contracted box.
pub fn inverse_self_similar<T: Real>(theta: &ScalarField<T>, tau: T) -> Result<ScalarField<T>, DiagnosticsError> {
    let g = theta.grid();
    let s = tau.exp();
    let mass = integrate(theta);
    if !(mass > T::zero()) {
        return Ok(ScalarField::zeros(*g));
    }
    let edge = g.half_width() / s;
    let outside = (0..g.len())
        .filter(|&i| g.cell_center(i).iter().take(g.dim()).any(|&x| crate::scalar::abs(x) > edge))
        .map(|i| theta[i])
        .sum::<T>()
        * g.cell_volume();
    if (outside / mass).as_f64() > 1e-6 {
        return Err(DiagnosticsError::Support((outside / mass).as_f64()));
    }
    let mut u = dilate_interpolated(theta, s);
    let got = integrate(&u);
    if got > T::zero() {
        u.scale(mass / got);
    }
    Ok(u)
}

/// `G(θ) = E(θ) + ½ ∫|η|²θ - ½ ∫ θ (K * θ)` where `E = ∫ θ log θ` for the
/// 2-D logarithmic kernel and `E = ∫ θ^m / (m - 1)`, `m = 2 - 2/d`, for the
/// Newtonian kernel with porous-medium diffusion in `d ≥ 3`.
pub fn modified_free_energy<T: Real>(
    theta: &ScalarField<T>,
    law: &Law<T>,
    kernel: &Kernel<T>,
) -> Result<T, DiagnosticsError> {
    let plan = convolution_plan(kernel, theta.grid())?;
    modified_free_energy_with(theta, law, kernel, &plan)
}

/// [`modified_free_energy`] with a prebuilt convolution plan for `kernel`.
pub fn modified_free_energy_with<T: Real>(
    theta: &ScalarField<T>,
    law: &Law<T>,
    kernel: &Kernel<T>,
    plan: &ConvolutionPlan<T>,
) -> Result<T, DiagnosticsError> {
    let g = theta.grid();
    let d = g.dim();
    let log_kernel = matches!(kernel.profile(), Profile::Newtonian | Profile::Logarithmic { .. });
    if kernel.dim() != d || !log_kernel || (d == 3 && !matches!(kernel.profile(), Profile::Newtonian)) {
        return Err(DiagnosticsError::Unsupported("kernel must be the logarithmic (d = 2) or Newtonian (d = 3) one".into()));
    }
    let vol = g.cell_volume();
    let entropy = match (d, law) {
        (2, Law::Linear) => theta
            .values()
            .iter()
            .map(|&z| if z > T::zero() { z * z.ln() } else { T::zero() })
            .sum::<T>(),
        (3, Law::PorousMedium { m }) if (m.as_f64() - 4.0 / 3.0).abs() < 1e-12 => {
            theta.values().iter().map(|&z| z.max(T::zero()).powf(*m)).sum::<T>() / (*m - T::one())
        }
        _ => {
            return Err(DiagnosticsError::Unsupported(format!(
                "modified free energy needs d = 2 with linear diffusion or d = 3 with m = 4/3 (d = {d})"
            )))
        }
    };
    let c = plan.apply(theta);
    let w = integrate(&theta.mul(&c)?) / T::lit(2.0);
    Ok(entropy * vol + second_moment(theta) / T::lit(2.0) - w)
}
