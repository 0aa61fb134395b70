//! Explicit transport with limited linear reconstruction.

use crate::grid::{ScalarField, VectorField};
use crate::scalar::Real;

/// Van Leer's harmonic slope limiter.
#[inline]
fn van_leer<T: Real>(a: T, b: T) -> T {
    if (a > T::zero() && b > T::zero()) || (a < T::zero() && b < T::zero()) {
        T::lit(2.0) * a * (b / (a + b))
    } else {
        T::zero()
    }
}

/// Face fluxes `v⁺ u_L + v⁻ u_R` with limited reconstructions. Reconstructed
/// face values lie in `[0, 2 u_i]` for the cell they come from.
pub(crate) fn fluxes<T: Real>(u: &ScalarField<T>, v: &VectorField<T>) -> VectorField<T> {
    let g = *u.grid();
    let n = g.cells_per_axis();
    let uv = u.values();
    let half = T::lit(0.5);
    let mut out = VectorField::zeros(g);
    for axis in 0..g.dim() {
        let s = g.stride(axis);
        let slope: Vec<T> = (0..g.len())
            .map(|i| {
                let ia = (i / s) % n;
                if ia == 0 || ia + 1 == n {
                    T::zero()
                } else {
                    van_leer(uv[i] - uv[i - s], uv[i + s] - uv[i])
                }
            })
            .collect();
        let vel = v.component(axis);
        let f = out.component_mut(axis);
        for i in 0..g.len() {
            if (i / s) % n + 1 == n {
                continue;
            }
            let w = vel[i];
            f[i] = if w > T::zero() {
                w * (uv[i] + half * slope[i]).max(T::zero())
            } else {
                w * (uv[i + s] - half * slope[i + s]).max(T::zero())
            };
        }
    }
    out
}

/// Largest step keeping every cell non-negative under the forward-Euler
/// update with the given fluxes.
pub(crate) fn positivity_limit<T: Real>(u: &ScalarField<T>, flux: &VectorField<T>) -> T {
    let g = *u.grid();
    let n = g.cells_per_axis();
    let h = g.spacing();
    let mut outflow = vec![T::zero(); g.len()];
    for axis in 0..g.dim() {
        let s = g.stride(axis);
        let f = flux.component(axis);
        for i in 0..g.len() {
            if (i / s) % n + 1 == n {
                continue;
            }
            if f[i] > T::zero() {
                outflow[i] = outflow[i] + f[i];
            } else {
                outflow[i + s] = outflow[i + s] - f[i];
            }
        }
    }
    let worst = u
        .values()
        .iter()
        .zip(&outflow)
        .filter(|(_, &o)| o > T::zero())
        .map(|(&ui, &o)| if ui > T::zero() { o / ui } else { T::infinity() })
        .fold(T::zero(), T::max);
    if worst > T::zero() { h / worst } else { T::infinity() }
}

/// `u ← u - dt ∇·F`.
pub(crate) fn apply<T: Real>(u: &mut ScalarField<T>, flux: &VectorField<T>, dt: T) {
    let div = flux.divergence();
    for (a, &d) in u.values_mut().iter_mut().zip(div.values()) {
        *a = *a - dt * d;
    }
}
