//! θ-implicit nonlinear diffusion `u_t = ΔA(u)` with zero-flux walls.

use super::cosine::CosineSolver;
use crate::diffusion::DiffusionModel;
use crate::grid::{GridSpec, ScalarField};
use crate::linalg::{pcg, CgError, SpdOperator};
use crate::scalar::Real;

/// `I - θ dt L_D` with face weights `D_f θ dt / h^2`.
pub(crate) struct ImplicitOperator<T> {
    grid: GridSpec<T>,
    weights: Vec<Vec<T>>,
}

impl<T: Real> ImplicitOperator<T> {
    /// Weights from secant slopes of `A` between neighbouring values of `w`.
    pub(crate) fn secant(model: &DiffusionModel<T>, w: &[T], grid: GridSpec<T>, factor: T) -> Self {
        let n = grid.cells_per_axis();
        let weights = (0..grid.dim())
            .map(|axis| {
                let s = grid.stride(axis);
                (0..grid.len())
                    .map(|i| {
                        if (i / s) % n + 1 == n {
                            T::zero()
                        } else {
                            factor * model.secant_slope(w[i], w[i + s])
                        }
                    })
                    .collect()
            })
            .collect();
        Self { grid, weights }
    }
}

impl<T: Real> SpdOperator<T> for ImplicitOperator<T> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(x);
        let n = self.grid.cells_per_axis();
        for (axis, w) in self.weights.iter().enumerate() {
            let s = self.grid.stride(axis);
            for_each_face(x.len(), n, s, |i| {
                let f = w[i] * (x[i] - x[i + s]);
                y[i] = y[i] + f;
                y[i + s] = y[i + s] - f;
            });
        }
    }

    fn diagonal(&self) -> Vec<T> {
        let n = self.grid.cells_per_axis();
        let mut d = vec![T::one(); self.grid.len()];
        for (axis, w) in self.weights.iter().enumerate() {
            let s = self.grid.stride(axis);
            for_each_face(d.len(), n, s, |i| {
                d[i] = d[i] + w[i];
                d[i + s] = d[i + s] + w[i];
            });
        }
        d
    }
}

/// Calls `f(i)` for every cell `i` whose upper neighbour `i + s` along the
/// axis with stride `s` lies inside the grid.
#[inline]
fn for_each_face(len: usize, n: usize, s: usize, mut f: impl FnMut(usize)) {
    let block = s * n;
    for base in (0..len).step_by(block) {
        for i in base..base + block - s {
            f(i);
        }
    }
}

/// Discrete `ΔA(u)` with zero-flux walls.
pub(crate) fn laplacian_of_a<T: Real>(model: &DiffusionModel<T>, u: &ScalarField<T>) -> Vec<T> {
    let g = *u.grid();
    let n = g.cells_per_axis();
    let inv_h2 = (g.spacing() * g.spacing()).recip();
    let a: Vec<T> = u.values().iter().map(|&z| model.a(z)).collect();
    let mut out = vec![T::zero(); g.len()];
    for axis in 0..g.dim() {
        let s = g.stride(axis);
        for i in 0..g.len() {
            if (i / s) % n + 1 < n {
                let f = (a[i + s] - a[i]) * inv_h2;
                out[i] = out[i] + f;
                out[i + s] = out[i + s] - f;
            }
        }
    }
    out
}

/// Advances `u` by one θ-step, with `sweeps` Picard iterations on the
/// secant diffusivity. Constant slopes go to `direct` when given. Returns
/// the total number of solver iterations.
pub(crate) fn diffuse<T: Real>(
    direct: Option<&CosineSolver<T>>,
    model: &DiffusionModel<T>,
    u: &mut ScalarField<T>,
    dt: T,
    theta: T,
    sweeps: usize,
    tol: T,
) -> Result<usize, CgError> {
    let g = *u.grid();
    let mut rhs = u.values().to_vec();
    if theta < T::one() {
        let lap = laplacian_of_a(model, u);
        for (r, l) in rhs.iter_mut().zip(lap) {
            *r = *r + (T::one() - theta) * dt * l;
        }
    }
    let factor = theta * dt / (g.spacing() * g.spacing());
    if let (Some(solver), Some(slope)) = (direct, model.constant_slope()) {
        let x = solver.solve(&rhs, factor * slope);
        u.values_mut().copy_from_slice(&x);
        return Ok(0);
    }
    let sweeps = if model.constant_slope().is_some() { 1 } else { sweeps.max(1) };
    let max_iter = (20 * g.cells_per_axis() * g.dim()).max(500);
    let mut iterate = u.values().to_vec();
    let mut total = 0;
    for _ in 0..sweeps {
        let op = ImplicitOperator::secant(model, &iterate, g, factor);
        let mut next = iterate.clone();
        total += pcg(&op, &rhs, &mut next, tol, max_iter)?.iterations;
        iterate = next;
    }
    u.values_mut().copy_from_slice(&iterate);
    Ok(total)
}
