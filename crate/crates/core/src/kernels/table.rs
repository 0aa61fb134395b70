use super::{Kernel, KernelError, Singularity};
use crate::fft::{circular_offset, ConvolutionPlan};
use crate::grid::{GridSpec, ScalarField};
use crate::quadrature::{adaptive_gk, gauss_legendre, tolerance};
use crate::scalar::Real;

/// Average of the radial function `f` over the cube `[-h/2, h/2]^d`.
///
/// The cube is split into `2^d d!` congruent simplices with a vertex at the
/// origin; a Duffy map turns the radial singularity into a weight `s^{d-1}`,
/// integrated adaptively in `s` and by 32-point Gauss-Legendre across.
pub fn cell_average<T: Real>(
    dim: usize,
    h: T,
    f: impl Fn(T) -> T,
) -> Result<T, crate::quadrature::QuadratureError> {
    let a = h / T::lit(2.0);
    let rule = gauss_legendre::<T>(32);
    let tol = tolerance::<T>(1e-13);
    let radial = |stretch: T| {
        adaptive_gk(|s: T| f(a * s * stretch) * s.powi(dim as i32 - 1), T::zero(), T::one(), tol, tol)
    };
    let mut err = None;
    let mut outer = |t: T| -> T {
        if dim == 2 {
            radial((T::one() + t * t).sqrt()).unwrap_or_else(|e| {
                err.get_or_insert(e);
                T::zero()
            })
        } else {
            let inner = |w: T| {
                let stretch = (T::one() + t * t + t * t * w * w).sqrt();
                radial(stretch).map(|v| v * t)
            };
            let mut sum = T::zero();
            let half = T::lit(0.5);
            for (x, wt) in rule.0.iter().zip(&rule.1) {
                match inner(half + half * *x) {
                    Ok(v) => sum = sum + *wt * half * v,
                    Err(e) => {
                        err.get_or_insert(e);
                    }
                }
            }
            sum
        }
    };
    let mut acc = T::zero();
    let half = T::lit(0.5);
    for (x, w) in rule.0.iter().zip(&rule.1) {
        acc = acc + *w * half * outer(half + half * *x);
    }
    if let Some(e) = err {
        return Err(e);
    }
    let factor = if dim == 2 { T::lit(2.0) } else { T::lit(6.0) };
    Ok(acc * factor)
}

/// Table of `f(|o| h)` over all offsets `o` of the doubled domain in circular
/// order, with `origin` placed at offset zero.
pub fn radial_table<T: Real>(grid: &GridSpec<T>, f: impl Fn(T) -> T, origin: T) -> Vec<T> {
    let d = grid.dim();
    let m = 2 * grid.cells_per_axis();
    let h = grid.spacing();
    let total = m.pow(d as u32);
    (0..total)
        .map(|idx| {
            let mut rem = idx;
            let mut r2 = 0isize;
            for _ in 0..d {
                let o = circular_offset(rem % m, m);
                rem /= m;
                r2 += o * o;
            }
            if r2 == 0 {
                origin
            } else {
                f(h * T::from_count(r2 as usize).sqrt())
            }
        })
        .collect()
}

/// Kernel values at all cell-centre offsets of the doubled domain.
///
/// The result lives on a grid with `2n` cells per axis and half width `2L`;
/// values are stored in circular order (offset `o` at index `o mod 2n`), and
/// the origin cell holds the cell average of `k`.
pub fn sample_on_grid<T: Real>(kernel: &Kernel<T>, grid: &GridSpec<T>) -> Result<ScalarField<T>, KernelError> {
    let h = grid.spacing();
    let origin = match kernel.singularity() {
        Singularity::Bounded => kernel.eval_unchecked(T::zero()),
        _ => cell_average(grid.dim(), h, |r| kernel.eval_unchecked(r))?,
    };
    let origin = if kernel.is_zero() { T::zero() } else { origin };
    let values = radial_table(grid, |r| kernel.eval_unchecked(r), origin);
    let doubled = GridSpec::new(grid.dim(), grid.half_width() + grid.half_width(), 2 * grid.cells_per_axis())
        .expect("doubling a valid grid");
    Ok(ScalarField::new(doubled, values).expect("table size"))
}

/// Convolution plan for `c = K * u` on `grid`.
pub fn convolution_plan<T: Real>(kernel: &Kernel<T>, grid: &GridSpec<T>) -> Result<ConvolutionPlan<T>, KernelError> {
    let table = sample_on_grid(kernel, grid)?;
    Ok(ConvolutionPlan::new(*grid, table.values()))
}
