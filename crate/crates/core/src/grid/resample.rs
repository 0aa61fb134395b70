//! Dilations of cell-averaged fields onto the same grid.

use super::{GridSpec, ScalarField};
use crate::scalar::Real;

/// Overlap weights `|[x_i ± h/2] ∩ [(y_j ± h/2)/s]|` for every target cell `j`.
fn overlap_weights<T: Real>(g: &GridSpec<T>, s: T) -> Vec<Vec<(usize, T)>> {
    let n = g.cells_per_axis();
    let h = g.spacing();
    let half = h / T::lit(2.0);
    let lo = -g.half_width();
    (0..n)
        .map(|j| {
            let a = (g.center(j) - half) / s;
            let b = (g.center(j) + half) / s;
            // candidate source cells overlapping [a, b]
            let first = ((a - lo) / h).floor().max(T::zero());
            let last = ((b - lo) / h).ceil().min(T::from_count(n));
            let (first, last) = (first.to_usize().unwrap_or(0), last.to_usize().unwrap_or(0));
            (first..last.max(first))
                .filter_map(|i| {
                    let ci = g.center(i);
                    let w = (ci + half).min(b) - (ci - half).max(a);
                    (w > T::zero()).then_some((i, w))
                })
                .collect()
        })
        .collect()
}

/// Applies a 1-D linear map along `axis` of a row-major array.
fn apply_axis<T: Real>(
    g: &GridSpec<T>,
    data: &[T],
    axis: usize,
    weights: &[Vec<(usize, T)>],
) -> Vec<T> {
    let n = g.cells_per_axis();
    let stride = g.stride(axis);
    let mut out = vec![T::zero(); data.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let j = (idx / stride) % n;
        let base = idx - j * stride;
        let mut acc = T::zero();
        for &(i, w) in &weights[j] {
            acc = acc + w * data[base + i * stride];
        }
        *o = acc;
    }
    out
}

/// Mass-conserving dilation `g(y) = s^{-d} f(y / s)` by exact overlap of
/// piecewise-constant cells. Returns the field and the mass that fell outside
/// the box (non-zero only for `s > 1`).
pub fn dilate_conservative<T: Real>(f: &ScalarField<T>, s: T) -> (ScalarField<T>, T) {
    let g = *f.grid();
    let weights = overlap_weights(&g, s);
    let mut data = f.values().to_vec();
    for axis in 0..g.dim() {
        data = apply_axis(&g, &data, axis, &weights);
    }
    let inv_h = T::one() / g.spacing();
    let scale = inv_h.powi(g.dim() as i32);
    data.iter_mut().for_each(|v| *v = *v * scale);
    let out = ScalarField::new(g, data).expect("same grid");
    let lost = super::integrate(f) - super::integrate(&out);
    (out, lost)
}

/// Pointwise dilation `g(y) = f(y / s)` by multilinear interpolation of the
/// cell-centre values; `f` is taken as zero half a cell beyond the box.
pub fn dilate_interpolated<T: Real>(f: &ScalarField<T>, s: T) -> ScalarField<T> {
    let g = *f.grid();
    let n = g.cells_per_axis() as isize;
    let h = g.spacing();
    let lo = -g.half_width();
    let d = g.dim();
    let vals = f.values();
    let get = |ijk: [isize; 3]| -> T {
        if ijk.iter().take(d).any(|&i| i < 0 || i >= n) {
            T::zero()
        } else {
            vals[g.ravel([ijk[0] as usize, ijk[1] as usize, ijk[2] as usize])]
        }
    };
    ScalarField::from_fn(g, |y| {
        let mut base = [0isize; 3];
        let mut frac = [T::zero(); 3];
        for a in 0..d {
            let t = (y[a] / s - lo) / h - T::lit(0.5);
            let fl = t.floor();
            base[a] = fl.to_isize().unwrap_or(isize::MIN / 2);
            frac[a] = t - fl;
        }
        let mut acc = T::zero();
        for corner in 0..(1usize << d) {
            let mut w = T::one();
            let mut ijk = [0isize; 3];
            for a in 0..d {
                let bit = (corner >> a) & 1;
                ijk[a] = base[a] + bit as isize;
                w = w * if bit == 1 { frac[a] } else { T::one() - frac[a] };
            }
            if w != T::zero() {
                acc = acc + w * get(ijk);
            }
        }
        acc
    })
}
