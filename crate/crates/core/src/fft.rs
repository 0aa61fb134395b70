//! Free-space discrete convolution of cell averages via zero padding onto a
//! doubled periodic domain.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::{GridSpec, ScalarField};
use crate::scalar::Real;

/// Precomputed transform of a kernel table for repeated convolutions on one grid.
///
/// `apply(u)_i = h^d Σ_j table(i - j) u_j`, which is exact linear (not
/// circular) convolution because the table lives on `2n` points per axis.
#[derive(Clone)]
pub struct ConvolutionPlan<T: Real> {
    grid: GridSpec<T>,
    m: usize,
    hat: Arc<Vec<Complex<T>>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for ConvolutionPlan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvolutionPlan").field("grid", &self.grid).field("m", &self.m).finish()
    }
}

/// Signed offset represented by index `j` of a circular axis of length `m`.
#[inline]
pub fn circular_offset(j: usize, m: usize) -> isize {
    if j < m / 2 {
        j as isize
    } else {
        j as isize - m as isize
    }
}

impl<T: Real> ConvolutionPlan<T> {
    /// `table` holds `(2n)^d` values in circular order: index `j` on an axis
    /// is the offset `circular_offset(j, 2n)` cells.
    pub fn new(grid: GridSpec<T>, table: &[T]) -> Self {
        let m = 2 * grid.cells_per_axis();
        let d = grid.dim();
        assert_eq!(table.len(), m.pow(d as u32), "table size must be (2n)^d");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let mut hat: Vec<Complex<T>> = table.iter().map(|&v| Complex::new(v, T::zero())).collect();
        let mut plan = Self { grid, m, hat: Arc::new(Vec::new()), forward, inverse };
        for axis in 0..d {
            plan.transform_axis(&mut hat, axis, false, m);
        }
        plan.hat = Arc::new(hat);
        plan
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    // Transforms every line along `axis` whose coordinates on the later axes
    // are below `limit`.
    fn transform_axis(&self, data: &mut [Complex<T>], axis: usize, inverse: bool, limit: usize) {
        let m = self.m;
        let d = self.grid.dim();
        let stride = m.pow(axis as u32);
        let fft = if inverse { &self.inverse } else { &self.forward };
        let mut line = vec![Complex::new(T::zero(), T::zero()); m];
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        let others: Vec<usize> = (0..d).filter(|&a| a != axis).collect();
        let extent = |a: usize| if a > axis { limit } else { m };
        let (e0, e1) = (extent(others[0]), others.get(1).map_or(1, |&a| extent(a)));
        for j1 in 0..e1 {
            for j0 in 0..e0 {
                let mut base = j0 * m.pow(others[0] as u32);
                if let Some(&a) = others.get(1) {
                    base += j1 * m.pow(a as u32);
                }
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }

    pub fn apply(&self, u: &ScalarField<T>) -> ScalarField<T> {
        assert_eq!(u.grid(), &self.grid, "convolution plan built for another grid");
        let n = self.grid.cells_per_axis();
        let m = self.m;
        let d = self.grid.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; m.pow(d as u32)];
        let big = |idx: [usize; 3]| idx[0] + m * idx[1] + m * m * idx[2];
        for (i, &v) in u.values().iter().enumerate() {
            buf[big(self.grid.unravel(i))] = Complex::new(v, T::zero());
        }
        for axis in 0..d {
            self.transform_axis(&mut buf, axis, false, n);
        }
        for (b, k) in buf.iter_mut().zip(self.hat.iter()) {
            *b = *b * *k;
        }
        for axis in (0..d).rev() {
            self.transform_axis(&mut buf, axis, true, n);
        }
        let scale = self.grid.cell_volume() / T::from_count(m.pow(d as u32));
        let values = (0..u.values().len()).map(|i| buf[big(self.grid.unravel(i))].re * scale).collect();
        ScalarField::new(self.grid, values).expect("same grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute(grid: GridSpec<f64>, table: &[f64], u: &ScalarField<f64>) -> Vec<f64> {
        let n = grid.cells_per_axis() as isize;
        let m = 2 * n;
        let d = grid.dim();
        let wrap = |o: isize| (o.rem_euclid(m)) as usize;
        (0..grid.len())
            .map(|i| {
                let a = grid.unravel(i);
                let mut s = 0.0;
                for j in 0..grid.len() {
                    let b = grid.unravel(j);
                    let mut t = 0usize;
                    let mut stride = 1usize;
                    for axis in 0..d {
                        t += wrap(a[axis] as isize - b[axis] as isize) * stride;
                        stride *= m as usize;
                    }
                    s += table[t] * u[j];
                }
                s * grid.cell_volume()
            })
            .collect()
    }

    #[test]
    fn matches_direct_linear_convolution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in [2usize, 3] {
            let g = GridSpec::new(d, 1.0, 16).unwrap();
            let m = 32usize.pow(d as u32);
            let table: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = ScalarField::from_fn(g, |_| rng.gen_range(0.0..1.0));
            let fast = ConvolutionPlan::new(g, &table).apply(&u);
            for (a, b) in fast.values().iter().zip(brute(g, &table, &u)) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn circular_offsets() {
        assert_eq!(circular_offset(0, 32), 0);
        assert_eq!(circular_offset(15, 32), 15);
        assert_eq!(circular_offset(16, 32), -16);
        assert_eq!(circular_offset(31, 32), -1);
    }
}
