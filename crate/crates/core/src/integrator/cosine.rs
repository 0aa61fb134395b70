//! Direct solver for `(I + κ L) x = b`, `L` the zero-flux graph Laplacian
//! with unit face weights, by cosine transforms along each axis.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;
use crate::scalar::Real;

#[derive(Clone)]
pub(crate) struct CosineSolver<T: Real> {
    grid: GridSpec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// `exp(-iπk / 2n)`.
    twiddle: Vec<Complex<T>>,
    /// `4 sin²(πk / 2n)`.
    eig: Vec<T>,
}

impl<T: Real> CosineSolver<T> {
    pub(crate) fn new(grid: GridSpec<T>) -> Self {
        let n = grid.cells_per_axis();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(2 * n);
        let inverse = planner.plan_fft_inverse(2 * n);
        let step = T::PI() / T::from_count(2 * n);
        let twiddle = (0..n).map(|k| Complex::from_polar(T::one(), -step * T::from_count(k))).collect();
        let eig = (0..n).map(|k| T::lit(4.0) * (step * T::from_count(k)).sin().powi(2)).collect();
        Self { grid, forward, inverse, twiddle, eig }
    }

    fn lines(&self, axis: usize, mut f: impl FnMut(usize)) {
        let n = self.grid.cells_per_axis();
        let s = self.grid.stride(axis);
        for base in (0..self.grid.len()).step_by(s * n) {
            for start in base..base + s {
                f(start);
            }
        }
    }

    /// In-place transform of every line along `axis`: the unnormalised
    /// DCT-II `X_k = Σ_j x_j cos(πk(2j+1)/2n)`, or its exact inverse.
    fn transform(&self, x: &mut [T], axis: usize, inverse: bool) {
        let n = self.grid.cells_per_axis();
        let s = self.grid.stride(axis);
        let fft = if inverse { &self.inverse } else { &self.forward };
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; 2 * n];
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        let half = T::lit(0.5);
        let (w0, wk) = (T::one() / T::from_count(n), T::lit(2.0) / T::from_count(n));
        self.lines(axis, |start| {
            if inverse {
                for k in 0..n {
                    let w = if k == 0 { w0 } else { wk };
                    buf[k] = self.twiddle[k].conj() * (x[start + k * s] * w);
                }
                buf[n..].iter_mut().for_each(|b| *b = zero);
            } else {
                for j in 0..n {
                    let v = Complex::new(x[start + j * s], T::zero());
                    buf[j] = v;
                    buf[2 * n - 1 - j] = v;
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                x[start + k * s] = if inverse { buf[k].re } else { (self.twiddle[k] * buf[k]).re * half };
            }
        });
    }

    pub(crate) fn solve(&self, b: &[T], kappa: T) -> Vec<T> {
        let g = self.grid;
        let mut x = b.to_vec();
        for axis in 0..g.dim() {
            self.transform(&mut x, axis, false);
        }
        for (i, v) in x.iter_mut().enumerate() {
            let k = g.unravel(i);
            let lam: T = (0..g.dim()).map(|a| self.eig[k[a]]).sum();
            *v = *v / (T::one() + kappa * lam);
        }
        for axis in 0..g.dim() {
            self.transform(&mut x, axis, true);
        }
        x
    }
}
