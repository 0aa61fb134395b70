//! Uniform Cartesian grids on the truncated box `[-L, L)^d`, cell-averaged
//! fields on them, and the integral functionals used by every diagnostic.

mod field;
mod functionals;
mod resample;
pub mod snapshot;

pub use field::{face_gradient, ScalarField, VectorField};
pub use functionals::{integrate, lp_norm, second_moment, tail_norm, weak_lp_norm};
pub use resample::{dilate_conservative, dilate_interpolated};

use crate::scalar::Real;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("cells per axis must be a power of two and at least 16, got {0}")]
    CellCount(usize),
    #[error("half width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("field has {got} values, grid needs {expected}")]
    Length { expected: usize, got: usize },
    #[error("Lp exponent must be at least 1, got {0}")]
    Exponent(f64),
    #[error("fields live on different grids")]
    Mismatch,
}

/// Uniform cell-centred grid on `[-L, L)^d` with `n` cells per axis.
///
/// Linear cell indices are row-major with the first axis fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    half_width: T,
    n: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(dim: usize, half_width: T, n: usize) -> Result<Self, GridError> {
        if !(2..=3).contains(&dim) {
            return Err(GridError::Dimension(dim));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(GridError::CellCount(n));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(GridError::HalfWidth(half_width.as_f64()));
        }
        Ok(Self { dim, half_width, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }

    #[inline]
    pub fn cells_per_axis(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> T {
        (self.half_width + self.half_width) / T::from_count(self.n)
    }

    /// Total number of cells, `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^d`.
    #[inline]
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of the `i`-th cell centre along any axis.
    #[inline]
    pub fn center(&self, i: usize) -> T {
        -self.half_width + (T::from_count(i) + T::lit(0.5)) * self.spacing()
    }

    /// Linear-index stride of `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow(axis as u32)
    }

    /// Per-axis indices of linear cell `idx` (unused trailing axes are 0).
    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, if self.dim == 3 { idx / (n * n) } else { 0 }]
    }

    #[inline]
    pub fn ravel(&self, ijk: [usize; 3]) -> usize {
        let n = self.n;
        ijk[0] + n * ijk[1] + n * n * ijk[2]
    }

    /// Cell centre of linear cell `idx` (unused trailing axes are 0).
    #[inline]
    pub fn cell_center(&self, idx: usize) -> [T; 3] {
        let ijk = self.unravel(idx);
        let mut x = [T::zero(); 3];
        for (a, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = self.center(ijk[a]);
        }
        x
    }

    /// Squared distance of the centre of cell `idx` from the origin.
    #[inline]
    pub fn radius_sq(&self, idx: usize) -> T {
        let x = self.cell_center(idx);
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    }

    /// True when cell `idx` lies in the outer ring `max_a |x_a| > (1 - frac) L`.
    pub fn in_outer_ring(&self, idx: usize, frac: T) -> bool {
        let x = self.cell_center(idx);
        let edge = (T::one() - frac) * self.half_width;
        x.iter().take(self.dim).any(|&xa| crate::scalar::abs(xa) > edge)
    }

    /// Same grid refined by `factor` cells per axis.
    pub fn refined(&self, factor: usize) -> Result<Self, GridError> {
        Self::new(self.dim, self.half_width, self.n * factor)
    }
}
