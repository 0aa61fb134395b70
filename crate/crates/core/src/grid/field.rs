use std::ops::{Index, IndexMut};

use super::{GridError, GridSpec};
use crate::scalar::Real;

/// Cell-averaged scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<T>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Length { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self { grid, values: vec![T::zero(); grid.len()] }
    }

    pub fn constant(grid: GridSpec<T>, value: T) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    /// Samples `f` at every cell centre. Unused trailing coordinates are 0.
    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut([T; 3]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.cell_center(i))).collect();
        Self { grid, values }
    }

    /// `M (eps/pi)^{d/2} exp(-eps |x - center|^2)`, a Gaussian of mass `M`.
    pub fn gaussian(grid: GridSpec<T>, mass: T, eps: T, center: [T; 3]) -> Self {
        let d = grid.dim();
        let amp = mass * (eps / T::PI()).powf(T::from_count(d) / T::lit(2.0));
        Self::from_fn(grid, |x| {
            let r2 = (0..d).map(|a| (x[a] - center[a]).powi(2)).fold(T::zero(), |s, v| s + v);
            amp * (-eps * r2).exp()
        })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&mut self, s: T) {
        self.values.iter_mut().for_each(|v| *v = *v * s);
    }

    /// Pointwise product; both fields must share a grid.
    pub fn mul(&self, other: &Self) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::Mismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn add_scaled(&mut self, other: &Self, s: T) -> Result<(), GridError> {
        if self.grid != other.grid {
            return Err(GridError::Mismatch);
        }
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + s * b;
        }
        Ok(())
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= T::zero())
    }
}

impl<T> Index<usize> for ScalarField<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

impl<T> IndexMut<usize> for ScalarField<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.values[i]
    }
}

/// Face-centred vector field.
///
/// Component `a` stores at linear index `i` the value on the face between
/// cell `i` and its upper neighbour along axis `a`. Faces on the upper box
/// boundary are stored (and are zero for fluxes); faces on the lower boundary
/// are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: GridSpec<T>,
    components: Vec<Vec<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self { grid, components: vec![vec![T::zero(); grid.len()]; grid.dim()] }
    }

    pub fn from_components(grid: GridSpec<T>, components: Vec<Vec<T>>) -> Result<Self, GridError> {
        if components.len() != grid.dim() {
            return Err(GridError::Dimension(components.len()));
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(GridError::Length { expected: grid.len(), got: c.len() });
            }
        }
        Ok(Self { grid, components })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn component(&self, axis: usize) -> &[T] {
        &self.components[axis]
    }

    #[inline]
    pub fn component_mut(&mut self, axis: usize) -> &mut [T] {
        &mut self.components[axis]
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// True when face `idx` along `axis` sits on the upper box boundary.
    #[inline]
    pub fn is_boundary_face(&self, axis: usize, idx: usize) -> bool {
        self.grid.unravel(idx)[axis] + 1 == self.grid.cells_per_axis()
    }

    /// `max |v_a|` over all interior faces and components.
    pub fn max_abs(&self) -> T {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, &v| m.max(crate::scalar::abs(v)))
    }

    /// Discrete `L^2` norm `(h^d Σ_faces |v|^2)^{1/2}` over every stored face.
    pub fn l2_norm(&self) -> T {
        let s: T = self.components.iter().flat_map(|c| c.iter()).map(|&v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// Conservative divergence `Σ_a (v_{i+1/2} - v_{i-1/2}) / h` with the
    /// implicit lower boundary face equal to zero.
    pub fn divergence(&self) -> ScalarField<T> {
        let g = self.grid;
        let n = g.cells_per_axis();
        let inv_h = T::one() / g.spacing();
        let mut out = vec![T::zero(); g.len()];
        for (axis, comp) in self.components.iter().enumerate() {
            let stride = g.stride(axis);
            for (i, o) in out.iter_mut().enumerate() {
                let ia = (i / stride) % n;
                let upper = if ia + 1 < n { comp[i] } else { T::zero() };
                let lower = if ia > 0 { comp[i - stride] } else { T::zero() };
                *o = *o + (upper - lower) * inv_h;
            }
        }
        ScalarField { grid: g, values: out }
    }
}

/// Face gradient `(f_{i+1} - f_i) / h`; boundary faces are set to zero.
pub fn face_gradient<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    let g = *f.grid();
    let n = g.cells_per_axis();
    let inv_h = T::one() / g.spacing();
    let v = f.values();
    let components = (0..g.dim())
        .map(|axis| {
            let stride = g.stride(axis);
            (0..g.len())
                .map(|i| {
                    if (i / stride) % n + 1 < n {
                        (v[i + stride] - v[i]) * inv_h
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect();
    VectorField { grid: g, components }
}
