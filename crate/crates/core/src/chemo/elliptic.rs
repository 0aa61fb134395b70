//! Cell-centred finite-volume discretisation of `-∇·(a ∇c) + γ c = f`.

use super::{ChemoError, Coefficient};
use crate::grid::{GridSpec, ScalarField};
use crate::linalg::{pcg, SpdOperator};
use crate::scalar::Real;

/// Treatment of the box boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `c = 0` on the box faces.
    Dirichlet,
    /// Ghost values follow the free-space decay `c ∝ |x|^{2-d}` (3-D only).
    Decay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticModel {
    dim: usize,
    a: Coefficient,
    gamma: Coefficient,
    boundary: Boundary,
}

impl EllipticModel {
    /// Requires `inf a > 0` and `γ ≥ 0`; in two dimensions `γ` must be
    /// bounded below by a positive constant.
    pub fn new(dim: usize, a: Coefficient, gamma: Coefficient) -> Result<Self, ChemoError> {
        if !(2..=3).contains(&dim) {
            return Err(ChemoError::Rejected(format!("dimension {dim} not supported")));
        }
        if !(a.inf() > 0.0) || !a.sup().is_finite() {
            return Err(ChemoError::Rejected(format!("a = {a} is not bounded below by a positive constant")));
        }
        if !(gamma.inf() >= 0.0) || !gamma.sup().is_finite() {
            return Err(ChemoError::Rejected(format!("gamma = {gamma} takes negative values")));
        }
        if dim == 2 && gamma.inf() == 0.0 {
            return Err(ChemoError::Rejected(
                "gamma must be bounded below by a positive constant in two dimensions".into(),
            ));
        }
        let boundary = if gamma.inf() == 0.0 { Boundary::Decay } else { Boundary::Dirichlet };
        Ok(Self { dim, a, gamma, boundary })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<Self, ChemoError> {
        if boundary == Boundary::Decay && self.dim != 3 {
            return Err(ChemoError::Rejected("decay boundary needs d = 3".into()));
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> Coefficient {
        self.a
    }

    pub fn gamma(&self) -> Coefficient {
        self.gamma
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
}

/// Matrix-free operator. Face diffusivities are sampled at face centres.
#[derive(Debug, Clone)]
pub struct EllipticOperator<T> {
    grid: GridSpec<T>,
    /// `a` on the upper face of each cell, per axis (boundary face included).
    upper: Vec<Vec<T>>,
    /// Boundary contribution to the diagonal, already divided by `h^2`.
    boundary_diag: Vec<T>,
    gamma: Vec<T>,
    inv_h2: T,
}

impl<T: Real> EllipticOperator<T> {
    pub fn new(model: &EllipticModel, grid: GridSpec<T>) -> Result<Self, ChemoError> {
        if grid.dim() != model.dim {
            return Err(ChemoError::Precondition("model and grid dimensions differ".into()));
        }
        let d = grid.dim();
        let n = grid.cells_per_axis();
        let h = grid.spacing();
        let half = h / T::lit(2.0);
        let inv_h2 = (h * h).recip();
        let shifted = |x: [T; 3], axis: usize, by: T| {
            let mut y = x;
            y[axis] = y[axis] + by;
            y
        };
        let upper: Vec<Vec<T>> = (0..d)
            .map(|axis| {
                (0..grid.len())
                    .map(|i| model.a.eval(shifted(grid.cell_center(i), axis, half)))
                    .collect()
            })
            .collect();
        let mut boundary_diag = vec![T::zero(); grid.len()];
        for (i, bd) in boundary_diag.iter_mut().enumerate() {
            let ijk = grid.unravel(i);
            let x = grid.cell_center(i);
            #[allow(clippy::needless_range_loop)]
            for axis in 0..d {
                for (at_edge, sign) in [(ijk[axis] == 0, -T::one()), (ijk[axis] + 1 == n, T::one())] {
                    if !at_edge {
                        continue;
                    }
                    let af = model.a.eval(shifted(x, axis, sign * half));
                    let weight = match model.boundary {
                        Boundary::Dirichlet => T::lit(2.0),
                        Boundary::Decay => {
                            let ghost = shifted(x, axis, sign * h);
                            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                            let rg = (ghost[0] * ghost[0] + ghost[1] * ghost[1] + ghost[2] * ghost[2]).sqrt();
                            T::one() - (r / rg).powi(d as i32 - 2)
                        }
                    };
                    *bd = *bd + weight * af * inv_h2;
                }
            }
        }
        let gamma = (0..grid.len()).map(|i| model.gamma.eval(grid.cell_center(i))).collect();
        Ok(Self { grid, upper, boundary_diag, gamma, inv_h2 })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }
}

impl<T: Real> SpdOperator<T> for EllipticOperator<T> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.grid.cells_per_axis();
        for i in 0..x.len() {
            y[i] = (self.gamma[i] + self.boundary_diag[i]) * x[i];
        }
        for (axis, up) in self.upper.iter().enumerate() {
            let stride = self.grid.stride(axis);
            for i in 0..x.len() {
                if (i / stride) % n + 1 < n {
                    let flux = up[i] * (x[i] - x[i + stride]) * self.inv_h2;
                    y[i] = y[i] + flux;
                    y[i + stride] = y[i + stride] - flux;
                }
            }
        }
    }

    fn diagonal(&self) -> Vec<T> {
        let n = self.grid.cells_per_axis();
        let mut diag: Vec<T> = self.gamma.iter().zip(&self.boundary_diag).map(|(&g, &b)| g + b).collect();
        for (axis, up) in self.upper.iter().enumerate() {
            let stride = self.grid.stride(axis);
            for i in 0..diag.len() {
                if (i / stride) % n + 1 < n {
                    let w = up[i] * self.inv_h2;
                    diag[i] = diag[i] + w;
                    diag[i + stride] = diag[i + stride] + w;
                }
            }
        }
        diag
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticSolveReport {
    pub iterations: usize,
    /// Relative residual `‖f - A c‖₂ / ‖f‖₂` reached.
    pub residual: f64,
    /// Tolerance that was requested.
    pub tolerance: f64,
}

fn check_tolerance(tol: f64) -> Result<(), ChemoError> {
    if tol > 1e-14 && tol < 1e-2 {
        Ok(())
    } else {
        Err(ChemoError::Tolerance(tol))
    }
}

fn max_iterations<T: Real>(grid: &GridSpec<T>) -> usize {
    (50 * grid.cells_per_axis() * grid.dim()).max(1000)
}

/// One-shot solve.
pub fn solve_elliptic<T: Real>(
    model: &EllipticModel,
    f: &ScalarField<T>,
    tol: f64,
) -> Result<(ScalarField<T>, EllipticSolveReport), ChemoError> {
    EllipticSolver::new(model, *f.grid(), T::lit(tol))?.solve(f)
}

/// Reusable solver; successive solves are warm-started from the previous
/// solution.
#[derive(Debug, Clone)]
pub struct EllipticSolver<T> {
    op: EllipticOperator<T>,
    last: Vec<T>,
    tol: T,
}

impl<T: Real> EllipticSolver<T> {
    pub fn new(model: &EllipticModel, grid: GridSpec<T>, tol: T) -> Result<Self, ChemoError> {
        check_tolerance(tol.as_f64())?;
        let op = EllipticOperator::new(model, grid)?;
        Ok(Self { last: vec![T::zero(); grid.len()], op, tol })
    }

    pub fn operator(&self) -> &EllipticOperator<T> {
        &self.op
    }

    pub fn solve(&mut self, f: &ScalarField<T>) -> Result<(ScalarField<T>, EllipticSolveReport), ChemoError> {
        if f.grid() != self.op.grid() {
            return Err(ChemoError::Precondition("right-hand side lives on a different grid".into()));
        }
        let report = pcg(&self.op, f.values(), &mut self.last, self.tol, max_iterations(self.op.grid()))?;
        let c = ScalarField::new(*f.grid(), self.last.clone())?;
        Ok((c, EllipticSolveReport { iterations: report.iterations, residual: report.residual, tolerance: self.tol.as_f64() }))
    }
}
