//! Chemoattractant solvers: free-space convolution `c = K * u` and the
//! variable-coefficient elliptic problem `-∇·(a ∇c) + γ c = u`.

mod coefficient;
mod elliptic;
mod verify;

pub use coefficient::Coefficient;
pub use elliptic::{solve_elliptic, Boundary, EllipticModel, EllipticOperator, EllipticSolveReport, EllipticSolver};
pub use verify::{
    homog_grad_probe, random_mixture, verify_h1_stability, verify_lp_estimate, TrialRow, VerifyReport,
};

use crate::fft::ConvolutionPlan;
use crate::grid::{face_gradient, GridError, GridSpec, ScalarField, VectorField};
use crate::kernels::{convolution_plan, Kernel, KernelError};
use crate::linalg::CgError;
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum ChemoError {
    #[error("coefficient: {0}")]
    Coefficient(String),
    #[error("elliptic model rejected: {0}")]
    Rejected(String),
    #[error("solver tolerance must lie in (1e-14, 1e-2), got {0}")]
    Tolerance(f64),
    #[error(transparent)]
    Solve(#[from] CgError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Rule producing the chemoattractant from the density.
#[derive(Debug, Clone)]
pub enum ChemoModel<T: Real> {
    Convolution(Kernel<T>),
    Elliptic(EllipticModel),
}

/// `c = K * u` via the doubled-domain transform (one-shot; build a
/// [`ConvolutionPlan`] for repeated use).
pub fn convolve_potential<T: Real>(kernel: &Kernel<T>, u: &ScalarField<T>) -> Result<ScalarField<T>, ChemoError> {
    Ok(convolution_plan(kernel, u.grid())?.apply(u))
}

/// Face-centred gradient of the potential, staggered like the transport fluxes.
pub fn grad_potential<T: Real>(c: &ScalarField<T>) -> VectorField<T> {
    face_gradient(c)
}

enum Backend<T: Real> {
    Zero,
    Convolution(ConvolutionPlan<T>),
    Elliptic(Box<EllipticSolver<T>>),
}

/// Reusable per-grid chemoattractant solver.
pub struct ChemoSolver<T: Real> {
    grid: GridSpec<T>,
    backend: Backend<T>,
}

impl<T: Real> ChemoSolver<T> {
    pub fn new(model: &ChemoModel<T>, grid: GridSpec<T>, tol: T) -> Result<Self, ChemoError> {
        let backend = match model {
            ChemoModel::Convolution(k) if k.is_zero() => Backend::Zero,
            ChemoModel::Convolution(k) => {
                if k.dim() != grid.dim() {
                    return Err(ChemoError::Precondition("kernel and grid dimensions differ".into()));
                }
                Backend::Convolution(convolution_plan(k, &grid)?)
            }
            ChemoModel::Elliptic(m) => Backend::Elliptic(Box::new(EllipticSolver::new(m, grid, tol)?)),
        };
        Ok(Self { grid, backend })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// True when the potential vanishes identically.
    pub fn is_trivial(&self) -> bool {
        matches!(self.backend, Backend::Zero)
    }

    pub fn potential(&mut self, u: &ScalarField<T>) -> Result<ScalarField<T>, ChemoError> {
        match &mut self.backend {
            Backend::Zero => Ok(ScalarField::zeros(self.grid)),
            Backend::Convolution(plan) => Ok(plan.apply(u)),
            Backend::Elliptic(s) => Ok(s.solve(u)?.0),
        }
    }
}

#[cfg(test)]
mod tests;
