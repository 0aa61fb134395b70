//! Jacobi-preconditioned conjugate gradients for matrix-free symmetric
//! positive definite operators.

use crate::scalar::Real;

#[allow(clippy::len_without_is_empty)]
pub trait SpdOperator<T> {
    fn len(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    fn diagonal(&self) -> Vec<T>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// Final `‖b - A x‖₂ / ‖b‖₂`.
    pub residual: f64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("conjugate gradients stalled after {iterations} iterations; best relative residual {best_residual:e}")]
pub struct CgError {
    pub iterations: usize,
    pub best_residual: f64,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solves `A x = b` starting from the contents of `x`.
pub fn pcg<T: Real>(
    op: &impl SpdOperator<T>,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<CgReport, CgError> {
    let n = op.len();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(CgReport { iterations: 0, residual: 0.0 });
    }
    let inv_diag: Vec<T> = op.diagonal().into_iter().map(|d| d.recip()).collect();
    let mut r = vec![T::zero(); n];
    op.apply(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&a, &b)| a * b).collect();
    let mut p = z.clone();
    let mut q = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut best = f64::INFINITY;
    for it in 0..=max_iter {
        let rel = dot(&r, &r).sqrt() / bnorm;
        best = best.min(rel.as_f64());
        if rel <= tol {
            return Ok(CgReport { iterations: it, residual: rel.as_f64() });
        }
        if it == max_iter {
            break;
        }
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > T::zero()) {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * q[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(CgError { iterations: max_iter, best_residual: best })
}
