use super::{Kernel, KernelError, Profile};
use crate::interp::MonotoneCubic;
use crate::quadrature::{adaptive_gk, tolerance};
use crate::scalar::Real;

/// Number of radial samples of `K^ε` on `[0, 1]`.
const SAMPLES: usize = 513;

/// Radial cutoff `η(ρ) = exp(1 - 1/(1 - (2ρ - 1)_+^2))` for `ρ < 1`, zero beyond.
///
/// Equal to one on `ρ ≤ 1/2`, smooth, positive on `ρ < 1`.
pub fn cutoff<T: Real>(rho: T) -> T {
    if rho >= T::one() {
        return T::zero();
    }
    let t = (T::lit(2.0) * rho - T::one()).max(T::zero());
    let q = T::one() - t * t;
    if q <= T::zero() {
        return T::zero();
    }
    (T::one() - q.recip()).exp()
}

/// Kernel averaged over balls of radius `ε η(x)` inside the unit ball, with the
/// mollifier `η` normalised to unit mass. Equal to the base kernel for `|x| ≥ 1`.
#[derive(Debug, Clone)]
pub struct Mollified<T: Real> {
    base: Kernel<T>,
    epsilon: T,
    curve: MonotoneCubic<T>,
}

impl<T: Real> Mollified<T> {
    pub fn base(&self) -> &Kernel<T> {
        &self.base
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn eval(&self, r: T) -> T {
        if r >= T::one() {
            self.base.eval_unchecked(r)
        } else {
            self.curve.eval(r)
        }
    }

    pub fn derivative(&self, r: T) -> T {
        if r >= T::one() {
            self.base.grad_unchecked(r)
        } else {
            self.curve.derivative(r)
        }
    }
}

impl<T: Real> Kernel<T> {
    /// Builds `K^ε` by adaptive quadrature of ball averages over a radial
    /// sample ladder on `[0, 1]`.
    pub fn mollify(&self, epsilon: T) -> Result<Kernel<T>, KernelError> {
        if !(epsilon > T::zero() && epsilon <= T::lit(0.25)) {
            return Err(KernelError::Epsilon(epsilon.as_f64()));
        }
        let d = self.dim as i32;
        let tol = tolerance::<T>(1e-9);
        let weight = |rho: T| cutoff(rho) * rho.powi(d - 1);
        let norm = adaptive_gk(weight, T::zero(), T::one(), tol, tol)?;
        let mut rs = Vec::with_capacity(SAMPLES);
        let mut ks = Vec::with_capacity(SAMPLES);
        for i in 0..SAMPLES {
            let r = T::from_count(i) / T::from_count(SAMPLES - 1);
            let value = if i == SAMPLES - 1 {
                self.eval_unchecked(T::one())
            } else {
                let sigma = epsilon * cutoff(r);
                let mut failure = None;
                let integrand = |rho: T| {
                    let w = weight(rho);
                    if w == T::zero() {
                        return T::zero();
                    }
                    match self.spherical_mean(r, sigma * rho) {
                        Ok(v) => w * v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            T::zero()
                        }
                    }
                };
                let cell = std::cell::RefCell::new(integrand);
                let v = adaptive_gk(|rho| (cell.borrow_mut())(rho), T::zero(), T::one(), tol, tol)?;
                if let Some(e) = failure {
                    return Err(e);
                }
                v / norm
            };
            rs.push(r);
            ks.push(value);
        }
        let curve = MonotoneCubic::new(rs, ks)?;
        let base = match &self.profile {
            Profile::Mollified(m) => m.base.clone(),
            _ => self.clone(),
        };
        Ok(Kernel { dim: self.dim, profile: Profile::Mollified(Box::new(Mollified { base, epsilon, curve })) })
    }
}
