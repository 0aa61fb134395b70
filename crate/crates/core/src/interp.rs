//! Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slopes).

use crate::scalar::{abs, Real};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("need at least two samples, got {0}")]
    TooFew(usize),
    #[error("abscissae must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("abscissa and ordinate lengths differ")]
    Length,
}

// Shape-preserving three-point end slope.
fn end_slope<T: Real>(h0: T, h1: T, d0: T, d1: T) -> T {
    let m = ((h0 + h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= T::zero() {
        T::zero()
    } else if d0 * d1 < T::zero() && abs(m) > abs(T::lit(3.0) * d0) {
        T::lit(3.0) * d0
    } else {
        m
    }
}

#[derive(Debug, Clone)]
pub struct MonotoneCubic<T: Real> {
    x: Vec<T>,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self, InterpError> {
        if x.len() != y.len() {
            return Err(InterpError::Length);
        }
        let n = x.len();
        if n < 2 {
            return Err(InterpError::TooFew(n));
        }
        if let Some(i) = (1..n).find(|&i| x[i] <= x[i - 1]) {
            return Err(InterpError::NotIncreasing(i));
        }
        let delta: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![T::zero(); n];
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            let h = |i: usize| x[i + 1] - x[i];
            m[0] = end_slope(h(0), h(1), delta[0], delta[1]);
            m[n - 1] = end_slope(h(n - 2), h(n - 3), delta[n - 2], delta[n - 3]);
        }
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= T::zero() {
                T::zero()
            } else {
                (delta[i - 1] + delta[i]) / T::lit(2.0)
            };
        }
        for i in 0..n - 1 {
            if delta[i] == T::zero() {
                m[i] = T::zero();
                m[i + 1] = T::zero();
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let r = a * a + b * b;
            if r > T::lit(9.0) {
                let t = T::lit(3.0) / r.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        Ok(Self { x, y, m })
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn segment(&self, t: T) -> usize {
        let k = self.x.partition_point(|&xi| xi <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    /// Value at `t`; clamps to the end values outside the sampled range.
    pub fn eval(&self, t: T) -> T {
        let (lo, hi) = self.domain();
        if t <= lo {
            return self.y[0];
        }
        if t >= hi {
            return *self.y.last().unwrap();
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }

    /// Derivative at `t`; zero outside the sampled range.
    pub fn derivative(&self, t: T) -> T {
        let (lo, hi) = self.domain();
        if t < lo || t > hi {
            return T::zero();
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let six = T::lit(6.0);
        let d00 = six * s2 - six * s;
        let d10 = T::lit(3.0) * s2 - T::lit(4.0) * s + T::one();
        let d01 = -d00;
        let d11 = T::lit(3.0) * s2 - T::lit(2.0) * s;
        (d00 * self.y[i] + d01 * self.y[i + 1]) / h + d10 * self.m[i] + d11 * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_linear_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let c = MonotoneCubic::new(x, y).unwrap();
        for t in [0.1, 0.77, 1.5, 2.6] {
            assert!((c.eval(t) - (2.0 * t - 1.0)).abs() < 1e-14);
            assert!((c.derivative(t) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(MonotoneCubic::new(vec![0.0], vec![1.0]).unwrap_err(), InterpError::TooFew(1));
        assert_eq!(
            MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap_err(),
            InterpError::NotIncreasing(1)
        );
    }

    proptest! {
        #[test]
        fn preserves_monotonicity(steps in prop::collection::vec(0.0f64..5.0, 3..20),
                                  t in 0.0f64..1.0) {
            let n = steps.len();
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let mut acc = 0.0;
            let y: Vec<f64> = steps.iter().map(|s| { acc += s; acc }).collect();
            let c = MonotoneCubic::new(x, y).unwrap();
            let a = t * (n - 1) as f64;
            let b = (a + 0.01).min((n - 1) as f64);
            prop_assert!(c.eval(b) >= c.eval(a) - 1e-12);
        }
    }
}
