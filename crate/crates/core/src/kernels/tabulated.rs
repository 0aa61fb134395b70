use std::path::Path;

use super::{KernelError, Singularity};
use crate::interp::MonotoneCubic;
use crate::scalar::{abs, Real};

/// Radial profile given by samples `(r_i, k_i)`, interpolated monotone-cubically.
///
/// Below the first sample the fitted singular law continues the profile;
/// beyond the last sample `k` continues linearly in `log r`.
#[derive(Debug, Clone)]
pub struct Tabulated<T: Real> {
    curve: MonotoneCubic<T>,
    singularity: Singularity<T>,
}

impl<T: Real> Tabulated<T> {
    pub fn new(r: Vec<T>, k: Vec<T>) -> Result<Self, KernelError> {
        if r.first().is_some_and(|&r0| !(r0 > T::zero())) {
            return Err(KernelError::Parameter("tabulated radii must be positive".into()));
        }
        let curve = MonotoneCubic::new(r, k)?;
        let singularity = fit_singularity(&curve);
        Ok(Self { curve, singularity })
    }

    /// Reads a CSV file with columns `r,k`; a non-numeric first line is a header.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, KernelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| KernelError::Io { path: path.display().to_string(), source })?;
        let cols = crate::columns::read_columns(&text, 2)
            .map_err(|e| KernelError::Parse { line: e.line, msg: e.msg })?;
        Self::new(
            cols[0].iter().map(|&v| T::lit(v)).collect(),
            cols[1].iter().map(|&v| T::lit(v)).collect(),
        )
    }

    pub fn singularity(&self) -> Singularity<T> {
        self.singularity
    }

    pub fn eval(&self, r: T) -> T {
        let (lo, hi) = self.curve.domain();
        if r < lo {
            let k0 = self.curve.eval(lo);
            return match self.singularity {
                Singularity::Logarithmic { c } => k0 - c * (r / lo).ln(),
                Singularity::Power { s } => k0 * (r / lo).powf(-s),
                Singularity::Bounded => k0,
            };
        }
        if r > hi {
            return self.curve.eval(hi) + hi * self.curve.derivative(hi) * (r / hi).ln();
        }
        self.curve.eval(r)
    }

    pub fn derivative(&self, r: T) -> T {
        let (lo, hi) = self.curve.domain();
        if r < lo {
            let k0 = self.curve.eval(lo);
            return match self.singularity {
                Singularity::Logarithmic { c } => -c / r,
                Singularity::Power { s } => -s * k0 * (r / lo).powf(-s) / r,
                Singularity::Bounded => T::zero(),
            };
        }
        if r > hi {
            return hi * self.curve.derivative(hi) / r;
        }
        self.curve.derivative(r)
    }
}

/// Least-squares slope of `log g` against `log r` for `g(r) = -r k'(r)` over
/// sixteen log-spaced radii in `[1e-6, 1e-3]` (shifted up when the table
/// starts later). Flat `g` means logarithmic, decaying `g` a power law.
fn fit_singularity<T: Real>(curve: &MonotoneCubic<T>) -> Singularity<T> {
    let (lo, hi) = curve.domain();
    let a = lo.as_f64().max(1e-6);
    let b = (1e3 * a).max(1e-3).min(hi.as_f64());
    if !(b > a) {
        return Singularity::Bounded;
    }
    let mut pts = Vec::new();
    let scale = abs(curve.eval(lo)).as_f64().max(1.0);
    for i in 0..16 {
        let r = a * (b / a).powf(i as f64 / 15.0);
        let g = -r * curve.derivative(T::lit(r)).as_f64();
        if g <= 1e-12 * scale {
            return Singularity::Bounded;
        }
        pts.push((r.ln(), g.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if slope.abs() < 0.05 {
        Singularity::Logarithmic { c: T::lit(my.exp()) }
    } else if slope < 0.0 {
        Singularity::Power { s: T::lit(-slope) }
    } else {
        Singularity::Bounded
    }
}
