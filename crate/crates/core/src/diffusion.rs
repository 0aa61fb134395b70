//! Diffusion functions `A`, their parabolic regularisation, the entropy
//! density `Φ` and the criticality classification against a kernel.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::interp::{InterpError, MonotoneCubic};
use crate::kernels::{Kernel, Singularity};
use crate::quadrature::{adaptive_simpson, QuadratureError};
use crate::scalar::{abs, Real};

#[derive(Debug, thiserror::Error)]
pub enum DiffusionError {
    #[error("porous medium exponent must exceed 1, got {0}")]
    Exponent(f64),
    #[error("scale factor must be positive, got {0}")]
    Scale(f64),
    #[error("regularisation parameter must be positive, got {0}")]
    Epsilon(f64),
    #[error("diffusion table: {0}")]
    Table(#[from] InterpError),
    #[error("diffusion table: {0}")]
    Invalid(String),
    #[error("diffusion table {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("diffusion table line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("entropy quadrature failed (A'(s)/s must be integrable against the construction near 0): {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("criticality ratio oscillates (tail slopes {0:.3}, {1:.3}); classification indeterminate")]
    Indeterminate(f64, f64),
    #[error("no finite critical mass: {0}")]
    NoCriticalMass(String),
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied `A` and `A'`.
#[derive(Clone)]
pub struct Custom<T> {
    label: String,
    a: ScalarFn<T>,
    a_prime: ScalarFn<T>,
}

impl<T> fmt::Debug for Custom<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Custom").field("label", &self.label).finish()
    }
}

impl<T: Real> Custom<T> {
    pub fn from_fns(
        label: impl Into<String>,
        a: impl Fn(T) -> T + Send + Sync + 'static,
        a_prime: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), a: Arc::new(a), a_prime: Arc::new(a_prime) }
    }

    /// Monotone-cubic interpolation of samples `(z, A, A')`. Below the first
    /// sample `A` is continued linearly to `A(0) = 0`; beyond the last, along
    /// the final tangent.
    pub fn from_table(z: Vec<T>, a: Vec<T>, a_prime: Vec<T>) -> Result<Self, DiffusionError> {
        if z.first().is_some_and(|&z0| z0 < T::zero()) {
            return Err(DiffusionError::Invalid("z must be nonnegative".into()));
        }
        if let Some(bad) = a_prime.iter().find(|&&v| !(v > T::zero())) {
            return Err(DiffusionError::Invalid(format!("A' must be positive, found {bad}")));
        }
        let a_curve = Arc::new(MonotoneCubic::new(z.clone(), a)?);
        let ap_curve = Arc::new(MonotoneCubic::new(z, a_prime)?);
        let (lo, hi) = a_curve.domain();
        let (ac, apc) = (a_curve.clone(), ap_curve.clone());
        let a_fn = move |s: T| {
            if s < lo {
                if lo == T::zero() { T::zero() } else { ac.eval(lo) * s / lo }
            } else if s > hi {
                ac.eval(hi) + apc.eval(hi) * (s - hi)
            } else {
                ac.eval(s)
            }
        };
        let ap_fn = move |s: T| ap_curve.eval(s);
        Ok(Self::from_fns("table", a_fn, ap_fn))
    }

    /// Reads CSV columns `z,A,Aprime`.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, DiffusionError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| DiffusionError::Io { path: path.display().to_string(), source })?;
        let cols = crate::columns::read_columns(&text, 3)
            .map_err(|e| DiffusionError::Parse { line: e.line, msg: e.msg })?;
        let conv = |c: &Vec<f64>| c.iter().map(|&v| T::lit(v)).collect::<Vec<T>>();
        let mut custom = Self::from_table(conv(&cols[0]), conv(&cols[1]), conv(&cols[2]))?;
        custom.label = path.display().to_string();
        Ok(custom)
    }
}

#[derive(Debug, Clone)]
pub enum Law<T> {
    /// `A(z) = z`.
    Linear,
    /// `A(z) = z^m`, `m > 1`.
    PorousMedium { m: T },
    Custom(Custom<T>),
}

/// `A(z) = scale · A_law(z) + shift · z`.
#[derive(Debug, Clone)]
pub struct DiffusionModel<T> {
    law: Law<T>,
    scale: T,
    shift: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Subcritical => "subcritical",
            Self::Critical => "critical",
            Self::Supercritical => "supercritical",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification<T> {
    pub label: Criticality,
    /// Smallest ratio over the last three ladder points.
    pub liminf_estimate: T,
    /// Least-squares slope of `log ρ` against `log z` over those points.
    pub tail_slope: T,
    /// `(z, ρ(z))` for `z = 10^2 .. 10^8`.
    pub samples: Vec<(T, T)>,
}

/// Sampled checks of the admissibility conditions on `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility<T> {
    pub vanishes_at_zero: bool,
    pub positive_slope: bool,
    /// `(c, z_c)`: `A'(z) ≥ c` on the ladder `z ∈ {z_c, 10 z_c, ..., 10^8}`.
    pub lower_bound: (T, T),
    /// `sup A'` on `z ∈ {10^-12, ..., 1}`.
    pub small_z_bound: T,
}

impl<T: Real> DiffusionModel<T> {
    pub fn linear() -> Self {
        Self { law: Law::Linear, scale: T::one(), shift: T::zero() }
    }

    pub fn porous_medium(m: T) -> Result<Self, DiffusionError> {
        if !(m > T::one()) || !m.is_finite() {
            return Err(DiffusionError::Exponent(m.as_f64()));
        }
        Ok(Self { law: Law::PorousMedium { m }, scale: T::one(), shift: T::zero() })
    }

    pub fn custom(custom: Custom<T>) -> Self {
        Self { law: Law::Custom(custom), scale: T::one(), shift: T::zero() }
    }

    /// Multiplies `A` by `c > 0`.
    pub fn scaled(mut self, c: T) -> Result<Self, DiffusionError> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(DiffusionError::Scale(c.as_f64()));
        }
        self.scale = self.scale * c;
        self.shift = self.shift * c;
        Ok(self)
    }

    pub fn law(&self) -> &Law<T> {
        &self.law
    }

    /// Linear part added by regularisation.
    pub fn shift(&self) -> T {
        self.shift
    }

    pub fn a(&self, z: T) -> T {
        let base = match &self.law {
            Law::Linear => z,
            Law::PorousMedium { m } => {
                if z > T::zero() { z.powf(*m) } else { T::zero() }
            }
            Law::Custom(c) => (c.a)(z),
        };
        self.scale * base + self.shift * z
    }

    pub fn a_prime(&self, z: T) -> T {
        let base = match &self.law {
            Law::Linear => T::one(),
            Law::PorousMedium { m } => {
                if z > T::zero() { *m * z.powf(*m - T::one()) } else { T::zero() }
            }
            Law::Custom(c) => (c.a_prime)(z),
        };
        self.scale * base + self.shift
    }

    /// `A'` when it does not depend on `z`.
    pub fn constant_slope(&self) -> Option<T> {
        match self.law {
            Law::Linear => Some(self.scale + self.shift),
            _ => None,
        }
    }

    /// Chord slope `(A(b) - A(a)) / (b - a)`, falling back to `A'` at the
    /// midpoint when the two arguments (nearly) coincide.
    pub fn secant_slope(&self, a: T, b: T) -> T {
        if let Some(c) = self.constant_slope() {
            return c;
        }
        let gap = abs(b - a);
        if gap <= T::lit(1e-9) * (abs(a) + abs(b)) || gap == T::zero() {
            return self.a_prime((a + b) / T::lit(2.0));
        }
        (self.a(b) - self.a(a)) / (b - a)
    }

    /// `A^ε(z) = A(z) + (3/2) ε z`, the midpoint of the admissible band
    /// `A' + ε ≤ (A^ε)' ≤ A' + 2ε`.
    pub fn regularize(&self, epsilon: T) -> Result<Self, DiffusionError> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(DiffusionError::Epsilon(epsilon.as_f64()));
        }
        let mut out = self.clone();
        out.shift = out.shift + T::lit(1.5) * epsilon;
        Ok(out)
    }

    pub fn admissibility(&self) -> Admissibility<T> {
        let ten = T::lit(10.0);
        let big: Vec<T> = (0..=8).map(|k| ten.powi(k)).collect();
        let small: Vec<T> = (0..=12).map(|k| ten.powi(-k)).collect();
        let positive_slope = big.iter().chain(&small).all(|&z| self.a_prime(z) > T::zero());
        let c = big.iter().map(|&z| self.a_prime(z)).fold(T::infinity(), T::min);
        let c_a = small.iter().map(|&z| self.a_prime(z)).fold(T::zero(), T::max);
        Admissibility {
            vanishes_at_zero: self.a(T::zero()) == T::zero(),
            positive_slope,
            lower_bound: (c, T::one()),
            small_z_bound: c_a,
        }
    }

    pub fn entropy_density(&self) -> Result<EntropyDensity<T>, DiffusionError> {
        let table = match &self.law {
            Law::Custom(_) => Some(HTable::build(self)?),
            _ => None,
        };
        Ok(EntropyDensity { model: self.clone(), table })
    }

    /// Classifies the pair `(A, K)` from `ρ(z) = A'(z) / z^{m*-1}` on
    /// `z = 10^2, ..., 10^8`.
    pub fn classify(&self, kernel: &Kernel<T>) -> Result<Classification<T>, DiffusionError> {
        let m_star = kernel.critical_exponent().m_star;
        let samples: Vec<(T, T)> = (2..=8)
            .map(|k| {
                let z = T::lit(10f64.powi(k));
                (z, self.a_prime(z) / z.powf(m_star - T::one()))
            })
            .collect();
        let tail = &samples[samples.len() - 3..];
        let logs: Vec<(f64, f64)> = tail.iter().map(|(z, r)| (z.as_f64().ln(), r.as_f64().ln())).collect();
        let s1 = (logs[1].1 - logs[0].1) / (logs[1].0 - logs[0].0);
        let s2 = (logs[2].1 - logs[1].1) / (logs[2].0 - logs[1].0);
        if (s1 > 0.05 && s2 < -0.05) || (s1 < -0.05 && s2 > 0.05) {
            return Err(DiffusionError::Indeterminate(s1, s2));
        }
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / 3.0;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / 3.0;
        let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let label = if slope > 0.05 {
            Criticality::Subcritical
        } else if slope < -0.05 {
            Criticality::Supercritical
        } else {
            Criticality::Critical
        };
        let liminf = tail.iter().map(|p| p.1).fold(T::infinity(), T::min);
        Ok(Classification { label, liminf_estimate: liminf, tail_slope: T::lit(slope), samples })
    }

    /// `M_c` from `lim Φ(z)/(z log z) = (c / 2d) M_c` for kernels with a
    /// logarithmic singularity of strength `c`.
    pub fn critical_mass(&self, kernel: &Kernel<T>) -> Result<T, DiffusionError> {
        let c = match kernel.singularity() {
            Singularity::Logarithmic { c } => c,
            other => {
                return Err(DiffusionError::NoCriticalMass(format!(
                    "kernel singularity {other:?} is not logarithmic (m* != 1); \
                     use the small-data regime instead"
                )))
            }
        };
        let class = self.classify(kernel)?;
        if class.label != Criticality::Critical {
            return Err(DiffusionError::NoCriticalMass(format!(
                "pair is {}; Φ(z)/(z log z) does not converge to a positive limit",
                class.label
            )));
        }
        // By l'Hôpital the limit equals lim A'(z).
        let limit = self.constant_slope().unwrap_or(class.samples.last().expect("ladder").1);
        let d = T::from_count(kernel.dim());
        Ok(T::lit(2.0) * d * limit / c)
    }
}

/// Cumulative table of `H(w) = h(e^w) = ∫_0^w A'(e^v) dv` on a uniform grid in
/// `w`, evaluated by cubic Hermite interpolation with the exact slopes `A'(e^w)`.
#[derive(Debug, Clone)]
struct HTable<T: Real> {
    w0: T,
    dw: T,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> HTable<T> {
    const BELOW: usize = 2400;
    const ABOVE: usize = 1600;

    fn build(model: &DiffusionModel<T>) -> Result<Self, DiffusionError> {
        let dw = T::lit(std::f64::consts::LN_10 / 200.0);
        let f = |w: T| model.a_prime(w.exp());
        let tol = crate::quadrature::tolerance::<T>(1e-13);
        let mut up = vec![T::zero()];
        for i in 0..Self::ABOVE {
            let a = T::from_count(i) * dw;
            let seg = adaptive_simpson(f, a, a + dw, tol)?;
            up.push(*up.last().expect("nonempty") + seg);
        }
        let mut down = vec![T::zero()];
        for i in 0..Self::BELOW {
            let b = -T::from_count(i) * dw;
            let seg = adaptive_simpson(f, b - dw, b, tol)?;
            down.push(*down.last().expect("nonempty") - seg);
        }
        let w0 = -T::from_count(Self::BELOW) * dw;
        let values: Vec<T> = down.into_iter().rev().chain(up.into_iter().skip(1)).collect();
        let slopes = (0..values.len()).map(|i| f(w0 + T::from_count(i) * dw)).collect();
        Ok(Self { w0, dw, values, slopes })
    }

    fn eval(&self, w: T) -> T {
        let last = self.values.len() - 1;
        let pos = (w - self.w0) / self.dw;
        if pos <= T::zero() {
            return self.values[0] + self.slopes[0] * (w - self.w0);
        }
        if pos >= T::from_count(last) {
            let w_hi = self.w0 + T::from_count(last) * self.dw;
            return self.values[last] + self.slopes[last] * (w - w_hi);
        }
        let i = pos.floor().to_usize().expect("in range").min(last - 1);
        let s = pos - T::from_count(i);
        let (s2, s3) = (s * s, s * s * s);
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.values[i]
            + h10 * self.dw * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.dw * self.slopes[i + 1]
    }
}

/// Convex `Φ` with `Φ'' = A'(z)/z`, `Φ'(1) = 0`, `Φ(0) = 0`.
#[derive(Debug, Clone)]
pub struct EntropyDensity<T: Real> {
    model: DiffusionModel<T>,
    table: Option<HTable<T>>,
}

impl<T: Real> EntropyDensity<T> {
    pub fn model(&self) -> &DiffusionModel<T> {
        &self.model
    }

    /// `h(z) = Φ'(z) = ∫_1^z A'(s)/s ds`.
    pub fn h(&self, z: T) -> T {
        let m = &self.model;
        let shift = m.shift * z.ln();
        match (&m.law, &self.table) {
            (Law::Linear, _) => m.scale * z.ln() + shift,
            (Law::PorousMedium { m: p }, _) => {
                m.scale * *p * (z.powf(*p - T::one()) - T::one()) / (*p - T::one()) + shift
            }
            (Law::Custom(_), Some(t)) => t.eval(z.ln()),
            (Law::Custom(_), None) => unreachable!("custom entropy is always tabulated"),
        }
    }

    /// `h(z)` by direct adaptive quadrature, independent of the table.
    pub fn h_quadrature(&self, z: T) -> Result<T, DiffusionError> {
        let tol = crate::quadrature::tolerance::<T>(1e-10);
        let f = |w: T| self.model.a_prime(w.exp());
        Ok(adaptive_simpson(f, T::zero(), z.ln(), tol)?)
    }

    pub fn phi(&self, z: T) -> T {
        if z <= T::zero() {
            return T::zero();
        }
        let m = &self.model;
        let xlogx = z * z.ln() - z;
        match &m.law {
            Law::Linear => (m.scale + m.shift) * xlogx,
            Law::PorousMedium { m: p } => {
                m.scale * (z.powf(*p) - *p * z) / (*p - T::one()) + m.shift * xlogx
            }
            // Integration by parts: ∫_0^z h = z h(z) - A(z).
            Law::Custom(_) => z * self.h(z) - m.a(z),
        }
    }

    pub fn phi_second(&self, z: T) -> T {
        self.model.a_prime(z) / z
    }
}

/// Diffusion choice as written in configuration files:
/// `linear | pme:m=<real> | custom:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionSpec {
    Linear,
    Pme { m: f64 },
    Custom { path: String },
}

impl FromStr for DiffusionSpec {
    type Err = DiffusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "linear" {
            return Ok(Self::Linear);
        }
        if let Some(rest) = s.strip_prefix("pme:") {
            let v = rest
                .trim()
                .strip_prefix("m=")
                .ok_or_else(|| DiffusionError::Invalid(format!("expected pme:m=<real>, got {s:?}")))?;
            let m: f64 = v.trim().parse().map_err(|_| DiffusionError::Invalid(format!("bad exponent {v:?}")))?;
            return Ok(Self::Pme { m });
        }
        if let Some(rest) = s.strip_prefix("custom:") {
            return Ok(Self::Custom { path: rest.trim().to_string() });
        }
        Err(DiffusionError::Invalid(format!("unknown diffusion {s:?}")))
    }
}

impl fmt::Display for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => write!(f, "linear"),
            Self::Pme { m } => write!(f, "pme:m={m:?}"),
            Self::Custom { path } => write!(f, "custom:{path}"),
        }
    }
}

impl DiffusionSpec {
    pub fn build<T: Real>(&self) -> Result<DiffusionModel<T>, DiffusionError> {
        match self {
            Self::Linear => Ok(DiffusionModel::linear()),
            Self::Pme { m } => DiffusionModel::porous_medium(T::lit(*m)),
            Self::Custom { path } => Ok(DiffusionModel::custom(Custom::from_csv_path(path)?)),
        }
    }
}
