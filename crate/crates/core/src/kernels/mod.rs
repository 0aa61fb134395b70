//! Radial interaction kernels, their singularity class, the mollified
//! variant `K^ε`, and doubled-domain convolution tables.

mod mollify;
mod table;
mod tabulated;

pub use mollify::{cutoff, Mollified};
pub use table::{cell_average, convolution_plan, radial_table, sample_on_grid};
pub use tabulated::Tabulated;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::interp::InterpError;
use crate::quadrature::QuadratureError;
use crate::scalar::{abs, Real};

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("kernel is singular at the origin; radius must be positive, got {0}")]
    Radius(f64),
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("invalid kernel parameter: {0}")]
    Parameter(String),
    #[error("mollification width must lie in (0, 1/4], got {0}")]
    Epsilon(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("kernel table: {0}")]
    Table(#[from] InterpError),
    #[error("kernel table {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("kernel table line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Behaviour of `k(r)` as `r → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Singularity<T> {
    /// `k(r) ≈ -c log r`.
    Logarithmic { c: T },
    /// `k(r) ≈ C r^{-s}` with `s > 0`.
    Power { s: T },
    Bounded,
}

#[derive(Debug, Clone)]
pub enum Profile<T: Real> {
    /// Attractive Newtonian potential: `-(1/2π) log r` in 2D, `1/(4π r)` in 3D.
    Newtonian,
    /// `-c log r`.
    Logarithmic { c: T },
    /// `r^{-s}`.
    PowerLaw { s: T },
    Tabulated(Tabulated<T>),
    Mollified(Box<Mollified<T>>),
}

/// Radially symmetric kernel `K(x) = k(|x|)` in dimension `d`.
#[derive(Debug, Clone)]
pub struct Kernel<T: Real> {
    dim: usize,
    profile: Profile<T>,
}

/// Result of [`Kernel::critical_exponent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalExponent<T> {
    pub m_star: T,
    /// `p` with `s = d/p`; `None` encodes `p = ∞` (logarithmic or bounded).
    pub p: Option<T>,
    pub singularity: Singularity<T>,
    /// The kernel has no singularity at all.
    pub bounded: bool,
    /// The fitted exponent exceeded `d - 2` and `m*` was clamped.
    pub clamped: bool,
}

/// Outcome of the sampled admissibility audit.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelAudit {
    /// First ladder radius where `k'(r) > 0`, if any.
    pub increasing_at: Option<f64>,
    /// `sup_{r ≤ 1} |k''(r)| r^{d+1}` over the ladder.
    pub second_derivative_constant: f64,
}

impl KernelAudit {
    pub fn monotone(&self) -> bool {
        self.increasing_at.is_none()
    }
}

fn check_dim(dim: usize) -> Result<(), KernelError> {
    if (2..=3).contains(&dim) {
        Ok(())
    } else {
        Err(KernelError::Dimension(dim))
    }
}

impl<T: Real> Kernel<T> {
    pub fn newtonian(dim: usize) -> Result<Self, KernelError> {
        check_dim(dim)?;
        Ok(Self { dim, profile: Profile::Newtonian })
    }

    pub fn logarithmic(dim: usize, c: T) -> Result<Self, KernelError> {
        check_dim(dim)?;
        if !(c >= T::zero()) || !c.is_finite() {
            return Err(KernelError::Parameter(format!("log strength must be >= 0, got {c}")));
        }
        Ok(Self { dim, profile: Profile::Logarithmic { c } })
    }

    pub fn power_law(dim: usize, s: T) -> Result<Self, KernelError> {
        check_dim(dim)?;
        if !(s > T::zero()) || s >= T::from_count(dim) {
            return Err(KernelError::Parameter(format!("power exponent must lie in (0, d), got {s}")));
        }
        Ok(Self { dim, profile: Profile::PowerLaw { s } })
    }

    pub fn tabulated(dim: usize, table: Tabulated<T>) -> Result<Self, KernelError> {
        check_dim(dim)?;
        Ok(Self { dim, profile: Profile::Tabulated(table) })
    }

    /// Kernel identically zero (no interaction).
    pub fn zero(dim: usize) -> Result<Self, KernelError> {
        Self::logarithmic(dim, T::zero())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &Profile<T> {
        &self.profile
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, Profile::Logarithmic { c } if c == T::zero())
    }

    fn newton_const(&self) -> T {
        if self.dim == 2 {
            T::lit(1.0 / (2.0 * PI))
        } else {
            T::lit(1.0 / (4.0 * PI))
        }
    }

    pub fn singularity(&self) -> Singularity<T> {
        match &self.profile {
            Profile::Newtonian if self.dim == 2 => Singularity::Logarithmic { c: self.newton_const() },
            Profile::Newtonian => Singularity::Power { s: T::from_count(self.dim - 2) },
            Profile::Logarithmic { c } if *c == T::zero() => Singularity::Bounded,
            Profile::Logarithmic { c } => Singularity::Logarithmic { c: *c },
            Profile::PowerLaw { s } => Singularity::Power { s: *s },
            Profile::Tabulated(t) => t.singularity(),
            Profile::Mollified(_) => Singularity::Bounded,
        }
    }

    fn check_radius(&self, r: T) -> Result<(), KernelError> {
        if r > T::zero() || (r == T::zero() && self.singularity() == Singularity::Bounded) {
            Ok(())
        } else {
            Err(KernelError::Radius(r.as_f64()))
        }
    }

    /// `k(r)`.
    pub fn eval(&self, r: T) -> Result<T, KernelError> {
        self.check_radius(r)?;
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: T) -> T {
        match &self.profile {
            Profile::Newtonian if self.dim == 2 => -self.newton_const() * r.ln(),
            Profile::Newtonian => self.newton_const() / r,
            Profile::Logarithmic { c } if *c == T::zero() => T::zero(),
            Profile::Logarithmic { c } => -*c * r.ln(),
            Profile::PowerLaw { s } => r.powf(-*s),
            Profile::Tabulated(t) => t.eval(r),
            Profile::Mollified(m) => m.eval(r),
        }
    }

    /// `k'(r)`.
    pub fn grad_radial(&self, r: T) -> Result<T, KernelError> {
        self.check_radius(r)?;
        Ok(self.grad_unchecked(r))
    }

    pub(crate) fn grad_unchecked(&self, r: T) -> T {
        match &self.profile {
            Profile::Newtonian if self.dim == 2 => -self.newton_const() / r,
            Profile::Newtonian => -self.newton_const() / (r * r),
            Profile::Logarithmic { c } => -*c / r,
            Profile::PowerLaw { s } => -*s * r.powf(-*s - T::one()),
            Profile::Tabulated(t) => t.derivative(r),
            Profile::Mollified(m) => m.derivative(r),
        }
    }

    /// `k''(r)`; tabulated profiles use a centred difference of `k'`.
    pub fn second_derivative(&self, r: T) -> Result<T, KernelError> {
        self.check_radius(r)?;
        Ok(match &self.profile {
            Profile::Newtonian if self.dim == 2 => self.newton_const() / (r * r),
            Profile::Newtonian => T::lit(2.0) * self.newton_const() / (r * r * r),
            Profile::Logarithmic { c } => *c / (r * r),
            Profile::PowerLaw { s } => *s * (*s + T::one()) * r.powf(-*s - T::lit(2.0)),
            _ => {
                let dr = r * T::lit(1e-4);
                (self.grad_unchecked(r + dr) - self.grad_unchecked(r - dr)) / (dr + dr)
            }
        })
    }

    /// Radial Laplacian `k'' + (d-1) k'/r`.
    pub fn lap(&self, r: T) -> Result<T, KernelError> {
        let k2 = self.second_derivative(r)?;
        Ok(k2 + T::from_count(self.dim - 1) * self.grad_unchecked(r) / r)
    }

    /// `m* = (p+1)/p` with `s = d/p`, clamped into `[1, 2 - 2/d]`.
    pub fn critical_exponent(&self) -> CriticalExponent<T> {
        let d = T::from_count(self.dim);
        let upper = T::from_count(2 * self.dim - 2) / d;
        let singularity = self.singularity();
        match singularity {
            Singularity::Power { s } => {
                let p = d / s;
                let raw = (p + T::one()) / p;
                let clamped = raw > upper;
                if clamped {
                    log::warn!("kernel exponent {s} exceeds d - 2; clamping m* to {upper}");
                }
                CriticalExponent {
                    m_star: raw.min(upper).max(T::one()),
                    p: Some(p),
                    singularity,
                    bounded: false,
                    clamped,
                }
            }
            _ => CriticalExponent {
                m_star: T::one(),
                p: None,
                singularity,
                bounded: singularity == Singularity::Bounded,
                clamped: false,
            },
        }
    }

    /// Mean of `K` over the sphere of radius `t` about a point at distance `r`
    /// from the origin.
    pub fn spherical_mean(&self, r: T, t: T) -> Result<T, KernelError> {
        if t == T::zero() {
            return self.eval(r);
        }
        if r == T::zero() {
            return self.eval(t);
        }
        match (&self.profile, self.dim) {
            // Harmonic away from the origin: mean value property.
            (Profile::Newtonian, _) | (Profile::Logarithmic { .. }, 2) => {
                Ok(self.eval_unchecked(r.max(t)))
            }
            (_, 2) => {
                let f = |phi: T| {
                    let rho2 = r * r + t * t + T::lit(2.0) * r * t * phi.cos();
                    self.eval_unchecked(rho2.max(T::zero()).sqrt())
                };
                let tol = crate::quadrature::tolerance::<T>(1e-11);
                let v = crate::quadrature::adaptive_gk(f, T::zero(), T::PI(), tol, tol)?;
                Ok(v / T::PI())
            }
            _ => {
                // u = r + t v maps the shell integral onto v ∈ [v0, 1].
                let v0 = if t <= r { -T::one() } else { T::one() - T::lit(2.0) * r / t };
                let tol = crate::quadrature::tolerance::<T>(1e-11);
                let f = |v: T| {
                    let u = r + t * v;
                    self.eval_unchecked(u) * u
                };
                let v = crate::quadrature::adaptive_gk(f, v0, T::one(), tol, tol)?;
                Ok(v / (T::lit(2.0) * r))
            }
        }
    }

    /// Samples `k'` on `r = 2^j`, `j = -20..=10`, and the second-derivative
    /// growth constant on `r ≤ 1`.
    pub fn audit(&self) -> KernelAudit {
        let mut increasing_at = None;
        let mut constant = 0.0f64;
        for j in -20..=10 {
            let r = T::lit(2f64.powi(j));
            let g = self.grad_unchecked(r);
            if g > T::lit(1e-12) * (T::one() + abs(self.eval_unchecked(r))) && increasing_at.is_none() {
                increasing_at = Some(r.as_f64());
            }
            if j <= 0 {
                if let Ok(k2) = self.second_derivative(r) {
                    let c = abs(k2).as_f64() * r.as_f64().powi(self.dim as i32 + 1);
                    constant = constant.max(c);
                }
            }
        }
        KernelAudit { increasing_at, second_derivative_constant: constant }
    }
}

/// Kernel choice as written in configuration files:
/// `newtonian | log:c=<real> | power:s=<real> | table:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Newtonian,
    /// `K ≡ 0`: no interaction.
    Zero,
    Log { c: f64 },
    Power { s: f64 },
    Table { path: String },
}

impl FromStr for KernelSpec {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let num = |v: &str, key: &str| -> Result<f64, KernelError> {
            let v = v
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| KernelError::Parameter(format!("expected {key}=<real> in {s:?}")))?;
            v.trim().parse().map_err(|_| KernelError::Parameter(format!("bad number {v:?}")))
        };
        if s == "newtonian" {
            Ok(Self::Newtonian)
        } else if s == "zero" {
            Ok(Self::Zero)
        } else if let Some(rest) = s.strip_prefix("log:") {
            Ok(Self::Log { c: num(rest.trim(), "c")? })
        } else if let Some(rest) = s.strip_prefix("power:") {
            Ok(Self::Power { s: num(rest.trim(), "s")? })
        } else if let Some(rest) = s.strip_prefix("table:") {
            Ok(Self::Table { path: rest.trim().to_string() })
        } else {
            Err(KernelError::Parameter(format!("unknown kernel {s:?}")))
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Newtonian => write!(f, "newtonian"),
            Self::Zero => write!(f, "zero"),
            Self::Log { c } => write!(f, "log:c={c:?}"),
            Self::Power { s } => write!(f, "power:s={s:?}"),
            Self::Table { path } => write!(f, "table:{path}"),
        }
    }
}

impl KernelSpec {
    pub fn build<T: Real>(&self, dim: usize) -> Result<Kernel<T>, KernelError> {
        match self {
            Self::Newtonian => Kernel::newtonian(dim),
            Self::Zero => Kernel::zero(dim),
            Self::Log { c } => Kernel::logarithmic(dim, T::lit(*c)),
            Self::Power { s } => Kernel::power_law(dim, T::lit(*s)),
            Self::Table { path } => Kernel::tabulated(dim, Tabulated::from_csv_path(path)?),
        }
    }
}

#[cfg(test)]
mod tests;
