use std::fmt;
use std::str::FromStr;

use super::ChemoError;
use crate::scalar::Real;

/// Spatial coefficient field: `const:<v>` or `expr:gauss(<amp>,<width>)+<base>`,
/// the latter meaning `base + amp · exp(-|x|^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Const(f64),
    Gauss { amp: f64, width: f64, base: f64 },
}

impl Coefficient {
    pub fn eval<T: Real>(&self, x: [T; 3]) -> T {
        match *self {
            Self::Const(v) => T::lit(v),
            Self::Gauss { amp, width, base } => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                T::lit(base) + T::lit(amp) * (-r2 / T::lit(2.0 * width * width)).exp()
            }
        }
    }

    /// Infimum over all of space.
    pub fn inf(&self) -> f64 {
        match *self {
            Self::Const(v) => v,
            Self::Gauss { amp, base, .. } => base + amp.min(0.0),
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            Self::Const(v) => v,
            Self::Gauss { amp, base, .. } => base + amp.max(0.0),
        }
    }
}

impl FromStr for Coefficient {
    type Err = ChemoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |what: &str| ChemoError::Coefficient(format!("{what} in {s:?}"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("malformed number"));
        if let Some(v) = s.strip_prefix("const:") {
            return Ok(Self::Const(num(v)?));
        }
        let body = s.strip_prefix("expr:").ok_or_else(|| bad("expected const: or expr:"))?.trim();
        let args = body.strip_prefix("gauss(").ok_or_else(|| bad("expected gauss("))?;
        let close = args.find(')').ok_or_else(|| bad("missing ')'"))?;
        let (inner, rest) = (&args[..close], args[close + 1..].trim());
        let mut parts = inner.split(',');
        let amp = num(parts.next().ok_or_else(|| bad("missing amplitude"))?)?;
        let width = num(parts.next().ok_or_else(|| bad("missing width"))?)?;
        if parts.next().is_some() {
            return Err(bad("gauss takes two arguments"));
        }
        if !(width > 0.0) {
            return Err(bad("width must be positive"));
        }
        let base = if rest.is_empty() {
            0.0
        } else {
            num(rest.strip_prefix('+').ok_or_else(|| bad("expected '+<base>'"))?)?
        };
        Ok(Self::Gauss { amp, width, base })
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(v) => write!(f, "const:{v:?}"),
            Self::Gauss { amp, width, base } => write!(f, "expr:gauss({amp:?},{width:?})+{base:?}"),
        }
    }
}
