//! One-dimensional quadrature rules used to build kernel tables, mollified
//! profiles and entropy densities.

use crate::scalar::{abs, Real};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("quadrature did not converge: estimate {estimate:e}, residual {residual:e}")]
pub struct QuadratureError {
    pub estimate: f64,
    pub residual: f64,
}

/// Requested tolerance, floored at a small multiple of machine epsilon.
pub fn tolerance<T: Real>(requested: f64) -> T {
    T::lit(requested.max(64.0 * T::epsilon().as_f64()))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}

/// Fixed-order Gauss-Legendre rule on `[a, b]`.
pub fn gauss_fixed<T: Real>(f: impl Fn(T) -> T, a: T, b: T, rule: &(Vec<T>, Vec<T>)) -> T {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    rule.0.iter().zip(&rule.1).map(|(&x, &w)| w * f(mid + half * x)).sum::<T>() * half
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    tol: T,
) -> Result<T, QuadratureError> {
    #[allow(clippy::too_many_arguments)]
    fn recurse<T: Real>(
        f: &impl Fn(T) -> T,
        a: T,
        b: T,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: T,
        depth: u32,
        worst: &mut T,
    ) -> T {
        let two = T::lit(2.0);
        let m = (a + b) / two;
        let lm = (a + m) / two;
        let rm = (m + b) / two;
        let flm = f(lm);
        let frm = f(rm);
        let six = T::lit(6.0);
        let left = (m - a) / six * (fa + T::lit(4.0) * flm + fm);
        let right = (b - m) / six * (fm + T::lit(4.0) * frm + fb);
        let delta = left + right - whole;
        let roundoff = T::lit(64.0) * T::epsilon() * abs(left + right);
        if depth == 0 || abs(delta) <= T::lit(15.0) * tol || abs(delta) <= roundoff {
            if depth == 0 {
                *worst = worst.max(abs(delta));
            }
            return left + right + delta / T::lit(15.0);
        }
        recurse(f, a, m, fa, flm, fm, left, tol / two, depth - 1, worst)
            + recurse(f, m, b, fm, frm, fb, right, tol / two, depth - 1, worst)
    }
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / T::lit(2.0);
    let fm = f(m);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    let mut worst = T::zero();
    let est = recurse(&f, a, b, fa, fm, fb, whole, tol, 40, &mut worst);
    if worst > T::lit(15.0) * tol || !est.is_finite() {
        return Err(QuadratureError { estimate: est.as_f64(), residual: worst.as_f64() });
    }
    Ok(est)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut samples = [(T::zero(), T::zero()); 7];
    let mut k = fc * T::lit(GK_WK[7]);
    let mut g = fc * T::lit(GK_WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(GK_X[j]);
        let (lo, hi) = (f(mid - dx), f(mid + dx));
        samples[j] = (lo, hi);
        k = k + (lo + hi) * T::lit(GK_WK[j]);
        if j % 2 == 1 {
            g = g + (lo + hi) * T::lit(GK_WG[j / 2]);
        }
    }
    // QUADPACK's error heuristic: scale the Kronrod-Gauss difference against
    // the spread of the integrand about its mean.
    let mean = k / T::lit(2.0);
    let mut asc = T::lit(GK_WK[7]) * abs(fc - mean);
    for j in 0..7 {
        asc = asc + T::lit(GK_WK[j]) * (abs(samples[j].0 - mean) + abs(samples[j].1 - mean));
    }
    let asc = asc * abs(half);
    let mut err = abs((k - g) * half);
    if asc > T::zero() && err > T::zero() {
        err = asc * T::one().min((T::lit(200.0) * err / asc).powf(T::lit(1.5)));
    }
    (k * half, err)
}

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature. Handles integrable
/// endpoint singularities (the rule never samples the endpoints).
pub fn adaptive_gk<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<T, QuadratureError> {
    let mut pieces = vec![{
        let (v, e) = kronrod(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..5000 {
        let total: T = pieces.iter().map(|p| p.2).sum();
        let err: T = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * abs(total)) {
            return Ok(total);
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = (lo + hi) / T::lit(2.0);
        let (v1, e1) = kronrod(&f, lo, mid);
        let (v2, e2) = kronrod(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    let total: T = pieces.iter().map(|p| p.2).sum();
    let err: T = pieces.iter().map(|p| p.3).sum();
    if err <= abs_tol.max(rel_tol * abs(total)) * T::lit(10.0) {
        return Ok(total);
    }
    Err(QuadratureError { estimate: total.as_f64(), residual: err.as_f64() })
}
