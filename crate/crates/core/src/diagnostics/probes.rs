//! Numerical probes of the logarithmic HLS and Gagliardo-Nirenberg
//! inequalities.

use super::DiagnosticsError;
use crate::fft::ConvolutionPlan;
use crate::grid::{dilate_conservative, integrate, lp_norm, GridSpec, ScalarField};
use crate::kernels::{cell_average, radial_table};
use crate::scalar::{abs, Real};

fn log_origin<T: Real>(grid: &GridSpec<T>) -> Result<T, DiagnosticsError> {
    cell_average(grid.dim(), grid.spacing(), |r: T| r.ln())
        .map_err(|e| DiagnosticsError::Kernel(crate::kernels::KernelError::Quadrature(e)))
}

fn ulogu<T: Real>(f: &ScalarField<T>) -> T {
    f.values().iter().map(|&z| if z > T::zero() { z * z.ln() } else { T::zero() }).sum::<T>() * f.grid().cell_volume()
}

fn q_from_double<T: Real>(f: &ScalarField<T>, double: T) -> T {
    let m = integrate(f);
    -double - m / T::from_count(f.grid().dim()) * ulogu(f)
}

/// `Q(f) = -∫∫ f(x) f(y) log|x-y| - (‖f‖₁/d) ∫ f log f`, with the double
/// integral evaluated by convolution.
pub fn log_hls_q<T: Real>(f: &ScalarField<T>) -> Result<T, DiagnosticsError> {
    let g = f.grid();
    let plan = ConvolutionPlan::new(*g, &radial_table(g, |r: T| r.ln(), log_origin(g)?));
    let lf = plan.apply(f);
    let double = f.values().iter().zip(lf.values()).map(|(&a, &b)| a * b).sum::<T>() * g.cell_volume();
    Ok(q_from_double(f, double))
}

/// Same quantity by the direct double sum; quadratic cost, meant for
/// grids with at most a few thousand cells.
pub fn log_hls_brute_force<T: Real>(f: &ScalarField<T>) -> Result<T, DiagnosticsError> {
    let g = f.grid();
    let origin = log_origin(g)?;
    let vals = f.values();
    let centers: Vec<[T; 3]> = (0..g.len()).map(|i| g.cell_center(i)).collect();
    let mut double = T::zero();
    for i in 0..g.len() {
        if vals[i] == T::zero() {
            continue;
        }
        let mut row = T::zero();
        for j in 0..g.len() {
            let lg = if i == j {
                origin
            } else {
                let r2 = (0..g.dim()).map(|a| (centers[i][a] - centers[j][a]).powi(2)).sum::<T>();
                r2.ln() / T::lit(2.0)
            };
            row = row + vals[j] * lg;
        }
        double = double + vals[i] * row;
    }
    let vol = g.cell_volume();
    Ok(q_from_double(f, double * vol * vol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogHlsReport {
    pub scales: Vec<f64>,
    pub q: Vec<f64>,
    pub max_q: f64,
    /// `(max Q - min Q) / max |Q|`.
    pub variation: f64,
}

/// `Q(f_λ)` for `f_λ(x) = λ^{-d} f(x/λ)` over the given scales (each ≤ 1 so
/// the dilated profile stays in the box).
pub fn log_hls_probe<T: Real>(f: &ScalarField<T>, scales: &[f64]) -> Result<LogHlsReport, DiagnosticsError> {
    let mut q = Vec::with_capacity(scales.len());
    for &lambda in scales {
        let (fl, lost) = dilate_conservative(f, T::lit(lambda));
        let m = integrate(f);
        if m > T::zero() && (lost / m).as_f64().abs() > 1e-6 {
            return Err(DiagnosticsError::Support((lost / m).as_f64()));
        }
        q.push(log_hls_q(&fl)?.as_f64());
    }
    let max_q = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_q = q.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = q.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let variation = if scale == 0.0 { 0.0 } else { (max_q - min_q) / scale };
    Ok(LogHlsReport { scales: scales.to_vec(), q, max_q, variation })
}

/// `(α₁, α₂)` with `1 = α₁ k + α₂` and `1/q - 1/p = α₁(-s/d + 1/r - k/p)`,
/// after checking `1 ≤ p ≤ rk ≤ dk`, `k < q < rkd/(d-r)` and
/// `1/r - k/q - s/d < 0`.
pub fn gns_exponents(d: usize, p: f64, q: f64, r: f64, k: f64, s: f64) -> Result<(f64, f64), DiagnosticsError> {
    let df = d as f64;
    let reject = |what: &str| Err(DiagnosticsError::Exponents(what.into()));
    if !(1.0 <= p) {
        return reject("1 <= p");
    }
    if !(p <= r * k) {
        return reject("p <= rk");
    }
    if !(r * k <= df * k) {
        return reject("rk <= dk");
    }
    if !(k < q) {
        return reject("k < q");
    }
    if r < df && !(q < r * k * df / (df - r)) {
        return reject("q < rkd/(d-r)");
    }
    if !(1.0 / r - k / q - s / df < 0.0) {
        return reject("1/r - k/q - s/d < 0");
    }
    let denom = -s / df + 1.0 / r - k / p;
    if denom == 0.0 {
        return reject("degenerate exponent system");
    }
    let a1 = (1.0 / q - 1.0 / p) / denom;
    let a2 = 1.0 - a1 * k;
    if !(a1 > 0.0 && a2 > 0.0) {
        return reject("alpha_1, alpha_2 > 0");
    }
    Ok((a1, a2))
}

/// `‖∇g‖_r` with centred differences at interior cells.
fn grad_norm<T: Real>(g: &ScalarField<T>, r: T) -> Result<T, DiagnosticsError> {
    let grid = *g.grid();
    let n = grid.cells_per_axis();
    let two_h = grid.spacing() * T::lit(2.0);
    let v = g.values();
    let mut mag = ScalarField::zeros(grid);
    for i in 0..grid.len() {
        let ijk = grid.unravel(i);
        let mut s = T::zero();
        #[allow(clippy::needless_range_loop)]
        for a in 0..grid.dim() {
            let st = grid.stride(a);
            let hi = if ijk[a] + 1 < n { v[i + st] } else { T::zero() };
            let lo = if ijk[a] > 0 { v[i - st] } else { T::zero() };
            let da = (hi - lo) / two_h;
            s = s + da * da;
        }
        mag[i] = s.sqrt();
    }
    Ok(lp_norm(&mag, r)?)
}

/// `R(f) = ‖f‖_q / (‖f‖_p^{α₂} ‖∇(f^k)‖_r^{α₁})` with `s = 1`.
pub fn gns_ratio<T: Real>(f: &ScalarField<T>, p: f64, q: f64, r: f64, k: f64) -> Result<f64, DiagnosticsError> {
    let (a1, a2) = gns_exponents(f.grid().dim(), p, q, r, k, 1.0)?;
    let fk = f.map(|z| abs(z).powf(T::lit(k)));
    let num = lp_norm(f, T::lit(q))?.as_f64();
    let den = lp_norm(f, T::lit(p))?.as_f64().powf(a2) * grad_norm(&fk, T::lit(r))?.as_f64().powf(a1);
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnsReport {
    pub alpha: (f64, f64),
    /// `(λ, R(f(λ ·)))`.
    pub ratios: Vec<(f64, f64)>,
    /// `max |R(f(λ·)) / R(f) - 1|`.
    pub max_deviation: f64,
}

impl GnsReport {
    pub fn invariant_within(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Samples `f(λ x)` for each `λ` (the first entry is the reference) and
/// compares the ratios.
pub fn gns_probe<T: Real>(
    grid: &GridSpec<T>,
    f: impl Fn([T; 3]) -> T,
    exps: (f64, f64, f64, f64),
    scales: &[f64],
) -> Result<GnsReport, DiagnosticsError> {
    let (p, q, r, k) = exps;
    let alpha = gns_exponents(grid.dim(), p, q, r, k, 1.0)?;
    let mut ratios = Vec::with_capacity(scales.len());
    for &lambda in scales {
        let l = T::lit(lambda);
        let field = ScalarField::from_fn(*grid, |x| f([x[0] * l, x[1] * l, x[2] * l]));
        ratios.push((lambda, gns_ratio(&field, p, q, r, k)?));
    }
    let reference = ratios.first().map_or(1.0, |v| v.1);
    let max_deviation = ratios.iter().map(|v| (v.1 / reference - 1.0).abs()).fold(0.0, f64::max);
    Ok(GnsReport { alpha, ratios, max_deviation })
}
