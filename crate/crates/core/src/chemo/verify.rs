//! Randomised checks of the elliptic estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChemoError, EllipticModel, EllipticSolver};
use crate::grid::{face_gradient, lp_norm, GridSpec, ScalarField, VectorField};
use crate::scalar::Real;

/// One trial of a randomised check.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl TrialRow {
    /// `lhs / rhs`, with `0/0 = 0`.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub check: String,
    pub rows: Vec<TrialRow>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn worst_ratio(&self) -> f64 {
        self.rows.iter().map(TrialRow::ratio).fold(0.0, f64::max)
    }

    pub fn failing_seeds(&self) -> Vec<u64> {
        self.rows.iter().filter(|r| !r.ok).map(|r| r.seed).collect()
    }

    /// `trial,seed,lhs,rhs,ratio` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("trial,seed,lhs,rhs,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{:e},{:e},{:e}\n", r.trial, r.seed, r.lhs, r.rhs, r.ratio()));
        }
        s
    }
}

/// Sum of 1 to 5 Gaussians with centres uniform in the half-box, widths in
/// `[L/16, L/4]` and masses in `[0.5, 2]`.
pub fn random_mixture<T: Real>(grid: &GridSpec<T>, rng: &mut impl Rng) -> ScalarField<T> {
    let d = grid.dim();
    let l = grid.half_width().as_f64();
    let bumps: Vec<([f64; 3], f64, f64)> = (0..rng.gen_range(1..=5))
        .map(|_| {
            let mut c = [0.0; 3];
            for x in c.iter_mut().take(d) {
                *x = rng.gen_range(-l / 2.0..=l / 2.0);
            }
            (c, rng.gen_range(l / 16.0..=l / 4.0), rng.gen_range(0.5..=2.0))
        })
        .collect();
    ScalarField::from_fn(*grid, |x| {
        let x: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
        let v: f64 = bumps
            .iter()
            .map(|(c, w, m)| {
                let r2: f64 = (0..d).map(|a| (x[a] - c[a]).powi(2)).sum();
                m * (2.0 * std::f64::consts::PI * w * w).powf(-(d as f64) / 2.0) * (-r2 / (2.0 * w * w)).exp()
            })
            .sum();
        T::lit(v)
    })
}

fn seed_of(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

/// `‖c‖_p ≤ ‖f‖_p / inf γ` when `inf γ > 0` (2% allowance); otherwise, for
/// `d = 3`, `γ ≡ 0`, `3 < p < ∞`, records `‖c‖_p / ‖f‖_q` with
/// `1/q = 2/d + 1/p` and asserts only that it is finite.
pub fn verify_lp_estimate<T: Real>(
    model: &EllipticModel,
    grid: &GridSpec<T>,
    trials: usize,
    p: f64,
    seed: u64,
    tol: f64,
) -> Result<VerifyReport, ChemoError> {
    let inf_gamma = model.gamma().inf();
    let d = grid.dim() as f64;
    let (check, q) = if inf_gamma > 0.0 {
        if !(p >= 1.0) {
            return Err(ChemoError::Precondition(format!("p = {p} must be at least 1")));
        }
        ("inhomog_lp", p)
    } else if grid.dim() == 3 && p > 3.0 && p.is_finite() {
        ("homog_lp", 1.0 / (2.0 / d + 1.0 / p))
    } else {
        return Err(ChemoError::Precondition(
            "needs inf gamma > 0, or d = 3, gamma = 0 and 3 < p < inf".into(),
        ));
    };
    let mut solver = EllipticSolver::new(model, *grid, T::lit(tol))?;
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let seed = seed_of(seed, trial);
        let f = random_mixture(grid, &mut ChaCha8Rng::seed_from_u64(seed));
        let (c, _) = solver.solve(&f)?;
        let lhs = lp_norm(&c, T::lit(p))?.as_f64();
        let fq = lp_norm(&f, T::lit(q))?.as_f64();
        let (rhs, ok) = if inf_gamma > 0.0 {
            let rhs = fq / inf_gamma;
            (rhs, lhs <= rhs * 1.02)
        } else {
            (fq, (lhs / fq).is_finite())
        };
        rows.push(TrialRow { trial, seed, lhs, rhs, ok });
    }
    Ok(VerifyReport { check: check.into(), rows })
}

/// Random face field with mixed signs, zero on the box boundary.
fn random_face_field<T: Real>(grid: &GridSpec<T>, rng: &mut impl Rng) -> VectorField<T> {
    let comps = (0..grid.dim())
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { T::one() } else { -T::one() };
            let m = random_mixture(grid, rng);
            m.values().iter().map(|&v| sign * v).collect()
        })
        .collect();
    let mut field = VectorField::from_components(*grid, comps).expect("matching lengths");
    for axis in 0..grid.dim() {
        for i in 0..grid.len() {
            if field.is_boundary_face(axis, i) {
                field.component_mut(axis)[i] = T::zero();
            }
        }
    }
    field
}

/// `‖∇c‖₂ ≤ ‖F‖₂ / inf a` for `f = ∇·F` (1% allowance).
pub fn verify_h1_stability<T: Real>(
    model: &EllipticModel,
    grid: &GridSpec<T>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerifyReport, ChemoError> {
    let inf_a = model.a().inf();
    let mut solver = EllipticSolver::new(model, *grid, T::lit(tol))?;
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let seed = seed_of(seed, trial);
        let big_f = random_face_field(grid, &mut ChaCha8Rng::seed_from_u64(seed));
        let f = big_f.divergence();
        let (c, _) = solver.solve(&f)?;
        let lhs = face_gradient(&c).l2_norm().as_f64();
        let rhs = big_f.l2_norm().as_f64() / inf_a;
        rows.push(TrialRow { trial, seed, lhs, rhs, ok: lhs <= rhs * 1.01 });
    }
    Ok(VerifyReport { check: "h1_stability".into(), rows })
}

/// Frobenius norm of the centred-difference Hessian; cells within two
/// layers of the boundary are set to zero.
fn hessian_norm<T: Real>(c: &ScalarField<T>) -> ScalarField<T> {
    let g = *c.grid();
    let d = g.dim();
    let n = g.cells_per_axis();
    let h2 = g.spacing() * g.spacing();
    let v = c.values();
    let mut out = ScalarField::zeros(g);
    for i in 0..g.len() {
        let ijk = g.unravel(i);
        if (0..d).any(|a| ijk[a] < 2 || ijk[a] + 2 >= n) {
            continue;
        }
        let mut s = T::zero();
        for a in 0..d {
            let sa = g.stride(a);
            let daa = (v[i + sa] - T::lit(2.0) * v[i] + v[i - sa]) / h2;
            s = s + daa * daa;
            for b in a + 1..d {
                let sb = g.stride(b);
                let dab = (v[i + sa + sb] - v[i + sa - sb] - v[i - sa + sb] + v[i - sa - sb]) / (T::lit(4.0) * h2);
                s = s + T::lit(2.0) * dab * dab;
            }
        }
        out[i] = s.sqrt();
    }
    out
}

/// Records `‖D²c‖_p / (‖f‖_p + ‖f‖_{pd/(2p+d)})` for `γ ≡ 0`; asserts only
/// finiteness.
pub fn homog_grad_probe<T: Real>(
    model: &EllipticModel,
    grid: &GridSpec<T>,
    trials: usize,
    p: f64,
    seed: u64,
    tol: f64,
) -> Result<VerifyReport, ChemoError> {
    if model.gamma().sup() != 0.0 {
        return Err(ChemoError::Precondition("probe needs gamma = 0".into()));
    }
    let d = grid.dim() as f64;
    let q = p * d / (2.0 * p + d);
    if !(q >= 1.0) {
        return Err(ChemoError::Precondition(format!("p = {p} gives q = {q} < 1")));
    }
    let mut solver = EllipticSolver::new(model, *grid, T::lit(tol))?;
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let seed = seed_of(seed, trial);
        let f = random_mixture(grid, &mut ChaCha8Rng::seed_from_u64(seed));
        let (c, _) = solver.solve(&f)?;
        let lhs = lp_norm(&hessian_norm(&c), T::lit(p))?.as_f64();
        let rhs = (lp_norm(&f, T::lit(p))? + lp_norm(&f, T::lit(q))?).as_f64();
        rows.push(TrialRow { trial, seed, lhs, rhs, ok: (lhs / rhs).is_finite() });
    }
    Ok(VerifyReport { check: "homog_grad".into(), rows })
}
