use std::f64::consts::PI;

use super::*;
use crate::grid::{integrate, lp_norm};
use crate::kernels::sample_on_grid;

fn grid(d: usize, l: f64, n: usize) -> GridSpec<f64> {
    GridSpec::new(d, l, n).unwrap()
}

fn unit(v: f64) -> Coefficient {
    Coefficient::Const(v)
}

fn point_mass(g: GridSpec<f64>, ijk: [usize; 3]) -> ScalarField<f64> {
    let mut u = ScalarField::zeros(g);
    u[g.ravel(ijk)] = 1.0 / g.cell_volume();
    u
}

fn dot(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
    integrate(&a.mul(b).unwrap())
}

#[test]
fn coefficient_grammar_roundtrip() {
    let c: Coefficient = "expr:gauss(2,0.5)+1".parse().unwrap();
    assert_eq!(c, Coefficient::Gauss { amp: 2.0, width: 0.5, base: 1.0 });
    assert_eq!(c.to_string().parse::<Coefficient>().unwrap(), c);
    assert_eq!("const:3.5".parse::<Coefficient>().unwrap(), unit(3.5));
    assert_eq!(c.inf(), 1.0);
    assert_eq!(c.sup(), 3.0);
    let neg: Coefficient = "expr:gauss(-0.5,1)+2".parse().unwrap();
    assert_eq!(neg.inf(), 1.5);
    assert!((c.eval([0.0f64, 0.0, 0.0]) - 3.0).abs() < 1e-15);
    for bad in ["", "const:", "gauss(1,1)", "expr:gauss(1)", "expr:gauss(1,0)+1", "expr:gauss(1,1)-2"] {
        assert!(bad.parse::<Coefficient>().is_err(), "{bad}");
    }
}

#[test]
fn model_hypotheses_enforced() {
    assert!(EllipticModel::new(2, unit(1.0), unit(0.0)).is_err());
    assert!(EllipticModel::new(2, unit(0.0), unit(1.0)).is_err());
    assert!(EllipticModel::new(3, unit(1.0), unit(-1.0)).is_err());
    let m = EllipticModel::new(3, unit(1.0), unit(0.0)).unwrap();
    assert_eq!(m.boundary(), Boundary::Decay);
    assert_eq!(EllipticModel::new(2, unit(1.0), unit(1.0)).unwrap().boundary(), Boundary::Dirichlet);
    assert!(EllipticModel::new(2, unit(1.0), unit(1.0)).unwrap().with_boundary(Boundary::Decay).is_err());
    let f = ScalarField::zeros(grid(3, 1.0, 16));
    for tol in [0.0, 1e-15, 1e-2, 0.5] {
        assert!(matches!(solve_elliptic(&m, &f, tol), Err(ChemoError::Tolerance(_))));
    }
}

#[test]
fn discrete_eigenfunction_is_matched() {
    let l = 1.0;
    let n = 32;
    let g = grid(2, l, n);
    let h = g.spacing();
    // odd about both box faces, so the ghost-cell reflection is exact
    let f = ScalarField::from_fn(g, |x| (PI * x[0] / l).sin() * (PI * x[1] / l).sin());
    let model = EllipticModel::new(2, unit(1.0), unit(1.0)).unwrap();
    let (c, rep) = solve_elliptic(&model, &f, 1e-13).unwrap();
    assert!(rep.residual <= 1e-13);
    let lambda = 1.0 + 2.0 * (4.0 / (h * h)) * (PI * h / (2.0 * l)).sin().powi(2);
    for (ci, fi) in c.values().iter().zip(f.values()) {
        assert!((ci - fi / lambda).abs() < 1e-10);
    }
}

#[test]
fn zero_source_gives_zero() {
    let model = EllipticModel::new(3, unit(1.0), unit(0.0)).unwrap();
    let (c, rep) = solve_elliptic(&model, &ScalarField::zeros(grid(3, 2.0, 16)), 1e-10).unwrap();
    assert_eq!(rep.iterations, 0);
    assert!(c.values().iter().all(|&v| v == 0.0));
}

/// Value at distance 2 from a point mass on the L = 8 box, n = 64.
fn point_mass_far_field(boundary: Boundary) -> f64 {
    let g = grid(3, 8.0, 64);
    let f = point_mass(g, [32, 32, 32]);
    let model = EllipticModel::new(3, unit(1.0), unit(0.0)).unwrap().with_boundary(boundary).unwrap();
    let (c, _) = solve_elliptic(&model, &f, 1e-10).unwrap();
    c[g.ravel([40, 32, 32])]
}

#[test]
fn point_mass_far_field_and_truncation_study() {
    let exact = 1.0 / (8.0 * PI);
    let decay = point_mass_far_field(Boundary::Decay);
    let dirichlet = point_mass_far_field(Boundary::Dirichlet);
    assert!((decay / exact - 1.0).abs() < 0.05, "decay {decay} vs {exact}");
    // zero Dirichlet data truncates the potential by roughly 1/(4π L_eff)
    assert!(dirichlet < decay);
    assert!((dirichlet / exact - 1.0).abs() > (decay / exact - 1.0).abs());
}

#[test]
fn solver_is_self_adjoint_and_positive() {
    let g = grid(2, 2.0, 32);
    let a: Coefficient = "expr:gauss(2,0.5)+1".parse().unwrap();
    let gamma: Coefficient = "expr:gauss(-0.5,0.7)+1".parse().unwrap();
    let model = EllipticModel::new(2, a, gamma).unwrap();
    let f = ScalarField::gaussian(g, 1.0, 3.0, [0.4, -0.3, 0.0]);
    let k = ScalarField::gaussian(g, 2.0, 1.5, [-0.5, 0.6, 0.0]);
    let (cf, _) = solve_elliptic(&model, &f, 1e-12).unwrap();
    let (ck, _) = solve_elliptic(&model, &k, 1e-12).unwrap();
    let (lhs, rhs) = (dot(&k, &cf), dot(&f, &ck));
    assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs());
    assert!(cf.min_value() > 0.0);
}

#[test]
fn maximum_principle_on_random_sources() {
    let g = grid(3, 2.0, 16);
    let model = EllipticModel::new(3, "expr:gauss(1,0.5)+0.5".parse().unwrap(), unit(0.0)).unwrap();
    for seed in 0..4u64 {
        use rand::SeedableRng;
        let f = random_mixture(&g, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (c, _) = solve_elliptic(&model, &f, 1e-10).unwrap();
        let scale = c.max_value();
        assert!(c.min_value() > -1e-8 * scale);
        let interior = g.ravel([8, 8, 8]);
        assert!(c[interior] > 0.0);
    }
}

#[test]
fn convolution_of_point_mass_is_translated_table() {
    let g = grid(2, 1.0, 16);
    let k = Kernel::<f64>::newtonian(2).unwrap();
    let table = sample_on_grid(&k, &g).unwrap();
    let c = convolve_potential(&k, &point_mass(g, [5, 9, 0])).unwrap();
    let m = 2 * g.cells_per_axis();
    for i in 0..g.len() {
        let ijk = g.unravel(i);
        let ox = (ijk[0] + m - 5) % m;
        let oy = (ijk[1] + m - 9) % m;
        assert!((c[i] - table[ox + m * oy]).abs() < 1e-12 * table[0].abs());
    }
    assert!(convolve_potential(&k, &ScalarField::zeros(g)).unwrap().values().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn convolution_is_symmetric() {
    let g = grid(2, 2.0, 32);
    let k = Kernel::<f64>::power_law(2, 1.0).unwrap();
    let u = ScalarField::gaussian(g, 1.0, 2.0, [0.5, 0.0, 0.0]);
    let v = ScalarField::gaussian(g, 1.0, 5.0, [-0.3, 0.4, 0.0]);
    let a = dot(&u, &convolve_potential(&k, &v).unwrap());
    let b = dot(&v, &convolve_potential(&k, &u).unwrap());
    assert!((a - b).abs() < 1e-12 * a.abs());
}

#[test]
fn newtonian_exterior_potential_3d() {
    let g = grid(3, 4.0, 64);
    let u = ScalarField::gaussian(g, 1.0, 4.0, [0.0; 3]);
    let c = convolve_potential(&Kernel::newtonian(3).unwrap(), &u).unwrap();
    // cell centre nearest (2, 0, 0)
    let i = g.ravel([48, 32, 32]);
    let r = g.radius_sq(i).sqrt();
    assert!((r - 2.0).abs() < 0.2);
    let exact = 1.0 / (4.0 * PI * r);
    assert!((c[i] / exact - 1.0).abs() < 0.02, "{} vs {exact}", c[i]);
    assert!((c[i] / (1.0 / (8.0 * PI)) - 1.0).abs() < 0.05);
}

#[test]
fn face_gradient_cases() {
    let g = grid(2, 1.0, 16);
    assert_eq!(grad_potential(&ScalarField::constant(g, 3.0)).max_abs(), 0.0);
    let plane = grad_potential(&ScalarField::from_fn(g, |x| x[0]));
    for i in 0..g.len() {
        let expect = if plane.is_boundary_face(0, i) { 0.0 } else { 1.0 };
        assert!((plane.component(0)[i] - expect).abs() < 1e-13);
        assert!(plane.component(1)[i].abs() < 1e-13);
    }
}

#[test]
fn newtonian_gradient_of_point_mass_2d() {
    let g = grid(2, 4.0, 128);
    let c = convolve_potential(&Kernel::newtonian(2).unwrap(), &point_mass(g, [64, 64, 0])).unwrap();
    let grad = grad_potential(&c);
    // face between cells 80 and 81 along x: distance 16.5 h + ... = 1.03 from the mass
    let i = g.ravel([80, 64, 0]);
    let r = 16.5 * g.spacing();
    let got = grad.component(0)[i].abs();
    let exact = 1.0 / (2.0 * PI * r);
    assert!((got / exact - 1.0).abs() < 0.03, "{got} vs {exact}");
    assert!((got / (1.0 / (2.0 * PI)) - 1.0).abs() < 0.05);
}

#[test]
fn inhomogeneous_lp_estimate_holds() {
    let g = grid(2, 4.0, 64);
    let model = EllipticModel::new(2, unit(1.0), unit(2.0)).unwrap();
    for p in [2.0, 4.0] {
        let rep = verify_lp_estimate(&model, &g, 6, p, 0, 1e-10).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.worst_ratio() <= 1.02);
        for r in &rep.rows {
            assert!(r.lhs <= 0.5 * lp_norm(&random_mixture(&g, &mut seeded(r.seed)), p).unwrap() * 1.02);
        }
    }
}

fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn report_csv_shape() {
    let rep = VerifyReport {
        check: "x".into(),
        rows: vec![TrialRow { trial: 0, seed: 7, lhs: 0.0, rhs: 0.0, ok: true }],
    };
    assert_eq!(rep.rows[0].ratio(), 0.0);
    let csv = rep.to_csv();
    assert!(csv.starts_with("trial,seed,lhs,rhs,ratio\n0,7,"));
}

#[test]
fn lp_estimate_preconditions() {
    let g = grid(3, 2.0, 16);
    let homog = EllipticModel::new(3, unit(1.0), unit(0.0)).unwrap();
    assert!(verify_lp_estimate(&homog, &g, 1, 2.0, 0, 1e-8).is_err());
    assert!(verify_lp_estimate(&homog, &g, 1, f64::INFINITY, 0, 1e-8).is_err());
}

#[test]
fn homogeneous_lp_ratio_stable_under_refinement() {
    let model = EllipticModel::new(3, unit(1.0), unit(0.0)).unwrap();
    let coarse = verify_lp_estimate(&model, &grid(3, 4.0, 16), 3, 6.0, 0, 1e-9).unwrap();
    let fine = verify_lp_estimate(&model, &grid(3, 4.0, 32), 3, 6.0, 0, 1e-9).unwrap();
    assert!(coarse.passed() && fine.passed());
    let (a, b) = (coarse.worst_ratio(), fine.worst_ratio());
    assert!(a > 0.0 && (a / b - 1.0).abs() < 0.25, "{a} vs {b}");
}

#[test]
fn h1_stability_constant_and_variable() {
    let g = grid(2, 4.0, 64);
    let two = EllipticModel::new(2, unit(2.0), unit(1.0)).unwrap();
    let rep = verify_h1_stability(&two, &g, 5, 0, 1e-10).unwrap();
    assert!(rep.passed());
    assert!(rep.rows.iter().all(|r| r.lhs <= 0.5 * r.rhs * 2.0 * 1.01));
    assert!(rep.worst_ratio() <= 1.01);

    let var = EllipticModel::new(2, "expr:gauss(2,1)+1".parse().unwrap(), unit(0.5)).unwrap();
    let rep = verify_h1_stability(&var, &g, 5, 0, 1e-10).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn h1_stability_of_zero_field() {
    let g = grid(2, 1.0, 16);
    let model = EllipticModel::new(2, unit(1.0), unit(1.0)).unwrap();
    let mut solver = EllipticSolver::new(&model, g, 1e-10).unwrap();
    let (c, _) = solver.solve(&VectorField::zeros(g).divergence()).unwrap();
    assert_eq!(face_gradient(&c).l2_norm(), 0.0);
}

#[test]
fn homog_grad_probe_is_finite() {
    let model = EllipticModel::new(3, unit(1.0), unit(0.0)).unwrap();
    let rep = homog_grad_probe(&model, &grid(3, 4.0, 32), 3, 6.0, 0, 1e-9).unwrap();
    assert!(rep.passed());
    assert!(rep.worst_ratio() > 0.0);
    let inhom = EllipticModel::new(3, unit(1.0), unit(1.0)).unwrap();
    assert!(homog_grad_probe(&inhom, &grid(3, 4.0, 16), 1, 6.0, 0, 1e-9).is_err());
}

#[test]
fn chemo_solver_dispatch() {
    let g = grid(2, 2.0, 16);
    let u = ScalarField::gaussian(g, 1.0, 2.0, [0.0; 3]);
    let mut zero = ChemoSolver::new(&ChemoModel::Convolution(Kernel::zero(2).unwrap()), g, 1e-10).unwrap();
    assert!(zero.is_trivial());
    assert_eq!(zero.potential(&u).unwrap().max_value(), 0.0);
    let model = EllipticModel::new(2, unit(1.0), unit(1.0)).unwrap();
    let mut ell = ChemoSolver::new(&ChemoModel::<f64>::Elliptic(model.clone()), g, 1e-10).unwrap();
    let a = ell.potential(&u).unwrap();
    let (b, _) = solve_elliptic(&model, &u, 1e-10).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() < 1e-8 * b.max_value());
    }
    let wrong = ChemoModel::Convolution(Kernel::newtonian(3).unwrap());
    assert!(ChemoSolver::new(&wrong, g, 1e-10).is_err());
}
