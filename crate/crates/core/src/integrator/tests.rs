use std::f64::consts::PI;

use super::*;
use crate::grid::second_moment;
use crate::kernels::Kernel;

fn grid(l: f64, n: usize) -> GridSpec<f64> {
    GridSpec::new(2, l, n).unwrap()
}

fn pks() -> ChemoModel<f64> {
    ChemoModel::Convolution(Kernel::newtonian(2).unwrap())
}

fn heat() -> ChemoModel<f64> {
    ChemoModel::Convolution(Kernel::zero(2).unwrap())
}

fn cfg() -> StepperConfig {
    StepperConfig { dt_max: 0.01, ..Default::default() }
}

#[test]
fn adapt_dt_formula() {
    let g = grid(1.0, 32);
    let c = StepperConfig { dt_max: 1.0, ..Default::default() };
    assert_eq!(adapt_dt(&VectorField::zeros(g), &c), 1.0);
    let mut v = VectorField::zeros(g);
    v.component_mut(0)[5] = 1.0;
    assert!((adapt_dt(&v, &c) - 0.025).abs() < 1e-15);
    v.component_mut(1)[7] = -2.0;
    assert!((adapt_dt(&v, &c) - 0.0125).abs() < 1e-15);
    let tiny = StepperConfig { dt_min: 0.5, ..c };
    assert_eq!(adapt_dt(&v, &tiny), 0.5);
}

#[test]
fn config_validation() {
    assert!(StepperConfig::default().validate().is_ok());
    for bad in [
        StepperConfig { cfl_advect: 0.0, ..Default::default() },
        StepperConfig { diff_theta: 0.3, ..Default::default() },
        StepperConfig { dt_min: 1.0, dt_max: 0.5, ..Default::default() },
        StepperConfig { blowup_lp: Some(0.5), ..Default::default() },
        StepperConfig { picard_sweeps: 0, ..Default::default() },
        StepperConfig { solver_tol: 0.1, ..Default::default() },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
    }
}

#[test]
fn zero_data_stays_zero() {
    let g = grid(2.0, 32);
    let mut it = Integrator::new(g, &pks(), DiffusionModel::linear(), cfg()).unwrap();
    let out = it.run(ScalarField::zeros(g), 0.1, 1, |_, _| {}).unwrap();
    assert!(out.state.u.values().iter().all(|&v| v == 0.0));
    assert!((out.state.t - 0.1).abs() < 1e-12);
}

#[test]
fn zero_end_time_returns_initial_state() {
    let g = grid(2.0, 32);
    let u0 = ScalarField::gaussian(g, 1.0, 2.0, [0.0; 3]);
    let mut it = Integrator::new(g, &pks(), DiffusionModel::linear(), cfg()).unwrap();
    let out = it.run(u0.clone(), 0.0, 1, |_, _| {}).unwrap();
    assert!(out.series.is_empty());
    assert_eq!(out.state.u, u0);
    assert!(it.run(u0, -1.0, 1, |_, _| {}).is_err());
}

#[test]
fn uniform_advection_translates_and_conserves() {
    let g = grid(4.0, 64);
    let u = ScalarField::gaussian(g, 1.0, 2.0, [0.0; 3]);
    let mut v = VectorField::zeros(g);
    for i in 0..g.len() {
        if !v.is_boundary_face(0, i) {
            v.component_mut(0)[i] = 1.0;
        }
    }
    let dt = 0.4 * g.spacing();
    let flux = advect::fluxes(&u, &v);
    assert!(advect::positivity_limit(&u, &flux) >= dt);
    let mut w = u.clone();
    advect::apply(&mut w, &flux, dt);
    assert!(w.is_nonnegative());
    let (m0, m1) = (integrate(&u), integrate(&w));
    assert!((m1 - m0).abs() < 1e-14);
    let cx = |f: &ScalarField<f64>| (0..g.len()).map(|i| g.cell_center(i)[0] * f[i]).sum::<f64>() * g.cell_volume();
    assert!((cx(&w) - cx(&u) - dt).abs() < 1e-10);
}

#[test]
fn roundoff_level_data_never_reverses_fluxes() {
    let g = grid(8.0, 16);
    let mut u = ScalarField::zeros(g);
    let row = [9.452342465006596e-16, 3.8739219531133035e-32, 0.0, 0.0];
    for (j, &val) in row.iter().enumerate() {
        for x in 0..16 {
            u[x + 16 * j] = val;
        }
    }
    let mut v = VectorField::zeros(g);
    for i in 0..g.len() {
        if !v.is_boundary_face(1, i) {
            v.component_mut(1)[i] = 0.7;
        }
    }
    let flux = advect::fluxes(&u, &v);
    assert!(flux.component(1).iter().all(|&f| f >= 0.0));
    assert!(advect::positivity_limit(&u, &flux) > 1e-3);
}

proptest::proptest! {
    #[test]
    fn positivity_limit_keeps_cells_nonnegative(seed in 0u64..100) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = grid(1.0, 16);
        let u = ScalarField::from_fn(g, |_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) });
        let comps = (0..2).map(|_| (0..g.len()).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let mut v = VectorField::from_components(g, comps).unwrap();
        for a in 0..2 {
            for i in 0..g.len() {
                if v.is_boundary_face(a, i) {
                    v.component_mut(a)[i] = 0.0;
                }
            }
        }
        let flux = advect::fluxes(&u, &v);
        let dt = advect::positivity_limit(&u, &flux).min(1.0);
        let mut w = u.clone();
        advect::apply(&mut w, &flux, dt);
        proptest::prop_assert!(w.min_value() >= -1e-14);
        proptest::prop_assert!((integrate(&w) - integrate(&u)).abs() < 1e-13);
    }
}

#[test]
fn heat_flow_second_moment_rate() {
    let g = grid(6.0, 64);
    let mass = 2.0;
    let u0 = ScalarField::gaussian(g, mass, 4.0, [0.0; 3]);
    let mut it = Integrator::new(g, &heat(), DiffusionModel::linear(), StepperConfig { dt_max: 0.002, ..Default::default() }).unwrap();
    let out = it.run(u0.clone(), 0.2, 100, |_, _| {}).unwrap();
    assert_eq!(out.state.step_count, 100);
    let rate = (second_moment(&out.state.u) - second_moment(&u0)) / 0.2;
    assert!((rate / (4.0 * mass) - 1.0).abs() < 0.03, "{rate}");
}

#[test]
fn keller_segel_run_conserves_mass_and_dissipates() {
    let g = grid(8.0, 64);
    let mass = 4.0 * PI;
    let u0 = ScalarField::gaussian(g, mass, 1.0, [0.3, -0.2, 0.0]);
    let mut it = Integrator::new(g, &pks(), DiffusionModel::linear(), cfg()).unwrap();
    let out = it.run(u0, 0.5, 5, |s, _| assert!(s.u.is_nonnegative())).unwrap();
    let m0 = out.series[0].mass;
    assert!(((out.state.u.values().iter().sum::<f64>() * g.cell_volume()) - m0).abs() <= 1e-10 * m0);
    for w in out.series.windows(2) {
        let tol = 1e-3 * (1.0 + out.series[0].free_energy.abs()) * (w[1].t - w[0].t);
        assert!(w[1].free_energy <= w[0].free_energy + tol, "{:?}", w);
    }
}

#[test]
fn radial_data_keeps_grid_symmetry() {
    let g = grid(4.0, 32);
    let u0 = ScalarField::gaussian(g, 6.0, 1.5, [0.0; 3]);
    let mut it = Integrator::new(g, &pks(), DiffusionModel::porous_medium(1.5).unwrap(), cfg()).unwrap();
    let mut state = it.init(u0).unwrap();
    let n = g.cells_per_axis();
    for _ in 0..10 {
        it.step(&mut state, 1.0).unwrap();
        let peak = state.u.max_value();
        for i in 0..n {
            for j in 0..n {
                let v = state.u[g.ravel([i, j, 0])];
                for w in [[j, i], [n - 1 - i, j], [i, n - 1 - j]] {
                    assert!((v - state.u[g.ravel([w[0], w[1], 0])]).abs() <= 1e-12 * peak);
                }
            }
        }
    }
}

#[test]
fn porous_medium_spreading_exponent() {
    // Barenblatt profile for m = 2, d = 2 at t = 1: (1 - |x|²/16)_+
    let g = grid(12.0, 128);
    let u0 = ScalarField::from_fn(g, |x| (1.0 - (x[0] * x[0] + x[1] * x[1]) / 16.0).max(0.0));
    let mut it = Integrator::new(g, &heat(), DiffusionModel::porous_medium(2.0).unwrap(), StepperConfig { dt_max: 0.05, ..Default::default() }).unwrap();
    let mut samples = Vec::new();
    it.run(u0, 16.0, 20, |s, _| {
        let peak = s.u.max_value();
        let radius = (0..g.len())
            .filter(|&i| s.u[i] > 1e-6 * peak)
            .map(|i| g.radius_sq(i).sqrt())
            .fold(0.0, f64::max);
        samples.push(((1.0 + s.t).ln(), radius.ln(), (second_moment(&s.u) / integrate(&s.u)).sqrt().ln()));
    })
    .unwrap();
    let slope = |pick: fn(&(f64, f64, f64)) -> f64| {
        let (a, b) = (&samples[samples.len() / 4], samples.last().unwrap());
        (pick(b) - pick(a)) / (b.0 - a.0)
    };
    let support = slope(|s| s.1);
    let moment = slope(|s| s.2);
    assert!((support / 0.25 - 1.0).abs() < 0.1, "support exponent {support}");
    assert!((moment / 0.25 - 1.0).abs() < 0.1, "moment exponent {moment}");
}

#[test]
fn supercritical_mass_triggers_blowup_before_virial_time() {
    let g = grid(3.0, 128);
    let mass = 1.5 * 8.0 * PI;
    let u0 = ScalarField::gaussian(g, mass, 2.0, [0.0; 3]);
    let m2 = second_moment(&u0);
    let bound = m2 / (mass * mass / (2.0 * PI) - 4.0 * mass);
    let mut it = Integrator::new(g, &pks(), DiffusionModel::linear(), StepperConfig { dt_max: 0.005, ring_tol: 1.0, blowup_linf_factor: 20.0, ..Default::default() }).unwrap();
    match it.run(u0, 2.0 * bound, 10, |_, _| {}) {
        Err(IntegratorError::BlowupSuspected(b)) => {
            assert!(b.t <= 1.2 * bound, "{} vs {bound}", b.t);
            assert!(!b.series.is_empty());
        }
        other => panic!("expected blow-up, got {:?}", other.map(|o| o.state.t)),
    }
}

#[test]
fn boundary_ring_monitor_fires() {
    let g = grid(2.0, 32);
    let u0 = ScalarField::gaussian(g, 1.0, 1.0, [0.0; 3]);
    let mut it = Integrator::new(g, &heat(), DiffusionModel::linear(), cfg()).unwrap();
    assert!(matches!(it.run(u0, 1.0, 10, |_, _| {}), Err(IntegratorError::BoundaryReached { .. })));
}

#[test]
fn semi_implicit_theta_stays_positive() {
    let g = grid(6.0, 64);
    let u0 = ScalarField::gaussian(g, 2.0, 4.0, [0.0; 3]);
    let c = StepperConfig { diff_theta: 0.5, dt_max: 0.01, ..Default::default() };
    let mut it = Integrator::new(g, &pks(), DiffusionModel::linear(), c).unwrap();
    let out = it.run(u0, 0.1, 10, |s, _| assert!(s.u.is_nonnegative())).unwrap();
    assert!((out.series.last().unwrap().mass - 2.0).abs() < 1e-6);
}

#[test]
fn long_runs_end_without_a_sliver_step() {
    let g = grid(8.0, 16);
    let u0 = ScalarField::gaussian(g, 1.0, 1.0, [0.0; 3]);
    let c = StepperConfig { dt_max: 0.1, ring_tol: 1.0, ..Default::default() };
    let mut it = Integrator::new(g, &heat(), DiffusionModel::linear(), c).unwrap();
    let out = it.run(u0, 100.0, 1, |_, _| {}).unwrap();
    assert_eq!(out.state.t, 100.0);
    assert_eq!(out.state.step_count, 1000);
    assert!(out.series.windows(2).all(|w| w[1].t - w[0].t > 1e-3));
}
