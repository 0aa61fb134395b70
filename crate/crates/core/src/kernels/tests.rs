use super::*;
use crate::grid::GridSpec;
use std::f64::consts::PI;

fn newton(d: usize) -> Kernel<f64> {
    Kernel::newtonian(d).unwrap()
}

fn log_sampled(f: impl Fn(f64) -> f64) -> Tabulated<f64> {
    let r: Vec<f64> = (0..=400).map(|i| 10f64.powf(-7.0 + 8.0 * i as f64 / 400.0)).collect();
    let k = r.iter().map(|&x| f(x)).collect();
    Tabulated::new(r, k).unwrap()
}

#[test]
fn eval_examples() {
    assert_eq!(newton(2).eval(1.0).unwrap(), 0.0);
    assert!((newton(3).eval(1.0).unwrap() - 0.079_577_471_545_947_67).abs() < 1e-15);
    let p = Kernel::<f64>::power_law(3, 1.0).unwrap();
    assert!((p.eval(2.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(matches!(newton(2).eval(0.0), Err(KernelError::Radius(_))));
    assert!(newton(3).eval(-1.0).is_err());
    assert!(Kernel::<f64>::newtonian(4).is_err());
}

#[test]
fn derivative_examples() {
    assert!((newton(2).grad_radial(1.0).unwrap() + 1.0 / (2.0 * PI)).abs() < 1e-15);
    for r in [1e-3, 0.1, 1.0, 7.5, 300.0] {
        for d in [2, 3] {
            let k = newton(d);
            let scale = k.second_derivative(r).unwrap().abs();
            assert!(k.lap(r).unwrap().abs() <= 1e-12 * scale.max(1.0), "d={d} r={r}");
        }
        let l = Kernel::logarithmic(2, 1.0).unwrap();
        assert!((r * l.grad_radial(r).unwrap() + 1.0).abs() < 1e-14);
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let kernels = [newton(2), newton(3), Kernel::power_law(3, 0.5).unwrap(), Kernel::logarithmic(2, 2.0).unwrap()];
    for k in &kernels {
        for r in [0.05, 0.7, 3.0] {
            let dr = 1e-5 * r;
            let fd = (k.eval(r + dr).unwrap() - k.eval(r - dr).unwrap()) / (2.0 * dr);
            assert!((fd / k.grad_radial(r).unwrap() - 1.0).abs() < 1e-7);
            let fd2 = (k.grad_radial(r + dr).unwrap() - k.grad_radial(r - dr).unwrap()) / (2.0 * dr);
            assert!((fd2 / k.second_derivative(r).unwrap() - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn critical_exponents() {
    let n3 = newton(3).critical_exponent();
    assert_eq!(n3.m_star, 4.0 / 3.0);
    assert_eq!(n3.p, Some(3.0));
    let n2 = newton(2).critical_exponent();
    assert_eq!(n2.m_star, 1.0);
    assert_eq!(n2.m_star, 2.0 - 2.0 / 2.0);
    assert_eq!(n2.p, None);
    assert_eq!(Kernel::logarithmic(2, 1.0).unwrap().critical_exponent().m_star, 1.0);
    let p = Kernel::<f64>::power_law(3, 0.5).unwrap().critical_exponent();
    assert!((p.m_star - 7.0 / 6.0).abs() < 1e-15);
    assert!((p.p.unwrap() - 6.0).abs() < 1e-15);
    let steep = Kernel::power_law(3, 2.0).unwrap().critical_exponent();
    assert!(steep.clamped);
    assert_eq!(steep.m_star, 4.0 / 3.0);
    let smooth = Kernel::tabulated(2, log_sampled(|r| (-r * r).exp())).unwrap().critical_exponent();
    assert!(smooth.bounded);
    assert_eq!(smooth.m_star, 1.0);
}

#[test]
fn tabulated_singularity_detection() {
    match log_sampled(|r| -r.ln()).singularity() {
        Singularity::Logarithmic { c } => assert!((c - 1.0).abs() < 1e-3, "c={c}"),
        other => panic!("{other:?}"),
    }
    match log_sampled(|r| 3.0 * r.powf(-0.5)).singularity() {
        Singularity::Power { s } => assert!((s - 0.5).abs() < 1e-3, "s={s}"),
        other => panic!("{other:?}"),
    }
    assert_eq!(log_sampled(|r| 1.0 / (1.0 + r * r)).singularity(), Singularity::Bounded);
}

#[test]
fn tabulated_extrapolation_follows_fitted_law() {
    let t = log_sampled(|r| -r.ln());
    let k = Kernel::tabulated(2, t).unwrap();
    assert!((k.eval(1e-9).unwrap() - 9.0 * 10f64.ln()).abs() < 1e-3);
    let far = k.eval(100.0).unwrap();
    assert!((far + 100f64.ln()).abs() < 1e-2, "{far}");
    assert!(k.audit().monotone());
}

#[test]
fn tabulated_csv_parsing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    std::fs::write(&path, "r,k\n# comment\n0.5,2.0\n1.0,1.0\n2.0,0.5\n").unwrap();
    let t = Tabulated::<f64>::from_csv_path(&path).unwrap();
    assert_eq!(t.eval(1.0), 1.0);
    std::fs::write(&path, "0.5,2.0\n1.0,oops\n").unwrap();
    assert!(matches!(Tabulated::<f64>::from_csv_path(&path), Err(KernelError::Parse { line: 2, .. })));
    std::fs::write(&path, "1.0,2.0\n0.5,1.0\n").unwrap();
    assert!(Tabulated::<f64>::from_csv_path(&path).is_err());
}

#[test]
fn audit_flags_increasing_profile() {
    let bump = log_sampled(|r| r / (1.0 + r));
    let audit = Kernel::tabulated(2, bump).unwrap().audit();
    assert!(!audit.monotone());
    for k in [newton(2), newton(3), Kernel::power_law(3, 0.5).unwrap()] {
        let a = k.audit();
        assert!(a.monotone());
        assert!(a.second_derivative_constant.is_finite());
    }
}

#[test]
fn cutoff_shape() {
    assert_eq!(cutoff(0.0), 1.0);
    assert_eq!(cutoff(0.5), 1.0);
    assert!(cutoff(0.75) > 0.0 && cutoff(0.75) < 1.0);
    assert!(cutoff(0.999) >= 0.0);
    assert_eq!(cutoff(1.0), 0.0);
    assert_eq!(cutoff(3.0), 0.0);
}

#[test]
fn mollified_newtonian() {
    let k = newton(2);
    let m = k.mollify(0.1).unwrap();
    assert!(m.eval(0.0).unwrap().is_finite());
    assert_eq!(m.eval(1.5).unwrap(), k.eval(1.5).unwrap());
    // Mean value property: averaging a harmonic function over balls away from
    // the origin changes nothing.
    for r in [0.15, 0.3, 0.8] {
        assert!((m.eval(r).unwrap() - k.eval(r).unwrap()).abs() < 1e-6, "r={r}");
    }
    // Centre value: ∫ η(ρ) ρ k(ερ) dρ / ∫ η(ρ) ρ dρ by composite Simpson.
    let n = 200_000;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let rho = i as f64 / n as f64;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let eta = cutoff(rho) * rho;
        den += w * eta;
        if rho > 0.0 {
            num += w * eta * k.eval(0.1 * rho).unwrap();
        }
    }
    assert!((m.eval(0.0).unwrap() - num / den).abs() < 1e-6);
    let jump = m.grad_radial(1.0 - 1e-6).unwrap() - m.grad_radial(1.0 + 1e-6).unwrap();
    assert!(jump.abs() < 1e-3, "jump {jump}");
}

#[test]
fn mollify_rejects_bad_width() {
    for eps in [0.0, -0.1, 0.3] {
        assert!(matches!(newton(2).mollify(eps), Err(KernelError::Epsilon(_))));
    }
}

#[test]
fn mollified_bounded_kernel_converges() {
    for d in [2, 3] {
        let base = Kernel::tabulated(d, log_sampled(|r| (-r * r).exp())).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025] {
            let m = base.mollify(eps).unwrap();
            let err = (0..=200)
                .map(|i| i as f64 / 200.0)
                .map(|r| (m.eval(r).unwrap() - base.eval(r).unwrap()).abs())
                .fold(0.0, f64::max);
            assert!(err < last, "d={d} eps={eps} err={err}");
            last = err;
        }
        assert!(last < 2e-3);
    }
}

#[test]
fn mollified_3d_power_law_is_monotone() {
    let m = Kernel::power_law(3, 0.5).unwrap().mollify(0.1).unwrap();
    let mut prev = f64::INFINITY;
    for i in 0..=100 {
        let r = 0.1 + 0.9 * i as f64 / 100.0;
        let v = m.eval(r).unwrap();
        assert!(v <= prev + 1e-12);
        prev = v;
    }
}

#[test]
fn origin_cell_average_matches_refined_midpoint() {
    let h = 1.0 / 16.0;
    let k = newton(2);
    let avg = cell_average(2, h, |r| k.eval(r).unwrap()).unwrap();
    let n = 1024;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = -h / 2.0 + (i as f64 + 0.5) * h / n as f64;
            let y = -h / 2.0 + (j as f64 + 0.5) * h / n as f64;
            s += k.eval(x.hypot(y)).unwrap();
        }
    }
    let brute = s / (n * n) as f64;
    assert!((avg - brute).abs() < 1e-3 * brute.abs(), "{avg} vs {brute}");

    let k3 = newton(3);
    let avg3 = cell_average(3, h, |r| k3.eval(r).unwrap()).unwrap();
    let n = 128;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let c = |a: usize| -h / 2.0 + (a as f64 + 0.5) * h / n as f64;
                s += k3.eval((c(i).powi(2) + c(j).powi(2) + c(l).powi(2)).sqrt()).unwrap();
            }
        }
    }
    let brute3 = s / (n * n * n) as f64;
    assert!((avg3 / brute3 - 1.0).abs() < 1e-3, "{avg3} vs {brute3}");
    for d in [2, 3] {
        assert!((cell_average(d, 0.3f64, |_| 1.0).unwrap() - 1.0).abs() < 1e-13);
    }
}

#[test]
fn sample_table_is_even_and_exact_off_origin() {
    for d in [2, 3] {
        let g = GridSpec::new(d, 1.0, 16).unwrap();
        let t = sample_on_grid(&newton(d), &g).unwrap();
        let m = 32usize;
        let vals = t.values();
        for idx in 0..vals.len() {
            let mut rem = idx;
            let mut mirror = 0;
            let mut stride = 1;
            for _ in 0..d {
                let j = rem % m;
                rem /= m;
                mirror += ((m - j) % m) * stride;
                stride *= m;
            }
            assert_eq!(vals[idx].to_bits(), vals[mirror].to_bits());
        }
        let h = g.spacing();
        assert!((vals[1] - newton(d).eval(h).unwrap()).abs() < 1e-14);
    }
    let g = GridSpec::new(2, 0.5, 16).unwrap();
    let t = sample_on_grid(&newton(2), &g).unwrap();
    assert!((t[1] + (1.0 / 16.0f64).ln() / (2.0 * PI)).abs() < 1e-14);
}

#[test]
fn point_mass_convolution_reproduces_table() {
    let g = GridSpec::new(2, 1.0, 16).unwrap();
    let k = newton(2);
    let plan = convolution_plan(&k, &g).unwrap();
    let table = sample_on_grid(&k, &g).unwrap();
    let src = g.ravel([5, 9, 0]);
    let mut u = crate::grid::ScalarField::zeros(g);
    u[src] = 1.0 / g.cell_volume();
    let c = plan.apply(&u);
    for i in 0..g.len() {
        let a = g.unravel(i);
        let o0 = (a[0] as isize - 5).rem_euclid(32) as usize;
        let o1 = (a[1] as isize - 9).rem_euclid(32) as usize;
        assert!((c[i] - table[o0 + 32 * o1]).abs() < 1e-12);
    }
}

#[test]
fn kernel_spec_roundtrip() {
    for s in ["newtonian", "log:c=1.5", "power:s=0.5", "table:/tmp/k.csv"] {
        let spec: KernelSpec = s.parse().unwrap();
        assert_eq!(spec.to_string().parse::<KernelSpec>().unwrap(), spec);
    }
    assert_eq!("log:c=2".parse::<KernelSpec>().unwrap(), KernelSpec::Log { c: 2.0 });
    assert!("gauss".parse::<KernelSpec>().is_err());
    assert!("log:c=x".parse::<KernelSpec>().is_err());
}

#[test]
fn single_precision_kernels() {
    let k = Kernel::<f32>::newtonian(2).unwrap();
    assert!((k.grad_radial(1.0).unwrap() + 1.0 / (2.0 * std::f32::consts::PI)).abs() < 1e-7);
    let g = GridSpec::<f32>::new(2, 1.0, 16).unwrap();
    assert!(sample_on_grid(&k, &g).unwrap().values().iter().all(|v| v.is_finite()));
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]
    #[test]
    fn mollified_profile_monotone_beyond_width(eps in 0.03f64..0.25) {
        let m = newton(2).mollify(eps).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=60 {
            let r = eps + (1.2 - eps) * i as f64 / 60.0;
            let v = m.eval(r).unwrap();
            proptest::prop_assert!(v <= prev + 1e-10);
            prev = v;
        }
    }
}
