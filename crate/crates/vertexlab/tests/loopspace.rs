use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use vertexlab::error::Error;
use vertexlab::loopspace::*;

const L: f64 = 2.0 * PI;

fn real_loop(l: f64, w: i64, mean: f64, coeffs: &[(f64, f64)]) -> LoopFunction {
    let mut modes = BTreeMap::new();
    for (k, &(re, im)) in coeffs.iter().enumerate() {
        let n = k as i64 + 1;
        modes.insert(n, C64::new(re, im));
        modes.insert(-n, C64::new(re, -im));
    }
    LoopFunction { l, winding: w as f64, mean: C64::new(mean, 0.0), modes, nu0: None }
}

fn arb_loop(l: f64) -> impl Strategy<Value = LoopFunction> {
    (-2i64..=2, -3.0..3.0f64, prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6))
        .prop_map(move |(w, m, c)| real_loop(l, w, m, &c))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

#[test]
fn pure_winding_decomposes_to_unit_winding() {
    let f = decompose_loop(L, |x| C64::new(x, 0.0), 8, 64, None).unwrap();
    assert_eq!(f.winding, 1.0);
    assert!(f.mean.norm() < 1e-14);
    assert!(f.modes.is_empty());

    let l = 3.0;
    let g = decompose_loop(l, |x| C64::new(2.0 * PI * x / l, 0.0), 8, 64, None).unwrap();
    assert_eq!(g.winding, 1.0);
    assert!(g.modes.is_empty());
}

#[test]
fn constant_decomposes_to_mean() {
    let c = C64::new(0.7, -0.2);
    let f = decompose_loop(L, |_| c, 8, 64, None).unwrap();
    assert_eq!(f.winding, 0.0);
    assert!((f.mean - c).norm() < 1e-15);
    assert!(f.modes.is_empty());
}

#[test]
fn half_winding_rejected_unless_anyonic() {
    let half = |x: f64| C64::new(0.5 * x, 0.0);
    assert!(matches!(decompose_loop(L, half, 4, 32, None), Err(Error::NonIntegerWinding(_))));
    let f = decompose_loop(L, half, 4, 32, Some(0.5)).unwrap();
    assert!((f.winding - 0.5).abs() < 1e-12);
}

#[test]
fn blip_modes_match_sampled_step_profile() {
    let (y, eps) = (0.4, 0.3);
    let f = blip(L, y, eps).unwrap();
    // lift of π·sgn_ε(x − y) continued across the cut at the dropped winding
    let lift = |x: f64| {
        let k = 2.0 * PI / L;
        let u = C64::from_polar((-k * eps).exp(), k * (x - y));
        C64::new(k * (x - y) - 2.0 * (C64::new(1.0, 0.0) - u).arg(), 0.0)
    };
    let d = decompose_loop(L, lift, 40, 1024, None).unwrap();
    assert_eq!(d.winding, 1.0);
    assert!((d.mean - f.mean).norm() < 1e-12);
    for n in 1..=40 {
        assert!((d.mode(n) - f.mode(n)).norm() < 1e-12, "mode {n}");
        assert!((d.mode(-n) - f.mode(-n)).norm() < 1e-12, "mode {}", -n);
    }
    let lam = (-eps).exp();
    let expected = C64::new(0.0, -L) * C64::from_polar(lam.powi(3) / 3.0, -3.0 * y);
    assert!((f.alpha_hat(3) - expected).norm() < 1e-14);
}

#[test]
fn cocycle_examples() {
    let f = real_loop(L, 1, 0.3, &[(0.2, -0.1), (0.05, 0.4)]);
    assert!(cocycle_s(&f, &f).norm() < 1e-15);
    let c = C64::new(1.25, 0.0);
    let s = cocycle_s(&LoopFunction::winding_only(L, 1.0), &LoopFunction::constant(L, c));
    assert!((s - c).norm() < 1e-15);
}

#[test]
fn tilde_s_examples() {
    let f = real_loop(L, 0, 0.0, &[(0.3, 0.2)]);
    let t = cocycle_tilde_s(&f, &f);
    assert!(t.re.abs() < 1e-15);
    assert!((t - s_hat(&f.minus_part(), &f.plus_part()) * 2.0).norm() < 1e-15);
    // Im S̃(f,f) < 0 in the stored convention; see the notes on sign conventions
    assert!(t.im < 0.0);
    let a = LoopFunction::winding_only(L, 1.0);
    let b = LoopFunction::winding_only(L, -2.0);
    assert_eq!(cocycle_tilde_s(&a, &b), C64::new(0.0, 0.0));
}

#[test]
fn regulator_must_be_positive() {
    assert!(matches!(blip(L, 0.0, 0.0), Err(Error::NonPositiveRegulator(_))));
    assert!(matches!(smoothed_delta(L, 0.0, -1.0), Err(Error::NonPositiveRegulator(_))));
    assert!(sgn_eps(L, 0.3, 0.0).is_err());
}

#[test]
fn smoothed_delta_has_unit_integral() {
    let d = smoothed_delta(L, 0.2, 0.15).unwrap();
    assert!((d.mean - C64::new(1.0 / L, 0.0)).norm() < 1e-16);
    let gl = vertexlab::quad::Legendre::new(32);
    let total = gl.integrate_panels(-L / 2.0, L / 2.0, 32, |x| d.eval(x));
    assert!((total - 1.0).norm() < 1e-12);
}

#[test]
fn smoothed_delta_is_minus_y_derivative_of_blip() {
    let (y, eps, h) = (0.3, 0.2, 1e-4);
    let d = smoothed_delta(L, y, eps).unwrap();
    for &x in &[-2.0, -0.4, 0.31, 1.7] {
        let fd = (blip(L, y + h, eps).unwrap().eval(x) - blip(L, y - h, eps).unwrap().eval(x)) / (2.0 * h);
        assert!((fd / (-2.0 * PI) - d.eval(x)).norm() < 1e-6, "x = {x}");
    }
}

#[test]
fn anyon_blip_unit_one_is_blip() {
    let a = anyon_blip(L, 0.7, 0.1, 1.0).unwrap();
    let b = blip(L, 0.7, 0.1).unwrap();
    assert_eq!(a.winding, b.winding);
    assert!((a.mean - b.mean).norm() < 1e-15);
    assert_eq!(a.modes, b.modes);
    let s = anyon_blip(L, 0.7, 0.1, 0.5).unwrap();
    assert_eq!(s.winding, 2.0);
    assert!((s.mean.re + 2.0 * PI * 0.5 * 0.7 / L).abs() < 1e-15);
}

#[test]
fn anyon_loop_requires_integer_ratio() {
    let p = BlipParams { y: 0.0, eps: 0.1, nu: 0.75, nu0: 0.5 };
    assert!(matches!(anyon_loop(L, &p), Err(Error::NotMultipleOfUnit { .. })));
    let p = BlipParams { nu: 1.5, ..p };
    assert_eq!(anyon_loop(L, &p).unwrap().winding, 3.0);
}

#[test]
fn kernel_examples() {
    let eps = 0.2;
    let b0 = kernel_b(0.0, &KernelParams::new(L, eps, 0.0).unwrap()).unwrap();
    let expect = 2.0 * (-PI * eps / L).exp() * (PI * eps / L).sinh();
    assert!((b0 - C64::new(expect, 0.0)).norm() < 1e-15);
    let tiny = kernel_b(0.0, &KernelParams::new(L, 1e-9, 0.0).unwrap()).unwrap();
    assert!(tiny.norm() < 1e-9);
    for &r in &[-2.9, -1.0, 0.4, 2.2] {
        let b = kernel_b(r, &KernelParams::new(L, 0.0, 0.0).unwrap()).unwrap();
        assert!((b.norm() - 2.0 * (PI * r / L).sin().abs()).abs() < 1e-14);
    }
    assert!(matches!(KernelParams::new(L, 0.1, 1.0), Err(Error::NomeOutOfRange(_))));
    assert_eq!(thermal_product(0.3, &KernelParams::new(L, 0.1, 0.0).unwrap()), 1.0);
}

#[test]
fn thermal_product_matches_direct_product() {
    let (eps, q, r) = (0.1, 0.4, 0.9);
    let p = KernelParams::new(L, eps, q).unwrap();
    let lam = (-2.0 * PI * eps / L).exp();
    let c = (2.0 * PI * r / L).cos();
    let direct: f64 = (1..200).map(|n| 1.0 - 2.0 * q.powi(2 * n) * lam * c + q.powi(4 * n) * lam * lam).product();
    assert!((thermal_product(r, &p) - direct).abs() < 1e-15);
}

#[test]
fn kernel_power_branch_matches_integer_powers() {
    let p = KernelParams::new(L, 0.05, 0.2).unwrap();
    for &r in &[-2.0, 0.5, 2.5] {
        let b = kernel_b(r, &p).unwrap();
        assert!(close(kernel_b_pow(r, &p, 1.0).unwrap(), b, 1e-13));
        assert!(close(kernel_b_pow(r, &p, 2.0).unwrap(), b * b, 1e-13));
    }
}

#[test]
fn sgn_examples() {
    assert!(sgn_eps(L, 0.0, 0.1).unwrap().norm() < 1e-16);
    let e = 0.01 * L;
    let v = sgn_eps(L, L / 4.0, e).unwrap().re;
    // exact closed form, about 0.9806; not within 1e-3 of one at this regulator
    let k = 2.0 * PI / L;
    let u = C64::from_polar((-k * e).exp(), k * L / 4.0);
    let oracle = (PI / 2.0 - 2.0 * (C64::new(1.0, 0.0) - u).arg()) / PI;
    assert!((v - oracle).abs() < 1e-15);
    assert!((v - 0.9806).abs() < 1e-3);
    assert!((sgn_eps(L, L / 4.0, 1e-6).unwrap().re - 1.0).abs() < 1e-5);
}

#[test]
fn loop_record_roundtrip() {
    let f = blip_tol(L, 0.3, 0.5, 1e-8).unwrap();
    let rec = f.to_record();
    let json = serde_json::to_string(&rec).unwrap();
    assert!(json.contains("\"L\""));
    let back = LoopFunction::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back.winding, f.winding);
    for (n, c) in &f.modes {
        assert!((back.mode(*n) - c).norm() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn s_is_antisymmetric(f in arb_loop(L), g in arb_loop(L)) {
        prop_assert!((cocycle_s(&f, &g) + cocycle_s(&g, &f)).norm() < 1e-13);
    }

    #[test]
    fn cocycle_identity_mod_4pi(f in arb_loop(L), g in arb_loop(L), h in arb_loop(L)) {
        let d = cocycle_s(&f, &g) + cocycle_s(&f.add(&g), &h) - cocycle_s(&f, &g.add(&h)) - cocycle_s(&g, &h);
        let p = 4.0 * PI;
        let re = d.re - p * (d.re / p).round();
        prop_assert!(C64::new(re, d.im).norm() < 1e-10);
    }

    #[test]
    fn mode_sum_matches_integral(l in 1.0..10.0f64, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
            let c: Vec<(f64, f64)> = (0..5).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            real_loop(l, rng.gen_range(-2..=2), rng.gen_range(-2.0..2.0), &c)
        };
        let (f, g) = (mk(&mut rng), mk(&mut rng));
        let a = cocycle_s(&f, &g);
        let b = cocycle_s_integral(&f, &g, 32, 16);
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn pure_modes_pair_only_opposite(p in -6i64..=6, q in -6i64..=6) {
        prop_assume!(p != 0 && q != 0);
        let mut a = LoopFunction::zero(L);
        a.modes.insert(p, C64::new(1.0, 0.0));
        let mut b = LoopFunction::zero(L);
        b.modes.insert(q, C64::new(1.0, 0.0));
        let s = s_hat(&a, &b);
        if q != -p { prop_assert_eq!(s, C64::new(0.0, 0.0)); }
        else { prop_assert!((s - C64::new(0.0, p as f64)).norm() < 1e-15); }
    }

    #[test]
    fn tilde_s_conjugation(f in arb_loop(L), g in arb_loop(L)) {
        let t = cocycle_tilde_s(&f, &g);
        prop_assert!((t + cocycle_tilde_s(&g, &f).conj()).norm() < 1e-12);
        // Re S̃ is the cocycle itself
        prop_assert!((t.re - cocycle_s(&f, &g).re).abs() < 1e-12);
    }

    #[test]
    fn blip_relations(y in -3.0..3.0f64, yp in -3.0..3.0f64, e in 0.05..0.6f64, ep in 0.05..0.6f64) {
        let f = blip(L, y, e).unwrap();
        let g = blip(L, yp, ep).unwrap();
        let a = cocycle_s(&f.minus_part(), &g.plus_part());
        prop_assert!((a - alpha_plus_closed(L, yp, e + ep, y)).norm() < 1e-10);
        let s = cocycle_s(&f, &g);
        prop_assert!((s - sgn_eps(L, y - yp, e + ep).unwrap() * PI).norm() < 1e-10);
        let d = smoothed_delta(L, y, e).unwrap();
        prop_assert!((cocycle_s(&d.minus_part(), &g.plus_part()) + delta_pm_closed(L, yp, e + ep, y, 1)).norm() < 1e-10);
        prop_assert!((cocycle_s(&d.plus_part(), &g.minus_part()) + delta_pm_closed(L, yp, e + ep, y, -1)).norm() < 1e-10);
    }

    #[test]
    fn anyon_blip_self_cocycle(y in -3.0..3.0f64, e in 0.05..0.6f64, units in 1u32..5) {
        let nu0 = 1.0 / units as f64;
        let a = anyon_blip(L, y, e, nu0).unwrap();
        let b = blip(L, y, e).unwrap();
        prop_assert!((cocycle_s(&a, &a) - cocycle_s(&b, &b)).norm() < 1e-12);
    }

    #[test]
    fn sgn_is_odd_and_bounded(r in -3.1..3.1f64, e in 0.001..1.0f64) {
        let a = sgn_eps(L, r, e).unwrap().re;
        let b = sgn_eps(L, -r, e).unwrap().re;
        prop_assert!((a + b).abs() < 1e-14);
        prop_assert!(a.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn kernel_modulus_and_periodic_product(r in -3.0..3.0f64, e in 0.0..0.5f64, q in 0.0..0.6f64) {
        let p = KernelParams::new(L, e, q).unwrap();
        let b = kernel_b(r, &p).unwrap();
        let b0 = kernel_b(r, &KernelParams::new(L, e, 0.0).unwrap()).unwrap();
        prop_assert!(close(b, b0 * thermal_product(r, &p), 1e-14));
        prop_assert!(thermal_product(r, &p) > 0.0);
        prop_assert!((thermal_product(r + L, &p) - thermal_product(r, &p)).abs() < 1e-12);
    }
}
