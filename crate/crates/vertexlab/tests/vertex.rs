use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use vertexlab::error::Error;
use vertexlab::fock::*;
use vertexlab::loopspace::{cocycle_s, kernel_b_pow, BlipParams, KernelParams, LoopFunction};
use vertexlab::vertex::*;

const L: f64 = 2.0 * PI;

fn real_loop(w: i64, mean: f64, coeffs: &[(f64, f64)]) -> LoopFunction {
    let mut modes = BTreeMap::new();
    for (k, &(re, im)) in coeffs.iter().enumerate() {
        let n = k as i64 + 1;
        modes.insert(n, C64::new(re, im));
        modes.insert(-n, C64::new(re, -im));
    }
    LoopFunction { l: L, winding: w as f64, mean: C64::new(mean, 0.0), modes, nu0: None }
}

/// `e^{iA}v` by Taylor series, truncated to `trunc`.
fn exp_i(op: impl Fn(&FockVector<C64>) -> FockVector<C64>, v: &FockVector<C64>, trunc: &TruncationSpec, order: usize) -> FockVector<C64> {
    let mut term = v.clone();
    let mut acc = v.clone();
    for k in 1..=order {
        term = trunc.project(&op(&term)).kept.scale(&C64::new(0.0, 1.0 / k as f64));
        acc = acc.add(&term);
    }
    acc
}

/// `e^{idΓ(α⁺)} e^{idΓ(α⁻)}` on a zero-winding, zero-mean loop by brute-force series.
fn brute_implementer(f: &LoopFunction, v: &FockVector<C64>, trunc: &TruncationSpec) -> FockVector<C64> {
    let plus = f.plus_part();
    let minus = f.minus_part();
    let big = TruncationSpec { lambda: trunc.lambda + 8, ..*trunc };
    let a = exp_i(|x| apply_dgamma(&minus, x).unwrap(), v, &big, 30);
    let b = exp_i(|x| apply_dgamma(&plus, x).unwrap(), &a, &big, 30);
    trunc.project(&b).kept
}

fn arb_state(max_level: u64) -> impl Strategy<Value = FockBasisState> {
    (0..=max_level, -1i64..=1, any::<u64>()).prop_map(|(lvl, w, pick)| {
        let parts = partitions(lvl);
        FockBasisState::new(parts[(pick % parts.len() as u64) as usize].clone(), w)
    })
}

#[test]
fn normal_ordered_vacuum_expectation_is_one() {
    let f = real_loop(0, 0.0, &[(0.3, 0.1), (-0.2, 0.4)]);
    let x = ImplementerSpec::plain(f).unwrap();
    let vac = FockBasisState::vacuum();
    assert!((implementer_matrix_element(&x, &vac, &vac) - 1.0).norm() < 1e-15);
    let y = ImplementerSpec::plain(real_loop(1, 0.0, &[(0.3, 0.1)])).unwrap();
    assert_eq!(implementer_matrix_element(&y, &vac, &vac), C64::new(0.0, 0.0));
}

#[test]
fn unordered_vacuum_expectation() {
    let f = real_loop(0, 0.0, &[(0.3, 0.1), (-0.2, 0.4)]);
    let s = cocycle_s(&f.minus_part(), &f.plus_part());
    let want = (C64::new(0.0, -0.5) * s).exp();
    assert!((vacuum_expectation_unordered(&f) - want).norm() < 1e-15);
    // a positive-definite form: the vacuum overlap has modulus below one
    assert!(vacuum_expectation_unordered(&f).norm() < 1.0);
    assert_eq!(vacuum_expectation_unordered(&real_loop(1, 0.0, &[])), C64::new(0.0, 0.0));
}

#[test]
fn first_order_element_of_single_mode() {
    for n in 1..=3usize {
        let mut f = LoopFunction::zero(L);
        let c = C64::new(0.35, -0.2);
        f.modes.insert(n as i64, c);
        f.modes.insert(-(n as i64), c.conj());
        let x = ImplementerSpec::plain(f).unwrap();
        let bra = FockBasisState::vacuum().with_m(n, 1);
        let el = implementer_matrix_element(&x, &bra, &FockBasisState::vacuum());
        assert!((el - C64::new(0.0, 1.0) * c * n as f64).norm() < 1e-15);
    }
}

#[test]
fn per_mode_overlaps_match_series() {
    let trunc = TruncationSpec::single(5);
    let f = real_loop(0, 0.0, &[(0.3, 0.1), (-0.2, 0.25), (0.05, -0.1)]);
    let x = ImplementerSpec::plain(f.clone()).unwrap();
    let op = implementer_operator(&x, &trunc);
    for (j, ket) in op.basis.iter().enumerate() {
        let brute = brute_implementer(&f, &FockVector::basis(ket.clone()), &trunc);
        for (i, bra) in op.basis.iter().enumerate() {
            let d = (op.coeff(i, j) - brute.coeff(bra)).norm();
            assert!(d < 1e-12, "{bra:?} <- {ket:?}: {d:e}");
        }
    }
}

#[test]
fn single_factor_prefactor_is_one() {
    let a = ImplementerSpec::anyon(L, BlipParams { y: 0.3, eps: 0.1, nu: 0.5, nu0: 0.5 }).unwrap();
    let p = normal_order_product(&[a.clone()]).unwrap();
    assert_eq!(p.prefactor, C64::new(1.0, 0.0));
    assert_eq!(p.merged, a.lp);
    assert!(normal_order_product(&[]).is_err());
}

#[test]
fn two_anyon_prefactor_is_kernel_power() {
    for &(nu, nup) in &[(0.5, -0.5), (1.0, 1.0), (1.5, -1.0), (-1.0, 0.5)] {
        let (x, y, e, ep) = (0.9, -0.4, 0.07, 0.12);
        let a = ImplementerSpec::anyon(L, BlipParams { y: x, eps: e, nu, nu0: 0.5 }).unwrap();
        let b = ImplementerSpec::anyon(L, BlipParams { y, eps: ep, nu: nup, nu0: 0.5 }).unwrap();
        let got = normal_order_product(&[a, b]).unwrap().prefactor;
        let want = kernel_b_pow(x - y, &KernelParams::new(L, e + ep, 0.0).unwrap(), nu * nup).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm(), "ν={nu}, ν′={nup}");
    }
}

#[test]
fn coincident_unregularized_points_rejected() {
    let mut a = ImplementerSpec::blip(L, 0.2, 0.1, 1).unwrap();
    let mut b = ImplementerSpec::blip(L, 0.2, 0.1, -1).unwrap();
    a.kind = ImplementerKind::Blip { y: 0.2, eps: 0.0, sign: 1 };
    b.kind = ImplementerKind::Blip { y: 0.2, eps: 0.0, sign: -1 };
    assert!(matches!(normal_order_product(&[a, b]), Err(Error::Singular(_))));
    let bad = [FieldInsertion { nu: 1.0, y: 0.0, eps: 0.0 }, FieldInsertion { nu: -1.0, y: 0.0, eps: 0.0 }];
    assert!(anyon_correlator(L, &bad, 0.0).is_err());
}

#[test]
fn correlator_examples() {
    for &nu in &[0.5, 1.0, 1.5, 2.0] {
        let (x, y, e) = (1.1, -0.3, 0.05);
        let f = [FieldInsertion { nu, y: x, eps: e }, FieldInsertion { nu: -nu, y, eps: e }];
        let got = anyon_correlator(L, &f, 0.0).unwrap();
        let want = kernel_b_pow(x - y, &KernelParams::new(L, 2.0 * e, 0.0).unwrap(), -nu * nu).unwrap();
        assert!((got - want).norm() < 1e-14 * want.norm());
    }
    let f = [FieldInsertion { nu: 1.0, y: 0.0, eps: 0.1 }, FieldInsertion { nu: -0.5, y: 1.0, eps: 0.1 }];
    assert_eq!(anyon_correlator(L, &f, 0.0).unwrap(), C64::new(0.0, 0.0));
    assert_eq!(anyon_correlator(L, &f, 0.3).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn four_point_fermion_correlator_matches_chain() {
    let eps = 0.1;
    let ys = [-2.1, -0.6, 0.8, 2.2];
    let signs = [1, -1, 1, -1];
    let specs: Vec<ImplementerSpec> = ys.iter().zip(signs).map(|(&y, s)| ImplementerSpec::blip(L, y, eps, s).unwrap()).collect();
    let ins: Vec<FieldInsertion> = ys.iter().zip(signs).map(|(&y, s)| FieldInsertion { nu: s as f64, y, eps }).collect();
    let closed = anyon_correlator(L, &ins, 0.0).unwrap();
    let lam = (-2.0 * PI * 2.0 * eps / L).exp();
    let nmax = vertexlab::loopspace::blip_cutoff(lam, 1e-14) as usize;
    let chain = vacuum_chain_mode_truncated(&specs, ModeTruncation { nmax, occupation_cap: 12 });
    assert!((chain - closed).norm() < 1e-7 * closed.norm(), "{chain} vs {closed}");
    // the level-truncated chain converges from below in Λ
    let e6 = (vacuum_chain_level_truncated(&specs, &TruncationSpec::new(6, -1, 1).unwrap()) - closed).norm();
    let e9 = (vacuum_chain_level_truncated(&specs, &TruncationSpec::new(9, -1, 1).unwrap()) - closed).norm();
    assert!(e9 < e6);
}

#[test]
fn exchange_ratio_matches_sign_phase() {
    let a = ImplementerSpec::anyon(L, BlipParams { y: 0.9, eps: 0.05, nu: 1.5, nu0: 0.5 }).unwrap();
    let b = ImplementerSpec::anyon(L, BlipParams { y: -1.2, eps: 0.08, nu: -0.5, nu0: 0.5 }).unwrap();
    let r = exchange_ratio(&a, &b).unwrap();
    let w = exchange_phase_closed(L, 1.5, 0.9, 0.05, -0.5, -1.2, 0.08).unwrap();
    assert!((r - w).norm() < 1e-13);
    // fermion pairs anticommute up to the regulator
    let f = ImplementerSpec::blip(L, 0.9, 1e-4, 1).unwrap();
    let g = ImplementerSpec::blip(L, -1.2, 1e-4, 1).unwrap();
    assert!((exchange_ratio(&f, &g).unwrap() + 1.0).norm() < 1e-3);
}

#[test]
fn first_quantized_vacuum_conditions() {
    let t0 = TruncationSpec::single(0);
    let t1 = TruncationSpec::new(8, -1, 1).unwrap();
    for &eps in &[0.4, 0.1] {
        let lam = (-2.0 * PI * eps / L).exp();
        for j in -3..=3i64 {
            let plus = smeared_field(L, Charge::Plus, j, eps, &t1, &t0, 256).unwrap().apply(&FockVector::vacuum());
            let minus = smeared_field(L, Charge::Minus, j, eps, &t1, &t0, 256).unwrap().apply(&FockVector::vacuum());
            if j < 0 {
                assert!(plus.is_zero());
                assert!((minus.norm_sqr().sqrt() - lam.powi((-j - 1) as i32)).abs() < 1e-12);
            } else {
                assert!(minus.is_zero());
                assert!((plus.norm_sqr().sqrt() - lam.powi(j as i32)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn car_defect_small_for_wide_smearing() {
    // at fixed Λ the defect grows as ε shrinks; only wide smearing stays inside the truncation
    let trunc = TruncationSpec::single(5);
    let wide = car_residual(L, 0, 0, L, &trunc, 2).unwrap();
    let narrow = car_residual(L, 0, 0, 0.3 * L, &trunc, 2).unwrap();
    assert!(wide.0 < 1e-2 && wide.1 < 1e-4, "{wide:?}");
    assert!(narrow.0 > wide.0 && narrow.1 > wide.1);
}

#[test]
fn vacuum_anticommutator_tends_to_overlap() {
    let t1 = TruncationSpec::new(6, -1, 1).unwrap();
    let vac = FockVector::<C64>::vacuum();
    let mut prev = f64::INFINITY;
    for &eps in &[0.8, 0.4, 0.2, 0.1] {
        let fp = smeared_field(L, Charge::Plus, 1, eps, &t1, &t1, 256).unwrap();
        let gm = smeared_field(L, Charge::Minus, 1, eps, &t1, &t1, 256).unwrap();
        let a = fp.apply(&gm.apply(&vac)).add(&gm.apply(&fp.apply(&vac)));
        let d = (a.coeff(&FockBasisState::vacuum()) - 1.0).norm();
        assert!(d < prev, "ε={eps}: {d}");
        prev = d;
    }
    assert!(prev < 0.2);
}

#[test]
fn correlator_csv_lists_inputs() {
    let rows = vec![vec![FieldInsertion { nu: 1.0, y: 0.1, eps: 0.1 }, FieldInsertion { nu: -1.0, y: -0.1, eps: 0.1 }]];
    let csv = correlator_csv(L, &rows, 0.0).unwrap();
    assert!(csv.starts_with("nu_1,y_1,eps_1,nu_2,y_2,eps_2,re,im\n"));
    assert_eq!(csv.lines().count(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exchange_law(nu in -3i64..=3, nup in -3i64..=3, x in -3.0..3.0f64, y in -3.0..3.0f64, e in 0.02..0.3f64, ep in 0.02..0.3f64) {
        prop_assume!((x - y).abs() > 1e-3);
        let (nu, nup) = (nu as f64 * 0.5, nup as f64 * 0.5);
        let a = ImplementerSpec::anyon(L, BlipParams { y: x, eps: e, nu, nu0: 0.5 }).unwrap();
        let b = ImplementerSpec::anyon(L, BlipParams { y, eps: ep, nu: nup, nu0: 0.5 }).unwrap();
        let ab = normal_order_product(&[a.clone(), b.clone()]).unwrap();
        let ba = normal_order_product(&[b.clone(), a.clone()]).unwrap();
        let w = exchange_phase_closed(L, nu, x, e, nup, y, ep).unwrap();
        prop_assert!((ab.prefactor - ba.prefactor * w).norm() < 1e-12 * ab.prefactor.norm());
        prop_assert_eq!(ab.merged.winding, ba.merged.winding);
        for (n, c) in &ab.merged.modes {
            prop_assert!((ba.merged.mode(*n) - c).norm() < 1e-15);
        }
    }

    #[test]
    fn merging_is_associative(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let specs: Vec<ImplementerSpec> = (0..3).map(|_| ImplementerSpec::anyon(L, BlipParams {
            y: rng.gen_range(-3.0..3.0), eps: rng.gen_range(0.05..0.3), nu: rng.gen_range(-2i64..=2) as f64 * 0.5, nu0: 0.5,
        }).unwrap()).collect();
        let all = normal_order_product(&specs).unwrap();
        let left = normal_order_product(&specs[..2]).unwrap();
        let right = normal_order_product(&specs[1..]).unwrap();
        // prefactor of (12)3 and 1(23) split through the pairwise factors
        let p13 = normal_order_product(&[specs[0].clone(), specs[2].clone()]).unwrap().prefactor;
        prop_assert!((all.prefactor - left.prefactor * right.prefactor * p13).norm() < 1e-12 * all.prefactor.norm());
        let closed = normal_order_prefactor_closed(&specs, L).unwrap();
        prop_assert!((all.prefactor - closed).norm() < 1e-11 * closed.norm());
    }

    #[test]
    fn charge_selection(bra in arb_state(4), ket in arb_state(4), w in -1i64..=1) {
        let f = real_loop(w, 0.4, &[(0.2, 0.1), (0.1, -0.3)]);
        let x = ImplementerSpec::plain(f).unwrap();
        let el = implementer_matrix_element(&x, &bra, &ket);
        if bra.w != ket.w + w { prop_assert_eq!(el, C64::new(0.0, 0.0)); }
    }

    #[test]
    fn adjoint_is_reversed_loop(bra in arb_state(4), ket in arb_state(4), w in -1i64..=1, m in -1.0..1.0f64) {
        let f = real_loop(w, m, &[(0.2, 0.1), (0.1, -0.3), (-0.05, 0.2)]);
        let x = ImplementerSpec::plain(f.clone()).unwrap();
        let xr = ImplementerSpec::plain(f.neg()).unwrap();
        let a = implementer_matrix_element(&x, &bra, &ket);
        let b = implementer_matrix_element(&xr, &ket, &bra).conj();
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }
}
