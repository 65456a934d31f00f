use num_complex::Complex64 as C64;
use num_traits::One;
use proptest::prelude::*;
use std::collections::BTreeMap;
use vertexlab::error::Error;
use vertexlab::fock::*;
use vertexlab::loopspace::{s_hat, LoopFunction};
use vertexlab::scalar::{Scalar, QC};

const L: f64 = 2.0 * std::f64::consts::PI;

/// Partition counts by the coin-change recurrence.
fn partition_count(n: usize) -> usize {
    let mut p = vec![0usize; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for k in part..=n {
            p[k] += p[k - part];
        }
    }
    p[n]
}

fn arb_state(max_level: u64) -> impl Strategy<Value = FockBasisState> {
    (0..=max_level, -2i64..=2, any::<u64>()).prop_map(|(lvl, w, pick)| {
        let parts = partitions(lvl);
        FockBasisState::new(parts[(pick % parts.len() as u64) as usize].clone(), w)
    })
}

fn commutator<S: Scalar>(a: i64, b: i64, v: &FockVector<S>) -> FockVector<S> {
    apply_rho(a, &apply_rho(b, v)).sub(&apply_rho(b, &apply_rho(a, v)))
}

#[test]
fn basis_sizes() {
    assert_eq!(enumerate_basis(&TruncationSpec::single(0)), vec![FockBasisState::vacuum()]);
    assert_eq!(enumerate_basis(&TruncationSpec::single(4)).len(), 12);
    // 1+1+2+3+5+7+11+15+22
    assert_eq!(enumerate_basis(&TruncationSpec::single(8)).len(), 67);
    assert_eq!(enumerate_basis(&TruncationSpec::single(6)).len(), 30);
    for lam in 0..=12u64 {
        let want: usize = (0..=lam as usize).map(partition_count).sum();
        assert_eq!(enumerate_basis(&TruncationSpec::new(lam, -1, 1).unwrap()).len(), 3 * want);
    }
}

#[test]
fn basis_is_sorted_and_unique() {
    let b = enumerate_basis(&TruncationSpec::new(7, -2, 1).unwrap());
    assert!(b.windows(2).all(|w| w[0] < w[1]));
    assert!(b.iter().all(|s| s.level() <= 7));
}

#[test]
fn rho_examples() {
    let vac = FockVector::<QC>::vacuum();
    for n in 0..5 {
        assert!(apply_rho(n, &vac).is_zero());
    }
    for n in 1..5 {
        let c = commutator(n, -n, &vac);
        assert_eq!(c, vac.scale(&QC::from_int(n)));
    }
    let v = apply_rho(-3, &vac);
    assert_eq!(v.inner(&v), QC::from_int(3));
}

#[test]
fn charge_and_shift_examples() {
    assert!(apply_q(&FockVector::<QC>::vacuum()).is_zero());
    let spec = TruncationSpec::new(5, -2, 2).unwrap();
    for b in enumerate_basis(&TruncationSpec::new(5, -1, 1).unwrap()) {
        let e = FockVector::<QC>::basis(b.clone());
        let lhs = apply_r(-1, &apply_q(&apply_r(1, &e)));
        assert_eq!(lhs, apply_q(&e).add(&e));
        for n in 1..4 {
            assert_eq!(apply_r(-1, &apply_rho(-n, &apply_r(1, &e))), apply_rho(-n, &e));
        }
        assert!(apply_r_checked(1, &e, &spec).is_ok());
    }
    let top = FockVector::<QC>::basis(FockBasisState::sector(2));
    assert!(matches!(apply_r_checked(1, &top, &spec), Err(Error::SectorOutOfRange(3, -2, 2))));
}

#[test]
fn dgamma_examples() {
    let mut minus = LoopFunction::zero(L);
    for n in 1..4 {
        minus.modes.insert(-n, C64::new(0.3 * n as f64, -0.1));
    }
    let vac = FockVector::<C64>::vacuum();
    assert!(apply_dgamma(&minus, &vac).unwrap().is_zero());
    // dΓ(α⁺)* has the same lowering content as dΓ(α⁻)
    let c = C64::new(0.4, 0.9);
    let k = FockVector::<C64>::basis(FockBasisState::new(vec![2, 1], 1));
    let d = apply_dgamma(&LoopFunction::constant(L, c), &k).unwrap();
    assert_eq!(d, apply_q(&k).scale(&c));
    assert!(matches!(apply_dgamma(&LoopFunction::winding_only(L, 1.0), &vac), Err(Error::NonzeroWinding(_))));
}

#[test]
fn schwinger_term() {
    let mut a = LoopFunction::zero(L);
    let mut b = LoopFunction::zero(L);
    for n in 1..4i64 {
        a.modes.insert(n, C64::new(0.2, 0.1 * n as f64));
        a.modes.insert(-n, C64::new(-0.3, 0.05));
        b.modes.insert(n, C64::new(0.1 * n as f64, 0.7));
        b.modes.insert(-n, C64::new(0.4, -0.2));
    }
    let v = FockVector::<C64>::basis(FockBasisState::new(vec![1, 0, 2], 0));
    let ab = apply_dgamma(&a, &apply_dgamma(&b, &v).unwrap()).unwrap();
    let ba = apply_dgamma(&b, &apply_dgamma(&a, &v).unwrap()).unwrap();
    let want = v.scale(&(C64::new(0.0, 1.0) * s_hat(&a, &b)));
    let diff = ab.sub(&ba).sub(&want);
    assert!(diff.terms.values().all(|c| c.norm() < 1e-13));
}

#[test]
fn projection_counts_dropped_weight() {
    let spec = TruncationSpec::single(2);
    let v = apply_rho(-3, &FockVector::<QC>::vacuum()).add(&FockVector::vacuum());
    let t = spec.project(&v);
    assert_eq!(t.dropped_terms, 1);
    assert_eq!(t.dropped_weight, 3.0);
    assert_eq!(t.kept, FockVector::vacuum());
}

#[test]
fn sparse_operator_export_and_loss() {
    let spec = TruncationSpec::single(3);
    let op = SparseOperator::<QC>::build(&spec, |v| apply_rho(-1, v));
    assert!(op.total_lost() > 0.0);
    let csv = op.to_csv();
    assert!(csv.starts_with("row,col,re,im\n"));
    let i = op.index[&FockBasisState::new(vec![1], 0)];
    let j = op.index[&FockBasisState::vacuum()];
    assert_eq!(op.coeff(i, j), QC::one());
    assert_eq!(op.matrix_element(i, j), QC::one());
    let dense = op.to_dense_orthonormal();
    assert_eq!(dense.nrows(), op.dim());
}

#[test]
fn basis_state_json_roundtrip() {
    let b = FockBasisState::new(vec![0, 2, 1], -1);
    let s = serde_json::to_string(&b).unwrap();
    assert_eq!(serde_json::from_str::<FockBasisState>(&s).unwrap(), b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn heisenberg_relations(b in arb_state(6), p in -5i64..=5, q in -5i64..=5) {
        prop_assume!(p != 0 && q != 0);
        let e = FockVector::<QC>::basis(b);
        let c = commutator(p, q, &e);
        let want = if p + q == 0 { e.scale(&QC::from_int(p)) } else { FockVector::zero() };
        prop_assert_eq!(c, want);
    }

    #[test]
    fn highest_weight(b in arb_state(6), extra in 1i64..4) {
        let p = b.level() as i64 + extra;
        prop_assert!(apply_rho(p, &FockVector::<QC>::basis(b)).is_zero());
    }

    #[test]
    fn adjointness(u in arb_state(6), v in arb_state(6), p in 1i64..=4) {
        let u = FockVector::<QC>::basis(u);
        let v = FockVector::<QC>::basis(v);
        prop_assert_eq!(apply_rho(-p, &u).inner(&v), u.inner(&apply_rho(p, &v)));
    }

    #[test]
    fn norms_from_commutator(b in arb_state(7)) {
        // ⟨Πρ̂(−n)^m Ω, same⟩ by peeling one creation operator at a time
        let e = FockVector::<QC>::basis(b.clone());
        let mut want = QC::one();
        let mut cur = b.clone();
        while let Some(n) = (1..=cur.occ.len()).rev().find(|&n| cur.m(n) > 0) {
            want = want * QC::from_int(n as i64 * cur.m(n) as i64);
            cur = cur.with_m(n, cur.m(n) - 1);
        }
        prop_assert_eq!(e.inner(&e), want);
    }

    #[test]
    fn truncation_monotonicity(lam in 2u64..6, extra in 1u64..4, p in -3i64..=3) {
        let small = TruncationSpec::single(lam);
        let big = TruncationSpec::single(lam + extra + p.unsigned_abs());
        let a = SparseOperator::<QC>::build(&small, |v| apply_rho(p, v));
        let b = SparseOperator::<QC>::build(&big, |v| apply_rho(p, v));
        for (j, bj) in a.basis.iter().enumerate() {
            for (i, bi) in a.basis.iter().enumerate() {
                prop_assert_eq!(a.coeff(i, j), b.coeff(b.index[bi], b.index[bj]));
            }
        }
    }

    #[test]
    fn vectors_add_associatively(x in arb_state(4), y in arb_state(4), z in arb_state(4)) {
        let (x, y, z) = (FockVector::<QC>::basis(x), FockVector::<QC>::basis(y), FockVector::<QC>::basis(z));
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.add(&y), y.add(&x));
        let t: BTreeMap<_, _> = x.sub(&x).terms;
        prop_assert!(t.is_empty());
    }
}
