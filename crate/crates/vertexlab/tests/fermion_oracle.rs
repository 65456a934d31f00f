use num_traits::{One, Zero};
use proptest::prelude::*;
use vertexlab::error::Error;
use vertexlab::fermion_oracle::*;
use vertexlab::fock::{apply_q, apply_rho, partitions, FockBasisState, FockVector};
use vertexlab::scalar::{Scalar, QC};
use vertexlab::walgebra::boson_vector_in_wedge;

fn win(half: i64) -> MomentumWindow {
    MomentumWindow::from_kmax(half as f64 - 0.5).unwrap()
}

fn arb_wedge(half: i64, excitations: usize) -> impl Strategy<Value = WedgeState> {
    prop::collection::vec((-half..half, any::<bool>()), 0..=excitations).prop_map(move |flips| {
        let w = win(half);
        let mut s = w.vacuum();
        for (j, _) in flips {
            s ^= 1u128 << (j + half);
        }
        s
    })
}

fn arb_boson(max_level: u64) -> impl Strategy<Value = FockBasisState> {
    (0..=max_level, -2i64..=2, any::<u64>()).prop_map(|(lvl, w, pick)| {
        let parts = partitions(lvl);
        FockBasisState::new(parts[(pick % parts.len() as u64) as usize].clone(), w)
    })
}

fn anticomm(w: &MomentumWindow, a: i64, b: i64, v: &WedgeVector<QC>) -> WedgeVector<QC> {
    let x = apply_psi(w, a, &apply_psi_dagger(w, b, v).unwrap()).unwrap();
    let y = apply_psi_dagger(w, b, &apply_psi(w, a, v).unwrap()).unwrap();
    x.add(&y)
}

#[test]
fn vacuum_is_annihilated() {
    let w = win(6);
    let vac = WedgeVector::<QC>::basis(w.vacuum());
    for j in 0..6 {
        assert!(apply_psi(&w, j, &vac).unwrap().is_zero());
    }
    for j in -6..0 {
        assert!(apply_psi_dagger(&w, j, &vac).unwrap().is_zero());
    }
    assert_eq!(w.charge(w.vacuum()), 0);
}

#[test]
fn outside_window_rejected() {
    let w = win(4);
    let vac = WedgeVector::<QC>::basis(w.vacuum());
    assert!(matches!(apply_psi(&w, 4, &vac), Err(Error::OutsideWindow(4))));
    assert!(matches!(apply_psi_dagger(&w, -5, &vac), Err(Error::OutsideWindow(-5))));
    assert!(MomentumWindow::from_kmax(0.0).is_err());
}

#[test]
fn identity_bilinear_kills_vacuum() {
    let w = win(6);
    let vac = WedgeVector::<QC>::basis(w.vacuum());
    let img = bilinear_dgamma(&w, |a, b| if a == b { QC::one() } else { QC::zero() }, 0, &vac);
    assert!(img.v.is_zero());
    assert_eq!(img.lost, 0);
}

#[test]
fn schwinger_term_on_vacuum() {
    let w = win(10);
    let vac = WedgeVector::<QC>::basis(w.vacuum());
    for n in 1..=5 {
        let a = rho_fermion(&w, n, &rho_fermion(&w, -n, &vac).v).v;
        let b = rho_fermion(&w, -n, &rho_fermion(&w, n, &vac).v).v;
        assert_eq!(a.sub(&b), vac.scale(&QC::from_int(n)));
    }
}

#[test]
fn w_generators_on_vacuum_and_one_particle() {
    let w = win(8);
    let vac = WedgeVector::<QC>::basis(w.vacuum());
    for s in 1..=4 {
        for n in 0..=3 {
            assert!(w_fermion(&w, s, n, &vac).v.is_zero(), "s={s} n={n}");
        }
    }
    for j in 0..5 {
        let (_, st) = w.psi_dagger(j, w.vacuum()).unwrap().unwrap();
        let e = WedgeVector::<QC>::basis(st);
        // eigenvalue k = (j + ½)·2π/L
        assert_eq!(w_fermion(&w, 2, 0, &e).v, e.scale(&QC::from_ratio(2 * j + 1, 2)));
    }
}

#[test]
fn shift_operator_phase_and_charge() {
    let w = win(6);
    let vac = WedgeVector::<QC>::basis(w.vacuum());
    let r = apply_r_fermion(&w, &vac).v;
    let (sign, st) = w.psi_dagger(0, w.vacuum()).unwrap().unwrap();
    assert_eq!(r, WedgeVector::basis(st).scale(&QC::from_int(sign)));
    assert_eq!(sign, 1);
    assert_eq!(q_fermion(&w, &r), r);
    assert_eq!(apply_r_inv_fermion(&w, &r).v, vac);
}

#[test]
fn lowest_mode_norm_in_wedge() {
    let w = win(6);
    let v = boson_basis_in_wedge::<QC>(&w, &FockBasisState::new(vec![1], 0)).unwrap();
    assert_eq!(v.inner(&v), QC::one());
    let big = FockBasisState::new(vec![0, 0, 0, 2], 0);
    assert!(matches!(boson_basis_in_wedge::<QC>(&w, &big), Err(Error::WindowTooSmall { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn car_exact(s in arb_wedge(6, 5), a in -6i64..6, b in -6i64..6) {
        let w = win(6);
        let v = WedgeVector::<QC>::basis(s);
        let want = if a == b { v.clone() } else { WedgeVector::zero() };
        prop_assert_eq!(anticomm(&w, a, b, &v), want);
        let dd = apply_psi_dagger(&w, a, &apply_psi_dagger(&w, b, &v).unwrap()).unwrap()
            .add(&apply_psi_dagger(&w, b, &apply_psi_dagger(&w, a, &v).unwrap()).unwrap());
        prop_assert!(dd.is_zero());
        prop_assert!(apply_psi_dagger(&w, a, &apply_psi_dagger(&w, a, &v).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn wedge_norms_match_boson_norms(b in arb_boson(6)) {
        let w = win(10);
        let v = boson_basis_in_wedge::<QC>(&w, &b).unwrap();
        prop_assert_eq!(v.inner(&v), QC::from_int(b.norm_sqr_int()));
    }

    #[test]
    fn boson_images_match(b in arb_boson(5), n in -4i64..=4) {
        let w = win(12);
        let e = FockVector::<QC>::basis(b.clone());
        let we = boson_basis_in_wedge::<QC>(&w, &b).unwrap();
        let bos = if n == 0 { apply_q(&e) } else { apply_rho(n, &e) };
        let img = rho_fermion(&w, n, &we);
        prop_assert_eq!(img.lost, 0);
        prop_assert_eq!(boson_vector_in_wedge(&w, &bos).unwrap(), img.v);
    }

    #[test]
    fn w_commutes_to_shifted_creation(b in arb_boson(4), s in 1u32..=3, n in -3i64..=3, j in -4i64..4) {
        let w = win(14);
        let v = boson_basis_in_wedge::<QC>(&w, &b).unwrap();
        let lhs = w_fermion(&w, s, n, &apply_psi_dagger(&w, j, &v).unwrap()).v
            .sub(&apply_psi_dagger(&w, j, &w_fermion(&w, s, n, &v).v).unwrap());
        let coef = QC::from_ratio((2 * j + 1 - n).pow(s - 1), 2i64.pow(s - 1));
        let rhs = apply_psi_dagger(&w, j - n, &v).unwrap().scale(&coef);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn w_adjoint_pairs(x in arb_boson(4), y in arb_boson(4), s in 1u32..=3, n in -3i64..=3) {
        let w = win(12);
        let u = boson_basis_in_wedge::<QC>(&w, &x).unwrap();
        let v = boson_basis_in_wedge::<QC>(&w, &y).unwrap();
        let a = u.inner(&w_fermion(&w, s, n, &v).v);
        let b = w_fermion(&w, s, -n, &u).v.inner(&v);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn charge_counts_particles_minus_holes(s in arb_wedge(6, 6)) {
        let w = win(6);
        let c = w.particles(s).len() as i64 - w.holes(s).len() as i64;
        prop_assert_eq!(w.charge(s), c);
        let v = WedgeVector::<QC>::basis(s);
        prop_assert_eq!(q_fermion(&w, &v), v.scale(&QC::from_int(c)));
    }
}
