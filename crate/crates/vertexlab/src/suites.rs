//! Verification suites. Each suite returns a [`CheckReport`] and is exposed as
//! one CLI subcommand; the acceptance test runs them with default parameters.
//!
//! Regulators in the parameter structs are in units of `L/2π`.

use crate::calogero::{self as cs, CSConfig, EigenRecipe, HNu3Form, IdentityRegulators, IdentitySample, PairPotential};
use crate::error::{Error, Result};
use crate::fermion_oracle::{apply_r_power, boson_basis_in_wedge, q_fermion, rho_fermion, MomentumWindow};
use crate::fock::{apply_q, apply_r, apply_rho, enumerate_basis, FockBasisState, FockVector, TruncationSpec};
use crate::loopspace::{
    alpha_plus_closed, anyon_blip, blip, cocycle_s, cocycle_s_exact, cocycle_s_integral, delta_pm_closed, sgn_eps,
    smoothed_delta, BlipParams, ExactLoop, LoopFunction,
};
use crate::report::{timed, CheckReport};
use crate::scalar::{Scalar, C64, QC};
use crate::torus;
use crate::vertex::{
    anyon_correlator, car_residual, exchange_phase_closed, exchange_ratio, normal_order_prefactor_closed,
    normal_order_product, vacuum_chain_level_truncated, vacuum_chain_mode_truncated, FieldInsertion, ImplementerSpec,
    ModeTruncation,
};
use crate::walgebra::{self as wa, RationalNu};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn phys(l: f64, eps_units: f64) -> f64 {
    eps_units * l / (2.0 * PI)
}

fn real_random_loop(rng: &mut ChaCha8Rng, l: f64, band: i64) -> LoopFunction {
    let mut modes = BTreeMap::new();
    for n in 1..=band {
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / n as f64;
        modes.insert(n, c);
        modes.insert(-n, c.conj());
    }
    LoopFunction {
        l,
        winding: rng.gen_range(-2i64..=2) as f64,
        mean: C64::new(rng.gen_range(-PI..PI), 0.0),
        modes,
        nu0: None,
    }
}

fn rational(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-50i64..=50)), BigInt::from(rng.gen_range(1i64..=12)))
}

fn exact_random_loop(rng: &mut ChaCha8Rng, band: i64) -> ExactLoop {
    let mut modes = BTreeMap::new();
    for n in 1..=band {
        let c = QC::new(rational(rng), rational(rng));
        modes.insert(-n, c.conj());
        modes.insert(n, c);
    }
    ExactLoop { winding: rng.gen_range(-2i64..=2), mean: QC::new(rational(rng), num_traits::Zero::zero()), modes }
}

fn mod_4pi(x: C64) -> f64 {
    let p = 4.0 * PI;
    let re = x.re - p * (x.re / p).round();
    C64::new(re, x.im).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleParams {
    pub l: f64,
    pub trials: usize,
    pub band: i64,
    pub seed: u64,
}

impl Default for CocycleParams {
    fn default() -> Self {
        Self { l: 2.0 * PI, trials: 100, band: 6, seed: 1 }
    }
}

/// Group-cocycle identity, antisymmetry and mode-sum versus integral form of `S`.
pub fn check_cocycle(p: &CocycleParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("check-cocycle", json!(p));
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let (mut ident, mut anti, mut integral) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..p.trials {
            let f: Vec<LoopFunction> = (0..3).map(|_| real_random_loop(&mut rng, p.l, p.band)).collect();
            let lhs = cocycle_s(&f[0], &f[1]) + cocycle_s(&f[0].add(&f[1]), &f[2]);
            let rhs = cocycle_s(&f[0], &f[1].add(&f[2])) + cocycle_s(&f[1], &f[2]);
            ident = ident.max(mod_4pi(lhs - rhs));
            anti = anti.max((cocycle_s(&f[0], &f[1]) + cocycle_s(&f[1], &f[0])).norm());
            let s = cocycle_s(&f[0], &f[1]);
            integral = integral.max((s - cocycle_s_integral(&f[0], &f[1], 32, 16)).norm() / s.norm().max(1.0));
        }
        let mut exact_ok = true;
        for _ in 0..p.trials {
            let f: Vec<ExactLoop> = (0..3).map(|_| exact_random_loop(&mut rng, p.band)).collect();
            let a = cocycle_s_exact(&f[0], &f[1]) + cocycle_s_exact(&f[1], &f[0]);
            let lhs = cocycle_s_exact(&f[0], &f[1]) + cocycle_s_exact(&f[0].add(&f[1]), &f[2]);
            let rhs = cocycle_s_exact(&f[0], &f[1].add(&f[2])) + cocycle_s_exact(&f[1], &f[2]);
            exact_ok &= num_traits::Zero::is_zero(&a) && lhs == rhs;
        }
        r.metric("cocycle_identity_max", ident);
        r.metric("antisymmetry_float_max", anti);
        r.metric("mode_vs_integral_max", integral);
        r.metric("exact_antisymmetry_and_identity", exact_ok);
        r.require(ident < 1e-10, format!("cocycle identity residual {ident:e} ≥ 1e-10"));
        r.require(integral < 1e-12, format!("mode sum vs integral {integral:e} ≥ 1e-12"));
        r.require(exact_ok, "exact antisymmetry or identity violated");
        r.summary = format!("{} triples, identity residual {ident:.1e}, exact mode {}", p.trials, if exact_ok { "exact" } else { "broken" });
        Ok(r)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlipCheckParams {
    pub l: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BlipCheckParams {
    fn default() -> Self {
        Self { l: 2.0 * PI, trials: 50, seed: 2 }
    }
}

/// The three blip relations at random `(y, y′, ε, ε′)`, plus anyon-blip self-cocycle.
pub fn check_blips(p: &BlipCheckParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("check-blips", json!(p));
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut worst = [0.0f64; 4];
        for _ in 0..p.trials {
            let y = rng.gen_range(-0.5..0.5) * p.l;
            let yp = rng.gen_range(-0.5..0.5) * p.l;
            let e = phys(p.l, rng.gen_range(0.05..0.5));
            let ep = phys(p.l, rng.gen_range(0.05..0.5));
            let f = blip(p.l, y, e)?;
            let fp = blip(p.l, yp, ep)?;
            let a = cocycle_s(&f.minus_part(), &fp.plus_part()) - alpha_plus_closed(p.l, yp, e + ep, y);
            let b = cocycle_s(&f, &fp) - sgn_eps(p.l, y - yp, e + ep)? * PI;
            let d = smoothed_delta(p.l, y, e)?;
            let c1 = cocycle_s(&d.minus_part(), &fp.plus_part()) + delta_pm_closed(p.l, yp, e + ep, y, 1);
            let c2 = cocycle_s(&d.plus_part(), &fp.minus_part()) + delta_pm_closed(p.l, yp, e + ep, y, -1);
            let nu0 = 0.5;
            let fa = anyon_blip(p.l, y, e, nu0)?;
            let sa = cocycle_s(&fa, &fa) - cocycle_s(&f, &f);
            for (w, v) in worst.iter_mut().zip([a.norm(), b.norm(), c1.norm().max(c2.norm()), sa.norm()]) {
                *w = w.max(v);
            }
        }
        r.metric("alpha_relation", worst[0]);
        r.metric("sgn_relation", worst[1]);
        r.metric("delta_relation", worst[2]);
        r.metric("anyon_self_cocycle", worst[3]);
        let m = worst.iter().copied().fold(0.0, f64::max);
        r.require(m < 1e-10, format!("blip relation residual {m:e} ≥ 1e-10"));
        r.summary = format!("{} samples, max residual {m:.1e}", p.trials);
        Ok(r)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergParams {
    pub lambda: u64,
    pub max_p: i64,
    pub wmin: i64,
    pub wmax: i64,
}

impl Default for HeisenbergParams {
    fn default() -> Self {
        Self { lambda: 8, max_p: 4, wmin: -1, wmax: 1 }
    }
}

/// Boson operators `ρ̂(p)`, `Q`, `R^{±1}` against the wedge model, exact arithmetic.
pub fn check_heisenberg(p: &HeisenbergParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("check-heisenberg", json!(p));
        let window = MomentumWindow::from_kmax((p.lambda + 6) as f64)?;
        let spec = TruncationSpec::new(p.lambda, p.wmin, p.wmax)?;
        let basis = enumerate_basis(&spec);
        let mut compared = 0usize;
        let mut mismatches = 0usize;
        let mut worst = 0.0f64;
        let mut ops: Vec<(String, i64)> = (-p.max_p..=p.max_p).filter(|&n| n != 0).map(|n| ("rho".to_string(), n)).collect();
        ops.push(("Q".into(), 0));
        ops.push(("R".into(), 1));
        ops.push(("R".into(), -1));
        for ket in &basis {
            let e = FockVector::<QC>::basis(ket.clone());
            let we = boson_basis_in_wedge::<QC>(&window, ket)?;
            for (name, n) in &ops {
                let (bos, fer) = match name.as_str() {
                    "rho" => {
                        let img = rho_fermion(&window, *n, &we);
                        if img.lost > 0 {
                            return Err(Error::WindowTooSmall { needed: window.half + 1, have: window.half });
                        }
                        (apply_rho(*n, &e), img.v)
                    }
                    "Q" => (apply_q(&e), q_fermion(&window, &we)),
                    _ => (apply_r(*n, &e), apply_r_power(&window, *n, &we).v),
                };
                let bw = wa::boson_vector_in_wedge(&window, &bos)?;
                let d = bw.sub(&fer);
                compared += 1;
                if !d.is_zero() {
                    mismatches += 1;
                    worst = worst.max(d.terms.values().map(|c| c.abs2().sqrt()).fold(0.0, f64::max));
                }
            }
        }
        r.metric("states", basis.len());
        r.metric("operator_images_compared", compared);
        r.metric("mismatches", mismatches);
        r.metric("max_discrepancy", worst);
        r.require(mismatches == 0, format!("{mismatches} operator images differ (max {worst:e})"));
        r.summary = format!("{compared} images on {} states, {mismatches} mismatches (exact)", basis.len());
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarParams {
    pub l: f64,
    pub lambda: u64,
    pub eps: Vec<f64>,
    /// Fermion mode pairs `(j_f, j_g)`, momentum `(j + ½)·2π/L`.
    pub modes: Vec<(i64, i64)>,
}

impl Default for CarParams {
    fn default() -> Self {
        Self { l: 2.0 * PI, lambda: 10, eps: vec![0.4, 0.2, 0.1, 0.05], modes: vec![(0, 0)] }
    }
}

/// Anticommutator defects of smeared blip fields along an `ε` ladder.
pub fn check_car(p: &CarParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("check-car", json!(p));
        let trunc = TruncationSpec::new(p.lambda, 0, 0)?;
        let mut rows = Vec::new();
        for &(jf, jg) in &p.modes {
            let margin = (jf.abs().max(jg.abs()) + 2) as u64;
            let ladder: Vec<(f64, f64)> = p
                .eps
                .iter()
                .map(|&e| car_residual(p.l, jf, jg, phys(p.l, e), &trunc, margin))
                .collect::<Result<_>>()?;
            for k in 0..2 {
                let v: Vec<f64> = ladder.iter().map(|d| if k == 0 { d.0 } else { d.1 }).collect();
                let mono = v.windows(2).all(|w| w[1] < w[0] || (w[0] < 1e-13 && w[1] < 1e-13));
                let first = v[0];
                let last = *v.last().unwrap_or(&first);
                let ratio = if first > 1e-13 { last / first } else { 0.0 };
                let label = if k == 0 { "{φ¹(f),φ¹(g)}" } else { "{φ¹(f),φ⁻¹(g)}−(g,f)" };
                r.require(mono, format!("{label} at modes ({jf},{jg}) not decreasing: {v:?}"));
                r.require(ratio < 1e-2, format!("{label} at modes ({jf},{jg}): last/first = {ratio:.3} ≥ 1e-2"));
                rows.push(json!({ "modes": [jf, jg], "defect": label, "ladder": v, "ratio": ratio }));
            }
        }
        let worst_ratio = rows.iter().filter_map(|x| x["ratio"].as_f64()).fold(0.0, f64::max);
        r.metric("ladders", rows);
        r.summary = format!("worst last/first defect ratio {worst_ratio:.3} along ε = {:?} (need < 1e-2)", p.eps);
        Ok(r)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeParams {
    pub l: f64,
    pub trials: usize,
    pub seed: u64,
    pub nu0: f64,
}

impl Default for ExchangeParams {
    fn default() -> Self {
        Self { l: 2.0 * PI, trials: 40, seed: 3, nu0: 0.5 }
    }
}

/// Exchange phases and normal-ordering prefactors as exact prefactor identities.
pub fn check_exchange(p: &ExchangeParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("check-exchange", json!(p));
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let (mut exch, mut pref, mut merged) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..p.trials {
            let nu = p.nu0 * rng.gen_range(-4i64..=4) as f64;
            let nup = p.nu0 * rng.gen_range(-4i64..=4) as f64;
            let (x, y) = (rng.gen_range(-0.5..0.5) * p.l, rng.gen_range(-0.5..0.5) * p.l);
            let (e, ep) = (phys(p.l, rng.gen_range(0.02..0.3)), phys(p.l, rng.gen_range(0.02..0.3)));
            let a = ImplementerSpec::anyon(p.l, BlipParams { y: x, eps: e, nu, nu0: p.nu0 })?;
            let b = ImplementerSpec::anyon(p.l, BlipParams { y, eps: ep, nu: nup, nu0: p.nu0 })?;
            exch = exch.max((exchange_ratio(&a, &b)? - exchange_phase_closed(p.l, nu, x, e, nup, y, ep)?).norm());
            let np = normal_order_product(&[a.clone(), b.clone()])?;
            let closed = normal_order_prefactor_closed(&[a.clone(), b.clone()], p.l)?;
            pref = pref.max((np.prefactor - closed).norm() / closed.norm());
            let rev = normal_order_product(&[b, a])?;
            let dm = np.merged.add(&rev.merged.scale(-1.0));
            merged = merged.max(dm.modes.values().map(|c| c.norm()).fold(dm.mean.norm() + dm.winding.abs(), f64::max));
        }
        r.metric("exchange_phase_max", exch);
        r.metric("prefactor_vs_kernel_max", pref);
        r.metric("merged_loop_difference", merged);
        r.require(exch < 1e-12, format!("exchange phase residual {exch:e}"));
        r.require(pref < 1e-12, format!("prefactor vs kernel power residual {pref:e}"));
        r.require(merged == 0.0, "merged loops depend on order");
        r.summary = format!("{} pairs, exchange residual {exch:.1e}, prefactor residual {pref:.1e}", p.trials);
        Ok(r)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WCommutatorParams {
    pub order: usize,
    pub max_p: i64,
    pub lambda: u64,
}

impl Default for WCommutatorParams {
    fn default() -> Self {
        Self { order: 3, max_p: 2, lambda: 4 }
    }
}

/// Generating-function brackets order by order in both pictures, exact arithmetic.
pub fn w_commutators(p: &WCommutatorParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("w-commutators", json!(p));
        let spec = TruncationSpec::new(p.lambda, -1, 1)?;
        let kets = enumerate_basis(&spec);
        let ns: Vec<i64> = (-p.max_p..=p.max_p).collect();
        let pairs: Vec<(i64, i64)> = ns.iter().flat_map(|&a| ns.iter().map(move |&b| (a, b))).collect();
        let op = |s: u32, n: i64, b: &FockBasisState| wa::w_boson::<QC>(s, n, b);
        let reach = p.lambda as i64 + 2 * p.max_p * (p.order as i64 + 1) + 4;
        let window = MomentumWindow::from_kmax(reach.min(63) as f64)?;
        use rayon::prelude::*;
        let results: Vec<(i64, i64, Vec<wa::ResidualReport>, Vec<wa::ResidualReport>)> = pairs
            .par_iter()
            .map(|&(a, b)| -> Result<_> {
                let bos = wa::check_winfty_bracket::<QC>(a, b, p.order, &kets, &op)?;
                let fer = wa::check_winfty_bracket_fermion::<QC>(&window, a, b, p.order, &kets)?;
                Ok((a, b, bos, fer))
            })
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        let mut table = Vec::new();
        for (a, b, bos, fer) in &results {
            for rep in bos.iter().chain(fer) {
                worst = worst.max(rep.residual);
                if rep.residual != 0.0 {
                    r.require(false, format!("{} p={a} q={b} order {}: {:e}", rep.check, rep.order, rep.residual));
                }
            }
            table.push(json!({ "p": a, "q": b, "boson": bos.iter().map(|x| x.residual).collect::<Vec<_>>(),
                "fermion": fer.iter().map(|x| x.residual).collect::<Vec<_>>() }));
        }
        r.metric("brackets", table);
        r.metric("max_residual", worst);
        r.summary = format!("{} (p,q) pairs to total order {}, max residual {worst:e} (exact)", pairs.len(), p.order);
        Ok(r)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KronigParams {
    pub lambda: u64,
    pub max_s: u32,
    pub max_p: i64,
}

impl Default for KronigParams {
    fn default() -> Self {
        Self { lambda: 8, max_s: 3, max_p: 2 }
    }
}

/// Boson closed forms against the fermion picture, with the counterterm negative control.
pub fn kronig(p: &KronigParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("kronig", json!(p));
        let spec = TruncationSpec::new(p.lambda, -1, 1)?;
        let mut table = Vec::new();
        for s in 1..=p.max_s {
            for n in -p.max_p..=p.max_p {
                let rep = wa::kronig_crosscheck::<QC>(s, n, &spec, true)?;
                r.require(rep.residual == 0.0, format!("s={s} p={n}: residual {:e}", rep.residual));
                table.push(json!({ "s": s, "p": n, "residual": rep.residual }));
            }
        }
        let ctrl = wa::kronig_crosscheck::<QC>(3, 0, &spec, false)?;
        r.require(ctrl.residual > 0.0, "removing the spin-3 linear term did not break the identity");
        r.metric("table", table);
        r.metric("negative_control_residual", ctrl.residual);
        r.summary = format!("s ≤ {}, |p| ≤ {} exact; control without counterterm gives {:.3}", p.max_s, p.max_p, ctrl.residual);
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnyonCorrParams {
    pub l: f64,
    pub eps: f64,
    pub lambda: u64,
    pub nu0: f64,
    /// Statistics parameters of each configuration, in units of `ν₀`.
    pub configs: Vec<Vec<i64>>,
    pub seed: u64,
    pub occupation_cap: u32,
}

impl Default for AnyonCorrParams {
    fn default() -> Self {
        Self {
            l: 2.0 * PI,
            eps: 0.1,
            lambda: 10,
            nu0: 0.5,
            configs: vec![vec![1, -1], vec![2, -2], vec![3, -3], vec![2, -1, -1], vec![1, -1, 1, -1], vec![2, -2, 2, -2], vec![2, 1, -2, -1]],
            seed: 4,
            occupation_cap: 12,
        }
    }
}

/// Fock-space chains of anyon implementers against the product formula.
/// The level-truncated chain is the criterion; the per-mode chain is reported alongside.
pub fn anyon_corr(p: &AnyonCorrParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("anyon-corr", json!(p));
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let eps = phys(p.l, p.eps);
        let lam = (-2.0 * PI * eps / p.l).exp();
        let nmax = crate::loopspace::blip_cutoff(lam * lam, 1e-14) as usize;
        let (mut lit, mut modes) = (0.0f64, 0.0f64);
        let mut rows = Vec::new();
        for cfg in &p.configs {
            let ys: Vec<f64> = (0..cfg.len()).map(|k| (k as f64 / cfg.len() as f64 - 0.5 + rng.gen_range(0.02..0.15)) * p.l).collect();
            let ins: Vec<FieldInsertion> = cfg.iter().zip(&ys).map(|(&m, &y)| FieldInsertion { nu: m as f64 * p.nu0, y, eps }).collect();
            let specs: Vec<ImplementerSpec> = ins
                .iter()
                .map(|f| ImplementerSpec::anyon(p.l, BlipParams { y: f.y, eps, nu: f.nu, nu0: p.nu0 }))
                .collect::<Result<_>>()?;
            let closed = anyon_correlator(p.l, &ins, 0.0)?;
            let span = cfg.iter().map(|m| m.abs()).sum::<i64>();
            let trunc = TruncationSpec::new(p.lambda, -span, span)?;
            let chain = vacuum_chain_level_truncated(&specs, &trunc);
            let mchain = vacuum_chain_mode_truncated(&specs, ModeTruncation { nmax, occupation_cap: p.occupation_cap });
            let e1 = (chain - closed).norm() / closed.norm();
            let e2 = (mchain - closed).norm() / closed.norm();
            lit = lit.max(e1);
            modes = modes.max(e2);
            rows.push(json!({ "nu_units": cfg, "y": ys, "closed": [closed.re, closed.im], "level_chain_rel": e1, "mode_chain_rel": e2 }));
        }
        let ex = check_exchange(&ExchangeParams { l: p.l, nu0: p.nu0, ..Default::default() })?;
        r.metric("configs", rows);
        r.metric("level_chain_max_rel", lit);
        r.metric("mode_chain_max_rel", modes);
        r.metric("mode_chain_nmax", nmax);
        r.metric("exchange_pass", ex.pass);
        r.require(lit < 1e-8, format!("level-truncated chain at Λ={} off by {lit:.2e} (need 1e-8)", p.lambda));
        r.require(ex.pass, "exchange prefactor identities failed");
        r.summary = format!("level-Λ chain rel. err {lit:.1e} (need 1e-8); per-mode chain {modes:.1e}; exchange {}", ex.status());
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsEigenParams {
    pub l: f64,
    pub ns: Vec<usize>,
    pub nus: Vec<f64>,
    pub grid: usize,
    /// Excited-state recipes for `excited_n` particles, in dominance order.
    pub recipes: Vec<Vec<i64>>,
    pub excited_n: usize,
    pub excited_nu: f64,
    pub tol: f64,
}

impl Default for CsEigenParams {
    fn default() -> Self {
        Self {
            l: 2.0 * PI,
            ns: vec![2, 3],
            nus: vec![1.0, 1.5, 2.0],
            grid: 16,
            recipes: vec![vec![1], vec![2], vec![3]],
            excited_n: 2,
            excited_nu: 2.0,
            tol: 1e-5,
        }
    }
}

/// Groundstate ratio tests, the free determinant, and excited recipes with a Rayleigh-quotient cross-check.
pub fn cs_eigen(p: &CsEigenParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("cs-eigen", json!(p));
        let mut ground = Vec::new();
        for &n in &p.ns {
            for &nu in &p.nus {
                let mut cfg = CSConfig::new(n, nu, p.l)?;
                cfg.grid = p.grid;
                let e0 = cs::groundstate_energy(&cfg);
                let rep = cs::eigenfunction_from_recipe(&EigenRecipe::ground(), &cfg, p.tol)?;
                let pts = cs::sample_points(&cfg);
                let oracle = pts.iter().map(|x| cs::groundstate_oracle_ratio(x, &cfg)).collect::<Result<Vec<_>>>()?;
                let oracle_dev = oracle.iter().map(|o| (o - e0).abs() / e0).fold(0.0, f64::max);
                let e_err = (rep.e - e0).abs() / e0;
                r.require(rep.ratio_stdev < 1e-5, format!("N={n} ν={nu}: ratio stdev {:.1e}", rep.ratio_stdev));
                r.require(e_err < 1e-6, format!("N={n} ν={nu}: E {} vs oracle {e0} (rel {e_err:.1e})", rep.e));
                r.require(oracle_dev < 1e-12, format!("N={n} ν={nu}: symbolic oracle not constant ({oracle_dev:.1e})"));
                let mut free = json!(null);
                if nu == 1.0 {
                    let scale = 2f64.powi((n * (n - 1) / 2) as i32);
                    let mut dev = 0.0f64;
                    let mut ratio_dev = 0.0f64;
                    let ksum: f64 = (0..n).map(|a| (cfg.dk() * (a as f64 - (n as f64 - 1.0) / 2.0)).powi(2)).sum();
                    let det = |x: &[f64]| cs::free_determinant(x, p.l);
                    for x in &pts {
                        let f0 = cs::groundstate_f0(x, &cfg).re;
                        dev = dev.max((det(x).norm() / scale - f0).abs() / f0);
                        let h = cs::apply_h(&det, x, &cfg, PairPotential::Exact { q: 0.0 })?;
                        ratio_dev = ratio_dev.max(((h / det(x)).re - ksum).abs() / ksum);
                    }
                    r.require(dev < 1e-12, format!("N={n}: |det|/2^(N(N-1)/2) vs F₀ off by {dev:.1e}"));
                    r.require(ratio_dev < 1e-6, format!("N={n}: plane-wave determinant ratio off by {ratio_dev:.1e}"));
                    free = json!({ "det_vs_f0": dev, "det_eigen_ratio_dev": ratio_dev, "sum_k2": ksum });
                }
                ground.push(json!({ "n": n, "nu": nu, "e0": e0, "report": rep, "oracle_dev": oracle_dev, "free": free }));
            }
        }
        let mut cfg = CSConfig::new(p.excited_n, p.excited_nu, p.l)?;
        cfg.grid = p.grid;
        let mut excited = Vec::new();
        let mut prev = cs::groundstate_energy(&cfg);
        for rec in &p.recipes {
            let recipe = EigenRecipe::new(rec.clone(), p.excited_n)?;
            let rep = cs::eigenfunction_from_recipe(&recipe, &cfg, p.tol)?;
            let ef = cs::RecipeEigenfunction::new(&recipe, &cfg)?;
            let f = |x: &[f64]| ef.value(x).unwrap_or(C64::new(f64::NAN, 0.0));
            r.require(rep.residual < p.tol, format!("recipe {rec:?}: residual {:.1e}", rep.residual));
            r.require(rep.e > prev, format!("recipe {rec:?}: E = {} not above {prev}", rep.e));
            let (mut rq, mut rq_err) = (f64::NAN, f64::NAN);
            if p.excited_n == 2 {
                rq = cs::rayleigh_quotient_pair(&f, &cfg, 16)?;
                rq_err = (rq - rep.e).abs() / rep.e.abs();
                r.require(rq_err < 1e-5, format!("recipe {rec:?}: Rayleigh quotient {rq} vs {} ({rq_err:.1e})", rep.e));
            }
            prev = rep.e;
            excited.push(json!({ "report": rep, "rayleigh": rq, "rayleigh_rel": rq_err }));
        }
        r.metric("groundstates", ground);
        r.metric("excited", excited);
        let mut parts = Vec::new();
        if !p.ns.is_empty() {
            parts.push(format!("{} groundstates (N ∈ {:?}, ν ∈ {:?})", p.ns.len() * p.nus.len(), p.ns, p.nus));
        }
        if !p.recipes.is_empty() {
            parts.push(format!("{} excited recipes at N={}, ν={}", p.recipes.len(), p.excited_n, p.excited_nu));
        }
        r.summary = format!("{}; {} failing assertions", parts.join(", "), r.failures.len());
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsEllipticParams {
    pub l: f64,
    pub nu: f64,
    pub qs: Vec<f64>,
    pub eps: Vec<f64>,
    pub q_small: f64,
}

impl Default for CsEllipticParams {
    fn default() -> Self {
        Self { l: 2.0 * PI, nu: 1.5, qs: vec![0.1, 0.3], eps: vec![0.1, 0.05, 0.025], q_small: 1e-6 }
    }
}

fn identity_samples(l: f64) -> Vec<IdentitySample> {
    let s = l / (2.0 * PI);
    vec![
        (vec![0.3 * s, 2.1 * s], vec![-1.1 * s, 1.0 * s]),
        (vec![-2.0 * s, 0.9 * s], vec![0.2 * s, 2.7 * s]),
        (vec![1.4 * s, -0.6 * s], vec![-2.5 * s, 0.45 * s]),
    ]
}

/// Two-group identity along an `ε` ladder, and the `q → 0` match with the trigonometric forms.
pub fn cs_elliptic(p: &CsEllipticParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("cs-elliptic", json!(p));
        let samples = identity_samples(p.l);
        let base = CSConfig::new(2, p.nu, p.l)?;
        let mut ladders = Vec::new();
        let mut worst_lit = f64::INFINITY;
        let mut worst_cross = f64::INFINITY;
        for &q in &p.qs {
            for reg in [IdentityRegulators::Literal, IdentityRegulators::CrossOnly] {
                let vals: Vec<f64> = p
                    .eps
                    .iter()
                    .map(|&e| {
                        let c = base.with_nome(q)?.with_regulators(phys(p.l, e), phys(p.l, e))?;
                        cs::identity_residual_with(&c, &samples, reg)
                    })
                    .collect::<Result<_>>()?;
                let ratios: Vec<f64> = vals.windows(2).map(|w| w[0] / w[1]).collect();
                let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                match reg {
                    IdentityRegulators::Literal => {
                        worst_lit = worst_lit.min(min_ratio);
                        r.require(min_ratio >= 2.0, format!("q={q}: halving ratios {ratios:?} (need ≥ 2)"));
                    }
                    IdentityRegulators::CrossOnly => worst_cross = worst_cross.min(min_ratio),
                }
                ladders.push(json!({ "q": q, "regulators": reg, "residuals": vals, "ratios": ratios }));
            }
        }
        let c0 = base.with_regulators(phys(p.l, 0.05), phys(p.l, 0.05))?;
        let a = cs::elliptic_identity_residual(&c0, &samples)?;
        let b = cs::trig_identity_residual(&c0, &samples)?;
        let cq = c0.with_nome(p.q_small)?;
        let mut fdev = 0.0f64;
        let mut vdev = 0.0f64;
        for (y, x) in &samples {
            let t = cs::correlator_f_trig(y, x, &c0);
            fdev = fdev.max((cs::correlator_f(y, x, &c0)? - t).norm() / t.norm());
            fdev = fdev.max((cs::correlator_f(y, x, &cq)? - t).norm() / t.norm());
            let rr = x[0] - x[1];
            let tv = cs::trig::potential_v_eps(rr, p.l, c0.eps);
            vdev = vdev.max((cs::potential_v_eps(rr, p.l, c0.eps, p.q_small)? - tv).norm() / tv.norm());
        }
        let resid_dev = (a - b).abs() / b.abs();
        r.require(resid_dev < 1e-8, format!("q=0 identity residual {a} vs trigonometric {b}"));
        r.require(fdev < 1e-8, format!("correlator at small q vs trigonometric: {fdev:.1e}"));
        r.require(vdev < 1e-8, format!("V_ε at small q vs trigonometric: {vdev:.1e}"));
        r.metric("ladders", ladders);
        r.metric("q0_residual_rel_diff", resid_dev);
        r.metric("q_small_correlator_rel_diff", fdev);
        r.metric("q_small_potential_rel_diff", vdev);
        r.metric("cross_only_min_ratio", worst_cross);
        r.summary = format!(
            "min halving ratio {worst_lit:.3} (need ≥ 2; cross-only regulators {worst_cross:.3}); q→0 match {:.1e}",
            resid_dev.max(fdev).max(vdev)
        );
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HNu3Params {
    pub l: f64,
    /// `(numerator, denominator)` of each `ν`.
    pub nus: Vec<(i64, i64)>,
    pub lambda: u64,
    pub wmin: i64,
    pub wmax: i64,
    pub eps: Vec<f64>,
    pub q: f64,
    pub tol: f64,
}

impl Default for HNu3Params {
    fn default() -> Self {
        Self { l: 2.0 * PI, nus: vec![(1, 1), (3, 2)], lambda: 8, wmin: -1, wmax: 1, eps: vec![0.1, 0.05], q: 0.2, tol: 1e-6 }
    }
}

/// Calibration of `H^{ν,3}` in both forms, `H Ω = 0`, the `ν = 1` reduction, and the Gibbs-trace condition.
pub fn h_nu3_calibrate(p: &HNu3Params) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("h-nu3-calibrate", json!(p));
        let mut rows = Vec::new();
        let mut lit_worst = 0.0f64;
        let spec = TruncationSpec::new(p.lambda.min(6), p.wmin - 1, p.wmax + 1)?;
        for &(a, b) in &p.nus {
            let nu = RationalNu::new(a, b)?;
            let nuf = nu.value();
            for form in [HNu3Form::Literal, HNu3Form::ChargeCorrected] {
                let cals: Vec<cs::HNu3Calibration> = p
                    .eps
                    .iter()
                    .map(|&e| cs::calibrate_h_nu3(nu, form, p.lambda, (p.wmin, p.wmax), phys(p.l, e), p.l))
                    .collect::<Result<_>>()?;
                let cal = &cals[0];
                let drift = cals.iter().map(|c| (c.kappa - cal.kappa).abs()).fold(0.0, f64::max);
                let h = cs::build_h_nu3(nu, cal, &spec)?;
                let hvac = cs::h_nu3_vacuum_norm(&h) + 0.0;
                let (tr, scale) = cs::not1_gibbs_residual(nu, cal, p.q, (0.4, -0.9), phys(p.l, 0.1), &spec, p.l)?;
                let delta = (nuf * nuf - 1.0) * (nuf * nuf - 2.0) / 12.0;
                if form == HNu3Form::Literal {
                    lit_worst = lit_worst.max(cal.residual);
                    r.require(cal.residual < p.tol, format!("ν={nuf}: no κ satisfies the N=1 relation (residual {:.3})", cal.residual));
                    r.require(hvac < 1e-12, format!("ν={nuf}: |HΩ| = {hvac:e}"));
                    r.require(tr.norm() < 1e-8, format!("ν={nuf}: Gibbs trace {:e}", tr.norm()));
                    if a == b {
                        let w3 = wa::build_w_boson::<QC>(3, 0, &spec)?;
                        let mut diff = 0.0f64;
                        for st in &h.basis {
                            let e = FockVector::<C64>::basis(st.clone());
                            let d = h.apply(&e).sub(&w3.apply(&FockVector::<QC>::basis(st.clone())).to_c64());
                            diff = diff.max(d.norm_sqr().sqrt());
                        }
                        r.require(diff < 1e-12, format!("ν=1 operator differs from W³ by {diff:e}"));
                        r.metric("nu1_vs_w3", diff + 0.0);
                    }
                }
                rows.push(json!({
                    "nu": nuf, "form": form, "kappa": cal.kappa, "charge_coeff": cal.charge_coeff,
                    "residual": cal.residual, "kappa_eps_drift": drift, "h_vacuum_norm": hvac,
                    "gibbs_trace": [tr.re, tr.im], "gibbs_scale": scale, "minus_delta": -delta,
                }));
            }
        }
        r.metric("calibrations", rows);
        r.summary = format!("literal form worst residual {lit_worst:.3} (need < {:.0e}); charge-corrected form reported alongside", p.tol);
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SzegoParams {
    pub betas: Vec<f64>,
    pub grid: usize,
}

impl Default for SzegoParams {
    fn default() -> Self {
        Self { betas: vec![1.0, 2.0, 4.0], grid: 400 }
    }
}

/// Fourier/Szegő identity on a grid with certified series tails.
pub fn szego_identity(p: &SzegoParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("szego-identity", json!(p));
        let mut reps = Vec::new();
        let mut worst = 0.0f64;
        for &b in &p.betas {
            let rep = torus::fourier_identity_residual(b, p.grid)?;
            r.require(rep.max_residual < 1e-10, format!("β={b}: residual {:e}", rep.max_residual));
            r.require(rep.max_tail < 1e-16, format!("β={b}: tail bound {:e}", rep.max_tail));
            worst = worst.max(rep.max_residual);
            reps.push(rep);
        }
        r.metric("reports", reps);
        r.summary = format!("max identity residual {worst:.1e} over β ∈ {:?}", p.betas);
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmsParams {
    pub betas: Vec<f64>,
    pub n_max: i64,
    pub seed: u64,
    pub band: i64,
}

impl Default for KmsParams {
    fn default() -> Self {
        Self { betas: vec![1.0, 2.0, 4.0], n_max: 20, seed: 5, band: 6 }
    }
}

/// `P(A(β))` block idempotence in exact arithmetic and kernel quadrature against the closed form.
pub fn kms_project(p: &KmsParams) -> Result<CheckReport> {
    timed(|| {
        let mut r = CheckReport::new("kms-project", json!(p));
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut quad = Vec::new();
        let mut worst = 0.0f64;
        for &b in &p.betas {
            let spec = torus::KMSProjectionSpec::new(b, p.n_max)?;
            let exact = spec.modes().all(|n| torus::projection_defect_exact(&torus::t_rational(n, b)));
            r.require(exact, format!("β={b}: exact block idempotence failed"));
            let f: Vec<(i64, C64)> =
                (-p.band..=p.band).map(|n| (n, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
            let rep = torus::quadrature_check(&f, b, &[-2.3, -0.4, 0.0, 1.1, 2.9])?;
            let e = rep.g1_error.max(rep.g2_error);
            r.require(e < 1e-8, format!("β={b}: quadrature vs closed form {e:e}"));
            worst = worst.max(e);
            quad.push(json!({ "beta": b, "exact_idempotent": exact, "quadrature": rep }));
        }
        r.metric("betas", quad);
        r.summary = format!("exact idempotence on all blocks; quadrature g₁/g₂ error {worst:.1e}");
        Ok(r)
    })
}

/// Entry in the acceptance table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!("[{}] criterion {:>2} {}: {} ({:.1} s)", if self.pass { "PASS" } else { "FAIL" }, self.id, self.title, self.detail, self.elapsed_s)
    }
}

fn outcome(id: u32, title: &str, reps: &[CheckReport]) -> CriterionOutcome {
    let pass = reps.iter().all(|r| r.pass);
    let detail = reps.iter().map(|r| r.summary.clone()).collect::<Vec<_>>().join("; ");
    CriterionOutcome { id, title: title.into(), pass, detail, elapsed_s: reps.iter().map(|r| r.elapsed_s).sum() }
}

/// Run one acceptance criterion (1–11) with default parameters.
pub fn criterion(id: u32) -> Result<CriterionOutcome> {
    Ok(match id {
        1 => {
            let c = check_cocycle(&CocycleParams::default())?;
            let mut o = outcome(1, "cocycle suite", &[c]);
            o.pass &= o.elapsed_s < 10.0;
            o
        }
        2 => {
            let c = check_heisenberg(&HeisenbergParams::default())?;
            let mut o = outcome(2, "Heisenberg/wedge agreement", &[c]);
            o.pass &= o.elapsed_s < 30.0;
            o
        }
        3 => outcome(3, "boson-fermion CAR", &[check_car(&CarParams::default())?]),
        4 => outcome(4, "generalized Kronig", &[kronig(&KronigParams::default())?]),
        5 => {
            let c = w_commutators(&WCommutatorParams::default())?;
            let mut o = outcome(5, "W brackets", &[c]);
            o.pass &= o.elapsed_s < 300.0;
            o
        }
        6 => outcome(6, "anyon correlators", &[anyon_corr(&AnyonCorrParams::default())?]),
        7 | 8 => {
            let full = CsEigenParams::default();
            let p = if id == 7 { CsEigenParams { recipes: vec![], ..full } } else { CsEigenParams { ns: vec![], ..full } };
            let title = if id == 7 { "CS groundstate" } else { "CS excited states" };
            outcome(id, title, &[cs_eigen(&p)?])
        }
        9 => outcome(9, "elliptic identity", &[cs_elliptic(&CsEllipticParams::default())?]),
        10 => outcome(10, "H^{ν,3} calibration", &[h_nu3_calibrate(&HNu3Params::default())?]),
        11 => outcome(
            11,
            "torus identity and KMS projection",
            &[szego_identity(&SzegoParams::default())?, kms_project(&KmsParams::default())?],
        ),
        _ => return Err(Error::Invalid(format!("no criterion {id}"))),
    })
}

/// Criteria whose stated thresholds the implementation does not reach.
pub const KNOWN_UNMET: [u32; 4] = [3, 6, 9, 10];
