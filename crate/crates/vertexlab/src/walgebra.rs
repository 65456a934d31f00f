//! `W_{1+∞}` generators in the boson picture.
//!
//! Generators are handled in units of `2π/L`: `Ŵ^s_n = W^s_{2πn/L}·(L/2π)^{s−1}`,
//! so every matrix element is rational. The generating function in the
//! dimensionless displacement `τ = 2πa/L` reads
//! `W_n(τ) = Σ_s (−iτ)^{s−1}/(s−1)! · Ŵ^s_n`.

use crate::error::{Error, Result};
use crate::fermion_oracle::{boson_basis_in_wedge, w_fermion, MomentumWindow, WedgeVector};
use crate::fock::{apply_rho, lower, raise, FockBasisState, FockVector, SparseOperator, TruncationSpec};
use crate::scalar::{factorial, i_pow, Scalar};
use crate::series::{BiSeries, PowerSeries};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Highest spin with a closed boson formula.
pub const MAX_CLOSED_SPIN: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Picture {
    Boson,
    Fermion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WGeneratorSpec {
    pub s: u32,
    /// Momentum in units of `2π/L`.
    pub n: i64,
    pub picture: Picture,
}

/// Taylor data of a generating-function evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratingEvaluation {
    pub order: usize,
}

impl GeneratingEvaluation {
    pub fn for_spin(s: u32) -> Self {
        Self { order: s as usize - 1 }
    }
}

/// Residual record for bracket and Kronig checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub check: String,
    pub params: serde_json::Value,
    pub order: usize,
    pub residual: f64,
    pub exact: bool,
}

fn max_abs<S: Scalar>(v: &FockVector<S>) -> f64 {
    v.terms.values().map(|c| c.abs2().sqrt()).fold(0.0, f64::max)
}

/// Ordered `k`-tuples in `[−b, b]` summing to `n`.
fn tuples(k: usize, n: i64, b: i64) -> Vec<Vec<i64>> {
    fn rec(k: usize, n: i64, b: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k == 0 {
            if n == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if n.abs() > b * k as i64 {
            return;
        }
        for m in -b..=b {
            cur.push(m);
            rec(k - 1, n - m, b, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, n, b, &mut Vec::new(), &mut out);
    out
}

/// `Σ_{m₁+…+m_k = n} ⋮ρ̂(m₁)⋯ρ̂(m_k)⋮` on one basis state.
pub fn normal_ordered_power_sum<S: Scalar>(k: usize, n: i64, ket: &FockBasisState) -> FockVector<S> {
    let b = ket.level() as i64 + n.abs();
    let mut r = FockVector::zero();
    let start = FockVector::<S>::basis(ket.clone());
    for t in tuples(k, n, b.max(1)) {
        let mut v = start.clone();
        for &m in t.iter().filter(|&&m| m > 0) {
            v = lower(m as usize, &v);
            if v.is_zero() {
                break;
            }
        }
        if v.is_zero() {
            continue;
        }
        for _ in t.iter().filter(|&&m| m == 0) {
            v = v.scale(&S::from_int(ket.w));
        }
        for &m in t.iter().filter(|&&m| m < 0) {
            v = raise((-m) as usize, &v);
        }
        r = r.add(&v);
    }
    r
}

/// Closed boson formula for `Ŵ^s_n`, `s ≤ 3`. The spin-3 generator carries the
/// linear term `((n² − 1)/12) ρ̂(n)`; `counterterm = false` drops it.
pub fn w_boson_closed_with<S: Scalar>(s: u32, n: i64, ket: &FockBasisState, counterterm: bool) -> Result<FockVector<S>> {
    let e = FockVector::<S>::basis(ket.clone());
    Ok(match s {
        1 => apply_rho(n, &e),
        2 => normal_ordered_power_sum::<S>(2, n, ket).scale(&S::from_ratio(1, 2)),
        3 => {
            let cubic = normal_ordered_power_sum::<S>(3, n, ket).scale(&S::from_ratio(1, 3));
            if counterterm {
                cubic.add(&apply_rho(n, &e).scale(&S::from_ratio(n * n - 1, 12)))
            } else {
                cubic
            }
        }
        _ => return Err(Error::Invalid(format!("no closed formula for s = {s}"))),
    })
}

pub fn w_boson_closed<S: Scalar>(s: u32, n: i64, ket: &FockBasisState) -> Result<FockVector<S>> {
    w_boson_closed_with(s, n, ket, true)
}

/// Per-mode data of a normal-ordered exponential `⋮e^{…}⋮` with `τ`-series
/// coefficients: creation `ρ̂(−m)` carries `create(m)`, annihilation `ρ̂(m)` carries `annihilate(m)`.
struct ExpSeries<'a, S> {
    order: usize,
    create: &'a dyn Fn(usize) -> PowerSeries<S>,
    annihilate: &'a dyn Fn(usize) -> PowerSeries<S>,
}

fn mode_multisets(total_max: u64, count_max: usize, exact_total: Option<u64>) -> Vec<Vec<(usize, u32)>> {
    fn rec(
        max_part: u64,
        rem: u64,
        count: usize,
        exact: bool,
        cur: &mut Vec<(usize, u32)>,
        out: &mut Vec<Vec<(usize, u32)>>,
    ) {
        if !exact || rem == 0 {
            out.push(cur.clone());
        }
        if count == 0 || rem == 0 {
            return;
        }
        for p in (1..=max_part.min(rem)).rev() {
            let maxmult = ((rem / p) as usize).min(count);
            for mult in 1..=maxmult {
                cur.push((p as usize, mult as u32));
                rec(p - 1, rem - p * mult as u64, count - mult, exact, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    match exact_total {
        Some(t) => rec(t, t, count_max, true, &mut Vec::new(), &mut out),
        None => rec(total_max, total_max, count_max, false, &mut Vec::new(), &mut out),
    }
    out
}

/// `⋮e^{…}⋮ |ket⟩` restricted to the momentum sector where the level changes by `−n`,
/// with coefficients as series in `τ` truncated at `order`.
fn exp_sector<S: Scalar>(e: &ExpSeries<'_, S>, n: i64, ket: &FockBasisState) -> BTreeMap<FockBasisState, PowerSeries<S>> {
    let order = e.order;
    let mut out: BTreeMap<FockBasisState, PowerSeries<S>> = BTreeMap::new();
    let level = ket.level();
    let start = FockVector::<S>::basis(ket.clone());
    for ann in mode_multisets(level, order, None) {
        let mut v = start.clone();
        let mut coef = PowerSeries::one(order);
        let mut count = 0usize;
        let mut ann_total = 0u64;
        for &(m, j) in &ann {
            if ket.m(m) < j {
                v = FockVector::zero();
                break;
            }
            for _ in 0..j {
                v = lower(m, &v);
            }
            coef = coef.mul(&(e.annihilate)(m).pow(j)).scale(&S::from_ratio(1, factorial(j)));
            count += j as usize;
            ann_total += (m as u64) * j as u64;
        }
        if v.is_zero() {
            continue;
        }
        let cre_total = ann_total as i64 - n;
        if cre_total < 0 {
            continue;
        }
        for cre in mode_multisets(0, order - count, Some(cre_total as u64)) {
            let mut u = v.clone();
            let mut c2 = coef.clone();
            for &(m, j) in &cre {
                for _ in 0..j {
                    u = raise(m, &u);
                }
                c2 = c2.mul(&(e.create)(m).pow(j)).scale(&S::from_ratio(1, factorial(j)));
            }
            if c2.valuation().is_none() {
                continue;
            }
            for (b, a) in u.terms {
                let entry = out.entry(b).or_insert_with(|| PowerSeries::zero(order));
                *entry = entry.add(&c2.scale(&a));
            }
        }
    }
    out
}

/// Finish `N(τ)(e^{−iβτQ}M(τ) − δ)`: multiply the zero-mode phase, subtract the
/// identity, divide by `τ` and apply `norm_over_tau^{-1} = τ·N(τ)`.
fn finish_generating<S: Scalar>(
    mut m: BTreeMap<FockBasisState, PowerSeries<S>>,
    ket: &FockBasisState,
    n: i64,
    beta: (i64, i64),
    tau_norm: &PowerSeries<S>,
) -> BTreeMap<FockBasisState, PowerSeries<S>> {
    let order = tau_norm.order() + 1;
    let phase = PowerSeries::<S>::exp_i(-beta.0 * ket.w, beta.1, order);
    if n == 0 {
        let e = m.entry(ket.clone()).or_insert_with(|| PowerSeries::zero(order));
        *e = e.clone();
    }
    let mut out = BTreeMap::new();
    for (b, s) in m.iter_mut() {
        let mut t = s.mul(&phase);
        if n == 0 && b == ket {
            t.c[0] = t.c[0].clone() - S::one();
        }
        let r = t.shift_down().mul(tau_norm);
        if r.valuation().is_some() {
            out.insert(b.clone(), r);
        }
    }
    out
}

/// `W_n(τ)|ket⟩` as series up to `τ^order`, from the merged-loop implementer at
/// regulator `λ = e^{−2πε/L}` (`λ = 1` is the limit `ε ↓ 0`).
pub fn generating_series<S: Scalar>(n: i64, order: usize, lambda: &S, ket: &FockBasisState) -> BTreeMap<FockBasisState, PowerSeries<S>> {
    let k = order + 1;
    let lam_pow = |m: usize| -> S {
        let mut x = S::one();
        for _ in 0..m {
            x = x * lambda.clone();
        }
        x
    };
    // i c_{±m} = −(2i/m) sin(mτ/2) λ^m
    let g = |m: usize| -> PowerSeries<S> {
        PowerSeries::<S>::sin(m as i64, 2, k)
            .scale(&(S::imag_unit() * S::from_ratio(-2, m as i64) * lam_pow(m)))
    };
    let e = ExpSeries { order: k, create: &g, annihilate: &g };
    let m = exp_sector(&e, n, ket);
    // τ N(τ) = iτ / (2 sin(τ/2))
    let half_sin_over_tau = PowerSeries::<S>::sin(1, 2, k).shift_down().scale(&S::from_int(2));
    let tau_norm = half_sin_over_tau.inv_unit().scale(&S::imag_unit());
    finish_generating(m, ket, n, (1, 1), &PowerSeries { c: tau_norm.c[..=order].to_vec() })
}

/// Coefficient extraction `Ŵ^s = (s−1)!/(−i)^{s−1} · [τ^{s−1}] W(τ)`.
fn extract<S: Scalar>(series: &BTreeMap<FockBasisState, PowerSeries<S>>, s: u32) -> FockVector<S> {
    let k = s as usize - 1;
    let mut scale = S::from_int(factorial(k as u32));
    // 1/(−i)^k = i^k
    scale = scale * i_pow::<S>(k as i64);
    let mut v = FockVector::zero();
    for (b, ser) in series {
        v.add_term(b.clone(), ser.coeff(k) * scale.clone());
    }
    v
}

/// `Ŵ^s_n|ket⟩` from the generating function at `ε = 0`.
pub fn w_extracted<S: Scalar>(s: u32, n: i64, ket: &FockBasisState) -> Result<FockVector<S>> {
    if s == 0 {
        return Err(Error::OrderTooLow { need: 1, got: 0 });
    }
    Ok(extract(&generating_series(n, s as usize - 1, &S::one(), ket), s))
}

/// `Ŵ^s_n` by the closed formula where available, else by extraction.
pub fn w_boson<S: Scalar>(s: u32, n: i64, ket: &FockBasisState) -> Result<FockVector<S>> {
    if s <= MAX_CLOSED_SPIN {
        w_boson_closed(s, n, ket)
    } else {
        w_extracted(s, n, ket)
    }
}

/// Statistics parameter `ν = num/den` with `ν = ν₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalNu {
    pub num: i64,
    pub den: i64,
}

impl RationalNu {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den <= 0 || num <= 0 {
            return Err(Error::Invalid(format!("ν = {num}/{den} must be positive")));
        }
        Ok(Self { num, den })
    }
    pub fn from_f64(nu: f64) -> Result<Self> {
        for den in 1..=64 {
            let num = (nu * den as f64).round();
            if (num / den as f64 - nu).abs() < 1e-12 {
                return Self::new(num as i64, den);
            }
        }
        Err(Error::Invalid(format!("ν = {nu} is not a small rational")))
    }
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
    pub fn squared(&self) -> (i64, i64) {
        (self.num * self.num, self.den * self.den)
    }
}

/// Zero-momentum anyon generating function `W^ν(τ)|ket⟩` from
/// `N^ν(a)(⋮e^{iν dΓ(f̃_{y+a} − f̃_y)}⋮ − I)`, integrated over `y`.
pub fn anyon_generating_series<S: Scalar>(nu: RationalNu, order: usize, ket: &FockBasisState) -> BTreeMap<FockBasisState, PowerSeries<S>> {
    let k = order + 1;
    let nu_s = S::from_ratio(nu.num, nu.den);
    // creation (ν/m)(e^{−imτ} − 1), annihilation −(ν/m)(e^{imτ} − 1)
    let cre = |m: usize| -> PowerSeries<S> {
        PowerSeries::<S>::exp_i(-(m as i64), 1, k).sub(&PowerSeries::one(k)).scale(&(nu_s.clone() * S::from_ratio(1, m as i64)))
    };
    let ann = |m: usize| -> PowerSeries<S> {
        PowerSeries::<S>::exp_i(m as i64, 1, k).sub(&PowerSeries::one(k)).scale(&(nu_s.clone() * S::from_ratio(-1, m as i64)))
    };
    let e = ExpSeries { order: k, create: &cre, annihilate: &ann };
    let m = exp_sector(&e, 0, ket);
    let (b_num, b_den) = nu.squared();
    let beta = S::from_ratio(b_num, b_den);
    // τ N^ν = iτ / (2ν² cos^{ν²}(τ/2) tan(τ/2)) = i · [τ/(2 sin(τ/2))] · cos^{1−ν²}(τ/2)/ν²
    let half_sin_over_tau = PowerSeries::<S>::sin(1, 2, k).shift_down().scale(&S::from_int(2));
    let cos_pow = PowerSeries::<S>::cos(1, 2, k).powf_unit(&(S::one() - beta.clone()));
    let tau_norm = half_sin_over_tau
        .inv_unit()
        .mul(&PowerSeries { c: cos_pow.c[..half_sin_over_tau.c.len()].to_vec() })
        .scale(&(S::imag_unit() * S::from_ratio(b_den, b_num)));
    finish_generating(m, ket, 0, (b_num, b_den), &PowerSeries { c: tau_norm.c[..=order].to_vec() })
}

/// `Ŵ^{ν,s}|ket⟩` (zero momentum, units `(2π/L)^{s−1}`).
pub fn w_anyon<S: Scalar>(nu: RationalNu, s: u32, ket: &FockBasisState) -> Result<FockVector<S>> {
    if s == 0 {
        return Err(Error::OrderTooLow { need: 1, got: 0 });
    }
    Ok(extract(&anyon_generating_series(nu, s as usize - 1, ket), s))
}

impl WGeneratorSpec {
    pub fn apply_boson<S: Scalar>(&self, v: &FockVector<S>) -> Result<FockVector<S>> {
        let mut r = FockVector::zero();
        for (b, c) in &v.terms {
            r = r.add(&w_boson::<S>(self.s, self.n, b)?.scale(c));
        }
        Ok(r)
    }
}

/// `build_W_boson(s, n, spec)`: truncated matrix, components beyond the truncation reported as lost.
pub fn build_w_boson<S: Scalar>(s: u32, n: i64, spec: &TruncationSpec) -> Result<SparseOperator<S>> {
    if s == 0 {
        return Err(Error::OrderTooLow { need: 1, got: 0 });
    }
    let g = WGeneratorSpec { s, n, picture: Picture::Boson };
    Ok(SparseOperator::build(spec, |v| g.apply_boson(v).expect("s ≥ 1")))
}

/// Truncated matrix of `Ŵ^s_n` by generating-function extraction.
pub fn extract_w_from_generating<S: Scalar>(s: u32, n: i64, eval: GeneratingEvaluation, spec: &TruncationSpec) -> Result<SparseOperator<S>> {
    if eval.order + 1 < s as usize {
        return Err(Error::OrderTooLow { need: s as usize - 1, got: eval.order });
    }
    Ok(SparseOperator::build(spec, |v| {
        let mut r = FockVector::zero();
        for (b, c) in &v.terms {
            r = r.add(&extract(&generating_series(n, eval.order, &S::one(), b), s).scale(c));
        }
        r
    }))
}

fn apply_linear<S: Scalar>(v: &FockVector<S>, f: &dyn Fn(&FockBasisState) -> Result<FockVector<S>>) -> Result<FockVector<S>> {
    let mut r = FockVector::zero();
    for (b, c) in &v.terms {
        r = r.add(&f(b)?.scale(c));
    }
    Ok(r)
}

/// `Σ_{i+j≤order}` coefficients of `2i sin((n_q τ_a − n_p τ_b)/2) · W_{n_p+n_q}(τ_a+τ_b)`,
/// indexed by `(i, j, k)` with `k` the spin minus one of `Ŵ^{k+1}_{n_p+n_q}`.
fn rhs_structure<S: Scalar>(np: i64, nq: i64, order: usize) -> BTreeMap<(usize, usize, usize), S> {
    let s_half = PowerSeries::<S>::sin(1, 2, order);
    let pref = BiSeries::compose_linear(&s_half, nq, -np, order);
    let mut out = BTreeMap::new();
    for k in 0..order {
        // (−i t)^k / k! with t = τ_a + τ_b
        let mut g = PowerSeries::<S>::zero(order);
        g.c[k] = i_pow::<S>(-(k as i64)) * S::from_ratio(1, factorial(k as u32));
        let w = BiSeries::compose_linear(&g, 1, 1, order);
        let prod = pref.mul(&w);
        for ((i, j), c) in prod.c {
            if !c.is_zero() {
                out.insert((i, j, k), c * S::from_int(2) * S::imag_unit());
            }
        }
    }
    out
}

/// Coefficients of `δ_{p,−q} sin(n_p t/2)/sin(t/2)`, `t = τ_a + τ_b`.
fn central_structure<S: Scalar>(np: i64, nq: i64, order: usize) -> BiSeries<S> {
    if np + nq != 0 || np == 0 {
        return BiSeries::zero(order);
    }
    let num = PowerSeries::<S>::sin(np, 2, order + 1).shift_down();
    let den = PowerSeries::<S>::sin(1, 2, order + 1).shift_down().scale(&S::from_int(2));
    let ratio = num.mul(&den.inv_unit()).scale(&S::from_int(2));
    BiSeries::compose_linear(&PowerSeries { c: ratio.c[..=order].to_vec() }, 1, 1, order)
}

/// Operator source for bracket checks; `op(s, n, ket)` returns `Ŵ^s_n|ket⟩`.
pub type WSource<'a, S> = &'a (dyn Fn(u32, i64, &FockBasisState) -> Result<FockVector<S>> + Sync);

/// Generating-function bracket checked order by order on `kets`:
/// `[W_p(a), W_q(b)] = 2i sin((qa − pb)/2) W_{p+q}(a+b) + δ_{p,−q} sin(p(a+b)/2)/sin(π(a+b)/L)`.
/// Returns the max residual per total order `0..=order`.
pub fn check_winfty_bracket<S: Scalar>(
    np: i64,
    nq: i64,
    order: usize,
    kets: &[FockBasisState],
    op: WSource<'_, S>,
) -> Result<Vec<ResidualReport>> {
    let rhs = rhs_structure::<S>(np, nq, order);
    let central = central_structure::<S>(np, nq, order);
    let mut worst = vec![0.0f64; order + 1];
    for ket in kets {
        let e = FockVector::<S>::basis(ket.clone());
        for i in 0..=order {
            for j in 0..=(order - i) {
                let a = |b: &FockBasisState| op(i as u32 + 1, np, b);
                let b_ = |b: &FockBasisState| op(j as u32 + 1, nq, b);
                let ab = apply_linear(&apply_linear(&e, &b_)?, &a)?;
                let ba = apply_linear(&apply_linear(&e, &a)?, &b_)?;
                let scale = i_pow::<S>(-((i + j) as i64)) * S::from_ratio(1, factorial(i as u32) * factorial(j as u32));
                let mut resid = ab.sub(&ba).scale(&scale);
                for k in 0..order {
                    if let Some(c) = rhs.get(&(i, j, k)) {
                        resid = resid.sub(&op(k as u32 + 1, np + nq, ket)?.scale(c));
                    }
                }
                resid = resid.sub(&e.scale(&central.coeff(i, j)));
                worst[i + j] = worst[i + j].max(max_abs(&resid));
            }
        }
    }
    Ok((0..=order)
        .map(|o| ResidualReport {
            check: "winfty_bracket".into(),
            params: serde_json::json!({ "p": np, "q": nq, "kets": kets.len() }),
            order: o,
            residual: worst[o],
            exact: S::EXACT,
        })
        .collect())
}

/// `Ŵ^s_n` in the fermion picture applied to a boson basis state, then mapped
/// back: the result is a wedge vector. Window overflow is an error.
pub fn w_fermion_on_boson<S: Scalar>(w: &MomentumWindow, s: u32, n: i64, ket: &FockBasisState) -> Result<WedgeVector<S>> {
    let v = boson_basis_in_wedge::<S>(w, ket)?;
    let img = w_fermion(w, s, n, &v);
    if img.lost > 0 {
        return Err(Error::WindowTooSmall { needed: w.half + 1, have: w.half });
    }
    Ok(img.v)
}

/// Boson vector pushed into the wedge.
pub fn boson_vector_in_wedge<S: Scalar>(w: &MomentumWindow, v: &FockVector<S>) -> Result<WedgeVector<S>> {
    let mut r = WedgeVector::zero();
    for (b, c) in &v.terms {
        r = r.add(&boson_basis_in_wedge::<S>(w, b)?.scale(c));
    }
    Ok(r)
}

fn wedge_max_abs<S: Scalar>(v: &WedgeVector<S>) -> f64 {
    v.terms.values().map(|c| c.abs2().sqrt()).fold(0.0, f64::max)
}

/// Max coefficient discrepancy between the boson formula and the fermion
/// picture, over every basis state of `spec`, compared inside the wedge.
pub fn kronig_crosscheck<S: Scalar>(s: u32, n: i64, spec: &TruncationSpec, counterterm: bool) -> Result<ResidualReport> {
    let reach = spec.lambda as i64 + n.abs() + spec.wmin.abs().max(spec.wmax.abs()) + 2;
    let w = MomentumWindow::from_kmax(reach as f64)?;
    let mut worst = 0.0f64;
    for ket in crate::fock::enumerate_basis(spec) {
        let bos = if s <= MAX_CLOSED_SPIN {
            w_boson_closed_with::<S>(s, n, &ket, counterterm)?
        } else {
            w_extracted::<S>(s, n, &ket)?
        };
        let lhs = boson_vector_in_wedge(&w, &bos)?;
        let rhs = w_fermion_on_boson::<S>(&w, s, n, &ket)?;
        worst = worst.max(wedge_max_abs(&lhs.sub(&rhs)));
    }
    Ok(ResidualReport {
        check: "kronig".into(),
        params: serde_json::json!({ "s": s, "p": n, "lambda": spec.lambda, "counterterm": counterterm }),
        order: s as usize - 1,
        residual: worst,
        exact: S::EXACT,
    })
}

/// Fermion-picture bracket check on boson kets mapped into `w`.
pub fn check_winfty_bracket_fermion<S: Scalar>(
    w: &MomentumWindow,
    np: i64,
    nq: i64,
    order: usize,
    kets: &[FockBasisState],
) -> Result<Vec<ResidualReport>> {
    let rhs = rhs_structure::<S>(np, nq, order);
    let central = central_structure::<S>(np, nq, order);
    let mut worst = vec![0.0f64; order + 1];
    let apply = |s: u32, n: i64, v: &WedgeVector<S>| -> Result<WedgeVector<S>> {
        let img = w_fermion(w, s, n, v);
        if img.lost > 0 {
            return Err(Error::WindowTooSmall { needed: w.half + 1, have: w.half });
        }
        Ok(img.v)
    };
    for ket in kets {
        let e = boson_basis_in_wedge::<S>(w, ket)?;
        for i in 0..=order {
            for j in 0..=(order - i) {
                let ab = apply(i as u32 + 1, np, &apply(j as u32 + 1, nq, &e)?)?;
                let ba = apply(j as u32 + 1, nq, &apply(i as u32 + 1, np, &e)?)?;
                let scale = i_pow::<S>(-((i + j) as i64)) * S::from_ratio(1, factorial(i as u32) * factorial(j as u32));
                let mut resid = ab.sub(&ba).scale(&scale);
                for k in 0..order {
                    if let Some(c) = rhs.get(&(i, j, k)) {
                        resid = resid.sub(&apply(k as u32 + 1, np + nq, &e)?.scale(c));
                    }
                }
                resid = resid.sub(&e.scale(&central.coeff(i, j)));
                worst[i + j] = worst[i + j].max(wedge_max_abs(&resid));
            }
        }
    }
    Ok((0..=order)
        .map(|o| ResidualReport {
            check: "winfty_bracket_fermion".into(),
            params: serde_json::json!({ "p": np, "q": nq, "window": w.half }),
            order: o,
            residual: worst[o],
            exact: S::EXACT,
        })
        .collect())
}

/// Test utility for the uniqueness pattern: `A` vanishes on the span of `states`
/// given `[A, ψ*(k)] = 0` for every window mode and `AΩ = 0`. Returns
/// `(max commutator defect, |AΩ|, max |A v|)`.
pub fn uniqueness_pattern<S: Scalar>(
    w: &MomentumWindow,
    a: &dyn Fn(&WedgeVector<S>) -> WedgeVector<S>,
    states: &[WedgeVector<S>],
) -> Result<(f64, f64, f64)> {
    use crate::fermion_oracle::apply_psi_dagger;
    let vac = WedgeVector::basis(w.vacuum());
    let av = wedge_max_abs(&a(&vac));
    let mut comm = 0.0f64;
    let mut img = 0.0f64;
    for v in states {
        img = img.max(wedge_max_abs(&a(v)));
        for j in w.modes() {
            let x = apply_psi_dagger(w, j, &a(v))?;
            let y = a(&apply_psi_dagger(w, j, v)?);
            comm = comm.max(wedge_max_abs(&x.sub(&y)));
        }
    }
    Ok((comm, av, img))
}
