//! Normal-ordered implementers `⋮Γ(e^{if})⋮` on the boson Fock space.
//!
//! `⋮Γ(e^{if})⋮ = e^{iᾱQ/2} R^w e^{iᾱQ/2} e^{idΓ(α⁺)} e^{idΓ(α⁻)}`, evaluated
//! mode by mode: with `a† = ρ̂(−n)` and `a = ρ̂(n)`, each mode contributes
//! `e^{z a†} e^{u a}` with `z = i·c_n`, `u = i·c_{−n}`.

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, FockBasisState, FockVector, SparseOperator, TruncationSpec};
use crate::loopspace::{
    anyon_loop, blip, cocycle_s, cocycle_tilde_s, kernel_b_pow, sgn_eps, BlipParams, KernelParams, LoopFunction,
};
use crate::scalar::{binomial, factorial, C64};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub enum ImplementerKind {
    Plain,
    /// `φ^{±1}_ε(y)`.
    Blip { y: f64, eps: f64, sign: i32 },
    /// `φ^ν_ε(y)` built from `ν·f̃_{y,ε}`.
    Anyon(BlipParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImplementerSpec {
    pub lp: LoopFunction,
    pub kind: ImplementerKind,
}

impl ImplementerSpec {
    pub fn plain(lp: LoopFunction) -> Result<Self> {
        if lp.nu0.is_none() && lp.integer_winding().is_none() {
            return Err(Error::NonIntegerWinding(lp.winding));
        }
        Ok(Self { lp, kind: ImplementerKind::Plain })
    }

    pub fn blip(l: f64, y: f64, eps: f64, sign: i32) -> Result<Self> {
        let lp = blip(l, y, eps)?.scale(sign as f64);
        Ok(Self { lp, kind: ImplementerKind::Blip { y, eps, sign } })
    }

    pub fn anyon(l: f64, p: BlipParams) -> Result<Self> {
        Ok(Self { lp: anyon_loop(l, &p)?, kind: ImplementerKind::Anyon(p) })
    }

    /// Integer sector shift.
    pub fn winding(&self) -> i64 {
        self.lp.integer_winding().expect("implementer loops carry integer winding")
    }

    /// `(ν, y, ε)` for field-type implementers.
    pub fn field_data(&self) -> Option<(f64, f64, f64)> {
        match &self.kind {
            ImplementerKind::Plain => None,
            ImplementerKind::Blip { y, eps, sign } => Some((*sign as f64, *y, *eps)),
            ImplementerKind::Anyon(p) => Some((p.nu, p.y, p.eps)),
        }
    }
}

/// Coefficient of `|m⟩` in `e^{z a†} e^{u a} |m'⟩` for mode `n`
/// (`a†` raises with weight one, `a` lowers with weight `m·n`).
pub fn mode_coefficient(n: usize, m_bra: u32, m_ket: u32, z: C64, u: C64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for j in 0..=m_ket {
        let k = m_bra as i64 - m_ket as i64 + j as i64;
        if k < 0 {
            continue;
        }
        let term = C64::new(binomial(m_ket, j) as f64, 0.0) * (u * n as f64).powu(j) * z.powu(k as u32)
            / factorial(k as u32) as f64;
        s += term;
    }
    s
}

fn mode_pair(lp: &LoopFunction, n: usize) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    (i * lp.mode(n as i64), i * lp.mode(-(n as i64)))
}

/// Coefficient of `bra` in `⋮Γ(e^{if})⋮ ket`; zero across mismatched sectors.
pub fn implementer_coefficient(spec: &ImplementerSpec, bra: &FockBasisState, ket: &FockBasisState) -> C64 {
    let w = spec.winding();
    if bra.w != ket.w + w {
        return C64::new(0.0, 0.0);
    }
    let zero_mode = C64::new(0.0, 1.0) * spec.lp.mean * ((2 * ket.w + w) as f64 / 2.0);
    let mut v = zero_mode.exp();
    let nmax = bra.occ.len().max(ket.occ.len());
    for n in 1..=nmax {
        let (mb, mk) = (bra.m(n), ket.m(n));
        if mb == 0 && mk == 0 {
            continue;
        }
        let (z, u) = mode_pair(&spec.lp, n);
        v *= mode_coefficient(n, mb, mk, z, u);
        if v == C64::new(0.0, 0.0) {
            break;
        }
    }
    v
}

/// `⟨bra, ⋮Γ(e^{if})⋮ ket⟩`.
pub fn implementer_matrix_element(spec: &ImplementerSpec, bra: &FockBasisState, ket: &FockBasisState) -> C64 {
    implementer_coefficient(spec, bra, ket) * bra.norm_sqr_int() as f64
}

/// `⟨Ω, Γ(e^{if})Ω⟩ = δ_{w,0} e^{−iS(α⁻,α⁺)/2}` for the un-normal-ordered implementer.
pub fn vacuum_expectation_unordered(lp: &LoopFunction) -> C64 {
    if lp.integer_winding() != Some(0) {
        return C64::new(0.0, 0.0);
    }
    let s = cocycle_s(&lp.minus_part(), &lp.plus_part());
    (C64::new(0.0, -0.5) * s).exp()
}

/// Materialize `⋮Γ(e^{if})⋮` on a truncated space.
pub fn implementer_operator(spec: &ImplementerSpec, trunc: &TruncationSpec) -> SparseOperator<C64> {
    let basis = enumerate_basis(trunc);
    let w = spec.winding();
    let index: std::collections::HashMap<_, _> = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let cols: Vec<Vec<(usize, C64)>> = basis
        .par_iter()
        .map(|ket| {
            let mut col = Vec::new();
            for (i, bra) in basis.iter().enumerate() {
                if bra.w != ket.w + w {
                    continue;
                }
                let c = implementer_coefficient(spec, bra, ket);
                if c.norm() > 0.0 {
                    col.push((i, c));
                }
            }
            col
        })
        .collect();
    let lost = vec![f64::NAN; basis.len()];
    SparseOperator { basis, index, cols, lost }
}

/// Apply `⋮Γ(e^{if})⋮` to a vector, keeping components inside `trunc`.
pub fn apply_implementer(spec: &ImplementerSpec, v: &FockVector<C64>, trunc: &TruncationSpec) -> FockVector<C64> {
    let basis = enumerate_basis(trunc);
    let w = spec.winding();
    let mut r = FockVector::zero();
    for (ket, c) in &v.terms {
        for bra in basis.iter().filter(|b| b.w == ket.w + w) {
            let a = implementer_coefficient(spec, bra, ket);
            if a.norm() > 0.0 {
                r.add_term(bra.clone(), a * c);
            }
        }
    }
    r
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalOrderedProduct {
    pub prefactor: C64,
    pub merged: LoopFunction,
}

/// `X₁⋯X_N = prefactor · ⋮X₁⋯X_N⋮` with `prefactor = Π_{i<j} e^{−iS̃(f_i,f_j)/2}`.
pub fn normal_order_product(specs: &[ImplementerSpec]) -> Result<NormalOrderedProduct> {
    let first = specs.first().ok_or_else(|| Error::Invalid("empty product".into()))?;
    check_regularized(specs)?;
    let mut exponent = C64::new(0.0, 0.0);
    for i in 0..specs.len() {
        for j in (i + 1)..specs.len() {
            exponent += cocycle_tilde_s(&specs[i].lp, &specs[j].lp);
        }
    }
    let mut merged = first.lp.clone();
    for s in &specs[1..] {
        merged = merged.add(&s.lp);
    }
    Ok(NormalOrderedProduct { prefactor: (C64::new(0.0, -0.5) * exponent).exp(), merged })
}

fn check_regularized(specs: &[ImplementerSpec]) -> Result<()> {
    for i in 0..specs.len() {
        for j in (i + 1)..specs.len() {
            if let (Some((_, yi, ei)), Some((_, yj, ej))) = (specs[i].field_data(), specs[j].field_data()) {
                if ei + ej <= 0.0 && (yi - yj).abs() < 1e-14 {
                    return Err(Error::Singular(yi - yj));
                }
            }
        }
    }
    Ok(())
}

/// Closed form of the prefactor for field-type implementers: `Π_{i<j} b_{ε_i+ε_j}(y_i − y_j)^{ν_iν_j}`.
pub fn normal_order_prefactor_closed(specs: &[ImplementerSpec], l: f64) -> Result<C64> {
    check_regularized(specs)?;
    let data: Vec<(f64, f64, f64)> = specs
        .iter()
        .map(|s| s.field_data().ok_or_else(|| Error::Invalid("closed form needs field kinds".into())))
        .collect::<Result<_>>()?;
    let mut v = C64::new(1.0, 0.0);
    for i in 0..data.len() {
        for j in (i + 1)..data.len() {
            let p = KernelParams::new(l, data[i].2 + data[j].2, 0.0)?;
            v *= kernel_b_pow(data[i].1 - data[j].1, &p, data[i].0 * data[j].0)?;
        }
    }
    Ok(v)
}

/// Ratio `X_a X_b / (X_b X_a)` read off from the normal-ordering prefactors.
pub fn exchange_ratio(a: &ImplementerSpec, b: &ImplementerSpec) -> Result<C64> {
    let ab = normal_order_product(&[a.clone(), b.clone()])?;
    let ba = normal_order_product(&[b.clone(), a.clone()])?;
    Ok(ab.prefactor / ba.prefactor)
}

/// `e^{−iπνν′ sgn_{ε+ε′}(x − y)}`, the factor relating `φ^ν(x)φ^{ν′}(y)` to `φ^{ν′}(y)φ^ν(x)`.
pub fn exchange_phase_closed(l: f64, nu: f64, x: f64, eps: f64, nu_p: f64, y: f64, eps_p: f64) -> Result<C64> {
    let s = sgn_eps(l, x - y, eps + eps_p)?;
    Ok((C64::new(0.0, -PI * nu * nu_p) * s).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldInsertion {
    pub nu: f64,
    pub y: f64,
    pub eps: f64,
}

/// `⟨Ω, φ^{ν₁}(y₁)⋯φ^{ν_N}(y_N)Ω⟩ = δ_{Σν,0} Π_{j<k} b_{ε_j+ε_k}(y_j − y_k)^{ν_jν_k}` at nome `q`.
pub fn anyon_correlator(l: f64, ins: &[FieldInsertion], q: f64) -> Result<C64> {
    let total: f64 = ins.iter().map(|f| f.nu).sum();
    if total.abs() > 1e-9 {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut v = C64::new(1.0, 0.0);
    for j in 0..ins.len() {
        for k in (j + 1)..ins.len() {
            let e = ins[j].eps + ins[k].eps;
            if e <= 0.0 && (ins[j].y - ins[k].y).abs() < 1e-14 {
                return Err(Error::Singular(0.0));
            }
            let p = KernelParams::new(l, e, q)?;
            v *= kernel_b_pow(ins[j].y - ins[k].y, &p, ins[j].nu * ins[k].nu)?;
        }
    }
    Ok(v)
}

/// `⟨Ω, X₁⋯X_N Ω⟩` by successive application on the level-truncated space.
pub fn vacuum_chain_level_truncated(specs: &[ImplementerSpec], trunc: &TruncationSpec) -> C64 {
    let mut v = FockVector::<C64>::vacuum();
    for s in specs.iter().rev() {
        v = apply_implementer(s, &v, trunc);
    }
    v.coeff(&FockBasisState::vacuum())
}

/// Occupation cutoff and mode range of a per-mode truncated chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeTruncation {
    pub nmax: usize,
    pub occupation_cap: u32,
}

/// `⟨Ω, X₁⋯X_N Ω⟩` on the product truncation `⊗_{n ≤ nmax} span{|m⟩ : m ≤ cap}`.
pub fn vacuum_chain_mode_truncated(specs: &[ImplementerSpec], mt: ModeTruncation) -> C64 {
    let mut w = 0i64;
    let mut phase = C64::new(0.0, 0.0);
    for s in specs.iter().rev() {
        let ws = s.winding();
        phase += C64::new(0.0, 1.0) * s.lp.mean * ((2 * w + ws) as f64 / 2.0);
        w += ws;
    }
    if w != 0 {
        return C64::new(0.0, 0.0);
    }
    let cap = mt.occupation_cap as usize;
    let mode_factors: Vec<C64> = (1..=mt.nmax)
        .into_par_iter()
        .map(|n| {
            let mut v = vec![C64::new(0.0, 0.0); cap + 1];
            v[0] = C64::new(1.0, 0.0);
            for s in specs.iter().rev() {
                let (z, u) = mode_pair(&s.lp, n);
                let mut out = vec![C64::new(0.0, 0.0); cap + 1];
                for (mk, &a) in v.iter().enumerate() {
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (mb, o) in out.iter_mut().enumerate() {
                        *o += a * mode_coefficient(n, mb as u32, mk as u32, z, u);
                    }
                }
                v = out;
            }
            v[0]
        })
        .collect();
    mode_factors.into_iter().fold(phase.exp(), |acc, f| acc * f)
}

/// Which of two smeared fields carries `+1` or `−1` charge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Charge {
    Plus,
    Minus,
}

/// Smeared field `φ^{±1}(f) = L^{−1/2}∫ f(x) φ^{±1}_ε(x) dx` (conjugated `f` for `−1`),
/// with `f = e_k` the normalized plane wave of fermion mode `j`.
/// Matrix elements depend on `x` through one exponential, integrated by the
/// trapezoid rule on `grid` points.
pub fn smeared_field(
    l: f64,
    charge: Charge,
    j: i64,
    eps: f64,
    rows: &TruncationSpec,
    cols: &TruncationSpec,
    grid: usize,
) -> Result<SparseOperator<C64>> {
    let sign = match charge {
        Charge::Plus => 1,
        Charge::Minus => -1,
    };
    let spec = ImplementerSpec::blip(l, 0.0, eps, sign)?;
    let row_basis = enumerate_basis(rows);
    let col_basis = enumerate_basis(cols);
    let dk = 2.0 * PI / l;
    let kf = (j as f64 + 0.5) * dk;
    let smear = |kk: f64| -> C64 {
        // L^{-1/2} ∫ f(x) e^{-iKx} dx with f = e^{± i k x}/√L
        let target = sign as f64 * kf;
        crate::quad::trapezoid_periodic(-l / 2.0, l, grid, |x| C64::from_polar(1.0, (target - kk) * x)) / l
    };
    let mut all: Vec<FockBasisState> = row_basis.clone();
    let in_rows: std::collections::HashSet<_> = row_basis.iter().cloned().collect();
    for b in &col_basis {
        if !in_rows.contains(b) {
            all.push(b.clone());
        }
    }
    all.sort();
    let index: std::collections::HashMap<_, _> = all.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let col_set: std::collections::HashSet<_> = col_basis.iter().cloned().collect();
    let cols_v: Vec<Vec<(usize, C64)>> = all
        .par_iter()
        .map(|ket| {
            if !col_set.contains(ket) {
                return Vec::new();
            }
            let mut col = Vec::new();
            for bra in row_basis.iter().filter(|b| b.w == ket.w + sign as i64) {
                let c0 = implementer_coefficient(&spec, bra, ket);
                if c0.norm() == 0.0 {
                    continue;
                }
                let kk = dk * (bra.level() as f64 - ket.level() as f64)
                    + sign as f64 * dk * (2 * ket.w + sign as i64) as f64 / 2.0;
                let s = smear(kk);
                if s.norm() > 1e-14 {
                    col.push((index[bra], c0 * s));
                }
            }
            col
        })
        .collect();
    let lost = vec![0.0; all.len()];
    Ok(SparseOperator { basis: all, index, cols: cols_v, lost })
}

/// Anticommutator defects `‖{φ¹(f), φ¹(g)}‖` and `‖{φ¹(f), φ^{−1}(g)} − (g,f)‖`
/// for plane waves `f = e_{k_{jf}}`, `g = e_{k_{jg}}`, in operator norm over
/// the kets of level ≤ `trunc.lambda`. Intermediate states are kept up to
/// `trunc.lambda + margin` so the defects carry no truncation error.
pub fn car_residual(l: f64, jf: i64, jg: i64, eps: f64, trunc: &TruncationSpec, margin: u64) -> Result<(f64, f64)> {
    let big = TruncationSpec { lambda: trunc.lambda + 2 * margin, wmin: trunc.wmin - 2, wmax: trunc.wmax + 2 };
    let mid = TruncationSpec { lambda: trunc.lambda + margin, wmin: trunc.wmin - 1, wmax: trunc.wmax + 1 };
    let grid = 8 * (2 * big.lambda as usize + 2 * jf.unsigned_abs().max(jg.unsigned_abs()) as usize + 8);
    let f_in = smeared_field(l, Charge::Plus, jf, eps, &mid, trunc, grid)?;
    let g_in = smeared_field(l, Charge::Plus, jg, eps, &mid, trunc, grid)?;
    let f_out = smeared_field(l, Charge::Plus, jf, eps, &big, &mid, grid)?;
    let g_out = smeared_field(l, Charge::Plus, jg, eps, &big, &mid, grid)?;
    let gm_in = smeared_field(l, Charge::Minus, jg, eps, &mid, trunc, grid)?;
    let gm_out = smeared_field(l, Charge::Minus, jg, eps, &big, &mid, grid)?;
    let kets = enumerate_basis(trunc);
    let overlap = if jf == jg { 1.0 } else { 0.0 };
    let mut d1_cols = Vec::new();
    let mut d2_cols = Vec::new();
    for ket in &kets {
        let e = FockVector::basis(ket.clone());
        let a = f_out.apply(&g_in.apply(&e)).add(&g_out.apply(&f_in.apply(&e)));
        let b = f_out.apply(&gm_in.apply(&e)).add(&gm_out.apply(&f_in.apply(&e)));
        let b = b.sub(&e.scale(&C64::new(overlap, 0.0)));
        let norm = (ket.norm_sqr_int() as f64).sqrt();
        d1_cols.push(a.scale(&C64::new(1.0 / norm, 0.0)));
        d2_cols.push(b.scale(&C64::new(1.0 / norm, 0.0)));
    }
    Ok((operator_norm(&d1_cols), operator_norm(&d2_cols)))
}

/// Largest singular value of the map whose columns (images of an orthonormal set) are given.
pub fn operator_norm(cols: &[FockVector<C64>]) -> f64 {
    let rows: BTreeSet<FockBasisState> = cols.iter().flat_map(|c| c.terms.keys().cloned()).collect();
    let rows: Vec<_> = rows.into_iter().collect();
    let idx: std::collections::HashMap<_, _> = rows.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let mut m = nalgebra::DMatrix::<C64>::zeros(rows.len().max(1), cols.len().max(1));
    for (j, c) in cols.iter().enumerate() {
        for (b, a) in &c.terms {
            m[(idx[b], j)] = a * (b.norm_sqr_int() as f64).sqrt();
        }
    }
    let g = m.adjoint() * &m;
    let ev = g.symmetric_eigenvalues();
    ev.iter().fold(0.0f64, |a, &x| a.max(x)).max(0.0).sqrt()
}

/// Correlator table rows `nu_1,y_1,eps_1,…,re,im`.
pub fn correlator_csv(l: f64, rows: &[Vec<FieldInsertion>], q: f64) -> Result<String> {
    use std::fmt::Write as _;
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut s = String::new();
    for i in 1..=width {
        let _ = write!(s, "nu_{i},y_{i},eps_{i},");
    }
    s.push_str("re,im\n");
    for r in rows {
        let v = anyon_correlator(l, r, q)?;
        for f in r {
            let _ = write!(s, "{},{},{},", f.nu, f.y, f.eps);
        }
        let _ = writeln!(s, "{:.17e},{:.17e}", v.re, v.im);
    }
    Ok(s)
}
