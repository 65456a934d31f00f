//! Truncated bosonic Fock space spanned by `Π ρ̂(−2πn/L)^{m_n} R^w Ω`.
//!
//! Basis vectors are not normalized: `‖Π ρ̂(−n)^{m_n} R^wΩ‖² = Π m_n!·n^{m_n}`,
//! which is what `[ρ̂(p), ρ̂(−p)] = pL/2π` gives in units where `ρ̂(±n)` means
//! `ρ̂(±2πn/L)`. Operators act on unbounded occupation data; truncation only
//! enters through [`TruncationSpec::project`] and [`SparseOperator`].

use crate::error::{Error, Result};
use crate::loopspace::LoopFunction;
use crate::scalar::{factorial, Scalar, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockBasisState {
    /// `occ[n-1] = m_n`; no trailing zeros.
    pub occ: Vec<u32>,
    pub w: i64,
}

impl FockBasisState {
    pub fn vacuum() -> Self {
        Self { occ: Vec::new(), w: 0 }
    }
    pub fn sector(w: i64) -> Self {
        Self { occ: Vec::new(), w }
    }
    pub fn new(mut occ: Vec<u32>, w: i64) -> Self {
        while occ.last() == Some(&0) {
            occ.pop();
        }
        Self { occ, w }
    }
    pub fn m(&self, n: usize) -> u32 {
        if n == 0 {
            return 0;
        }
        self.occ.get(n - 1).copied().unwrap_or(0)
    }
    pub fn level(&self) -> u64 {
        self.occ.iter().enumerate().map(|(i, &m)| (i as u64 + 1) * m as u64).sum()
    }
    pub fn with_m(&self, n: usize, m: u32) -> Self {
        let mut occ = self.occ.clone();
        if occ.len() < n {
            occ.resize(n, 0);
        }
        occ[n - 1] = m;
        Self::new(occ, self.w)
    }
    /// `Π m_n!·n^{m_n}`.
    pub fn norm_sqr_int(&self) -> i64 {
        self.occ
            .iter()
            .enumerate()
            .map(|(i, &m)| factorial(m) * ((i as i64 + 1).pow(m)))
            .product()
    }
}

impl Ord for FockBasisState {
    fn cmp(&self, o: &Self) -> Ordering {
        self.w
            .cmp(&o.w)
            .then(self.level().cmp(&o.level()))
            .then_with(|| {
                let n = self.occ.len().max(o.occ.len());
                for i in (0..n).rev() {
                    let c = self.m(i + 1).cmp(&o.m(i + 1));
                    if c != Ordering::Equal {
                        return c.reverse();
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for FockBasisState {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse vector over the (unnormalized) boson basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<S> {
    pub terms: BTreeMap<FockBasisState, S>,
}

impl<S: Scalar> Default for FockVector<S> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<S: Scalar> FockVector<S> {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn basis(b: FockBasisState) -> Self {
        let mut v = Self::zero();
        v.terms.insert(b, S::one());
        v
    }
    pub fn vacuum() -> Self {
        Self::basis(FockBasisState::vacuum())
    }
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }
    pub fn add_term(&mut self, b: FockBasisState, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(e) => {
                *e = e.clone() + c;
                if e.is_zero() {
                    self.terms.remove(&b);
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (b, c) in &o.terms {
            r.add_term(b.clone(), c.clone());
        }
        r
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }
    pub fn scale(&self, a: &S) -> Self {
        let mut r = Self::zero();
        for (b, c) in &self.terms {
            r.add_term(b.clone(), c.clone() * a.clone());
        }
        r
    }
    pub fn coeff(&self, b: &FockBasisState) -> S {
        self.terms.get(b).cloned().unwrap_or_else(S::zero)
    }
    /// `⟨self, o⟩`, antilinear in the first slot.
    pub fn inner(&self, o: &Self) -> S {
        let mut s = S::zero();
        for (b, c) in &self.terms {
            if let Some(d) = o.terms.get(b) {
                s = s + c.conj() * d.clone() * S::from_int(b.norm_sqr_int());
            }
        }
        s
    }
    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().fold(0.0, |a, (b, c)| a + c.abs2() * b.norm_sqr_int() as f64)
    }
    pub fn max_level(&self) -> u64 {
        self.terms.keys().map(|b| b.level()).max().unwrap_or(0)
    }
    pub fn map_basis(&self, f: impl Fn(&FockBasisState) -> FockVector<S>) -> Self {
        let mut r = Self::zero();
        for (b, c) in &self.terms {
            for (b2, c2) in f(b).terms {
                r.add_term(b2, c.clone() * c2);
            }
        }
        r
    }
    pub fn to_c64(&self) -> FockVector<C64> {
        FockVector { terms: self.terms.iter().map(|(b, c)| (b.clone(), c.to_c64())).collect() }
    }
}

/// `ρ̂(−n)` for `n ≥ 1`: raise `m_n` by one.
pub fn raise<S: Scalar>(n: usize, v: &FockVector<S>) -> FockVector<S> {
    let mut r = FockVector::zero();
    for (b, c) in &v.terms {
        r.add_term(b.with_m(n, b.m(n) + 1), c.clone());
    }
    r
}

/// `ρ̂(n)` for `n ≥ 1`: lower `m_n` with weight `m_n·n`.
pub fn lower<S: Scalar>(n: usize, v: &FockVector<S>) -> FockVector<S> {
    let mut r = FockVector::zero();
    for (b, c) in &v.terms {
        let m = b.m(n);
        if m > 0 {
            r.add_term(b.with_m(n, m - 1), c.clone() * S::from_int(m as i64 * n as i64));
        }
    }
    r
}

/// `ρ̂(2πn/L)` for any integer `n`; `n = 0` is `Q`.
pub fn apply_rho<S: Scalar>(n: i64, v: &FockVector<S>) -> FockVector<S> {
    match n.cmp(&0) {
        Ordering::Less => raise((-n) as usize, v),
        Ordering::Greater => lower(n as usize, v),
        Ordering::Equal => apply_q(v),
    }
}

pub fn apply_q<S: Scalar>(v: &FockVector<S>) -> FockVector<S> {
    let mut r = FockVector::zero();
    for (b, c) in &v.terms {
        r.add_term(b.clone(), c.clone() * S::from_int(b.w));
    }
    r
}

/// `R^k`: shift every winding sector by `k`.
pub fn apply_r<S: Scalar>(k: i64, v: &FockVector<S>) -> FockVector<S> {
    FockVector {
        terms: v
            .terms
            .iter()
            .map(|(b, c)| (FockBasisState { occ: b.occ.clone(), w: b.w + k }, c.clone()))
            .collect(),
    }
}

/// `R^k` with an explicit sector range check.
pub fn apply_r_checked<S: Scalar>(k: i64, v: &FockVector<S>, spec: &TruncationSpec) -> Result<FockVector<S>> {
    for b in v.terms.keys() {
        let w = b.w + k;
        if w < spec.wmin || w > spec.wmax {
            return Err(Error::SectorOutOfRange(w, spec.wmin, spec.wmax));
        }
    }
    Ok(apply_r(k, v))
}

/// `dΓ(α) = ᾱQ + Σ_n c_n ρ̂(−2πn/L)` for a zero-winding loop.
pub fn apply_dgamma(alpha: &LoopFunction, v: &FockVector<C64>) -> Result<FockVector<C64>> {
    if alpha.winding.abs() > 1e-12 {
        return Err(Error::NonzeroWinding(alpha.winding));
    }
    let mut r = apply_q(v).scale(&alpha.mean);
    for (&n, &c) in &alpha.modes {
        r = r.add(&apply_rho(-n, v).scale(&c));
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub lambda: u64,
    pub wmin: i64,
    pub wmax: i64,
}

/// Outcome of projecting onto the truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncated<S> {
    pub kept: FockVector<S>,
    pub dropped_terms: usize,
    pub dropped_weight: f64,
}

impl TruncationSpec {
    pub fn new(lambda: u64, wmin: i64, wmax: i64) -> Result<Self> {
        if wmin > wmax {
            return Err(Error::Invalid(format!("empty sector range [{wmin}, {wmax}]")));
        }
        Ok(Self { lambda, wmin, wmax })
    }
    pub fn single(lambda: u64) -> Self {
        Self { lambda, wmin: 0, wmax: 0 }
    }
    pub fn contains(&self, b: &FockBasisState) -> bool {
        b.level() <= self.lambda && b.w >= self.wmin && b.w <= self.wmax
    }
    pub fn project<S: Scalar>(&self, v: &FockVector<S>) -> Truncated<S> {
        let mut kept = FockVector::zero();
        let mut dropped_terms = 0;
        let mut dropped_weight = 0.0;
        for (b, c) in &v.terms {
            if self.contains(b) {
                kept.terms.insert(b.clone(), c.clone());
            } else {
                dropped_terms += 1;
                dropped_weight += c.abs2() * b.norm_sqr_int() as f64;
            }
        }
        Truncated { kept, dropped_terms, dropped_weight }
    }
}

/// All partitions of `level` as occupation vectors, largest part first in graded-lex order.
pub fn partitions(level: u64) -> Vec<Vec<u32>> {
    fn rec(rem: u64, max_part: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            let mut occ = vec![0u32; cur.first().copied().unwrap_or(0) as usize];
            for &p in cur.iter() {
                occ[p as usize - 1] += 1;
            }
            out.push(occ);
            return;
        }
        for p in (1..=max_part.min(rem)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(level, level, &mut Vec::new(), &mut out);
    out
}

/// Basis of the truncated space, ordered by sector, then level, then graded-lex.
pub fn enumerate_basis(spec: &TruncationSpec) -> Vec<FockBasisState> {
    let mut v = Vec::new();
    for w in spec.wmin..=spec.wmax {
        for level in 0..=spec.lambda {
            for occ in partitions(level) {
                v.push(FockBasisState::new(occ, w));
            }
        }
    }
    v.sort();
    v
}

/// Materialized operator on a truncated space: column `j` is the image of basis state `j`.
#[derive(Clone, Debug)]
pub struct SparseOperator<S> {
    pub basis: Vec<FockBasisState>,
    pub index: HashMap<FockBasisState, usize>,
    pub cols: Vec<Vec<(usize, S)>>,
    /// Dropped `ℓ²` weight per column.
    pub lost: Vec<f64>,
}

impl<S: Scalar> SparseOperator<S> {
    pub fn build(spec: &TruncationSpec, f: impl Fn(&FockVector<S>) -> FockVector<S> + Sync) -> Self {
        let basis = enumerate_basis(spec);
        Self::build_on(basis, f)
    }

    pub fn build_on(basis: Vec<FockBasisState>, f: impl Fn(&FockVector<S>) -> FockVector<S> + Sync) -> Self {
        let index: HashMap<_, _> = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        let results: Vec<(Vec<(usize, S)>, f64)> = basis
            .par_iter()
            .map(|b| {
                let img = f(&FockVector::basis(b.clone()));
                let mut col = Vec::new();
                let mut lost = 0.0;
                for (b2, c) in img.terms {
                    match index.get(&b2) {
                        Some(&i) => col.push((i, c)),
                        None => lost += c.abs2() * b2.norm_sqr_int() as f64,
                    }
                }
                col.sort_by_key(|(i, _)| *i);
                (col, lost)
            })
            .collect();
        let (cols, lost) = results.into_iter().unzip();
        Self { basis, index, cols, lost }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coefficient of basis state `i` in the image of basis state `j`.
    pub fn coeff(&self, i: usize, j: usize) -> S {
        self.cols[j].iter().find(|(r, _)| *r == i).map(|(_, c)| c.clone()).unwrap_or_else(S::zero)
    }

    /// `⟨e_i, A e_j⟩` in the true inner product.
    pub fn matrix_element(&self, i: usize, j: usize) -> S {
        self.coeff(i, j) * S::from_int(self.basis[i].norm_sqr_int())
    }

    pub fn apply(&self, v: &FockVector<S>) -> FockVector<S> {
        let mut r = FockVector::zero();
        for (b, c) in &v.terms {
            if let Some(&j) = self.index.get(b) {
                for (i, a) in &self.cols[j] {
                    r.add_term(self.basis[*i].clone(), a.clone() * c.clone());
                }
            }
        }
        r
    }

    pub fn total_lost(&self) -> f64 {
        self.lost.iter().sum()
    }

    /// Coordinate export of the coefficient matrix: `row,col,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,re,im\n");
        for (j, col) in self.cols.iter().enumerate() {
            for (i, c) in col {
                let z = c.to_c64();
                let _ = writeln!(s, "{i},{j},{:.17e},{:.17e}", z.re, z.im);
            }
        }
        s
    }

    /// Dense matrix in the orthonormalized basis `e_i/‖e_i‖`.
    pub fn to_dense_orthonormal(&self) -> nalgebra::DMatrix<C64> {
        let n = self.dim();
        let norms: Vec<f64> = self.basis.iter().map(|b| (b.norm_sqr_int() as f64).sqrt()).collect();
        let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
        for (j, col) in self.cols.iter().enumerate() {
            for (i, c) in col {
                m[(*i, j)] = c.to_c64() * norms[*i] / norms[j];
            }
        }
        m
    }
}
