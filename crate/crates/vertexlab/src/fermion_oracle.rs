//! Semi-infinite wedge space over a finite momentum window, used as an
//! independent fermionic model of the boson operators.
//!
//! Mode `j` carries momentum `k = (j + ½)·2π/L`; the window holds
//! `j ∈ [−J, J)`. Every mode below the window is filled, every mode above is
//! empty. A state is a bitmask with bit `j + J` set when mode `j` is occupied.

use crate::error::{Error, Result};
use crate::fock::FockBasisState;
use crate::scalar::Scalar;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MomentumWindow {
    /// `J`: the window is `j ∈ [−J, J)`, i.e. `|k| ≤ (J − ½)·2π/L`.
    pub half: i64,
}

pub type WedgeState = u128;

impl MomentumWindow {
    /// Window `|k| ≤ kmax` with `kmax` in units of `2π/L`.
    pub fn from_kmax(kmax_units: f64) -> Result<Self> {
        let half = (kmax_units + 0.5 + 1e-9).floor() as i64;
        if half < 1 || half > 64 {
            return Err(Error::Invalid(format!("window kmax = {kmax_units} not in [1/2, 63.5]")));
        }
        Ok(Self { half })
    }
    pub fn kmax_units(&self) -> f64 {
        self.half as f64 - 0.5
    }
    pub fn contains(&self, j: i64) -> bool {
        j >= -self.half && j < self.half
    }
    fn bit(&self, j: i64) -> u32 {
        (j + self.half) as u32
    }
    pub fn modes(&self) -> std::ops::Range<i64> {
        -self.half..self.half
    }
    pub fn vacuum(&self) -> WedgeState {
        (1u128 << self.half) - 1
    }
    pub fn occupied(&self, s: WedgeState, j: i64) -> bool {
        if j < -self.half {
            return true;
        }
        if j >= self.half {
            return false;
        }
        s >> self.bit(j) & 1 == 1
    }
    pub fn charge(&self, s: WedgeState) -> i64 {
        s.count_ones() as i64 - self.half
    }
    /// Particle modes `j ≥ 0` that are occupied.
    pub fn particles(&self, s: WedgeState) -> Vec<i64> {
        (0..self.half).filter(|&j| self.occupied(s, j)).collect()
    }
    /// Hole modes `j < 0` that are empty.
    pub fn holes(&self, s: WedgeState) -> Vec<i64> {
        (-self.half..0).filter(|&j| !self.occupied(s, j)).collect()
    }
    /// Largest boson-basis level plus sector charge the window represents exactly.
    pub fn check_capacity(&self, level: i64, abs_w: i64) -> Result<()> {
        let needed = level + abs_w;
        if needed > self.half {
            return Err(Error::WindowTooSmall { needed, have: self.half });
        }
        Ok(())
    }

    fn sign_below(&self, s: WedgeState, j: i64) -> i64 {
        let b = self.bit(j);
        let mask = if b == 0 { 0 } else { (1u128 << b) - 1 };
        if (s & mask).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `ψ*(k_j)`: `None` when the mode is occupied; sign from the modes below.
    pub fn psi_dagger(&self, j: i64, s: WedgeState) -> Result<Option<(i64, WedgeState)>> {
        if !self.contains(j) {
            return Err(Error::OutsideWindow(j));
        }
        if self.occupied(s, j) {
            return Ok(None);
        }
        Ok(Some((self.sign_below(s, j), s | 1u128 << self.bit(j))))
    }

    /// `ψ(k_j)`.
    pub fn psi(&self, j: i64, s: WedgeState) -> Result<Option<(i64, WedgeState)>> {
        if !self.contains(j) {
            return Err(Error::OutsideWindow(j));
        }
        if !self.occupied(s, j) {
            return Ok(None);
        }
        Ok(Some((self.sign_below(s, j), s & !(1u128 << self.bit(j)))))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WedgeVector<S> {
    pub terms: BTreeMap<WedgeState, S>,
}

impl<S: Scalar> Default for WedgeVector<S> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<S: Scalar> WedgeVector<S> {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn basis(s: WedgeState) -> Self {
        let mut v = Self::zero();
        v.terms.insert(s, S::one());
        v
    }
    pub fn add_term(&mut self, s: WedgeState, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&s) {
            Some(e) => {
                *e = e.clone() + c;
                if e.is_zero() {
                    self.terms.remove(&s);
                }
            }
            None => {
                self.terms.insert(s, c);
            }
        }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (s, c) in &o.terms {
            r.add_term(*s, c.clone());
        }
        r
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }
    pub fn scale(&self, a: &S) -> Self {
        let mut r = Self::zero();
        for (s, c) in &self.terms {
            r.add_term(*s, c.clone() * a.clone());
        }
        r
    }
    /// Orthonormal-basis inner product, antilinear in the first slot.
    pub fn inner(&self, o: &Self) -> S {
        let mut acc = S::zero();
        for (s, c) in &self.terms {
            if let Some(d) = o.terms.get(s) {
                acc = acc + c.conj() * d.clone();
            }
        }
        acc
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Result of an operator application: image plus the number of dropped terms.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeImage<S> {
    pub v: WedgeVector<S>,
    pub lost: usize,
}

pub fn apply_psi_dagger<S: Scalar>(w: &MomentumWindow, j: i64, v: &WedgeVector<S>) -> Result<WedgeVector<S>> {
    let mut r = WedgeVector::zero();
    for (s, c) in &v.terms {
        if let Some((sg, t)) = w.psi_dagger(j, *s)? {
            r.add_term(t, c.clone() * S::from_int(sg));
        }
    }
    Ok(r)
}

pub fn apply_psi<S: Scalar>(w: &MomentumWindow, j: i64, v: &WedgeVector<S>) -> Result<WedgeVector<S>> {
    let mut r = WedgeVector::zero();
    for (s, c) in &v.terms {
        if let Some((sg, t)) = w.psi(j, *s)? {
            r.add_term(t, c.clone() * S::from_int(sg));
        }
    }
    Ok(r)
}

/// Normal-ordered bilinear `Σ X(j', j) :ψ*(k_{j'})ψ(k_j):` with `X` supported on
/// `|j' − j| ≤ reach`. Diagonal terms subtract the sea, so `dΓ(X)Ω = 0` for
/// diagonal `X`. Terms leaving the window are dropped and counted.
pub fn bilinear_dgamma<S: Scalar>(
    w: &MomentumWindow,
    kernel: impl Fn(i64, i64) -> S,
    reach: i64,
    v: &WedgeVector<S>,
) -> WedgeImage<S> {
    let mut r = WedgeVector::zero();
    let mut lost = 0;
    for (s, c) in &v.terms {
        for j in w.modes() {
            for jp in (j - reach)..=(j + reach) {
                let x = kernel(jp, j);
                if x.is_zero() {
                    continue;
                }
                if jp == j {
                    let n = w.occupied(*s, j) as i64 - (j < 0) as i64;
                    if n != 0 {
                        r.add_term(*s, c.clone() * x * S::from_int(n));
                    }
                    continue;
                }
                if !w.occupied(*s, j) {
                    continue;
                }
                if jp < -w.half {
                    continue;
                }
                if jp >= w.half {
                    lost += 1;
                    continue;
                }
                let (s1, t) = w.psi(j, *s).expect("in window").expect("occupied");
                if let Some((s2, u)) = w.psi_dagger(jp, t).expect("in window") {
                    r.add_term(u, c.clone() * x * S::from_int(s1 * s2));
                }
            }
        }
        // annihilating below the window would leave the sea; such terms have j < −J
        // and never appear in the loop above, so count them explicitly.
        for j in (-w.half - reach)..(-w.half) {
            for jp in (j - reach)..=(j + reach) {
                if jp != j && jp >= -w.half && !w.occupied(*s, jp) && !kernel(jp, j).is_zero() {
                    lost += 1;
                }
            }
        }
    }
    WedgeImage { v: r, lost }
}

/// Fermionic `ρ̂(2πn/L) = Σ_k ψ*(k − p)ψ(k)`; `n = 0` gives `Q`.
pub fn rho_fermion<S: Scalar>(w: &MomentumWindow, n: i64, v: &WedgeVector<S>) -> WedgeImage<S> {
    bilinear_dgamma(w, |jp, j| if jp == j - n { S::one() } else { S::zero() }, n.abs(), v)
}

pub fn q_fermion<S: Scalar>(w: &MomentumWindow, v: &WedgeVector<S>) -> WedgeVector<S> {
    let mut r = WedgeVector::zero();
    for (s, c) in &v.terms {
        r.add_term(*s, c.clone() * S::from_int(w.charge(*s)));
    }
    r
}

/// `W^s_p` divided by `(2π/L)^{s−1}`: kernel `(j + ½ − n/2)^{s−1}` between `k_j` and `k_{j−n}`.
pub fn w_fermion<S: Scalar>(w: &MomentumWindow, s: u32, n: i64, v: &WedgeVector<S>) -> WedgeImage<S> {
    assert!(s >= 1);
    let kernel = |jp: i64, j: i64| -> S {
        if jp != j - n {
            return S::zero();
        }
        let num = 2 * j + 1 - n;
        S::from_ratio(num.pow(s - 1), 2i64.pow(s - 1))
    };
    bilinear_dgamma(w, kernel, n.abs(), v)
}

/// Shift every momentum up by `2π/L`, fixed by `RΩ = ψ*(π/L)Ω`.
pub fn apply_r_fermion<S: Scalar>(w: &MomentumWindow, v: &WedgeVector<S>) -> WedgeImage<S> {
    let top = 1u128 << (2 * w.half - 1);
    let mut r = WedgeVector::zero();
    let mut lost = 0;
    for (s, c) in &v.terms {
        if s & top != 0 {
            lost += 1;
            continue;
        }
        let sign = if s.count_ones() % 2 == 0 { 1 } else { -1 };
        r.add_term((s << 1) | 1, c.clone() * S::from_int(sign));
    }
    WedgeImage { v: r, lost }
}

pub fn apply_r_inv_fermion<S: Scalar>(w: &MomentumWindow, v: &WedgeVector<S>) -> WedgeImage<S> {
    let _ = w;
    let mut r = WedgeVector::zero();
    let mut lost = 0;
    for (s, c) in &v.terms {
        if s & 1 == 0 {
            lost += 1;
            continue;
        }
        let sign = if (s.count_ones() - 1) % 2 == 0 { 1 } else { -1 };
        r.add_term(s >> 1, c.clone() * S::from_int(sign));
    }
    WedgeImage { v: r, lost }
}

pub fn apply_r_power<S: Scalar>(w: &MomentumWindow, k: i64, v: &WedgeVector<S>) -> WedgeImage<S> {
    let mut cur = v.clone();
    let mut lost = 0;
    for _ in 0..k.abs() {
        let img = if k > 0 { apply_r_fermion(w, &cur) } else { apply_r_inv_fermion(w, &cur) };
        lost += img.lost;
        cur = img.v;
    }
    WedgeImage { v: cur, lost }
}

/// `Π ρ̂(−2πn/L)^{m_n} R^w Ω` realized in the wedge.
pub fn boson_basis_in_wedge<S: Scalar>(w: &MomentumWindow, b: &FockBasisState) -> Result<WedgeVector<S>> {
    w.check_capacity(b.level() as i64, b.w.abs())?;
    let vac = WedgeVector::basis(w.vacuum());
    let mut cur = apply_r_power(w, b.w, &vac).v;
    for (i, &m) in b.occ.iter().enumerate() {
        for _ in 0..m {
            cur = rho_fermion(w, -(i as i64 + 1), &cur).v;
        }
    }
    Ok(cur)
}
