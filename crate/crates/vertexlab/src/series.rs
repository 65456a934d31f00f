//! Truncated power series in one and two variables over a [`Scalar`] ring.

use crate::scalar::{factorial, i_pow, Scalar};
use std::collections::BTreeMap;

/// `Σ_{k ≤ order} c_k t^k`; everything above `order` is discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<S> {
    pub c: Vec<S>,
}

impl<S: Scalar> PowerSeries<S> {
    pub fn zero(order: usize) -> Self {
        Self { c: vec![S::zero(); order + 1] }
    }
    pub fn constant(v: S, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.c[0] = v;
        s
    }
    pub fn one(order: usize) -> Self {
        Self::constant(S::one(), order)
    }
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }
    pub fn coeff(&self, k: usize) -> S {
        self.c.get(k).cloned().unwrap_or_else(S::zero)
    }
    /// Lowest index with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    /// `exp(i·m·t/d)` expanded to `order`.
    pub fn exp_i(m: i64, d: i64, order: usize) -> Self {
        let mut s = Self::zero(order);
        for k in 0..=order {
            let num = m.pow(k as u32);
            let den = d.pow(k as u32) * factorial(k as u32);
            s.c[k] = i_pow::<S>(k as i64) * S::from_ratio(num, den);
        }
        s
    }
    /// `sin(m·t/d)`.
    pub fn sin(m: i64, d: i64, order: usize) -> Self {
        let mut s = Self::zero(order);
        for k in (1..=order).step_by(2) {
            let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
            s.c[k] = S::from_ratio(sign * m.pow(k as u32), d.pow(k as u32) * factorial(k as u32));
        }
        s
    }
    /// `cos(m·t/d)`.
    pub fn cos(m: i64, d: i64, order: usize) -> Self {
        let mut s = Self::zero(order);
        for k in (0..=order).step_by(2) {
            let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
            s.c[k] = S::from_ratio(sign * m.pow(k as u32), d.pow(k as u32) * factorial(k as u32));
        }
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().min(o.c.len());
        Self { c: (0..n).map(|k| self.c[k].clone() + o.c[k].clone()).collect() }
    }
    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().min(o.c.len());
        Self { c: (0..n).map(|k| self.c[k].clone() - o.c[k].clone()).collect() }
    }
    pub fn scale(&self, a: &S) -> Self {
        Self { c: self.c.iter().map(|x| x.clone() * a.clone()).collect() }
    }
    pub fn mul(&self, o: &Self) -> Self {
        let n = self.c.len().min(o.c.len());
        let mut c = vec![S::zero(); n];
        for (i, a) in self.c.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    c[i + j] = c[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        Self { c }
    }
    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::one(self.order());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }
    /// Divide by `t`, dropping the constant term (which must vanish).
    pub fn shift_down(&self) -> Self {
        debug_assert!(self.c[0].is_zero());
        let mut c: Vec<S> = self.c[1..].to_vec();
        if c.is_empty() {
            c.push(S::zero());
        }
        Self { c }
    }
    /// Multiplicative inverse of a series with unit constant term.
    pub fn inv_unit(&self) -> Self {
        assert!(self.c[0] == S::one(), "inv_unit needs constant term 1");
        let n = self.c.len();
        let mut b = vec![S::zero(); n];
        b[0] = S::one();
        for k in 1..n {
            let mut acc = S::zero();
            for j in 1..=k {
                acc = acc + self.c[j].clone() * b[k - j].clone();
            }
            b[k] = -acc;
        }
        Self { c: b }
    }
    /// `Σ x^k/k!` for a series without constant term.
    pub fn exp_nilpotent(&self) -> Self {
        assert!(self.c[0].is_zero());
        let mut r = Self::one(self.order());
        let mut term = Self::one(self.order());
        for k in 1..=self.order() {
            term = term.mul(self).scale(&S::from_ratio(1, k as i64));
            r = r.add(&term);
        }
        r
    }
    /// `log(self)` for a series with unit constant term.
    pub fn log_unit(&self) -> Self {
        assert!(self.c[0] == S::one());
        let mut x = self.clone();
        x.c[0] = S::zero();
        let mut r = Self::zero(self.order());
        let mut p = Self::one(self.order());
        for k in 1..=self.order() {
            p = p.mul(&x);
            let sign = if k % 2 == 1 { 1 } else { -1 };
            r = r.add(&p.scale(&S::from_ratio(sign, k as i64)));
        }
        r
    }
    /// `self^beta` for a series with unit constant term.
    pub fn powf_unit(&self, beta: &S) -> Self {
        self.log_unit().scale(beta).exp_nilpotent()
    }
}

/// `Σ c_{ij} a^i b^j` with `i + j ≤ order`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiSeries<S> {
    pub order: usize,
    pub c: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> BiSeries<S> {
    pub fn zero(order: usize) -> Self {
        Self { order, c: BTreeMap::new() }
    }
    pub fn coeff(&self, i: usize, j: usize) -> S {
        self.c.get(&(i, j)).cloned().unwrap_or_else(S::zero)
    }
    /// `g(α a + β b)` for a univariate series `g` and integer weights.
    pub fn compose_linear(g: &PowerSeries<S>, alpha: i64, beta: i64, order: usize) -> Self {
        let mut out = Self::zero(order);
        for k in 0..=order.min(g.order()) {
            let gk = g.coeff(k);
            if gk.is_zero() {
                continue;
            }
            for i in 0..=k {
                let j = k - i;
                let coef = crate::scalar::binomial(k as u32, i as u32)
                    * alpha.pow(i as u32)
                    * beta.pow(j as u32);
                if coef != 0 {
                    let e = out.c.entry((i, j)).or_insert_with(S::zero);
                    *e = e.clone() + gk.clone() * S::from_int(coef);
                }
            }
        }
        out
    }
    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = Self::zero(order);
        for ((i1, j1), a) in &self.c {
            for ((i2, j2), b) in &o.c {
                if i1 + i2 + j1 + j2 <= order {
                    let e = out.c.entry((i1 + i2, j1 + j2)).or_insert_with(S::zero);
                    *e = e.clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }
}
