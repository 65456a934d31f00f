//! Calogero–Sutherland Hamiltonians, correlator eigenfunctions and the
//! second-quantized operator `H^{ν,3}`.
//!
//! With `β = ν²` the Hamiltonian is `−Σ ∂²_k + 2β(β−1) Σ_{k<l} V(x_k − x_l)`.

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, FockBasisState, FockVector, SparseOperator, TruncationSpec};
use crate::loopspace::{kernel_b_pow, BlipParams, KernelParams};
use crate::quad::Legendre;
use crate::scalar::{C64, QC, Scalar};
use crate::vertex::{apply_implementer, ImplementerSpec};
use crate::walgebra::{w_anyon, RationalNu};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CSConfig {
    pub n: usize,
    pub nu: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub q: f64,
    pub grid: usize,
    pub fd_step: f64,
}

impl CSConfig {
    pub fn new(n: usize, nu: f64, l: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!("N = {n} < 2")));
        }
        if !(nu > 0.0) || !(l > 0.0) {
            return Err(Error::Invalid("ν and L must be positive".into()));
        }
        Ok(Self { n, nu, l, eps: 0.0, eps_prime: 0.0, q: 0.0, grid: 16, fd_step: 1e-3 * l })
    }
    pub fn with_regulators(mut self, eps: f64, eps_prime: f64) -> Result<Self> {
        if eps < 0.0 || eps_prime < 0.0 {
            return Err(Error::NonPositiveRegulator(eps.min(eps_prime)));
        }
        self.eps = eps;
        self.eps_prime = eps_prime;
        Ok(self)
    }
    pub fn with_nome(mut self, q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::NomeOutOfRange(q));
        }
        self.q = q;
        Ok(self)
    }
    pub fn beta(&self) -> f64 {
        self.nu * self.nu
    }
    pub fn coupling(&self) -> f64 {
        let b = self.beta();
        2.0 * b * (b - 1.0)
    }
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.l
    }
}

/// Pair potential used by [`apply_h`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairPotential {
    /// `(π/L)² sin⁻²(πr/L)` at `q = 0`, elliptic otherwise.
    Exact { q: f64 },
    /// `V_ε = −∂²_r log b_ε(r)` at nome `q`; `conj` takes the complex conjugate.
    Regularized { eps: f64, q: f64, conj: bool },
}

/// `Σ_n [z_n/(1−z_n)² + z̄-partner]` with `z_n = q^{2n} λ e^{±iκr}`.
fn thermal_second_log(r: f64, l: f64, lam: f64, q: f64) -> C64 {
    if q == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let k = 2.0 * PI / l;
    let q2 = q * q;
    let mut qn = q2;
    let mut acc = C64::new(0.0, 0.0);
    loop {
        let z1 = C64::from_polar(qn * lam, k * r);
        let z2 = C64::from_polar(qn * lam, -k * r);
        let one = C64::new(1.0, 0.0);
        let t = z1 / ((one - z1) * (one - z1)) + z2 / ((one - z2) * (one - z2));
        acc += t;
        if t.norm() < 1e-18 {
            break;
        }
        qn *= q2;
    }
    acc
}

/// Unregularized `V(r)`: trigonometric at `q = 0`, elliptic for `q > 0`.
pub fn potential_v(r: f64, l: f64, q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::NomeOutOfRange(q));
    }
    let s = (PI * r / l).sin();
    if s.abs() < 1e-300 {
        return Err(Error::Singular(r));
    }
    let k = 2.0 * PI / l;
    Ok((PI / l).powi(2) / (s * s) - k * k * thermal_second_log(r, l, 1.0, q).re)
}

/// `V_ε(r) = −∂²_r log b_ε(r)` at nome `q`.
pub fn potential_v_eps(r: f64, l: f64, eps: f64, q: f64) -> Result<C64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::NomeOutOfRange(q));
    }
    if eps < 0.0 {
        return Err(Error::NonPositiveRegulator(eps));
    }
    let s = (C64::new(r, eps) * (PI / l)).sin();
    if s.norm() < 1e-300 {
        return Err(Error::Singular(r));
    }
    let k = 2.0 * PI / l;
    let lam = (-k * eps).exp();
    Ok((PI / l).powi(2) / (s * s) - k * k * thermal_second_log(r, l, lam, q))
}

/// Trigonometric closed forms, `q = 0` only.
pub mod trig {
    use super::*;
    /// `b_ε(r) = −2i e^{−πε/L} sin(π(r + iε)/L)`.
    pub fn kernel_b(r: f64, l: f64, eps: f64) -> C64 {
        C64::new(0.0, -2.0) * (-PI * eps / l).exp() * (C64::new(r, eps) * (PI / l)).sin()
    }
    /// `(π/L)² csc²(π(r + iε)/L)`.
    pub fn potential_v_eps(r: f64, l: f64, eps: f64) -> C64 {
        let s = (C64::new(r, eps) * (PI / l)).sin();
        C64::new((PI / l).powi(2), 0.0) / (s * s)
    }
}

fn pair_v(p: PairPotential, r: f64, l: f64) -> Result<C64> {
    match p {
        PairPotential::Exact { q } => potential_v(r, l, q).map(|v| C64::new(v, 0.0)),
        PairPotential::Regularized { eps, q, conj } => {
            let v = potential_v_eps(r, l, eps, q)?;
            Ok(if conj { v.conj() } else { v })
        }
    }
}

/// Fourth-order central second derivative in coordinate `k`.
fn d2(f: &dyn Fn(&[f64]) -> C64, x: &[f64], k: usize, h: f64) -> C64 {
    let mut z = x.to_vec();
    let mut at = |d: f64| {
        z[k] = x[k] + d;
        f(&z)
    };
    let (m2, m1, c, p1, p2) = (at(-2.0 * h), at(-h), at(0.0), at(h), at(2.0 * h));
    (-(p2 + m2) + (p1 + m1) * 16.0 - c * 30.0) / (12.0 * h * h)
}

/// `(−Σ_{k∈group} ∂²_k + coupling Σ_{k<l ∈ group} V(z_k − z_l)) F` at `z`.
pub fn apply_h_group(
    f: &dyn Fn(&[f64]) -> C64,
    z: &[f64],
    group: &[usize],
    cfg: &CSConfig,
    pot: PairPotential,
    h: f64,
) -> Result<C64> {
    let mut kin = C64::new(0.0, 0.0);
    for &k in group {
        kin -= d2(f, z, k, h);
    }
    let c = cfg.coupling();
    if c == 0.0 {
        return Ok(kin);
    }
    let mut v = C64::new(0.0, 0.0);
    for (a, &i) in group.iter().enumerate() {
        for &j in &group[a + 1..] {
            v += pair_v(pot, z[i] - z[j], cfg.l)?;
        }
    }
    Ok(kin + f(z) * v * c)
}

/// `H F` at `x` for an `N`-particle function.
pub fn apply_h(f: &dyn Fn(&[f64]) -> C64, x: &[f64], cfg: &CSConfig, pot: PairPotential) -> Result<C64> {
    let group: Vec<usize> = (0..x.len()).collect();
    apply_h_group(f, x, &group, cfg, pot, cfg.fd_step)
}

/// `HF` on a list of points, evaluated in parallel.
pub fn apply_h_grid(
    f: &(dyn Fn(&[f64]) -> C64 + Sync),
    points: &[Vec<f64>],
    cfg: &CSConfig,
    pot: PairPotential,
) -> Result<Vec<C64>> {
    points.par_iter().map(|x| apply_h(&|z| f(z), x, cfg, pot)).collect()
}

fn check_separated(x: &[f64], l: f64, eps: f64) -> Result<()> {
    if eps > 0.0 {
        return Ok(());
    }
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let r = (x[i] - x[j]).rem_euclid(l);
            if r.min(l - r) < 1e-12 * l {
                return Err(Error::Singular(x[i] - x[j]));
            }
        }
    }
    Ok(())
}

/// `F₀ = Π_{j<k} |sin(π(x_j − x_k)/L)|^β`.
pub fn groundstate_f0(x: &[f64], cfg: &CSConfig) -> C64 {
    let b = cfg.beta();
    let mut p = 1.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            p *= (PI * (x[i] - x[j]) / cfg.l).sin().abs().powf(b);
        }
    }
    C64::new(p, 0.0)
}

/// Symbolic oracle `HF₀/F₀ = −Σ_k[(∂_k log F₀)² + ∂²_k log F₀] + coupling Σ V`.
pub fn groundstate_oracle_ratio(x: &[f64], cfg: &CSConfig) -> Result<f64> {
    check_separated(x, cfg.l, 0.0)?;
    let b = cfg.beta();
    let c = PI / cfg.l;
    let mut e = 0.0;
    for k in 0..x.len() {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for j in 0..x.len() {
            if j == k {
                continue;
            }
            let t = c * (x[k] - x[j]);
            d1 += b * c / t.tan();
            d2 -= b * c * c / (t.sin() * t.sin());
        }
        e -= d1 * d1 + d2;
    }
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            e += cfg.coupling() * potential_v(x[i] - x[j], cfg.l, 0.0)?;
        }
    }
    Ok(e)
}

/// Groundstate energy `(π/L)² β² N(N²−1)/3`.
pub fn groundstate_energy(cfg: &CSConfig) -> f64 {
    let n = cfg.n as f64;
    (PI / cfg.l).powi(2) * cfg.beta().powi(2) * n * (n * n - 1.0) / 3.0
}

/// `det[e^{i k_a x_b}]`, `k_a = (2π/L)(a − (N−1)/2)`.
pub fn free_determinant(x: &[f64], l: f64) -> C64 {
    let n = x.len();
    let k = 2.0 * PI / l;
    let m = nalgebra::DMatrix::<C64>::from_fn(n, n, |a, b| {
        C64::from_polar(1.0, k * (a as f64 - (n as f64 - 1.0) / 2.0) * x[b])
    });
    m.determinant()
}

/// `Π_{j<j′} b_{2ε′}(y_{j′}−y_j)^β · Π_{k<k′} b_{2ε}(x_k−x_{k′})^β / Π_{j,k} b_{ε+ε′}(y_j−x_k)^β`.
pub fn correlator_f(y: &[f64], x: &[f64], cfg: &CSConfig) -> Result<C64> {
    correlator_f_inner(y, x, cfg, 2.0 * cfg.eps, 2.0 * cfg.eps_prime)
}

/// [`correlator_f`] with explicit regulators on the `x–x` and `y–y` kernels.
pub fn correlator_f_inner(y: &[f64], x: &[f64], cfg: &CSConfig, eps_xx: f64, eps_yy: f64) -> Result<C64> {
    if y.len() != x.len() {
        return Err(Error::Invalid(format!("|y| = {} ≠ |x| = {}", y.len(), x.len())));
    }
    let b = cfg.beta();
    let py = KernelParams::new(cfg.l, eps_yy, cfg.q)?;
    let px = KernelParams::new(cfg.l, eps_xx, cfg.q)?;
    let pyx = KernelParams::new(cfg.l, cfg.eps + cfg.eps_prime, cfg.q)?;
    let mut v = C64::new(1.0, 0.0);
    for j in 0..y.len() {
        for jp in (j + 1)..y.len() {
            v *= kernel_b_pow(y[jp] - y[j], &py, b)?;
        }
    }
    for k in 0..x.len() {
        for kp in (k + 1)..x.len() {
            v *= kernel_b_pow(x[k] - x[kp], &px, b)?;
        }
    }
    for &yj in y {
        for &xk in x {
            v /= kernel_b_pow(yj - xk, &pyx, b)?;
        }
    }
    Ok(v)
}

/// Same product in trigonometric closed form (`q = 0`); branch fixed by the
/// principal power of `b·e^{iπr/L}`, matching the vertex-module kernel.
pub fn correlator_f_trig(y: &[f64], x: &[f64], cfg: &CSConfig) -> C64 {
    let b = cfg.beta();
    let pw = |r: f64, eps: f64| -> C64 {
        let ph = C64::from_polar(1.0, PI * r / cfg.l);
        C64::from_polar(1.0, -PI * b * r / cfg.l) * (trig::kernel_b(r, cfg.l, eps) * ph).powf(b)
    };
    let mut v = C64::new(1.0, 0.0);
    for j in 0..y.len() {
        for jp in (j + 1)..y.len() {
            v *= pw(y[jp] - y[j], 2.0 * cfg.eps_prime);
        }
    }
    for k in 0..x.len() {
        for kp in (k + 1)..x.len() {
            v *= pw(x[k] - x[kp], 2.0 * cfg.eps);
        }
    }
    for &yj in y {
        for &xk in x {
            v /= pw(yj - xk, cfg.eps + cfg.eps_prime);
        }
    }
    v
}

/// One sample of the two-group identity: `(y, x)`.
pub type IdentitySample = (Vec<f64>, Vec<f64>);

/// Regulator placement for [`identity_residual_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IdentityRegulators {
    /// `b_{2ε}`, `b_{2ε′}` in the correlator; `V_ε`, `V_{ε′}` in the Hamiltonians.
    Literal,
    /// Unregularized `x–x`, `y–y` kernels and potentials; only the cross kernel keeps `ε + ε′`.
    CrossOnly,
}

/// `max |H^ε(x)F − conj(H^{ε′})(y)F| / |F|` over samples.
pub fn elliptic_identity_residual(cfg: &CSConfig, samples: &[IdentitySample]) -> Result<f64> {
    identity_residual_with(cfg, samples, IdentityRegulators::Literal)
}

/// Two-group identity residual under a chosen regulator placement.
pub fn identity_residual_with(cfg: &CSConfig, samples: &[IdentitySample], reg: IdentityRegulators) -> Result<f64> {
    if !(cfg.eps > 0.0 && cfg.eps_prime > 0.0) {
        return Err(Error::NonPositiveRegulator(cfg.eps.min(cfg.eps_prime)));
    }
    let n = cfg.n;
    let res: Vec<f64> = samples
        .par_iter()
        .map(|(y, x)| -> Result<f64> {
            let mut z = y.clone();
            z.extend_from_slice(x);
            let (exx, eyy, vx, vy) = match reg {
                IdentityRegulators::Literal => (2.0 * cfg.eps, 2.0 * cfg.eps_prime, cfg.eps, cfg.eps_prime),
                IdentityRegulators::CrossOnly => (0.0, 0.0, 0.0, 0.0),
            };
            let f = |w: &[f64]| correlator_f_inner(&w[..n], &w[n..], cfg, exx, eyy).unwrap_or(C64::new(f64::NAN, 0.0));
            let ys: Vec<usize> = (0..n).collect();
            let xs: Vec<usize> = (n..2 * n).collect();
            let hx = apply_h_group(&f, &z, &xs, cfg, PairPotential::Regularized { eps: vx, q: cfg.q, conj: false }, cfg.fd_step)?;
            let hy = apply_h_group(&f, &z, &ys, cfg, PairPotential::Regularized { eps: vy, q: cfg.q, conj: true }, cfg.fd_step)?;
            Ok((hx - hy).norm() / f(&z).norm())
        })
        .collect::<Result<_>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Same residual with the trigonometric closed-form correlator and potentials.
pub fn trig_identity_residual(cfg: &CSConfig, samples: &[IdentitySample]) -> Result<f64> {
    let n = cfg.n;
    let mut worst = 0.0f64;
    for (y, x) in samples {
        let mut z = y.clone();
        z.extend_from_slice(x);
        let f = |w: &[f64]| correlator_f_trig(&w[..n], &w[n..], cfg);
        let h = cfg.fd_step;
        let mut hx = C64::new(0.0, 0.0);
        let mut hy = C64::new(0.0, 0.0);
        for k in 0..n {
            hy -= d2(&f, &z, k, h);
            hx -= d2(&f, &z, n + k, h);
        }
        let f0 = f(&z);
        for i in 0..n {
            for j in (i + 1)..n {
                hx += f0 * cfg.coupling() * trig::potential_v_eps(x[i] - x[j], cfg.l, cfg.eps);
                hy += f0 * cfg.coupling() * trig::potential_v_eps(y[i] - y[j], cfg.l, cfg.eps_prime).conj();
            }
        }
        worst = worst.max((hx - hy).norm() / f0.norm());
    }
    Ok(worst)
}

/// Residual along an `ε = ε′` ladder.
pub fn elliptic_identity_ladder(cfg: &CSConfig, samples: &[IdentitySample], eps: &[f64]) -> Result<Vec<(f64, f64)>> {
    eps.iter()
        .map(|&e| {
            let c = cfg.with_regulators(e, e)?;
            Ok((e, elliptic_identity_residual(&c, samples)?))
        })
        .collect()
}

/// Excited-state label: momenta `p₁ ≥ … ≥ p_m` in units of `2π/L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenRecipe {
    pub momenta: Vec<i64>,
}

impl EigenRecipe {
    pub fn new(momenta: Vec<i64>, n: usize) -> Result<Self> {
        if momenta.len() > n {
            return Err(Error::Invalid(format!("m = {} > N = {n}", momenta.len())));
        }
        if momenta.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid("momenta must be non-increasing".into()));
        }
        Ok(Self { momenta })
    }
    pub fn ground() -> Self {
        Self { momenta: Vec::new() }
    }
    pub fn m(&self) -> usize {
        self.momenta.len()
    }
    pub fn winding_remainder(&self, n: usize) -> usize {
        n - self.m()
    }
    /// Dominance order on equal-size recipes, refined by total momentum.
    pub fn dominates(&self, o: &Self) -> bool {
        let (mut a, mut b) = (0i64, 0i64);
        let len = self.m().max(o.m());
        for k in 0..len {
            a += self.momenta.get(k).copied().unwrap_or(0);
            b += o.momenta.get(k).copied().unwrap_or(0);
            if a < b {
                return false;
            }
        }
        true
    }
}

/// Truncated Laurent series in `u_j = e^{2πi y_j/L}` with `|exponent_j| ≤ degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorSeries {
    pub nvars: usize,
    pub degree: i32,
    pub terms: BTreeMap<Vec<i32>, C64>,
    /// Bound on the discarded `ℓ¹` mass of the binomial tails.
    pub tail: f64,
}

impl CorrelatorSeries {
    pub fn one(nvars: usize, degree: i32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; nvars], C64::new(1.0, 0.0));
        Self { nvars, degree, terms, tail: 0.0 }
    }

    /// `(1 − c·u^{mono})^γ`; coefficients obey `c_{k+1}/c_k = (k − γ)/(k + 1)`.
    pub fn binomial(nvars: usize, degree: i32, mono: &[i32], c: C64, gamma: f64) -> Self {
        let span = mono.iter().map(|e| e.abs()).max().unwrap_or(0).max(1);
        let kmax = degree / span;
        let mut terms = BTreeMap::new();
        let mut coef = 1.0;
        let mut cp = C64::new(1.0, 0.0);
        for k in 0..=kmax {
            let e: Vec<i32> = mono.iter().map(|m| m * k).collect();
            terms.insert(e, cp * coef);
            coef *= (k as f64 - gamma) / (k as f64 + 1.0);
            cp *= c;
        }
        // tail: Σ_{k>kmax} |coef_k||c|^k, geometric bound once the ratio settles below 1
        let mut tail = 0.0;
        let mut t = coef.abs() * cp.norm();
        for k in (kmax + 1)..(kmax + 10_000) {
            tail += t;
            let ratio = ((k as f64 - gamma) / (k as f64 + 1.0)).abs() * c.norm();
            t *= ratio;
            if t < 1e-20 * tail.max(1e-300) || t == 0.0 {
                break;
            }
        }
        Self { nvars, degree, terms, tail }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut terms: BTreeMap<Vec<i32>, C64> = BTreeMap::new();
        for (ea, a) in &self.terms {
            for (eb, b) in &o.terms {
                let e: Vec<i32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if e.iter().any(|v| v.abs() > self.degree) {
                    continue;
                }
                *terms.entry(e).or_insert(C64::new(0.0, 0.0)) += a * b;
            }
        }
        let mass = |s: &Self| s.terms.values().map(|c| c.norm()).sum::<f64>();
        let tail = self.tail * (mass(o) + o.tail) + o.tail * mass(self);
        Self { nvars: self.nvars, degree: self.degree, terms, tail }
    }

    pub fn coeff(&self, e: &[i32]) -> C64 {
        self.terms.get(e).copied().unwrap_or(C64::new(0.0, 0.0))
    }
}

/// Periodic `y`-part of the correlator for recipe variables `y₁…y_m` against
/// numeric `x`: `Π_{j,k} (kernel)^{−β}` and `Π_{j<j′} (kernel)^{β}` with the
/// non-periodic phases stripped.
pub fn correlator_series(m: usize, x: &[f64], cfg: &CSConfig, degree: i32) -> Result<CorrelatorSeries> {
    let b = cfg.beta();
    let k = cfg.dk();
    let lam_yx = (-k * (cfg.eps + cfg.eps_prime)).exp();
    let lam_yy = (-k * 2.0 * cfg.eps_prime).exp();
    let mut s = CorrelatorSeries::one(m, degree);
    let mono1 = |j: usize| -> Vec<i32> {
        let mut e = vec![0; m];
        e[j] = 1;
        e
    };
    let q2 = cfg.q * cfg.q;
    for j in 0..m {
        for &xk in x {
            let c = C64::from_polar(lam_yx, -k * xk);
            s = s.mul(&CorrelatorSeries::binomial(m, degree, &mono1(j), c, -b));
            let mut qn = q2;
            while cfg.q > 0.0 && qn * lam_yx > 1e-18 {
                let cplus = C64::from_polar(qn * lam_yx, -k * xk);
                let cminus = C64::from_polar(qn * lam_yx, k * xk);
                let neg: Vec<i32> = mono1(j).iter().map(|v| -v).collect();
                s = s.mul(&CorrelatorSeries::binomial(m, degree, &mono1(j), cplus, -b));
                s = s.mul(&CorrelatorSeries::binomial(m, degree, &neg, cminus, -b));
                qn *= q2;
            }
        }
    }
    for j in 0..m {
        for jp in (j + 1)..m {
            let mut e = vec![0; m];
            e[jp] = 1;
            e[j] = -1;
            s = s.mul(&CorrelatorSeries::binomial(m, degree, &e, C64::new(lam_yy, 0.0), b));
            let mut qn = q2;
            while cfg.q > 0.0 && qn * lam_yy > 1e-18 {
                let neg: Vec<i32> = e.iter().map(|v| -v).collect();
                s = s.mul(&CorrelatorSeries::binomial(m, degree, &e, C64::new(qn * lam_yy, 0.0), b));
                s = s.mul(&CorrelatorSeries::binomial(m, degree, &neg, C64::new(qn * lam_yy, 0.0), b));
                qn *= q2;
            }
        }
    }
    Ok(s)
}

/// Laurent coefficients at each of `exps` of the same periodic `y`-part, by the trapezoid
/// rule on the torus `|u_j| = ρ_j`. The radii decrease with `j` and stay inside the
/// common domain of convergence, so aliasing decays geometrically even at `ε = ε′ = 0`,
/// where the truncated series of [`correlator_series`] converges only like a power.
pub fn correlator_coefficients_torus(m: usize, x: &[f64], cfg: &CSConfig, exps: &[Vec<i32>]) -> Result<Vec<C64>> {
    if m == 0 || exps.iter().any(|e| e.len() != m) {
        return Err(Error::Invalid(format!("exponents must have length m = {m} > 0")));
    }
    let b = cfg.beta();
    let k = cfg.dk();
    let lam_yx = (-k * (cfg.eps + cfg.eps_prime)).exp();
    let lam_yy = (-k * 2.0 * cfg.eps_prime).exp();
    let q2 = cfg.q * cfg.q;
    // log-radii spaced evenly in (log q², 0); for q = 0 any span works
    let span = if cfg.q > 0.0 { -q2.ln() } else { 4.0 };
    let a = span / (m + 1) as f64;
    let g = (((40.0 / a).ceil() as usize).max(16) + 1) & !1;
    if (g as f64).powi(m as i32) > 5e7 {
        return Err(Error::Invalid(format!("torus grid {g}^{m} too large")));
    }
    let pw = |z: C64, gamma: f64| (gamma * (C64::new(1.0, 0.0) - z).ln()).exp();
    let qpowers: Vec<f64> =
        if cfg.q > 0.0 { (1..).map(|n| q2.powi(n)).take_while(|qn| qn * lam_yx.max(lam_yy) > 1e-18).collect() } else { Vec::new() };
    let u = |j: usize, i: usize| C64::from_polar((-a * (j + 1) as f64).exp(), 2.0 * PI * i as f64 / g as f64);
    let single: Vec<Vec<C64>> = (0..m)
        .map(|j| {
            (0..g)
                .map(|i| {
                    let uj = u(j, i);
                    let mut v = C64::new(1.0, 0.0);
                    for &xk in x {
                        let c = C64::from_polar(lam_yx, -k * xk);
                        v *= pw(c * uj, -b);
                        for qn in &qpowers {
                            v *= pw(c * qn * uj, -b) * pw(C64::from_polar(qn * lam_yx, k * xk) / uj, -b);
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let pair = |j: usize, jp: usize| -> Vec<C64> {
        let mut t = Vec::with_capacity(g * g);
        for i in 0..g {
            for ip in 0..g {
                let r = u(jp, ip) / u(j, i);
                let mut v = pw(r * lam_yy, b);
                for qn in &qpowers {
                    v *= pw(r * qn * lam_yy, b) * pw(C64::new(qn * lam_yy, 0.0) / r, b);
                }
                t.push(v);
            }
        }
        t
    };
    let pairs: Vec<Vec<Vec<C64>>> = (0..m).map(|j| (0..m).map(|jp| if jp > j { pair(j, jp) } else { Vec::new() }).collect()).collect();
    // extraction weights u_j^{−e_j}, per exponent and variable
    let weights: Vec<Vec<Vec<C64>>> = exps.iter().map(|e| (0..m).map(|j| (0..g).map(|i| u(j, i).powi(-e[j])).collect()).collect()).collect();
    let total = g.pow(m as u32);
    let zero = || vec![C64::new(0.0, 0.0); exps.len()];
    let sums = (0..total)
        .into_par_iter()
        .fold(zero, |mut acc, flat| {
            let mut idx = [0usize; 16];
            let mut r = flat;
            for slot in idx[..m].iter_mut().rev() {
                *slot = r % g;
                r /= g;
            }
            let mut v = C64::new(1.0, 0.0);
            for j in 0..m {
                v *= single[j][idx[j]];
                for jp in (j + 1)..m {
                    v *= pairs[j][jp][idx[j] * g + idx[jp]];
                }
            }
            for (a, w) in acc.iter_mut().zip(&weights) {
                let mut t = v;
                for j in 0..m {
                    t *= w[j][idx[j]];
                }
                *a += t;
            }
            acc
        })
        .reduce(zero, |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(sums.into_iter().map(|c| c / total as f64).collect())
}

/// Single-exponent form of [`correlator_coefficients_torus`].
pub fn correlator_coefficient_torus(m: usize, x: &[f64], cfg: &CSConfig, e: &[i32]) -> Result<C64> {
    Ok(correlator_coefficients_torus(m, x, cfg, &[e.to_vec()])?[0])
}

/// Recipes that `H` mixes into the coefficient at `recipe` when `q = 0`: sequences of
/// the same length and total whose partial sums lie between the recipe's and the total.
/// The recipe comes first. Empty when the coefficient vanishes identically.
pub fn recipe_closure(recipe: &EigenRecipe) -> Vec<Vec<i64>> {
    let m = recipe.m();
    let total: i64 = recipe.momenta.iter().sum();
    let lower: Vec<i64> = recipe.momenta.iter().scan(0, |s, p| {
        *s += p;
        Some(*s)
    }).collect();
    if m == 0 || lower.iter().any(|&s| s > total) {
        return if m == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut sums = vec![0i64; m];
    fn walk(k: usize, lower: &[i64], total: i64, sums: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let m = lower.len();
        if k == m - 1 {
            sums[k] = total;
            let mut prev = 0;
            out.push(sums.iter().map(|&s| {
                let d = s - prev;
                prev = s;
                d
            }).collect());
            return;
        }
        for s in lower[k]..=total {
            sums[k] = s;
            walk(k + 1, lower, total, sums, out);
        }
    }
    walk(0, &lower, total, &mut sums, &mut out);
    out.sort_by_key(|seq| if *seq == recipe.momenta { 0 } else { 1 });
    out
}

/// `x`-factor of `F_η` for `m` recipe variables: the pair kernels and the centre-of-mass phase.
fn recipe_x_factor(m: usize, x: &[f64], cfg: &CSConfig) -> Result<C64> {
    check_separated(x, cfg.l, cfg.eps)?;
    let b = cfg.beta();
    let px = KernelParams::new(cfg.l, 2.0 * cfg.eps, cfg.q)?;
    let mut v = C64::new(1.0, 0.0);
    for k in 0..x.len() {
        for kp in (k + 1)..x.len() {
            v *= kernel_b_pow(x[k] - x[kp], &px, b)?;
        }
    }
    let sx: f64 = x.iter().sum();
    Ok(v * C64::from_polar(1.0, -PI * b * m as f64 * sx / cfg.l))
}

/// `F_η(x)` for a single recipe: the `x`-factor times the Fourier coefficient of the
/// periodic `y`-part at the recipe momenta. An eigenfunction for `m ≤ 1`; for longer
/// recipes see [`RecipeEigenfunction`]. Single-variable recipes use the series
/// (`extra_degree` pads it when `q > 0`), longer ones the torus sum.
pub fn eigenfunction_value(recipe: &EigenRecipe, x: &[f64], cfg: &CSConfig, extra_degree: i32) -> Result<C64> {
    let m = recipe.m();
    let v = recipe_x_factor(m, x, cfg)?;
    if m == 0 {
        return Ok(v);
    }
    let e: Vec<i32> = recipe.momenta.iter().map(|&p| p as i32).collect();
    if m > 1 {
        return Ok(v * correlator_coefficient_torus(m, x, cfg, &e)?);
    }
    let top = recipe.momenta[0].abs() as i32;
    let degree = if cfg.q == 0.0 { top } else { top + extra_degree };
    let s = correlator_series(m, x, cfg, degree)?;
    Ok(v * s.coeff(&e))
}

/// Eigenfunction for a recipe: `Σ_μ v_μ F_μ` over [`recipe_closure`], with `v_recipe = 1`.
/// `H` is triangular on the closure; the matrix is fitted by least squares on sample
/// points disjoint from [`sample_points`], and `v` is its eigenvector at the recipe's
/// diagonal entry.
#[derive(Clone, Debug)]
pub struct RecipeEigenfunction {
    pub recipe: EigenRecipe,
    pub members: Vec<Vec<i64>>,
    pub weights: Vec<C64>,
    /// Relative least-squares residual of the fitted action of `H` on the closure.
    pub closure_residual: f64,
    extra_degree: i32,
    cfg: CSConfig,
}

impl RecipeEigenfunction {
    pub fn new(recipe: &EigenRecipe, cfg: &CSConfig) -> Result<Self> {
        let one = |members: Vec<Vec<i64>>| Self {
            recipe: recipe.clone(),
            members,
            weights: vec![C64::new(1.0, 0.0)],
            closure_residual: 0.0,
            extra_degree: 24,
            cfg: cfg.clone(),
        };
        if recipe.m() <= 1 {
            return Ok(one(vec![recipe.momenta.clone()]));
        }
        if cfg.q > 0.0 {
            return Err(Error::Invalid("recipes with more than one momentum need q = 0".into()));
        }
        let members = recipe_closure(recipe);
        if members.is_empty() {
            return Err(Error::Invalid(format!("recipe {:?}: coefficient vanishes identically", recipe.momenta)));
        }
        if members.len() == 1 {
            return Ok(one(members));
        }
        let kk = members.len();
        let mut fit_cfg = cfg.clone();
        fit_cfg.grid = cfg.grid.max(2 * kk) + 3;
        let pts = sample_points(&fit_cfg);
        let raw = Self { weights: vec![C64::new(0.0, 0.0); kk], ..one(members.clone()) };
        let cols: Vec<(Vec<C64>, Vec<C64>)> = (0..kk)
            .map(|i| {
                let f = |x: &[f64]| raw.member_value(i, x).unwrap_or(C64::new(f64::NAN, 0.0));
                let hf = apply_h_grid(&f, &pts, cfg, PairPotential::Exact { q: 0.0 })?;
                Ok((pts.iter().map(|x| f(x)).collect(), hf))
            })
            .collect::<Result<_>>()?;
        let fm = nalgebra::DMatrix::<C64>::from_fn(pts.len(), kk, |p, i| cols[i].0[p]);
        let hm = nalgebra::DMatrix::<C64>::from_fn(pts.len(), kk, |p, i| cols[i].1[p]);
        let a = fm.clone().svd(true, true).solve(&hm, 1e-13).map_err(|e| Error::Invalid(e.into()))?;
        let closure_residual = (&fm * &a - &hm).norm() / hm.norm();
        // (A − E)v = 0 with v₀ = 1, E = A₀₀
        let e0 = a[(0, 0)];
        let mut shifted = a.clone();
        for i in 0..kk {
            shifted[(i, i)] -= e0;
        }
        let rest = shifted.columns(1, kk - 1).into_owned();
        let rhs = -shifted.column(0).into_owned();
        let tail = rest.svd(true, true).solve(&rhs, 1e-13).map_err(|e| Error::Invalid(e.into()))?;
        let mut weights = vec![C64::new(1.0, 0.0)];
        weights.extend(tail.iter().copied());
        Ok(Self { weights, closure_residual, ..raw })
    }

    fn member_value(&self, i: usize, x: &[f64]) -> Result<C64> {
        let r = EigenRecipe { momenta: self.members[i].clone() };
        eigenfunction_value(&r, x, &self.cfg, self.extra_degree)
    }

    pub fn value(&self, x: &[f64]) -> Result<C64> {
        let m = self.recipe.m();
        if self.members.len() == 1 {
            return self.member_value(0, x);
        }
        let exps: Vec<Vec<i32>> = self.members.iter().map(|s| s.iter().map(|&p| p as i32).collect()).collect();
        let c = correlator_coefficients_torus(m, x, &self.cfg, &exps)?;
        Ok(recipe_x_factor(m, x, &self.cfg)? * c.iter().zip(&self.weights).map(|(c, w)| c * w).sum::<C64>())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub recipe: Vec<i64>,
    #[serde(rename = "E")]
    pub e: f64,
    pub residual: f64,
    pub ratio_stdev: f64,
    pub grid: usize,
    pub nu: f64,
    pub q: f64,
    pub ok: bool,
}

/// Sample points `x_k` spread over the circle and rotated per grid index.
pub fn sample_points(cfg: &CSConfig) -> Vec<Vec<f64>> {
    let n = cfg.n;
    (0..cfg.grid)
        .map(|g| {
            let shift = cfg.l * (g as f64 + 0.37) / cfg.grid as f64;
            (0..n)
                .map(|k| {
                    let jitter = 0.11 * cfg.l * ((g * 7 + k * 3) % 5) as f64 / 5.0 / n as f64;
                    (shift + cfg.l * k as f64 / n as f64 + jitter).rem_euclid(cfg.l) - cfg.l / 2.0
                })
                .collect()
        })
        .collect()
}

/// Ratio and residual test of `F_η` under `H` (exact potential at `cfg.q`).
pub fn eigenfunction_from_recipe(recipe: &EigenRecipe, cfg: &CSConfig, tol: f64) -> Result<EigenReport> {
    let pts = sample_points(cfg);
    let ef = RecipeEigenfunction::new(recipe, cfg)?;
    let f = |x: &[f64]| ef.value(x).unwrap_or(C64::new(f64::NAN, 0.0));
    let hf = apply_h_grid(&f, &pts, cfg, PairPotential::Exact { q: cfg.q })?;
    let fv: Vec<C64> = pts.iter().map(|x| f(x)).collect();
    let ratios: Vec<C64> = hf.iter().zip(&fv).map(|(h, f)| h / f).collect();
    let mean = ratios.iter().sum::<C64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).norm_sqr()).sum::<f64>() / ratios.len() as f64;
    let stdev = var.sqrt() / mean.norm();
    let num: f64 = hf.iter().zip(&fv).map(|(h, f)| (h - f * mean.re).norm_sqr()).sum();
    let den: f64 = fv.iter().map(|f| f.norm_sqr()).sum();
    let residual = (num / den).sqrt();
    Ok(EigenReport {
        recipe: recipe.momenta.clone(),
        e: mean.re,
        residual,
        ratio_stdev: stdev,
        grid: pts.len(),
        nu: cfg.nu,
        q: cfg.q,
        ok: stdev < tol && residual < tol,
    })
}

/// Rayleigh quotient `(∫Σ|∂_kF|² + coupling V|F|²)/∫|F|²` for `N = 2`, reduced to
/// the relative coordinate (`|F|²` and the energy density are translation invariant).
pub fn rayleigh_quotient_pair(f: &dyn Fn(&[f64]) -> C64, cfg: &CSConfig, panels: usize) -> Result<f64> {
    if cfg.n != 2 {
        return Err(Error::Invalid("Rayleigh quotient implemented for N = 2".into()));
    }
    let gl = Legendre::new(24);
    let l = cfg.l;
    let x2 = 0.123 * l;
    let deriv = |x: &[f64], k: usize, h: f64| -> C64 {
        let mut z = x.to_vec();
        let mut at = |d: f64| {
            z[k] = x[k] + d;
            f(&z)
        };
        (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h)
    };
    // graded panels towards both coincidence points r = 0 and r = L
    let mut edges = vec![0.0];
    let g = 12;
    for j in (1..=g).rev() {
        edges.push(0.5 * l * 2f64.powi(-(j as i32)));
    }
    for j in 1..panels {
        edges.push(0.5 * l * j as f64 / panels as f64 + 0.0);
    }
    let half = edges.clone();
    let mut all: Vec<f64> = half.iter().filter(|&&r| r < 0.5 * l).copied().collect();
    all.push(0.5 * l);
    let mirrored: Vec<f64> = all.iter().rev().skip(1).map(|r| l - r).collect();
    all.extend(mirrored);
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    all.dedup();
    let mut num = C64::new(0.0, 0.0);
    let mut den = C64::new(0.0, 0.0);
    for w in all.windows(2) {
        num += gl.integrate_c(w[0], w[1], |r| {
            let x = [x2 + r, x2];
            let dist = r.min(l - r);
            let h = cfg.fd_step.min(0.01 * dist);
            let fx = f(&x);
            let kin = deriv(&x, 0, h).norm_sqr() + deriv(&x, 1, h).norm_sqr();
            let pot = if cfg.coupling() == 0.0 { 0.0 } else { cfg.coupling() * potential_v(r, l, cfg.q).unwrap_or(0.0) };
            C64::new(kin + pot * fx.norm_sqr(), 0.0)
        });
        den += gl.integrate_c(w[0], w[1], |r| C64::new(f(&[x2 + r, x2]).norm_sqr(), 0.0));
    }
    Ok(num.re / den.re)
}

/// CSV of a function on sample points: `x_1,…,x_N,re,im`.
pub fn grid_csv(points: &[Vec<f64>], values: &[C64]) -> String {
    use std::fmt::Write as _;
    let n = points.first().map(|p| p.len()).unwrap_or(0);
    let mut s = String::new();
    for k in 1..=n {
        let _ = write!(s, "x_{k},");
    }
    s.push_str("re,im\n");
    for (p, v) in points.iter().zip(values) {
        for x in p {
            let _ = write!(s, "{x:.17e},");
        }
        let _ = writeln!(s, "{:.17e},{:.17e}", v.re, v.im);
    }
    s
}

/// Operator form of `H^{ν,3}` in units of `(2π/L)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HNu3Form {
    /// `ν W^{ν,3} + (1 − ν²) κ 𝒞`, one fitted constant.
    Literal,
    /// `W^{ν,3} + (1 − ν²) κ 𝒞 + γ Q`, two fitted constants.
    ChargeCorrected,
}

/// `𝒞 ∝ Σ_{n≥1} n ρ̂(−n) ρ̂(n)`, diagonal with eigenvalue `Σ n² m_n`.
pub fn apply_c_operator<S: Scalar>(v: &FockVector<S>) -> FockVector<S> {
    let mut r = FockVector::zero();
    for (b, c) in &v.terms {
        let e: i64 = b.occ.iter().enumerate().map(|(i, &m)| ((i + 1) * (i + 1)) as i64 * m as i64).sum();
        if e != 0 {
            r.add_term(b.clone(), c.clone() * S::from_int(e));
        }
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HNu3Calibration {
    pub nu: f64,
    pub form: HNu3Form,
    pub kappa: f64,
    pub charge_coeff: f64,
    /// Max over `(w, ℓ)` of `‖[H, φ]R^wΩ + ∂²φR^wΩ‖`, relative to `‖∂²φR^wΩ‖` or to `‖φR^wΩ‖` where that is smaller, at level `ℓ`.
    pub residual: f64,
    pub lambda: u64,
    pub eps: f64,
}

struct CalibrationColumns {
    a: Vec<FockVector<C64>>,
    b: Vec<FockVector<C64>>,
    q: Vec<FockVector<C64>>,
    t: Vec<FockVector<C64>>,
    /// `‖φR^wΩ‖_ℓ · max(t², 1)`; zero where the level is empty.
    scale: Vec<f64>,
}

fn w_nu3_apply(nu: RationalNu, v: &FockVector<C64>) -> Result<FockVector<C64>> {
    let mut r = FockVector::zero();
    for (b, c) in &v.terms {
        r = r.add(&w_anyon::<QC>(nu, 3, b)?.to_c64().scale(c));
    }
    Ok(r)
}

fn level_part(v: &FockVector<C64>, l: u64) -> FockVector<C64> {
    FockVector { terms: v.terms.iter().filter(|(b, _)| b.level() == l).map(|(b, c)| (b.clone(), *c)).collect() }
}

fn calibration_columns(nu: RationalNu, form: HNu3Form, lambda: u64, sectors: (i64, i64), eps: f64, l: f64) -> Result<CalibrationColumns> {
    let nuf = nu.value();
    let field = ImplementerSpec::anyon(l, BlipParams { y: 0.0, eps, nu: nuf, nu0: nuf })?;
    let trunc = TruncationSpec::new(lambda, sectors.0, sectors.1 + 1)?;
    let w_scale = match form {
        HNu3Form::Literal => nuf,
        HNu3Form::ChargeCorrected => 1.0,
    };
    let mut cols = CalibrationColumns { a: vec![], b: vec![], q: vec![], t: vec![], scale: vec![] };
    for w in sectors.0..=sectors.1 {
        let vac = FockVector::<C64>::basis(FockBasisState::sector(w));
        let phi_vac = apply_implementer(&field, &vac, &trunc);
        let wv = w_nu3_apply(nu, &vac)?;
        let e_w = wv.coeff(&FockBasisState::sector(w));
        // [A, φ]R^wΩ = (A − e_w)φR^wΩ for A diagonal on R^wΩ
        let a_full = w_nu3_apply(nu, &phi_vac)?.sub(&phi_vac.scale(&e_w)).scale(&C64::new(w_scale, 0.0));
        let b_full = apply_c_operator(&phi_vac).scale(&C64::new(1.0 - nuf * nuf, 0.0));
        let q_full = phi_vac.clone();
        for lev in 0..=lambda {
            let t = nuf * nuf * (2 * w + 1) as f64 / 2.0 + lev as f64;
            let part = level_part(&phi_vac, lev);
            cols.scale.push(part.norm_sqr().sqrt() * (t * t).max(1.0));
            cols.t.push(part.scale(&C64::new(t * t, 0.0)));
            cols.a.push(level_part(&a_full, lev));
            cols.b.push(level_part(&b_full, lev));
            cols.q.push(level_part(&q_full, lev));
        }
    }
    Ok(cols)
}

/// Fit the free constants of `form` so that `[H, φ^ν_ε(x)]R^wΩ = −∂²_x φ^ν_ε(x)R^wΩ`
/// on levels `≤ lambda`, sectors `w ∈ sectors`, by linear least squares.
pub fn calibrate_h_nu3(nu: RationalNu, form: HNu3Form, lambda: u64, sectors: (i64, i64), eps: f64, l: f64) -> Result<HNu3Calibration> {
    let c = calibration_columns(nu, form, lambda, sectors, eps, l)?;
    let nuf = nu.value();
    let weight = |i: usize| if c.scale[i] > 0.0 { 1.0 / c.scale[i] } else { 0.0 };
    // normal equations over real parameters
    let np = match form {
        HNu3Form::Literal => 1,
        HNu3Form::ChargeCorrected => 2,
    };
    let mut g = nalgebra::DMatrix::<f64>::zeros(np, np);
    let mut h = nalgebra::DVector::<f64>::zeros(np);
    for i in 0..c.t.len() {
        let wgt = weight(i).powi(2);
        let r = c.t[i].sub(&c.a[i]);
        let basis: Vec<&FockVector<C64>> = if np == 1 { vec![&c.b[i]] } else { vec![&c.b[i], &c.q[i]] };
        for (p, bp) in basis.iter().enumerate() {
            h[p] += wgt * bp.inner(&r).re;
            for (s, bs) in basis.iter().enumerate() {
                g[(p, s)] += wgt * bp.inner(bs).re;
            }
        }
    }
    let sol = if nuf == 1.0 {
        nalgebra::DVector::<f64>::zeros(np)
    } else {
        g.clone().lu().solve(&h).ok_or(Error::Calibration(f64::NAN))?
    };
    let kappa = if nuf == 1.0 { 0.0 } else { sol[0] };
    let gamma = if np == 2 { sol[1] } else { 0.0 };
    let mut worst = 0.0f64;
    for i in 0..c.t.len() {
        let lhs = c.a[i].add(&c.b[i].scale(&C64::new(kappa, 0.0))).add(&c.q[i].scale(&C64::new(gamma, 0.0)));
        let d = lhs.sub(&c.t[i]).norm_sqr().sqrt();
        worst = worst.max(d * weight(i));
    }
    Ok(HNu3Calibration { nu: nuf, form, kappa, charge_coeff: gamma, residual: worst, lambda, eps })
}

/// Matrix of the calibrated `H^{ν,3}` on a truncated space.
pub fn build_h_nu3(nu: RationalNu, cal: &HNu3Calibration, spec: &TruncationSpec) -> Result<SparseOperator<C64>> {
    let nuf = nu.value();
    let w_scale = match cal.form {
        HNu3Form::Literal => nuf,
        HNu3Form::ChargeCorrected => 1.0,
    };
    let basis = enumerate_basis(spec);
    let images: Vec<(FockBasisState, FockVector<C64>)> = basis
        .par_iter()
        .map(|b| -> Result<_> {
            let e = FockVector::<C64>::basis(b.clone());
            let v = w_anyon::<QC>(nu, 3, b)?.to_c64().scale(&C64::new(w_scale, 0.0));
            let v = v
                .add(&apply_c_operator(&e).scale(&C64::new((1.0 - nuf * nuf) * cal.kappa, 0.0)))
                .add(&e.scale(&C64::new(cal.charge_coeff * b.w as f64, 0.0)));
            Ok((b.clone(), v))
        })
        .collect::<Result<_>>()?;
    let map: std::collections::HashMap<_, _> = images.into_iter().collect();
    Ok(SparseOperator::build_on(basis, |v| {
        let mut r = FockVector::zero();
        for (b, c) in &v.terms {
            r = r.add(&map[b].scale(c));
        }
        r
    }))
}

/// `‖H^{ν,3}Ω‖`.
pub fn h_nu3_vacuum_norm(h: &SparseOperator<C64>) -> f64 {
    h.apply(&FockVector::vacuum()).norm_sqr().sqrt()
}

/// Gibbs-weighted trace `Σ_b q^{2ℓ(b) + w(b)²} ⟨b, [H, φ^ν(x₁)φ^{−ν}(x₂)] b⟩ / Σ_b q^{…}‖b‖²`
/// on the truncated space; vanishes because `H` preserves level and charge.
pub fn not1_gibbs_residual(
    nu: RationalNu,
    cal: &HNu3Calibration,
    q: f64,
    x: (f64, f64),
    eps: f64,
    spec: &TruncationSpec,
    l: f64,
) -> Result<(C64, f64)> {
    let nuf = nu.value();
    let h = build_h_nu3(nu, cal, spec)?;
    let a = ImplementerSpec::anyon(l, BlipParams { y: x.0, eps, nu: nuf, nu0: nuf })?;
    let b = ImplementerSpec::anyon(l, BlipParams { y: x.1, eps, nu: -nuf, nu0: nuf })?;
    let mut tr = C64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    let mut z = 0.0;
    for st in &h.basis {
        let wgt = q.powi(2 * st.level() as i32 + (st.w * st.w) as i32);
        let e = FockVector::<C64>::basis(st.clone());
        let x_e = apply_implementer(&a, &apply_implementer(&b, &e, spec), spec);
        let hx = h.apply(&x_e);
        let xh = apply_implementer(&a, &apply_implementer(&b, &h.apply(&e), spec), spec);
        let d = hx.sub(&xh).coeff(st) * st.norm_sqr_int() as f64;
        tr += d * wgt;
        scale += wgt * hx.coeff(st).norm() * st.norm_sqr_int() as f64;
        z += wgt;
    }
    Ok((tr / z, scale / z))
}
