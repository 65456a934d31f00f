//! Loops on the circle of length `L`, their mode decomposition, the group
//! two-cocycle, blip families and the regularized kernel `b_ε`.
//!
//! A loop is stored as
//! `f(x) = w·2πx/L + ᾱ + Σ_{n≠0} c_n e^{2πinx/L}`, so that `α̂(2πn/L) = L·c_n`.

use crate::error::{Error, Result};
use crate::quad::Legendre;
use crate::scalar::C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub l: f64,
    pub lambda: usize,
}

impl LatticeSpec {
    pub fn new(l: f64, lambda: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Invalid(format!("circle length must be positive, got {l}")));
        }
        Ok(Self { l, lambda })
    }
    /// Spacing `2π/L` of both momentum lattices.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.l
    }
    pub fn boson_momentum(&self, n: i64) -> f64 {
        n as f64 * self.dk()
    }
    pub fn fermion_momentum(&self, n: i64) -> f64 {
        (n as f64 + 0.5) * self.dk()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopFunction {
    pub l: f64,
    pub winding: f64,
    pub mean: C64,
    /// `c_n`, the coefficient of `e^{2πinx/L}`; `n = 0` never stored.
    pub modes: BTreeMap<i64, C64>,
    /// Statistics unit for anyonic loops, whose winding may be fractional.
    pub nu0: Option<f64>,
}

impl LoopFunction {
    pub fn zero(l: f64) -> Self {
        Self { l, winding: 0.0, mean: C64::new(0.0, 0.0), modes: BTreeMap::new(), nu0: None }
    }

    pub fn winding_only(l: f64, w: f64) -> Self {
        Self { winding: w, ..Self::zero(l) }
    }

    pub fn constant(l: f64, c: C64) -> Self {
        Self { mean: c, ..Self::zero(l) }
    }

    /// Build from closed-form modes `α̂(2πn/L)`.
    pub fn from_alpha_hat(l: f64, winding: f64, mean: C64, alpha_hat: &[(i64, C64)]) -> Result<Self> {
        check_winding(winding, None)?;
        let mut modes = BTreeMap::new();
        for &(n, a) in alpha_hat {
            if n != 0 {
                *modes.entry(n).or_insert(C64::new(0.0, 0.0)) += a / l;
            }
        }
        Ok(Self { l, winding, mean, modes, nu0: None })
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.l
    }

    pub fn mode(&self, n: i64) -> C64 {
        if n == 0 {
            return C64::new(0.0, 0.0);
        }
        self.modes.get(&n).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn alpha_hat(&self, n: i64) -> C64 {
        self.mode(n) * self.l
    }

    pub fn eval(&self, x: f64) -> C64 {
        let k = self.dk();
        let mut v = C64::new(self.winding * k * x, 0.0) + self.mean;
        for (&n, &c) in &self.modes {
            v += c * C64::from_polar(1.0, k * n as f64 * x);
        }
        v
    }

    pub fn derivative(&self, x: f64) -> C64 {
        let k = self.dk();
        let mut v = C64::new(self.winding * k, 0.0);
        for (&n, &c) in &self.modes {
            v += c * C64::new(0.0, k * n as f64) * C64::from_polar(1.0, k * n as f64 * x);
        }
        v
    }

    /// Positive-frequency part `α⁺` (zero winding and mean).
    pub fn plus_part(&self) -> Self {
        self.filtered(|n| n > 0)
    }

    /// Negative-frequency part `α⁻`.
    pub fn minus_part(&self) -> Self {
        self.filtered(|n| n < 0)
    }

    /// Periodic part `α = α⁺ + α⁻` (mean removed).
    pub fn periodic_part(&self) -> Self {
        self.filtered(|_| true)
    }

    fn filtered(&self, keep: impl Fn(i64) -> bool) -> Self {
        Self {
            l: self.l,
            winding: 0.0,
            mean: C64::new(0.0, 0.0),
            modes: self.modes.iter().filter(|(n, _)| keep(**n)).map(|(n, c)| (*n, *c)).collect(),
            nu0: None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert!((self.l - o.l).abs() < 1e-12 * self.l);
        let mut modes = self.modes.clone();
        for (&n, &c) in &o.modes {
            *modes.entry(n).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let nu0 = match (self.nu0, o.nu0) {
            (Some(a), _) => Some(a),
            (None, b) => b,
        };
        Self { l: self.l, winding: self.winding + o.winding, mean: self.mean + o.mean, modes, nu0 }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            l: self.l,
            winding: self.winding * s,
            mean: self.mean * s,
            modes: self.modes.iter().map(|(n, c)| (*n, *c * s)).collect(),
            nu0: self.nu0,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Real-valued loops have `c_{-n} = conj(c_n)` and a real mean.
    pub fn is_real(&self, tol: f64) -> bool {
        self.mean.im.abs() <= tol
            && self.modes.iter().all(|(n, c)| (self.mode(-n) - c.conj()).norm() <= tol)
    }

    pub fn max_mode(&self) -> i64 {
        self.modes.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    /// Integer winding, if the loop has one.
    pub fn integer_winding(&self) -> Option<i64> {
        let r = self.winding.round();
        ((self.winding - r).abs() < 1e-9).then_some(r as i64)
    }

    pub fn to_record(&self) -> LoopRecord {
        LoopRecord {
            l: self.l,
            winding: self.winding,
            mean: Cplx { re: self.mean.re, im: self.mean.im },
            modes: self
                .modes
                .iter()
                .map(|(&n, &c)| ModeRecord { n, re: c.re * self.l, im: c.im * self.l })
                .collect(),
        }
    }

    pub fn from_record(r: &LoopRecord) -> Result<Self> {
        let modes: Vec<(i64, C64)> = r.modes.iter().map(|m| (m.n, C64::new(m.re, m.im))).collect();
        Self::from_alpha_hat(r.l, r.winding, C64::new(r.mean.re, r.mean.im), &modes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

/// JSON form of a loop; modes are `α̂(2πn/L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    #[serde(rename = "L")]
    pub l: f64,
    pub winding: f64,
    pub mean: Cplx,
    pub modes: Vec<ModeRecord>,
}

fn check_winding(w: f64, nu0: Option<f64>) -> Result<()> {
    let units = match nu0 {
        Some(u) => w * u,
        None => w,
    };
    if (units - units.round()).abs() > 1e-9 {
        return match nu0 {
            None => Err(Error::NonIntegerWinding(w)),
            Some(u) => Err(Error::NotMultipleOfUnit { nu: w, nu0: u }),
        };
    }
    Ok(())
}

/// Decompose a lifted loop `f` (with `e^{if}` smooth) into winding, mean and
/// modes up to `nmax`, sampling on `grid ≥ 4·nmax` points.
pub fn decompose_loop(
    l: f64,
    f: impl Fn(f64) -> C64,
    nmax: usize,
    grid: usize,
    nu0: Option<f64>,
) -> Result<LoopFunction> {
    let grid = grid.max(4 * nmax).max(8);
    let jump = f(l / 2.0) - f(-l / 2.0);
    let winding = jump.re / (2.0 * PI);
    if nu0.is_none() {
        check_winding(winding, None)?;
    }
    let winding = if nu0.is_none() { winding.round() } else { winding };
    let k = 2.0 * PI / l;
    let xs: Vec<f64> = (0..grid).map(|j| -l / 2.0 + l * j as f64 / grid as f64).collect();
    let g: Vec<C64> = xs.iter().map(|&x| f(x) - winding * k * x).collect();
    let coef = |n: i64| -> C64 {
        let s: C64 = xs.iter().zip(&g).map(|(&x, &v)| v * C64::from_polar(1.0, -k * n as f64 * x)).sum();
        s / grid as f64
    };
    let mean = coef(0);
    let mut modes = BTreeMap::new();
    for n in 1..=nmax as i64 {
        for m in [n, -n] {
            let c = coef(m);
            if c.norm() > 1e-15 {
                modes.insert(m, c);
            }
        }
    }
    Ok(LoopFunction { l, winding, mean, modes, nu0 })
}

/// `Ŝ(α₁, α₂) = i Σ_n n·c¹_n·c²_{-n}`; independent of `L` in these units.
pub fn s_hat(a: &LoopFunction, b: &LoopFunction) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for (&n, &c) in &a.modes {
        if let Some(&d) = b.modes.get(&-n) {
            s += c * d * n as f64;
        }
    }
    s * C64::new(0.0, 1.0)
}

fn zero_part(f1: &LoopFunction, f2: &LoopFunction) -> C64 {
    f2.mean * f1.winding - f1.mean * f2.winding
}

/// Group two-cocycle `S(f₁, f₂)`.
pub fn cocycle_s(f1: &LoopFunction, f2: &LoopFunction) -> C64 {
    zero_part(f1, f2) + s_hat(f1, f2)
}

/// `S̃(f₁, f₂) = w₁ᾱ₂ − ᾱ₁w₂ + 2Ŝ(α₁⁻, α₂⁺)`.
pub fn cocycle_tilde_s(f1: &LoopFunction, f2: &LoopFunction) -> C64 {
    zero_part(f1, f2) + s_hat(&f1.minus_part(), &f2.plus_part()) * 2.0
}

/// `S(f₁, f₂)` from its boundary-plus-integral definition, by Gauss–Legendre
/// quadrature with `panels × points` nodes.
pub fn cocycle_s_integral(f1: &LoopFunction, f2: &LoopFunction, points: usize, panels: usize) -> C64 {
    let l = f1.l;
    let h = l / 2.0;
    let boundary = (f1.eval(h) * f2.eval(-h) - f1.eval(-h) * f2.eval(h)) / (4.0 * PI);
    let gl = Legendre::new(points);
    let bulk = gl.integrate_panels(-h, h, panels, |x| {
        f1.derivative(x) * f2.eval(x) - f1.eval(x) * f2.derivative(x)
    });
    boundary + bulk / (4.0 * PI)
}

/// Smallest `N` with `Σ_{n>N} λ^n/n < tol`.
pub fn blip_cutoff(lambda: f64, tol: f64) -> i64 {
    let mut n = 1i64;
    loop {
        let tail = lambda.powi(n as i32 + 1) / ((n + 1) as f64 * (1.0 - lambda));
        if tail < tol || n > 2_000_000 {
            return n;
        }
        n += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlipParams {
    pub y: f64,
    pub eps: f64,
    pub nu: f64,
    pub nu0: f64,
}

/// Default truncation tolerance for blip mode tails.
pub const BLIP_TOL: f64 = 1e-17;

fn blip_periodic(l: f64, y: f64, eps: f64, tol: f64) -> Result<BTreeMap<i64, C64>> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveRegulator(eps));
    }
    let k = 2.0 * PI / l;
    let lam = (-k * eps).exp();
    let nmax = blip_cutoff(lam, tol);
    let mut modes = BTreeMap::new();
    for n in 1..=nmax {
        let c = C64::from_polar(lam.powi(n as i32) / n as f64, -k * n as f64 * y) * C64::new(0.0, -1.0);
        modes.insert(n, c);
        modes.insert(-n, c.conj());
    }
    Ok(modes)
}

/// Blip `f_{y,ε}`: winding one, step of height `2π` smoothed over `ε` at `y`.
pub fn blip(l: f64, y: f64, eps: f64) -> Result<LoopFunction> {
    blip_tol(l, y, eps, BLIP_TOL)
}

pub fn blip_tol(l: f64, y: f64, eps: f64, tol: f64) -> Result<LoopFunction> {
    let modes = blip_periodic(l, y, eps, tol)?;
    Ok(LoopFunction { l, winding: 1.0, mean: C64::new(-2.0 * PI * y / l, 0.0), modes, nu0: None })
}

/// Anyon blip `f̃_{y,ε}` with winding `1/ν₀` and mean `−2πν₀y/L`.
pub fn anyon_blip(l: f64, y: f64, eps: f64, nu0: f64) -> Result<LoopFunction> {
    if !(nu0 > 0.0) {
        return Err(Error::Invalid(format!("statistics unit must be positive, got {nu0}")));
    }
    let modes = blip_periodic(l, y, eps, BLIP_TOL)?;
    Ok(LoopFunction {
        l,
        winding: 1.0 / nu0,
        mean: C64::new(-2.0 * PI * nu0 * y / l, 0.0),
        modes,
        nu0: Some(nu0),
    })
}

/// `ν·f̃_{y,ε}`, the loop of the anyon field `φ^ν_ε(y)`; `ν/ν₀` must be an integer.
pub fn anyon_loop(l: f64, p: &BlipParams) -> Result<LoopFunction> {
    let ratio = p.nu / p.nu0;
    if (ratio - ratio.round()).abs() > 1e-9 {
        return Err(Error::NotMultipleOfUnit { nu: p.nu, nu0: p.nu0 });
    }
    let mut f = anyon_blip(l, p.y, p.eps, p.nu0)?.scale(p.nu);
    f.winding = ratio.round();
    Ok(f)
}

/// Smoothed delta `δ_{y,ε}` with unit integral.
pub fn smoothed_delta(l: f64, y: f64, eps: f64) -> Result<LoopFunction> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveRegulator(eps));
    }
    let k = 2.0 * PI / l;
    let lam = (-k * eps).exp();
    let nmax = blip_cutoff(lam, BLIP_TOL * 1e-2);
    let mut modes = BTreeMap::new();
    for n in 1..=nmax {
        let c = C64::from_polar(lam.powi(n as i32) / l, -k * n as f64 * y);
        modes.insert(n, c);
        modes.insert(-n, c.conj());
    }
    Ok(LoopFunction { l, winding: 0.0, mean: C64::new(1.0 / l, 0.0), modes, nu0: None })
}

/// `sgn_ε(r) = f_{0,ε}(r)/π`, summed in closed form.
pub fn sgn_eps(l: f64, r: f64, eps: f64) -> Result<C64> {
    if !(eps > 0.0) {
        return Err(Error::NonPositiveRegulator(eps));
    }
    let k = 2.0 * PI / l;
    let lam = (-k * eps).exp();
    let arg = (C64::new(1.0, 0.0) - C64::from_polar(lam, k * r)).arg();
    Ok(C64::new((k * r - 2.0 * arg) / PI, 0.0))
}

/// `α⁺_{y,ε}(x) = i·log(1 − e^{2π(i(x−y) − ε)/L})`.
pub fn alpha_plus_closed(l: f64, y: f64, eps: f64, x: f64) -> C64 {
    let u = C64::from_polar((-2.0 * PI * eps / l).exp(), 2.0 * PI * (x - y) / l);
    C64::new(0.0, 1.0) * (C64::new(1.0, 0.0) - u).ln()
}

/// `δ^±_{y,ε}(x)` summed in closed form.
pub fn delta_pm_closed(l: f64, y: f64, eps: f64, x: f64, sign: i32) -> C64 {
    let u = C64::from_polar((-2.0 * PI * eps / l).exp(), sign as f64 * 2.0 * PI * (x - y) / l);
    u / (C64::new(1.0, 0.0) - u) / l
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub eps: f64,
    pub q: f64,
    pub l: f64,
}

impl KernelParams {
    pub fn new(l: f64, eps: f64, q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::NomeOutOfRange(q));
        }
        if eps < 0.0 {
            return Err(Error::NonPositiveRegulator(eps));
        }
        Ok(Self { eps, q, l })
    }
}

/// Factor tolerance for truncating the thermal product.
pub const PRODUCT_TOL: f64 = 1e-16;

/// `Π_{n≥1} [1 − 2q^{2n}λcos(2πr/L) + q^{4n}λ²]`, `λ = e^{−2πε/L}`; real and positive.
pub fn thermal_product(r: f64, p: &KernelParams) -> f64 {
    if p.q == 0.0 {
        return 1.0;
    }
    let lam = (-2.0 * PI * p.eps / p.l).exp();
    let c = (2.0 * PI * r / p.l).cos();
    let q2 = p.q * p.q;
    let mut qn = q2;
    let mut prod = 1.0;
    loop {
        let fac = 1.0 - 2.0 * qn * lam * c + qn * qn * lam * lam;
        prod *= fac;
        if (fac - 1.0).abs() < PRODUCT_TOL {
            break;
        }
        qn *= q2;
    }
    prod
}

/// Regularized kernel `b_ε(r)` at nome `q`.
pub fn kernel_b(r: f64, p: &KernelParams) -> Result<C64> {
    if !(0.0..1.0).contains(&p.q) {
        return Err(Error::NomeOutOfRange(p.q));
    }
    let s = (C64::new(r, p.eps) * (PI / p.l)).sin();
    let v = C64::new(0.0, -2.0) * (-PI * p.eps / p.l).exp() * s;
    Ok(v * thermal_product(r, p))
}

/// `b_ε(r)^β` on the branch `e^{−iπβr/L}·(1 − u)^β·Π^β`, `u = e^{2πi(r+iε)/L}`,
/// with the principal power of `1 − u`.
pub fn kernel_b_pow(r: f64, p: &KernelParams, beta: f64) -> Result<C64> {
    if !(0.0..1.0).contains(&p.q) {
        return Err(Error::NomeOutOfRange(p.q));
    }
    let u = C64::from_polar((-2.0 * PI * p.eps / p.l).exp(), 2.0 * PI * r / p.l);
    let one_minus = C64::new(1.0, 0.0) - u;
    if one_minus.norm() == 0.0 {
        return Err(Error::Singular(r));
    }
    let phase = C64::from_polar(1.0, -PI * beta * r / p.l);
    Ok(phase * one_minus.powf(beta) * thermal_product(r, p).powf(beta))
}

/// Loop with Gaussian-rational data for exact cocycle arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLoop {
    pub winding: i64,
    pub mean: crate::scalar::QC,
    pub modes: BTreeMap<i64, crate::scalar::QC>,
}

impl ExactLoop {
    pub fn add(&self, o: &Self) -> Self {
        let mut modes = self.modes.clone();
        for (n, c) in &o.modes {
            let e = modes.entry(*n).or_insert_with(num_traits::Zero::zero);
            *e = e.clone() + c.clone();
        }
        Self { winding: self.winding + o.winding, mean: self.mean.clone() + o.mean.clone(), modes }
    }
}

/// `S(f₁, f₂)` in exact arithmetic.
pub fn cocycle_s_exact(f1: &ExactLoop, f2: &ExactLoop) -> crate::scalar::QC {
    use crate::scalar::{Scalar, QC};
    let mut s = f2.mean.clone() * QC::from_int(f1.winding) - f1.mean.clone() * QC::from_int(f2.winding);
    let mut hat = QC::from_int(0);
    for (&n, c) in &f1.modes {
        if let Some(d) = f2.modes.get(&-n) {
            hat = hat + c.clone() * d.clone() * QC::from_int(n);
        }
    }
    s = s + hat * QC::imag_unit();
    s
}
