//! Theta functions, the genus-one Szegő kernel and the KMS projection `P(A(β))`.

use crate::error::{Error, Result};
use crate::quad::{trapezoid_periodic, Legendre};
use crate::scalar::C64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Terms are summed until the next one is below this, relative to the running sum.
pub const SERIES_TOL: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaParams {
    pub q: f64,
    /// Largest summation index allowed.
    pub max_terms: usize,
}

/// Value of a theta series together with the certified truncation tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: C64,
    pub tail: f64,
    pub terms: usize,
}

impl ThetaParams {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::NomeOutOfRange(q));
        }
        Ok(Self { q, max_terms: 10_000 })
    }
    /// `q = e^{−β/2}`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Invalid(format!("β = {beta} must be positive")));
        }
        Self::new((-beta / 2.0).exp())
    }
    pub fn beta(&self) -> f64 {
        -2.0 * self.q.ln()
    }
}

/// Sum `Σ_{n≥0} a_n` where `|a_n| ≤ b_n` and `b_{n+1}/b_n` is eventually decreasing;
/// stops once the geometric tail bound falls below tolerance.
fn sum_certified(p: &ThetaParams, mut term: impl FnMut(usize) -> (C64, f64)) -> Result<SeriesValue> {
    let mut acc = C64::new(0.0, 0.0);
    let mut prev_bound = f64::INFINITY;
    for n in 0..p.max_terms {
        let (a, b) = term(n);
        acc += a;
        if n > 0 && b < prev_bound {
            let r = b / prev_bound;
            // tail ≤ b·r/(1−r) once the bound ratio decreases monotonically
            let tail = b * r / (1.0 - r);
            if r < 1.0 && tail <= SERIES_TOL * acc.norm().max(1.0) {
                return Ok(SeriesValue { value: acc, tail, terms: n + 1 });
            }
        }
        prev_bound = b;
    }
    Err(Error::Invalid("theta series did not converge".into()))
}

/// `θ₁(ξ) = 2 Σ_{n≥0} (−1)ⁿ q^{(n+½)²} sin((n+½)ξ)`.
pub fn theta1(xi: C64, p: &ThetaParams) -> Result<SeriesValue> {
    let growth = xi.im.abs();
    sum_certified(p, |n| {
        let h = n as f64 + 0.5;
        let w = p.q.powf(h * h);
        let s = if n % 2 == 0 { 2.0 } else { -2.0 };
        (xi.scale(h).sin() * (s * w), 2.0 * w * (h * growth).exp())
    })
}

/// `θ₃(ξ) = 1 + 2 Σ_{n≥1} q^{n²} cos(nξ)`.
pub fn theta3(xi: C64, p: &ThetaParams) -> Result<SeriesValue> {
    let growth = xi.im.abs();
    sum_certified(p, |n| {
        if n == 0 {
            return (C64::new(1.0, 0.0), 1.0);
        }
        let w = p.q.powf((n * n) as f64);
        (xi.scale(n as f64).cos() * (2.0 * w), 2.0 * w * (n as f64 * growth).exp())
    })
}

/// `θ₁′(0) = 2 Σ (−1)ⁿ (n+½) q^{(n+½)²}`.
pub fn theta1_prime0(p: &ThetaParams) -> Result<SeriesValue> {
    sum_certified(p, |n| {
        let h = n as f64 + 0.5;
        let w = 2.0 * h * p.q.powf(h * h);
        (C64::new(if n % 2 == 0 { w } else { -w }, 0.0), w)
    })
}

/// Scalar part of the Szegő kernel, `θ₃(φ−ξ)θ₁′(0) / (θ₃(0)θ₁(φ−ξ))`, at complex separation.
pub fn szego_kernel_at(theta: C64, p: &ThetaParams) -> Result<C64> {
    let t1 = theta1(theta, p)?.value;
    if t1.norm() < 1e-300 {
        return Err(Error::Singular(theta.re));
    }
    let num = theta3(theta, p)?.value * theta1_prime0(p)?.value;
    Ok(num / (theta3(C64::new(0.0, 0.0), p)?.value * t1))
}

/// Szegő kernel at real arguments; `exclusion` is the pole neighbourhood radius.
pub fn szego_kernel(phi: f64, xi: f64, p: &ThetaParams, exclusion: f64) -> Result<C64> {
    let d = (phi - xi).rem_euclid(2.0 * PI);
    if d.min(2.0 * PI - d) < exclusion {
        return Err(Error::Singular(phi - xi));
    }
    szego_kernel_at(C64::new(phi - xi, 0.0), p)
}

/// Nome of the thermal kernel on a circle of length `l` at inverse temperature `beta`, `e^{−πβ/l}`.
pub fn thermal_nome(beta: f64, l: f64) -> Result<f64> {
    if !(beta > 0.0 && l > 0.0) {
        return Err(Error::Invalid(format!("β = {beta}, L = {l} must be positive")));
    }
    Ok((-PI * beta / l).exp())
}

/// Fermi factor `e^{−β(n+½)}/(1+e^{−β(n+½)})`.
pub fn fermi(n: i64, beta: f64) -> f64 {
    let x = beta * (n as f64 + 0.5);
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `e^{−β(n+½)/2}/(1+e^{−β(n+½)})`.
pub fn fermi_half(n: i64, beta: f64) -> f64 {
    1.0 / (2.0 * (beta * (n as f64 + 0.5) / 2.0).cosh())
}

/// `Σ_n Fermi(n) e^{inθ}` for `θ ∉ 2πℤ`, Abel-summed on the `n < 0` side:
/// `Σ_{n≥0} F(n)e^{inθ} + e^{−iθ}/(1−e^{−iθ}) − Σ_{m≥0} F(m) e^{−i(m+1)θ}`.
pub fn fermi_fourier_sum(theta: f64, beta: f64) -> Result<SeriesValue> {
    let z = C64::from_polar(1.0, -theta);
    let one = C64::new(1.0, 0.0);
    if (one - z).norm() < 1e-300 {
        return Err(Error::Singular(theta));
    }
    let mut acc = z / (one - z);
    let mut n = 0i64;
    loop {
        let f = fermi(n, beta);
        acc += C64::from_polar(f, n as f64 * theta) - C64::from_polar(f, -(n as f64 + 1.0) * theta);
        let r = (-beta).exp();
        let tail = 2.0 * fermi(n + 1, beta) / (1.0 - r);
        if tail < SERIES_TOL * acc.norm().max(1.0) {
            return Ok(SeriesValue { value: acc, tail, terms: n as usize + 1 });
        }
        n += 1;
    }
}

/// `−i e^{−iθ/2} K(θ)`, the function on the right of the Fourier identity.
pub fn fermi_kernel_closed(theta: C64, p: &ThetaParams) -> Result<C64> {
    let ph = (C64::new(0.0, -0.5) * theta).exp();
    Ok(C64::new(0.0, -1.0) * ph * szego_kernel_at(theta, p)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub beta: f64,
    pub grid: usize,
    pub max_residual: f64,
    pub max_tail: f64,
    pub exclusion: f64,
}

/// Max over a `θ` grid (outside the pole zone) of the Fourier/Szegő identity residual.
pub fn fourier_identity_residual(beta: f64, grid: usize) -> Result<IdentityReport> {
    let p = ThetaParams::from_beta(beta)?;
    let step = 2.0 * PI / grid as f64;
    let exclusion = 5.0 * step;
    let mut worst = 0.0f64;
    let mut tail = 0.0f64;
    for g in 0..grid {
        let th = -PI + (g as f64 + 0.5) * step;
        if th.abs() < exclusion {
            continue;
        }
        let s = fermi_fourier_sum(th, beta)?;
        let k = fermi_kernel_closed(C64::new(th, 0.0), &p)?;
        worst = worst.max((s.value - k).norm());
        tail = tail.max(s.tail);
    }
    Ok(IdentityReport { beta, grid, max_residual: worst, max_tail: tail, exclusion })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMSProjectionSpec {
    pub beta: f64,
    pub n_max: i64,
}

impl KMSProjectionSpec {
    pub fn new(beta: f64, n_max: i64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Invalid(format!("β = {beta} must be positive")));
        }
        Ok(Self { beta, n_max })
    }
    pub fn modes(&self) -> std::ops::RangeInclusive<i64> {
        -self.n_max..=self.n_max
    }
}

/// `P(A)` mode block `[[A, √(A(1−A))], [√(A(1−A)), 1−A]]` at `t = e^{−β(n+½)/2}`.
pub fn projection_block(n: i64, beta: f64) -> [[f64; 2]; 2] {
    let a = fermi(n, beta);
    let h = fermi_half(n, beta);
    [[a, h], [h, 1.0 - a]]
}

/// The same block in exact arithmetic at rational `t`: entries `t²/(1+t²)`, `t/(1+t²)`, `1/(1+t²)`.
pub fn projection_block_exact(t: &BigRational) -> [[BigRational; 2]; 2] {
    let one = BigRational::one();
    let d = &one + t * t;
    [[t * t / &d, t / &d], [t / &d, &one / &d]]
}

/// `P² − P` and `Pᵀ − P` vanish identically for the exact block.
pub fn projection_defect_exact(t: &BigRational) -> bool {
    let p = projection_block_exact(t);
    let mut ok = p[0][1] == p[1][0];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = BigRational::zero();
            for k in 0..2 {
                s += &p[i][k] * &p[k][j];
            }
            ok &= s == p[i][j];
        }
    }
    ok
}

/// Rational approximant of `e^{−β(n+½)/2}` used for the exact block check.
pub fn t_rational(n: i64, beta: f64) -> BigRational {
    let t = (-beta * (n as f64 + 0.5) / 2.0).exp();
    crate::scalar::rational_from_f64(t).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedModes {
    pub modes: Vec<i64>,
    pub g1: Vec<C64>,
    pub g2: Vec<C64>,
}

/// `P(A(β))(f, 0) = (g₁, g₂)` mode by mode.
pub fn kms_project(f: &[(i64, C64)], spec: &KMSProjectionSpec) -> Result<ProjectedModes> {
    let mut out = ProjectedModes { modes: vec![], g1: vec![], g2: vec![] };
    for &(n, c) in f {
        if !spec.modes().contains(&n) {
            return Err(Error::OutsideWindow(n));
        }
        out.modes.push(n);
        out.g1.push(c * fermi(n, spec.beta));
        out.g2.push(c * fermi_half(n, spec.beta));
    }
    Ok(out)
}

fn eval_modes(f: &[(i64, C64)], x: f64) -> C64 {
    f.iter().map(|&(n, c)| c * C64::from_polar(1.0, n as f64 * x)).sum()
}

/// `g₁(φ)` by principal-value quadrature of the Szegő kernel against `f`:
/// `½f(φ) + (1/2π) PV∫ −ie^{−iθ/2}K(θ) f(φ−θ) dθ`, the singular part `−(i/2)cot(θ/2)`
/// handled by subtraction.
pub fn g1_by_quadrature(f: &[(i64, C64)], beta: f64, phi: f64, points: usize, panels: usize) -> Result<C64> {
    let p = ThetaParams::from_beta(beta)?;
    let gl = Legendre::new(points);
    let f0 = eval_modes(f, phi);
    let mut err = None;
    let integrand = |th: f64| -> C64 {
        let k = match fermi_kernel_closed(C64::new(th, 0.0), &p) {
            Ok(k) => k,
            Err(e) => {
                err = Some(e);
                return C64::new(0.0, 0.0);
            }
        };
        let sing = C64::new(0.0, -0.5 / (th / 2.0).tan());
        (k - sing) * eval_modes(f, phi - th) + sing * (eval_modes(f, phi - th) - f0)
    };
    // symmetric nodes avoid θ = 0
    let v = gl.integrate_panels(-PI, PI, 2 * panels, integrand);
    if let Some(e) = err {
        return Err(e);
    }
    Ok(f0 * 0.5 + v / (2.0 * PI))
}

/// `g₂(φ)` by periodic trapezoid against the smooth kernel `e^{β/4}·(−i)e^{−i(θ−iβ/2)/2}K(θ − iβ/2)`.
pub fn g2_by_quadrature(f: &[(i64, C64)], beta: f64, phi: f64, points: usize) -> Result<C64> {
    let p = ThetaParams::from_beta(beta)?;
    let mut err = None;
    let v = trapezoid_periodic(-PI, 2.0 * PI, points, |th| {
        match fermi_kernel_closed(C64::new(th, -beta / 2.0), &p) {
            Ok(k) => k * (beta / 4.0).exp() * eval_modes(f, phi - th),
            Err(e) => {
                err = Some(e);
                C64::new(0.0, 0.0)
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v / (2.0 * PI))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub beta: f64,
    pub g1_error: f64,
    pub g2_error: f64,
}

/// Max deviation of the quadrature `g₁`, `g₂` from the closed-form projection on sample angles.
pub fn quadrature_check(f: &[(i64, C64)], beta: f64, samples: &[f64]) -> Result<QuadratureReport> {
    let n_max = f.iter().map(|m| m.0.abs()).max().unwrap_or(0);
    let proj = kms_project(f, &KMSProjectionSpec::new(beta, n_max)?)?;
    let g1m: Vec<(i64, C64)> = proj.modes.iter().copied().zip(proj.g1.iter().copied()).collect();
    let g2m: Vec<(i64, C64)> = proj.modes.iter().copied().zip(proj.g2.iter().copied()).collect();
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for &phi in samples {
        e1 = e1.max((g1_by_quadrature(f, beta, phi, 32, 16)? - eval_modes(&g1m, phi)).norm());
        e2 = e2.max((g2_by_quadrature(f, beta, phi, 256)? - eval_modes(&g2m, phi)).norm());
    }
    Ok(QuadratureReport { beta, g1_error: e1, g2_error: e2 })
}

/// CSV rows `phi,xi,re,im` of the kernel on a square grid, skipping the pole zone.
pub fn kernel_csv(beta: f64, grid: usize) -> Result<String> {
    use std::fmt::Write as _;
    let p = ThetaParams::from_beta(beta)?;
    let step = 2.0 * PI / grid as f64;
    let mut s = String::from("phi,xi,re,im\n");
    for i in 0..grid {
        for j in 0..grid {
            let (phi, xi) = (i as f64 * step, j as f64 * step);
            if let Ok(k) = szego_kernel(phi, xi, &p, 5.0 * step) {
                let _ = writeln!(s, "{phi:.17e},{xi:.17e},{:.17e},{:.17e}", k.re, k.im);
            }
        }
    }
    Ok(s)
}
