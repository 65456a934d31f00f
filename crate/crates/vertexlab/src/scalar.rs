//! Scalar fields shared by the exact and floating-point code paths.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex<f64>;
pub type QC = Complex<BigRational>;

/// Complex scalar used for Fock-space amplitudes.
///
/// `QC` gives exact Gaussian-rational arithmetic; `C64` is the fast path.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
    fn imag_unit() -> Self;
    fn conj(&self) -> Self;
    fn abs2(&self) -> f64;
    fn to_c64(&self) -> C64;
    /// Division by a nonzero rational.
    fn div_ratio(&self, num: i64, den: i64) -> Self;
    fn scale_int(&self, n: i64) -> Self {
        self.clone() * Self::from_int(n)
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;
    fn from_ratio(num: i64, den: i64) -> Self {
        C64::new(num as f64 / den as f64, 0.0)
    }
    fn imag_unit() -> Self {
        C64::new(0.0, 1.0)
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn abs2(&self) -> f64 {
        self.norm_sqr()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn div_ratio(&self, num: i64, den: i64) -> Self {
        *self * (den as f64 / num as f64)
    }
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Scalar for QC {
    const EXACT: bool = true;
    fn from_ratio(num: i64, den: i64) -> Self {
        QC::new(ratio(num, den), BigRational::zero())
    }
    fn imag_unit() -> Self {
        QC::new(BigRational::zero(), BigRational::one())
    }
    fn conj(&self) -> Self {
        QC::new(self.re.clone(), -self.im.clone())
    }
    fn abs2(&self) -> f64 {
        let n = &self.re * &self.re + &self.im * &self.im;
        n.to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn div_ratio(&self, num: i64, den: i64) -> Self {
        let r = ratio(den, num);
        QC::new(&self.re * &r, &self.im * &r)
    }
}

/// `i^k` for any integer `k`.
pub fn i_pow<S: Scalar>(k: i64) -> S {
    match k.rem_euclid(4) {
        0 => S::one(),
        1 => S::imag_unit(),
        2 => -S::one(),
        _ => -S::imag_unit(),
    }
}

pub fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

pub fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as i64;
    let n = n as i64;
    (0..k).fold(1i64, |acc, j| acc * (n - j) / (j + 1))
}

/// Exact rational from an f64 that is known to be a short dyadic or decimal value.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
