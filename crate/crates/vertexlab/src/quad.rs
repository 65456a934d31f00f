//! Quadrature rules: Gauss–Legendre for smooth non-periodic integrands,
//! trapezoid for periodic ones.

use crate::scalar::C64;
use gauss_quad::legendre::GaussLegendre;

pub struct Legendre {
    rule: GaussLegendre,
}

impl Legendre {
    pub fn new(points: usize) -> Self {
        Self { rule: GaussLegendre::new(points.max(2)).expect("degree >= 2") }
    }

    pub fn integrate_c(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> C64) -> C64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in self.rule.nodes().zip(self.rule.weights()) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_panels(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> C64) -> C64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|j| self.integrate_c(a + j as f64 * h, a + (j + 1) as f64 * h, &mut f))
            .sum()
    }
}

/// Trapezoid rule for a `period`-periodic integrand on `n` equispaced points.
pub fn trapezoid_periodic(start: f64, period: f64, n: usize, mut f: impl FnMut(f64) -> C64) -> C64 {
    let h = period / n as f64;
    let s: C64 = (0..n).map(|j| f(start + j as f64 * h)).sum();
    s * h
}
