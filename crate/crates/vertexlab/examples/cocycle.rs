//! Schwinger cocycle of two smooth loops, by modes and by quadrature.

use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use vertexlab::loopspace::{cocycle_s, cocycle_s_integral, LoopFunction};

fn real_loop(l: f64, w: f64, coeffs: &[(f64, f64)]) -> LoopFunction {
    let mut modes = BTreeMap::new();
    for (k, &(re, im)) in coeffs.iter().enumerate() {
        let n = k as i64 + 1;
        modes.insert(n, C64::new(re, im));
        modes.insert(-n, C64::new(re, -im));
    }
    LoopFunction { l, winding: w, mean: C64::new(0.3, 0.0), modes, nu0: None }
}

fn main() {
    let l = 2.0 * std::f64::consts::PI;
    let f = real_loop(l, 1.0, &[(0.4, 0.1), (-0.2, 0.3)]);
    let g = real_loop(l, -2.0, &[(0.1, -0.5), (0.25, 0.0), (0.05, 0.05)]);
    let h = real_loop(l, 0.0, &[(0.3, 0.2)]);
    let s = cocycle_s(&f, &g);
    println!("S(f,g) by modes      = {s:.15}");
    println!("S(f,g) by quadrature = {:.15}", cocycle_s_integral(&f, &g, 32, 16));
    println!("S(g,f)               = {:.15}", cocycle_s(&g, &f));
    let lhs = cocycle_s(&f, &g) + cocycle_s(&f.add(&g), &h);
    let rhs = cocycle_s(&f, &g.add(&h)) + cocycle_s(&g, &h);
    println!("cocycle identity residual = {:.1e}", (lhs - rhs).norm());
}
