//! Szegő kernel Fourier identity and the KMS projection at finite temperature.

use num_complex::Complex64 as C64;
use vertexlab::torus::*;

fn main() -> vertexlab::error::Result<()> {
    for beta in [1.0, 2.0, 4.0] {
        let r = fourier_identity_residual(beta, 400)?;
        println!("β = {beta}: identity residual {:.1e} (tail bound {:.1e})", r.max_residual, r.max_tail);
    }
    let f = vec![(-1, C64::new(0.5, 0.0)), (0, C64::new(0.2, 0.1)), (2, C64::new(-0.3, 0.4))];
    let g = kms_project(&f, &KMSProjectionSpec::new(2.0, 4)?)?;
    for k in 0..g.modes.len() {
        println!("mode {:+}: g₁ = {:.6}, g₂ = {:.6}", g.modes[k], g.g1[k], g.g2[k]);
    }
    let q = quadrature_check(&f, 2.0, &[0.0, 1.0, 2.5])?;
    println!("kernel quadrature vs closed form: g₁ {:.1e}, g₂ {:.1e}", q.g1_error, q.g2_error);
    Ok(())
}
