//! Two-group correlator identity for the elliptic Hamiltonian along a regulator ladder.

use vertexlab::calogero::*;

fn main() -> vertexlab::error::Result<()> {
    let l = 2.0 * std::f64::consts::PI;
    let samples: Vec<IdentitySample> = (0..3)
        .map(|s| (vec![-2.6 + 0.13 * s as f64, -1.7 + 0.13 * s as f64], vec![-0.9 + 0.31 * s as f64, 0.5 + 0.31 * s as f64]))
        .collect();
    let cfg = CSConfig::new(2, 1.5, l)?.with_nome(0.3)?;
    for (e, r) in elliptic_identity_ladder(&cfg, &samples, &[0.1, 0.05, 0.025, 0.0125])? {
        let c = cfg.with_regulators(e, e)?;
        let cross = identity_residual_with(&c, &samples, IdentityRegulators::CrossOnly)?;
        println!("ε = {e:<7} residual {r:.4e}   cross-only regulators {cross:.4e}");
    }
    Ok(())
}
