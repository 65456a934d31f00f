//! Anyon vacuum correlators: closed product formula against the operator chain.

use vertexlab::loopspace::{blip_cutoff, BlipParams};
use vertexlab::vertex::*;

fn main() -> vertexlab::error::Result<()> {
    let l = 2.0 * std::f64::consts::PI;
    let eps = 0.1;
    let config = [(1.0, -2.0), (-1.0, -0.5), (1.0, 0.9), (-1.0, 2.3)];
    let ins: Vec<FieldInsertion> = config.iter().map(|&(nu, y)| FieldInsertion { nu, y, eps }).collect();
    let specs: Vec<ImplementerSpec> = config
        .iter()
        .map(|&(nu, y)| ImplementerSpec::anyon(l, BlipParams { y, eps, nu, nu0: 1.0 }))
        .collect::<Result<_, _>>()?;
    let closed = anyon_correlator(l, &ins, 0.0)?;
    let lam = (-2.0 * std::f64::consts::PI * 2.0 * eps / l).exp();
    let chain = vacuum_chain_mode_truncated(&specs, ModeTruncation { nmax: blip_cutoff(lam, 1e-14) as usize, occupation_cap: 12 });
    println!("closed form   {closed:.12}");
    println!("mode chain    {chain:.12}");
    println!("relative diff {:.1e}", (chain - closed).norm() / closed.norm());
    let a = ImplementerSpec::anyon(l, BlipParams { y: 0.4, eps: 0.05, nu: 0.5, nu0: 0.5 })?;
    let b = ImplementerSpec::anyon(l, BlipParams { y: -1.0, eps: 0.05, nu: 0.5, nu0: 0.5 })?;
    println!("exchange ratio {:.12}", exchange_ratio(&a, &b)?);
    println!("closed phase   {:.12}", exchange_phase_closed(l, 0.5, 0.4, 0.05, 0.5, -1.0, 0.05)?);
    Ok(())
}
