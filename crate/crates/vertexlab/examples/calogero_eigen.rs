//! Calogero–Sutherland eigenfunctions built from anyon correlators.

use vertexlab::calogero::*;

fn main() -> vertexlab::error::Result<()> {
    let l = 2.0 * std::f64::consts::PI;
    for (n, nu) in [(2, 1.5), (3, 2.0)] {
        let cfg = CSConfig::new(n, nu, l)?;
        let g = eigenfunction_from_recipe(&EigenRecipe::ground(), &cfg, 1e-6)?;
        println!("N={n} ν={nu}: ground E = {:.10} (closed {:.10}), residual {:.1e}", g.e, groundstate_energy(&cfg), g.residual);
    }
    let cfg = CSConfig::new(2, 2.0, l)?;
    for p in 1..=3 {
        let r = EigenRecipe::new(vec![p], 2)?;
        let rep = eigenfunction_from_recipe(&r, &cfg, 1e-5)?;
        let rq = rayleigh_quotient_pair(&|x| eigenfunction_value(&r, x, &cfg, 24).unwrap(), &cfg, 16)?;
        println!("N=2 ν=2 recipe [{p}]: E = {:.8}, Rayleigh quotient {:.8}, ratio spread {:.1e}", rep.e, rq, rep.ratio_stdev);
    }
    // several momenta: the bare coefficient mixes with dominating recipes
    let cfg = CSConfig::new(3, 1.5, l)?;
    for mom in [vec![1, 1], vec![2, 1, 0]] {
        let r = EigenRecipe::new(mom.clone(), 3)?;
        let ef = RecipeEigenfunction::new(&r, &cfg)?;
        let rep = eigenfunction_from_recipe(&r, &cfg, 1e-5)?;
        println!("N=3 ν=1.5 recipe {mom:?}: {} closure members, E = {:.8}, residual {:.1e}", ef.members.len(), rep.e, rep.residual);
    }
    Ok(())
}
