//! W-infinity generators: boson formulas against the fermion picture.

use vertexlab::fock::{enumerate_basis, TruncationSpec};
use vertexlab::scalar::QC;
use vertexlab::walgebra::{check_winfty_bracket, kronig_crosscheck, w_boson};

fn main() -> vertexlab::error::Result<()> {
    let spec = TruncationSpec::new(5, -1, 1)?;
    for s in 1..=3 {
        for p in [-2, 0, 2] {
            let r = kronig_crosscheck::<QC>(s, p, &spec, true)?;
            println!("s={s} p={p:+}: boson vs fermion max discrepancy {}", r.residual);
        }
    }
    let r = kronig_crosscheck::<QC>(3, 0, &spec, false)?;
    println!("spin 3 without counterterm: {}", r.residual);
    let kets = enumerate_basis(&TruncationSpec::new(3, -1, 1)?);
    for rep in check_winfty_bracket::<QC>(2, -1, 3, &kets, &|s, n, b| w_boson::<QC>(s, n, b))? {
        println!("bracket (2,−1) order {}: residual {}", rep.order, rep.residual);
    }
    Ok(())
}
