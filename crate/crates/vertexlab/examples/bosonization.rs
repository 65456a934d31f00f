//! Boson Fock states inside the fermion wedge: ρ̂(n) images agree exactly.

use vertexlab::fermion_oracle::{boson_basis_in_wedge, rho_fermion, MomentumWindow};
use vertexlab::fock::{apply_rho, enumerate_basis, FockVector, TruncationSpec};
use vertexlab::scalar::QC;
use vertexlab::walgebra::boson_vector_in_wedge;

fn main() -> vertexlab::error::Result<()> {
    let spec = TruncationSpec::new(4, -1, 1)?;
    let window = MomentumWindow::from_kmax(10.5)?;
    let mut checked = 0;
    for b in enumerate_basis(&spec) {
        let wedge = boson_basis_in_wedge::<QC>(&window, &b)?;
        for n in -3..=3 {
            let boson = boson_vector_in_wedge(&window, &apply_rho(n, &FockVector::<QC>::basis(b.clone())))?;
            assert_eq!(boson, rho_fermion(&window, n, &wedge).v);
            checked += 1;
        }
    }
    println!("{} basis states, {checked} current images, all equal in exact arithmetic", enumerate_basis(&spec).len());
    Ok(())
}
