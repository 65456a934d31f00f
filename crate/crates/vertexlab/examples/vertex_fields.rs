//! Implementers of blip loops: vacuum overlaps and smeared charged fields.

use vertexlab::fock::{FockBasisState, FockVector, TruncationSpec};
use vertexlab::vertex::{car_residual, implementer_matrix_element, smeared_field, Charge, ImplementerSpec};

fn main() -> vertexlab::error::Result<()> {
    let l = 2.0 * std::f64::consts::PI;
    let x = ImplementerSpec::blip(l, 0.7, 0.1, 1)?;
    let vac = FockBasisState::vacuum();
    for ket in [vac.clone(), FockBasisState::new(vec![1], 0)] {
        let bra = FockBasisState::sector(1);
        println!("⟨{bra:?}| X |{ket:?}⟩ = {:.6}", implementer_matrix_element(&x, &bra, &ket));
    }
    let rows = TruncationSpec::new(8, -1, 1)?;
    let cols = TruncationSpec::single(0);
    for j in -2..=2 {
        let v = smeared_field(l, Charge::Plus, j, 0.2, &rows, &cols, 256)?.apply(&FockVector::vacuum());
        println!("‖φ¹(e_{j})Ω‖ = {:.6}", v.norm_sqr().sqrt());
    }
    let trunc = TruncationSpec::single(5);
    for eps in [l, 0.5 * l, 0.2 * l] {
        let (d1, d2) = car_residual(l, 0, 0, eps, &trunc, 2)?;
        println!("ε = {eps:.3}: CAR defects {d1:.3e}, {d2:.3e}");
    }
    Ok(())
}
