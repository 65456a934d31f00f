//! Calibration of the second-quantized Calogero–Sutherland operator.

use vertexlab::calogero::{build_h_nu3, calibrate_h_nu3, h_nu3_vacuum_norm, HNu3Form};
use vertexlab::fock::TruncationSpec;
use vertexlab::walgebra::RationalNu;

fn main() -> vertexlab::error::Result<()> {
    let l = 2.0 * std::f64::consts::PI;
    for (a, b) in [(1, 1), (3, 2), (2, 1)] {
        let nu = RationalNu::new(a, b)?;
        for form in [HNu3Form::Literal, HNu3Form::ChargeCorrected] {
            let cal = calibrate_h_nu3(nu, form, 6, (-1, 1), 0.1, l)?;
            let h = build_h_nu3(nu, &cal, &TruncationSpec::new(4, -1, 1)?)?;
            println!(
                "ν={a}/{b} {form:?}: κ = {:.6}, charge coefficient {:.6}, residual {:.1e}, ‖HΩ‖ = {:.1e}",
                cal.kappa, cal.charge_coeff, cal.residual, h_nu3_vacuum_norm(&h)
            );
        }
    }
    Ok(())
}
