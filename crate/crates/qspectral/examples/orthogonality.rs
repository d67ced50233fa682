//! Orthogonality of ψ_k against the spectral measure and the inversion round
//! trip, with the mismatched-angle control.

use qspectral::jacobi::{JacobiOperator, L2Vector, Regime};
use qspectral::transforms::{
    mismatched_inversion_error, orthogonality_matrix, reconstruction_error, round_trip, MeasureOptions,
};
use qspectral::{Complex, QBase};

fn main() -> qspectral::Result<()> {
    let opts = MeasureOptions::default();
    let op = JacobiOperator::new(Regime::case2(1.5, -0.4)?, QBase::new(0.5)?)?;
    for theta in [0.3, 1.9] {
        let m = orthogonality_matrix(&op, &op.extension(theta), -4, 4, &opts)?;
        println!("theta = {theta}: max |G - I| = {:.2e} using {} mass points", m.max_deviation(), m.mass_points);
    }

    let xi = L2Vector::new(-3, (0..7).map(|j| Complex::new(0.3 * j as f64 - 0.5, 0.1 * j as f64)).collect());
    let ext = op.extension(0.7);
    let rec = round_trip(&op, &ext, &ext, &xi, -3, 3, &opts)?;
    println!("round trip error: {:.2e}", reconstruction_error(&xi, &rec));
    let bad = mismatched_inversion_error(&op, &op.extension(1.5), &ext, &xi, 10.0, &opts)?;
    println!("inverting with the wrong angle: error {bad:.2e}");
    Ok(())
}
