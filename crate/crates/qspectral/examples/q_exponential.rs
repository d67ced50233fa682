//! The q-exponential: values, its q → 1 limit and ψ rebuilt from it.

use qspectral::jacobi::{JacobiOperator, Regime};
use qspectral::transforms::{psi_at, psi_exponential_form, q_exponential, q_limit_error, q_limit_grid, QExponentialParams};
use qspectral::{Complex, QBase};

fn main() -> qspectral::Result<()> {
    let z = Complex::new(0.4, 0.0);
    for qv in [0.9, 0.99, 0.999] {
        let q = QBase::new(qv)?;
        let lambda = 2.0;
        let v = q_exponential(QExponentialParams { q, z, t: Complex::new(0.5 * (1.0 - qv) * lambda, 0.0) })?;
        println!("q = {qv:<6} E_q(0.4; (1-q)λ/2), λ = 2: {:.10}   exp(0.8) = {:.10}   grid error {:.2e}",
            v.re, (lambda * z.re).exp(), q_limit_error(q, &q_limit_grid())?);
    }

    let op = JacobiOperator::new(Regime::case1(0.0, 1.7)?, QBase::new(0.5)?)?;
    let ext = op.extension(0.6);
    for k in [-2, 0, 2] {
        let a = psi_exponential_form(&op, &ext, 0.3, k)?;
        let b = psi_at(&op, &ext, 0.3, k, k)?.get(k);
        println!("psi_{k}(0.3): from E_q^2 {a:.12}, from u and v {b:.12}");
    }
    Ok(())
}
