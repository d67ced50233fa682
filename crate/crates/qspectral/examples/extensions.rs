//! The symmetric Jacobi operator, its self-adjoint extensions and the Green
//! kernel resolvent.

use std::f64::consts::PI;

use qspectral::eigenfunctions::SpectralParam;
use qspectral::jacobi::{JacobiOperator, L2Vector, Regime};
use qspectral::{Complex, QBase};

fn main() -> qspectral::Result<()> {
    let q = QBase::new(0.5)?;
    for regime in [Regime::case1(0.4, 3.0)?, Regime::case2(1.5, -0.4)?] {
        let op = JacobiOperator::new(regime, q)?;
        println!("{regime:?}");
        println!("  a_k for k = -2..=2: {:?}", (-2..=2).map(|k| format!("{:.4e}", op.coeff_a(k))).collect::<Vec<_>>());

        let sp = SpectralParam::from_z(Complex::new(0.3, 0.6));
        let u = op.alpha_u(&sp, -10, 10)?;
        let f = op.alpha_f(sp.y(), -10, 10)?;
        println!("  [alpha u, alpha F] at k = -8, 0, 8: {:.10} {:.10} {:.10}",
            op.wronskian(&u, &f, -8)?, op.wronskian(&u, &f, 0)?, op.wronskian(&u, &f, 8)?);

        for theta in [0.0, PI / 4.0, PI / 2.0] {
            let ext = op.extension(theta);
            println!("  theta = {theta:.4}: A = {:.6}, defect residual {:.1e}, boundary Wronskian at N = 60 {:.1e}",
                ext.a(), op.defect_residual(&ext)?, op.boundary_wronskian(&ext, Complex::new(0.3, 0.8), 60)?.norm());
        }

        // (z − L) R(z) ξ = ξ
        let ext = op.extension(0.7);
        let z = Complex::new(0.3, 1.2);
        let xi = L2Vector::new(-1, vec![Complex::new(1.0, 0.0), Complex::new(0.0, -0.5), Complex::new(0.2, 0.0)]);
        let r = op.resolvent_apply(&ext, z, &xi, -3, 3)?;
        let lr = op.apply(&r);
        let defect = (-1..=1).map(|k| (z * r.get(k) - lr.get(k) - xi.get(k)).norm()).fold(0.0, f64::max);
        println!("  resolvent identity defect on supp xi: {defect:.1e}");
    }
    Ok(())
}
