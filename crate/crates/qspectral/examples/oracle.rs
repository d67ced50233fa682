//! Independent checks: double-double evaluation against the f64 path, and a
//! truncated matrix against the Green kernel and the located mass points.

use qspectral::jacobi::{JacobiOperator, L2Vector, Regime};
use qspectral::oracle::{compare_with_main, green_cross_check, stamp, OracleExpr, TruncatedOperator};
use qspectral::spectrum::locate_discrete;
use qspectral::{Complex, QBase};

fn main() -> qspectral::Result<()> {
    let exprs = [
        OracleExpr::QpochInfinite { q: 0.5, a: [0.5, 0.0] },
        OracleExpr::Theta { q: 0.3, z: [0.7, -0.2] },
        OracleExpr::QExponential { q: 0.6, z: [1.1, 0.2], t: [0.4, 0.3] },
    ];
    for e in &exprs {
        let f = stamp(e, 30)?;
        let (diff, bound) = compare_with_main(e)?;
        println!("{e:?}\n  double-double {} {}\n  f64 differs by {diff:.1e} (declared {bound:.1e})", f.value_re, f.value_im);
    }

    let op = JacobiOperator::new(Regime::case1(0.0, 0.8)?, QBase::new(0.5)?)?;
    let xi = L2Vector::new(-1, vec![Complex::new(1.0, 0.0), Complex::new(0.5, 0.5)]);
    for n in [8, 32, 200] {
        println!("N = {n:>3}: Green kernel vs section solve at z = 2i: {:.1e}", green_cross_check(&op, n, Complex::new(0.0, 2.0), &xi)?);
    }
    let t = TruncatedOperator::new(&op, 60)?;
    for p in locate_discrete(&op, &op.extension(0.0), 1.05, 30.0)? {
        let near = t.eigenvalues_in(p.x0 - 0.1, p.x0 + 0.1);
        println!("mass point {:.12}  section eigenvalues nearby {near:.12?}", p.x0);
    }
    Ok(())
}
