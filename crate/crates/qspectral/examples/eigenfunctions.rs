//! The solutions u, v and F of the three-term recurrence, their connection
//! formulas and recurrence residuals.

use qspectral::eigenfunctions::{
    c_determinant, f_range, f_via_connection, max_recurrence_residual, u_k, u_range, u_via_connection, EigenParams,
    SpectralParam,
};
use qspectral::{Complex, QBase};

fn main() -> qspectral::Result<()> {
    let q = QBase::new(0.5)?;
    let p = EigenParams::new(Complex::new(0.0, 1.5), Complex::new(-0.4, 0.0), q)?;
    let sp = SpectralParam::from_y(Complex::new(0.3, 0.4))?;
    println!("z = {:.6}, y = {:.6}", sp.z(), sp.y());

    let u = u_range(&p, &sp, -15, 15)?;
    let f = f_range(&p, sp.y(), -15, 15)?;
    println!("recurrence residual over k in [-15, 15]: u {:.1e}, F {:.1e}",
        max_recurrence_residual(&u, -15, &p, sp.z()),
        max_recurrence_residual(&f, -15, &p, sp.z()));

    println!("{:>4} {:>28} {:>28} {:>28}", "k", "u_k", "u_k via c(y)F(y)+c(1/y)F(1/y)", "F_k via d u + d v");
    for k in [-6, -3, 0, 3, 6] {
        let direct = u_k(&p, &sp, k)?;
        let conn = u_via_connection(&p, &sp, k)?;
        let fc = f_via_connection(&p, &sp, k)?;
        println!("{k:>4} {direct:>28.10} {conn:>28.10} {fc:>28.10}");
    }

    let (lhs, rhs) = c_determinant(sp.y(), p.a(), p.t(), q)?;
    println!("c-determinant: {lhs:.12} vs closed form {rhs:.12}");
    Ok(())
}
