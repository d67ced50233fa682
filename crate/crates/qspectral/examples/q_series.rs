//! q-Pochhammer products, the theta function and a ₂φ₁ series, with the
//! truncation bookkeeping each evaluation carries.

use qspectral::qcore::{phi_series, qpoch_finite, qpoch_infinite, theta};
use qspectral::{Complex, QBase};

fn main() -> qspectral::Result<()> {
    let q = QBase::new(0.5)?;
    let half = Complex::new(0.5, 0.0);

    let p = qpoch_infinite(half, q);
    println!("(0.5; 0.5)_inf = {:.15}  (est. error {:.1e}, {} factors)", p.value.re, p.abs_error_estimate, p.terms_used);
    println!("(0.5; 0.5)_5   = {:.15}", qpoch_finite(half, q, 5).re);

    // θ(qz) = −θ(z)/z
    let z = Complex::new(0.7, 0.4);
    let lhs = theta(q.get() * z, q)?;
    let rhs = -theta(z, q)? / z;
    println!("theta(qz) = {lhs:.12}, -theta(z)/z = {rhs:.12}");

    // a terminating series: the first numerator parameter is q^{-3}
    let numer = [Complex::new(q.pow(-3), 0.0), Complex::new(0.3, 0.1)];
    let denom = [Complex::new(0.6, 0.0)];
    let s = phi_series(&numer, &denom, q, Complex::new(2.5, 0.0))?;
    println!("terminating 2phi1 = {:.12} after {} terms (terminated: {})", s.value, s.terms_used, s.terminated);

    match phi_series(&[half, half], &[half], q, Complex::new(1.2, 0.0)) {
        Err(e) => println!("non-terminating with |z| > 1 is refused: {e}"),
        Ok(v) => println!("unexpected value {}", v.value),
    }
    Ok(())
}
