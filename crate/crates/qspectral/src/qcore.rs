//! q-Pochhammer symbols, the theta function and basic hypergeometric series.
//!
//! Everything here works in `f64`/`Complex64`. Infinite products stop once the
//! running factor is below [`PRODUCT_CUTOFF`]; series stop after three consecutive
//! terms fall below the relative tolerance, and are summed with Neumaier
//! compensation on the real and imaginary parts separately.

use crate::error::{Error, Result};
pub use num_complex::Complex64 as Complex;

/// Products stop once `|a q^i|` drops below this.
pub const PRODUCT_CUTOFF: f64 = 1e-17;
/// Default relative tolerance for series truncation.
pub const SERIES_TOL: f64 = 1e-16;
/// Relative tolerance for deciding that a parameter sits on a lattice `q^n`.
pub const LATTICE_TOL: f64 = 1e-10;

const MAX_TERMS: usize = 200_000;

/// The deformation parameter, always strictly between 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QBase(f64);

impl QBase {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(QBase(q))
        } else {
            Err(Error::InvalidQ(q))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `q^k` for integer `k`.
    #[inline]
    pub fn pow(self, k: i32) -> f64 {
        self.0.powi(k)
    }

    #[inline]
    pub fn powf(self, e: f64) -> f64 {
        self.0.powf(e)
    }

    pub fn squared(self) -> QBase {
        QBase(self.0 * self.0)
    }

    pub fn sqrt(self) -> QBase {
        QBase(self.0.sqrt())
    }
}

/// A series or product value together with its truncation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex,
    pub abs_error_estimate: f64,
    pub terms_used: usize,
    pub terminated: bool,
}

/// Neumaier summation applied componentwise.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, z: Complex) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub(crate) fn value(&self) -> Complex {
        Complex::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// `(a;q)_k`, the empty product being 1.
pub fn qpoch_finite(a: Complex, q: QBase, k: usize) -> Complex {
    let mut prod = Complex::new(1.0, 0.0);
    let mut f = a;
    for _ in 0..k {
        prod *= 1.0 - f;
        f *= q.get();
    }
    prod
}

/// `(a;q)_∞` with a truncation estimate. Never reports `terminated`.
pub fn qpoch_infinite(a: Complex, q: QBase) -> SeriesValue {
    let mut prod = Complex::new(1.0, 0.0);
    let mut f = a;
    let mut n = 0usize;
    while f.norm() >= PRODUCT_CUTOFF {
        prod *= 1.0 - f;
        f *= q.get();
        n += 1;
        if n > MAX_TERMS {
            break;
        }
    }
    let tail = f.norm() / (1.0 - q.get());
    let rounding = 2.0 * (n as f64 + 1.0) * f64::EPSILON;
    SeriesValue {
        value: prod,
        abs_error_estimate: prod.norm() * (tail + rounding),
        terms_used: n,
        terminated: false,
    }
}

/// Shorthand for the value of `(a;q)_∞`.
#[inline]
pub fn qpoch_inf(a: Complex, q: QBase) -> Complex {
    qpoch_infinite(a, q).value
}

/// Length of a Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Length {
    Finite(usize),
    Infinite,
}

/// `(a_1,…,a_r;q)_k`.
pub fn qpoch_multi(args: &[Complex], q: QBase, len: Length) -> Complex {
    args.iter()
        .map(|&a| match len {
            Length::Finite(k) => qpoch_finite(a, q, k),
            Length::Infinite => qpoch_inf(a, q),
        })
        .product()
}

/// Renormalised Jacobi theta function `(z, q/z; q)_∞`.
pub fn theta(z: Complex, q: QBase) -> Result<Complex> {
    if z == Complex::new(0.0, 0.0) {
        return Err(Error::ZeroArgument);
    }
    Ok(qpoch_inf(z, q) * qpoch_inf(q.get() / z, q))
}

/// Product `θ(z_1)⋯θ(z_r)`.
pub fn theta_multi(zs: &[Complex], q: QBase) -> Result<Complex> {
    zs.iter().try_fold(Complex::new(1.0, 0.0), |acc, &z| Ok(acc * theta(z, q)?))
}

/// If `x ≈ q^n` (relative tolerance [`LATTICE_TOL`]) return `n`.
pub fn lattice_exponent(x: Complex, q: QBase) -> Option<i32> {
    let r = x.norm();
    if r == 0.0 || !r.is_finite() {
        return None;
    }
    let n = (r.ln() / q.get().ln()).round();
    if n.abs() > 5000.0 {
        return None;
    }
    let n = n as i32;
    let target = q.get().powi(n);
    if (x - target).norm() <= LATTICE_TOL * target {
        Some(n)
    } else {
        None
    }
}

/// Smallest `m ≥ 0` such that some numerator parameter equals `q^{-m}`.
fn terminating_index(numer: &[Complex], q: QBase) -> Option<usize> {
    numer
        .iter()
        .filter_map(|&a| lattice_exponent(a, q))
        .filter(|&n| n <= 0)
        .map(|n| (-n) as usize)
        .min()
}

/// The `r+1φr` series with the default tolerance.
pub fn phi_series(numer: &[Complex], denom: &[Complex], q: QBase, z: Complex) -> Result<SeriesValue> {
    phi_series_tol(numer, denom, q, z, SERIES_TOL)
}

/// `r+1φr(numer; denom; q, z)`; `numer` must have exactly one more entry than `denom`.
///
/// Stops after three consecutive terms below `tol` times the largest partial-sum
/// magnitude seen so far. Refuses `|z| ≥ 1` unless the series terminates.
pub fn phi_series_tol(
    numer: &[Complex],
    denom: &[Complex],
    q: QBase,
    z: Complex,
    tol: f64,
) -> Result<SeriesValue> {
    if numer.len() != denom.len() + 1 {
        return Err(Error::DomainViolation(format!(
            "expected r+1 numerator and r denominator parameters, got {} and {}",
            numer.len(),
            denom.len()
        )));
    }
    let stop = terminating_index(numer, q);

    for &b in denom {
        if let Some(n) = lattice_exponent(b, q) {
            if n <= 0 {
                let m = (-n) as usize;
                if stop.map_or(true, |s| m < s) {
                    return Err(Error::PoleInDenominator(m + 1));
                }
            }
        }
    }

    if z.norm() == 0.0 {
        return Ok(SeriesValue {
            value: Complex::new(1.0, 0.0),
            abs_error_estimate: 0.0,
            terms_used: 1,
            terminated: stop.is_some(),
        });
    }
    if stop.is_none() && z.norm() >= 1.0 {
        return Err(Error::DivergentArgument(z.norm()));
    }

    let qv = q.get();
    let mut sum = CompensatedSum::default();
    let mut term = Complex::new(1.0, 0.0);
    sum.add(term);
    let mut abs_sum = 1.0;
    let mut max_partial = 1.0f64;
    let mut qn = 1.0;
    let mut n = 0usize;
    let mut small_run = 0;
    let mut last_ratio = z.norm();

    loop {
        if stop == Some(n) {
            break;
        }
        let mut ratio = z / (1.0 - qn * qv);
        for &a in numer {
            ratio *= 1.0 - a * qn;
        }
        for &b in denom {
            ratio /= 1.0 - b * qn;
        }
        last_ratio = ratio.norm();
        term *= ratio;
        n += 1;
        qn *= qv;
        sum.add(term);
        abs_sum += term.norm();
        max_partial = max_partial.max(sum.value().norm());
        if !term.re.is_finite() || !term.im.is_finite() {
            return Err(Error::NonConvergence("series term overflowed".into()));
        }
        if stop.is_none() {
            if term.norm() < tol * max_partial {
                small_run += 1;
            } else {
                small_run = 0;
            }
            if small_run >= 3 {
                break;
            }
        }
        if n > MAX_TERMS {
            return Err(Error::NonConvergence(format!("series not settled after {MAX_TERMS} terms")));
        }
    }

    let value = sum.value();
    let rounding = f64::EPSILON * (4.0 * abs_sum + value.norm());
    let tail = if stop.is_some() {
        0.0
    } else {
        let rho = last_ratio.min(0.999);
        term.norm() * rho / (1.0 - rho)
    };
    Ok(SeriesValue {
        value,
        abs_error_estimate: rounding + tail,
        terms_used: n + 1,
        terminated: stop.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn finite_products() {
        let q = QBase::new(0.5).unwrap();
        assert_eq!(qpoch_finite(c(0.7, 0.0), q, 0), c(1.0, 0.0));
        assert_eq!(qpoch_finite(c(0.0, 0.0), q, 5), c(1.0, 0.0));
        assert!((qpoch_finite(c(0.5, 0.0), q, 3) - c(0.328125, 0.0)).norm() < 1e-16);
        let m = qpoch_multi(&[c(0.5, 0.0), c(-0.5, 0.0)], q, Length::Finite(2));
        assert!((m - c(0.703125, 0.0)).norm() < 1e-16);
        assert_eq!(qpoch_multi(&[], q, Length::Infinite), c(1.0, 0.0));
        let q4 = QBase::new(0.4).unwrap();
        assert_eq!(qpoch_multi(&[c(0.0, 0.0), c(0.0, 0.0)], q4, Length::Infinite), c(1.0, 0.0));
    }

    #[test]
    fn infinite_product_edge_cases() {
        let q = QBase::new(0.3).unwrap();
        assert_eq!(qpoch_inf(c(0.0, 0.0), q), c(1.0, 0.0));
        let h = QBase::new(0.5).unwrap();
        assert_eq!(qpoch_inf(c(1.0, 0.0), h), c(0.0, 0.0));
        assert!(!qpoch_infinite(c(0.5, 0.0), h).terminated);
    }

    #[test]
    fn theta_basics() {
        let q = QBase::new(0.5).unwrap();
        assert_eq!(theta(c(0.0, 0.0), q), Err(Error::ZeroArgument));
        assert_eq!(theta(c(1.0, 0.0), q).unwrap(), c(0.0, 0.0));
        let direct = qpoch_inf(c(-1.0, 0.0), q) * qpoch_inf(c(-0.5, 0.0), q);
        assert!((theta(c(-1.0, 0.0), q).unwrap() - direct).norm() < 1e-15 * direct.norm());
    }

    #[test]
    fn theta_shift_at_one() {
        let q = QBase::new(0.5).unwrap();
        let a = c(0.3, 0.1);
        let lhs = theta(a * 0.5, q).unwrap();
        let rhs = -a.inv() * theta(a, q).unwrap();
        assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
    }

    #[test]
    fn phi_trivial_and_terminating() {
        let q = QBase::new(0.5).unwrap();
        let b = c(0.3, 0.2);
        let cc = c(-0.4, 0.1);
        assert_eq!(phi_series(&[b, cc], &[c(0.1, 0.0)], q, c(0.0, 0.0)).unwrap().value, c(1.0, 0.0));
        let one = phi_series(&[c(1.0, 0.0), b], &[cc], q, c(0.6, 0.2)).unwrap();
        assert!((one.value - c(1.0, 0.0)).norm() < 1e-16);
        assert!(one.terminated);

        // q^{-2} numerator: three terms
        let a = c(4.0, 0.0);
        let z = c(0.7, -1.3);
        let s = phi_series(&[a, b], &[cc], q, z).unwrap();
        let t1 = (1.0 - a) * (1.0 - b) / ((1.0 - cc) * (1.0 - 0.5)) * z;
        let t2 = t1 * (1.0 - a * 0.5) * (1.0 - b * 0.5) / ((1.0 - cc * 0.5) * (1.0 - 0.25)) * z;
        let expect = 1.0 + t1 + t2;
        assert!(s.terminated);
        assert!((s.value - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn phi_errors() {
        let q = QBase::new(0.5).unwrap();
        let e = phi_series(&[c(0.3, 0.0), c(0.2, 0.0)], &[c(0.1, 0.0)], q, c(1.2, 0.0));
        assert!(matches!(e, Err(Error::DivergentArgument(_))));
        let p = phi_series(&[c(0.3, 0.0), c(0.2, 0.0)], &[c(4.0, 0.0)], q, c(0.2, 0.0));
        assert_eq!(p, Err(Error::PoleInDenominator(3)));
        // pole beyond the termination point is harmless
        let ok = phi_series(&[c(2.0, 0.0), c(0.2, 0.0)], &[c(4.0, 0.0)], q, c(0.2, 0.0));
        assert!(ok.is_ok());
        assert!(matches!(
            phi_series(&[c(0.3, 0.0)], &[c(0.1, 0.0)], q, c(0.2, 0.0)),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn qbase_validation() {
        assert!(QBase::new(0.0).is_err());
        assert!(QBase::new(1.0).is_err());
        assert!(QBase::new(f64::NAN).is_err());
        assert!(QBase::new(0.99).is_ok());
    }

    #[test]
    fn lattice_detection() {
        let q = QBase::new(0.5).unwrap();
        assert_eq!(lattice_exponent(c(8.0, 0.0), q), Some(-3));
        assert_eq!(lattice_exponent(c(0.25, 0.0), q), Some(2));
        assert_eq!(lattice_exponent(c(-0.25, 0.0), q), None);
        assert_eq!(lattice_exponent(c(0.26, 0.0), q), None);
    }
}
