//! Independent reference machinery: dense solves on finite sections of the
//! operator and double-double (about 32 digit) evaluation of the basic series.
//!
//! The reference values in `tests/fixtures/oracle.json` come from a separate
//! arbitrary-precision script; this module reproduces them to ~1e-30 and the
//! `f64` code paths are checked against both.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex as NumComplex;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::jacobi::{JacobiOperator, L2Vector};
use crate::eigenfunctions::SpectralParam;
use crate::qcore::{phi_series, qpoch_inf, qpoch_infinite, theta, Complex, QBase};
use crate::transforms::{q_exponential, QExponentialParams};

/// Complex double-double.
pub type DdComplex = NumComplex<TwoFloat>;

/// Section `[−N, N]` of the operator with zero coupling outside the window.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    half_width: i32,
    /// `½ a_k` for `k = −N..N−1`.
    off: Vec<f64>,
}

/// Sorted eigenvalues and the matching orthonormal eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct TruncatedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl TruncatedOperator {
    pub fn new(op: &JacobiOperator, half_width: i32) -> Result<Self> {
        if !(1..=400).contains(&half_width) {
            return Err(Error::DomainViolation(format!("half width {half_width} outside 1..=400")));
        }
        let off = (-half_width..half_width).map(|k| 0.5 * op.coeff_a(k)).collect();
        Ok(TruncatedOperator { half_width, off })
    }

    pub fn half_width(&self) -> i32 {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        self.off.len() + 1
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, &b) in self.off.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        m
    }

    /// Full eigendecomposition of the (dense) section.
    pub fn eigen(&self) -> Result<TruncatedEigen> {
        let eig = SymmetricEigen::try_new(self.matrix(), 1e-15, 10_000)
            .ok_or(Error::ConvergenceFailure)?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(TruncatedEigen { values, vectors })
    }

    /// Number of eigenvalues below `x`, from the signs of the LDLᵀ pivots of `T − x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = -x;
        if d < 0.0 {
            count += 1;
        }
        for &b in &self.off {
            let prev = if d == 0.0 { f64::EPSILON * b.abs().max(1.0) } else { d };
            d = -x - b * (b / prev);
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue by bisection on [`Self::count_below`].
    pub fn eigenvalue_bisect(&self, k: usize) -> f64 {
        let bound = 2.0 * self.off.iter().fold(0.0f64, |m, b| m.max(b.abs())) + 1.0;
        self.bisect_in(k, -bound, bound)
    }

    /// All eigenvalues in `[lo, hi)`, each refined to a few ulps by bisection.
    /// Unlike the dense solver this keeps relative accuracy for small eigenvalues
    /// even though the couplings grow like `q^{−N}`.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        (self.count_below(lo)..self.count_below(hi)).map(|k| self.bisect_in(k, lo, hi)).collect()
    }

    fn bisect_in(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..2200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * mid.abs() {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(z − T) x = ξ` by tridiagonal elimination with partial pivoting
    /// (row swaps fill one extra superdiagonal); `ξ` is restricted to the window.
    /// Pivoting matters: the couplings grow geometrically toward one end.
    pub fn resolve(&self, z: Complex, xi: &L2Vector) -> Result<L2Vector> {
        if z.im == 0.0 {
            return Err(Error::DomainViolation(format!("resolve needs non-real z, got {z}")));
        }
        let n = self.dim();
        let lo = -self.half_width;
        let zero = Complex::new(0.0, 0.0);
        let mut b: Vec<Complex> = (0..n).map(|i| xi.get(lo + i as i32)).collect();
        let mut d = vec![z; n];
        let mut du: Vec<Complex> = self.off.iter().map(|&v| Complex::new(-v, 0.0)).collect();
        // Below the diagonal on entry; the second superdiagonal after elimination.
        let mut dl = du.clone();
        for i in 0..n - 1 {
            if d[i].norm() >= dl[i].norm() {
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] = b[i + 1] - fact * b[i];
                dl[i] = zero;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                }
                du[i] = temp;
                let bi = b[i];
                b[i] = b[i + 1];
                b[i + 1] = bi - fact * b[i + 1];
            }
        }
        if d.iter().any(|v| v.norm() == 0.0) {
            return Err(Error::ConvergenceFailure);
        }
        b[n - 1] /= d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
        }
        Ok(L2Vector::new(lo, b))
    }

    /// Componentwise backward error of a solve: the largest
    /// `|((z − T)x − ξ)_k| / (|z x_k| + |(Tx)_k| terms + |ξ_k|)`. The couplings reach
    /// `q^{−N}`, so rows where two large terms cancel carry an absolute residual of
    /// rounding size times those terms, which a plain norm would misread.
    pub fn resolve_residual(&self, z: Complex, x: &L2Vector, xi: &L2Vector) -> f64 {
        let lo = -self.half_width;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let k = lo + i as i32;
            let left = if i > 0 { self.off[i - 1] * x.get(k - 1) } else { Complex::new(0.0, 0.0) };
            let right = if i + 1 < n { self.off[i] * x.get(k + 1) } else { Complex::new(0.0, 0.0) };
            let diag = z * x.get(k);
            let r = diag - left - right - xi.get(k);
            let scale = diag.norm() + left.norm() + right.norm() + xi.get(k).norm();
            if scale > 0.0 {
                worst = worst.max(r.norm() / scale);
            }
        }
        worst
    }
}

/// Largest `|(R(z)ξ)_k − x_k|` over `|k| ≤ N/2`, where `x` solves the section at
/// half width `N` and `R(z)` is the Green-kernel resolvent of the `θ = 0` extension.
/// Returns the difference relative to `max |x_k|` on that range.
pub fn green_cross_check(op: &JacobiOperator, half_width: i32, z: Complex, xi: &L2Vector) -> Result<f64> {
    let trunc = TruncatedOperator::new(op, half_width)?;
    let x = trunc.resolve(z, xi)?;
    let inner = half_width / 2;
    let ext = op.extension(0.0);
    // The Green kernel represents (z − L)^{-1}, the same operator the section solves.
    let r = op.resolvent_apply(&ext, z, xi, -inner, inner)?;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in -inner..=inner {
        diff = diff.max((r.get(k) - x.get(k)).norm());
        scale = scale.max(x.get(k).norm());
    }
    Ok(diff / scale)
}

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

fn ddc(z: Complex) -> DdComplex {
    DdComplex::new(dd(z.re), dd(z.im))
}

fn dd_norm_sqr(z: DdComplex) -> TwoFloat {
    z.re * z.re + z.im * z.im
}

/// `a / b` to full double-double accuracy. The crate's own `TwoFloat / TwoFloat`
/// drops the low word when `b` is a plain double (its residual is formed without a
/// fused multiply-add), so the quotient is corrected twice against `a − b q`.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let mut q = dd(a.hi() / b.hi());
    for _ in 0..2 {
        let r = a - b * q;
        q = q + dd(r.hi() / b.hi());
    }
    q
}

fn dd_cdiv(a: DdComplex, b: DdComplex) -> DdComplex {
    let n = dd_norm_sqr(b);
    let num = a * b.conj();
    DdComplex::new(dd_div(num.re, n), dd_div(num.im, n))
}

fn dd_one() -> DdComplex {
    DdComplex::new(dd(1.0), dd(0.0))
}

/// Complex square root: an `f64` seed refined by two Newton steps in double-double.
fn dd_csqrt(w: DdComplex) -> DdComplex {
    let seed = Complex::new(w.re.hi(), w.im.hi()).sqrt();
    let mut s = ddc(seed);
    if seed.norm() == 0.0 {
        return s;
    }
    for _ in 0..2 {
        s = (s + dd_cdiv(w, s)) * dd(0.5);
    }
    s
}

const DD_TOL: f64 = 1e-34;

/// `(a; q)_∞` in double-double.
pub fn qpoch_infinite_dd(a: DdComplex, q: TwoFloat) -> DdComplex {
    let mut prod = dd_one();
    let mut term = a;
    for _ in 0..100_000 {
        if dd_norm_sqr(term).hi() < DD_TOL * DD_TOL {
            break;
        }
        prod = prod * (dd_one() - term);
        term = term * q;
    }
    prod
}

/// `θ(z; q) = (z, q/z; q)_∞` in double-double.
pub fn theta_dd(z: DdComplex, q: TwoFloat) -> DdComplex {
    qpoch_infinite_dd(z, q) * qpoch_infinite_dd(dd_cdiv(DdComplex::new(q, dd(0.0)), z), q)
}

/// `r+1φr(numer; denom; q, z)` in double-double, for `|z| < 1`.
pub fn phi_series_dd(numer: &[DdComplex], denom: &[DdComplex], q: TwoFloat, z: DdComplex) -> Result<DdComplex> {
    if numer.len() != denom.len() + 1 {
        return Err(Error::DomainViolation("expected r+1 numerator and r denominator parameters".into()));
    }
    if dd_norm_sqr(z).hi() >= 1.0 {
        return Err(Error::DivergentArgument(dd_norm_sqr(z).hi().sqrt()));
    }
    let mut sum = dd_one();
    let mut term = dd_one();
    let mut qn = dd(1.0);
    let mut small_run = 0;
    for _ in 0..1_000_000 {
        let mut ratio = dd_cdiv(z, dd_one() - DdComplex::new(qn * q, dd(0.0)));
        for &a in numer {
            ratio = ratio * (dd_one() - a * qn);
        }
        for &b in denom {
            let f = dd_one() - b * qn;
            if dd_norm_sqr(f).hi() == 0.0 {
                return Err(Error::PoleInDenominator(0));
            }
            ratio = dd_cdiv(ratio, f);
        }
        term = term * ratio;
        sum = sum + term;
        qn = qn * q;
        if dd_norm_sqr(term).hi() < DD_TOL * DD_TOL * dd_norm_sqr(sum).hi() {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence("double-double series did not settle".into()))
}

/// `ℰ_q(z; t)` in double-double, `|t| < 1`.
pub fn q_exponential_dd(q: f64, z: Complex, t: Complex) -> Result<DdComplex> {
    if t.norm() >= 1.0 {
        return Err(Error::DomainViolation(format!("double-double q-exponential needs |t| < 1, got {}", t.norm())));
    }
    let qd = dd(q);
    let z = ddc(z);
    let t = ddc(t);
    let mut y = z - dd_csqrt(z * z - dd_one());
    if dd_norm_sqr(y).hi() > 1.0 {
        y = dd_cdiv(dd_one(), y);
    }
    let half = qd.sqrt();
    let quarter = half.sqrt();
    let pre = dd_cdiv(qpoch_infinite_dd(-t, half), qpoch_infinite_dd(t * t * qd, qd * qd));
    let q4 = DdComplex::new(quarter, dd(0.0));
    let series = phi_series_dd(&[q4 * y, dd_cdiv(q4, y)], &[DdComplex::new(-half, dd(0.0))], half, -t)?;
    Ok(pre * series)
}

/// Decimal rendering of a double-double with `digits` significant digits.
pub fn dd_to_decimal(x: TwoFloat, digits: usize) -> String {
    if x.hi() == 0.0 {
        return "0.0".into();
    }
    let neg = x.hi() < 0.0;
    let mut v = if neg { -x } else { x };
    let mut exp = v.hi().log10().floor() as i32;
    v = scale10(v, -exp);
    if v.hi() >= 10.0 {
        v = v / 10.0;
        exp += 1;
    } else if v.hi() < 1.0 {
        v = v * dd(10.0);
        exp -= 1;
    }
    let mut ds = Vec::with_capacity(digits + 1);
    for _ in 0..=digits {
        let d = v.hi().floor().clamp(0.0, 9.0);
        ds.push(d as u8);
        v = (v - dd(d)) * dd(10.0);
    }
    // Round on the guard digit.
    let round_up = ds.pop().is_some_and(|g| g >= 5);
    if round_up {
        let mut i = ds.len();
        loop {
            if i == 0 {
                ds.insert(0, 1);
                exp += 1;
                ds.pop();
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    let mantissa: String = ds.iter().map(|d| char::from(b'0' + d)).collect();
    format!("{}{}.{}e{}", if neg { "-" } else { "" }, &mantissa[..1], &mantissa[1..], exp)
}

fn scale10(v: TwoFloat, e: i32) -> TwoFloat {
    let ten = dd(10.0);
    if e >= 0 {
        v * ten.powi(e)
    } else {
        dd_div(v, ten.powi(-e))
    }
}

/// Parses a decimal string (as written by the fixture script) into a double-double.
pub fn parse_decimal(s: &str) -> Result<TwoFloat> {
    let bad = || Error::DomainViolation(format!("malformed decimal {s:?}"));
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let mut acc = dd(0.0);
    for ch in int_part.chars().chain(frac_part.chars()) {
        let d = ch.to_digit(10).ok_or_else(bad)?;
        acc = acc * dd(10.0) + dd(d as f64);
    }
    let v = scale10(acc, exp - frac_part.len() as i32);
    Ok(if neg { -v } else { v })
}

/// Expression families with an independent reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", content = "params", rename_all = "snake_case")]
pub enum OracleExpr {
    QpochInfinite { q: f64, a: [f64; 2] },
    Theta { q: f64, z: [f64; 2] },
    PhiSeries { q: f64, numer: Vec<[f64; 2]>, denom: Vec<[f64; 2]>, z: [f64; 2] },
    QExponential { q: f64, z: [f64; 2], t: [f64; 2] },
}

/// One stored reference value; the strings keep every digit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    #[serde(flatten)]
    pub expr: OracleExpr,
    pub value_re: String,
    pub value_im: String,
    pub digits: u32,
}

impl Fixture {
    pub fn value(&self) -> Result<DdComplex> {
        Ok(DdComplex::new(parse_decimal(&self.value_re)?, parse_decimal(&self.value_im)?))
    }
}

pub fn load_fixtures(json: &str) -> Result<Vec<Fixture>> {
    serde_json::from_str(json).map_err(|e| Error::DomainViolation(format!("fixture file: {e}")))
}

fn pair(p: [f64; 2]) -> Complex {
    Complex::new(p[0], p[1])
}

/// Double-double evaluation of an expression.
pub fn highprec_eval(expr: &OracleExpr) -> Result<DdComplex> {
    match expr {
        OracleExpr::QpochInfinite { q, a } => Ok(qpoch_infinite_dd(ddc(pair(*a)), dd(*q))),
        OracleExpr::Theta { q, z } => Ok(theta_dd(ddc(pair(*z)), dd(*q))),
        OracleExpr::PhiSeries { q, numer, denom, z } => {
            let n: Vec<DdComplex> = numer.iter().map(|&p| ddc(pair(p))).collect();
            let d: Vec<DdComplex> = denom.iter().map(|&p| ddc(pair(p))).collect();
            phi_series_dd(&n, &d, dd(*q), ddc(pair(*z)))
        }
        OracleExpr::QExponential { q, z, t } => q_exponential_dd(*q, pair(*z), pair(*t)),
    }
}

/// Fixture-style record for a freshly evaluated expression.
pub fn stamp(expr: &OracleExpr, digits: usize) -> Result<Fixture> {
    let v = highprec_eval(expr)?;
    Ok(Fixture {
        expr: expr.clone(),
        value_re: dd_to_decimal(v.re, digits),
        value_im: dd_to_decimal(v.im, digits),
        digits: digits.min(30) as u32,
    })
}

/// The `f64` library value together with the error it claims for itself.
pub fn main_path_eval(expr: &OracleExpr) -> Result<(Complex, f64)> {
    match expr {
        OracleExpr::QpochInfinite { q, a } => {
            let s = qpoch_infinite(pair(*a), QBase::new(*q)?);
            Ok((s.value, s.abs_error_estimate))
        }
        OracleExpr::Theta { q, z } => {
            let v = theta(pair(*z), QBase::new(*q)?)?;
            Ok((v, 64.0 * f64::EPSILON * v.norm()))
        }
        OracleExpr::PhiSeries { q, numer, denom, z } => {
            let n: Vec<Complex> = numer.iter().map(|&p| pair(p)).collect();
            let d: Vec<Complex> = denom.iter().map(|&p| pair(p)).collect();
            let s = phi_series(&n, &d, QBase::new(*q)?, pair(*z))?;
            Ok((s.value, s.abs_error_estimate))
        }
        OracleExpr::QExponential { q, z, t } => {
            let qb = QBase::new(*q)?;
            let (z, t) = (pair(*z), pair(*t));
            let v = q_exponential(QExponentialParams { q: qb, z, t })?;
            // The error claim comes from the ₂φ₁ behind it, scaled by the prefactor.
            let half = qb.sqrt();
            let q4 = Complex::new(qb.get().powf(0.25), 0.0);
            let y = SpectralParam::from_z(z).y();
            let pre = qpoch_inf(-t, half) / qpoch_inf(qb.get() * t * t, qb.squared());
            let s = phi_series(&[q4 * y, q4 / y], &[Complex::new(-half.get(), 0.0)], half, -t)?;
            Ok((v, pre.norm() * s.abs_error_estimate + 16.0 * f64::EPSILON * v.norm()))
        }
    }
}

/// `|main − oracle|` and the bound the main path declared.
pub fn compare_with_main(expr: &OracleExpr) -> Result<(f64, f64)> {
    let (v, bound) = main_path_eval(expr)?;
    let r = highprec_eval(expr)?;
    let diff = Complex::new((dd(v.re) - r.re).hi(), (dd(v.im) - r.im).hi()).norm();
    Ok((diff, bound))
}

/// Relative distance between two double-double values, itself in `f64`.
pub fn dd_rel_diff(a: DdComplex, b: DdComplex) -> f64 {
    let d = a - b;
    (dd_norm_sqr(d).hi() / dd_norm_sqr(b).hi().max(f64::MIN_POSITIVE)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        let x = dd_div(dd(1.0), dd(3.0));
        let s = dd_to_decimal(x, 31);
        assert!(s.starts_with("3.333333333333333333333333333333e-1"), "{s}");
        let back = parse_decimal(&s).unwrap();
        assert!((back - x).hi().abs() < 1e-31);
        assert_eq!(dd_to_decimal(dd(-2.5), 3), "-2.50e0");
        assert_eq!(dd_to_decimal(dd(9.9999), 2), "1.0e1");
    }

    #[test]
    fn sturm_count_matches_bisection_ends() {
        let t = TruncatedOperator { half_width: 1, off: vec![0.5, 0.5] };
        // eigenvalues of [[0,.5,0],[.5,0,.5],[0,.5,0]] are 0, ±1/√2.
        assert_eq!(t.count_below(0.0), 1);
        assert!((t.eigenvalue_bisect(2) - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(t.eigenvalue_bisect(1).abs() < 1e-14);
    }
}
