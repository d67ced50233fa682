//! The two-step recurrence, the big q-Jacobi solution `Φ_γ`, the quadratic
//! `₂φ₁ → ₃φ₂` transformation and the q-exponential written as two `₃φ₂` series.
//!
//! The transformation is implemented with `a²` in every right-hand parameter; with
//! a plain `a` the identity does not hold (it already fails at first order in `z`).

use serde::Serialize;

use crate::eigenfunctions::{f_k, u_direct, EigenParams, SpectralParam};
use crate::error::{Error, Result};
use crate::qcore::{phi_series, qpoch_inf, Complex, QBase};
use crate::transforms::{q_exponential, QExponentialParams};

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Coefficients of the recurrence obtained by applying the three-term recurrence
/// twice: `2z f_k = c_k f_{k+1} + d_k f_{k−1}`.
#[derive(Debug, Clone, Copy)]
pub struct IteratedCoeffs {
    a: Complex,
    t: Complex,
    q: QBase,
}

impl IteratedCoeffs {
    pub fn new(p: &EigenParams) -> Self {
        IteratedCoeffs { a: p.a(), t: p.t(), q: p.q() }
    }

    /// `c_k = (1 + a²t q^{k−1})/(a t q^{k−1}) = a + q^{1−k}/(a t)`.
    pub fn iter_c(&self, k: i32) -> Complex {
        self.a + self.q.pow(1 - k) / (self.a * self.t)
    }

    /// `d_k = (1/a)(1 − q^{1−k}/t)`.
    pub fn iter_d(&self, k: i32) -> Complex {
        (1.0 - self.q.pow(1 - k) / self.t) / self.a
    }

    /// The three coefficients of `f_{k+2}`, `f_k`, `f_{k−2}`.
    pub fn two_step(&self, k: i32) -> [Complex; 3] {
        [
            self.iter_c(k) * self.iter_c(k + 1),
            self.iter_c(k) * self.iter_d(k + 1) + self.iter_d(k) * self.iter_c(k - 1),
            self.iter_d(k) * self.iter_d(k - 1),
        ]
    }
}

/// Normalized residual of `(2z)² f_k = c_k c_{k+1} f_{k+2} + (c_k d_{k+1} + d_k c_{k−1}) f_k
/// + d_k d_{k−1} f_{k−2}`, where `f = [f_{k−2}, …, f_{k+2}]`.
pub fn iterated_recurrence_residual(f: &[Complex; 5], coeffs: &IteratedCoeffs, z: Complex, k: i32) -> f64 {
    let [up, mid, down] = coeffs.two_step(k);
    let terms = [4.0 * z * z * f[2], up * f[4], mid * f[2], down * f[0]];
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let r = (terms[0] - terms[1] - terms[2] - terms[3]).norm();
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

/// Largest iterated residual over every interior index of `vals = f_lo, f_lo+1, …`.
/// Both the even and the odd subsequence are covered.
pub fn max_iterated_residual(vals: &[Complex], lo: i32, coeffs: &IteratedCoeffs, z: Complex) -> f64 {
    crate::transforms::nan_max(vals.windows(5).enumerate().map(|(i, w)| {
        let f: [Complex; 5] = w.try_into().expect("window of five");
        iterated_recurrence_residual(&f, coeffs, z, lo + i as i32 + 2)
    }))
}

/// Parameters of `Φ_γ(x q^k; a, b, c; q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigQJacobiParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub x: Complex,
    pub gamma: Complex,
}

impl BigQJacobiParams {
    /// `(a², −1, −q, −t/q)` with `γ = y²`, to be used at base `q²`. The index `k`
    /// of `Φ` then corresponds to `F_{2k}`.
    pub fn even_specialization(p: &EigenParams, y: Complex) -> Self {
        let q = p.q().get();
        BigQJacobiParams { a: p.a() * p.a(), b: c(-1.0), c: c(-q), x: -p.t() / q, gamma: y * y }
    }

    /// Same with `t → qt`, matching `a y F_{2k+1}`.
    pub fn odd_specialization(p: &EigenParams, y: Complex) -> Self {
        BigQJacobiParams { x: -p.t(), ..Self::even_specialization(p, y) }
    }
}

/// `Φ_γ(x q^k; a, b, c; q) = (−q^{1−k}/bcx, −q^{1−k}γ/ax; q)_∞/(−q^{1−k}/abx, −q^{1−k}/acx; q)_∞
/// · (aγ)^{−k} · ₃φ₂(qγ/a, bγ, cγ; −q^{1−k}γ/ax, qγ²; q, −q^{1−k}/bcx)`.
pub fn phi_gamma(params: &BigQJacobiParams, q: QBase, k: i32) -> Result<Complex> {
    let BigQJacobiParams { a, b, c: cc, x, gamma } = *params;
    let s = q.pow(1 - k);
    let den = qpoch_inf(-s / (a * b * x), q) * qpoch_inf(-s / (a * cc * x), q);
    if den.norm() < 1e-300 {
        return Err(Error::SingularParameter(format!("Φ_γ prefactor denominator vanishes at k = {k}")));
    }
    let pre = qpoch_inf(-s / (b * cc * x), q) * qpoch_inf(-s * gamma / (a * x), q) / den * (a * gamma).powi(-k);
    let qv = q.get();
    let series = phi_series(
        &[qv * gamma / a, b * gamma, cc * gamma],
        &[-s * gamma / (a * x), qv * gamma * gamma],
        q,
        -s / (b * cc * x),
    )?;
    Ok(pre * series.value)
}

/// Normalized residual of the big q-Jacobi recurrence at index `k`:
/// `(γ + 1/γ)F(k) = a(1 + q^{−k}/abx)(1 + q^{−k}/acx)F(k+1)
/// − (q^{−k}(1/bx + 1/cx + q/abcx + 1/ax) + q^{−2k}(1+q)/(x²abc))F(k)
/// + (1/a)(1 + q^{1−k}/bcx)(1 + q^{−k}/x)F(k−1)`.
pub fn big_q_jacobi_residual(params: &BigQJacobiParams, q: QBase, k: i32) -> Result<f64> {
    let BigQJacobiParams { a, b, c: cc, x, gamma } = *params;
    let f = [phi_gamma(params, q, k - 1)?, phi_gamma(params, q, k)?, phi_gamma(params, q, k + 1)?];
    let qv = q.get();
    let mk = q.pow(-k);
    let up = a * (1.0 + mk / (a * b * x)) * (1.0 + mk / (a * cc * x));
    let mid = mk * (1.0 / (b * x) + 1.0 / (cc * x) + qv / (a * b * cc * x) + 1.0 / (a * x))
        + mk * mk * (1.0 + qv) / (x * x * a * b * cc);
    let down = (1.0 + q.pow(1 - k) / (b * cc * x)) * (1.0 + mk / x) / a;
    let terms = [(gamma + gamma.inv()) * f[1], up * f[2], mid * f[1], down * f[0]];
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    Ok((terms[0] - terms[1] + terms[2] - terms[3]).norm() / scale)
}

/// Relative mismatch between `F_{2k}` (or `a y F_{2k+1}` when `odd`) and the
/// matching specialization of `Φ_{y²}` at base `q²`.
pub fn specialization_residual(p: &EigenParams, y: Complex, k: i32, odd: bool) -> Result<f64> {
    let q2 = p.q().squared();
    let (params, lhs) = if odd {
        (BigQJacobiParams::odd_specialization(p, y), p.a() * y * f_k(p, y, 2 * k + 1)?)
    } else {
        (BigQJacobiParams::even_specialization(p, y), f_k(p, y, 2 * k)?)
    };
    let rhs = phi_gamma(&params, q2, k)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(f64::MIN_POSITIVE))
}

/// `Φ_γ(x q^k) (aγ)^k`, which tends to 1 as `k → −∞`.
pub fn phi_gamma_leading_ratio(params: &BigQJacobiParams, q: QBase, k: i32) -> Result<Complex> {
    Ok(phi_gamma(params, q, k)? * (params.a * params.gamma).powi(k))
}

/// Both sides of the quadratic transformation
/// `₂φ₁(ay, −ay; qy²; q, −z/a²) = (z, qzy²/a²; q²)_∞/(−z/a²; q)_∞
/// · ₃φ₂(q²y²/a², −y², −qy²; qzy²/a², q²y⁴; q², z)`.
pub fn quad_transform_sides(a: Complex, y: Complex, z: Complex, q: QBase) -> Result<(Complex, Complex)> {
    let bound = a.norm_sqr().min(1.0);
    if z.norm() >= bound {
        return Err(Error::DomainViolation(format!("|z| = {} must be below min(1, |a|^2) = {bound}", z.norm())));
    }
    let qv = q.get();
    let q2 = q.squared();
    let a2 = a * a;
    let y2 = y * y;
    let lhs = phi_series(&[a * y, -a * y], &[qv * y2], q, -z / a2)?.value;
    let den = qpoch_inf(-z / a2, q);
    if den.norm() < 1e-300 {
        return Err(Error::SingularParameter("(-z/a^2; q) vanishes".into()));
    }
    let pre = qpoch_inf(z, q2) * qpoch_inf(qv * z * y2 / a2, q2) / den;
    let series = phi_series(
        &[qv * qv * y2 / a2, -y2, -qv * y2],
        &[qv * z * y2 / a2, qv * qv * y2 * y2],
        q2,
        z,
    )?;
    Ok((lhs, pre * series.value))
}

/// `|LHS − RHS| / max(|LHS|, 1)` for the quadratic transformation.
pub fn quad_transform_check(a: Complex, y: Complex, z: Complex, q: QBase) -> Result<f64> {
    let (l, r) = quad_transform_sides(a, y, z, q)?;
    Ok((l - r).norm() / l.norm().max(1.0))
}

/// The transformation at `z = q^{2−2k}/t` (or `q^{1−2k}/t`, i.e. `t → qt`, when
/// `odd`), where its left side is `(ay)^{2k} F_{2k}` (resp. `(ay)^{2k+1} F_{2k+1}`).
/// Also checks the left side against the eigenfunction `F`.
pub fn quadrel1_residual(p: &EigenParams, y: Complex, k: i32, odd: bool) -> Result<f64> {
    let q = p.q();
    let shift = if odd { 1 } else { 0 };
    let z = q.pow(2 - 2 * k - shift) / p.t();
    let (l, r) = quad_transform_sides(p.a(), y, z, q)?;
    let j = 2 * k + shift;
    let from_f = (p.a() * y).powi(j) * f_k(p, y, j)?;
    let scale = l.norm().max(1.0);
    Ok(((l - r).norm() / scale).max((l - from_f).norm() / scale))
}

const EXTRAP_POINTS: usize = 4;

/// Both sides of the `z = q^{2−2k}/t` transformation multiplied by `(q²y⁴; q²)_∞`
/// near the puncture `y² = q^{−1−n}`. Each one-sided limit is extrapolated from
/// `y² = q^{−1−n}(1 ± jh)`, `j = 1..=4` (sampling right at the puncture would
/// cancel a vanishing factor against a rounded pole). Returns the largest of the
/// left/right jump of either side and the left-minus-right mismatch, relative to
/// the regularized value.
pub fn puncture_continuity(p: &EigenParams, k: i32, n: i32, h: f64) -> Result<f64> {
    let q = p.q();
    let z = q.pow(2 - 2 * k) / p.t();
    let centre = q.pow(-1 - n);
    let regularized = |s: f64| -> Result<(Complex, Complex)> {
        let y = c((centre * s).sqrt());
        let reg = qpoch_inf(q.get().powi(2) * y.powi(4), q.squared());
        let (l, r) = quad_transform_sides(p.a(), y, z, q)?;
        Ok((reg * l, reg * r))
    };
    let mut limits = Vec::with_capacity(2);
    for dir in [1.0, -1.0] {
        let v: Vec<(Complex, Complex)> =
            (1..=EXTRAP_POINTS).map(|j| regularized(1.0 + dir * j as f64 * h)).collect::<Result<_>>()?;
        // Polynomial extrapolation to offset 0: weights (−1)^{j+1} C(m, j).
        let mut limit = (c(0.0), c(0.0));
        let mut binom = 1.0;
        for (j, (l, r)) in v.iter().enumerate() {
            binom *= (EXTRAP_POINTS - j) as f64 / (j + 1) as f64;
            let w = if j % 2 == 0 { binom } else { -binom };
            limit = (limit.0 + w * l, limit.1 + w * r);
        }
        limits.push(limit);
    }
    let scale = limits.iter().map(|(l, _)| l.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let jumps = [
        (limits[0].0 - limits[1].0).norm(),
        (limits[0].1 - limits[1].1).norm(),
        (limits[0].0 - limits[0].1).norm(),
        (limits[1].0 - limits[1].1).norm(),
    ];
    Ok(jumps.into_iter().fold(0.0, f64::max) / scale)
}

/// The bases that occur in the two-`₃φ₂` form of the q-exponential, all derived
/// from one `q`.
#[derive(Debug, Clone, Copy)]
pub struct Bases {
    pub q: QBase,
    /// `q^{1/2}`
    pub half: QBase,
    /// `q²`
    pub double: QBase,
    /// `q^{1/4}` as a number; it only appears as a parameter.
    pub quarter: f64,
}

impl Bases {
    pub fn new(q: QBase) -> Self {
        Bases { q, half: q.sqrt(), double: q.squared(), quarter: q.get().powf(0.25) }
    }
}

fn qexp_term(y: Complex, t: Complex, b: &Bases) -> Result<Complex> {
    let (q, h, q4) = (b.q.get(), b.half.get(), b.quarter);
    let y2 = y * y;
    let num = qpoch_inf(q4 / y, b.half)
        * qpoch_inf(-q4 / y, b.half)
        * qpoch_inf(-q4 * t * y, b.half)
        * qpoch_inf(-q4 / (t * y), b.half)
        * qpoch_inf(-q / t, b.q)
        * qpoch_inf(-q * y2 / t, b.q);
    let den = qpoch_inf(c(-h), b.half)
        * qpoch_inf(y2.inv(), b.half)
        * qpoch_inf(-h / t, b.half)
        * qpoch_inf(h / t, b.half)
        * qpoch_inf(q * t * t, b.double);
    if den.norm() < 1e-300 || !den.norm().is_finite() {
        return Err(Error::SingularParameter(format!("denominator vanishes at y = {y}, t = {t}")));
    }
    let series = phi_series(&[h * y2, -y2, -h * y2], &[-q * y2 / t, q * y2 * y2], b.q, -q / t).map_err(|e| match e {
        Error::PoleInDenominator(_) => Error::SingularParameter(format!("3phi2 denominator pole at y = {y}")),
        other => other,
    })?;
    Ok(num / den * series.value)
}

/// `ℰ_q(z; t)` as the sum of two `₃φ₂` series at base `q` (the second with `y ↔ 1/y`).
/// The series converge for `|t| > q`; the identity holds for `q^{1/2} < |t| < 1`.
pub fn qexp_as_3phi2(z: Complex, t: Complex, q: QBase) -> Result<Complex> {
    if t == c(0.0) {
        return Ok(c(1.0));
    }
    let y = SpectralParam::from_z(z).y();
    let b = Bases::new(q);
    Ok(qexp_term(y, t, &b)? + qexp_term(y.inv(), t, &b)?)
}

/// One row of the quadratic check table.
#[derive(Debug, Clone, Serialize)]
pub struct QuadCheckRow {
    pub case: String,
    pub params: String,
    pub residual: f64,
}

fn row(case: &str, params: String, residual: f64) -> QuadCheckRow {
    QuadCheckRow { case: case.to_string(), params, residual }
}

/// Deterministic, well-spread points in `[0,1)³` (additive recurrence with the
/// plastic-number generalization of the golden ratio).
fn spread(i: usize) -> [f64; 3] {
    let g = 1.220_744_084_605_759_5_f64;
    let alpha = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
    let n = i as f64 + 0.5;
    alpha.map(|a| (n * a).fract())
}

/// `count` in-domain `(a, y, z)` samples for the transformation check.
pub fn transform_samples(count: usize) -> Vec<(Complex, Complex, Complex)> {
    (0..count)
        .map(|i| {
            let [s1, s2, s3] = spread(i);
            let [p1, p2, p3] = spread(i + 1000);
            let a = Complex::from_polar(0.6 + 0.9 * s1, std::f64::consts::TAU * p1);
            let y = Complex::from_polar(0.3 + 0.65 * s2, std::f64::consts::TAU * p2);
            let z = Complex::from_polar(0.9 * a.norm_sqr().min(1.0) * s3, std::f64::consts::TAU * p3);
            (a, y, z)
        })
        .collect()
}

/// Parameter grid for the two-`₃φ₂` q-exponential, inside `q^{1/2} < |t| < 1`.
pub fn qexp_grid() -> Vec<(f64, Complex, Complex)> {
    let mut out = Vec::new();
    for q in [0.3, 0.5] {
        for t in [c(0.8), c(-0.85), Complex::new(0.75, 0.3)] {
            for z in [c(0.3), c(1.7), Complex::new(0.2, 0.5)] {
                out.push((q, t, z));
            }
        }
    }
    out
}

fn fmt_c(z: Complex) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

/// Runs every quadratic-transformation check and returns one row per case.
pub fn quadratic_suite(q: QBase) -> Result<Vec<QuadCheckRow>> {
    let mut rows = Vec::new();
    let qv = q.get();
    let a = Complex::from_polar(0.9, 0.3);
    let t = Complex::from_polar(0.8, -0.7);
    let p = EigenParams::new(a, t, q)?;
    let y = Complex::new(0.4, 0.3);
    let sp = SpectralParam::from_y(y)?;
    let z = sp.z();
    let coeffs = IteratedCoeffs::new(&p);
    let pn = p.negated();
    let ncoeffs = IteratedCoeffs::new(&pn);

    let desc = format!("a={} t={} y={} q={qv}", fmt_c(a), fmt_c(t), fmt_c(y));
    let u: Vec<Complex> = (0..=14).map(|k| u_direct(&p, y, k)).collect::<Result<_>>()?;
    rows.push(row("iterated_u", desc.clone(), max_iterated_residual(&u, 0, &coeffs, z)));
    // v_k = (−1)^k u_k(−a) solves the same recurrence as u_k(−a) does with −a.
    let v: Vec<Complex> = (0..=14).map(|k| u_direct(&pn, y, k)).collect::<Result<_>>()?;
    rows.push(row("iterated_v", desc.clone(), max_iterated_residual(&v, 0, &ncoeffs, z)));
    let f: Vec<Complex> = (-12..=1).map(|k| f_k(&p, y, k)).collect::<Result<_>>()?;
    rows.push(row("iterated_F", desc.clone(), max_iterated_residual(&f, -12, &coeffs, z)));

    // Φ at k = 1 and quadrel1 need |q^{2−2k}/t| small: take |t| large.
    let big_t = EigenParams::new(a, Complex::from_polar(1.5 * q.pow(-3), 0.4), q)?;
    let desc = format!("a={} t={} y={} q={qv}", fmt_c(a), fmt_c(big_t.t()), fmt_c(y));
    for odd in [false, true] {
        let params = if odd {
            BigQJacobiParams::odd_specialization(&big_t, y)
        } else {
            BigQJacobiParams::even_specialization(&big_t, y)
        };
        let worst = (-8..=0)
            .map(|k| big_q_jacobi_residual(&params, q.squared(), k))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(row(if odd { "big_q_jacobi_odd" } else { "big_q_jacobi_even" }, desc.clone(), worst));
        let worst = [-6, -3, -1, 0]
            .into_iter()
            .map(|k| specialization_residual(&big_t, y, k, odd))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(row(if odd { "specialization_odd" } else { "specialization_even" }, desc.clone(), worst));
    }

    let mut worst: f64 = 0.0;
    for (a, y, z) in transform_samples(50) {
        worst = worst.max(quad_transform_check(a, y, z, q)?);
    }
    rows.push(row("transform_random", format!("50 samples q={qv}"), worst));

    for odd in [false, true] {
        for k in 0..=2 {
            let r = quadrel1_residual(&big_t, y, k, odd)?;
            let case = if odd { "quadrel1_odd" } else { "quadrel1_even" };
            rows.push(row(case, format!("k={k} t={} q={qv}", fmt_c(big_t.t())), r));
        }
    }
    for n in [0, 1] {
        let r = puncture_continuity(&big_t, 1, n, 2e-4)?;
        rows.push(row("puncture", format!("y^2=q^-{}(1±jh) h=2e-4 k=1 q={qv}", n + 1), r));
    }

    let mut worst: f64 = 0.0;
    for (qq, t, z) in qexp_grid() {
        let qb = QBase::new(qq)?;
        let two = qexp_as_3phi2(z, t, qb)?;
        let one = q_exponential(QExponentialParams { q: qb, z, t })?;
        worst = worst.max((two - one).norm() / one.norm());
    }
    rows.push(row("qexp_two_3phi2", "q in {0.3,0.5}, 9 (t,z) each".into(), worst));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QBase {
        QBase::new(v).unwrap()
    }

    #[test]
    fn iterated_coeffs_match_base_recurrence() {
        let p = EigenParams::new(Complex::new(0.7, 0.2), Complex::new(-0.4, 1.1), q(0.6)).unwrap();
        let ic = IteratedCoeffs::new(&p);
        for k in -5..5 {
            assert!((ic.iter_c(k) - p.forward_coeff(k)).norm() <= 1e-12 * ic.iter_c(k).norm());
            assert!((ic.iter_d(k) + p.backward_coeff(k)).norm() <= 1e-12 * ic.iter_d(k).norm());
        }
    }

    #[test]
    fn random_vector_fails_iterated_recurrence() {
        let p = EigenParams::new(c(0.8), c(0.45), q(0.5)).unwrap();
        let ic = IteratedCoeffs::new(&p);
        let f = [c(0.3), c(-1.2), c(0.7), c(2.0), c(-0.4)];
        assert!(iterated_recurrence_residual(&f, &ic, c(0.9), 1) > 0.05);
    }

    #[test]
    fn z_zero_gives_one_on_both_sides() {
        let (l, r) = quad_transform_sides(Complex::new(0.9, 0.1), Complex::new(0.3, 0.2), c(0.0), q(0.5)).unwrap();
        assert!((l - 1.0).norm() < 1e-15 && (r - 1.0).norm() < 1e-15);
    }

    #[test]
    fn transform_outside_domain() {
        let r = quad_transform_check(c(0.5), c(0.3), c(0.3), q(0.5));
        assert!(matches!(r, Err(Error::DomainViolation(_))));
    }

    #[test]
    fn qexp_two_series_symmetric_and_trivial_at_zero() {
        let qb = q(0.4);
        let t = Complex::new(0.7, 0.2);
        let y = Complex::new(0.5, 0.3);
        let z = 0.5 * (y + y.inv());
        let b = Bases::new(qb);
        let direct = qexp_term(y, t, &b).unwrap() + qexp_term(y.inv(), t, &b).unwrap();
        let swapped = qexp_term(y.inv(), t, &b).unwrap() + qexp_term(y, t, &b).unwrap();
        assert_eq!(direct, swapped);
        assert!((qexp_as_3phi2(z, t, qb).unwrap() - direct).norm() < 1e-12 * direct.norm());
        assert_eq!(qexp_as_3phi2(z, c(0.0), qb).unwrap(), c(1.0));
    }

    #[test]
    fn suite_passes() {
        for row in quadratic_suite(q(0.5)).unwrap() {
            let tol = if row.case == "qexp_two_3phi2" { 1e-9 } else if row.case == "puncture" { 1e-8 } else { 1e-10 };
            assert!(row.residual < tol, "{}: {} ({})", row.case, row.residual, row.params);
        }
    }
}
