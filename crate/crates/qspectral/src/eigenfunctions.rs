//! Solutions of the three-term recurrence
//!
//! ```text
//! 2z f_k = (1 + a²t q^{k-1})/(a t q^{k-1}) f_{k+1} − (1 − q^{k-1} t)/(a t q^{k-1}) f_{k-1}
//! ```
//!
//! and the connection coefficients `c`, `d` between them.
//!
//! Evaluation routes: `u_k`, `v_k` are summed directly where `|t q^k| ≤ 0.9` and
//! continued downward with the recurrence (they dominate toward `k → −∞` off the
//! spectrum, so this is stable). `F_k` is summed directly where
//! `|q^{2-k}/(a²t)| ≤ 0.9` and continued upward (all solutions stay bounded as
//! `k → +∞`). The connection formulas are available as an independent route.

use crate::error::{Error, Result};
use crate::qcore::{lattice_exponent, phi_series, qpoch_inf, theta, Complex, QBase};

/// Direct summation is used only where the series argument is at most this.
pub const DIRECT_LIMIT: f64 = 0.9;

/// The recurrence parameters `(a, t)` and base `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenParams {
    a: Complex,
    t: Complex,
    q: QBase,
}

impl EigenParams {
    /// Rejects `a = 0`, `t = 0`, and the degenerate lattices `t ∈ q^ℤ`, `−a²t ∈ q^ℤ`
    /// where a recurrence coefficient vanishes.
    pub fn new(a: Complex, t: Complex, q: QBase) -> Result<Self> {
        if a.norm() == 0.0 || t.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        if let Some(n) = lattice_exponent(t, q) {
            return Err(Error::SingularParameter(format!("t = q^{n}: a recurrence coefficient vanishes")));
        }
        if let Some(n) = lattice_exponent(-a * a * t, q) {
            return Err(Error::SingularParameter(format!(
                "-a^2 t = q^{n}: a recurrence coefficient vanishes"
            )));
        }
        Ok(EigenParams { a, t, q })
    }

    pub fn a(&self) -> Complex {
        self.a
    }
    pub fn t(&self) -> Complex {
        self.t
    }
    pub fn q(&self) -> QBase {
        self.q
    }

    /// Same recurrence with `a ↦ −a`.
    pub fn negated(&self) -> Self {
        EigenParams { a: -self.a, ..*self }
    }

    /// Coefficient of `f_{k+1}`.
    pub fn forward_coeff(&self, k: i32) -> Complex {
        let w = self.a * self.t * self.q.pow(k - 1);
        (1.0 + self.a * w) / w
    }

    /// Coefficient of `f_{k-1}` (entering with a minus sign).
    pub fn backward_coeff(&self, k: i32) -> Complex {
        let qk = self.q.pow(k - 1);
        (1.0 - qk * self.t) / (self.a * self.t * qk)
    }

    /// Given `f_k`, `f_{k+1}` return `f_{k-1}`.
    pub fn step_down(&self, z: Complex, k: i32, fk: Complex, fk1: Complex) -> Complex {
        (self.forward_coeff(k) * fk1 - 2.0 * z * fk) / self.backward_coeff(k)
    }

    /// Given `f_{k-1}`, `f_k` return `f_{k+1}`.
    pub fn step_up(&self, z: Complex, k: i32, fkm1: Complex, fk: Complex) -> Complex {
        (2.0 * z * fk + self.backward_coeff(k) * fkm1) / self.forward_coeff(k)
    }

    /// Smallest `k` with `|t q^k| ≤ DIRECT_LIMIT`.
    pub fn u_direct_from(&self) -> i32 {
        let k = ((DIRECT_LIMIT / self.t.norm()).ln() / self.q.get().ln()).ceil() as i32;
        let mut k = k;
        while self.t.norm() * self.q.pow(k) > DIRECT_LIMIT {
            k += 1;
        }
        while self.t.norm() * self.q.pow(k - 1) <= DIRECT_LIMIT {
            k -= 1;
        }
        k
    }

    /// Largest `k` with `|q^{2-k}/(a²t)| ≤ DIRECT_LIMIT`.
    pub fn f_direct_upto(&self) -> i32 {
        let s = (self.a * self.a * self.t).norm();
        let arg = |k: i32| self.q.pow(2 - k) / s;
        let mut k = (2.0 - (DIRECT_LIMIT * s).ln() / self.q.get().ln()).floor() as i32;
        while arg(k) > DIRECT_LIMIT {
            k -= 1;
        }
        while arg(k + 1) <= DIRECT_LIMIT {
            k += 1;
        }
        k
    }
}

/// A point `y` together with `z = (y + 1/y)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    y: Complex,
    z: Complex,
}

impl SpectralParam {
    /// Canonical root: `|y| ≤ 1`, ties broken toward `Im y ≥ 0`.
    pub fn from_z(z: Complex) -> Self {
        let s = (z * z - 1.0).sqrt();
        let (y1, y2) = (z + s, z - s);
        let big = if y1.norm() >= y2.norm() { y1 } else { y2 };
        let mut y = big.inv();
        if (big.norm() - 1.0).abs() <= 1e-14 {
            // on the unit circle both roots qualify
            y = if big.im >= 0.0 { big } else { big.conj() };
            if y.im < 0.0 {
                y = y.conj();
            }
        }
        SpectralParam { y, z }
    }

    /// Explicit root; `y` must be nonzero.
    pub fn from_y(y: Complex) -> Result<Self> {
        if y.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        Ok(SpectralParam { y, z: 0.5 * (y + y.inv()) })
    }

    pub fn y(&self) -> Complex {
        self.y
    }
    pub fn z(&self) -> Complex {
        self.z
    }

    /// The other root `1/y`, same `z`.
    pub fn inverted(&self) -> Self {
        SpectralParam { y: self.y.inv(), z: self.z }
    }

    /// `ȳ`, `z̄`.
    pub fn conj(&self) -> Self {
        SpectralParam { y: self.y.conj(), z: self.z.conj() }
    }
}

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Direct sum for `u_k = ₂φ₁(ay, a/y; −q; q, t q^k)`; needs `|t q^k| < 1`.
pub fn u_direct(p: &EigenParams, y: Complex, k: i32) -> Result<Complex> {
    let q = p.q;
    let arg = p.t * q.pow(k);
    Ok(phi_series(&[p.a * y, p.a / y], &[Complex::new(-q.get(), 0.0)], q, arg)?.value)
}

/// `u_j` for `j = lo..=hi`.
pub fn u_range(p: &EigenParams, sp: &SpectralParam, lo: i32, hi: i32) -> Result<Vec<Complex>> {
    assert!(lo <= hi, "empty index range");
    let y = sp.y;
    let kd = p.u_direct_from();
    if lo >= kd {
        return (lo..=hi).map(|k| u_direct(p, y, k)).collect();
    }
    let top = hi.max(kd + 1);
    let mut vals = vec![Complex::new(0.0, 0.0); (top - lo + 1) as usize];
    let idx = |k: i32| (k - lo) as usize;
    for k in kd..=top {
        vals[idx(k)] = u_direct(p, y, k)?;
    }
    for k in (lo + 1..=kd).rev() {
        vals[idx(k - 1)] = p.step_down(sp.z, k, vals[idx(k)], vals[idx(k + 1)]);
    }
    vals.truncate(idx(hi) + 1);
    Ok(vals)
}

/// `v_j = (−1)^j ₂φ₁(−ay, −a/y; −q; q, t q^j)` for `j = lo..=hi`.
pub fn v_range(p: &EigenParams, sp: &SpectralParam, lo: i32, hi: i32) -> Result<Vec<Complex>> {
    let u = u_range(&p.negated(), sp, lo, hi)?;
    Ok(u.into_iter().zip(lo..=hi).map(|(w, k)| sign(k) * w).collect())
}

pub fn u_k(p: &EigenParams, sp: &SpectralParam, k: i32) -> Result<Complex> {
    Ok(u_range(p, sp, k, k)?[0])
}

pub fn v_k(p: &EigenParams, sp: &SpectralParam, k: i32) -> Result<Complex> {
    Ok(v_range(p, sp, k, k)?[0])
}

fn check_f_parameter(y: Complex, q: QBase) -> Result<()> {
    if y.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    if let Some(n) = lattice_exponent(y * y, q) {
        if n <= -1 {
            return Err(Error::SingularParameter(format!("y^2 = q^{n} lies in q^(-N)")));
        }
    }
    Ok(())
}

/// Direct sum for `F_k(y) = (ay)^{-k} ₂φ₁(ay, −ay; qy²; q, −q^{2-k}/(a²t))`.
pub fn f_direct(p: &EigenParams, y: Complex, k: i32) -> Result<Complex> {
    check_f_parameter(y, p.q)?;
    let q = p.q;
    let arg = -q.pow(2 - k) / (p.a * p.a * p.t);
    if arg.norm() >= 1.0 {
        return Err(Error::SummationOutOfRange(format!(
            "|q^(2-k)/(a^2 t)| = {} at k = {k}",
            arg.norm()
        )));
    }
    let ay = p.a * y;
    let s = phi_series(&[ay, -ay], &[q.get() * y * y], q, arg)?;
    Ok(ay.powi(-k) * s.value)
}

/// `F_j(y)` for `j = lo..=hi`.
pub fn f_range(p: &EigenParams, y: Complex, lo: i32, hi: i32) -> Result<Vec<Complex>> {
    assert!(lo <= hi, "empty index range");
    check_f_parameter(y, p.q)?;
    let kf = p.f_direct_upto();
    if hi <= kf {
        return (lo..=hi).map(|k| f_direct(p, y, k)).collect();
    }
    let z = 0.5 * (y + y.inv());
    let start = lo.min(kf - 1);
    let mut vals = Vec::with_capacity((hi - start + 1) as usize);
    for k in start..=kf {
        vals.push(f_direct(p, y, k)?);
    }
    for k in kf..hi {
        let i = (k - start) as usize;
        let next = p.step_up(z, k, vals[i - 1], vals[i]);
        vals.push(next);
    }
    Ok(vals.split_off((lo - start) as usize))
}

pub fn f_k(p: &EigenParams, y: Complex, k: i32) -> Result<Complex> {
    Ok(f_range(p, y, k, k)?[0])
}

fn nonzero(v: Complex, what: &str) -> Result<Complex> {
    if !v.re.is_finite() || !v.im.is_finite() {
        Err(Error::SingularParameter(format!("{what} overflows double range")))
    } else if v.norm() == 0.0 {
        Err(Error::SingularParameter(format!("{what} vanishes")))
    } else {
        Ok(v)
    }
}

/// `c(y;a,t) = (a/y, −q/(ay), ayt, q/(ayt); q)_∞ / (−q, y^{-2}, t, q/t; q)_∞`.
pub fn c_fn(y: Complex, a: Complex, t: Complex, q: QBase) -> Result<Complex> {
    if y.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let qv = q.get();
    if let Some(n) = lattice_exponent(y * y, q) {
        if n >= 0 {
            return Err(Error::SingularParameter(format!("y^2 = q^{n}: (y^-2;q) vanishes")));
        }
    }
    if lattice_exponent(t, q).is_some() {
        return Err(Error::SingularParameter("t in q^Z: theta(t) vanishes".into()));
    }
    let ay = a * y;
    let num = qpoch_inf(a / y, q) * qpoch_inf(-qv / ay, q) * qpoch_inf(ay * t, q) * qpoch_inf(qv / (ay * t), q);
    let den = qpoch_inf(Complex::new(-qv, 0.0), q) * qpoch_inf(y.powi(-2), q) * theta(t, q)?;
    Ok(num / nonzero(den, "c denominator")?)
}

/// `d(y;a,t) = (−ay, qy/a, −at/(qy), −q²y/(at); q)_∞ / (−1, qy², −a²t/q, −q²/(a²t); q)_∞`.
pub fn d_fn(y: Complex, a: Complex, t: Complex, q: QBase) -> Result<Complex> {
    if y.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let qv = q.get();
    if let Some(n) = lattice_exponent(y * y, q) {
        if n <= -1 {
            return Err(Error::SingularParameter(format!("y^2 = q^{n}: (qy^2;q) vanishes")));
        }
    }
    if lattice_exponent(-a * a * t, q).is_some() {
        return Err(Error::SingularParameter("-a^2 t in q^Z".into()));
    }
    let num = qpoch_inf(-a * y, q)
        * qpoch_inf(qv * y / a, q)
        * qpoch_inf(-a * t / (qv * y), q)
        * qpoch_inf(-qv * qv * y / (a * t), q);
    let den = qpoch_inf(Complex::new(-1.0, 0.0), q)
        * qpoch_inf(qv * y * y, q)
        * qpoch_inf(-a * a * t / qv, q)
        * qpoch_inf(-qv * qv / (a * a * t), q);
    Ok(num / nonzero(den, "d denominator")?)
}

/// `u_k` through `c(y) F_k(y) + c(1/y) F_k(1/y)`.
pub fn u_via_connection(p: &EigenParams, sp: &SpectralParam, k: i32) -> Result<Complex> {
    let y = sp.y;
    let c1 = c_fn(y, p.a, p.t, p.q)?;
    let c2 = c_fn(y.inv(), p.a, p.t, p.q)?;
    Ok(c1 * f_k(p, y, k)? + c2 * f_k(p, y.inv(), k)?)
}

/// `v_k` through the connection formula with `a ↦ −a`.
pub fn v_via_connection(p: &EigenParams, sp: &SpectralParam, k: i32) -> Result<Complex> {
    let y = sp.y;
    let c1 = c_fn(y, -p.a, p.t, p.q)?;
    let c2 = c_fn(y.inv(), -p.a, p.t, p.q)?;
    Ok(c1 * f_k(p, y, k)? + c2 * f_k(p, y.inv(), k)?)
}

/// `F_k(y)` through `d(y;a) u_k + d(y;−a) v_k`.
pub fn f_via_connection(p: &EigenParams, sp: &SpectralParam, k: i32) -> Result<Complex> {
    let y = sp.y;
    let d1 = d_fn(y, p.a, p.t, p.q)?;
    let d2 = d_fn(y, -p.a, p.t, p.q)?;
    Ok(d1 * u_k(p, sp, k)? + d2 * v_k(p, sp, k)?)
}

/// Left side `c(y;a)c(1/y;−a) − c(1/y;a)c(y;−a)` and the closed form
/// `2a/(1/y − y) · θ(−a²t)/θ(t)`.
pub fn c_determinant(y: Complex, a: Complex, t: Complex, q: QBase) -> Result<(Complex, Complex)> {
    let lhs = c_fn(y, a, t, q)? * c_fn(y.inv(), -a, t, q)? - c_fn(y.inv(), a, t, q)? * c_fn(y, -a, t, q)?;
    let rhs = 2.0 * a / (y.inv() - y) * theta(-a * a * t, q)? / theta(t, q)?;
    Ok((lhs, rhs))
}

/// Normalised residual of the recurrence at index `k`: the defect divided by the
/// largest of the three terms.
pub fn recurrence_residual(
    f_prev: Complex,
    f: Complex,
    f_next: Complex,
    p: &EigenParams,
    z: Complex,
    k: i32,
) -> f64 {
    let t0 = 2.0 * z * f;
    let t1 = p.forward_coeff(k) * f_next;
    let t2 = p.backward_coeff(k) * f_prev;
    let scale = t0.norm().max(t1.norm()).max(t2.norm());
    if scale == 0.0 {
        return 0.0;
    }
    (t0 - t1 + t2).norm() / scale
}

/// Largest normalised residual over the interior of a sequence starting at `lo`.
pub fn max_recurrence_residual(vals: &[Complex], lo: i32, p: &EigenParams, z: Complex) -> f64 {
    vals.windows(3)
        .enumerate()
        .map(|(i, w)| recurrence_residual(w[0], w[1], w[2], p, z, lo + i as i32 + 1))
        .fold(0.0, f64::max)
}
