//! The symmetric Jacobi operator `2L e_k = a_k e_{k+1} + a_{k-1} e_{k-1}` on
//! two-sided sequences, its self-adjoint extensions and its resolvent.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::eigenfunctions::{
    c_fn, d_fn, f_range, u_range, v_range, EigenParams, SpectralParam,
};
use crate::error::{Error, Result};
use crate::qcore::{qpoch_inf, theta, Complex, QBase};

/// `λ₀ = 1 − √2`, chosen so that `½(iλ₀ + (iλ₀)^{-1}) = i`.
pub const LAMBDA0: f64 = 1.0 - SQRT_2;

/// Probe points used to fix and validate the phase `γ`.
const GAMMA_PROBES: [(f64, f64); 2] = [(0.3, 0.2), (0.1, -0.5)];
const GAMMA_TOL: f64 = 1e-10;

fn i() -> Complex {
    Complex::new(0.0, 1.0)
}

/// The two admissible symmetrization regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `a = √q e^{iψ}`, `t = i r e^{-iψ}`.
    Case1 { psi: f64, r: f64 },
    /// `a = i s`, `t < 0`.
    Case2 { s: f64, t: f64 },
}

impl Regime {
    /// Rejects `r = 0` and angles that make `t` real positive.
    pub fn case1(psi: f64, r: f64) -> Result<Self> {
        if !psi.is_finite() || !r.is_finite() || r == 0.0 {
            return Err(Error::InvalidRegime(format!("case 1 needs finite psi and r != 0, got r = {r}")));
        }
        let t = i() * r * Complex::from_polar(1.0, -psi);
        if t.re > 0.0 && t.im.abs() <= 1e-12 * t.norm() {
            return Err(Error::InvalidRegime(format!("case 1 needs t = i r e^(-i psi) not in (0, inf), got t = {t}")));
        }
        Ok(Regime::Case1 { psi, r })
    }

    pub fn case2(s: f64, t: f64) -> Result<Self> {
        if !s.is_finite() || s == 0.0 {
            return Err(Error::InvalidRegime(format!("case 2 needs real s != 0, got s = {s}")));
        }
        if !(t < 0.0) || !t.is_finite() {
            return Err(Error::InvalidRegime(format!("case 2 needs t < 0, got t = {t}")));
        }
        Ok(Regime::Case2 { s, t })
    }

    pub fn a(&self, q: QBase) -> Complex {
        match *self {
            Regime::Case1 { psi, .. } => Complex::from_polar(q.get().sqrt(), psi),
            Regime::Case2 { s, .. } => Complex::new(0.0, s),
        }
    }

    pub fn t(&self) -> Complex {
        match *self {
            Regime::Case1 { psi, r } => i() * r * Complex::from_polar(1.0, -psi),
            Regime::Case2 { t, .. } => Complex::new(t, 0.0),
        }
    }

    pub fn is_case1(&self) -> bool {
        matches!(self, Regime::Case1 { .. })
    }

    /// The q-exponential special case `ψ ≡ 0 (mod 2π)`.
    pub fn is_exponential_case(&self) -> bool {
        match *self {
            Regime::Case1 { psi, .. } => {
                let m = psi.rem_euclid(std::f64::consts::TAU);
                m.min(std::f64::consts::TAU - m) < 1e-14
            }
            Regime::Case2 { .. } => false,
        }
    }
}

/// A sequence on a finite index window `start..=end`, read as zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Vector {
    start: i32,
    values: Vec<Complex>,
}

impl L2Vector {
    pub fn new(start: i32, values: Vec<Complex>) -> Self {
        L2Vector { start, values }
    }

    pub fn zeros(lo: i32, hi: i32) -> Self {
        L2Vector { start: lo, values: vec![Complex::new(0.0, 0.0); (hi - lo + 1).max(0) as usize] }
    }

    /// The basis vector `e_k`.
    pub fn basis(k: i32) -> Self {
        L2Vector { start: k, values: vec![Complex::new(1.0, 0.0)] }
    }

    pub fn from_real(start: i32, values: &[f64]) -> Self {
        L2Vector { start, values: values.iter().map(|&v| Complex::new(v, 0.0)).collect() }
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    /// Last index of the window (inclusive).
    pub fn end(&self) -> i32 {
        self.start + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn contains(&self, k: i32) -> bool {
        k >= self.start && k <= self.end()
    }

    pub fn get(&self, k: i32) -> Complex {
        if self.contains(k) {
            self.values[(k - self.start) as usize]
        } else {
            Complex::new(0.0, 0.0)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex)> + '_ {
        self.values.iter().enumerate().map(move |(j, &v)| (self.start + j as i32, v))
    }

    /// `⟨ξ, η⟩ = Σ ξ_k conj(η_k)`.
    pub fn inner(&self, other: &L2Vector) -> Complex {
        self.iter().map(|(k, v)| v * other.get(k).conj()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn conj(&self) -> Self {
        L2Vector { start: self.start, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn scale(&self, s: Complex) -> Self {
        L2Vector { start: self.start, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// `self + s·other` on the union of both windows.
    pub fn add_scaled(&self, s: Complex, other: &L2Vector) -> Self {
        let lo = self.start.min(other.start);
        let hi = self.end().max(other.end());
        L2Vector { start: lo, values: (lo..=hi).map(|k| self.get(k) + s * other.get(k)).collect() }
    }
}

/// Which pair `(E, F)` fixes the extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Infinite products straight from the defect condition.
    Lemma,
    /// The common factor cancelled: `E = θ(r q^{-1/2}/λ₀)`, `F = θ(−r q^{-1/2}/λ₀)`
    /// (only for the q-exponential case).
    Reduced,
}

/// Boundary data of one self-adjoint extension: `Ā = E e^{iθ} + F e^{-iθ}`,
/// `B = Ā`. `A` and `B` may be rescaled together by [`ExtensionCoeffs::scaled`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionCoeffs {
    pub theta: f64,
    pub e: f64,
    pub f: f64,
    a: Complex,
    b: Complex,
    pub lambda0: f64,
    pub normalization: Normalization,
}

impl ExtensionCoeffs {
    fn from_ef(theta: f64, e: f64, f: f64, normalization: Normalization) -> Self {
        let a_bar = e * Complex::from_polar(1.0, theta) + f * Complex::from_polar(1.0, -theta);
        ExtensionCoeffs { theta, e, f, a: a_bar.conj(), b: a_bar, lambda0: LAMBDA0, normalization }
    }

    /// Coefficient of `αu` in `ψ`.
    pub fn a(&self) -> Complex {
        self.a
    }

    /// Coefficient of `αv` in `ψ`.
    pub fn b(&self) -> Complex {
        self.b
    }

    /// Both coefficients multiplied by the same scalar; every spectral quantity is
    /// invariant under this.
    pub fn scaled(&self, lambda: Complex) -> Self {
        ExtensionCoeffs { a: self.a * lambda, b: self.b * lambda, ..*self }
    }
}

/// The operator for one regime and base, with the phase `γ` fixed.
#[derive(Debug, Clone)]
pub struct JacobiOperator {
    regime: Regime,
    q: QBase,
    params: EigenParams,
    gamma: f64,
    omega: Complex,
    theta_t: Complex,
}

impl JacobiOperator {
    pub fn new(regime: Regime, q: QBase) -> Result<Self> {
        let params = EigenParams::new(regime.a(q), regime.t(), q)?;
        let t = regime.t();
        let theta_t = theta(t, q)?;
        let omega = theta_t / theta(t.conj(), q)?;
        let mut op = JacobiOperator { regime, q, params, gamma: 0.0, omega, theta_t };
        if regime.is_case1() {
            op.gamma = op.fit_gamma()?;
        }
        Ok(op)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
    pub fn q(&self) -> QBase {
        self.q
    }
    pub fn params(&self) -> &EigenParams {
        &self.params
    }

    /// Phase with `conj(e^{iγ} α_k F_k(ȳ)) = e^{iγ} α_k F_k(y)`; zero in case 2.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `θ(t)/θ(t̄)`, the factor in `conj(c(ȳ;a)) = ω c(y;−a)`.
    pub fn omega(&self) -> Complex {
        self.omega
    }

    /// `conj(α_k F_k(ȳ)) / (α_k F_k(y))` at one probe.
    pub fn conjugation_ratio(&self, y: Complex, k: i32) -> Result<Complex> {
        let al = self.coeff_alpha(k);
        let f = f_range(&self.params, y, k, k)?[0];
        let fb = f_range(&self.params, y.conj(), k, k)?[0];
        Ok((al * fb).conj() / (al * f))
    }

    fn fit_gamma(&self) -> Result<f64> {
        let (y0, y1) = (Complex::new(GAMMA_PROBES[0].0, GAMMA_PROBES[0].1), Complex::new(GAMMA_PROBES[1].0, GAMMA_PROBES[1].1));
        let c = self.conjugation_ratio(y0, 0)?;
        if (c.norm() - 1.0).abs() > GAMMA_TOL {
            return Err(Error::ValidationFailed(format!("|C| = {} deviates from 1", c.norm())));
        }
        for (y, k) in [(y0, 5), (y0, -5), (y1, 0), (y1, 5)] {
            let ck = self.conjugation_ratio(y, k)?;
            if (ck - c).norm() > GAMMA_TOL {
                return Err(Error::ValidationFailed(format!(
                    "conjugation ratio varies: {ck} at y = {y}, k = {k} vs {c}"
                )));
            }
        }
        Ok(0.5 * c.arg())
    }

    /// Off-diagonal coefficient `a_k > 0`.
    pub fn coeff_a(&self, k: i32) -> f64 {
        let q = self.q;
        match self.regime {
            Regime::Case1 { psi, r } => {
                let x = r * q.pow(k);
                (1.0 - 2.0 * x * psi.sin() + x * x).sqrt() / x.abs()
            }
            Regime::Case2 { s, t } => ((1.0 - q.pow(-k) / t) * (1.0 - q.pow(1 - k) / (t * s * s))).sqrt(),
        }
    }

    /// The second printed form of `a_k`.
    pub fn coeff_a_alt(&self, k: i32) -> f64 {
        let q = self.q;
        match self.regime {
            Regime::Case1 { psi, r } => {
                let w = i() * r * q.pow(k);
                ((1.0 + w * Complex::from_polar(1.0, psi)) / w).norm()
            }
            Regime::Case2 { s, t } => {
                q.powf(0.5 - k as f64) / (s * t).abs() * ((1.0 - t * q.pow(k)) * (1.0 - t * s * s * q.pow(k - 1))).sqrt()
            }
        }
    }

    fn phase_step(&self, j: i32) -> f64 {
        match self.regime {
            Regime::Case1 { psi, r } => {
                let w = 1.0 + i() * r * Complex::from_polar(1.0, psi) * self.q.pow(j);
                w.arg() - FRAC_PI_2 * r.signum()
            }
            Regime::Case2 { .. } => 0.0,
        }
    }

    /// `φ_k` with `φ_0 = 0` (case 1).
    pub fn phase(&self, k: i32) -> f64 {
        if k >= 0 {
            (0..k).map(|j| self.phase_step(j)).sum()
        } else {
            -(k..0).map(|j| self.phase_step(j)).sum::<f64>()
        }
    }

    fn case2_alpha_positive(&self, s: f64, t: f64, k: i32) -> Complex {
        let q = self.q;
        let c = |x: f64| Complex::new(x, 0.0);
        let ratio = qpoch_inf(c(t * q.pow(k)), q) * theta(c(s * s * t / q.get()), q).unwrap_or_default()
            / (qpoch_inf(c(t * s * s * q.pow(k - 1)), q) * self.theta_t);
        unit_power(s.signum(), k) * q.powf(0.5 * k as f64) * ratio.re.sqrt()
    }

    fn case2_alpha_negative(&self, s: f64, t: f64, k: i32) -> Complex {
        let q = self.q;
        let c = |x: f64| Complex::new(x, 0.0);
        let ratio = qpoch_inf(c(q.pow(2 - k) / (s * s * t)), q) / qpoch_inf(c(q.pow(1 - k) / t), q);
        unit_power(s.signum(), k) * s.abs().powi(k) * ratio.re.sqrt()
    }

    /// Symmetrizing factor `α_k`.
    pub fn coeff_alpha(&self, k: i32) -> Complex {
        match self.regime {
            Regime::Case1 { .. } => Complex::from_polar(self.q.powf(0.5 * k as f64), self.phase(k)),
            Regime::Case2 { s, t } => {
                if k >= 0 {
                    self.case2_alpha_positive(s, t, k)
                } else {
                    self.case2_alpha_negative(s, t, k)
                }
            }
        }
    }

    /// The other printed form of `α_k` (case 2); case 1 recomputes the phase sum
    /// from `a_k e^{i(φ_{k+1}−φ_k)} = (1 + i r e^{iψ} q^k)/(i r q^k)`.
    pub fn coeff_alpha_alt(&self, k: i32) -> Complex {
        match self.regime {
            Regime::Case1 { psi, r } => {
                let step = |j: i32| {
                    let w = i() * r * self.q.pow(j);
                    let z = (1.0 + w * Complex::from_polar(1.0, psi)) / w;
                    z.arg()
                };
                let ph: f64 = if k >= 0 { (0..k).map(step).sum() } else { -(k..0).map(step).sum::<f64>() };
                Complex::from_polar(self.q.powf(0.5 * k as f64), ph)
            }
            Regime::Case2 { s, t } => {
                if k >= 0 {
                    self.case2_alpha_negative(s, t, k)
                } else {
                    self.case2_alpha_positive(s, t, k)
                }
            }
        }
    }

    /// `α_j` for `j = lo..=hi`.
    pub fn alpha_range(&self, lo: i32, hi: i32) -> Vec<Complex> {
        match self.regime {
            Regime::Case1 { .. } => {
                let mut ph = self.phase(lo);
                (lo..=hi)
                    .map(|k| {
                        let v = Complex::from_polar(self.q.powf(0.5 * k as f64), ph);
                        ph += self.phase_step(k);
                        v
                    })
                    .collect()
            }
            Regime::Case2 { .. } => (lo..=hi).map(|k| self.coeff_alpha(k)).collect(),
        }
    }

    /// Right-hand side of `|α_{k-1}/α_k|² = −(1 − q^{k-1}t)/(1 + ā²t̄ q^{k-2}) · āt̄/(q a t)`.
    pub fn symmetrization_ratio(&self, k: i32) -> Complex {
        let (a, t, q) = (self.params.a(), self.params.t(), self.q);
        -(1.0 - q.pow(k - 1) * t) / (1.0 + a.conj() * a.conj() * t.conj() * q.pow(k - 2)) * (a.conj() * t.conj())
            / (q.get() * a * t)
    }

    /// `α_k/α_{k+1}` times the forward coefficient; equals `a_k`.
    pub fn symmetrized_forward(&self, k: i32) -> Complex {
        self.coeff_alpha(k) / self.coeff_alpha(k + 1) * self.params.forward_coeff(k)
    }

    /// `−α_k/α_{k-1}` times the backward coefficient; equals `a_{k-1}`.
    pub fn symmetrized_backward(&self, k: i32) -> Complex {
        -self.coeff_alpha(k) / self.coeff_alpha(k - 1) * self.params.backward_coeff(k)
    }

    /// `[u, v]_k = ½ a_k (u_{k+1} v_k − u_k v_{k+1})`.
    pub fn wronskian(&self, u: &L2Vector, v: &L2Vector, k: i32) -> Result<Complex> {
        for w in [u, v] {
            if !w.contains(k) || !w.contains(k + 1) {
                return Err(Error::DomainViolation(format!("sequence window lacks indices {k}, {}", k + 1)));
            }
        }
        Ok(0.5 * self.coeff_a(k) * (u.get(k + 1) * v.get(k) - u.get(k) * v.get(k + 1)))
    }

    /// `(L ξ)_k = ½(a_k ξ_{k+1} + a_{k-1} ξ_{k-1})` on the window grown by one.
    pub fn apply(&self, xi: &L2Vector) -> L2Vector {
        let (lo, hi) = (xi.start() - 1, xi.end() + 1);
        let vals = (lo..=hi)
            .map(|k| 0.5 * (self.coeff_a(k) * xi.get(k + 1) + self.coeff_a(k - 1) * xi.get(k - 1)))
            .collect();
        L2Vector::new(lo, vals)
    }

    /// Largest `|2z g_k − a_k g_{k+1} − a_{k-1} g_{k-1}|` over the window interior,
    /// relative to the largest term.
    pub fn eigen_residual(&self, g: &L2Vector, z: Complex) -> f64 {
        (g.start() + 1..g.end())
            .map(|k| {
                let t0 = 2.0 * z * g.get(k);
                let t1 = self.coeff_a(k) * g.get(k + 1);
                let t2 = self.coeff_a(k - 1) * g.get(k - 1);
                let scale = t0.norm().max(t1.norm()).max(t2.norm());
                if scale == 0.0 {
                    0.0
                } else {
                    (t0 - t1 - t2).norm() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    fn weighted(&self, lo: i32, vals: Vec<Complex>) -> L2Vector {
        let al = self.alpha_range(lo, lo + vals.len() as i32 - 1);
        L2Vector::new(lo, vals.into_iter().zip(al).map(|(v, a)| v * a).collect())
    }

    /// `α_k u_k(z)` on `lo..=hi`.
    pub fn alpha_u(&self, sp: &SpectralParam, lo: i32, hi: i32) -> Result<L2Vector> {
        Ok(self.weighted(lo, u_range(&self.params, sp, lo, hi)?))
    }

    /// `α_k v_k(z)` on `lo..=hi`.
    pub fn alpha_v(&self, sp: &SpectralParam, lo: i32, hi: i32) -> Result<L2Vector> {
        Ok(self.weighted(lo, v_range(&self.params, sp, lo, hi)?))
    }

    /// `α_k F_k(y)` on `lo..=hi`.
    pub fn alpha_f(&self, y: Complex, lo: i32, hi: i32) -> Result<L2Vector> {
        Ok(self.weighted(lo, f_range(&self.params, y, lo, hi)?))
    }

    /// `[conj(αu(w̄)), αF(y)]_N`.
    pub fn tail_wronskian_u(&self, w: &SpectralParam, y: Complex, n: i32) -> Result<Complex> {
        let u = self.alpha_u(&w.conj(), n, n + 1)?.conj();
        self.wronskian(&u, &self.alpha_f(y, n, n + 1)?, n)
    }

    /// `[conj(αv(w̄)), αF(y)]_N`.
    pub fn tail_wronskian_v(&self, w: &SpectralParam, y: Complex, n: i32) -> Result<Complex> {
        let v = self.alpha_v(&w.conj(), n, n + 1)?.conj();
        self.wronskian(&v, &self.alpha_f(y, n, n + 1)?, n)
    }

    fn tail_factor(&self) -> Result<Complex> {
        let q = self.q.get();
        Ok(match self.regime {
            Regime::Case1 { r, .. } => -q.sqrt() / (i() * r),
            Regime::Case2 { s, t } => {
                i() * q / (s * t) * theta(Complex::new(s * s * t / q, 0.0), self.q)? / self.theta_t
            }
        })
    }

    /// Closed-form `N → ∞` limit of [`Self::tail_wronskian_u`].
    pub fn tail_limit_u(&self, y: Complex) -> Result<Complex> {
        Ok(self.tail_factor()? * d_fn(y, self.params.a(), self.params.t(), self.q)?)
    }

    /// Closed-form `N → ∞` limit of [`Self::tail_wronskian_v`]: opposite sign, `a ↦ −a`.
    pub fn tail_limit_v(&self, y: Complex) -> Result<Complex> {
        Ok(-self.tail_factor()? * d_fn(y, -self.params.a(), self.params.t(), self.q)?)
    }

    /// Evaluates the tail Wronskian at `N` and `2N` and accepts when they agree to
    /// `1e-9` (relative to the larger value, at least 1).
    pub fn tail_wronskian_converged(&self, w: &SpectralParam, y: Complex, n: i32, use_v: bool) -> Result<Complex> {
        let eval = |m| if use_v { self.tail_wronskian_v(w, y, m) } else { self.tail_wronskian_u(w, y, m) };
        let (w1, w2) = (eval(n)?, eval(2 * n)?);
        let scale = w1.norm().max(w2.norm()).max(1.0);
        if (w1 - w2).norm() > 1e-9 * scale {
            return Err(Error::NonConvergence(format!("tail Wronskian changes by {:e} from N = {n} to {}", (w1 - w2).norm(), 2 * n)));
        }
        Ok(w2)
    }

    fn ef_products(&self) -> (Complex, Complex) {
        let q = self.q;
        let sq = q.get().sqrt();
        let l = LAMBDA0;
        let c = |x: f64| Complex::new(x, 0.0);
        match self.regime {
            Regime::Case1 { psi, r } => {
                let ep = Complex::from_polar(1.0, psi);
                let e = qpoch_inf(i() * l * sq * ep, q)
                    * qpoch_inf(-i() * l * sq * ep.conj(), q)
                    * qpoch_inf(c(r / sq / l), q)
                    * qpoch_inf(c(q.get() * sq * l / r), q);
                let f = qpoch_inf(-i() * l * sq * ep, q)
                    * qpoch_inf(i() * l * sq * ep.conj(), q)
                    * qpoch_inf(c(-r / sq / l), q)
                    * qpoch_inf(c(-q.get() * sq * l / r), q);
                (e, f)
            }
            Regime::Case2 { s, t } => {
                let qv = q.get();
                let p = qpoch_inf(c(s * l), q)
                    * qpoch_inf(c(l * qv / s), q)
                    * qpoch_inf(c(-s * t / (qv * l)), q)
                    * qpoch_inf(c(-qv * qv * l / (s * t)), q);
                let m = qpoch_inf(c(-s * l), q)
                    * qpoch_inf(c(-l * qv / s), q)
                    * qpoch_inf(c(s * t / (qv * l)), q)
                    * qpoch_inf(c(qv * qv * l / (s * t)), q);
                // the defect condition selects E = m, F = p in this regime
                (m, p)
            }
        }
    }

    /// Raw `(E, F)` as complex numbers, before discarding the (vanishing)
    /// imaginary parts.
    pub fn extension_products(&self) -> (Complex, Complex) {
        self.ef_products()
    }

    /// Extension data for angle `θ` from the defect condition.
    pub fn extension(&self, theta: f64) -> ExtensionCoeffs {
        let (e, f) = self.ef_products();
        ExtensionCoeffs::from_ef(theta, e.re, f.re, Normalization::Lemma)
    }

    /// The reduced normalization; only in the q-exponential case.
    pub fn extension_reduced(&self, theta_angle: f64) -> Result<ExtensionCoeffs> {
        let Regime::Case1 { r, .. } = self.regime else {
            return Err(Error::InvalidRegime("reduced extension data needs case 1 with psi = 0".into()));
        };
        if !self.regime.is_exponential_case() {
            return Err(Error::InvalidRegime("reduced extension data needs psi = 0".into()));
        }
        let x = r / self.q.get().sqrt() / LAMBDA0;
        let e = theta(Complex::new(x, 0.0), self.q)?.re;
        let f = theta(Complex::new(-x, 0.0), self.q)?.re;
        Ok(ExtensionCoeffs::from_ef(theta_angle, e, f, Normalization::Reduced))
    }

    /// Relative residual of
    /// `B̄{e^{iθ}d(iλ₀;−a) + e^{-iθ}d(−iλ₀;−a)} − Ā{e^{iθ}d(iλ₀;a) + e^{-iθ}d(−iλ₀;a)}`.
    pub fn defect_residual(&self, ext: &ExtensionCoeffs) -> Result<f64> {
        let (a, t, q) = (self.params.a(), self.params.t(), self.q);
        let (yp, ym) = (i() * LAMBDA0, -i() * LAMBDA0);
        let (ep, em) = (Complex::from_polar(1.0, ext.theta), Complex::from_polar(1.0, -ext.theta));
        let minus = ext.b().conj() * (ep * d_fn(yp, -a, t, q)? + em * d_fn(ym, -a, t, q)?);
        let plus = ext.a().conj() * (ep * d_fn(yp, a, t, q)? + em * d_fn(ym, a, t, q)?);
        let scale = minus.norm().max(plus.norm());
        Ok(if scale == 0.0 { 0.0 } else { (minus - plus).norm() / scale })
    }

    /// `Ψ(z) = e^{iγ} α F(y)` with `|y| < 1`.
    pub fn big_psi(&self, sp: &SpectralParam, lo: i32, hi: i32) -> Result<L2Vector> {
        if sp.y().norm() >= 1.0 {
            return Err(Error::DomainViolation(format!("Psi needs |y| < 1, got |y| = {}", sp.y().norm())));
        }
        Ok(self.alpha_f(sp.y(), lo, hi)?.scale(Complex::from_polar(1.0, self.gamma)))
    }

    /// `ψ(z) = A αu(z) + B αv(z)`.
    pub fn psi(&self, ext: &ExtensionCoeffs, sp: &SpectralParam, lo: i32, hi: i32) -> Result<L2Vector> {
        let u = self.alpha_u(sp, lo, hi)?;
        let v = self.alpha_v(sp, lo, hi)?;
        Ok(u.scale(ext.a()).add_scaled(ext.b(), &v))
    }

    /// `ψ_k(z)` rebuilt as `e^{-iγ}/θ(t) (X(z) + conj(X(z̄)))` with
    /// `X = e^{iγ} θ(t) A α u`; uses only the `u` family.
    pub fn psi_via_conjugation(&self, ext: &ExtensionCoeffs, sp: &SpectralParam, lo: i32, hi: i32) -> Result<L2Vector> {
        let g = Complex::from_polar(1.0, self.gamma);
        let s = g * self.theta_t * ext.a();
        let x = self.alpha_u(sp, lo, hi)?.scale(s);
        let xb = self.alpha_u(&sp.conj(), lo, hi)?.scale(s).conj();
        Ok(x.add_scaled(Complex::new(1.0, 0.0), &xb).scale(g.conj() / self.theta_t))
    }

    /// `h(y) = A c(y;a) + B c(y;−a)`; its zeros with `|y| > 1` are the point spectrum.
    pub fn jost(&self, ext: &ExtensionCoeffs, y: Complex) -> Result<Complex> {
        let (a, t, q) = (self.params.a(), self.params.t(), self.q);
        Ok(ext.a() * c_fn(y, a, t, q)? + ext.b() * c_fn(y, -a, t, q)?)
    }

    /// `ψ(x₀) = h(1/y₀) α F(1/y₀)` at a point with `|y₀| > 1`; the `u`, `v` sums
    /// cancel catastrophically there, this form does not.
    pub fn psi_at_mass_point(&self, ext: &ExtensionCoeffs, y0: f64, lo: i32, hi: i32) -> Result<L2Vector> {
        let yi = Complex::new(1.0 / y0, 0.0);
        Ok(self.alpha_f(yi, lo, hi)?.scale(self.jost(ext, yi)?))
    }

    /// `[Ψ(z), conj(ψ(z̄))] = e^{iγ} conj(h(1/ȳ)) ½(1/y − y)`.
    pub fn green_wronskian(&self, ext: &ExtensionCoeffs, sp: &SpectralParam) -> Result<Complex> {
        let y = sp.y();
        let h = self.jost(ext, y.conj().inv())?;
        Ok(Complex::from_polar(1.0, self.gamma) * h.conj() * 0.5 * (y.inv() - y))
    }

    fn green_parts(&self, ext: &ExtensionCoeffs, z: Complex, lo: i32, hi: i32) -> Result<(L2Vector, L2Vector, Complex)> {
        if z.im == 0.0 {
            return Err(Error::DomainViolation(format!("Green kernel needs non-real z, got {z}")));
        }
        let sp = SpectralParam::from_z(z);
        let w = self.green_wronskian(ext, &sp)?;
        let big = self.big_psi(&sp, lo, hi)?;
        let small = self.psi(ext, &sp.conj(), lo, hi)?.conj();
        // One factor grows where the other decays, so compare with same-index products.
        let scale = big.values().iter().zip(small.values()).map(|(b, s)| (b * s).norm()).fold(0.0, f64::max);
        if !(w.norm() > 1e-14 * scale.max(1e-300)) {
            return Err(Error::SingularWronskian(w.norm()));
        }
        Ok((big, small, w))
    }

    /// `G_{k,l}(z)`.
    pub fn green_kernel(&self, ext: &ExtensionCoeffs, z: Complex, k: i32, l: i32) -> Result<Complex> {
        let (lo, hi) = (k.min(l), k.max(l));
        let (big, small, w) = self.green_parts(ext, z, lo, hi)?;
        Ok(big.get(lo) * small.get(hi) / w)
    }

    /// `(R(z)ξ)_k = Σ_l ξ_l G_{k,l}(z)` for `k = lo..=hi`.
    pub fn resolvent_apply(&self, ext: &ExtensionCoeffs, z: Complex, xi: &L2Vector, lo: i32, hi: i32) -> Result<L2Vector> {
        let (a, b) = (lo.min(xi.start()), hi.max(xi.end()));
        let (big, small, w) = self.green_parts(ext, z, a, b)?;
        let vals = (lo..=hi)
            .map(|k| {
                xi.iter()
                    .map(|(l, x)| {
                        let (m, n) = (k.min(l), k.max(l));
                        x * big.get(m) * small.get(n)
                    })
                    .sum::<Complex>()
                    / w
            })
            .collect();
        Ok(L2Vector::new(lo, vals))
    }

    /// `⟨R(z)ξ, η⟩` through the symmetric double sum
    /// `W⁻¹ Σ_{k≤l} Ψ_k φ_l (ξ_l η̄_k + ξ_k η̄_l)(1 − ½δ_{kl})`, `φ = conj(ψ(z̄))`.
    pub fn resolvent_form(&self, ext: &ExtensionCoeffs, z: Complex, xi: &L2Vector, eta: &L2Vector) -> Result<Complex> {
        let lo = xi.start().min(eta.start());
        let hi = xi.end().max(eta.end());
        let (big, small, w) = self.green_parts(ext, z, lo, hi)?;
        let mut s = Complex::new(0.0, 0.0);
        for k in lo..=hi {
            for l in k..=hi {
                let f = if k == l { 0.5 } else { 1.0 };
                s += big.get(k) * small.get(l) * (xi.get(l) * eta.get(k).conj() + xi.get(k) * eta.get(l).conj()) * f;
            }
        }
        Ok(s / w)
    }

    /// `[conj(ψ(z̄)), e^{iθ}Ψ(i) + e^{-iθ}Ψ(−i)]_N`, which vanishes as `N → ∞`
    /// exactly when `ψ` satisfies the boundary condition of the extension.
    pub fn boundary_wronskian(&self, ext: &ExtensionCoeffs, z: Complex, n: i32) -> Result<Complex> {
        let sp = SpectralParam::from_z(z);
        let phi = self.psi(ext, &sp.conj(), n, n + 1)?.conj();
        let g = Complex::from_polar(1.0, self.gamma);
        let pp = self.alpha_f(i() * LAMBDA0, n, n + 1)?;
        let pm = self.alpha_f(-i() * LAMBDA0, n, n + 1)?;
        let x = pp
            .scale(g * Complex::from_polar(1.0, ext.theta))
            .add_scaled(g * Complex::from_polar(1.0, -ext.theta), &pm);
        self.wronskian(&phi, &x, n)
    }
}

/// `(i·σ)^k` for `σ = ±1`.
fn unit_power(sign: f64, k: i32) -> Complex {
    let base = Complex::new(0.0, sign);
    match k.rem_euclid(4) {
        0 => Complex::new(1.0, 0.0),
        1 => base,
        2 => Complex::new(-1.0, 0.0),
        _ => -base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QBase {
        QBase::new(0.5).unwrap()
    }

    fn ops() -> [JacobiOperator; 2] {
        [
            JacobiOperator::new(Regime::case1(0.4, 3.0).unwrap(), q()).unwrap(),
            JacobiOperator::new(Regime::case2(1.5, -0.4).unwrap(), q()).unwrap(),
        ]
    }

    #[test]
    fn regime_validation() {
        assert!(Regime::case1(0.3, 0.0).is_err());
        // t = i r e^{-i psi} is real positive for psi = pi/2, r > 0
        assert!(Regime::case1(FRAC_PI_2, 2.0).is_err());
        assert!(Regime::case1(FRAC_PI_2, -2.0).is_ok());
        assert!(Regime::case2(1.0, 0.3).is_err());
        assert!(Regime::case2(0.0, -0.3).is_err());
    }

    #[test]
    fn coefficient_forms_agree() {
        for op in ops() {
            for k in -20..=20 {
                let (a1, a2) = (op.coeff_a(k), op.coeff_a_alt(k));
                assert!(a1 > 0.0);
                assert!((a1 - a2).abs() <= 1e-13 * a1, "a_{k}: {a1} vs {a2}");
                let (b1, b2) = (op.coeff_alpha(k), op.coeff_alpha_alt(k));
                assert!((b1 - b2).norm() <= 1e-12 * b1.norm(), "alpha_{k}: {b1} vs {b2}");
            }
        }
    }

    #[test]
    fn symmetrization_is_consistent() {
        for op in ops() {
            for k in -10..=10 {
                let fw = op.symmetrized_forward(k);
                assert!((fw - op.coeff_a(k)).norm() <= 1e-12 * op.coeff_a(k));
                let bw = op.symmetrized_backward(k);
                assert!((bw - op.coeff_a(k - 1)).norm() <= 1e-12 * op.coeff_a(k - 1));
                let ratio = (op.coeff_alpha(k - 1) / op.coeff_alpha(k)).norm_sqr();
                let rhs = op.symmetrization_ratio(k);
                assert!((rhs - ratio).norm() <= 1e-12 * ratio);
            }
        }
    }

    #[test]
    fn alpha_range_matches_pointwise() {
        for op in ops() {
            let r = op.alpha_range(-7, 6);
            for (j, k) in (-7..=6).enumerate() {
                assert!((r[j] - op.coeff_alpha(k)).norm() <= 1e-13 * r[j].norm());
            }
        }
    }

    #[test]
    fn lambda0_maps_to_i() {
        // algebraically exact: λ₀² − 1 = 2λ₀
        let w = Complex::new(0.0, LAMBDA0);
        let z = 0.5 * (w + w.inv());
        assert!(z.re == 0.0 && (z.im - 1.0).abs() <= 4.0 * f64::EPSILON);
        assert!((LAMBDA0 * LAMBDA0 - 1.0 - 2.0 * LAMBDA0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn extension_products_real() {
        for op in ops() {
            let (e, f) = op.extension_products();
            assert!(e.im.abs() <= 1e-12 * e.norm());
            assert!(f.im.abs() <= 1e-12 * f.norm());
            let ext = op.extension(0.9);
            assert_eq!(ext.b(), ext.a().conj());
        }
    }

    #[test]
    fn green_kernel_symmetric() {
        for op in ops() {
            let ext = op.extension(0.7);
            let z = Complex::new(0.4, 0.9);
            let g1 = op.green_kernel(&ext, z, -2, 3).unwrap();
            let g2 = op.green_kernel(&ext, z, 3, -2).unwrap();
            assert_eq!(g1, g2);
            assert!(op.green_kernel(&ext, Complex::new(0.4, 0.0), 0, 0).is_err());
        }
    }

    #[test]
    fn l2vector_basics() {
        let x = L2Vector::from_real(-1, &[1.0, 2.0, 3.0]);
        assert_eq!(x.end(), 1);
        assert_eq!(x.get(5), Complex::new(0.0, 0.0));
        assert!((x.norm() - 14f64.sqrt()).abs() < 1e-15);
        let y = x.add_scaled(Complex::new(2.0, 0.0), &L2Vector::basis(3));
        assert_eq!(y.start(), -1);
        assert_eq!(y.end(), 3);
        assert_eq!(y.get(3), Complex::new(2.0, 0.0));
    }
}
