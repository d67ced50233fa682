//! The generalized Fourier transform of an extension, integration against its
//! spectral measure (orthogonality, inversion, isometry), and the q-exponential.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eigenfunctions::{u_range, EigenParams, SpectralParam};
use crate::error::{Error, Result};
use crate::jacobi::{ExtensionCoeffs, JacobiOperator, L2Vector, Regime};
use crate::qcore::{qpoch_inf, theta, Complex, QBase};
use crate::quadrature::{endpoint_graded_edges, AdaptiveRule};
use crate::spectrum::{self, MassPoint};

/// Tuning of [`integrate_measure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    /// Absolute tolerance of the continuous part, per output entry.
    pub quad_tol: f64,
    pub quad_degree: usize,
    pub grading_levels: i32,
    /// A window of mass points below this (every entry) ends the discrete sum.
    pub window_tol: f64,
    /// First discrete window is `1 < |x| ≤ first_window`.
    pub first_window: f64,
    /// Give up (`WindowTooNarrow`) beyond this `|x|`.
    pub max_window: f64,
    /// Sum mass points only up to this `|x|`, without a convergence test.
    pub truncate_at: Option<f64>,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            quad_tol: 1e-9,
            quad_degree: 20,
            grading_levels: 8,
            window_tol: 1e-9,
            first_window: 10.0,
            max_window: 1e15,
            truncate_at: None,
        }
    }
}

/// Result of integrating a vector of functionals of `ψ` against the measure.
#[derive(Debug, Clone)]
pub struct MeasureIntegral {
    pub continuous: Vec<Complex>,
    pub discrete: Vec<Complex>,
    pub points: Vec<MassPoint>,
    /// Largest `|x|` scanned for mass points.
    pub reach: f64,
}

impl MeasureIntegral {
    pub fn total(&self) -> Vec<Complex> {
        self.continuous.iter().zip(&self.discrete).map(|(c, d)| c + d).collect()
    }
}

/// `ψ(x)` on `lo..=hi` for real `x ∉ {±1}`: the `u`, `v` combination inside
/// `(−1, 1)`, and `h(y)αF(y) + h(1/y)αF(1/y)` with `|y| > 1` outside.
pub fn psi_at(op: &JacobiOperator, ext: &ExtensionCoeffs, x: f64, lo: i32, hi: i32) -> Result<L2Vector> {
    if x.abs() < 1.0 {
        let sp = SpectralParam::from_z(Complex::new(x, 0.0));
        return op.psi(ext, &sp, lo, hi);
    }
    if x.abs() == 1.0 {
        return Err(Error::DomainViolation("psi at x = +-1 is not used by the measure".into()));
    }
    let y = Complex::new(spectrum::large_root(x), 0.0);
    let yi = y.inv();
    let far = op.alpha_f(y, lo, hi)?.scale(op.jost(ext, y)?);
    let near = op.alpha_f(yi, lo, hi)?.scale(op.jost(ext, yi)?);
    Ok(far.add_scaled(Complex::new(1.0, 0.0), &near))
}

/// Maximum that lets a NaN through instead of discarding it.
pub(crate) fn nan_max<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// `(F_θ ξ)(x) = Σ_k ξ_k conj(ψ_k(x))`.
pub fn fourier_theta(op: &JacobiOperator, ext: &ExtensionCoeffs, xi: &L2Vector, x: f64) -> Result<Complex> {
    let psi = psi_at(op, ext, x, xi.start(), xi.end())?;
    Ok(pairing(xi, &psi))
}

fn pairing(xi: &L2Vector, psi: &L2Vector) -> Complex {
    xi.iter().map(|(k, v)| v * psi.get(k).conj()).sum()
}

/// Weight `w` with `⟨E({x₀})e_l, e_k⟩ = ψ_k(x₀) conj(ψ_l(x₀)) w`.
fn point_weight(p: &MassPoint) -> Complex {
    (p.jost_inverse * p.y0 * p.jost_derivative.conj()).inv()
}

/// `∫ f(x, ψ(x)) dμ_θ(x)` where `dμ_θ` is the continuous density in `χ`
/// (`x = cos χ`) plus point masses, `ψ` taken on `lo..=hi`.
pub fn integrate_measure<F>(
    op: &JacobiOperator,
    ext: &ExtensionCoeffs,
    lo: i32,
    hi: i32,
    opts: &MeasureOptions,
    f: F,
) -> Result<MeasureIntegral>
where
    F: Fn(f64, &L2Vector) -> Result<Vec<Complex>>,
{
    let rule = AdaptiveRule::new(opts.quad_degree, opts.quad_tol);
    let integrand = |chi: f64| -> Result<Vec<Complex>> {
        let y = Complex::from_polar(1.0, chi);
        let sp = SpectralParam::from_y(y)?;
        let psi = op.psi(ext, &sp, lo, hi)?;
        let w = 1.0 / (2.0 * PI * op.jost(ext, y)?.norm_sqr());
        Ok(f(chi.cos(), &psi)?.into_iter().map(|v| v * w).collect())
    };
    let continuous = rule.integrate(&integrand, &endpoint_graded_edges(opts.grading_levels))?;
    let n = continuous.len();

    let mut discrete = vec![Complex::new(0.0, 0.0); n];
    let mut points = Vec::new();
    let growth = (2.0 / op.q().get().powi(2)).max(4.0);
    let mut inner = 1.0 + 1e-10;
    let mut outer = opts.truncate_at.map_or(opts.first_window, |x| x.min(opts.first_window));
    let mut quiet = 0;
    'windows: loop {
        let mut piece = vec![Complex::new(0.0, 0.0); n];
        for (a, b) in [(inner, outer), (-outer, -inner)] {
            for p in spectrum::locate_discrete(op, ext, a, b)? {
                if p.x0.abs() <= inner && inner > 1.0 + 1e-10 {
                    continue;
                }
                let psi = op.psi_at_mass_point(ext, p.y0, lo, hi)?;
                let w = point_weight(&p);
                let values = f(p.x0, &psi)?;
                if !w.is_finite() || values.iter().any(|v| !v.is_finite()) {
                    // far out the Jost factors leave the double range; by then the
                    // previous window must already have been negligible
                    if quiet >= 1 {
                        break 'windows;
                    }
                    return Err(Error::NonConvergence(format!("mass weight out of range at x0 = {}", p.x0)));
                }
                for (s, v) in piece.iter_mut().zip(values) {
                    *s += v * w;
                }
                points.push(p);
            }
        }
        let size = piece.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (s, v) in discrete.iter_mut().zip(piece) {
            *s += v;
        }
        quiet = if size < opts.window_tol { quiet + 1 } else { 0 };
        if quiet >= 2 || opts.truncate_at.is_some_and(|x| outer >= x) {
            break;
        }
        if outer >= opts.max_window {
            return Err(Error::WindowTooNarrow(format!(
                "mass points beyond |x| = {outer} still contribute {size:e}"
            )));
        }
        inner = outer;
        outer *= growth;
    }
    points.sort_by(|a, b| a.x0.partial_cmp(&b.x0).expect("finite eigenvalues"));
    Ok(MeasureIntegral { continuous, discrete, points, reach: outer })
}

/// `G_{kl} = ∫ ψ_k conj(ψ_l) dμ_θ` for `k, l ∈ lo..=hi`.
#[derive(Debug, Clone)]
pub struct OrthogonalityMatrix {
    pub lo: i32,
    pub hi: i32,
    /// Row-major.
    pub entries: Vec<Complex>,
    pub mass_points: usize,
}

/// One CSV row of an orthogonality matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MatrixEntry {
    pub k: i32,
    pub l: i32,
    pub re: f64,
    pub im: f64,
    pub abs_err: f64,
}

impl OrthogonalityMatrix {
    fn dim(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn get(&self, k: i32, l: i32) -> Complex {
        self.entries[(k - self.lo) as usize * self.dim() + (l - self.lo) as usize]
    }

    pub fn rows(&self) -> Vec<MatrixEntry> {
        let mut out = Vec::with_capacity(self.entries.len());
        for k in self.lo..=self.hi {
            for l in self.lo..=self.hi {
                let g = self.get(k, l);
                let delta = if k == l { 1.0 } else { 0.0 };
                out.push(MatrixEntry { k, l, re: g.re, im: g.im, abs_err: (g - delta).norm() });
            }
        }
        out
    }

    /// `max |G_{kl} − δ_{kl}|`.
    pub fn max_deviation(&self) -> f64 {
        nan_max(self.rows().iter().map(|e| e.abs_err))
    }

    /// `max |G_{kl} − conj(G_{lk})|`.
    pub fn hermitian_defect(&self) -> f64 {
        nan_max((self.lo..=self.hi).flat_map(|k| (self.lo..=self.hi).map(move |l| (k, l))).map(|(k, l)| {
            (self.get(k, l) - self.get(l, k).conj()).norm()
        }))
    }
}

pub fn orthogonality_matrix(
    op: &JacobiOperator,
    ext: &ExtensionCoeffs,
    lo: i32,
    hi: i32,
    opts: &MeasureOptions,
) -> Result<OrthogonalityMatrix> {
    if lo > hi || lo < -8 || hi > 8 {
        return Err(Error::DomainViolation(format!("index range {lo}..={hi} must lie in [-8, 8]")));
    }
    let res = integrate_measure(op, ext, lo, hi, opts, |_, psi| {
        let mut v = Vec::with_capacity(psi.values().len().pow(2));
        for k in lo..=hi {
            for l in lo..=hi {
                v.push(psi.get(k) * psi.get(l).conj());
            }
        }
        Ok(v)
    })?;
    Ok(OrthogonalityMatrix { lo, hi, entries: res.total(), mass_points: res.points.len() })
}

/// `ξ_l = ∫ (F_θξ)(x) ψ_l(x) dμ_θ(x)` for `l ∈ lo..=hi`, given an evaluator of
/// the transform.
pub fn inverse_transform<G>(
    op: &JacobiOperator,
    ext: &ExtensionCoeffs,
    transform: G,
    lo: i32,
    hi: i32,
    opts: &MeasureOptions,
) -> Result<L2Vector>
where
    G: Fn(f64) -> Result<Complex>,
{
    let res = integrate_measure(op, ext, lo, hi, opts, |x, psi| {
        let fx = transform(x)?;
        Ok((lo..=hi).map(|l| fx * psi.get(l)).collect())
    })?;
    Ok(L2Vector::new(lo, res.total()))
}

/// Round trip `ξ → F_θ ξ → ξ` with the transform taken for `forward` and the
/// inversion for `backward`; returns the reconstruction on `lo..=hi`.
pub fn round_trip(
    op: &JacobiOperator,
    forward: &ExtensionCoeffs,
    backward: &ExtensionCoeffs,
    xi: &L2Vector,
    lo: i32,
    hi: i32,
    opts: &MeasureOptions,
) -> Result<L2Vector> {
    let (a, b) = (lo.min(xi.start()), hi.max(xi.end()));
    let same = forward == backward;
    let res = integrate_measure(op, backward, a, b, opts, |x, psi| {
        // at mass points of `backward` the forward ψ differs unless θ agrees
        let fx = if same { pairing(xi, psi) } else { fourier_theta(op, forward, xi, x)? };
        Ok((lo..=hi).map(|l| fx * psi.get(l)).collect())
    })?;
    Ok(L2Vector::new(lo, res.total()))
}

/// Reconstruction error when the transform is taken for `forward` but inverted
/// with the measure of `backward`. The full discrete sum diverges when the two
/// differ, so the mass points are cut off at `|x| ≤ cutoff`.
pub fn mismatched_inversion_error(
    op: &JacobiOperator,
    forward: &ExtensionCoeffs,
    backward: &ExtensionCoeffs,
    xi: &L2Vector,
    cutoff: f64,
    opts: &MeasureOptions,
) -> Result<f64> {
    let opts = MeasureOptions { truncate_at: Some(cutoff), ..*opts };
    let rec = round_trip(op, forward, backward, xi, xi.start(), xi.end(), &opts)?;
    Ok(reconstruction_error(xi, &rec))
}

/// `max_l |reconstructed_l − ξ_l|`.
pub fn reconstruction_error(xi: &L2Vector, rec: &L2Vector) -> f64 {
    nan_max(rec.iter().map(|(l, v)| (v - xi.get(l)).norm()))
}

/// `(⟨ξ, η⟩, ∫ F_θξ conj(F_θη) dμ, ⟨Lξ, η⟩, ∫ x F_θξ conj(F_θη) dμ)`.
pub fn isometry_and_spectral_identity(
    op: &JacobiOperator,
    ext: &ExtensionCoeffs,
    xi: &L2Vector,
    eta: &L2Vector,
    opts: &MeasureOptions,
) -> Result<[Complex; 4]> {
    let lo = xi.start().min(eta.start());
    let hi = xi.end().max(eta.end());
    let res = integrate_measure(op, ext, lo, hi, opts, |x, psi| {
        let p = pairing(xi, psi) * pairing(eta, psi).conj();
        Ok(vec![p, x * p])
    })?;
    let t = res.total();
    Ok([xi.inner(eta), t[0], op.apply(xi).inner(eta), t[1]])
}

/// Arguments of `ℰ_q(z; t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QExponentialParams {
    pub q: QBase,
    pub z: Complex,
    pub t: Complex,
}

/// `ℰ_q(z;t) = (−t; q^{1/2})_∞/(qt²; q²)_∞ · ₂φ₁(q^{1/4}y, q^{1/4}/y; −q^{1/2}; q^{1/2}, −t)`,
/// `z = ½(y + 1/y)`. The ₂φ₁ is the `k = 0` value of `u` at base `q^{1/2}` with
/// `a = q^{1/4}` and `t → −t`, which also continues it to `|t| ≥ 1`.
pub fn q_exponential(params: QExponentialParams) -> Result<Complex> {
    let QExponentialParams { q, z, t } = params;
    if t == Complex::new(0.0, 0.0) {
        return Ok(Complex::new(1.0, 0.0));
    }
    let half = q.sqrt();
    let den = qpoch_inf(q.get() * t * t, q.squared());
    if den.norm() < 1e-300 {
        return Err(Error::SingularParameter(format!("(q t^2; q^2) vanishes at t = {t}")));
    }
    let pre = qpoch_inf(-t, half) / den;
    let p = EigenParams::new(Complex::new(q.get().powf(0.25), 0.0), -t, half)?;
    let sp = SpectralParam::from_z(z);
    Ok(pre * u_range(&p, &sp, 0, 0)?[0])
}

/// Largest relative error of `ℰ_q(z; ½(1−q)λ)` against `e^{λz}` over the given
/// `(λ, z)` pairs.
pub fn q_limit_error(q: QBase, samples: &[(f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(lambda, z) in samples {
        let e = q_exponential(QExponentialParams {
            q,
            z: Complex::new(z, 0.0),
            t: Complex::new(0.5 * (1.0 - q.get()) * lambda, 0.0),
        })?;
        let exact = (lambda * z).exp();
        worst = nan_max([worst, (e - exact).norm() / exact]);
    }
    Ok(worst)
}

/// Samples with `λz ∈ [−1, 1]` for `λ ∈ {1, 2, −1.5}`.
pub fn q_limit_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for lambda in [1.0f64, 2.0, -1.5] {
        for j in 0..9 {
            let z = (-1.0 + 2.0 * j as f64 / 8.0) / lambda.abs();
            out.push((lambda, z));
        }
    }
    out
}

/// `ψ_k(x)` in the q-exponential case rebuilt from `ℰ_{q²}(x; −irq^k)`:
/// `2e^{-iγ}|A|/θ(ir) · Re[q^{k/2} e^{i(φ_k+γ+arg A)} θ(ir) (−r²q^{2+2k}; q⁴)_∞ /
/// (irq^k; q)_∞ · ℰ_{q²}(x; −irq^k)]`.
pub fn psi_exponential_form(op: &JacobiOperator, ext: &ExtensionCoeffs, x: f64, k: i32) -> Result<Complex> {
    let Regime::Case1 { r, .. } = op.regime() else {
        return Err(Error::InvalidRegime("the q-exponential form needs case 1".into()));
    };
    if !op.regime().is_exponential_case() {
        return Err(Error::InvalidRegime("the q-exponential form needs psi = 0".into()));
    }
    if x.abs() >= 1.0 {
        return Err(Error::DomainViolation(format!("q-exponential form checked on -1 < x < 1, got {x}")));
    }
    let q = op.q();
    let ir = Complex::new(0.0, r);
    let th = theta(ir, q)?;
    let qk = q.pow(k);
    let e = q_exponential(QExponentialParams { q: q.squared(), z: Complex::new(x, 0.0), t: -ir * qk })?;
    let inner = Complex::from_polar(q.powf(0.5 * k as f64), op.phase(k) + op.gamma() + ext.a().arg())
        * th
        * qpoch_inf(Complex::new(-r * r * q.pow(2 + 2 * k), 0.0), q.squared().squared())
        / qpoch_inf(ir * qk, q)
        * e;
    Ok(Complex::from_polar(2.0 * ext.a().norm(), -op.gamma()) / th * inner.re)
}

/// With `w_k = (−r²q^{2+2k}; q⁴)_∞ / (irq^k; q)_∞ · ℰ_{q²}(z; −irq^k)`, the
/// largest normalized residual of the eigenvalue recurrence for `k ∈ lo..=hi`.
pub fn exponential_recurrence_residual(op: &JacobiOperator, x: Complex, lo: i32, hi: i32) -> Result<f64> {
    let Regime::Case1 { r, .. } = op.regime() else {
        return Err(Error::InvalidRegime("needs the q-exponential case".into()));
    };
    let q = op.q();
    let ir = Complex::new(0.0, r);
    let w = (lo - 1..=hi + 1)
        .map(|k| {
            let qk = q.pow(k);
            let e = q_exponential(QExponentialParams { q: q.squared(), z: x, t: -ir * qk })?;
            Ok(qpoch_inf(Complex::new(-r * r * q.pow(2 + 2 * k), 0.0), q.squared().squared()) / qpoch_inf(ir * qk, q) * e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::eigenfunctions::max_recurrence_residual(&w, lo - 1, op.params(), x))
}
