//! Spectral measure of one self-adjoint extension: absolutely continuous part on
//! `[−1, 1]` and point masses at the real zeros of the Jost function
//! `h(y) = A c(y;a) + B c(y;−a)` with `|y| > 1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{ExtensionCoeffs, JacobiOperator, L2Vector, Regime};
use crate::qcore::{qpoch_inf, theta, Complex, QBase};

/// Log-spacing of the root scan, as a fraction of `ln(1/q)`.
const SCAN_STEPS_PER_PERIOD: f64 = 64.0;
const MAX_SCAN_POINTS: usize = 2_000_000;
const DERIVATIVE_STEP: f64 = 1e-6;
const DERIVATIVE_CHECK_STEP: f64 = 1e-7;
const SIMPLE_ZERO_TOL: f64 = 1e-12;

/// `1/(2π |h(e^{iχ})|²)` for `0 < χ < π`.
pub fn continuous_density(op: &JacobiOperator, ext: &ExtensionCoeffs, chi: f64) -> Result<f64> {
    if !(chi > 0.0 && chi < PI) {
        return Err(Error::DomainViolation(format!("density needs 0 < chi < pi, got {chi}")));
    }
    let h = op.jost(ext, Complex::from_polar(1.0, chi))?;
    Ok(1.0 / (2.0 * PI * h.norm_sqr()))
}

/// The Jost function through the factorization available in the q-exponential
/// case: `(q^{1/2}/y, −q^{1/2}/y; q)_∞ / ((−q;q)_∞ θ(ir) (y^{-2};q)_∞)
/// · (θ(y q^{1/2} ir) A + θ(−y q^{1/2} ir) B)`.
pub fn jost_factorized(op: &JacobiOperator, ext: &ExtensionCoeffs, y: Complex) -> Result<Complex> {
    let Regime::Case1 { r, .. } = op.regime() else {
        return Err(Error::InvalidRegime("factorized Jost function needs the q-exponential case".into()));
    };
    if !op.regime().is_exponential_case() {
        return Err(Error::InvalidRegime("factorized Jost function needs psi = 0".into()));
    }
    let q = op.q();
    let sq = q.get().sqrt();
    let ir = Complex::new(0.0, r);
    let pre = qpoch_inf(sq / y, q) * qpoch_inf(-sq / y, q)
        / (qpoch_inf(Complex::new(-q.get(), 0.0), q) * theta(ir, q)? * qpoch_inf(y.powi(-2), q));
    Ok(pre * (theta(y * sq * ir, q)? * ext.a() + theta(-y * sq * ir, q)? * ext.b()))
}

/// Density through [`jost_factorized`].
pub fn continuous_density_factorized(op: &JacobiOperator, ext: &ExtensionCoeffs, chi: f64) -> Result<f64> {
    if !(chi > 0.0 && chi < PI) {
        return Err(Error::DomainViolation(format!("density needs 0 < chi < pi, got {chi}")));
    }
    let h = jost_factorized(op, ext, Complex::from_polar(1.0, chi))?;
    Ok(1.0 / (2.0 * PI * h.norm_sqr()))
}

/// One point of the discrete spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassPoint {
    /// Eigenvalue `x₀ = ½(y₀ + 1/y₀)`.
    pub x0: f64,
    /// Zero of the Jost function, `|y₀| > 1`.
    pub y0: f64,
    /// `h'(y₀)`.
    #[serde(skip)]
    pub jost_derivative: Complex,
    /// `h(1/y₀)`.
    #[serde(skip)]
    pub jost_inverse: Complex,
}

/// `y` with `|y| ≥ 1` and `½(y + 1/y) = x`, for `|x| ≥ 1`.
pub fn large_root(x: f64) -> f64 {
    let s = (x * x - 1.0).max(0.0).sqrt();
    if x >= 0.0 {
        x + s
    } else {
        x - s
    }
}

/// Scale of `h` at `y` without the cancellation between its two terms.
fn jost_scale(op: &JacobiOperator, ext: &ExtensionCoeffs, y: Complex) -> Result<f64> {
    let p = op.params();
    let c1 = crate::eigenfunctions::c_fn(y, p.a(), p.t(), op.q())?;
    let c2 = crate::eigenfunctions::c_fn(y, -p.a(), p.t(), op.q())?;
    Ok((ext.a() * c1).norm().max((ext.b() * c2).norm()))
}

fn central_difference(op: &JacobiOperator, ext: &ExtensionCoeffs, y0: f64, step: f64) -> Result<Complex> {
    let h = step * y0.abs();
    let up = op.jost(ext, Complex::new(y0 + h, 0.0))?;
    let down = op.jost(ext, Complex::new(y0 - h, 0.0))?;
    Ok((up - down) / (2.0 * h))
}

/// `h'(y₀)` by central differences, validated against a smaller step.
pub fn jost_derivative(op: &JacobiOperator, ext: &ExtensionCoeffs, y0: f64) -> Result<Complex> {
    let d1 = central_difference(op, ext, y0, DERIVATIVE_STEP)?;
    let d2 = central_difference(op, ext, y0, DERIVATIVE_CHECK_STEP)?;
    let scale = jost_scale(op, ext, Complex::new(y0, 0.0))?;
    if (d1.norm() * y0.abs()) < SIMPLE_ZERO_TOL * scale {
        return Err(Error::NonSimpleZero(y0));
    }
    if (d1 - d2).norm() > 1e-7 * d1.norm() {
        return Err(Error::ValidationFailed(format!(
            "derivative at y0 = {y0} unstable: {d1} vs {d2}"
        )));
    }
    Ok(d1)
}

/// Rotation `β` such that `e^{iβ} h(y)` is real along the real axis.
fn real_rotation(samples: &[Complex]) -> Complex {
    let s: Complex = samples.iter().filter(|h| h.norm() > 0.0 && h.norm().is_finite()).map(|h| h * h / h.norm()).sum();
    Complex::from_polar(1.0, -0.5 * s.arg())
}

/// All zeros of `h` on the real `y`-interval corresponding to `x ∈ [x_min, x_max]`,
/// a window that must lie on one side of `[−1, 1]`.
pub fn locate_discrete(op: &JacobiOperator, ext: &ExtensionCoeffs, x_min: f64, x_max: f64) -> Result<Vec<MassPoint>> {
    if !(x_min < x_max) || !(x_min > 1.0 || x_max < -1.0) {
        return Err(Error::DomainViolation(format!(
            "window [{x_min}, {x_max}] must lie inside (1, inf) or (-inf, -1)"
        )));
    }
    let sign = x_min.signum();
    let (l0, l1) = {
        let a = large_root(x_min).abs().ln();
        let b = large_root(x_max).abs().ln();
        (a.min(b), a.max(b))
    };
    // a global grid in ln|y| so that nested windows see the same sample points
    let delta = (1.0 / op.q().get()).ln() / SCAN_STEPS_PER_PERIOD;
    let j0 = (l0 / delta).floor() as i64;
    let j1 = (l1 / delta).ceil() as i64;
    let count = (j1 - j0 + 1) as usize;
    if count > MAX_SCAN_POINTS {
        return Err(Error::WindowTooWide(format!("{count} scan points needed")));
    }
    let ys: Vec<f64> = (j0..=j1)
        .map(|j| {
            let l = (j as f64 * delta).clamp(l0, l1);
            sign * l.exp()
        })
        .collect();
    let hs = ys.iter().map(|&y| op.jost(ext, Complex::new(y, 0.0))).collect::<Result<Vec<_>>>()?;
    let rot = real_rotation(&hs);
    let real = |h: Complex| (rot * h).re;

    let mut points = Vec::new();
    for w in 0..ys.len() - 1 {
        let (fa, fb) = (real(hs[w]), real(hs[w + 1]));
        if fa == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        let (mut a, mut b, mut sa) = (ys[w], ys[w + 1], fa.signum());
        while (b - a).abs() > 1e-13 * a.abs() {
            let m = 0.5 * (a + b);
            let fm = real(op.jost(ext, Complex::new(m, 0.0))?);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == sa {
                a = m;
                sa = fm.signum();
            } else {
                b = m;
            }
        }
        let y0 = 0.5 * (a + b);
        let x0 = 0.5 * (y0 + 1.0 / y0);
        if x0 < x_min || x0 > x_max {
            continue;
        }
        let jost_derivative = jost_derivative(op, ext, y0)?;
        let jost_inverse = op.jost(ext, Complex::new(1.0 / y0, 0.0))?;
        points.push(MassPoint { x0, y0, jost_derivative, jost_inverse });
    }
    for pair in points.windows(2) {
        let gap = (pair[1].y0.abs().ln() - pair[0].y0.abs().ln()).abs();
        if gap < 2.0 * delta {
            return Err(Error::WindowTooWide(format!(
                "zeros at y = {} and {} are closer than the scan resolution",
                pair[0].y0, pair[1].y0
            )));
        }
    }
    points.sort_by(|a, b| a.x0.partial_cmp(&b.x0).expect("finite eigenvalues"));
    Ok(points)
}

/// `ψ(x₀)` on `lo..=hi` at a mass point.
pub fn mass_point_vector(op: &JacobiOperator, ext: &ExtensionCoeffs, point: &MassPoint, lo: i32, hi: i32) -> Result<L2Vector> {
    op.psi_at_mass_point(ext, point.y0, lo, hi)
}

/// `⟨E({x₀}) e_l, e_k⟩`, the residue of `ψ_k ψ̄_l / (y h(1/y) h(y))` at `y₀`.
///
/// Written as `α_k F_k(1/y₀) conj(ψ_l(x₀)) / (y₀ conj(h'(y₀)))`, which is
/// invariant under a common rescaling of `(A, B)`.
pub fn discrete_mass(op: &JacobiOperator, point: &MassPoint, k: i32, l: i32) -> Result<Complex> {
    let m = mass_matrix(op, point, k.min(l), k.max(l))?;
    let n = (k.max(l) - k.min(l) + 1) as usize;
    Ok(m[(k - k.min(l)) as usize * n + (l - k.min(l)) as usize])
}

/// Row-major matrix of masses for `k, l ∈ lo..=hi`.
pub fn mass_matrix(op: &JacobiOperator, point: &MassPoint, lo: i32, hi: i32) -> Result<Vec<Complex>> {
    let f = op.alpha_f(Complex::new(1.0 / point.y0, 0.0), lo, hi)?;
    let psi = f.scale(point.jost_inverse);
    let den = point.y0 * point.jost_derivative.conj();
    let mut out = Vec::with_capacity(((hi - lo + 1) * (hi - lo + 1)) as usize);
    for k in lo..=hi {
        for l in lo..=hi {
            out.push(f.get(k) * psi.get(l).conj() / den);
        }
    }
    Ok(out)
}

/// Mass at `x₀` recovered from `(1/2πi)∮⟨R(z)e_l, e_k⟩ dz` on a circle of
/// radius `radius` (trapezoidal rule, nodes off the real axis).
pub fn contour_mass(op: &JacobiOperator, ext: &ExtensionCoeffs, x0: f64, radius: f64, k: i32, l: i32, nodes: usize) -> Result<Complex> {
    let mut s = Complex::new(0.0, 0.0);
    for j in 0..nodes {
        let phi = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
        let e = Complex::from_polar(1.0, phi);
        let z = x0 + radius * e;
        // dz = i radius e dphi, and 1/(2πi) · i · (2π/n) = 1/n
        s += op.green_kernel(ext, z, k, l)? * radius * e;
    }
    Ok(s / nodes as f64)
}

/// Fit of mass points to `x_n = ½(y_i q^{-2n} + y_i^{-1} q^{2n})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFit {
    pub grids: Vec<f64>,
    pub max_residual: f64,
}

/// Groups points by `ln|y₀| mod ln(q^{-2})` and sign, then measures how well each
/// group lies on one q²-quadratic grid.
pub fn fit_quadratic_grids(points: &[MassPoint], q: QBase) -> GridFit {
    let period = -2.0 * q.get().ln();
    let mut reps: Vec<(f64, f64)> = Vec::new(); // (sign, reduced log)
    for p in points {
        let sign = p.y0.signum();
        let red = p.y0.abs().ln().rem_euclid(period);
        let known = reps.iter().any(|&(s, r)| {
            let d = (r - red).abs();
            s == sign && d.min(period - d) < 1e-6
        });
        if !known {
            reps.push((sign, red));
        }
    }
    let grids: Vec<f64> = reps.iter().map(|&(s, r)| s * r.exp()).collect();
    let mut max_residual: f64 = 0.0;
    for p in points {
        let best = grids
            .iter()
            .filter(|g| g.signum() == p.y0.signum())
            .map(|&g| {
                let n = ((p.y0.abs().ln() - g.abs().ln()) / period).round() as i32;
                let qq = q.get() * q.get();
                let x = 0.5 * (g * qq.powi(-n) + qq.powi(n) / g);
                (x - p.x0).abs() / p.x0.abs()
            })
            .fold(f64::INFINITY, f64::min);
        max_residual = max_residual.max(best);
    }
    GridFit { grids, max_residual }
}

/// `τ` with `q = e^{πiτ}`.
pub fn elliptic_tau(q: QBase) -> Complex {
    Complex::new(0.0, -q.get().ln() / PI)
}

/// `g(w) = θ(e^{2πiw} q^{1/2} ir) / θ(−e^{2πiw} q^{1/2} ir)`.
pub fn elliptic_g(w: Complex, r: f64, q: QBase) -> Result<Complex> {
    let x = (2.0 * PI * Complex::new(0.0, 1.0) * w).exp() * q.get().sqrt() * Complex::new(0.0, r);
    let num = theta(x, q)?;
    let den = theta(-x, q)?;
    if den.norm() <= 1e-14 * (num.norm() + den.norm()) {
        return Err(Error::PoleEncountered(format!("w = {w}")));
    }
    Ok(num / den)
}

/// Zeros of the numerator and denominator of `g` inside one period cell, each
/// counted by the argument principle.
pub fn elliptic_zero_pole_count(r: f64, q: QBase, samples_per_side: usize) -> Result<(i64, i64)> {
    let tau = elliptic_tau(q);
    // numerator and denominator zeros sit on horizontal lines
    // Im w = (ln|r| − (n − ½) ln q)/(2π); start the cell between two of them
    let spacing = -q.get().ln() / (2.0 * PI);
    let base = (r.abs().ln() + 0.5 * q.get().ln()) / (2.0 * PI);
    let w0 = Complex::new(0.1, base + 0.25 * spacing);
    let corners = [w0, w0 + 1.0, w0 + 1.0 + tau, w0 + tau, w0];
    let sq = q.get().sqrt();
    let ir = Complex::new(0.0, r);
    let count = |sign: f64| -> Result<i64> {
        let f = |w: Complex| -> Result<Complex> {
            let x = (2.0 * PI * Complex::new(0.0, 1.0) * w).exp() * sq * ir * sign;
            theta(x, q)
        };
        let mut total = 0.0;
        let mut prev = f(corners[0])?.arg();
        for side in corners.windows(2) {
            for j in 1..=samples_per_side {
                let w = side[0] + (side[1] - side[0]) * (j as f64 / samples_per_side as f64);
                let a = f(w)?.arg();
                let mut d = a - prev;
                if d > PI {
                    d -= 2.0 * PI;
                } else if d < -PI {
                    d += 2.0 * PI;
                }
                total += d;
                prev = a;
            }
        }
        Ok((total / (2.0 * PI)).round() as i64)
    };
    Ok((count(1.0)?, count(-1.0)?))
}

/// Outcome of the checks at `y = ±1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub y: f64,
    pub wronskian_re: f64,
    pub wronskian_im: f64,
    /// `|W + ½|`.
    pub wronskian_error: f64,
    /// Largest `|H_k / ((−k) (a y)^{-k} y^{-1}) − 1|` over the probe range.
    pub growth_error: f64,
    /// Residual of the eigenvalue recurrence for `αH`.
    pub recurrence_residual: f64,
    pub no_point_mass: bool,
}

/// `H_k(y₀) = ∂_y F_k(y₀)` by a Cauchy integral on a circle around `y₀`.
pub fn derivative_solution(op: &JacobiOperator, y0: f64, lo: i32, hi: i32) -> Result<L2Vector> {
    const NODES: usize = 32;
    let rho = (0.1f64).min((op.q().get().powf(-0.5) - 1.0) / 2.0);
    let mut acc = vec![Complex::new(0.0, 0.0); (hi - lo + 1) as usize];
    for j in 0..NODES {
        let e = Complex::from_polar(1.0, 2.0 * PI * j as f64 / NODES as f64);
        let f = crate::eigenfunctions::f_range(op.params(), y0 + rho * e, lo, hi)?;
        for (s, v) in acc.iter_mut().zip(f) {
            *s += v / (rho * e);
        }
    }
    Ok(L2Vector::new(lo, acc.into_iter().map(|v| v / NODES as f64).collect()))
}

/// Checks at `y = ±1` that the second solution `αH` pairs with `conj(αF(±1))` to
/// `−½` and grows linearly toward `−∞`, so neither endpoint carries a point mass.
pub fn boundary_point_diagnostic(op: &JacobiOperator, y: f64) -> Result<BoundaryReport> {
    if y.abs() != 1.0 {
        return Err(Error::DomainViolation(format!("boundary diagnostic needs y = +-1, got {y}")));
    }
    let (lo, hi) = (-41, 2);
    let h = derivative_solution(op, y, lo, hi)?;
    let al = op.alpha_range(lo, hi);
    let ah = L2Vector::new(lo, h.values().iter().zip(&al).map(|(v, a)| v * a).collect());
    let af = op.alpha_f(Complex::new(y, 0.0), lo, hi)?.conj();
    let w = op.wronskian(&ah, &af, -10)?;
    let wronskian_error = (w + 0.5).norm();
    let a = op.params().a();
    let growth_error = (-40..=-25)
        .map(|k| {
            let lead = -(k as f64) * (a * y).powi(-k) / y;
            (h.get(k) / lead - 1.0).norm()
        })
        .fold(0.0, f64::max);
    let recurrence_residual = op.eigen_residual(&ah, Complex::new(y, 0.0));
    let no_point_mass = wronskian_error < 1e-7 && growth_error < 1e-3 && recurrence_residual < 1e-9;
    Ok(BoundaryReport {
        y,
        wronskian_re: w.re,
        wronskian_im: w.im,
        wronskian_error,
        growth_error,
        recurrence_residual,
        no_point_mass,
    })
}

/// A sampled density value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySample {
    pub chi: f64,
    pub density: f64,
}

/// Regime echo for serialized output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeSummary {
    pub case: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub q: f64,
}

impl RegimeSummary {
    pub fn new(regime: Regime, q: QBase) -> Self {
        match regime {
            Regime::Case1 { psi, r } => RegimeSummary { case: 1, psi: Some(psi), r: Some(r), s: None, t: None, q: q.get() },
            Regime::Case2 { s, t } => RegimeSummary { case: 2, psi: None, r: None, s: Some(s), t: Some(t), q: q.get() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteEntry {
    pub x0: f64,
    pub y0: f64,
    pub mass_kk: f64,
}

/// Sampled spectral measure: density on a `χ` grid and point masses (the
/// `k = l = 0` mass) in an `x` window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub continuous: Vec<DensitySample>,
    pub discrete: Vec<DiscreteEntry>,
    pub regime: RegimeSummary,
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_fit: Option<GridFit>,
}

impl SpectralMeasure {
    /// Density at `resolution` interior midpoints of `[0, π]` and mass points with
    /// `1 < |x| ≤ x_max`.
    pub fn sample(op: &JacobiOperator, ext: &ExtensionCoeffs, resolution: usize, x_max: f64, mass_index: i32) -> Result<Self> {
        let continuous = (0..resolution)
            .map(|j| {
                let chi = PI * (j as f64 + 0.5) / resolution as f64;
                Ok(DensitySample { chi, density: continuous_density(op, ext, chi)? })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut points = Vec::new();
        if x_max > 1.0 {
            let lo = 1.0 + 1e-9;
            points.extend(locate_discrete(op, ext, -x_max, -lo)?);
            points.extend(locate_discrete(op, ext, lo, x_max)?);
        }
        let discrete = points
            .iter()
            .map(|p| {
                Ok(DiscreteEntry { x0: p.x0, y0: p.y0, mass_kk: discrete_mass(op, p, mass_index, mass_index)?.re })
            })
            .collect::<Result<Vec<_>>>()?;
        let grid_fit = if op.regime().is_exponential_case() { Some(fit_quadratic_grids(&points, op.q())) } else { None };
        Ok(SpectralMeasure {
            continuous,
            discrete,
            regime: RegimeSummary::new(op.regime(), op.q()),
            theta: ext.theta,
            grid_fit,
        })
    }
}
