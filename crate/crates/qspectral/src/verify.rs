//! Verification suites shared by the `verify` subcommand and the acceptance
//! runner. Each suite collects named checks against fixed tolerances; library
//! errors become failed checks instead of aborting the suite.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::eigenfunctions::{
    c_determinant, c_fn, d_fn, f_k, f_range, max_recurrence_residual, u_k, u_range, v_k, v_range, SpectralParam,
};
use crate::jacobi::{JacobiOperator, L2Vector, Regime, LAMBDA0};
use crate::oracle::{compare_with_main, dd_rel_diff, green_cross_check, highprec_eval, load_fixtures};
use crate::quadratic::quadratic_suite;
use crate::spectrum::{
    boundary_point_diagnostic, elliptic_g, elliptic_tau, elliptic_zero_pole_count, fit_quadratic_grids, locate_discrete,
};
use crate::transforms::{
    mismatched_inversion_error, orthogonality_matrix, q_limit_error, q_limit_grid, reconstruction_error, round_trip,
    MeasureOptions,
};
use crate::{Complex, QBase, Result};

const FIXTURES: &str = include_str!("../tests/fixtures/oracle.json");

/// Which side of the tolerance a check must land on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Below,
    /// Negative controls: the value must exceed the threshold.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    /// False for counts, ratios and negative controls, which stay out of
    /// `max_residual`.
    pub residual: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && match self.bound {
                Bound::Below => self.value < self.tolerance,
                Bound::Above => self.value > self.tolerance,
            }
    }
}

/// Machine-readable outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    /// Worst value over the residual checks; NaN if any of them errored.
    pub max_residual: f64,
    pub pass: bool,
    #[serde(skip)]
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn finish(suite: &str, checks: Vec<Check>) -> Self {
        let mut max_residual: f64 = 0.0;
        for c in checks.iter().filter(|c| c.residual) {
            max_residual = if c.error.is_some() || c.value.is_nan() { f64::NAN } else { max_residual.max(c.value) };
            if max_residual.is_nan() {
                break;
            }
        }
        let pass = !checks.is_empty() && checks.iter().all(Check::passed);
        SuiteReport { suite: suite.to_string(), cases: checks.len(), max_residual, pass, checks }
    }

    /// Checks that did not pass.
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Merges several reports under one name, keeping every check.
pub fn aggregate(suite: &str, reports: &[SuiteReport]) -> SuiteReport {
    let checks = reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| Check { name: format!("{}/{}", r.suite, c.name), ..c.clone() })
        })
        .collect();
    SuiteReport::finish(suite, checks)
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn below(&mut self, name: impl Into<String>, tolerance: f64, value: Result<f64>) {
        self.push(name.into(), tolerance, Bound::Below, true, value);
    }

    /// An upper bound on something that is not a residual.
    fn at_most(&mut self, name: impl Into<String>, tolerance: f64, value: Result<f64>) {
        self.push(name.into(), tolerance, Bound::Below, false, value);
    }

    fn above(&mut self, name: impl Into<String>, tolerance: f64, value: Result<f64>) {
        self.push(name.into(), tolerance, Bound::Above, false, value);
    }

    fn push(&mut self, name: String, tolerance: f64, bound: Bound, residual: bool, value: Result<f64>) {
        let (value, error) = match value {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.0.push(Check { name, value, tolerance, bound, residual, error });
    }
}

fn worst(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut w: f64 = 0.0;
    for v in values {
        let v = v?;
        w = if v.is_nan() { f64::NAN } else { w.max(v) };
    }
    Ok(w)
}

/// `|lhs − Σ terms|` over the largest of `|lhs|` and the term moduli, the same
/// normalization as the recurrence residual. F decays toward −∞ while u and v
/// grow, so relative to F alone the identity loses digits to cancellation.
fn defect(lhs: Complex, terms: [Complex; 2]) -> f64 {
    let scale = terms.iter().map(|t| t.norm()).fold(lhs.norm(), f64::max).max(1e-300);
    (lhs - terms[0] - terms[1]).norm() / scale
}

fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn qb(v: f64) -> QBase {
    QBase::new(v).expect("fixed base in (0,1)")
}

/// Operators covering both regimes, generic parameters.
pub fn reference_operators() -> Vec<JacobiOperator> {
    let build = |r: Result<Regime>, q: f64| JacobiOperator::new(r.expect("fixed regime"), qb(q)).expect("fixed operator");
    vec![
        build(Regime::case1(0.4, 3.0), 0.5),
        build(Regime::case1(-1.1, -0.7), 0.5),
        build(Regime::case2(1.5, -0.4), 0.5),
        build(Regime::case2(-0.8, -2.5), 0.3),
    ]
}

/// One regime of each case, used by the heavier measure-based suites.
pub fn measure_operators() -> Vec<JacobiOperator> {
    let ops = reference_operators();
    vec![ops[0].clone(), ops[2].clone()]
}

fn label(op: &JacobiOperator) -> String {
    match op.regime() {
        Regime::Case1 { psi, r } => format!("case1(psi={psi},r={r},q={})", op.q().get()),
        Regime::Case2 { s, t } => format!("case2(s={s},t={t},q={})", op.q().get()),
    }
}

/// Draws an admissible operator; degenerate parameters are redrawn.
fn random_operator(rng: &mut StdRng, case1: bool) -> JacobiOperator {
    loop {
        let q = rng.gen_range(0.2..0.8);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let regime = if case1 {
            Regime::case1(rng.gen_range(-PI..PI), sign * rng.gen_range(0.3..5.0))
        } else {
            Regime::case2(sign * rng.gen_range(0.3..3.0), -rng.gen_range(0.1..5.0))
        };
        if let Ok(op) = regime.and_then(|r| JacobiOperator::new(r, qb(q))) {
            return op;
        }
    }
}

/// u, v and F against the three-term recurrence over `k ∈ [−15, 15]`.
pub fn recurrence(draws_per_regime: usize, seed: u64) -> SuiteReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = Checks::default();
    for case1 in [true, false] {
        for _ in 0..draws_per_regime {
            let op = random_operator(&mut rng, case1);
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
            let sp = SpectralParam::from_z(z);
            let p = op.params();
            let name = format!("{} z={z:.3}", label(&op));
            checks.below(format!("u {name}"), 1e-10, u_range(p, &sp, -16, 16).map(|u| max_recurrence_residual(&u, -16, p, z)));
            checks.below(format!("v {name}"), 1e-10, v_range(p, &sp, -16, 16).map(|v| max_recurrence_residual(&v, -16, p, z)));
            checks.below(format!("F {name}"), 1e-10, f_range(p, sp.y(), -16, 16).map(|f| max_recurrence_residual(&f, -16, p, z)));
        }
    }
    SuiteReport::finish("recurrence", checks.0)
}

/// Connection formulas for u, v, F and the closed form of the c-determinant.
pub fn connection() -> SuiteReport {
    let mut checks = Checks::default();
    for op in reference_operators() {
        let p = op.params();
        for y in [c(0.3, 0.4), c(-0.5, 0.1), c(0.6, -0.2)] {
            let sp = match SpectralParam::from_y(y) {
                Ok(sp) => sp,
                Err(e) => {
                    checks.below(format!("spectral parameter y={y}"), 1e-9, Err(e));
                    continue;
                }
            };
            let name = format!("{} y={y}", label(&op));
            let (a, t, q) = (p.a(), p.t(), p.q());
            let u = || -> Result<f64> {
                let (c1, c2) = (c_fn(y, a, t, q)?, c_fn(y.inv(), a, t, q)?);
                worst((-6..=6).map(|k| Ok(defect(u_k(p, &sp, k)?, [c1 * f_k(p, y, k)?, c2 * f_k(p, y.inv(), k)?]))))
            };
            let v = || -> Result<f64> {
                let (c1, c2) = (c_fn(y, -a, t, q)?, c_fn(y.inv(), -a, t, q)?);
                worst((-6..=6).map(|k| Ok(defect(v_k(p, &sp, k)?, [c1 * f_k(p, y, k)?, c2 * f_k(p, y.inv(), k)?]))))
            };
            let f = || -> Result<f64> {
                let (d1, d2) = (d_fn(y, a, t, q)?, d_fn(y, -a, t, q)?);
                worst((-6..=6).map(|k| Ok(defect(f_k(p, y, k)?, [d1 * u_k(p, &sp, k)?, d2 * v_k(p, &sp, k)?]))))
            };
            checks.below(format!("u {name}"), 1e-9, u());
            checks.below(format!("v {name}"), 1e-9, v());
            checks.below(format!("F {name}"), 1e-9, f());
            checks.below(
                format!("c-determinant {name}"),
                1e-10,
                c_determinant(y, p.a(), p.t(), p.q()).map(|(lhs, rhs)| rel(lhs, rhs)),
            );
        }
    }
    SuiteReport::finish("connection", checks.0)
}

/// Index independence, the self-Wronskian of αF and the tail limits at N = 60.
pub fn wronskian() -> SuiteReport {
    let mut checks = Checks::default();
    for op in reference_operators() {
        let name = label(&op);
        // Pairs where both members dominate toward −∞ would measure cancellation only.
        let independence = || -> Result<f64> {
            let sp = SpectralParam::from_z(c(0.3, 0.6));
            let band = SpectralParam::from_z(c(0.3, 0.0));
            let pairs = [
                (op.alpha_u(&sp, -16, 16)?, op.alpha_f(sp.y(), -16, 16)?),
                (op.alpha_v(&sp, -16, 16)?, op.alpha_f(sp.y(), -16, 16)?),
                (op.alpha_u(&band, -16, 16)?, op.alpha_v(&band, -16, 16)?),
            ];
            let mut w: f64 = 0.0;
            for (a, b) in &pairs {
                let w0 = op.wronskian(a, b, 0)?;
                for k in -15..=15 {
                    w = w.max((op.wronskian(a, b, k)? - w0).norm() / w0.norm().max(1.0));
                }
            }
            Ok(w)
        };
        checks.below(format!("k-independence {name}"), 1e-10, independence());

        let self_pair = || -> Result<f64> {
            let y = c(0.3, 0.4);
            let f = op.alpha_f(y, -10, 10)?;
            let g = op.alpha_f(y.conj().inv(), -10, 10)?.conj();
            let expect = 0.5 * (y.inv() - y);
            worst([-8, -3, 0, 4].map(|k| Ok((op.wronskian(&f, &g, k)? - expect).norm())))
        };
        checks.below(format!("[aF(y), aF(1/y)] {name}"), 1e-10, self_pair());

        let tails = || -> Result<f64> {
            let w = SpectralParam::from_z(c(0.2, 0.7));
            let y = c(0.3, 0.4);
            let du = (op.tail_wronskian_u(&w, y, 60)? - op.tail_limit_u(y)?).norm();
            let dv = (op.tail_wronskian_v(&w, y, 60)? - op.tail_limit_v(y)?).norm();
            Ok(du.max(dv))
        };
        checks.below(format!("tail limits N=60 {name}"), 1e-8, tails());
    }
    SuiteReport::finish("wronskian", checks.0)
}

/// The extension angles used throughout.
pub const EXTENSION_ANGLES: [f64; 4] = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];

/// Reality of E, F, the λ₀ identity, boundary Wronskian and defect equation.
pub fn extension() -> SuiteReport {
    let mut checks = Checks::default();
    let w = Complex::new(0.0, LAMBDA0);
    checks.below("(i l0 + 1/(i l0))/2 = i", 4.0 * f64::EPSILON, Ok((0.5 * (w + w.inv()) - c(0.0, 1.0)).norm()));
    for op in reference_operators() {
        let name = label(&op);
        let (e, f) = op.extension_products();
        checks.below(format!("E, F real {name}"), 1e-12, Ok((e.im.abs() / e.norm()).max(f.im.abs() / f.norm())));
        for theta in EXTENSION_ANGLES {
            let ext = op.extension(theta);
            checks.below(format!("defect theta={theta:.4} {name}"), 1e-9, op.defect_residual(&ext));
            checks.below(
                format!("boundary Wronskian N=60 theta={theta:.4} {name}"),
                1e-7,
                op.boundary_wronskian(&ext, c(0.3, 0.8), 60).map(|w| w.norm()),
            );
        }
    }
    SuiteReport::finish("extension", checks.0)
}

/// Quadratic transformation, big q-Jacobi specialization and ℰ_q as two ₃φ₂.
pub fn quadratic(bases: &[f64]) -> SuiteReport {
    let mut checks = Checks::default();
    for &q in bases {
        match QBase::new(q).and_then(quadratic_suite) {
            Ok(rows) => {
                for r in rows {
                    let tol = if r.case == "qexp_two_3phi2" { 1e-9 } else { 1e-10 };
                    checks.below(format!("{} ({})", r.case, r.params), tol, Ok(r.residual));
                }
            }
            Err(e) => checks.below(format!("quadratic suite q={q}"), 1e-10, Err(e)),
        }
    }
    SuiteReport::finish("quadratic", checks.0)
}

/// `max |G_kl − δ_kl|` over `k, l ∈ [−4, 4]` for each (operator, θ).
pub fn orthogonality(cases: &[(JacobiOperator, f64)], opts: &MeasureOptions) -> SuiteReport {
    let mut checks = Checks::default();
    for (op, theta) in cases {
        let m = orthogonality_matrix(op, &op.extension(*theta), -4, 4, opts);
        checks.below(format!("|G - I| theta={theta} {}", label(op)), 1e-6, m.map(|m| m.max_deviation()));
    }
    SuiteReport::finish("orthogonality", checks.0)
}

/// Two angles per regime of [`measure_operators`].
pub fn default_orthogonality_cases() -> Vec<(JacobiOperator, f64)> {
    measure_operators().into_iter().flat_map(|op| [(op.clone(), 0.3), (op, 1.9)]).collect()
}

fn sample_xi() -> L2Vector {
    L2Vector::new(-3, (0..7).map(|j| c(0.3 * j as f64 - 0.5, 0.1 * j as f64)).collect())
}

/// Transform then invert with the same θ; invert with the wrong θ as control.
pub fn inversion(opts: &MeasureOptions) -> SuiteReport {
    let mut checks = Checks::default();
    let xi = sample_xi();
    for op in measure_operators() {
        let ext = op.extension(0.7);
        checks.below(
            format!("round trip theta=0.7 {}", label(&op)),
            1e-6,
            round_trip(&op, &ext, &ext, &xi, -3, 3, opts).map(|rec| reconstruction_error(&xi, &rec)),
        );
        checks.above(
            format!("mismatched theta 1.5 vs 0.7 {}", label(&op)),
            1e-2,
            mismatched_inversion_error(&op, &op.extension(1.5), &ext, &xi, 10.0, opts),
        );
    }
    SuiteReport::finish("inversion", checks.0)
}

/// Two q²-grids in the q-exponential case; periods and order of g.
pub fn discrete_structure() -> SuiteReport {
    let mut checks = Checks::default();
    for (r, q) in [(0.8, 0.5), (3.0, 0.5), (-1.7, 0.4)] {
        let op = match Regime::case1(0.0, r).and_then(|reg| JacobiOperator::new(reg, qb(q))) {
            Ok(op) => op,
            Err(e) => {
                checks.below(format!("operator r={r} q={q}"), 1e-8, Err(e));
                continue;
            }
        };
        for theta in [0.0, 0.9, 2.2] {
            let ext = op.extension(theta);
            let fit = || -> Result<(usize, usize, f64)> {
                let mut pts = locate_discrete(&op, &ext, 1.0001, 1e6)?;
                pts.extend(locate_discrete(&op, &ext, -1e6, -1.0001)?);
                let fit = fit_quadratic_grids(&pts, op.q());
                Ok((pts.len(), fit.grids.len(), fit.max_residual))
            };
            let name = format!("r={r} q={q} theta={theta}");
            match fit() {
                Ok((n, grids, res)) => {
                    checks.below(format!("grid fit {name} ({n} points)"), 1e-8, Ok(res));
                    checks.at_most(format!("grid count {name}"), 2.5, Ok(grids as f64));
                    checks.above(format!("points found {name}"), 3.5, Ok(n as f64));
                }
                Err(e) => checks.below(format!("grid fit {name}"), 1e-8, Err(e)),
            }
        }
    }
    for (r, q) in [(0.8, 0.5), (3.0, 0.3), (-1.7, 0.7)] {
        let base = qb(q);
        let tau = elliptic_tau(base);
        let periods = worst([c(0.13, 0.02), c(-0.4, 0.31), c(0.77, -0.2)].map(|w| {
            let g = elliptic_g(w, r, base)?;
            Ok(rel(elliptic_g(w + 1.0, r, base)?, g).max(rel(elliptic_g(w + tau, r, base)?, g)))
        }));
        checks.below(format!("periods 1, tau r={r} q={q}"), 1e-11, periods);
        checks.at_most(
            format!("zeros = poles = 2 r={r} q={q}"),
            0.5,
            elliptic_zero_pole_count(r, base, 400).map(|(z, p)| ((z - 2).abs() + (p - 2).abs()) as f64),
        );
    }
    SuiteReport::finish("discrete", checks.0)
}

/// Green-kernel resolvent against the truncated solve at z = 2i, N = 200.
pub fn resolvent() -> SuiteReport {
    let mut checks = Checks::default();
    let xi = L2Vector::new(-2, vec![c(1.0, 0.0), c(0.0, 0.5), c(-0.3, 0.0), c(0.2, 0.2), c(1.0, -1.0)]);
    for op in measure_operators() {
        checks.below(format!("N=200 {}", label(&op)), 1e-6, green_cross_check(&op, 200, c(0.0, 2.0), &xi));
    }
    SuiteReport::finish("resolvent", checks.0)
}

/// `ℰ_q(z; ½(1−q)λ) → e^{λz}` for q ∈ {0.9, 0.99}.
pub fn qexp_limit() -> SuiteReport {
    let mut checks = Checks::default();
    let grid = q_limit_grid();
    let e9 = q_limit_error(qb(0.9), &grid);
    let e99 = q_limit_error(qb(0.99), &grid);
    match (&e9, &e99) {
        (Ok(a), Ok(b)) => checks.at_most("error(q=0.99) / error(q=0.9)", 1.0, Ok(b / a)),
        _ => checks.at_most("error(q=0.99) / error(q=0.9)", 1.0, e9.clone().and(e99.clone())),
    }
    checks.below("error q=0.99", 5e-2, e99);
    SuiteReport::finish("qexp-limit", checks.0)
}

/// `[αH(±1), conj(αF(±1))] = −½` and linear growth of H.
pub fn boundary() -> SuiteReport {
    let mut checks = Checks::default();
    for op in reference_operators() {
        for y in [1.0, -1.0] {
            let name = format!("y={y} {}", label(&op));
            match boundary_point_diagnostic(&op, y) {
                Ok(rep) => {
                    checks.below(format!("Wronskian {name}"), 1e-7, Ok(rep.wronskian_error));
                    checks.below(format!("linear growth {name}"), 1e-3, Ok(rep.growth_error));
                    checks.at_most(format!("no point mass {name}"), 0.5, Ok(if rep.no_point_mass { 0.0 } else { 1.0 }));
                }
                Err(e) => checks.below(format!("diagnostic {name}"), 1e-7, Err(e)),
            }
        }
    }
    SuiteReport::finish("boundary", checks.0)
}

/// Stamped references against the double-double path, and the f64 path
/// against its declared error.
pub fn oracle() -> SuiteReport {
    let mut checks = Checks::default();
    match load_fixtures(FIXTURES) {
        Ok(fixtures) => {
            for (i, f) in fixtures.iter().enumerate() {
                let hp = f.value().and_then(|reference| Ok(dd_rel_diff(highprec_eval(&f.expr)?, reference)));
                checks.below(format!("fixture {i} double-double"), 1e-29, hp);
                // diff / max(bound, 4 eps) < 1 means within the declared error
                let main = compare_with_main(&f.expr).map(|(d, b)| d / b.max(4.0 * f64::EPSILON));
                checks.at_most(format!("fixture {i} f64 within declared error"), 1.0 + 1e-12, main);
            }
        }
        Err(e) => checks.below("fixtures", 1e-29, Err(e)),
    }
    SuiteReport::finish("oracle", checks.0)
}

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 12] = [
    "recurrence",
    "connection",
    "wronskian",
    "extension",
    "quadratic",
    "orthogonality",
    "inversion",
    "discrete",
    "resolvent",
    "qexp-limit",
    "boundary",
    "oracle",
];

/// Runs a named suite with default parameters; `all` aggregates every suite.
pub fn run_suite(name: &str) -> Option<SuiteReport> {
    let opts = MeasureOptions::default();
    Some(match name {
        "recurrence" => recurrence(5, 20261016),
        "connection" => connection(),
        "wronskian" => wronskian(),
        "extension" => extension(),
        "quadratic" => quadratic(&[0.3, 0.5, 0.8]),
        "orthogonality" => orthogonality(&default_orthogonality_cases(), &opts),
        "inversion" => inversion(&opts),
        "discrete" => discrete_structure(),
        "resolvent" => resolvent(),
        "qexp-limit" => qexp_limit(),
        "boundary" => boundary(),
        "oracle" => oracle(),
        "all" => {
            let reports: Vec<SuiteReport> = SUITES.iter().filter_map(|s| run_suite(s)).collect();
            aggregate("all", &reports)
        }
        _ => return None,
    })
}
