use std::f64::consts::PI;

use qspectral::eigenfunctions::{c_fn, SpectralParam};
use qspectral::jacobi::{JacobiOperator, Regime};
use qspectral::oracle::TruncatedOperator;
use qspectral::spectrum::{
    boundary_point_diagnostic, continuous_density, continuous_density_factorized, contour_mass, discrete_mass,
    elliptic_g, elliptic_tau, elliptic_zero_pole_count, fit_quadratic_grids, large_root, locate_discrete,
    SpectralMeasure,
};
use qspectral::{Complex, Error, QBase};

fn q(v: f64) -> QBase {
    QBase::new(v).unwrap()
}

fn operators() -> Vec<JacobiOperator> {
    vec![
        JacobiOperator::new(Regime::case1(0.0, 3.0).unwrap(), q(0.5)).unwrap(),
        JacobiOperator::new(Regime::case1(0.4, 3.0).unwrap(), q(0.5)).unwrap(),
        JacobiOperator::new(Regime::case2(1.5, -0.4).unwrap(), q(0.5)).unwrap(),
        JacobiOperator::new(Regime::case2(0.5, -3.0).unwrap(), q(0.3)).unwrap(),
    ]
}

#[test]
fn density_positive_and_finite() {
    for op in operators() {
        for theta in [0.0, 0.7, 2.0] {
            let ext = op.extension(theta);
            for j in 1..40 {
                let chi = PI * j as f64 / 40.0;
                let d = continuous_density(&op, &ext, chi).unwrap();
                assert!(d.is_finite() && d > 0.0, "chi = {chi}: {d}");
            }
        }
    }
}

#[test]
fn factorized_density_matches_in_exponential_case() {
    let op = JacobiOperator::new(Regime::case1(0.0, 0.8).unwrap(), q(0.5)).unwrap();
    let ext = op.extension(1.1);
    for j in 1..20 {
        let chi = PI * j as f64 / 20.0;
        let a = continuous_density(&op, &ext, chi).unwrap();
        let b = continuous_density_factorized(&op, &ext, chi).unwrap();
        assert!((a - b).abs() < 1e-10 * a, "chi = {chi}: {a} vs {b}");
    }
}

#[test]
fn density_and_masses_invariant_under_global_phase() {
    // (A, B) are fixed by the extension only up to a common phase.
    let op = &operators()[1];
    let ext = op.extension(0.7);
    let rotated = ext.scaled(Complex::from_polar(1.0, 1.3));
    for chi in [0.3, 1.5, 2.9] {
        let a = continuous_density(op, &ext, chi).unwrap();
        let b = continuous_density(op, &rotated, chi).unwrap();
        assert!((a - b).abs() < 1e-13 * a, "{a} {b}");
    }
    let p1 = locate_discrete(op, &ext, 1.0001, 100.0).unwrap();
    let p2 = locate_discrete(op, &rotated, 1.0001, 100.0).unwrap();
    assert_eq!(p1.len(), p2.len());
    for (a, b) in p1.iter().zip(&p2) {
        assert!((a.x0 - b.x0).abs() < 1e-10 * a.x0.abs());
        let (ma, mb) = (discrete_mass(op, a, 0, 1).unwrap(), discrete_mass(op, b, 0, 1).unwrap());
        assert!((ma - mb).norm() <= 1e-8 * ma.norm(), "{ma} {mb}");
    }
}

#[test]
fn diagonal_masses_positive_and_match_contour_integral() {
    for op in operators() {
        for theta in [0.0, 0.7] {
            let ext = op.extension(theta);
            for (lo, hi) in [(1.0001, 200.0), (-200.0, -1.0001)] {
                for p in locate_discrete(&op, &ext, lo, hi).unwrap().iter().take(3) {
                    for k in -2..=2 {
                        let m = discrete_mass(&op, p, k, k).unwrap();
                        // h'(y0) comes from a difference quotient good to ~1e-9.
                        assert!(m.re > 0.0 && m.im.abs() <= 1e-8 * m.re, "{m}");
                    }
                    let m = discrete_mass(&op, p, 0, 1).unwrap();
                    let radius = 0.3 * (p.x0.abs() - 1.0).min(0.1 * p.x0.abs());
                    let c = contour_mass(&op, &ext, p.x0, radius, 0, 1, 64).unwrap();
                    assert!((m - c).norm() <= 1e-7 * m.norm() + 1e-15, "x0 = {}: {m} vs {c}", p.x0);
                }
            }
        }
    }
}

#[test]
fn nested_windows_find_nested_points() {
    let op = &operators()[2];
    let ext = op.extension(0.3);
    let small = locate_discrete(op, &ext, 1.0001, 20.0).unwrap();
    let big = locate_discrete(op, &ext, 1.0001, 2000.0).unwrap();
    assert!(big.len() >= small.len());
    for p in &small {
        assert!(big.iter().any(|b| (b.x0 - p.x0).abs() < 1e-10 * p.x0.abs()));
    }
}

#[test]
fn window_must_avoid_the_band() {
    let op = &operators()[0];
    let r = locate_discrete(op, &op.extension(0.0), 0.5, 3.0);
    assert!(matches!(r, Err(Error::DomainViolation(_))));
}

#[test]
fn exponential_case_points_lie_on_two_quadratic_grids() {
    for (r, qv) in [(0.8, 0.5), (3.0, 0.5), (-1.7, 0.4)] {
        let qb = q(qv);
        let op = JacobiOperator::new(Regime::case1(0.0, r).unwrap(), qb).unwrap();
        for theta in [0.0, 0.9, 2.2] {
            let ext = op.extension(theta);
            let mut pts = locate_discrete(&op, &ext, 1.0001, 1e6).unwrap();
            pts.extend(locate_discrete(&op, &ext, -1e6, -1.0001).unwrap());
            assert!(pts.len() >= 4);
            let fit = fit_quadratic_grids(&pts, qb);
            assert!(fit.grids.len() <= 2, "r={r} theta={theta}: {:?}", fit.grids);
            assert!(fit.max_residual < 1e-8, "r={r} theta={theta}: {}", fit.max_residual);
        }
    }
}

#[test]
fn elliptic_function_periods_and_order() {
    for (r, qv) in [(0.8, 0.5), (3.0, 0.3), (-1.7, 0.7)] {
        let qb = q(qv);
        let tau = elliptic_tau(qb);
        for w in [Complex::new(0.13, 0.02), Complex::new(-0.4, 0.31), Complex::new(0.77, -0.2)] {
            let g = elliptic_g(w, r, qb).unwrap();
            let g1 = elliptic_g(w + 1.0, r, qb).unwrap();
            let gt = elliptic_g(w + tau, r, qb).unwrap();
            assert!((g1 - g).norm() < 1e-11 * g.norm(), "period 1");
            assert!((gt - g).norm() < 1e-11 * g.norm(), "period tau: {g} {gt}");
        }
        assert_eq!(elliptic_zero_pole_count(r, qb, 400).unwrap(), (2, 2), "r={r} q={qv}");
    }
}

#[test]
fn no_point_mass_at_band_edges() {
    for op in operators() {
        for y in [1.0, -1.0] {
            let rep = boundary_point_diagnostic(&op, y).unwrap();
            assert!(rep.wronskian_error < 1e-7, "{rep:?}");
            assert!(rep.growth_error < 1e-3, "{rep:?}");
            assert!(rep.no_point_mass, "{rep:?}");
        }
    }
}

#[test]
fn sampled_measure_has_requested_resolution_and_grid_fit() {
    let op = JacobiOperator::new(Regime::case1(0.0, 0.8).unwrap(), q(0.5)).unwrap();
    let m = SpectralMeasure::sample(&op, &op.extension(0.4), 64, 100.0, 0).unwrap();
    assert_eq!(m.continuous.len(), 64);
    assert!(!m.discrete.is_empty());
    let fit = m.grid_fit.expect("grid fit in the exponential case");
    assert!(fit.max_residual < 1e-8);
    let generic = &operators()[2];
    let m = SpectralMeasure::sample(generic, &generic.extension(0.4), 10, 100.0, 0).unwrap();
    assert!(m.grid_fit.is_none());
}

#[test]
fn density_nonnegative_on_fine_grid() {
    for op in [&operators()[1], &operators()[3]] {
        let ext = op.extension(2.6);
        for j in 1..1000 {
            let d = continuous_density(op, &ext, PI * j as f64 / 1000.0).unwrap();
            assert!(d >= 0.0 && d.is_finite());
        }
    }
}

/// Size of the two terms of `h(y) = A c(y;a) + B c(y;−a)`.
fn jost_terms_scale(op: &JacobiOperator, ext: &qspectral::jacobi::ExtensionCoeffs, y: f64) -> f64 {
    let p = op.params();
    let y = Complex::new(y, 0.0);
    let ca = c_fn(y, p.a(), p.t(), p.q()).unwrap();
    let cm = c_fn(y, -p.a(), p.t(), p.q()).unwrap();
    (ext.a() * ca).norm().max((ext.b() * cm).norm())
}

#[test]
fn located_points_are_certified_and_isolated() {
    for op in operators() {
        let ext = op.extension(1.3);
        let mut pts = locate_discrete(&op, &ext, -1e4, -1.0001).unwrap();
        pts.extend(locate_discrete(&op, &ext, 1.0001, 1e4).unwrap());
        assert!(!pts.is_empty());
        for p in &pts {
            let h = op.jost(&ext, Complex::new(p.y0, 0.0)).unwrap();
            let scale = jost_terms_scale(&op, &ext, p.y0);
            assert!(h.norm() < 1e-10 * scale, "y0 = {}: |h| = {:e}, scale {scale:e}", p.y0, h.norm());
        }
        for w in pts.windows(2) {
            // refinement width is 1e-13 |y|
            assert!((w[1].y0 - w[0].y0).abs() > 1e-10 * w[0].y0.abs().max(w[1].y0.abs()) || w[0].y0.signum() != w[1].y0.signum());
        }
    }
}

#[test]
fn point_count_grows_with_the_window() {
    let op = &operators()[2];
    let ext = op.extension(0.3);
    // c(y) grows like q^{-(ln y)^2} and leaves double range near |x| ~ 1e7.
    let counts: Vec<usize> = [20.0, 2e3, 2e5].iter().map(|&x| locate_discrete(op, &ext, 1.0001, x).unwrap().len()).collect();
    assert!(counts.windows(2).all(|w| w[1] > w[0]), "{counts:?}");
}

#[test]
fn psi_is_proportional_to_minimal_solution_at_mass_points() {
    // ψ(x₀) from the u, v combination against h(1/y₀) e^{−iγ} Ψ(x₀).
    for op in operators() {
        let ext = op.extension(0.7);
        for p in locate_discrete(&op, &ext, 1.0001, 50.0).unwrap().iter().take(2) {
            let sp = SpectralParam::from_z(Complex::new(p.x0, 0.0));
            let u = op.alpha_u(&sp, -5, 5).unwrap().scale(ext.a());
            let v = op.alpha_v(&sp, -5, 5).unwrap().scale(ext.b());
            let big = op.big_psi(&sp, -5, 5).unwrap();
            let h = op.jost(&ext, Complex::new(1.0 / p.y0, 0.0)).unwrap();
            let factor = h * Complex::from_polar(1.0, -op.gamma());
            for k in -5..=5 {
                // ψ is in ℓ² here while u and v grow toward −∞, so the sum
                // cancels; measure against the size of its terms.
                let rhs = factor * big.get(k);
                let scale = u.get(k).norm().max(v.get(k).norm()).max(rhs.norm());
                let d = (u.get(k) + v.get(k) - rhs).norm();
                assert!(d < 1e-9 * scale, "x0 = {} k = {k}: {d:e} vs scale {scale:e}", p.x0);
            }
        }
    }
}

#[test]
fn truncated_outliers_are_eigenvalues_of_some_extension() {
    // Every section eigenvalue outside [−1.05, 1.05] is a zero of h_θ for some θ.
    // c(y;±a) does not depend on θ, so the θ-grid can be fine.
    let thetas: Vec<f64> = (0..20000).map(|j| PI * j as f64 / 20000.0).collect();
    for op in [&operators()[1], &operators()[2]] {
        let t = TruncatedOperator::new(op, 12).unwrap();
        let outliers: Vec<f64> = (0..t.dim()).map(|k| t.eigenvalue_bisect(k)).filter(|l| l.abs() > 1.05).collect();
        assert!(!outliers.is_empty());
        let p = op.params();
        for lambda in outliers {
            let y = Complex::new(large_root(lambda), 0.0);
            let (ca, cm) = (c_fn(y, p.a(), p.t(), p.q()).unwrap(), c_fn(y, -p.a(), p.t(), p.q()).unwrap());
            let best = thetas
                .iter()
                .map(|&th| {
                    let ext = op.extension(th);
                    let (x, w) = (ext.a() * ca, ext.b() * cm);
                    (x + w).norm() / x.norm().max(w.norm())
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-3, "lambda = {lambda}: {best:e}");
        }
    }
}

#[test]
fn minus_one_mirrors_plus_one() {
    // (a, z) -> (−a, −z): case 1 via (ψ + π, −r), case 2 via s -> −s.
    let q = q(0.5);
    let pairs = [
        (Regime::case1(0.4, 3.0).unwrap(), Regime::case1(0.4 + PI, -3.0).unwrap()),
        (Regime::case2(1.5, -0.4).unwrap(), Regime::case2(-1.5, -0.4).unwrap()),
    ];
    for (r1, r2) in pairs {
        let minus = boundary_point_diagnostic(&JacobiOperator::new(r1, q).unwrap(), -1.0).unwrap();
        let plus = boundary_point_diagnostic(&JacobiOperator::new(r2, q).unwrap(), 1.0).unwrap();
        assert!((minus.wronskian_re - plus.wronskian_re).abs() < 1e-9 && (minus.wronskian_im - plus.wronskian_im).abs() < 1e-9);
        assert!((minus.growth_error - plus.growth_error).abs() < 1e-6);
        assert!(minus.no_point_mass && plus.no_point_mass);
    }
}
