use std::f64::consts::PI;

use qspectral::eigenfunctions::SpectralParam;
use qspectral::jacobi::{JacobiOperator, L2Vector, Regime, LAMBDA0};
use qspectral::{Complex, QBase};

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn operators() -> Vec<JacobiOperator> {
    let q = QBase::new(0.5).unwrap();
    vec![
        JacobiOperator::new(Regime::case1(0.4, 3.0).unwrap(), q).unwrap(),
        JacobiOperator::new(Regime::case1(-1.1, -0.7).unwrap(), q).unwrap(),
        JacobiOperator::new(Regime::case2(1.5, -0.4).unwrap(), q).unwrap(),
        JacobiOperator::new(Regime::case2(-0.8, -2.5).unwrap(), QBase::new(0.3).unwrap()).unwrap(),
    ]
}

const THETAS: [f64; 4] = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];

#[test]
fn wronskian_is_index_independent() {
    // pairs chosen so no pair consists of two dominant solutions, whose
    // Wronskian would be pure cancellation at k = -15
    for op in operators() {
        let sp = SpectralParam::from_z(c(0.3, 0.6));
        let u = op.alpha_u(&sp, -16, 16).unwrap();
        let v = op.alpha_v(&sp, -16, 16).unwrap();
        let f = op.alpha_f(sp.y(), -16, 16).unwrap();
        let on_circle = SpectralParam::from_z(c(0.3, 0.0));
        let uc = op.alpha_u(&on_circle, -16, 16).unwrap();
        let vc = op.alpha_v(&on_circle, -16, 16).unwrap();
        for (a, b) in [(&u, &f), (&v, &f), (&uc, &vc)] {
            let w0 = op.wronskian(a, b, 0).unwrap();
            assert!(w0.norm() > 1e-8, "solutions must be independent");
            for k in -15..=15 {
                let w = op.wronskian(a, b, k).unwrap();
                assert!((w - w0).norm() <= 1e-10 * w0.norm().max(1.0), "k = {k}: {w} vs {w0}");
            }
        }
        assert_eq!(op.wronskian(&u, &u, 3).unwrap(), c(0.0, 0.0));
    }
}

#[test]
fn self_wronskian_of_f() {
    for op in operators() {
        let y = c(0.3, 0.4);
        let f = op.alpha_f(y, -10, 10).unwrap();
        let yc = y.conj().inv();
        let g = op.alpha_f(yc, -10, 10).unwrap().conj();
        let expect = 0.5 * (y.inv() - y);
        for k in [-8, -3, 0, 4] {
            let w = op.wronskian(&f, &g, k).unwrap();
            assert!((w - expect).norm() < 1e-10, "{w} vs {expect}");
        }
        if !op.regime().is_case1() {
            let g = op.alpha_f(y.inv(), -10, 10).unwrap();
            let w = op.wronskian(&f, &g, -2).unwrap();
            assert!((w - expect).norm() < 1e-10);
        }
    }
}

#[test]
fn tail_wronskians_reach_closed_form() {
    for op in operators() {
        let w = SpectralParam::from_z(c(0.2, 0.7));
        let y = c(0.3, 0.4);
        let lu = op.tail_limit_u(y).unwrap();
        let lv = op.tail_limit_v(y).unwrap();
        let tu = op.tail_wronskian_u(&w, y, 60).unwrap();
        let tv = op.tail_wronskian_v(&w, y, 60).unwrap();
        assert!((tu - lu).norm() < 1e-8, "u: {tu} vs {lu}");
        assert!((tv - lv).norm() < 1e-8, "v: {tv} vs {lv}");
        let conv = op.tail_wronskian_converged(&w, y, 60, false).unwrap();
        assert!((conv - lu).norm() < 1e-8);
    }
}

#[test]
fn gamma_phase_relation() {
    for op in operators() {
        let g = Complex::from_polar(1.0, op.gamma());
        for y in [c(0.3, 0.2), c(-0.5, 0.1)] {
            let f = op.alpha_f(y, -6, 6).unwrap();
            let fb = op.alpha_f(y.conj(), -6, 6).unwrap();
            for k in -6..=6 {
                let lhs = (g * fb.get(k)).conj();
                let rhs = g * f.get(k);
                assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
            }
        }
        if !op.regime().is_case1() {
            assert_eq!(op.gamma(), 0.0);
        }
    }
}

#[test]
fn extension_conditions() {
    for op in operators() {
        for th in THETAS {
            let ext = op.extension(th);
            assert!(op.defect_residual(&ext).unwrap() < 1e-9);
            let w = op.boundary_wronskian(&ext, c(0.3, 0.8), 60).unwrap();
            assert!(w.norm() < 1e-7, "theta = {th}: {w}");
        }
    }
}

#[test]
fn extension_condition_separates_angles() {
    let op = &operators()[2];
    let ext = op.extension(0.3);
    let wrong = op.extension(1.2);
    let mut mixed = ext;
    mixed.theta = wrong.theta;
    assert!(op.defect_residual(&mixed).unwrap() > 1e-3);
}

#[test]
fn psi_forms_agree_and_solve() {
    for op in operators() {
        let ext = op.extension(0.7);
        for z in [c(0.37, 0.0), c(0.2, 0.5), c(1.6, 0.0)] {
            let sp = SpectralParam::from_z(z);
            let p = op.psi(&ext, &sp, -8, 8).unwrap();
            let p2 = op.psi_via_conjugation(&ext, &sp, -8, 8).unwrap();
            for k in -8..=8 {
                assert!((p.get(k) - p2.get(k)).norm() <= 1e-10 * p.get(k).norm().max(1e-3));
            }
            assert!(op.eigen_residual(&p, z) < 1e-10);
        }
        if !op.regime().is_case1() {
            let sp = SpectralParam::from_z(c(0.37, 0.0));
            let p = op.psi(&ext, &sp, -5, 5).unwrap();
            for (_, v) in p.iter() {
                assert!(v.im.abs() <= 1e-12 * v.norm().max(1e-12));
            }
        }
    }
}

#[test]
fn big_psi_properties() {
    for op in operators() {
        let z = c(0.4, 0.9);
        let sp = SpectralParam::from_z(z);
        let p = op.big_psi(&sp, -60, 5).unwrap();
        let pb = op.big_psi(&sp.conj(), -60, 5).unwrap();
        for k in -60..=5 {
            assert!((pb.get(k).conj() - p.get(k)).norm() <= 1e-10 * p.get(k).norm().max(1e-300));
        }
        assert!(op.eigen_residual(&p, z) < 1e-10);
        let tail: f64 = (-60..=-40).map(|k| p.get(k).norm_sqr()).sum();
        let total: f64 = p.values().iter().map(|v| v.norm_sqr()).sum();
        assert!(tail < 1e-6 * total);
    }
}

#[test]
fn resolvent_double_sum_matches_apply() {
    for op in operators() {
        let ext = op.extension(0.7);
        let z = c(0.3, 1.2);
        let xi = L2Vector::new(-2, vec![c(1.0, 0.0), c(0.5, -0.3), c(0.0, 0.0), c(-0.2, 0.8)]);
        let eta = L2Vector::new(-1, vec![c(0.3, 0.1), c(1.0, 0.0), c(-0.4, 0.0), c(0.0, 2.0)]);
        let r = op.resolvent_apply(&ext, z, &xi, -3, 4).unwrap();
        let direct = r.inner(&eta);
        let form = op.resolvent_form(&ext, z, &xi, &eta).unwrap();
        assert!((direct - form).norm() <= 1e-10 * direct.norm());
        // (z − L) R(z) ξ = ξ on the interior
        let lr = op.apply(&r);
        for k in -2..=3 {
            let back = z * r.get(k) - lr.get(k);
            assert!((back - xi.get(k)).norm() < 1e-8, "k = {k}: {back}");
        }
    }
}

#[test]
fn lambda0_argument_is_i() {
    let sp = SpectralParam::from_y(c(0.0, LAMBDA0)).unwrap();
    assert!((sp.z() - c(0.0, 1.0)).norm() < 1e-15);
}
