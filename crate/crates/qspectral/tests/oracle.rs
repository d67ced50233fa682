use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

use qspectral::jacobi::{JacobiOperator, L2Vector, Regime};
use qspectral::oracle::{
    compare_with_main, dd_rel_diff, green_cross_check, highprec_eval, load_fixtures, stamp, OracleExpr,
    TruncatedOperator,
};
use qspectral::{Complex, QBase};

const FIXTURES: &str = include_str!("fixtures/oracle.json");

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn op(regime: Regime) -> JacobiOperator {
    JacobiOperator::new(regime, QBase::new(0.5).unwrap()).unwrap()
}

#[test]
fn double_double_reproduces_stamped_references() {
    let fixtures = load_fixtures(FIXTURES).unwrap();
    assert!(fixtures.len() >= 15);
    for f in &fixtures {
        let reference = f.value().unwrap();
        let ours = highprec_eval(&f.expr).unwrap();
        let rel = dd_rel_diff(ours, reference);
        assert!(rel < 1e-29, "{:?}: relative difference {rel:e}", f.expr);
    }
}

#[test]
fn half_q_pochhammer_to_thirty_digits() {
    let s = stamp(&OracleExpr::QpochInfinite { q: 0.5, a: [0.5, 0.0] }, 31).unwrap();
    assert!(s.value_re.starts_with("2.887880950866024212788997219292"), "{}", s.value_re);
}

#[test]
fn main_path_within_declared_error_on_fixtures() {
    for f in load_fixtures(FIXTURES).unwrap() {
        let (diff, bound) = compare_with_main(&f.expr).unwrap();
        assert!(diff <= bound.max(4.0 * f64::EPSILON), "{:?}: {diff:e} > {bound:e}", f.expr);
    }
}

fn rand_c(rng: &mut StdRng, rmin: f64, rmax: f64) -> [f64; 2] {
    let z = Complex::from_polar(rng.gen_range(rmin..rmax), rng.gen_range(0.0..std::f64::consts::TAU));
    [z.re, z.im]
}

#[test]
fn main_path_within_declared_error_on_random_draws() {
    let mut rng = StdRng::seed_from_u64(20261016);
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        let q = rng.gen_range(0.1..0.9);
        let exprs = [
            OracleExpr::QpochInfinite { q, a: rand_c(&mut rng, 0.0, 3.0) },
            OracleExpr::Theta { q, z: rand_c(&mut rng, 0.3, 3.0) },
            OracleExpr::PhiSeries {
                q,
                numer: vec![rand_c(&mut rng, 0.0, 2.0), rand_c(&mut rng, 0.0, 2.0)],
                denom: vec![rand_c(&mut rng, 0.0, 0.8)],
                z: rand_c(&mut rng, 0.0, 0.9),
            },
            OracleExpr::QExponential { q, z: rand_c(&mut rng, 0.0, 2.0), t: rand_c(&mut rng, 0.0, 0.9) },
        ];
        for (i, e) in exprs.iter().enumerate() {
            let (diff, bound) = compare_with_main(e).unwrap();
            assert!(diff <= bound.max(4.0 * f64::EPSILON), "{e:?}: {diff:e} > {bound:e}");
            worst[i] = worst[i].max(diff);
        }
    }
    println!("worst absolute differences {worst:?}");
}

#[test]
fn truncated_eigen_reconstructs_and_matches_bisection() {
    let t = TruncatedOperator::new(&op(Regime::case1(0.4, 3.0).unwrap()), 20).unwrap();
    let eig = t.eigen().unwrap();
    let m = t.matrix();
    let lambda = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.values.clone()));
    let rec = &eig.vectors * lambda * eig.vectors.transpose();
    assert!((rec - &m).norm() < 1e-10 * m.norm());
    assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    // The dense solver is accurate relative to the largest eigenvalue only.
    let norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in [0, 7, 20, 33, 40] {
        let b = t.eigenvalue_bisect(k);
        assert!((b - eig.values[k]).abs() < 1e-12 * norm, "k={k}: {b} vs {}", eig.values[k]);
    }
    assert!(t.off_diagonal().iter().all(|&b| b > 0.0));
}

#[test]
fn truncated_spectrum_fills_continuous_band() {
    // One half of the window carries geometrically growing couplings and feeds
    // eigenvalues far outside [−1, 1]; the other half fills the band. So the count
    // inside grows with N while the fraction settles near one half.
    let o = op(Regime::case2(1.5, -0.4).unwrap());
    let inside = |n: i32| {
        let t = TruncatedOperator::new(&o, n).unwrap();
        let e = t.eigen().unwrap();
        let count = e.values.iter().filter(|v| v.abs() <= 1.0 + 1e-2).count();
        (count, count as f64 / e.values.len() as f64)
    };
    let stats: Vec<(usize, f64)> = [25, 50, 100, 200].into_iter().map(inside).collect();
    assert!(stats.windows(2).all(|w| w[1].0 > w[0].0), "{stats:?}");
    assert!((stats[3].1 - 0.5).abs() < 0.02, "{stats:?}");
}

#[test]
fn truncated_resolve_residual() {
    let t = TruncatedOperator::new(&op(Regime::case2(1.5, -0.4).unwrap()), 60).unwrap();
    let xi = L2Vector::new(-3, vec![c(1.0, 0.0), c(0.0, -2.0), c(0.5, 0.5), c(-1.0, 0.0)]);
    for z in [c(0.0, 2.0), c(0.3, -0.1), c(-4.0, 1e-3)] {
        let x = t.resolve(z, &xi).unwrap();
        assert!(t.resolve_residual(z, &x, &xi) < 1e-12, "{z}");
    }
}

#[test]
fn green_kernel_matches_truncated_solve() {
    let xi = L2Vector::new(-2, vec![c(1.0, 0.0), c(0.0, 0.5), c(-0.3, 0.0), c(0.2, 0.2), c(1.0, -1.0)]);
    for regime in [Regime::case1(0.4, 3.0).unwrap(), Regime::case2(1.5, -0.4).unwrap()] {
        let o = op(regime);
        let fine = green_cross_check(&o, 200, c(0.0, 2.0), &xi).unwrap();
        assert!(fine < 1e-6, "N=200 interior mismatch {fine:e}");
        // Boundary effects shrink as the window doubles, until rounding takes over.
        let small: Vec<f64> = [4, 8, 16].iter().map(|&n| green_cross_check(&o, n, c(0.0, 2.0), &xi).unwrap()).collect();
        println!("{small:?}");
        assert!(small[0] > small[1] && (small[1] > small[2] || small[2] < 1e-13), "{small:?}");
    }
}

#[test]
fn truncated_outliers_approach_located_mass_points() {
    // q-exponential case; the hard cutoff converges to the θ = 0 extension. The
    // dense solver cannot resolve these (its error is eps times q^{−N}), bisection can.
    let o = op(Regime::case1(0.0, 0.8).unwrap());
    let points = qspectral::spectrum::locate_discrete(&o, &o.extension(0.0), 1.05, 30.0).unwrap();
    assert!(!points.is_empty());
    let nearest = |n: i32, x0: f64| {
        let t = TruncatedOperator::new(&o, n).unwrap();
        t.eigenvalues_in(x0 - 0.1, x0 + 0.1).iter().map(|v| (v - x0).abs()).fold(f64::INFINITY, f64::min)
    };
    for p in &points {
        let (coarse, fine) = (nearest(20, p.x0), nearest(80, p.x0));
        assert!(fine < 1e-8 * p.x0.abs(), "x0 = {}: {fine:e}", p.x0);
        assert!(fine <= coarse);
    }
}
