//! Continuous density, mass points and the two q²-grids of the q-exponential
//! case; also the elliptic function behind them.

use std::f64::consts::PI;

use qspectral::jacobi::{JacobiOperator, Regime};
use qspectral::spectrum::{
    continuous_density, discrete_mass, elliptic_zero_pole_count, fit_quadratic_grids, locate_discrete,
};
use qspectral::QBase;

fn main() -> qspectral::Result<()> {
    let q = QBase::new(0.5)?;
    let op = JacobiOperator::new(Regime::case1(0.0, 0.8)?, q)?;
    let ext = op.extension(0.9);

    println!("density at chi = k pi/8:");
    for k in 1..8 {
        let chi = PI * k as f64 / 8.0;
        println!("  chi = {chi:.4}  x = {:+.4}  w = {:.6e}", chi.cos(), continuous_density(&op, &ext, chi)?);
    }

    let mut points = locate_discrete(&op, &ext, -1e5, -1.0001)?;
    points.extend(locate_discrete(&op, &ext, 1.0001, 1e5)?);
    println!("{} mass points with 1 < |x| <= 1e5:", points.len());
    for p in &points {
        println!("  x0 = {:+.10e}  m_00 = {:.6e}", p.x0, discrete_mass(&op, p, 0, 0)?.re);
    }
    let fit = fit_quadratic_grids(&points, q);
    println!("q^2-grids: y_i = {:?}, max residual {:.1e}", fit.grids, fit.max_residual);
    println!("elliptic g: (zeros, poles) per cell = {:?}", elliptic_zero_pole_count(0.8, q, 400)?);
    Ok(())
}
