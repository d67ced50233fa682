//! Runs the quadratic-transformation checks and prints one residual per case.

use qspectral::quadratic::quadratic_suite;
use qspectral::QBase;

fn main() -> qspectral::Result<()> {
    for q in [0.3, 0.5, 0.8] {
        println!("q = {q}");
        for row in quadratic_suite(QBase::new(q)?)? {
            println!("  {:<20} {:>10.3e}  {}", row.case, row.residual, row.params);
        }
    }
    Ok(())
}
