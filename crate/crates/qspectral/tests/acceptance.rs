//! Acceptance runner: one line per criterion, nonzero exit on any failure.
//! Run with `cargo test --test acceptance`; `-- --verbose` lists every check.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qspectral::transforms::MeasureOptions;
use qspectral::verify::{self, SuiteReport};

struct Criterion {
    id: u8,
    title: &'static str,
    /// Wall-clock budget for the whole criterion, if one is stated.
    budget: Option<Duration>,
    run: fn() -> SuiteReport,
}

fn orthogonality_each_case() -> SuiteReport {
    // The time budget applies per (regime, θ), so time them one by one.
    let opts = MeasureOptions::default();
    let reports: Vec<SuiteReport> = verify::default_orthogonality_cases()
        .into_iter()
        .map(|case| {
            let start = Instant::now();
            let r = verify::orthogonality(&[case], &opts);
            let elapsed = start.elapsed();
            if elapsed > Duration::from_secs(300) {
                println!("   orthogonality case took {elapsed:?}, over the 5 min budget");
                return SuiteReport { pass: false, ..r };
            }
            r
        })
        .collect();
    verify::aggregate("orthogonality", &reports)
}

const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, title: "recurrence residuals", budget: Some(Duration::from_secs(10)), run: || verify::recurrence(5, 20261016) },
    Criterion { id: 2, title: "connection identities and c-determinant", budget: None, run: verify::connection },
    Criterion { id: 3, title: "Wronskian suite", budget: None, run: verify::wronskian },
    Criterion { id: 4, title: "extension machinery", budget: None, run: verify::extension },
    Criterion {
        id: 5,
        title: "quadratic transformation",
        budget: Some(Duration::from_secs(30)),
        run: || verify::quadratic(&[0.3, 0.5, 0.8]),
    },
    Criterion { id: 6, title: "orthogonality", budget: None, run: orthogonality_each_case },
    Criterion { id: 7, title: "inversion round trip", budget: None, run: || verify::inversion(&MeasureOptions::default()) },
    Criterion { id: 8, title: "discrete-spectrum structure", budget: None, run: verify::discrete_structure },
    Criterion { id: 9, title: "resolvent cross-check", budget: None, run: verify::resolvent },
    Criterion { id: 10, title: "q-exponential limit", budget: None, run: verify::qexp_limit },
    Criterion { id: 11, title: "boundary diagnostic", budget: None, run: verify::boundary },
];

fn main() -> ExitCode {
    let verbose = std::env::args().any(|a| a == "--verbose");
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let report = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.budget.map_or(true, |b| elapsed <= b);
        let pass = report.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {:<40} checks={:<4} max_residual={:.3e} time={:.2}s{}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            report.cases,
            report.max_residual,
            elapsed.as_secs_f64(),
            if in_time { "" } else { " (over budget)" },
        );
        for check in &report.checks {
            if verbose || !check.passed() {
                let status = if check.passed() { "ok" } else { "FAILED" };
                let detail = check.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default();
                println!("     {status:<6} {} = {:.3e} (tol {:e}, {:?}){detail}", check.name, check.value, check.tolerance, check.bound);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", CRITERIA.len());
        ExitCode::FAILURE
    }
}
