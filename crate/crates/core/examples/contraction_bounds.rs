//! Randomised check of ||f*b - f|| <= Λ/(1-Λ) ||f - b|| in L^1, L^2, sup
//! and the p = 1/2 metric. The first trial uses f = b, where both sides
//! vanish, so the least slack reported is 0.
//!
//!     cargo run --release --example contraction_bounds -- 50

use fracconv::analysis::{run_suite, Suite, TrialConfig};

fn main() -> fracconv::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    for p in [1.0, 2.0, f64::INFINITY, 0.5] {
        let tc = TrialConfig { trials, ..TrialConfig::default().with_p(p)? };
        let report = run_suite(Suite::Contraction, &tc)?;
        let check = report.check("contraction").expect("contraction check");
        println!(
            "p = {p:<4} {} comparisons, {} violations, least slack {:+.3e}",
            check.trials,
            check.violations,
            check.worst_slack.unwrap_or(0.0)
        );
    }
    Ok(())
}
