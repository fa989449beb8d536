//! Acceptance gate: every criterion at its stated size and tolerance.
//! Prints one line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use pact_core::harness::suite::{run_suite, SuiteScale};

const SEED: u64 = 42;

fn main() -> ExitCode {
    let start = Instant::now();
    let report = run_suite(SuiteScale::Full, SEED, |c| {
        println!("{}", c.summary_line());
        for f in c.failures() {
            println!(
                "    {:?}: {} = {} vs {} (rel_err {:.4}, se {:?}, {:?})",
                f.verdict, f.name, f.empirical, f.predicted, f.rel_err, f.se, f.tolerance
            );
        }
    });
    match report {
        Ok(r) => {
            let failed = r.criteria.iter().filter(|c| !matches!(c.verdict, pact_core::harness::Verdict::Pass)).count();
            println!("acceptance: {} of {} criteria passed in {:.0?}", r.criteria.len() - failed, r.criteria.len(), start.elapsed());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            println!("acceptance: error {e}");
            ExitCode::FAILURE
        }
    }
}
