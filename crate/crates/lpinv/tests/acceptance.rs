//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;

use lpinv::verify::{Suite, CRITERIA};

fn main() -> ExitCode {
    let mut suite = Suite::new();
    let mut failed = Vec::new();
    for id in CRITERIA {
        let outcome = suite.run(id);
        println!("{outcome}");
        if !outcome.passed {
            failed.push(id);
        }
    }
    let passed = CRITERIA.len() - failed.len();
    println!("acceptance: {passed}/{} passed", CRITERIA.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
