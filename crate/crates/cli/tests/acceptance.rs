//! One line per acceptance criterion; exits nonzero if any criterion fails.

use dfcli::checks::{run_suite, CheckParams};
use std::process::ExitCode;

const CRITERIA: [(&str, &str); 12] = [
    ("car", "CAR oracle equivalence"),
    ("fock", "Fock sector consistency"),
    ("frame", "frame sign law"),
    ("groupoid", "groupoid axioms"),
    ("two_action", "2-action laws"),
    ("expectation", "conditional expectation"),
    ("approx_unit", "quasi-central approximate unit"),
    ("derivation", "derivation identities"),
    ("galilean", "Galilean covariance"),
    ("canonical", "canonical order"),
    ("selfbinding", "self-binding experiment"),
    ("metric", "pattern metric"),
];

fn main() -> ExitCode {
    let params = CheckParams::default();
    let mut failed = 0;
    for (k, (suite, title)) in CRITERIA.iter().enumerate() {
        let report = run_suite(suite, &params).expect("suite names are known");
        println!("criterion {:>2} {:<32} {}", k + 1, title, report.line());
        if !report.passed {
            failed += 1;
            for d in &report.details {
                println!("    {d}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
