//! Acceptance criteria A1-A13. Prints one line per criterion; run with
//! `cargo test --release --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use cuttree::stats::Verdict;
use cuttree::verify::{run_suite, DEFAULT_SEED, SUITES};

fn line(id: usize, suite: &str, verdicts: &[Verdict], secs: f64) -> String {
    let pass = verdicts.iter().all(|v| v.pass);
    let detail: Vec<String> = verdicts
        .iter()
        .map(|v| format!("{}={:.6} (thr {:e}, n {})", v.name, v.statistic, v.threshold, v.n_samples))
        .collect();
    format!(
        "A{id:<2} {:<4} {suite:<16} {} [{secs:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        detail.join("; ")
    )
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for (i, (suite, _)) in SUITES.iter().enumerate() {
        let start = Instant::now();
        let verdicts = run_suite(suite, DEFAULT_SEED).expect("suite runs");
        let out = line(i + 1, suite, &verdicts, start.elapsed().as_secs_f64());
        println!("{out}");
        if !verdicts.iter().all(|v| v.pass) {
            failed.push(out);
        }
    }
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
