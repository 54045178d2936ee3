//! Acceptance suite: runs every verification criterion at its stated
//! tolerance and prints one pass/fail line per criterion.
//!
//! Set ESCAPEDIM_ACCEPT=quick to run the reduced-radius variant.

use escapedim::verify::{run_all, SuiteOptions};

#[test]
fn acceptance_criteria() {
    let quick = std::env::var("ESCAPEDIM_ACCEPT").as_deref() == Ok("quick");
    let results = run_all(&SuiteOptions { quick });
    let failed: Vec<_> = results.iter().filter(|r| !r.pass).collect();
    println!(
        "\n{} criteria, {} passed, {} failed",
        results.len(),
        results.len() - failed.len(),
        failed.len()
    );
    assert!(
        failed.is_empty(),
        "failing criteria: {:?}",
        failed.iter().map(|r| r.name).collect::<Vec<_>>()
    );
}
