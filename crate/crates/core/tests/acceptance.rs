//! End-to-end acceptance criteria. Run with
//! `cargo test -p kobpath --test acceptance -- --nocapture` to see the table.

use kobpath::acceptance::{run_suite, SuiteConfig};

// One sequential test so the timing budgets are not shared with other tests.
#[test]
fn acceptance_suite() {
    let outcomes = run_suite(&SuiteConfig::default()).expect("built-in specs are valid");
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
