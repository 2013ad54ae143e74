//! Runs the twelve acceptance criteria and prints one line per criterion.

use control_energy::acceptance::{self, format_line, AcceptanceOptions};

#[test]
fn acceptance_criteria() {
    let report = acceptance::run(&[], &AcceptanceOptions::default()).expect("acceptance run");
    println!();
    for o in &report.outcomes {
        println!("{}", format_line(o));
    }
    let passed = report.outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", report.outcomes.len());
    assert!(report.passed(), "failing criteria:\n{}", report.table());
}

#[test]
fn negative_control_fails_law_criteria() {
    let opts = AcceptanceOptions { mis_specify: true, ..AcceptanceOptions::default() };
    let report = acceptance::run(&[8, 10], &opts).expect("acceptance run");
    for o in &report.outcomes {
        println!("{}", format_line(o));
        assert!(!o.pass, "criterion {} passed a mis-specified law", o.id);
    }
}
