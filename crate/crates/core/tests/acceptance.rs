//! Acceptance gate: one test per criterion. Each test runs the matching
//! verification suite end to end against a fixed master seed, prints a
//! one-line verdict, and fails when any check inside the suite fails.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! verdict lines even when everything passes.

use cpplab_core::harness::SuiteReport;
use cpplab_core::suites::run_suite;

const MASTER_SEED: u64 = 2026;

fn run(index: usize, name: &str) {
    let report = run_suite(name, MASTER_SEED)
        .unwrap_or_else(|e| panic!("criterion {index} ({name}): suite aborted: {e}"));
    announce(index, name, &report);
    assert!(
        report.passed,
        "criterion {index} ({name}) failed:\n{}",
        describe_failures(&report)
    );
}

fn announce(index: usize, name: &str, report: &SuiteReport) {
    let verdict = if report.passed { "pass" } else { "FAIL" };
    let secs = report.elapsed.map_or(0.0, |d| d.as_secs_f64());
    println!(
        "criterion {index:2} {verdict}  {name} ({} checks, {secs:.1}s)",
        report.checks.len()
    );
}

fn describe_failures(report: &SuiteReport) -> String {
    report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("  {}: {}", c.name, c.detail))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_01_cpp_construction() {
    run(1, "cpp-construction");
}

#[test]
fn criterion_02_clonal_mass() {
    run(2, "clonal-mass");
}

#[test]
fn criterion_03_clonal_existence() {
    run(3, "clonal-existence");
}

#[test]
fn criterion_04_renewal_density() {
    run(4, "renewal-density");
}

#[test]
fn criterion_05_reduced_subtree() {
    run(5, "reduced-subtree");
}

#[test]
fn criterion_06_spectrum() {
    run(6, "spectrum");
}

#[test]
fn criterion_07_mutation_count() {
    run(7, "mutation-count");
}

#[test]
fn criterion_08_growth() {
    run(8, "growth");
}

#[test]
fn criterion_09_birth_death() {
    run(9, "birth-death");
}

#[test]
fn criterion_10_pure_birth() {
    run(10, "pure-birth");
}

#[test]
fn criterion_11_determinism() {
    run(11, "determinism");
}
