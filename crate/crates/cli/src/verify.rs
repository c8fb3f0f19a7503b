//! `cpplab verify` — run verification suites and write reports. The report
//! file is updated after every suite with `complete: false`, so an
//! interrupted run leaves a recognizable partial report behind.

use std::fmt::Write as _;
use std::path::Path;

use cpplab_core::harness::VerificationReport;
use cpplab_core::suites::{run_suite, SUITE_NAMES};
use cpplab_core::Error;

use crate::config::{write_json, write_text};
use crate::Failure;

pub fn run(suite: &str, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let names: Vec<&str> = if suite == "all" {
        SUITE_NAMES.to_vec()
    } else if SUITE_NAMES.contains(&suite) {
        vec![suite]
    } else {
        return Err(Failure::Config(format!(
            "unknown suite '{suite}'; registered suites: all, {}",
            SUITE_NAMES.join(", ")
        )));
    };

    let mut report = VerificationReport::new(seed);
    if let Some(dir) = out {
        write_json(dir, "verify-report.json", &report)?;
    }
    for name in names {
        let suite_report = match run_suite(name, seed) {
            Ok(r) => r,
            Err(Error::UnknownSuite(s)) => {
                return Err(Failure::Config(format!("unknown suite '{s}'")))
            }
            Err(e) => return Err(Failure::Run(format!("suite {name} aborted: {e}"))),
        };
        let verdict = if suite_report.passed { "pass" } else { "FAIL" };
        let secs = suite_report.elapsed.map_or(0.0, |d| d.as_secs_f64());
        println!(
            "{verdict}  {name} ({} checks, {secs:.1}s)",
            suite_report.checks.len()
        );
        for check in suite_report.checks.iter().filter(|c| !c.passed) {
            println!("      {}: {}", check.name, check.detail);
        }
        report.push(suite_report);
        if let Some(dir) = out {
            write_json(dir, "verify-report.json", &report)?;
        }
    }
    let report = report.finish();
    if let Some(dir) = out {
        write_json(dir, "verify-report.json", &report)?;
        write_text(dir, "verify-report.csv", &to_csv(&report))?;
    }

    if report.passed {
        println!("all checks passed (seed {seed})");
        Ok(())
    } else {
        Err(Failure::Run("at least one verification check failed".into()))
    }
}

fn to_csv(report: &VerificationReport) -> String {
    let mut csv = String::from("suite,check,passed,detail\n");
    for suite in &report.suites {
        for check in &suite.checks {
            writeln!(
                csv,
                "{},{},{},\"{}\"",
                suite.suite,
                check.name,
                check.passed,
                check.detail.replace('"', "\"\"")
            )
            .expect("write to string");
        }
    }
    csv
}
