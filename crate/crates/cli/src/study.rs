//! `cpplab epsilon-study` — run the ε-refinement protocol on a registered
//! statistic and flag non-convergence (useful before trusting a resolution).

use std::fmt::Write as _;
use std::path::Path;

use cpplab_core::clonal::{ancestral_clonal_set, record_clonal_set};
use cpplab_core::comb::sample_comb;
use cpplab_core::harness::epsilon_study;
use cpplab_core::mutation::sample_marks;

use crate::config::{write_json, write_text, RunConfig};
use crate::Failure;

pub const STATISTICS: [&str; 5] = [
    "clonal-mass",
    "ancestral-mass",
    "span",
    "leaf-count",
    "mark-count",
];

pub fn run(
    config: &RunConfig,
    statistic: &str,
    seed: u64,
    ladder: &[f64],
    out: &Path,
) -> Result<(), Failure> {
    let pair = config.pair()?;
    let (z, theta) = (config.model.z, config.model.theta);
    let n = config.run.replicates;

    let study = match statistic {
        "span" => epsilon_study(statistic, seed, n, ladder, |eps, rng| {
            Ok(sample_comb(&pair.nu, z, eps, rng)?.span)
        })?,
        "leaf-count" => epsilon_study(statistic, seed, n, ladder, |eps, rng| {
            Ok(sample_comb(&pair.nu, z, eps, rng)?.n_leaves() as f64)
        })?,
        "mark-count" => epsilon_study(statistic, seed, n, ladder, |eps, rng| {
            let tree = sample_comb(&pair.nu, z, eps, rng)?;
            Ok(sample_marks(&pair, &tree, eps, theta, rng)?.marks.len() as f64)
        })?,
        "clonal-mass" => epsilon_study(statistic, seed, n, ladder, |eps, rng| {
            let tree = sample_comb(&pair.nu, z, eps, rng)?;
            let marked = sample_marks(&pair, &tree, eps, theta, rng)?;
            Ok(record_clonal_set(&marked).total_length())
        })?,
        "ancestral-mass" => epsilon_study(statistic, seed, n, ladder, |eps, rng| {
            let tree = sample_comb(&pair.nu, z, eps, rng)?;
            let marked = sample_marks(&pair, &tree, eps, theta, rng)?;
            Ok(ancestral_clonal_set(&marked).total_length())
        })?,
        other => {
            return Err(Failure::Config(format!(
                "unknown statistic '{other}'; registered: {}",
                STATISTICS.join(", ")
            )))
        }
    };

    println!("statistic {statistic}, seed {seed}, {n} replicates per rung");
    for r in &study.rungs {
        println!(
            "  eps {:<12} estimate {:.6} +- {:.6}",
            r.epsilon, r.estimate, r.se
        );
    }
    for d in &study.drifts {
        let verdict = if d.within { "ok" } else { "EXCEEDS NOISE" };
        println!(
            "  {} -> {}: drift {:+.6} ({:+.2} combined SE) {verdict}",
            d.from_epsilon,
            d.to_epsilon,
            d.drift,
            d.drift / d.combined_se
        );
    }

    write_json(out, "epsilon-study.json", &study)?;
    let mut csv = String::from("epsilon,estimate,se,replicates\n");
    for r in &study.rungs {
        writeln!(csv, "{},{},{},{}", r.epsilon, r.estimate, r.se, r.replicates)
            .expect("write to string");
    }
    write_text(out, "epsilon-study.csv", &csv)?;

    if study.converged {
        println!("converged at the bottom rung (config hash {:016x})", study.config_hash);
        Ok(())
    } else {
        Err(Failure::Run(
            "the statistic drifted by more than the combined noise at the bottom rung".into(),
        ))
    }
}
