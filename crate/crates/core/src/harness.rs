//! Scaffolding for replicated Monte Carlo experiments: deterministic
//! parallel replicate execution (each replicate gets its own counter-derived
//! random stream, so results do not depend on the worker count) and
//! serializable verification reports.
//!
//! Wall-clock fields are excluded from serialization so that two runs with
//! the same seed produce byte-identical report files.

use crate::error::{invalid, Result};
use crate::rng::RandomStream;
use crate::stats::{mean_band, BandOutcome, ChiSquareOutcome, KsOutcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// FNV-1a over the canonical textual form of a configuration, used to make
/// reports self-describing: two reports with equal hashes came from equal
/// inputs (up to hash collisions), regardless of where they were produced.
pub fn config_hash(text: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in text.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Runs `n` replicates of `f` in parallel. Replicate `i` receives a random
/// stream derived from `(master_seed, label, i)`, and results are returned
/// in replicate order, so the output is a pure function of the arguments.
pub fn run_replicates<T, F>(master_seed: u64, label: &str, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut RandomStream) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::derive(master_seed, label, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// [`run_replicates`] for fallible replicates; the first error (in replicate
/// order within each rayon batch) aborts the run.
pub fn try_run_replicates<T, F>(
    master_seed: u64,
    label: &str,
    n: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut RandomStream) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::derive(master_seed, label, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// One named pass/fail check inside a suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn from_ks(name: impl Into<String>, out: &KsOutcome, alpha: f64) -> Self {
        CheckReport::new(
            name,
            out.passes(alpha),
            format!(
                "KS n={} D={:.6} p={:.6} (alpha={alpha})",
                out.n, out.statistic, out.p_value
            ),
        )
    }

    pub fn from_band(name: impl Into<String>, out: &BandOutcome, k: f64) -> Self {
        CheckReport::new(
            name,
            out.within(k),
            format!(
                "estimate={:.6} target={:.6} se={:.6} ({:.2} sigmas, limit {k})",
                out.estimate, out.target, out.se, out.sigmas
            ),
        )
    }

    pub fn from_chi_square(name: impl Into<String>, out: &ChiSquareOutcome, alpha: f64) -> Self {
        CheckReport::new(
            name,
            out.passes(alpha),
            format!(
                "chi2={:.4} dof={} bins={} p={:.6} (alpha={alpha})",
                out.statistic, out.dof, out.bins, out.p_value
            ),
        )
    }
}

/// Report for one verification suite: a sequence of checks plus a rollup.
/// `complete` is false while a run is still in progress, so a partially
/// written report is recognizable after an interruption.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub config_hash: u64,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
    pub complete: bool,
    #[serde(skip)]
    pub elapsed: Option<Duration>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        let suite = suite.into();
        let config_hash = config_hash(&format!("{suite}|{seed}"));
        SuiteReport {
            suite,
            seed,
            config_hash,
            checks: Vec::new(),
            passed: true,
            complete: false,
            elapsed: None,
        }
    }

    pub fn push(&mut self, check: CheckReport) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    /// Marks the suite as having run to completion.
    pub fn finish(mut self, elapsed: Duration) -> Self {
        self.complete = true;
        self.elapsed = Some(elapsed);
        self
    }
}

/// Bundle of suite reports, as produced by a full verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
    pub complete: bool,
}

impl VerificationReport {
    pub fn new(seed: u64) -> Self {
        VerificationReport {
            seed,
            suites: Vec::new(),
            passed: true,
            complete: false,
        }
    }

    pub fn push(&mut self, suite: SuiteReport) {
        self.passed &= suite.passed;
        self.suites.push(suite);
    }

    pub fn finish(mut self) -> Self {
        self.complete = true;
        self
    }
}

/// Runs `f` and returns its output with the elapsed wall-clock time.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// One rung of an ε-refinement study: the statistic's mean and standard
/// error at a fixed truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRung {
    pub epsilon: f64,
    pub estimate: f64,
    pub se: f64,
    pub replicates: usize,
}

/// Drift of the statistic between two neighbouring rungs. `within` is the
/// convergence verdict for the step: |drift| at most three combined
/// standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RungDrift {
    pub from_epsilon: f64,
    pub to_epsilon: f64,
    pub drift: f64,
    pub combined_se: f64,
    pub within: bool,
}

/// Report of an ε-refinement study. `converged` judges the bottom (finest)
/// step: refining past the final rung moved the estimate by less than the
/// noise, so the truncation bias is resolved at the ladder's foot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStudy {
    pub statistic: String,
    pub seed: u64,
    pub replicates: usize,
    pub rungs: Vec<EpsilonRung>,
    pub drifts: Vec<RungDrift>,
    pub converged: bool,
    pub config_hash: u64,
}

/// Evaluates `statistic_fn` over `replicates` streams at every truncation
/// level of the strictly decreasing `ladder` and reports how the mean
/// drifts as ε refines. Replicate `i` reuses the same derived stream at
/// every rung (common random numbers), so a statistic whose draws do not
/// depend on ε drifts by exactly zero and truncation effects are not
/// drowned in fresh Monte Carlo noise.
pub fn epsilon_study<F>(
    statistic: &str,
    seed: u64,
    replicates: usize,
    ladder: &[f64],
    statistic_fn: F,
) -> Result<EpsilonStudy>
where
    F: Fn(f64, &mut RandomStream) -> Result<f64> + Sync,
{
    if ladder.is_empty() {
        return Err(invalid("the ε ladder must not be empty"));
    }
    if ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("the ε ladder must be strictly decreasing"));
    }
    if replicates < 2 {
        return Err(invalid("need at least 2 replicates for a standard error"));
    }
    let mut rungs = Vec::with_capacity(ladder.len());
    for &epsilon in ladder {
        let samples =
            try_run_replicates(seed, statistic, replicates, |_, rng| statistic_fn(epsilon, rng))?;
        let band = mean_band(&samples, 0.0)?;
        rungs.push(EpsilonRung {
            epsilon,
            estimate: band.estimate,
            se: band.se,
            replicates,
        });
    }
    let drifts: Vec<RungDrift> = rungs
        .windows(2)
        .map(|w| {
            let drift = w[1].estimate - w[0].estimate;
            let combined_se = (w[0].se * w[0].se + w[1].se * w[1].se).sqrt();
            RungDrift {
                from_epsilon: w[0].epsilon,
                to_epsilon: w[1].epsilon,
                drift,
                combined_se,
                within: drift.abs() <= 3.0 * combined_se,
            }
        })
        .collect();
    let converged = drifts.last().is_none_or(|d| d.within);
    let config_hash = config_hash(&format!("{statistic}|{seed}|{replicates}|{ladder:?}"));
    Ok(EpsilonStudy {
        statistic: statistic.to_string(),
        seed,
        replicates,
        rungs,
        drifts,
        converged,
        config_hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::invalid;

    #[test]
    fn replicates_are_order_stable_and_seed_deterministic() {
        let a = run_replicates(11, "pool", 64, |i, rng| (i, rng.uniform()));
        let b = run_replicates(11, "pool", 64, |i, rng| (i, rng.uniform()));
        assert_eq!(a, b);
        for (i, (j, _)) in a.iter().enumerate() {
            assert_eq!(i, *j);
        }
        let c = run_replicates(12, "pool", 64, |_, rng| rng.uniform());
        assert_ne!(
            a.iter().map(|p| p.1).collect::<Vec<_>>(),
            c,
            "different master seeds must decorrelate"
        );
    }

    #[test]
    fn labels_decorrelate_streams() {
        let a = run_replicates(11, "alpha", 16, |_, rng| rng.uniform());
        let b = run_replicates(11, "beta", 16, |_, rng| rng.uniform());
        assert_ne!(a, b);
    }

    #[test]
    fn try_run_propagates_errors() {
        let ok = try_run_replicates(3, "t", 8, |_, rng| Ok(rng.uniform())).unwrap();
        assert_eq!(ok.len(), 8);
        let bad: Result<Vec<f64>> = try_run_replicates(3, "t", 8, |i, _| {
            if i == 5 {
                Err(invalid("replicate five is unlucky"))
            } else {
                Ok(0.0)
            }
        });
        assert!(bad.is_err());
    }

    #[test]
    fn merged_results_are_independent_of_worker_count_and_merge_order() {
        // Results are collected in replicate order whatever the thread
        // count, so downstream sequential reduction is bit-reproducible.
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_replicates(19, "merge", 128, |_, rng| rng.uniform()));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_replicates(19, "merge", 128, |_, rng| rng.uniform()));
        assert_eq!(single, four);

        // Rank-based reducers do not care how the partial sample sets are
        // interleaved: a shuffled pooling gives the identical outcome.
        use rand::seq::SliceRandom;
        let mut shuffled = single.clone();
        let mut rng = RandomStream::from_seed(23);
        shuffled.shuffle(rng.raw());
        let cdf = |x: f64| x;
        let a = crate::stats::ks_one_sample(&single, cdf).unwrap();
        let b = crate::stats::ks_one_sample(&shuffled, cdf).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn epsilon_invariant_statistic_has_exactly_zero_drift() {
        use crate::comb::sample_comb;
        use crate::measures::IntensityMeasure;
        // The comb span is drawn before any ε-dependent variate, so shared
        // replicate streams make its samples identical across rungs.
        let study = epsilon_study("span-mean", 31, 400, &[0.1, 0.05, 0.025], |eps, rng| {
            Ok(sample_comb(&IntensityMeasure::Brownian, 1.0, eps, rng)?.span)
        })
        .unwrap();
        assert!(study.converged);
        assert_eq!(study.rungs.len(), 3);
        assert_eq!(study.drifts.len(), 2);
        for d in &study.drifts {
            assert_eq!(d.drift, 0.0);
            assert!(d.within);
        }
        // The span has mean 1/ν̄(1) = 1.
        let r = &study.rungs[0];
        assert!((r.estimate - 1.0).abs() < 3.0 * r.se, "span mean {}", r.estimate);
    }

    #[test]
    fn clonal_mass_mean_converges_down_the_ladder() {
        use crate::clonal::record_clonal_set;
        use crate::comb::sample_comb;
        use crate::measures::{IntensityMeasure, MeasurePair, MutationMeasure};
        use crate::mutation::sample_marks;
        let p = MeasurePair::new(
            IntensityMeasure::Brownian,
            MutationMeasure::uniform(1.0).unwrap(),
        );
        let study = epsilon_study(
            "clonal-mass",
            37,
            500,
            &[1e-2, 5e-3, 2.5e-3],
            |eps, rng| {
                let comb = sample_comb(&p.nu, 1.0, eps, rng)?;
                let marked = sample_marks(&p, &comb, eps, 1.0, rng)?;
                Ok(record_clonal_set(&marked).total_length())
            },
        )
        .unwrap();
        assert!(
            study.converged,
            "bottom-rung drift {:?}",
            study.drifts.last()
        );
    }

    #[test]
    fn coarse_rung_is_flagged_and_ladders_are_validated() {
        use crate::comb::sample_comb;
        use crate::measures::IntensityMeasure;
        // ε = 0.5 inside a height-1 window truncates half the comb; the
        // leaf count shifts by far more than the Monte Carlo noise.
        let study = epsilon_study("leaf-count", 41, 300, &[0.5, 0.05, 0.04], |eps, rng| {
            Ok(sample_comb(&IntensityMeasure::Brownian, 1.0, eps, rng)?.atoms.len() as f64 + 1.0)
        })
        .unwrap();
        assert!(!study.drifts[0].within, "coarse rung must be flagged");

        let noop = |_: f64, _: &mut RandomStream| Ok(0.0);
        assert!(epsilon_study("x", 1, 100, &[0.1, 0.1], noop).is_err());
        assert!(epsilon_study("x", 1, 100, &[0.05, 0.1], noop).is_err());
        assert!(epsilon_study("x", 1, 100, &[], noop).is_err());
        assert!(epsilon_study("x", 1, 1, &[0.1], noop).is_err());
    }

    #[test]
    fn studies_are_deterministic_and_self_describing() {
        let run = |name: &str| {
            epsilon_study(name, 7, 50, &[0.2, 0.1], |eps, rng| Ok(eps * rng.uniform())).unwrap()
        };
        let a = run("demo");
        let b = run("demo");
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, serde_json::to_string(&b).unwrap());
        for field in ["seed", "epsilon", "replicates", "config_hash"] {
            assert!(json.contains(field), "report must embed {field}");
        }
        assert_ne!(a.config_hash, run("other").config_hash);
    }

    #[test]
    fn reports_roll_up_and_serialize_without_runtime_fields() {
        let mut suite = SuiteReport::new("demo", 42);
        suite.push(CheckReport::new("first", true, "ok"));
        suite.push(CheckReport::new("second", false, "off by a lot"));
        let suite = suite.finish(Duration::from_millis(10));
        assert!(!suite.passed);
        assert!(suite.complete);

        let json = serde_json::to_string(&suite).unwrap();
        assert!(!json.contains("elapsed"), "runtime must not be serialized");
        let back: SuiteReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.checks.len(), 2);
        assert_eq!(back.elapsed, None);

        let mut report = VerificationReport::new(42);
        report.push(suite);
        assert!(!report.passed);
        assert!(!report.complete);
        assert!(report.finish().complete);
    }
}
