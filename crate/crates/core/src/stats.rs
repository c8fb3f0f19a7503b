//! Statistical machinery for the verification suites: Kolmogorov–Smirnov
//! tests (one- and two-sample), chi-square goodness of fit with automatic
//! tail merging, and normal-approximation band checks for means, frequencies
//! and ratio estimators.

use crate::error::{invalid, Result};
use crate::special::{chi_square_sf, kolmogorov_sf};
use serde::Serialize;

/// Outcome of a Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Serialize)]
pub struct KsOutcome {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

impl KsOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsOutcome> {
    if samples.len() < 8 {
        return Err(invalid("need at least 8 samples"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut stat = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(invalid("cdf must map into [0, 1]"));
        }
        stat = stat.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsOutcome {
        n: xs.len(),
        statistic: stat,
        p_value: kolmogorov_sf(n.sqrt() * stat),
    })
}

/// One-sample KS test when the CDF has already been evaluated at the order
/// statistics: `fs[i]` is the model CDF at the i-th smallest sample. Useful
/// when each CDF evaluation needs quadrature and may fail.
pub fn ks_from_sorted_cdf_values(fs: &[f64]) -> Result<KsOutcome> {
    if fs.len() < 8 {
        return Err(invalid("need at least 8 samples"));
    }
    let n = fs.len() as f64;
    let mut stat = 0.0f64;
    for (i, &f) in fs.iter().enumerate() {
        if !(0.0..=1.0).contains(&f) {
            return Err(invalid("cdf values must lie in [0, 1]"));
        }
        stat = stat.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsOutcome {
        n: fs.len(),
        statistic: stat,
        p_value: kolmogorov_sf(n.sqrt() * stat),
    })
}

/// Two-sample KS test. Handles ties by evaluating both empirical CDFs at
/// every pooled jump point.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsOutcome> {
    if a.len() < 8 || b.len() < 8 {
        return Err(invalid("need at least 8 samples per side"));
    }
    if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.total_cmp(q));
    ys.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut stat = 0.0f64;
    while i < xs.len() || j < ys.len() {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        stat = stat.max((i as f64 / na - j as f64 / nb).abs());
    }
    let effective = na * nb / (na + nb);
    Ok(KsOutcome {
        n: a.len() + b.len(),
        statistic: stat,
        p_value: kolmogorov_sf(effective.sqrt() * stat),
    })
}

/// Outcome of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: u32,
    pub bins: usize,
    pub p_value: f64,
}

impl ChiSquareOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Chi-square test of an integer-valued sample histogram against a model
/// pmf. `counts[k]` is the number of observations equal to `k`; the model's
/// remaining mass beyond the histogram is folded into a final tail bin, and
/// bins are merged from the right until every expected count is at least 5.
pub fn chi_square_gof<P: Fn(u64) -> f64>(counts: &[u64], pmf: P) -> Result<ChiSquareOutcome> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(invalid("empty histogram"));
    }
    let total = n as f64;
    let mut expected: Vec<f64> = (0..counts.len() as u64).map(|k| total * pmf(k)).collect();
    if expected.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(invalid("pmf produced an invalid expected count"));
    }
    let mut observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    // Tail bin for all values beyond the histogram range.
    let used: f64 = expected.iter().sum();
    expected.push((total - used).max(0.0));
    observed.push(0.0);
    // Group consecutive bins until each group's expected count reaches 5,
    // so the chi-square asymptotics hold; the remainder joins the last group.
    let mut grouped: Vec<(f64, f64)> = Vec::new();
    let (mut acc_o, mut acc_e) = (0.0f64, 0.0f64);
    for (&o, &e) in observed.iter().zip(&expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= 5.0 {
            grouped.push((acc_o, acc_e));
            (acc_o, acc_e) = (0.0, 0.0);
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match grouped.last_mut() {
            Some((o, e)) => {
                *o += acc_o;
                *e += acc_e;
            }
            None => grouped.push((acc_o, acc_e)),
        }
    }
    if grouped.len() < 2 {
        return Err(invalid("histogram needs two bins with expected count >= 5"));
    }
    let statistic: f64 = grouped.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (grouped.len() - 1) as u32;
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        bins: grouped.len(),
        p_value: chi_square_sf(statistic, dof),
    })
}

/// A point estimate with a standard error, checked against a target value.
#[derive(Debug, Clone, Serialize)]
pub struct BandOutcome {
    pub estimate: f64,
    pub se: f64,
    pub target: f64,
    pub sigmas: f64,
}

impl BandOutcome {
    fn build(estimate: f64, se: f64, target: f64) -> Self {
        let sigmas = if se > 0.0 {
            (estimate - target).abs() / se
        } else if estimate == target {
            0.0
        } else {
            f64::INFINITY
        };
        BandOutcome {
            estimate,
            se,
            target,
            sigmas,
        }
    }

    pub fn within(&self, k: f64) -> bool {
        self.sigmas <= k
    }
}

/// Sample mean with its standard error against `target`.
pub fn mean_band(samples: &[f64], target: f64) -> Result<BandOutcome> {
    if samples.len() < 2 {
        return Err(invalid("need at least 2 samples"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok(BandOutcome::build(mean, (var / n).sqrt(), target))
}

/// Bernoulli frequency with its standard error against `target`.
pub fn frequency_band(hits: usize, trials: usize, target: f64) -> Result<BandOutcome> {
    if trials == 0 || hits > trials {
        return Err(invalid("need 0 <= hits <= trials, trials > 0"));
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let se = (p * (1.0 - p) / n).sqrt();
    Ok(BandOutcome::build(p, se, target))
}

/// Ratio-of-sums estimator `Σ numerators / Σ denominators` with the
/// delta-method standard error, against `target`. This is the right
/// estimator for per-unit-length intensities, where dividing replicate by
/// replicate would bias the mean.
pub fn ratio_band(numerators: &[f64], denominators: &[f64], target: f64) -> Result<BandOutcome> {
    if numerators.len() != denominators.len() || numerators.len() < 2 {
        return Err(invalid("need matched samples, at least 2"));
    }
    let n = numerators.len() as f64;
    let den_mean = denominators.iter().sum::<f64>() / n;
    if den_mean <= 0.0 {
        return Err(invalid("denominator mean must be positive"));
    }
    let ratio = numerators.iter().sum::<f64>() / (den_mean * n);
    let resid_var = numerators
        .iter()
        .zip(denominators)
        .map(|(&num, &den)| {
            let r = num - ratio * den;
            r * r
        })
        .sum::<f64>()
        / (n - 1.0);
    let se = (resid_var / n).sqrt() / den_mean;
    Ok(BandOutcome::build(ratio, se, target))
}

/// Empirical CDF evaluated at `x` (samples need not be sorted).
pub fn empirical_cdf(samples: &[f64], x: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|&&s| s <= x).count() as f64 / samples.len() as f64
}
