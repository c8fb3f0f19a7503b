//! `cpplab analytics` — evaluate the closed-form laws for a configuration
//! and emit them as JSON.

use std::io::{self, Write};
use std::path::Path;

use cpplab_core::analytics::{
    ancestral_existence_probability, clonal_onset_cdf, expected_total_mutations,
    laplace_exponent, population_laplace, renewal_density, spectrum_tail_intensity,
    spectrum_tail_limit, windowed_record_probability,
};
use cpplab_core::birth_death::BirthDeathModel;
use cpplab_core::measures::{nu_mu_tail, w_mu};
use cpplab_core::mutation::mutation_count_is_finite;
use cpplab_core::quad::QuadratureConfig;
use serde_json::{json, Map, Value};

use crate::config::{write_json, RunConfig};
use crate::Failure;

fn pairs_to_json(pairs: &[(f64, f64)]) -> Value {
    Value::Array(pairs.iter().map(|(k, v)| json!([k, v])).collect())
}

pub fn run(config: &RunConfig, out: Option<&Path>) -> Result<(), Failure> {
    let cfg = QuadratureConfig::default();
    let pair = config.pair()?;
    let z = config.model.z;
    let mut doc = Map::new();
    doc.insert("config".into(), serde_json::to_value(config)?);

    let tail_z = pair.nu.tail(z);
    doc.insert(
        "window".into(),
        json!({
            "nu_tail": tail_z,
            "w": pair.nu.w(z),
            "w_mu": w_mu(&pair, z, &cfg)?,
            "nu_mu_tail": nu_mu_tail(&pair, z, &cfg)?,
            "expected_span": 1.0 / tail_z,
            "expected_leaves": pair.nu.tail(config.model.epsilon) / tail_z,
        }),
    );

    let finite = mutation_count_is_finite(&pair, &cfg)?;
    let expected = finite
        .then(|| expected_total_mutations(&pair, z, &cfg))
        .transpose()?;
    doc.insert(
        "mutations".into(),
        json!({ "total_count_finite": finite, "expected_total": expected }),
    );

    let etas = [-0.5, 0.0, 0.5, 1.0];
    let onset = etas
        .iter()
        .map(|&eta| Ok((eta, clonal_onset_cdf(&pair, z, eta, &cfg)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    doc.insert(
        "clonal".into(),
        json!({
            "ancestral_existence_probability": ancestral_existence_probability(&pair, z, &cfg)?,
            "onset_cdf": pairs_to_json(&onset),
        }),
    );

    let lambdas = [0.5, 1.0, 2.0];
    let phis = lambdas
        .iter()
        .map(|&l| Ok((l, laplace_exponent(&pair, l, &cfg)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let ts = [0.25 * z, 0.5 * z, 0.75 * z];
    let densities = ts
        .iter()
        .map(|&t| Ok((t, renewal_density(&pair, t, &cfg)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let record_probabilities = ts
        .iter()
        .map(|&t| Ok((t, windowed_record_probability(&pair, z, t, &cfg)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    doc.insert(
        "records".into(),
        json!({
            "laplace_exponent": pairs_to_json(&phis),
            "renewal_density": pairs_to_json(&densities),
            "windowed_record_probability": pairs_to_json(&record_probabilities),
        }),
    );

    let qs = [0.5, 1.0, 2.0];
    let window_tail = qs
        .iter()
        .map(|&q| Ok((q, spectrum_tail_intensity(&pair, z, q, &cfg)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let limit_tail = qs
        .iter()
        .map(|&q| Ok((q, spectrum_tail_limit(config.model.theta, q)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    doc.insert(
        "spectrum".into(),
        json!({
            "per_length_tail": pairs_to_json(&window_tail),
            "limit_tail": pairs_to_json(&limit_tail),
        }),
    );

    if let Some(section) = &config.birth_death {
        let model = BirthDeathModel::constant(section.birth, section.death)?;
        let horizon = section.horizon;
        let alphas = [0.25, 0.5, 1.0, 2.0];
        let laplace = alphas
            .iter()
            .map(|&a| Ok((a, population_laplace(&model, 0.0, horizon, a)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        doc.insert(
            "birth_death".into(),
            json!({
                "survival_probability": model.survival_probability(0.0, horizon)?,
                "population_laplace": pairs_to_json(&laplace),
                "extinction_probability": population_laplace(&model, 0.0, horizon, f64::INFINITY)?,
            }),
        );
    }

    let doc = Value::Object(doc);
    if let Some(dir) = out {
        write_json(dir, "analytics.json", &doc)?;
    }
    // Tolerate a closed pipe (e.g. `cpplab analytics | head`): the file, if
    // requested, is already on disk by this point.
    let rendered = serde_json::to_string_pretty(&doc)?;
    if let Err(err) = writeln!(io::stdout(), "{rendered}") {
        if err.kind() != io::ErrorKind::BrokenPipe {
            return Err(err.into());
        }
    }
    Ok(())
}
