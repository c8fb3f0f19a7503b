//! `cpplab simulate` — draw replicated random objects, write the first
//! replicate's full artifacts plus a per-replicate summary CSV.

use std::fmt::Write as _;
use std::path::Path;

use cpplab_core::birth_death::{simulate_bd, RateMeasure};
use cpplab_core::clonal::{allelic_partition, record_clonal_set};
use cpplab_core::comb::sample_comb;
use cpplab_core::growth::{grow_clonal, sample_clonal_tree};
use cpplab_core::harness::try_run_replicates;
use cpplab_core::mutation::sample_marks;
use cpplab_core::simple_tree::simple_tree_from_comb;
use serde_json::json;

use crate::config::{write_json, write_text, RunConfig};
use crate::{Failure, SimKind};

pub fn run(kind: SimKind, config: &RunConfig, seed: u64, out: &Path) -> Result<(), Failure> {
    let resolved = json!({
        "kind": format!("{kind:?}").to_lowercase(),
        "seed": seed,
        "config": config,
    });
    write_json(out, "resolved-config.json", &resolved)?;
    match kind {
        SimKind::Cpp => cpp(config, seed, out),
        SimKind::Bd => bd(config, seed, out),
        SimKind::Growth => growth(config, seed, out),
    }
}

fn cpp(config: &RunConfig, seed: u64, out: &Path) -> Result<(), Failure> {
    let pair = config.pair()?;
    let (z, eps, theta) = (config.model.z, config.model.epsilon, config.model.theta);
    let n = config.run.replicates;

    let reps = try_run_replicates(seed, "simulate/cpp", n, |i, rng| {
        let tree = sample_comb(&pair.nu, z, eps, rng)?;
        let marked = sample_marks(&pair, &tree, eps, theta, rng)?;
        let partition = allelic_partition(&marked);
        let row = (
            tree.span,
            tree.n_leaves(),
            marked.marks.len(),
            record_clonal_set(&marked).total_length(),
            partition.ancestral.total_length(),
            partition.alleles.len(),
        );
        Ok((row, (i == 0).then_some((marked, partition))))
    })?;

    let mut csv = String::from("replicate,span,leaves,marks,record_mass,ancestral_mass,alleles\n");
    for (i, ((span, leaves, marks, record, ancestral, alleles), _)) in reps.iter().enumerate() {
        writeln!(csv, "{i},{span},{leaves},{marks},{record},{ancestral},{alleles}")
            .expect("write to string");
    }
    write_text(out, "summary.csv", &csv)?;

    let (marked, partition) = reps
        .into_iter()
        .next()
        .and_then(|r| r.1)
        .expect("replicate 0 carries artifacts");
    write_json(out, "comb.json", &marked)?;
    write_json(out, "mutations.json", &partition)?;
    let mut newick = simple_tree_from_comb(&marked.tree).to_newick();
    newick.push('\n');
    write_text(out, "comb.nwk", &newick)?;
    println!(
        "wrote {} replicates to {} (comb.json, comb.nwk, mutations.json, summary.csv)",
        config.run.replicates,
        out.display()
    );
    Ok(())
}

fn bd(config: &RunConfig, seed: u64, out: &Path) -> Result<(), Failure> {
    let section = config.birth_death_section()?;
    let beta = RateMeasure::constant(section.birth);
    let kappa = RateMeasure::constant(section.death);
    let horizon = section.horizon;
    let pure_birth = section.death == 0.0;
    let n = config.run.replicates;

    let reps = try_run_replicates(seed, "simulate/bd", n, |i, rng| {
        let tree = simulate_bd(&beta, &kappa, 0.0, horizon, rng)?;
        let estimate = pure_birth
            .then(|| tree.boundary_estimate(&cpplab_core::simple_tree::NodeLabel::root()))
            .transpose()?;
        let row = (tree.population(), tree.len(), tree.log_weight, estimate);
        Ok((row, (i == 0).then_some(tree)))
    })?;

    let mut csv = String::from("replicate,population,nodes,log_weight,boundary_estimate\n");
    for (i, ((population, nodes, log_weight, estimate), _)) in reps.iter().enumerate() {
        let est = estimate.map_or(String::new(), |e| e.to_string());
        writeln!(csv, "{i},{population},{nodes},{log_weight},{est}").expect("write to string");
    }
    write_text(out, "summary.csv", &csv)?;

    let tree = reps
        .into_iter()
        .next()
        .and_then(|r| r.1)
        .expect("replicate 0 carries artifacts");
    write_json(out, "bd.json", &tree)?;
    let mut newick = tree.to_newick();
    newick.push('\n');
    write_text(out, "bd.nwk", &newick)?;
    println!(
        "wrote {} replicates to {} (bd.json, bd.nwk, summary.csv)",
        n,
        out.display()
    );
    Ok(())
}

fn growth(config: &RunConfig, seed: u64, out: &Path) -> Result<(), Failure> {
    let section = *config.growth_section()?;
    let pair = config.pair()?;
    let (z, eps) = (config.model.z, config.model.epsilon);
    let n = config.run.replicates;

    let reps = try_run_replicates(seed, "simulate/growth", n, |i, rng| {
        let start = sample_clonal_tree(&pair, z, eps, (-section.eta0).exp(), rng)?;
        let outcome = grow_clonal(&pair, &start, section.eta0, section.eta1, eps, rng)?;
        let row = (
            start.bud_count(),
            outcome.tree.bud_count(),
            outcome.tree.total_length(),
            outcome
                .events
                .iter()
                .map(|e| {
                    (
                        e.eta,
                        e.bud.to_string(),
                        e.new_buds,
                        e.frozen_buds,
                    )
                })
                .collect::<Vec<_>>(),
        );
        Ok((row, (i == 0).then_some(outcome)))
    })?;

    let mut summary = String::from("replicate,start_buds,end_buds,total_length,grafts\n");
    let mut trajectory = String::from("replicate,eta,event,bud_label,new_buds\n");
    for (i, ((start_buds, end_buds, total_length, events), _)) in reps.iter().enumerate() {
        writeln!(
            summary,
            "{i},{start_buds},{end_buds},{total_length},{}",
            events.len()
        )
        .expect("write to string");
        for (eta, label, new_buds, frozen_buds) in events {
            writeln!(trajectory, "{i},{eta},graft,{label},{new_buds}").expect("write to string");
            if *frozen_buds > 0 {
                writeln!(trajectory, "{i},{eta},freeze,{label},{frozen_buds}")
                    .expect("write to string");
            }
        }
    }
    write_text(out, "summary.csv", &summary)?;
    write_text(out, "trajectory.csv", &trajectory)?;

    let outcome = reps
        .into_iter()
        .next()
        .and_then(|r| r.1)
        .expect("replicate 0 carries artifacts");
    write_json(out, "growth.json", &outcome)?;
    let mut newick = outcome.tree.to_newick();
    newick.push('\n');
    write_text(out, "growth.nwk", &newick)?;
    println!(
        "wrote {} replicates to {} (growth.json, growth.nwk, trajectory.csv, summary.csv)",
        n,
        out.display()
    );
    Ok(())
}
