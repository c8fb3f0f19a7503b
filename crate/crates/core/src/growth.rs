//! Growth-by-grafting dynamics for clonal trees.
//!
//! At time η the population's clonal tree is the clonal subtree of a comb
//! whose marks carry intensity `e^{-η} μ`: mutations become rarer as η
//! advances, so the clonal tree grows. The dynamics realize this directly:
//! every bud above the resolution `ε` holds an independent rate-1
//! exponential clock; when a bud's clock fires at time η′, a fresh clonal
//! tree — built from a new comb with window height equal to the bud height
//! and marks of intensity `e^{-η′} μ` — is grafted onto it.

use serde::{Deserialize, Serialize};

use crate::comb::sample_comb;
use crate::error::{invalid, Result};
use crate::measures::MeasurePair;
use crate::mutation::sample_marks;
use crate::rng::RandomStream;
use crate::simple_tree::{clonal_subtree, NodeKind, NodeLabel, SimpleTree};

/// One graft event of a growth run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvent {
    /// Time at which the bud's clock fired.
    pub eta: f64,
    /// Label of the bud that was regrown.
    pub bud: NodeLabel,
    /// Height of the bud (window height of the grafted comb).
    pub bud_height: f64,
    /// Number of buds of the grafted tree that were armed with clocks.
    pub new_buds: usize,
    /// Number of buds of the grafted tree frozen at or below the resolution.
    pub frozen_buds: usize,
}

/// Result of growing a clonal tree over a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthOutcome {
    pub tree: SimpleTree,
    pub events: Vec<GrowthEvent>,
}

/// Summary statistics used to compare tree ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub bud_count: usize,
    pub total_length: f64,
    pub max_leaf_height: f64,
}

pub fn summarize(tree: &SimpleTree) -> TreeSummary {
    TreeSummary {
        bud_count: tree.bud_count(),
        total_length: tree.total_length(),
        max_leaf_height: tree.max_leaf_height(),
    }
}

/// Sample the clonal tree of a fresh comb: window height `z`, resolution
/// `epsilon`, marks with intensity `theta · μ`.
pub fn sample_clonal_tree(
    pair: &MeasurePair,
    z: f64,
    epsilon: f64,
    theta: f64,
    rng: &mut RandomStream,
) -> Result<SimpleTree> {
    let comb = sample_comb(&pair.nu, z, epsilon, rng)?;
    let marked = sample_marks(pair, &comb, epsilon, theta, rng)?;
    Ok(clonal_subtree(&marked, theta))
}

/// A growing clonal tree together with the firing clocks of its buds.
///
/// The clocks hold absolute firing times; rate-1 clocks are memoryless, so
/// drawing the whole remaining lifetime at attachment is equivalent to
/// decrementing. Buds at or below the resolution are frozen and carry no
/// clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthState {
    /// Current time of the chain.
    pub eta: f64,
    /// The clonal tree as of time `eta`.
    pub tree: SimpleTree,
    clocks: Vec<(f64, NodeLabel)>,
    epsilon: f64,
}

impl GrowthState {
    /// Start the chain at time `eta` from `tree`, arming every bud above
    /// the resolution `epsilon` with an independent rate-1 clock.
    pub fn new(tree: &SimpleTree, eta: f64, epsilon: f64, rng: &mut RandomStream) -> GrowthState {
        let clocks = tree
            .buds()
            .filter(|(_, n)| n.omega > epsilon)
            .map(|(l, _)| (eta + rng.exponential(1.0), l.clone()))
            .collect();
        GrowthState {
            eta,
            tree: tree.clone(),
            clocks,
            epsilon,
        }
    }

    /// Number of buds currently armed with a clock.
    pub fn armed_buds(&self) -> usize {
        self.clocks.len()
    }

    /// Time of the next firing, or `None` when every bud is frozen.
    pub fn next_firing(&self) -> Option<f64> {
        self.min_clock().map(|i| self.clocks[i].0)
    }

    fn min_clock(&self) -> Option<usize> {
        self.clocks
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(i, _)| i)
    }
}

/// Advance the chain by one graft: jump to the earliest armed clock, graft
/// onto its bud a fresh clonal tree (window height = bud height, mark
/// intensity `e^{-η′} μ`), and arm the new buds. Errors when no clock is
/// armed, i.e. the chain is absorbed.
pub fn grow_step(
    pair: &MeasurePair,
    state: &mut GrowthState,
    rng: &mut RandomStream,
) -> Result<GrowthEvent> {
    let i = state
        .min_clock()
        .ok_or_else(|| invalid("no armed buds: the growth chain is absorbed"))?;
    let (eta_fire, label) = state.clocks.swap_remove(i);
    let bud_height = state.tree.nodes[&label].omega;
    let theta = (-eta_fire).exp();
    let sub = sample_clonal_tree(pair, bud_height, state.epsilon, theta, rng)?;
    state.tree.graft(&label, &sub)?;
    let mut new_buds = 0;
    let mut frozen_buds = 0;
    for (u, node) in &sub.nodes {
        if node.kind != NodeKind::Bud {
            continue;
        }
        if node.omega > state.epsilon {
            state
                .clocks
                .push((eta_fire + rng.exponential(1.0), label.join(u)));
            new_buds += 1;
        } else {
            frozen_buds += 1;
        }
    }
    state.eta = eta_fire;
    Ok(GrowthEvent {
        eta: eta_fire,
        bud: label,
        bud_height,
        new_buds,
        frozen_buds,
    })
}

/// Grow `start` (a clonal tree as of time `eta0`) until `eta1`. Buds at or
/// below the resolution `epsilon` are frozen and never fire.
pub fn grow_clonal(
    pair: &MeasurePair,
    start: &SimpleTree,
    eta0: f64,
    eta1: f64,
    epsilon: f64,
    rng: &mut RandomStream,
) -> Result<GrowthOutcome> {
    let mut state = GrowthState::new(start, eta0, epsilon, rng);
    let mut events = Vec::new();
    while state.next_firing().is_some_and(|t| t <= eta1) {
        events.push(grow_step(pair, &mut state, rng)?);
    }
    Ok(GrowthOutcome {
        tree: state.tree,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{IntensityMeasure, MutationMeasure};
    use crate::simple_tree::{NodeKind, SimpleNode};
    use std::collections::BTreeMap;

    fn pair() -> MeasurePair {
        MeasurePair::new(
            IntensityMeasure::Brownian,
            MutationMeasure::uniform(1.0).unwrap(),
        )
    }

    fn single_bud(height: f64) -> SimpleTree {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            NodeLabel::root(),
            SimpleNode {
                alpha: 1.0,
                omega: height,
                kind: NodeKind::Bud,
                leaf_mass: 0.0,
            },
        );
        SimpleTree { nodes }
    }

    #[test]
    fn empty_horizon_changes_nothing() {
        let p = pair();
        let start = single_bud(0.5);
        let mut rng = RandomStream::from_seed(201);
        let out = grow_clonal(&p, &start, 0.0, 0.0, 0.02, &mut rng).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.tree, start);
    }

    #[test]
    fn frozen_buds_never_fire() {
        let p = pair();
        let start = single_bud(0.01);
        let mut rng = RandomStream::from_seed(203);
        let out = grow_clonal(&p, &start, 0.0, 50.0, 0.02, &mut rng).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.tree, start);
    }

    #[test]
    fn first_firing_time_is_unit_exponential() {
        let p = pair();
        let start = single_bud(0.5);
        let mut rng = RandomStream::from_seed(207);
        let n = 4000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let out = grow_clonal(&p, &start, 2.0, 40.0, 0.02, &mut rng).unwrap();
            let first = out.events.first().expect("horizon is effectively infinite");
            let wait = first.eta - 2.0;
            assert!(wait > 0.0);
            sum += wait;
            sumsq += wait * wait;
        }
        let mean = sum / n as f64;
        let sd = (sumsq / n as f64 - mean * mean).sqrt();
        assert!(
            (mean - 1.0).abs() < 3.0 * sd / (n as f64).sqrt(),
            "mean inter-jump {mean}"
        );
    }

    #[test]
    fn grown_trees_stay_structurally_valid() {
        let p = pair();
        let mut rng = RandomStream::from_seed(211);
        for i in 0..40 {
            let start = sample_clonal_tree(&p, 1.0, 0.02, 1.0, &mut rng).unwrap();
            start.validate().unwrap();
            let out = grow_clonal(&p, &start, 0.0, 0.8, 0.02, &mut rng).unwrap();
            out.tree.validate().unwrap();
            // Growth only extends: total length never shrinks.
            assert!(
                out.tree.total_length() >= start.total_length() - 1e-12,
                "iteration {i}"
            );
            // Events are chronological.
            for w in out.events.windows(2) {
                assert!(w[0].eta <= w[1].eta);
            }
        }
    }

    #[test]
    fn growth_matches_direct_thinning_in_mean() {
        // Growing from η=0 to η=0.6 should agree in law with sampling the
        // clonal tree directly at mutation scale e^{-0.6}; compare means of
        // the bud count as a smoke test (full two-sample KS runs in the
        // acceptance suite).
        let p = pair();
        let mut rng = RandomStream::from_seed(213);
        let (e0, e1) = (0.0f64, 0.6f64);
        let n = 800;
        let mut grown = 0.0;
        let mut direct = 0.0;
        let mut grown_sq = 0.0;
        let mut direct_sq = 0.0;
        for _ in 0..n {
            let start = sample_clonal_tree(&p, 1.0, 0.02, (-e0).exp(), &mut rng).unwrap();
            let g = grow_clonal(&p, &start, e0, e1, 0.02, &mut rng).unwrap();
            let a = g.tree.bud_count() as f64;
            let d = sample_clonal_tree(&p, 1.0, 0.02, (-e1).exp(), &mut rng)
                .unwrap()
                .bud_count() as f64;
            grown += a;
            grown_sq += a * a;
            direct += d;
            direct_sq += d * d;
        }
        let ma = grown / n as f64;
        let md = direct / n as f64;
        let va = grown_sq / n as f64 - ma * ma;
        let vd = direct_sq / n as f64 - md * md;
        let se = ((va + vd) / n as f64).sqrt();
        assert!(
            (ma - md).abs() < 4.0 * se,
            "grown mean {ma} vs direct mean {md} (se {se})"
        );
    }

    fn three_buds() -> SimpleTree {
        let node = |alpha, omega, kind| SimpleNode {
            alpha,
            omega,
            kind,
            leaf_mass: 0.0,
        };
        let root = NodeLabel::root();
        let mut nodes = BTreeMap::new();
        nodes.insert(root.clone(), node(1.0, 0.5, NodeKind::Internal));
        nodes.insert(root.child(0), node(0.5, 0.25, NodeKind::Bud));
        nodes.insert(root.child(1), node(0.5, 0.25, NodeKind::Internal));
        nodes.insert(root.child(1).child(0), node(0.25, 0.1, NodeKind::Bud));
        nodes.insert(root.child(1).child(1), node(0.25, 0.12, NodeKind::Bud));
        SimpleTree { nodes }
    }

    #[test]
    fn first_jump_rate_scales_with_armed_buds() {
        // Three independent rate-1 clocks: the minimum is Exp(3).
        let start = three_buds();
        start.validate().unwrap();
        let mut rng = RandomStream::from_seed(219);
        let n = 6000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            let state = GrowthState::new(&start, 1.5, 0.02, &mut rng);
            assert_eq!(state.armed_buds(), 3);
            let wait = state.next_firing().unwrap() - 1.5;
            sum += wait;
            sumsq += wait * wait;
        }
        let mean = sum / n as f64;
        let sd = (sumsq / n as f64 - mean * mean).sqrt();
        assert!(
            (mean - 1.0 / 3.0).abs() < 3.0 * sd / (n as f64).sqrt(),
            "mean first jump {mean}"
        );
    }

    #[test]
    fn grafted_heights_never_exceed_their_bud() {
        let p = pair();
        let mut rng = RandomStream::from_seed(223);
        let start = single_bud(0.5);
        let mut state = GrowthState::new(&start, 0.0, 0.01, &mut rng);
        let mut steps = 0;
        while state.next_firing().is_some_and(|t| t <= 4.0) && steps < 400 {
            let armed_before = state.armed_buds();
            let ev = grow_step(&p, &mut state, &mut rng).unwrap();
            assert!(ev.bud_height <= 0.5 + 1e-12);
            assert_eq!(ev.eta, state.eta);
            assert_eq!(state.armed_buds(), armed_before - 1 + ev.new_buds);
            steps += 1;
        }
        assert!(steps > 0, "at least one clock fires by η = 4 almost surely");
        state.tree.validate().unwrap();
        // Everything grafted under the original bud stays below its height.
        for (label, node) in &state.tree.nodes {
            if *label != NodeLabel::root() {
                assert!(node.alpha <= 0.5 + 1e-12, "node {label} above the root bud");
            }
        }
    }

    #[test]
    fn absorbed_state_refuses_to_step() {
        let p = pair();
        let mut rng = RandomStream::from_seed(227);
        let start = single_bud(0.005);
        let mut state = GrowthState::new(&start, 0.0, 0.02, &mut rng);
        assert_eq!(state.armed_buds(), 0);
        assert!(state.next_firing().is_none());
        assert!(grow_step(&p, &mut state, &mut rng).is_err());
    }

    #[test]
    fn growth_is_deterministic_per_seed() {
        let p = pair();
        let run = |seed: u64| {
            let mut rng = RandomStream::from_seed(seed);
            let start = sample_clonal_tree(&p, 1.0, 0.02, 1.0, &mut rng).unwrap();
            grow_clonal(&p, &start, 0.0, 1.0, 0.02, &mut rng).unwrap()
        };
        assert_eq!(run(42), run(42));
    }
}
