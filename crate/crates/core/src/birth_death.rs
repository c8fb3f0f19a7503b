//! Time-inhomogeneous binary birth-death processes: exact population-size
//! functionals, forward simulation, the backbone integral, and the clock
//! change linking pure-birth genealogies to combs.
//!
//! For a window `[t, T]` with birth rate `b(·)` and death rate `k(·)`, put
//!
//! * `A = exp(∫_t^T (k - b) ds)` and
//! * `I = ∫_t^T exp(∫_t^s (k - b) dr) · b(s) ds`.
//!
//! Starting from one individual at `t`, the population size `N_T` at `T`
//! vanishes with probability `1 - 1/(A + I)` and otherwise is geometric:
//! `P(N_T = n | N_T > 0) = (1 - η) η^{n-1}` with `η = I/(A + I)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::IntensityMeasure;
use crate::rng::RandomStream;
use crate::simple_tree::NodeLabel;

/// A piecewise-constant nonnegative rate on `[0, ∞)`; the last piece
/// extends indefinitely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRate {
    /// Piece start times, strictly increasing, starting at 0.
    starts: Vec<f64>,
    rates: Vec<f64>,
}

impl StepRate {
    pub fn constant(rate: f64) -> Self {
        StepRate {
            starts: vec![0.0],
            rates: vec![rate],
        }
    }

    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() || pieces[0].0 != 0.0 {
            return Err(invalid("rate pieces must start at time 0"));
        }
        if !pieces.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(invalid("piece start times must be strictly increasing"));
        }
        if !pieces.iter().all(|p| p.1.is_finite() && p.1 >= 0.0) {
            return Err(invalid("rates must be finite and nonnegative"));
        }
        let (starts, rates) = pieces.into_iter().unzip();
        Ok(StepRate { starts, rates })
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        let i = self.starts.partition_point(|&s| s <= t);
        self.rates[i.saturating_sub(1)]
    }

    /// Rate of the final, indefinitely extended piece.
    pub fn final_rate(&self) -> f64 {
        *self.rates.last().expect("nonempty")
    }

    /// Cumulative mass on `[a, b]`.
    pub fn cum(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        for (lo, hi, r) in self.segments_in(a, b) {
            total += r * (hi - lo);
        }
        total
    }

    /// The constant pieces intersected with `[a, b]`.
    fn segments_in(&self, a: f64, b: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for (i, (&s, &r)) in self.starts.iter().zip(&self.rates).enumerate() {
            let end = self.starts.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let lo = s.max(a);
            let hi = end.min(b);
            if lo < hi {
                out.push((lo, hi, r));
            }
        }
        out
    }

    fn breakpoints_in(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        self.starts
            .iter()
            .copied()
            .filter(move |&s| s > a && s < b)
    }

    /// The time at which the cumulative mass after `from` first reaches
    /// `target`; `None` when the whole remaining mass falls short.
    pub fn first_arrival(&self, from: f64, target: f64) -> Option<f64> {
        let mut need = target;
        for (i, (&s, &r)) in self.starts.iter().zip(&self.rates).enumerate() {
            let end = self.starts.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let lo = s.max(from);
            if end <= lo || r <= 0.0 {
                continue;
            }
            let mass = r * (end - lo);
            if mass >= need {
                return Some(lo + need / r);
            }
            need -= mass;
        }
        None
    }
}

/// A birth-death specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathModel {
    pub birth: StepRate,
    pub death: StepRate,
}

impl BirthDeathModel {
    pub fn constant(birth: f64, death: f64) -> Result<Self> {
        if !(birth >= 0.0 && death >= 0.0) {
            return Err(invalid("rates must be nonnegative"));
        }
        Ok(BirthDeathModel {
            birth: StepRate::constant(birth),
            death: StepRate::constant(death),
        })
    }

    /// Segment `[t, T]` into maximal pieces where both rates are constant.
    fn merged_segments(&self, t: f64, horizon: f64) -> Vec<(f64, f64, f64, f64)> {
        let mut cuts: Vec<f64> = std::iter::once(t)
            .chain(self.birth.breakpoints_in(t, horizon))
            .chain(self.death.breakpoints_in(t, horizon))
            .chain(std::iter::once(horizon))
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| (w[0], w[1], self.birth.rate_at(w[0]), self.death.rate_at(w[0])))
            .collect()
    }

    /// The pair `(A, I)` for the window `[t, T]` (see module docs), exactly
    /// (closed form per constant piece).
    pub fn window_functionals(&self, t: f64, horizon: f64) -> Result<(f64, f64)> {
        if !(horizon > t) {
            return Err(invalid("need horizon > t"));
        }
        let mut g = 0.0f64; // ∫_t^u (k − b) for the current left end u
        let mut i_total = 0.0;
        for &(u, v, b, k) in &self.merged_segments(t, horizon) {
            let d = k - b;
            let len = v - u;
            let piece = if d.abs() > 1e-300 {
                b * g.exp() * ((d * len).exp_m1()) / d
            } else {
                b * g.exp() * len
            };
            i_total += piece;
            g += d * len;
        }
        Ok((g.exp(), i_total))
    }

    /// Probability that the population at `horizon` is nonempty, starting
    /// from one individual at `t`.
    pub fn survival_probability(&self, t: f64, horizon: f64) -> Result<f64> {
        let (a, i) = self.window_functionals(t, horizon)?;
        Ok(1.0 / (a + i))
    }

    /// The geometric tail parameter η of `N_T` conditioned on survival.
    pub fn offspring_tail_parameter(&self, t: f64, horizon: f64) -> Result<f64> {
        let (a, i) = self.window_functionals(t, horizon)?;
        Ok(i / (a + i))
    }

    /// `P(N_horizon = n)` starting from one individual at `t`.
    pub fn population_pmf(&self, t: f64, horizon: f64, n: u64) -> Result<f64> {
        let (a, i) = self.window_functionals(t, horizon)?;
        let p_live = 1.0 / (a + i);
        let eta = i / (a + i);
        Ok(if n == 0 {
            1.0 - p_live
        } else {
            p_live * (1.0 - eta) * eta.powi((n - 1) as i32)
        })
    }

    /// `E[N_horizon]` starting from one individual at `t`.
    pub fn expected_population(&self, t: f64, horizon: f64) -> f64 {
        (self.birth.cum(t, horizon) - self.death.cum(t, horizon)).exp()
    }

    /// The backbone integral `𝓘_t = ∫_t^∞ e^{κ([t,s]) − β([t,s])} β(ds)`.
    /// Its reciprocal is the probability of surviving forever; requires the
    /// eventual rates to be strictly supercritical (or the birth mass to be
    /// infinite with no deaths on the tail).
    pub fn backbone_integral(&self, t: f64) -> Result<f64> {
        let last = self
            .birth
            .starts
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(self.death.starts.last().copied().unwrap_or(0.0))
            .max(t);
        let b_inf = self.birth.final_rate();
        let k_inf = self.death.final_rate();
        let d_inf = k_inf - b_inf;
        if b_inf <= 0.0 || d_inf >= 0.0 {
            return Err(Error::Divergent(
                "backbone integral needs an eventually supercritical tail".into(),
            ));
        }
        let mut g_left = 0.0f64; // ∫_t^u (k − b) for the current left end u
        let mut total = 0.0;
        if last > t {
            for &(u, v, b, k) in self.merged_segments(t, last).iter() {
                let d = k - b;
                let len = v - u;
                total += if d.abs() > 1e-300 {
                    b * g_left.exp() * ((d * len).exp_m1()) / d
                } else {
                    b * g_left.exp() * len
                };
                g_left += d * len;
            }
        }
        // Final piece to infinity: ∫_last^∞ e^{g + d(s-last)} b ds, d < 0.
        total += b_inf * g_left.exp() / (-d_inf);
        Ok(total)
    }

    /// Probability that the line of an individual alive at `t` never dies
    /// out: the reciprocal of the backbone integral.
    pub fn eventual_survival(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.backbone_integral(t)?)
    }

    /// Density at `t` of the backbone branching measure β*: the birth rate
    /// discounted by the backbone integral, `b(t)/𝓘_t`. Along the backbone —
    /// the sub-forest of individuals with everliving descent — splits into
    /// two everliving lines happen at this rate.
    pub fn backbone_birth_rate(&self, t: f64) -> Result<f64> {
        Ok(self.birth.rate_at(t) / self.backbone_integral(t)?)
    }

    /// First event time for one individual alive from `from`, with hazard
    /// `b + k`; `None` when no event occurs before `horizon`.
    fn next_event(&self, from: f64, horizon: f64, rng: &mut RandomStream) -> Option<f64> {
        let mut target = rng.exponential(1.0);
        for (lo, hi, b, k) in BirthDeathModel::merged_segments(self, from, horizon) {
            let hazard = b + k;
            let mass = hazard * (hi - lo);
            if mass >= target {
                return Some(lo + target / hazard);
            }
            target -= mass;
        }
        None
    }

    /// Simulate the population size at `horizon` from one individual at
    /// time `t`. Errors if the realized tree exceeds a size guard.
    pub fn simulate_population(
        &self,
        t: f64,
        horizon: f64,
        rng: &mut RandomStream,
    ) -> Result<u64> {
        const GUARD: u64 = 10_000_000;
        let mut pending = vec![t];
        let mut alive = 0u64;
        let mut work = 0u64;
        while let Some(mut s) = pending.pop() {
            loop {
                work += 1;
                if work > GUARD {
                    return Err(Error::Divergent("population simulation exceeded guard".into()));
                }
                match self.next_event(s, horizon, rng) {
                    None => {
                        alive += 1;
                        break;
                    }
                    Some(u) => {
                        let b = self.birth.rate_at(u);
                        let k = self.death.rate_at(u);
                        if rng.uniform() * (b + k) < b {
                            pending.push(u);
                            s = u;
                        } else {
                            break;
                        }
                    }
                }
            }
        }
        Ok(alive)
    }
}

/// A diffuse rate measure on the time axis, driving the birth or death clock
/// of a genealogy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum RateMeasure {
    /// Piecewise-constant density on `[0, ∞)`.
    Step(StepRate),
    /// The birth intensity whose reversed pure-birth genealogy matches a
    /// comb with branching tail ν̄ and window height `z`: on the forward
    /// clock `u ∈ [0, z)` the mass of `[0, u]` is `ln(ν̄(z−u)/ν̄(z))`, which
    /// blows up at `z` exactly when ν̄ blows up at 0.
    CombBirth { nu: IntensityMeasure, z: f64 },
}

impl RateMeasure {
    pub fn constant(rate: f64) -> Self {
        RateMeasure::Step(StepRate::constant(rate))
    }

    pub fn zero() -> Self {
        RateMeasure::constant(0.0)
    }

    /// Right end of the supporting interval.
    pub fn upper_end(&self) -> f64 {
        match self {
            RateMeasure::Step(_) => f64::INFINITY,
            RateMeasure::CombBirth { z, .. } => *z,
        }
    }

    /// Mass of `[a, b]`; `b` must stay inside the supporting interval.
    pub fn cum(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            RateMeasure::Step(r) => r.cum(a, b),
            RateMeasure::CombBirth { nu, z } => (nu.tail(z - b) / nu.tail(z - a)).ln(),
        }
    }

    /// First time after `from` at which the cumulative mass reaches
    /// `target`; `None` when the remaining mass falls short.
    pub fn first_arrival(&self, from: f64, target: f64) -> Option<f64> {
        match self {
            RateMeasure::Step(r) => r.first_arrival(from, target),
            RateMeasure::CombBirth { nu, z } => {
                // Solve ln(ν̄(z−u)/ν̄(z−from)) = target for u.
                let level = nu.tail(z - from) * target.exp();
                Some(z - nu.inverse_tail(level))
            }
        }
    }
}

/// The birth intensity of the pure-birth process whose reversed genealogy
/// is a comb with branching tail ν̄ and window height `z` (heights read as
/// `z` minus the forward clock). Requires ν̄ to be unbounded near 0, so the
/// mass near the end of the forward clock is infinite.
pub fn comb_birth_measure(nu: &IntensityMeasure, z: f64) -> Result<RateMeasure> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(invalid("window height must be positive and finite"));
    }
    let tail = nu.tail(z);
    if !(tail > 0.0) || !tail.is_finite() {
        return Err(invalid("branching tail must be positive and finite at the window height"));
    }
    Ok(RateMeasure::CombBirth { nu: nu.clone(), z })
}

/// How an individual's edge ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BdFate {
    /// A birth: the edge splits into children `0` and `1`.
    Split,
    /// A death strictly before the horizon.
    Killed,
    /// Alive at the horizon; the edge is cut there.
    Censored,
}

/// One individual of a birth-death genealogy, alive on `[alpha, omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdNode {
    pub alpha: f64,
    pub omega: f64,
    pub fate: BdFate,
}

impl BdNode {
    pub fn length(&self) -> f64 {
        (self.omega - self.alpha).abs()
    }
}

/// The genealogy of a binary birth-death process, truncated at a horizon.
///
/// Times normally increase leafward; a tree that went through a decreasing
/// time change keeps its labels and per-node `(alpha, omega)` roles (`alpha`
/// rootward) but has decreasing times and the `reversed` flag set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdTree {
    pub nodes: BTreeMap<NodeLabel, BdNode>,
    /// Birth time of the founder.
    pub start: f64,
    /// Simulation stop time.
    pub horizon: f64,
    /// Birth mass of the simulated window, `β([start, horizon])`; the
    /// normalizer of the boundary estimator. Invariant under time changes.
    pub log_weight: f64,
    /// Whether the generating death clock carried any mass on the window.
    pub death_enabled: bool,
    /// Set when times decrease leafward.
    pub reversed: bool,
}

impl BdTree {
    pub fn root(&self) -> &BdNode {
        self.nodes.get(&NodeLabel::root()).expect("rooted genealogy")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of individuals alive at the horizon.
    pub fn population(&self) -> u64 {
        self.nodes
            .values()
            .filter(|n| n.fate == BdFate::Censored)
            .count() as u64
    }

    /// Structural invariants: a root exists, edges run with the tree
    /// direction, split nodes have exactly the children `0` and `1` starting
    /// at the split time, leaves have none, and censored leaves end at the
    /// horizon.
    pub fn validate(&self) -> Result<()> {
        if !self.nodes.contains_key(&NodeLabel::root()) {
            return Err(invalid("genealogy must contain the root label"));
        }
        for (label, node) in &self.nodes {
            let (lo, hi) = if self.reversed {
                (node.omega, node.alpha)
            } else {
                (node.alpha, node.omega)
            };
            if !(lo <= hi) {
                return Err(invalid(format!("edge {label} runs against the tree direction")));
            }
            if let Some(parent) = label.parent() {
                let p = self
                    .nodes
                    .get(&parent)
                    .ok_or_else(|| invalid(format!("orphan node {label}")))?;
                if p.fate != BdFate::Split {
                    return Err(invalid(format!("leaf node {parent} has children")));
                }
                if node.alpha != p.omega {
                    return Err(invalid(format!(
                        "child {label} does not start at its parent's split time"
                    )));
                }
            }
            let children = [label.child(0), label.child(1)]
                .iter()
                .filter(|c| self.nodes.contains_key(c))
                .count();
            match node.fate {
                BdFate::Split if children != 2 => {
                    return Err(invalid(format!("split node {label} lacks children")));
                }
                BdFate::Killed | BdFate::Censored if children != 0 => {
                    return Err(invalid(format!("leaf node {label} has children")));
                }
                BdFate::Censored if node.omega != self.horizon => {
                    return Err(invalid(format!("censored leaf {label} not at the horizon")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Number of individuals alive at the horizon descending from `at`.
    pub fn boundary_count(&self, at: &NodeLabel) -> Result<u64> {
        if !self.nodes.contains_key(at) {
            return Err(invalid(format!("no node {at}")));
        }
        Ok(self
            .nodes
            .range(at.clone()..)
            .take_while(|(l, _)| l.starts_with(at))
            .filter(|(_, n)| n.fate == BdFate::Censored)
            .count() as u64)
    }

    /// Finite-horizon martingale estimator of the boundary mass seated below
    /// `at`: the number of horizon survivors in its subtree divided by
    /// `e^{β([start, horizon])}`. Only meaningful for pure-birth genealogies.
    pub fn boundary_estimate(&self, at: &NodeLabel) -> Result<f64> {
        if self.death_enabled {
            return Err(invalid("boundary measure requires a pure-birth genealogy"));
        }
        Ok(self.boundary_count(at)? as f64 * (-self.log_weight).exp())
    }

    /// Push all times through a strictly monotone map. Topology, labels and
    /// the boundary normalizer are untouched; a decreasing map flips the
    /// `reversed` flag. Errors when the map fails to be strictly monotone on
    /// the tree's times.
    pub fn time_change<F: Fn(f64) -> f64>(&self, phi: F, decreasing: bool) -> Result<BdTree> {
        let mut nodes = BTreeMap::new();
        for (label, node) in &self.nodes {
            let alpha = phi(node.alpha);
            let omega = phi(node.omega);
            let ok = if node.alpha == node.omega {
                alpha == omega
            } else if (node.alpha < node.omega) != decreasing {
                alpha < omega
            } else {
                alpha > omega
            };
            if !ok {
                return Err(invalid("time change is not strictly monotone on the tree"));
            }
            nodes.insert(label.clone(), BdNode { alpha, omega, fate: node.fate });
        }
        Ok(BdTree {
            nodes,
            start: phi(self.start),
            horizon: phi(self.horizon),
            log_weight: self.log_weight,
            death_enabled: self.death_enabled,
            reversed: self.reversed ^ decreasing,
        })
    }

    /// Split times in planar (in-order) sequence: the coalescence time of
    /// each consecutive pair of leaves. For a reversed tree these are the
    /// comb depths of the genealogy read as heights.
    pub fn coalescence_heights(&self) -> Vec<f64> {
        enum Step {
            Visit(NodeLabel),
            Emit(f64),
        }
        let mut out = Vec::new();
        let mut stack = vec![Step::Visit(NodeLabel::root())];
        while let Some(step) = stack.pop() {
            match step {
                Step::Emit(h) => out.push(h),
                Step::Visit(label) => {
                    let node = &self.nodes[&label];
                    if node.fate == BdFate::Split {
                        stack.push(Step::Visit(label.child(1)));
                        stack.push(Step::Emit(node.omega));
                        stack.push(Step::Visit(label.child(0)));
                    }
                }
            }
        }
        out
    }

    /// Newick serialization. Nodes are named by their bit address (the root
    /// is unnamed), leaves carry a `_killed` or `_censored` status suffix,
    /// and branch lengths are edge lengths.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(&NodeLabel::root(), &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, label: &NodeLabel, out: &mut String) {
        use std::fmt::Write;
        let node = &self.nodes[label];
        if node.fate == BdFate::Split {
            out.push('(');
            self.write_newick(&label.child(0), out);
            out.push(',');
            self.write_newick(&label.child(1), out);
            out.push(')');
        }
        out.push_str(&String::from(label.clone()));
        match node.fate {
            BdFate::Split => {}
            BdFate::Killed => out.push_str("_killed"),
            BdFate::Censored => out.push_str("_censored"),
        }
        write!(out, ":{}", node.length()).expect("write to string");
    }
}

/// Simulate the genealogy of a binary birth-death process with birth clock
/// `beta` and death clock `kappa`, started from one individual at `start`
/// and truncated at `horizon`. Every individual carries independent birth
/// and death point processes from its birth time on: it splits at its first
/// birth arrival when that precedes both its first death arrival and the
/// horizon. Errors when the population cap (10⁶ nodes) is exceeded.
pub fn simulate_bd(
    beta: &RateMeasure,
    kappa: &RateMeasure,
    start: f64,
    horizon: f64,
    rng: &mut RandomStream,
) -> Result<BdTree> {
    const CAP: usize = 1_000_000;
    if !(start < horizon) || !start.is_finite() || !horizon.is_finite() {
        return Err(invalid("need start < horizon, both finite"));
    }
    if horizon >= beta.upper_end() || horizon >= kappa.upper_end() {
        return Err(invalid("horizon must lie inside the rate supports"));
    }
    let mut nodes = BTreeMap::new();
    let mut pending = vec![(NodeLabel::root(), start)];
    while let Some((label, alpha)) = pending.pop() {
        if nodes.len() >= CAP {
            return Err(Error::Divergent("population cap (10^6 nodes) exceeded".into()));
        }
        let birth = beta.first_arrival(alpha, rng.exponential(1.0));
        let death = kappa.first_arrival(alpha, rng.exponential(1.0));
        let split = birth.filter(|b| death.is_none_or(|d| *b < d));
        let node = match split {
            Some(b) if b < horizon => {
                pending.push((label.child(1), b));
                pending.push((label.child(0), b));
                BdNode { alpha, omega: b, fate: BdFate::Split }
            }
            _ => match death {
                Some(d) if d < horizon => BdNode { alpha, omega: d, fate: BdFate::Killed },
                _ => BdNode { alpha, omega: horizon, fate: BdFate::Censored },
            },
        };
        nodes.insert(label, node);
    }
    Ok(BdTree {
        nodes,
        start,
        horizon,
        log_weight: beta.cum(start, horizon),
        death_enabled: kappa.cum(start, horizon) > 0.0,
        reversed: false,
    })
}

/// A Yule (pure-birth, rate 1) genealogy run to `horizon`, recorded by its
/// ordered birth times (the founder at time 0 is implicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YuleSample {
    pub horizon: f64,
    pub birth_times: Vec<f64>,
}

impl YuleSample {
    pub fn population(&self) -> u64 {
        self.birth_times.len() as u64 + 1
    }

    /// The classical martingale estimate `N_T e^{-T}` of the boundary mass.
    pub fn boundary_estimate(&self) -> f64 {
        self.population() as f64 * (-self.horizon).exp()
    }

    /// Coalescence depths of the planar genealogy pushed through the clock
    /// change `t ↦ e^{-t}`: the heights of the equivalent comb with
    /// branching tail `1/x`, window height 1, resolution `e^{-horizon}`.
    pub fn transformed_heights(&self) -> Vec<f64> {
        self.birth_times.iter().map(|t| (-t).exp()).collect()
    }

    /// Largest transformed height: the depth at which the tree first
    /// branches below the root (0 when no branching happened).
    pub fn first_branch_height(&self) -> f64 {
        self.birth_times.first().map_or(0.0, |t| (-t).exp())
    }
}

/// Simulate a Yule genealogy: aggregate birth rate `n` when `n` individuals
/// are alive.
pub fn simulate_yule(horizon: f64, rng: &mut RandomStream) -> Result<YuleSample> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid("horizon must be positive and finite"));
    }
    let mut t = 0.0;
    let mut n = 1u64;
    let mut birth_times = Vec::new();
    loop {
        t += rng.exponential(n as f64);
        if t >= horizon {
            break;
        }
        birth_times.push(t);
        n += 1;
        if n > 50_000_000 {
            return Err(Error::Divergent("Yule population exceeded guard".into()));
        }
    }
    Ok(YuleSample {
        horizon,
        birth_times,
    })
}

/// Cumulative birth intensity of the pure-birth process equivalent (by the
/// reversal/clock change) to a comb with branching intensity `nu` and window
/// height `z`: `B(u) = ln(ν̄(z-u)/ν̄(z))` on the forward clock `u ∈ [0, z)`.
pub fn equivalent_birth_cumulative(nu: &IntensityMeasure, z: f64, u: f64) -> Result<f64> {
    if !(z > 0.0) || !(0.0..z).contains(&u) {
        return Err(invalid("need 0 <= u < z"));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    Ok((nu.tail(z - u) / nu.tail(z)).ln())
}
