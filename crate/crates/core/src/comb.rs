//! Sampling and queries for coalescent point process trees ("combs").
//!
//! A comb with window height `z` and resolution `epsilon` is a pair
//! `(span, atoms)`: the boundary window is `[0, span)` and each atom
//! `(time, height)` records a coalescence event of depth `height ∈ [ε, z)`
//! at boundary position `time`. Boundary leaves at resolution ε sit at
//! time 0 and at the atom times; the depth of the most recent common
//! ancestor of two leaves is the largest atom height strictly between them
//! (inclusive on the right).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::intervals::{Interval, IntervalSet};
use crate::measures::IntensityMeasure;
use crate::rng::RandomStream;

/// One coalescence event: boundary position and depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Atom {
    pub time: f64,
    pub height: f64,
}

impl From<(f64, f64)> for Atom {
    fn from(v: (f64, f64)) -> Self {
        Atom {
            time: v.0,
            height: v.1,
        }
    }
}

impl From<Atom> for (f64, f64) {
    fn from(a: Atom) -> (f64, f64) {
        (a.time, a.height)
    }
}

/// An ultrametric tree sampled from a coalescent point process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombTree {
    /// Window height (depth of the root).
    pub z: f64,
    /// Resolution: atoms below this depth are not represented.
    pub epsilon: f64,
    /// Width of the boundary window `[0, span)`.
    pub span: f64,
    /// Coalescence events sorted by time, times in `(0, span)`,
    /// heights in `[epsilon, z)`.
    pub atoms: Vec<Atom>,
}

impl CombTree {
    /// Check structural invariants (used after deserialization).
    pub fn validate(&self) -> Result<()> {
        if !(self.z > 0.0 && self.epsilon > 0.0 && self.epsilon < self.z) {
            return Err(invalid("need 0 < epsilon < z"));
        }
        if !(self.span > 0.0) {
            return Err(invalid("span must be positive"));
        }
        let mut prev = 0.0;
        for a in &self.atoms {
            if !(a.time > prev && a.time < self.span) {
                return Err(invalid("atom times must be strictly increasing in (0, span)"));
            }
            if !(a.height >= self.epsilon && a.height < self.z) {
                return Err(invalid("atom heights must lie in [epsilon, z)"));
            }
            prev = a.time;
        }
        Ok(())
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Number of boundary leaves at resolution ε (origin leaf plus atoms).
    pub fn n_leaves(&self) -> usize {
        self.atoms.len() + 1
    }

    /// Leaf times: 0 followed by the atom times.
    pub fn leaf_times(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.atoms.iter().map(|a| a.time))
            .collect()
    }

    /// Depth of the most recent common ancestor of leaves `i < j`
    /// (leaf 0 is the origin). Equals the max atom height over atoms
    /// `i..j`; `z` when `i == j` is violated by convention checks.
    pub fn coalescence_depth(&self, i: usize, j: usize) -> Result<f64> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j > self.atoms.len() || i == j {
            return Err(invalid("leaf indices must be distinct and in range"));
        }
        Ok(self.atoms[i..j]
            .iter()
            .map(|a| a.height)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// The boundary clusters at resolution ε: `[t_i, t_{i+1})` tiles of
    /// `[0, span)`, one per leaf.
    pub fn boundary_clusters(&self) -> Vec<Interval> {
        let mut ts = self.leaf_times();
        ts.push(self.span);
        ts.windows(2).map(|w| Interval::new(w[0], w[1])).collect()
    }

    /// Same tree observed at a coarser resolution: drop atoms below
    /// `eps_prime`.
    pub fn reduce_to_resolution(&self, eps_prime: f64) -> Result<CombTree> {
        if !(eps_prime >= self.epsilon && eps_prime < self.z) {
            return Err(invalid("need epsilon <= eps_prime < z"));
        }
        Ok(CombTree {
            z: self.z,
            epsilon: eps_prime,
            span: self.span,
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|a| a.height >= eps_prime)
                .collect(),
        })
    }

    /// Highest atom height over atom times in `[lo, hi]` (closed range);
    /// `None` when no atom falls there.
    pub fn max_height_in(&self, lo: f64, hi: f64) -> Option<f64> {
        let from = self
            .atoms
            .partition_point(|a| a.time < lo);
        self.atoms[from..]
            .iter()
            .take_while(|a| a.time <= hi)
            .map(|a| a.height)
            .fold(None, |m, h| Some(m.map_or(h, |v: f64| v.max(h))))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<CombTree> {
        let tree: CombTree = serde_json::from_str(s)?;
        tree.validate()?;
        Ok(tree)
    }

    /// Boundary cluster of the ε-leaf carrying boundary point `t`, as the
    /// leaf index.
    pub fn leaf_at(&self, t: f64) -> usize {
        self.atoms.partition_point(|a| a.time <= t)
    }

    /// Total length of the comb skeleton visible at resolution ε:
    /// the origin branch `z` plus all atom heights.
    pub fn skeleton_length(&self) -> f64 {
        self.z + self.atoms.iter().map(|a| a.height).sum::<f64>()
    }

    /// The clusters as an [`IntervalSet`] (the whole window).
    pub fn window(&self) -> IntervalSet {
        IntervalSet::single(0.0, self.span)
    }

    /// Root-to-leaf path of the boundary point at `t`: the ladder of
    /// left-of-`t` record atoms. The first rung runs along the origin
    /// branch from `z` down to the highest atom height in `(0, t]`, the
    /// next along that atom's branch down to the highest record after it,
    /// and so on until the resolution `ε` is reached.
    pub fn lineage(&self, t: f64) -> Result<Lineage> {
        if !(0.0..self.span).contains(&t) {
            return Err(invalid("boundary time outside the window"));
        }
        let end = self.atoms.partition_point(|a| a.time <= t);
        let mut segments = Vec::new();
        let mut hi = self.z;
        let mut branch_time = 0.0;
        let mut from = 0usize;
        loop {
            let best =
                (from..end).max_by(|&i, &j| self.atoms[i].height.total_cmp(&self.atoms[j].height));
            let Some(k) = best else {
                segments.push(LineageSegment {
                    time: branch_time,
                    lo: self.epsilon,
                    hi,
                });
                break;
            };
            let atom = self.atoms[k];
            segments.push(LineageSegment {
                time: branch_time,
                lo: atom.height,
                hi,
            });
            branch_time = atom.time;
            hi = atom.height;
            from = k + 1;
        }
        Ok(Lineage { segments })
    }
}

/// One rung of a [`Lineage`]: between heights `(lo, hi]` the path runs
/// along the vertical branch at boundary time `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineageSegment {
    pub time: f64,
    pub lo: f64,
    pub hi: f64,
}

/// A root-to-leaf path in a comb, from the origin branch (height `z`) down
/// to the resolution, as returned by [`CombTree::lineage`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub segments: Vec<LineageSegment>,
}

impl Lineage {
    /// Boundary time of the branch carrying the leaf end of the path.
    pub fn leaf_branch_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.time)
    }

    /// Height at which this path and `other` diverge; `None` when they are
    /// the same path (points of one ε-leaf).
    pub fn divergence_height(&self, other: &Lineage) -> Option<f64> {
        for (a, b) in self.segments.iter().zip(&other.segments) {
            if a != b {
                return Some(a.lo.max(b.lo));
            }
        }
        // One ladder strictly extends the other (only possible with an atom
        // exactly at the resolution): they part at the extension's top.
        let (n, m) = (self.segments.len(), other.segments.len());
        if n == m {
            return None;
        }
        let longer = if n > m { self } else { other };
        Some(longer.segments[n.min(m)].hi)
    }
}

/// Sample one comb from the coalescent point process with branching
/// intensity `nu`, window height `z` and resolution `epsilon`:
/// the span is exponential with rate ν̄(z), and given the span, atoms form
/// a Poisson process on the window with height law ν conditioned on `[ε, z)`.
pub fn sample_comb(
    nu: &IntensityMeasure,
    z: f64,
    epsilon: f64,
    rng: &mut RandomStream,
) -> Result<CombTree> {
    if !(z > 0.0) || !(epsilon > 0.0) || epsilon >= z {
        return Err(invalid(format!("need 0 < epsilon < z, got eps={epsilon}, z={z}")));
    }
    let tail_z = nu.tail(z);
    let tail_eps = nu.tail(epsilon);
    if !tail_eps.is_finite() || !(tail_z > 0.0) {
        return Err(invalid("ν̄ must be finite at ε and positive at z"));
    }
    let span = rng.exponential(tail_z);
    let n = rng.poisson((tail_eps - tail_z) * span);
    let mut times: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.0, span)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let atoms = times
        .into_iter()
        .filter(|&t| t > 0.0 && t < span)
        .map(|t| Atom {
            time: t,
            height: nu.sample_in_window(epsilon, z, rng),
        })
        .collect();
    let tree = CombTree {
        z,
        epsilon,
        span,
        atoms,
    };
    debug_assert!(tree.validate().is_ok());
    Ok(tree)
}

/// Draws `n` independent coalescence depths conditioned to exceed `epsilon`,
/// i.e. the law with tail `ν̄(x)/ν̄(ε)`. These are the consecutive depths
/// seen when scanning the boundary of a comb left to right.
pub fn sample_depth_sequence(
    nu: &IntensityMeasure,
    epsilon: f64,
    n: usize,
    rng: &mut RandomStream,
) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) || !nu.tail(epsilon).is_finite() {
        return Err(invalid("need epsilon > 0 with finite ν̄(ε)"));
    }
    (0..n).map(|_| nu.sample_tail(epsilon, rng)).collect()
}

/// Samples the same law as [`sample_comb`] by the sequential construction:
/// depths arrive at rate `ν̄(ε)` spacings with iid heights above `ε`, and
/// the window closes at the first height reaching `z`.
pub fn sample_comb_sequential(
    nu: &IntensityMeasure,
    z: f64,
    epsilon: f64,
    rng: &mut RandomStream,
) -> Result<CombTree> {
    if !(z > 0.0) || !(epsilon > 0.0) || epsilon >= z {
        return Err(invalid(format!("need 0 < epsilon < z, got eps={epsilon}, z={z}")));
    }
    let tail_eps = nu.tail(epsilon);
    let tail_z = nu.tail(z);
    if !tail_eps.is_finite() || !(tail_z > 0.0) {
        return Err(invalid("ν̄ must be finite at ε and positive at z"));
    }
    // The expected number of arrivals before one reaches z is ν̄(ε)/ν̄(z).
    let guard = ((tail_eps / tail_z) * 1e4) as u64 + 1000;
    let mut t = 0.0;
    let mut atoms = Vec::new();
    for step in 0..=guard {
        if step == guard {
            return Err(invalid("sequential sampler exceeded its step guard"));
        }
        t += rng.exponential(tail_eps);
        let h = nu.sample_tail(epsilon, rng)?;
        if h >= z {
            break;
        }
        atoms.push(Atom { time: t, height: h });
    }
    let tree = CombTree {
        z,
        epsilon,
        span: t,
        atoms,
    };
    debug_assert!(tree.validate().is_ok());
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let nu = IntensityMeasure::Brownian;
        let mut r1 = RandomStream::derive(42, "comb", 7);
        let mut r2 = RandomStream::derive(42, "comb", 7);
        let a = sample_comb(&nu, 1.0, 1e-3, &mut r1).unwrap();
        let b = sample_comb(&nu, 1.0, 1e-3, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn span_is_exponential_with_rate_tail_z() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::from_seed(5);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let t = sample_comb(&nu, 2.0, 1e-2, &mut rng).unwrap().span;
            sum += t;
            sumsq += t * t;
        }
        // Exp(rate 1/2): mean 2.
        let mean = sum / n as f64;
        let sd = (sumsq / n as f64 - mean * mean).sqrt();
        let se = sd / (n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn atom_count_matches_poisson_intensity() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::from_seed(9);
        let (z, eps) = (1.0, 0.05);
        let n = 20_000;
        let (mut atoms, mut span) = (0.0, 0.0);
        for _ in 0..n {
            let t = sample_comb(&nu, z, eps, &mut rng).unwrap();
            atoms += t.n_atoms() as f64;
            span += t.span;
        }
        // E[#atoms] = (ν̄(ε) − ν̄(z)) E[span]; compare the pooled ratio.
        let rate = atoms / span;
        let want = nu.tail(eps) - nu.tail(z);
        assert!(
            (rate - want).abs() / want < 0.02,
            "rate {rate} vs {want}"
        );
    }

    #[test]
    fn atom_heights_follow_conditioned_tail() {
        let nu = IntensityMeasure::Power { a: 0.5, c: 2.0 };
        let mut rng = RandomStream::from_seed(17);
        let (z, eps) = (1.0, 0.01);
        let mut below = 0usize;
        let mut total = 0usize;
        let q = 0.25;
        for _ in 0..4000 {
            let t = sample_comb(&nu, z, eps, &mut rng).unwrap();
            total += t.n_atoms();
            below += t.atoms.iter().filter(|a| a.height <= q).count();
        }
        let want = (nu.tail(eps) - nu.tail(q)) / (nu.tail(eps) - nu.tail(z));
        let freq = below as f64 / total as f64;
        assert!((freq - want).abs() < 0.01, "freq {freq} vs {want}");
    }

    #[test]
    fn coalescence_depth_takes_running_max() {
        let tree = CombTree {
            z: 1.0,
            epsilon: 0.01,
            span: 4.0,
            atoms: vec![
                Atom { time: 1.0, height: 0.3 },
                Atom { time: 2.0, height: 0.8 },
                Atom { time: 3.0, height: 0.1 },
            ],
        };
        tree.validate().unwrap();
        assert_eq!(tree.coalescence_depth(0, 1).unwrap(), 0.3);
        assert_eq!(tree.coalescence_depth(0, 3).unwrap(), 0.8);
        assert_eq!(tree.coalescence_depth(2, 3).unwrap(), 0.1);
        assert_eq!(tree.coalescence_depth(3, 1).unwrap(), 0.8);
        assert!(tree.coalescence_depth(1, 1).is_err());
        assert_eq!(tree.leaf_at(0.5), 0);
        assert_eq!(tree.leaf_at(1.0), 1);
        assert_eq!(tree.leaf_at(3.7), 3);
    }

    #[test]
    fn ultrametric_triple_inequality_holds() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::from_seed(23);
        let tree = sample_comb(&nu, 1.0, 0.02, &mut rng).unwrap();
        let n = tree.n_leaves();
        if n >= 3 {
            for (i, j, k) in [(0usize, 1usize, 2usize), (0, n / 2, n - 1)] {
                if i == j || j == k || i == k {
                    continue;
                }
                let dij = tree.coalescence_depth(i, j).unwrap();
                let djk = tree.coalescence_depth(j, k).unwrap();
                let dik = tree.coalescence_depth(i, k).unwrap();
                assert!(dik <= dij.max(djk) + 1e-15);
            }
        }
    }

    #[test]
    fn reduction_drops_small_atoms_only() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::from_seed(31);
        let tree = sample_comb(&nu, 1.0, 1e-3, &mut rng).unwrap();
        let red = tree.reduce_to_resolution(0.1).unwrap();
        assert_eq!(red.span, tree.span);
        assert!(red.atoms.iter().all(|a| a.height >= 0.1));
        assert_eq!(
            red.n_atoms(),
            tree.atoms.iter().filter(|a| a.height >= 0.1).count()
        );
        assert!(tree.reduce_to_resolution(1e-4).is_err());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let nu = IntensityMeasure::Tilted { c: 0.4 };
        let mut rng = RandomStream::from_seed(37);
        let tree = sample_comb(&nu, 1.5, 0.05, &mut rng).unwrap();
        let s = tree.to_json().unwrap();
        let back = CombTree::from_json(&s).unwrap();
        assert_eq!(tree, back);
    }

    #[test]
    fn boundary_clusters_tile_window() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::from_seed(41);
        let tree = sample_comb(&nu, 1.0, 0.05, &mut rng).unwrap();
        let clusters = tree.boundary_clusters();
        assert_eq!(clusters.len(), tree.n_leaves());
        let total: f64 = clusters.iter().map(|c| c.len()).sum();
        assert!((total - tree.span).abs() < 1e-12);
        assert_eq!(clusters[0].start, 0.0);
        assert_eq!(clusters.last().unwrap().end, tree.span);
    }

    #[test]
    fn max_height_in_closed_range() {
        let tree = CombTree {
            z: 1.0,
            epsilon: 0.01,
            span: 4.0,
            atoms: vec![
                Atom { time: 1.0, height: 0.3 },
                Atom { time: 2.0, height: 0.8 },
                Atom { time: 3.0, height: 0.1 },
            ],
        };
        assert_eq!(tree.max_height_in(1.0, 3.0), Some(0.8));
        assert_eq!(tree.max_height_in(2.5, 3.0), Some(0.1));
        assert_eq!(tree.max_height_in(1.1, 1.9), None);
        assert_eq!(tree.max_height_in(0.0, 1.0), Some(0.3));
    }

    #[test]
    fn depth_sequence_follows_conditional_tail() {
        let nu = IntensityMeasure::Brownian;
        let eps = 0.05;
        let mut rng = RandomStream::derive(42, "depth-seq", 0);
        let depths = sample_depth_sequence(&nu, eps, 4000, &mut rng).unwrap();
        assert!(depths.iter().all(|&h| h >= eps && h.is_finite()));
        // Tail ε/x for x ≥ ε.
        let out = crate::stats::ks_one_sample(&depths, |x| {
            if x < eps {
                0.0
            } else {
                1.0 - eps / x
            }
        })
        .unwrap();
        assert!(out.passes(0.01), "p = {}", out.p_value);
    }

    #[test]
    fn sequential_construction_matches_direct_sampler() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::derive(42, "comb-vs-seq", 0);
        let mut spans_direct = Vec::new();
        let mut spans_seq = Vec::new();
        let mut atoms_direct = Vec::new();
        let mut atoms_seq = Vec::new();
        for _ in 0..1500 {
            let d = sample_comb(&nu, 1.0, 0.05, &mut rng).unwrap();
            let s = sample_comb_sequential(&nu, 1.0, 0.05, &mut rng).unwrap();
            spans_direct.push(d.span);
            spans_seq.push(s.span);
            atoms_direct.push(d.n_atoms() as f64);
            atoms_seq.push(s.n_atoms() as f64);
        }
        let spans = crate::stats::ks_two_sample(&spans_direct, &spans_seq).unwrap();
        assert!(spans.passes(0.01), "span p = {}", spans.p_value);
        let atoms = crate::stats::ks_two_sample(&atoms_direct, &atoms_seq).unwrap();
        assert!(atoms.passes(0.01), "atom-count p = {}", atoms.p_value);
    }

    #[test]
    fn sequential_sampler_rejects_bad_arguments() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::from_seed(9);
        assert!(sample_comb_sequential(&nu, 1.0, 0.0, &mut rng).is_err());
        assert!(sample_comb_sequential(&nu, 0.5, 0.5, &mut rng).is_err());
        assert!(sample_depth_sequence(&nu, 0.0, 4, &mut rng).is_err());
    }

    #[test]
    fn lineage_ladder_matches_hand_example() {
        let tree = CombTree {
            z: 1.0,
            epsilon: 0.01,
            span: 4.0,
            atoms: vec![
                Atom { time: 1.0, height: 0.5 },
                Atom { time: 2.0, height: 0.8 },
            ],
        };
        tree.validate().unwrap();
        // Before the first atom: the whole path is the origin branch.
        let l0 = tree.lineage(0.5).unwrap();
        assert_eq!(
            l0.segments,
            vec![LineageSegment { time: 0.0, lo: 0.01, hi: 1.0 }]
        );
        // After both atoms: the record at (2, 0.8) is the only rung.
        let l1 = tree.lineage(2.5).unwrap();
        assert_eq!(
            l1.segments,
            vec![
                LineageSegment { time: 0.0, lo: 0.8, hi: 1.0 },
                LineageSegment { time: 2.0, lo: 0.01, hi: 0.8 },
            ]
        );
        // Between the atoms the lower record is visible.
        let l2 = tree.lineage(1.5).unwrap();
        assert_eq!(
            l2.segments,
            vec![
                LineageSegment { time: 0.0, lo: 0.5, hi: 1.0 },
                LineageSegment { time: 1.0, lo: 0.01, hi: 0.5 },
            ]
        );
        assert_eq!(l2.leaf_branch_time(), 1.0);
        // Segments concatenate into the full height range (z down to ε).
        for l in [&l0, &l1, &l2] {
            assert_eq!(l.segments.first().unwrap().hi, 1.0);
            assert_eq!(l.segments.last().unwrap().lo, 0.01);
            for w in l.segments.windows(2) {
                assert_eq!(w[0].lo, w[1].hi);
            }
        }
        assert!(tree.lineage(4.0).is_err());
        assert!(tree.lineage(-0.1).is_err());
    }

    #[test]
    fn lineage_divergence_equals_pairwise_max_height() {
        let nu = IntensityMeasure::Brownian;
        let mut rng = RandomStream::from_seed(6211);
        for _ in 0..40 {
            let tree = sample_comb(&nu, 1.0, 0.05, &mut rng).unwrap();
            for _ in 0..25 {
                let a = rng.uniform_in(0.0, tree.span);
                let b = rng.uniform_in(0.0, tree.span);
                let (s, t) = if a <= b { (a, b) } else { (b, a) };
                let want = tree
                    .atoms
                    .iter()
                    .filter(|at| at.time > s && at.time <= t)
                    .map(|at| at.height)
                    .fold(None, |m: Option<f64>, h| Some(m.map_or(h, |v| v.max(h))));
                let la = tree.lineage(s).unwrap();
                let lb = tree.lineage(t).unwrap();
                assert_eq!(la.divergence_height(&lb), want);
                if let Some(h) = want {
                    // Same value through the leaf-indexed interface.
                    let (i, j) = (tree.leaf_at(s), tree.leaf_at(t));
                    assert_eq!(tree.coalescence_depth(i, j).unwrap(), h);
                }
            }
        }
    }
}
