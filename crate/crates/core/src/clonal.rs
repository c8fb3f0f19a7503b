//! Clonal structure of a marked comb: shadows, clonal sets, the allelic
//! partition of the boundary, reduced clonal subtrees, and the coupling
//! statistic for the onset of clonal points.
//!
//! The *shadow* of a mark at `(t_b, y)` is the set of boundary points whose
//! lineage passes through the mark: the interval `[t_b, e)` where `e` is the
//! first atom time after `t_b` with height above `y` (or the window end).
//! A boundary point is *clonal* when no mark shadows it.

use serde::{Deserialize, Serialize};

use crate::comb::{Atom, CombTree};
use crate::error::{invalid, Result};
use crate::intervals::{Interval, IntervalSet};
use crate::mutation::{Mark, MarkedTree};

/// Boundary interval shadowed by one mark.
pub fn mark_shadow(tree: &CombTree, mark: &Mark) -> Interval {
    let start = mark.time;
    let from = tree.atoms.partition_point(|a| a.time <= start);
    let end = tree.atoms[from..]
        .iter()
        .find(|a| a.height > mark.depth)
        .map_or(tree.span, |a| a.time);
    Interval::new(start, end)
}

/// Union of the shadows of the given marks.
pub fn shadow_union<'a, I>(tree: &CombTree, marks: I) -> IntervalSet
where
    I: IntoIterator<Item = &'a Mark>,
{
    IntervalSet::from_intervals(marks.into_iter().map(|m| mark_shadow(tree, m)))
}

/// Boundary points carrying the ancestral type: no mark anywhere on their
/// lineage (origin-branch marks included).
pub fn ancestral_clonal_set(mt: &MarkedTree) -> IntervalSet {
    shadow_union(&mt.tree, mt.marks.iter()).complement(0.0, mt.tree.span)
}

/// Boundary points carrying the origin leaf's type: marks on the origin
/// lineage are ignored, so the point at time 0 is always clonal. This is
/// the stationary "record" version of the clonal set.
pub fn record_clonal_set(mt: &MarkedTree) -> IntervalSet {
    shadow_union(&mt.tree, mt.non_origin_marks()).complement(0.0, mt.tree.span)
}

/// Whether the boundary contains ancestral-type points at all.
pub fn has_ancestral_points(mt: &MarkedTree) -> bool {
    !ancestral_clonal_set(mt).is_empty()
}

/// One allele of the boundary partition: the carrier set of all points whose
/// most recent mutation is the given mark.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Allele {
    /// Index of the defining mark in `mt.marks`.
    pub mark: usize,
    /// Depth of the defining mark (most recent mutation of the carriers).
    pub depth: f64,
    pub carriers: IntervalSet,
    pub mass: f64,
}

/// The partition of the boundary window by allelic type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllelicPartition {
    /// Carriers of the ancestral (root) type; may be empty.
    pub ancestral: IntervalSet,
    /// Alleles with nonempty carrier sets, in increasing depth order.
    pub alleles: Vec<Allele>,
}

impl AllelicPartition {
    /// Number of alleles with carrier mass strictly above `q`
    /// (the ancestral type does not count).
    pub fn count_exceeding(&self, q: f64) -> usize {
        self.alleles.iter().filter(|a| a.mass > q).count()
    }

    /// Number of boundary clusters with carrier mass strictly above `q`,
    /// the ancestral type included: the empirical tail of the frequency
    /// spectrum, whose mean intensity the analytics layer computes.
    pub fn clusters_exceeding(&self, q: f64) -> usize {
        self.count_exceeding(q) + usize::from(self.ancestral.total_length() > q)
    }

    pub fn total_mass(&self) -> f64 {
        self.ancestral.total_length() + self.alleles.iter().map(|a| a.mass).sum::<f64>()
    }
}

/// Partition the boundary by allelic type. A point's allele is decided by
/// the most recent (lowest-depth) mark on its lineage, so marks claim their
/// shadows in increasing depth order, each taking what earlier claimants
/// left over.
pub fn allelic_partition(mt: &MarkedTree) -> AllelicPartition {
    let tree = &mt.tree;
    let mut order: Vec<usize> = (0..mt.marks.len()).collect();
    order.sort_by(|&i, &j| {
        mt.marks[i]
            .depth
            .total_cmp(&mt.marks[j].depth)
            .then(i.cmp(&j))
    });
    let mut claimed = IntervalSet::empty();
    let mut alleles = Vec::new();
    for idx in order {
        let shadow = IntervalSet::from_intervals([mark_shadow(tree, &mt.marks[idx])]);
        let carriers = shadow.subtract(&claimed);
        if !carriers.is_empty() {
            alleles.push(Allele {
                mark: idx,
                depth: mt.marks[idx].depth,
                mass: carriers.total_length(),
                carriers,
            });
        }
        claimed = claimed.union(&shadow);
    }
    AllelicPartition {
        ancestral: claimed.complement(0.0, tree.span),
        alleles,
    }
}

/// Coalescence depths of the reduced clonal subtree in record mode: one
/// depth per pair of consecutive clonal components (the largest atom height
/// across the separating gap, including the atoms at its closed ends) plus
/// the depths of atoms interior to each clonal component.
pub fn record_clonal_depths(mt: &MarkedTree) -> Vec<f64> {
    let tree = &mt.tree;
    let clonal = record_clonal_set(mt);
    let mut depths = Vec::new();
    let mut prev_end: Option<f64> = None;
    for iv in clonal.intervals() {
        if let Some(pe) = prev_end {
            // Gap [pe, iv.start]: closed on both ends — the atoms that
            // terminated the previous component and opened this one count.
            if let Some(h) = tree.max_height_in(pe, iv.start) {
                depths.push(h);
            }
        }
        // Atoms strictly inside the component.
        let from = tree.atoms.partition_point(|a| a.time <= iv.start);
        depths.extend(
            tree.atoms[from..]
                .iter()
                .take_while(|a| a.time < iv.end)
                .map(|a| a.height),
        );
        prev_end = Some(iv.end);
    }
    depths
}

/// Reduced clonal subtree in record mode, as a comb in its own right: the
/// clonal components of the boundary are concatenated (re-parameterized by
/// clonal mass), each removed gap collapses to a single atom at the largest
/// height across it (closed on both ends), and atoms interior to a component
/// are kept at their shifted times. The window `[ε, z)` is inherited, the new
/// span is the total clonal mass, and a tree without marks comes back
/// unchanged. Errors when the clonal set is empty.
pub fn reduced_clonal_subtree(mt: &MarkedTree) -> Result<CombTree> {
    let tree = &mt.tree;
    let clonal = record_clonal_set(mt);
    if clonal.is_empty() {
        return Err(invalid("clonal set is empty"));
    }
    let mut atoms = Vec::new();
    let mut offset = 0.0f64;
    let mut prev_end: Option<f64> = None;
    for iv in clonal.intervals() {
        if let Some(pe) = prev_end {
            // Consecutive components are separated by at least one shadow,
            // and every shadow starts at an atom, so the gap maximum exists.
            let height = tree
                .max_height_in(pe, iv.start)
                .ok_or_else(|| invalid("clonal components must be separated by an atom"))?;
            atoms.push(Atom {
                time: offset,
                height,
            });
        }
        let from = tree.atoms.partition_point(|a| a.time <= iv.start);
        atoms.extend(
            tree.atoms[from..]
                .iter()
                .take_while(|a| a.time < iv.end)
                .map(|a| Atom {
                    time: offset + (a.time - iv.start),
                    height: a.height,
                }),
        );
        offset += iv.len();
        prev_end = Some(iv.end);
    }
    let reduced = CombTree {
        z: tree.z,
        epsilon: tree.epsilon,
        span: offset,
        atoms,
    };
    reduced.validate()?;
    Ok(reduced)
}

/// Outcome of the clonal-onset statistic under a coupling of scale
/// `θ_max = mt.scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OnsetOutcome {
    /// The onset `τ = -ln Θ*` was resolved (above `-ln θ_max`).
    Value(f64),
    /// Clonal points exist even at the full coupling scale, so the onset is
    /// only known to lie at or below the bound `-ln θ_max`.
    CensoredBelow(f64),
}

/// Onset of clonal points along the coupling: with marks of intensity
/// `θ·μ` obtained by keeping levels `≤ θ`, the boundary acquires clonal
/// points as θ decreases below `Θ* = sup_t min{level of marks shadowing t}`.
/// Returns `-ln Θ*`, censored when some point is unshadowed at full scale.
pub fn clonal_onset(mt: &MarkedTree) -> OnsetOutcome {
    let tree = &mt.tree;
    let bound = -mt.scale.ln();
    if mt.marks.is_empty() {
        return OnsetOutcome::CensoredBelow(bound);
    }
    // Sweep the boundary; maintain the multiset of levels of active shadows.
    // Event ordering: ends strictly before starts at equal positions, since
    // shadows are half-open on the right.
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Kind {
        End,
        Start,
    }
    let mut events: Vec<(f64, Kind, u64)> = Vec::with_capacity(2 * mt.marks.len());
    for m in &mt.marks {
        let iv = mark_shadow(tree, m);
        let key = m.level.to_bits();
        events.push((iv.start, Kind::Start, key));
        events.push((iv.end, Kind::End, key));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut active: std::collections::BTreeMap<u64, usize> = std::collections::BTreeMap::new();
    let mut pos = 0.0;
    let mut theta_star: f64 = f64::NEG_INFINITY;
    let mut uncovered = false;
    let mut check_segment = |from: f64, to: f64, active: &std::collections::BTreeMap<u64, usize>| {
        if to > from {
            match active.keys().next() {
                Some(&bits) => theta_star = theta_star.max(f64::from_bits(bits)),
                None => uncovered = true,
            }
        }
    };
    for (p, kind, key) in events {
        check_segment(pos, p.min(tree.span), &active);
        pos = pos.max(p.min(tree.span));
        match kind {
            Kind::Start => *active.entry(key).or_insert(0) += 1,
            Kind::End => {
                if let Some(c) = active.get_mut(&key) {
                    *c -= 1;
                    if *c == 0 {
                        active.remove(&key);
                    }
                }
            }
        }
    }
    check_segment(pos, tree.span, &active);
    if uncovered {
        OnsetOutcome::CensoredBelow(bound)
    } else {
        OnsetOutcome::Value(-theta_star.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{sample_comb, Atom};
    use crate::measures::{IntensityMeasure, MeasurePair, MutationMeasure};
    use crate::mutation::{sample_marks, BranchRef};
    use crate::rng::RandomStream;

    fn fixture_tree() -> CombTree {
        CombTree {
            z: 1.0,
            epsilon: 0.01,
            span: 4.0,
            atoms: vec![
                Atom { time: 1.0, height: 0.3 },
                Atom { time: 2.0, height: 0.8 },
                Atom { time: 3.0, height: 0.1 },
            ],
        }
    }

    fn mark(tree: &CombTree, branch: BranchRef, depth: f64, level: f64) -> Mark {
        Mark {
            branch,
            time: branch.time(tree),
            depth,
            level,
        }
    }

    fn fixture_marked() -> MarkedTree {
        let tree = fixture_tree();
        let marks = vec![
            mark(&tree, BranchRef::Origin, 0.5, 0.9),
            mark(&tree, BranchRef::Atom(0), 0.2, 0.4),
            mark(&tree, BranchRef::Atom(1), 0.05, 0.7),
            mark(&tree, BranchRef::Atom(2), 0.09, 0.2),
            mark(&tree, BranchRef::Origin, 0.9, 0.1),
        ];
        let mt = MarkedTree {
            tree,
            floor: 0.0,
            scale: 1.0,
            marks,
        };
        mt.validate().unwrap();
        mt
    }

    #[test]
    fn shadows_end_at_first_higher_atom() {
        let mt = fixture_marked();
        let t = &mt.tree;
        let ivs: Vec<Interval> = mt.marks.iter().map(|m| mark_shadow(t, m)).collect();
        assert_eq!(ivs[0], Interval::new(0.0, 2.0)); // stopped by atom of height 0.8
        assert_eq!(ivs[1], Interval::new(1.0, 2.0));
        assert_eq!(ivs[2], Interval::new(2.0, 3.0)); // 0.1 > 0.05 stops it
        assert_eq!(ivs[3], Interval::new(3.0, 4.0)); // runs to the window end
        assert_eq!(ivs[4], Interval::new(0.0, 4.0)); // nothing above 0.9
    }

    #[test]
    fn partition_claims_in_depth_order_and_conserves_mass() {
        let mt = fixture_marked();
        let part = allelic_partition(&mt);
        // Depth order: 0.05 → [2,3); 0.09 → [3,4); 0.2 → [1,2);
        // 0.5 → [0,1); 0.9 → nothing left.
        let masses: Vec<f64> = part.alleles.iter().map(|a| a.mass).collect();
        assert_eq!(masses, vec![1.0, 1.0, 1.0, 1.0]);
        assert!(part.ancestral.is_empty());
        assert!((part.total_mass() - mt.tree.span).abs() < 1e-12);
        assert_eq!(part.count_exceeding(0.5), 4);
        assert_eq!(part.count_exceeding(1.0), 0);
        // The deepest origin mark claims nothing.
        assert!(part.alleles.iter().all(|a| a.depth < 0.9));
    }

    #[test]
    fn record_mode_keeps_time_zero_clonal() {
        let mt = fixture_marked();
        let rec = record_clonal_set(&mt);
        assert!(rec.contains(0.0));
        // Non-origin shadows are [1,2), [2,3), [3,4): record set is [0,1).
        assert_eq!(rec.intervals(), &[Interval::new(0.0, 1.0)]);
        // Ancestral mode shadows everything (origin mark at depth 0.9).
        assert!(ancestral_clonal_set(&mt).is_empty());
        assert!(!has_ancestral_points(&mt));
    }

    #[test]
    fn record_depths_cover_gaps_with_closed_ends() {
        // Clonal record set [0,1); single gap [1,4]... only one component,
        // so no gap depths; interior of [0,1) has no atoms.
        let mt = fixture_marked();
        assert!(record_clonal_depths(&mt).is_empty());

        // Remove the deep atom-0 mark: shadows [2,3), [3,4); record set
        // [0,2); interior atom at t=1 (0.3); single component again.
        let mut mt2 = fixture_marked();
        mt2.marks.remove(1);
        let d = record_clonal_depths(&mt2);
        assert_eq!(d, vec![0.3]);

        // Keep only the atom-1 mark (shadow [2,3)): components [0,2) and
        // [3,4); interior atom (t=1, 0.3); gap [2,3] closed ⇒ max(0.8, 0.1).
        let tree = fixture_tree();
        let mt3 = MarkedTree {
            marks: vec![mark(&tree, BranchRef::Atom(1), 0.05, 0.5)],
            tree,
            floor: 0.0,
            scale: 1.0,
        };
        let mut d3 = record_clonal_depths(&mt3);
        d3.sort_by(f64::total_cmp);
        assert_eq!(d3, vec![0.3, 0.8]);
    }

    #[test]
    fn onset_takes_sup_of_min_covering_level() {
        let mt = fixture_marked();
        // Shadows/levels: [0,2)@0.9, [1,2)@0.4, [2,3)@0.7, [3,4)@0.2,
        // [0,4)@0.1. Min cover: [0,1): min(0.9,0.1)=0.1; [1,2): 0.1;
        // [2,3): 0.1; [3,4): 0.1. Θ* = 0.1 ⇒ τ = -ln 0.1.
        match clonal_onset(&mt) {
            OnsetOutcome::Value(v) => assert!((v - (-(0.1f64).ln())).abs() < 1e-12),
            o => panic!("unexpected outcome {o:?}"),
        }
        // Drop the whole-window mark: [0,1) is covered only by level 0.9:
        // Θ* = 0.9.
        let mut mt2 = fixture_marked();
        mt2.marks.pop();
        match clonal_onset(&mt2) {
            OnsetOutcome::Value(v) => assert!((v - (-(0.9f64).ln())).abs() < 1e-12),
            o => panic!("unexpected outcome {o:?}"),
        }
        // Drop the two origin marks as well: [0,1) uncovered ⇒ censored.
        let mut mt3 = fixture_marked();
        mt3.marks.retain(|m| m.branch != BranchRef::Origin);
        mt3.scale = 2.0;
        match clonal_onset(&mt3) {
            OnsetOutcome::CensoredBelow(b) => {
                assert!((b - (-(2.0f64).ln())).abs() < 1e-12)
            }
            o => panic!("unexpected outcome {o:?}"),
        }
    }

    #[test]
    fn shadows_and_clonal_set_tile_the_window() {
        let pair = MeasurePair::new(
            IntensityMeasure::Brownian,
            MutationMeasure::uniform(1.0).unwrap(),
        );
        let mut rng = RandomStream::from_seed(71);
        for i in 0..50 {
            let tree = sample_comb(&pair.nu, 1.0, 1e-3, &mut rng).unwrap();
            let mt = sample_marks(&pair, &tree, 1e-3, 1.0, &mut rng).unwrap();
            let shadows = shadow_union(&mt.tree, mt.marks.iter());
            let clonal = ancestral_clonal_set(&mt);
            let total = shadows.total_length() + clonal.total_length();
            assert!(
                (total - tree.span).abs() < 1e-9 * tree.span.max(1.0),
                "iteration {i}: {total} vs {}",
                tree.span
            );
            // Partition masses agree with the window too.
            let part = allelic_partition(&mt);
            assert!((part.total_mass() - tree.span).abs() < 1e-9 * tree.span.max(1.0));
        }
    }

    #[test]
    fn ancestral_existence_frequency_matches_known_value() {
        // Brownian ν, θ = 1, z = 1: existence probability ≈ 0.58198.
        let pair = MeasurePair::new(
            IntensityMeasure::Brownian,
            MutationMeasure::uniform(1.0).unwrap(),
        );
        let mut rng = RandomStream::from_seed(73);
        let n = 4000;
        let mut hits = 0usize;
        for _ in 0..n {
            let tree = sample_comb(&pair.nu, 1.0, 1e-3, &mut rng).unwrap();
            let mt = sample_marks(&pair, &tree, 1e-3, 1.0, &mut rng).unwrap();
            if has_ancestral_points(&mt) {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let want = 0.581_976_706_869_326_5;
        assert!((freq - want).abs() < 0.025, "freq {freq} vs {want}");
    }

    #[test]
    fn record_mass_mean_matches_discounted_scale_value() {
        // E[ℓ(record set)] = W^θ(z) = 1 − e^{-1} for brownian, θ = 1, z = 1.
        let pair = MeasurePair::new(
            IntensityMeasure::Brownian,
            MutationMeasure::uniform(1.0).unwrap(),
        );
        let mut rng = RandomStream::from_seed(79);
        let n = 4000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let tree = sample_comb(&pair.nu, 1.0, 1e-3, &mut rng).unwrap();
            let mt = sample_marks(&pair, &tree, 1e-3, 1.0, &mut rng).unwrap();
            let m = record_clonal_set(&mt).total_length();
            sum += m;
            sumsq += m * m;
        }
        let mean = sum / n as f64;
        let sd = (sumsq / n as f64 - mean * mean).sqrt();
        let want = 1.0 - (-1.0f64).exp();
        assert!(
            (mean - want).abs() < 3.0 * sd / (n as f64).sqrt(),
            "mean {mean} vs {want}"
        );
    }

    #[test]
    fn reduced_subtree_matches_hand_example() {
        let tree = fixture_tree();
        // One mark on the branch of atom 0 (time 1.0), shallow enough that
        // its shadow is [1, 2): the atom at time 2 (height 0.8) closes it.
        let marks = vec![mark(&tree, BranchRef::Atom(0), 0.2, 0.4)];
        let mt = MarkedTree {
            tree,
            floor: 0.0,
            scale: 1.0,
            marks,
        };
        // Clonal set [0,1) ∪ [2,4): the gap [1,2] collapses to one atom at
        // max(0.3, 0.8); the atom at time 3 shifts to 1 + (3 − 2) = 2.
        let reduced = reduced_clonal_subtree(&mt).unwrap();
        assert_eq!(reduced.z, 1.0);
        assert_eq!(reduced.epsilon, 0.01);
        assert_eq!(reduced.span, 3.0);
        assert_eq!(
            reduced.atoms,
            vec![
                Atom {
                    time: 1.0,
                    height: 0.8
                },
                Atom {
                    time: 2.0,
                    height: 0.1
                },
            ]
        );
        assert_eq!(record_clonal_depths(&mt), vec![0.8, 0.1]);
    }

    #[test]
    fn reduced_subtree_without_marks_is_the_tree_itself() {
        let mt = MarkedTree {
            tree: fixture_tree(),
            floor: 0.0,
            scale: 1.0,
            marks: Vec::new(),
        };
        assert_eq!(reduced_clonal_subtree(&mt).unwrap(), mt.tree);
        // Origin marks are invisible in record mode, so they do not reduce
        // the tree either.
        let mt2 = MarkedTree {
            marks: vec![mark(&mt.tree, BranchRef::Origin, 0.5, 0.9)],
            ..mt.clone()
        };
        assert_eq!(reduced_clonal_subtree(&mt2).unwrap(), mt.tree);
    }

    #[test]
    fn reduced_subtree_agrees_with_depths_and_mass() {
        let pair = MeasurePair::new(
            IntensityMeasure::Brownian,
            MutationMeasure::uniform(1.5).unwrap(),
        );
        let mut rng = RandomStream::from_seed(83);
        for _ in 0..200 {
            let tree = sample_comb(&pair.nu, 1.0, 1e-3, &mut rng).unwrap();
            let mt = sample_marks(&pair, &tree, 1e-3, 1.5, &mut rng).unwrap();
            let reduced = reduced_clonal_subtree(&mt).unwrap();
            reduced.validate().unwrap();
            let mass = record_clonal_set(&mt).total_length();
            assert!((reduced.span - mass).abs() <= 1e-12 * mass.max(1.0));
            let heights: Vec<f64> = reduced.atoms.iter().map(|a| a.height).collect();
            assert_eq!(heights, record_clonal_depths(&mt));
        }
    }
}
