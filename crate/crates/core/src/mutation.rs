//! Poissonian mutation marks on a comb skeleton, with coupling levels.
//!
//! Every vertical branch of the comb — the origin lineage spanning depths
//! `(0, z)` and, for each atom `i`, a lineage spanning `(0, height_i)` —
//! carries an independent Poisson process of marks with intensity
//! `scale · μ` restricted to depths `[floor, top)`. Each mark also carries a
//! uniform level in `(0, scale]`, so that keeping marks with `level ≤ θ`
//! yields an exact sample of marks with intensity `θ · μ` for every
//! `θ ≤ scale`, simultaneously for all θ (a monotone coupling).

use serde::{Deserialize, Serialize};

use crate::comb::CombTree;
use crate::error::{invalid, Error, Result};
use crate::measures::{MeasurePair, MutationMeasure};
use crate::quad::{integrate, QuadratureConfig};
use crate::rng::RandomStream;

/// The vertical branch a mark sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchRef {
    /// The origin lineage at time 0, spanning depths `(0, z)`.
    Origin,
    /// The lineage of atom `i`, spanning depths `(0, height_i)`.
    Atom(usize),
}

impl BranchRef {
    /// Boundary time of the branch.
    pub fn time(&self, tree: &CombTree) -> f64 {
        match self {
            BranchRef::Origin => 0.0,
            BranchRef::Atom(i) => tree.atoms[*i].time,
        }
    }

    /// Depth of the branch's upper end.
    pub fn top(&self, tree: &CombTree) -> f64 {
        match self {
            BranchRef::Origin => tree.z,
            BranchRef::Atom(i) => tree.atoms[*i].height,
        }
    }

    fn to_index(self) -> i64 {
        match self {
            BranchRef::Origin => -1,
            BranchRef::Atom(i) => i as i64,
        }
    }

    fn from_index(v: i64) -> Result<Self> {
        if v == -1 {
            Ok(BranchRef::Origin)
        } else if v >= 0 {
            Ok(BranchRef::Atom(v as usize))
        } else {
            Err(invalid(format!("bad branch index {v}")))
        }
    }
}

/// One mutation mark: a branch, a depth on it, and a coupling level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(i64, f64, f64, f64)", into = "(i64, f64, f64, f64)")]
pub struct Mark {
    pub branch: BranchRef,
    /// Boundary time of the carrying branch (redundant with `branch`, kept
    /// for self-contained serialization).
    pub time: f64,
    /// Depth of the mark on the branch.
    pub depth: f64,
    /// Coupling level in `(0, scale]`.
    pub level: f64,
}

impl TryFrom<(i64, f64, f64, f64)> for Mark {
    type Error = Error;
    fn try_from(v: (i64, f64, f64, f64)) -> Result<Self> {
        Ok(Mark {
            branch: BranchRef::from_index(v.0)?,
            time: v.1,
            depth: v.2,
            level: v.3,
        })
    }
}

impl From<Mark> for (i64, f64, f64, f64) {
    fn from(m: Mark) -> Self {
        (m.branch.to_index(), m.time, m.depth, m.level)
    }
}

/// A comb together with its mutation marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedTree {
    pub tree: CombTree,
    /// Depth floor below which marks were not sampled.
    pub floor: f64,
    /// Coupling scale: the marks realize intensity `scale · μ`.
    pub scale: f64,
    pub marks: Vec<Mark>,
}

impl MarkedTree {
    /// Marks visible at coupling level `theta ≤ scale`, i.e. a sample of
    /// marks with intensity `θ · μ`.
    pub fn marks_at_level(&self, theta: f64) -> impl Iterator<Item = &Mark> + '_ {
        self.marks.iter().filter(move |m| m.level <= theta)
    }

    /// Marks excluding those on the origin lineage (the "record" point of
    /// view, where the initial type is the reference).
    pub fn non_origin_marks(&self) -> impl Iterator<Item = &Mark> + '_ {
        self.marks
            .iter()
            .filter(|m| m.branch != BranchRef::Origin)
    }

    /// The marked tree thinned to coupling level `theta`: keeps exactly the
    /// marks of level ≤ `theta` and rescales, so the result realizes
    /// intensity `min(theta, scale) · μ`. Monotone: thinning to `θ₁ ≤ θ₂`
    /// factors through thinning to `θ₂`.
    pub fn restrict_level(&self, theta: f64) -> MarkedTree {
        let scale = theta.clamp(0.0, self.scale);
        MarkedTree {
            tree: self.tree.clone(),
            floor: self.floor,
            scale,
            marks: self.marks.iter().filter(|m| m.level <= scale).copied().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        if !(self.scale >= 0.0) {
            return Err(invalid("scale must be nonnegative"));
        }
        for m in &self.marks {
            if let BranchRef::Atom(i) = m.branch {
                if i >= self.tree.n_atoms() {
                    return Err(invalid("mark branch out of range"));
                }
            }
            let (t, top) = (m.branch.time(&self.tree), m.branch.top(&self.tree));
            if (m.time - t).abs() > 1e-9 {
                return Err(invalid("mark time disagrees with branch time"));
            }
            if !(m.depth >= self.floor && m.depth < top) {
                return Err(invalid("mark depth outside its branch"));
            }
            if !(m.level > 0.0 && m.level <= self.scale) {
                return Err(invalid("mark level outside (0, scale]"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<MarkedTree> {
        let mt: MarkedTree = serde_json::from_str(s)?;
        mt.validate()?;
        Ok(mt)
    }
}

/// Sample mutation marks with intensity `scale · μ` on every branch of
/// `tree`, at depths in `[floor, branch top)`, with iid coupling levels
/// uniform on `(0, scale]`.
pub fn sample_marks(
    pair: &MeasurePair,
    tree: &CombTree,
    floor: f64,
    scale: f64,
    rng: &mut RandomStream,
) -> Result<MarkedTree> {
    if !(floor >= 0.0) {
        return Err(invalid("mark floor must be >= 0"));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(invalid("scale must be positive and finite"));
    }
    let mu = &pair.mu;
    let cum_floor = mu.cum(floor);
    let mut marks = Vec::new();
    let branches =
        std::iter::once(BranchRef::Origin).chain((0..tree.n_atoms()).map(BranchRef::Atom));
    for branch in branches {
        let top = branch.top(tree);
        if top <= floor {
            continue;
        }
        let mass = mu.cum(top) - cum_floor;
        let k = rng.poisson(scale * mass);
        let time = branch.time(tree);
        for _ in 0..k {
            let u = rng.uniform();
            let depth = mu.inverse_cum(cum_floor + u * mass).min(top);
            let level = (1.0 - rng.uniform()) * scale;
            marks.push(Mark {
                branch,
                time,
                depth,
                level,
            });
        }
    }
    Ok(MarkedTree {
        tree: tree.clone(),
        floor,
        scale,
        marks,
    })
}

/// Decide whether the full tree (all resolutions) carries finitely many
/// marks per unit boundary length, i.e. whether `∫₀ μ̲(x) ν(dx)` converges
/// at 0. Probes dyadic shells `[2^{-k-1}, 2^{-k})` numerically and inspects
/// the decay of their contributions; errors with [`Error::Inconclusive`]
/// when the pattern is ambiguous.
pub fn mutation_count_is_finite(pair: &MeasurePair, cfg: &QuadratureConfig) -> Result<bool> {
    if pair.mu.is_zero() {
        return Ok(true);
    }
    let nu = &pair.nu;
    let mu = &pair.mu;
    // Shell integral via the substitution v = ν̄(x):
    // ∫_{[a,b)} μ̲(x) ν(dx) = ∫_{ν̄(b)}^{ν̄(a)} μ̲(ν̄⁻¹(v)) dv.
    let shell = |k: i32| -> Result<f64> {
        let a = 2.0f64.powi(-k - 1);
        let b = 2.0f64.powi(-k);
        integrate(
            |v| mu.cum(nu.inverse_tail(v)),
            nu.tail(b),
            nu.tail(a),
            cfg,
        )
    };
    let i30 = shell(30)?;
    let i40 = shell(40)?;
    if i30 <= 0.0 {
        // No branching mass near 0 at all: finitely many branches, finite μ̲.
        return Ok(true);
    }
    let ratio = i40 / i30;
    if ratio <= 0.1 {
        // Sustained geometric-type decay of the shells ⇒ summable series.
        let i35 = shell(35)?;
        if i35 <= i30 && i40 <= i35 {
            return Ok(true);
        }
        return Err(Error::Inconclusive(
            "shell contributions decay but not monotonically".into(),
        ));
    }
    if ratio >= 1.0 - 1e-6 {
        return Ok(false);
    }
    Err(Error::Inconclusive(format!(
        "shell contributions decay too slowly to classify (I40/I30 = {ratio:.4})"
    )))
}

/// Expected number of marks on the visible skeleton of `tree` for intensity
/// `μ` and depth floor `floor` (conditionally on the tree).
pub fn expected_mark_count(mu: &MutationMeasure, tree: &CombTree, floor: f64) -> f64 {
    let base = mu.cum(floor);
    let origin = (mu.cum(tree.z) - base).max(0.0);
    origin
        + tree
            .atoms
            .iter()
            .map(|a| (mu.cum(a.height) - base).max(0.0))
            .sum::<f64>()
}
