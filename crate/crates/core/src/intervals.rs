//! Finite unions of half-open intervals `[start, end)` on the real line.
//!
//! These are the working currency of the clonal analyses: shadow regions,
//! clonal sets and allele carrier sets are all interval unions inside the
//! tree's boundary window `[0, T)`.

use serde::{Deserialize, Serialize};

/// A half-open interval `[start, end)`. Empty when `end <= start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Interval { start, end }
    }

    pub fn len(&self) -> f64 {
        (self.end - self.start).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// A normalized union of disjoint, sorted, nonempty half-open intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    items: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { items: Vec::new() }
    }

    /// Build from arbitrary intervals; overlapping and touching pieces merge.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        let mut v: Vec<Interval> = iter.into_iter().filter(|i| !i.is_empty()).collect();
        v.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut items: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match items.last_mut() {
                Some(last) if iv.start <= last.end => {
                    if iv.end > last.end {
                        last.end = iv.end;
                    }
                }
                _ => items.push(iv),
            }
        }
        IntervalSet { items }
    }

    pub fn single(start: f64, end: f64) -> Self {
        Self::from_intervals([Interval::new(start, end)])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        // Fold from +0.0: the stdlib `Sum` for floats starts at -0.0, which
        // would leak a negative zero into serialized output for empty sets.
        self.items.iter().fold(0.0, |acc, iv| acc + iv.len())
    }

    pub fn contains(&self, t: f64) -> bool {
        // Find the last interval starting at or before t.
        match self
            .items
            .binary_search_by(|iv| iv.start.total_cmp(&t))
        {
            Ok(_) => true,
            Err(0) => false,
            Err(i) => self.items[i - 1].contains(t),
        }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        Self::from_intervals(self.items.iter().chain(other.items.iter()).copied())
    }

    /// Set difference `self \ other`.
    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let mut j = 0;
        for iv in &self.items {
            let mut cur = iv.start;
            // Skip cutters entirely left of this interval.
            while j < other.items.len() && other.items[j].end <= iv.start {
                j += 1;
            }
            let mut k = j;
            while k < other.items.len() && other.items[k].start < iv.end {
                let cut = other.items[k];
                if cut.start > cur {
                    out.push(Interval::new(cur, cut.start.min(iv.end)));
                }
                cur = cur.max(cut.end);
                if cur >= iv.end {
                    break;
                }
                k += 1;
            }
            if cur < iv.end {
                out.push(Interval::new(cur, iv.end));
            }
        }
        IntervalSet { items: out }
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.items.len() && j < other.items.len() {
            let a = self.items[i];
            let b = other.items[j];
            let lo = a.start.max(b.start);
            let hi = a.end.min(b.end);
            if lo < hi {
                out.push(Interval::new(lo, hi));
            }
            if a.end <= b.end {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { items: out }
    }

    /// Complement within the window `[lo, hi)`.
    pub fn complement(&self, lo: f64, hi: f64) -> IntervalSet {
        IntervalSet::single(lo, hi).subtract(self)
    }
}
