//! Branching intensities ν and mutation intensities μ, their scale functions,
//! and the mutation-discounted scale function.
//!
//! Conventions used throughout the crate:
//!
//! * `tail(x)` is ν̄(x) = ν([x, ∞]), finite and positive for every `x > 0`,
//!   nonincreasing, possibly with an atom at infinity (supercritical cases).
//! * `W(x) = 1/ν̄(x)` is the scale function; `W(0)` means the limit from the
//!   right and is evaluated at [`W_ORIGIN_EPS`].
//! * `cum(x)` is μ̲(x) = μ([0, x]), finite for all `x`, with μ([0, ∞)) = ∞.
//! * The discounted scale function is
//!   `W^μ(x) = W(0) + ∫₀ˣ e^{-μ̲(y)} dW(y)`.
//!
//! Stieltjes integrals are computed by substituting the cumulative function
//! of the integrator measure, which turns them into ordinary integrals with
//! benign integrands (an `e^{-u}` factor tames improper upper limits):
//! `∫ g(x) dW(x) = ∫ g(W⁻¹(w)) dw` and `∫ g(x) μ(dx) = ∫ g(μ̲⁻¹(u)) du`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_to_inf, QuadratureConfig};
use crate::rng::RandomStream;

/// Height at which the right-limit `W(0+)` is evaluated.
pub const W_ORIGIN_EPS: f64 = 1e-12;

fn one() -> f64 {
    1.0
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation for user-supplied tables
// ---------------------------------------------------------------------------

/// A strictly monotone table with Fritsch–Carlson (monotone cubic Hermite)
/// interpolation and a bisection inverse. Used by the `tabulated` measure
/// families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    #[serde(skip)]
    ds: Vec<f64>,
}

impl MonotoneTable {
    /// Build from knots with strictly increasing `xs` and strictly monotone
    /// `ys` (either direction).
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(invalid("table needs at least two knots, same length"));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("table abscissae must be strictly increasing"));
        }
        let inc = ys[1] > ys[0];
        let ok = ys
            .windows(2)
            .all(|w| if inc { w[0] < w[1] } else { w[0] > w[1] });
        if !ok {
            return Err(invalid("table ordinates must be strictly monotone"));
        }
        let mut t = MonotoneTable {
            xs,
            ys,
            ds: Vec::new(),
        };
        t.rebuild_derivatives();
        Ok(t)
    }

    /// Recompute Hermite slopes (also used after deserialization).
    pub fn rebuild_derivatives(&mut self) {
        let n = self.xs.len();
        let h: Vec<f64> = self.xs.windows(2).map(|w| w[1] - w[0]).collect();
        let sec: Vec<f64> = (0..n - 1)
            .map(|i| (self.ys[i + 1] - self.ys[i]) / h[i])
            .collect();
        let mut d = vec![0.0; n];
        d[0] = sec[0];
        d[n - 1] = sec[n - 2];
        for i in 1..n - 1 {
            if sec[i - 1] * sec[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
            }
        }
        // Clamp endpoint slopes to preserve monotonicity (Fritsch–Carlson).
        for (i, lim) in [(0usize, sec[0]), (n - 1, sec[n - 2])] {
            if d[i] * lim <= 0.0 {
                d[i] = 0.0;
            } else if d[i].abs() > 3.0 * lim.abs() {
                d[i] = 3.0 * lim;
            }
        }
        self.ds = d;
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) if i >= self.xs.len() => self.xs.len() - 2,
            Err(i) => i - 1,
        }
    }

    /// Interpolated value; clamped to the end values outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().expect("nonempty") {
            return *self.ys.last().expect("nonempty");
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }

    /// Inverse by bisection inside the table range. The caller guarantees `y`
    /// lies between the end ordinates.
    pub fn inverse(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = (self.xs[0], *self.xs.last().expect("nonempty"));
        let increasing = self.ys[1] > self.ys[0];
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.eval(mid);
            let go_right = if increasing { v < y } else { v > y };
            if go_right {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("nonempty"))
    }

    pub fn y_end(&self) -> f64 {
        *self.ys.last().expect("nonempty")
    }

    pub fn y_start(&self) -> f64 {
        self.ys[0]
    }

    /// Slope of the last segment (used to extend cumulative tables).
    pub fn end_slope(&self) -> f64 {
        let n = self.xs.len();
        (self.ys[n - 1] - self.ys[n - 2]) / (self.xs[n - 1] - self.xs[n - 2])
    }

    /// The same table with every ordinate multiplied by `factor > 0`.
    pub fn scaled_values(&self, factor: f64) -> MonotoneTable {
        let mut t = MonotoneTable {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| y * factor).collect(),
            ds: Vec::new(),
        };
        t.rebuild_derivatives();
        t
    }
}

// ---------------------------------------------------------------------------
// Branching intensity ν
// ---------------------------------------------------------------------------

/// Branching intensity measure ν on (0, ∞], described by its tail ν̄.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum IntensityMeasure {
    /// ν(dx) = dx/x², i.e. ν̄(x) = 1/x (Brownian tree).
    Brownian,
    /// ν̄(x) = c·x^{-a} with `0 < a`, `c > 0`.
    Power {
        a: f64,
        #[serde(default = "one")]
        c: f64,
    },
    /// ν̄(x) = 2c/(1 - e^{-2cx}); carries an atom of mass 2c at infinity.
    Tilted { c: f64 },
    /// User-supplied tail, interpolated monotonically; `atom` is ν({∞}).
    Tabulated {
        table: MonotoneTable,
        #[serde(default)]
        atom: f64,
    },
    /// ν restricted to [0, z] plus an atom ν̄(z)·δ_∞.
    Truncated {
        inner: Box<IntensityMeasure>,
        z: f64,
    },
}

impl IntensityMeasure {
    /// ν̄(x) for `x > 0`.
    pub fn tail(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0, "tail needs x > 0");
        match self {
            IntensityMeasure::Brownian => 1.0 / x,
            IntensityMeasure::Power { a, c } => c * x.powf(-a),
            IntensityMeasure::Tilted { c } => {
                let e = -(-2.0 * c * x).exp_m1(); // 1 - e^{-2cx}
                2.0 * c / e
            }
            IntensityMeasure::Tabulated { table, atom } => {
                let (lo, hi) = table.x_range();
                if x >= hi {
                    // Beyond the table only the atom (if any) remains.
                    table.y_end().max(*atom)
                } else if x <= lo {
                    table.y_start()
                } else {
                    table.eval(x)
                }
            }
            IntensityMeasure::Truncated { inner, z } => inner.tail(x.min(*z)),
        }
    }

    /// Mass ν({∞}); zero for (sub)critical families.
    pub fn atom_at_infinity(&self) -> f64 {
        match self {
            IntensityMeasure::Brownian | IntensityMeasure::Power { .. } => 0.0,
            IntensityMeasure::Tilted { c } => 2.0 * c,
            IntensityMeasure::Tabulated { atom, .. } => *atom,
            IntensityMeasure::Truncated { inner, z } => inner.tail(*z),
        }
    }

    /// Generalized inverse: the smallest `x` with ν̄(x) ≤ u, `+∞` when the
    /// tail never drops to `u` (i.e. `u` is at or below the mass at infinity).
    pub fn inverse_tail(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0, "inverse_tail needs u > 0");
        match self {
            IntensityMeasure::Brownian => 1.0 / u,
            IntensityMeasure::Power { a, c } => (c / u).powf(1.0 / a),
            IntensityMeasure::Tilted { c } => {
                let r = 2.0 * c / u;
                if r >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-r).ln_1p() / (2.0 * c) // -ln(1-r)/(2c)
                }
            }
            IntensityMeasure::Tabulated { table, atom } => {
                if u <= *atom || u <= table.y_end() {
                    // At the residual tail level the draw escapes the table.
                    if u <= *atom {
                        f64::INFINITY
                    } else {
                        table.x_range().1
                    }
                } else if u >= table.y_start() {
                    table.x_range().0
                } else {
                    table.inverse(u)
                }
            }
            IntensityMeasure::Truncated { inner, z } => {
                if u <= inner.tail(*z) {
                    f64::INFINITY
                } else {
                    inner.inverse_tail(u)
                }
            }
        }
    }

    /// Scale function `W(x) = 1/ν̄(x)`.
    pub fn w(&self, x: f64) -> f64 {
        1.0 / self.tail(x)
    }

    /// `W(0+)`, evaluated at [`W_ORIGIN_EPS`]; zero for infinite-mass ν.
    pub fn w_origin(&self) -> f64 {
        self.w(W_ORIGIN_EPS)
    }

    /// `W(∞) = 1/ν({∞})`, infinite when ν has no atom at infinity.
    pub fn w_at_infinity(&self) -> f64 {
        let a = self.atom_at_infinity();
        if a > 0.0 {
            1.0 / a
        } else {
            f64::INFINITY
        }
    }

    /// Inverse of the scale function: `x` with `W(x) = w`.
    pub fn w_inverse(&self, w: f64) -> f64 {
        debug_assert!(w > 0.0);
        self.inverse_tail(1.0 / w)
    }

    /// ν restricted to heights ≤ `z` with the excess mass moved to infinity.
    /// The truncated scale function satisfies `Ŵ(x) = W(x ∧ z)`.
    pub fn truncate_at_height(&self, z: f64) -> Result<IntensityMeasure> {
        if !(z > 0.0) || !self.tail(z).is_finite() {
            return Err(invalid(format!("truncation height must be positive, got {z}")));
        }
        Ok(IntensityMeasure::Truncated {
            inner: Box::new(self.clone()),
            z,
        })
    }

    /// One draw from ν conditioned on `[floor, ∞]`; may return `+∞` when ν
    /// has an atom at infinity.
    pub fn sample_tail(&self, floor: f64, rng: &mut RandomStream) -> Result<f64> {
        if !(floor > 0.0) {
            return Err(invalid("sample_tail needs a positive floor"));
        }
        let total = self.tail(floor);
        if !total.is_finite() || total <= 0.0 {
            return Err(invalid(format!("ν̄({floor}) = {total} not usable")));
        }
        // Strictly positive uniform keeps u in (0, total], matching the
        // convention that inverse_tail(u) ≤ floor never undershoots.
        let u = (1.0 - rng.uniform()) * total;
        Ok(self.inverse_tail(u).max(floor))
    }

    /// One draw from ν conditioned on the window `[lo, hi)`; finite heights.
    pub fn sample_in_window(&self, lo: f64, hi: f64, rng: &mut RandomStream) -> f64 {
        debug_assert!(0.0 < lo && lo < hi);
        let (tl, th) = (self.tail(lo), self.tail(hi));
        let u = th + (1.0 - rng.uniform()) * (tl - th);
        self.inverse_tail(u).clamp(lo, hi)
    }
}

// ---------------------------------------------------------------------------
// Mutation intensity μ
// ---------------------------------------------------------------------------

/// Mutation intensity measure μ on [0, ∞), described by its cumulative μ̲.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MutationMeasure {
    /// μ(dx) = θ·dx; θ = 0 means "no mutations" (degenerate but convenient).
    Uniform { theta: f64 },
    /// User-supplied cumulative, extended past the last knot with its final
    /// slope so that μ([0,∞)) = ∞ holds.
    Tabulated { table: MonotoneTable },
}

impl MutationMeasure {
    pub fn uniform(theta: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(invalid(format!("theta must be finite and >= 0, got {theta}")));
        }
        Ok(MutationMeasure::Uniform { theta })
    }

    /// μ̲(x) = μ([0, x]).
    pub fn cum(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match self {
            MutationMeasure::Uniform { theta } => theta * x,
            MutationMeasure::Tabulated { table } => {
                let (lo, hi) = table.x_range();
                if x <= lo {
                    // Table starts at its first knot; treat mass below as linear to 0.
                    if lo > 0.0 {
                        table.y_start() * (x / lo)
                    } else {
                        table.y_start()
                    }
                } else if x >= hi {
                    table.y_end() + table.end_slope() * (x - hi)
                } else {
                    table.eval(x)
                }
            }
        }
    }

    /// Smallest `x` with μ̲(x) ≥ u; `+∞` when μ is identically zero.
    pub fn inverse_cum(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        match self {
            MutationMeasure::Uniform { theta } => {
                if *theta > 0.0 {
                    u / theta
                } else if u == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            MutationMeasure::Tabulated { table } => {
                let (lo, hi) = table.x_range();
                if u <= table.y_start() {
                    if table.y_start() > 0.0 {
                        lo * (u / table.y_start())
                    } else {
                        lo
                    }
                } else if u >= table.y_end() {
                    hi + (u - table.y_end()) / table.end_slope()
                } else {
                    table.inverse(u)
                }
            }
        }
    }

    /// Whether μ([0, ∞)) = ∞ (required by most of the analytic layer).
    pub fn has_infinite_mass(&self) -> bool {
        match self {
            MutationMeasure::Uniform { theta } => *theta > 0.0,
            MutationMeasure::Tabulated { table } => table.end_slope() > 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, MutationMeasure::Uniform { theta } if *theta == 0.0)
    }

    /// The measure `factor · μ`.
    pub fn scaled(&self, factor: f64) -> Result<MutationMeasure> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(invalid(format!("scale factor must be positive, got {factor}")));
        }
        Ok(match self {
            MutationMeasure::Uniform { theta } => MutationMeasure::Uniform {
                theta: theta * factor,
            },
            MutationMeasure::Tabulated { table } => MutationMeasure::Tabulated {
                table: table.scaled_values(factor),
            },
        })
    }
}

/// A branching intensity paired with a mutation intensity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurePair {
    pub nu: IntensityMeasure,
    pub mu: MutationMeasure,
}

impl MeasurePair {
    pub fn new(nu: IntensityMeasure, mu: MutationMeasure) -> Self {
        MeasurePair { nu, mu }
    }

    /// Pair with ν truncated at height `z` (μ unchanged).
    pub fn truncate_at_height(&self, z: f64) -> Result<MeasurePair> {
        Ok(MeasurePair {
            nu: self.nu.truncate_at_height(z)?,
            mu: self.mu.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// Discounted scale function
// ---------------------------------------------------------------------------

/// `W^μ(x) = W(0) + ∫₀ˣ e^{-μ̲(y)} dW(y)`, via the substitution `w = W(y)`.
pub fn w_mu(pair: &MeasurePair, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid(format!("w_mu needs x > 0, got {x}")));
    }
    let w0 = pair.nu.w_origin();
    let wx = pair.nu.w(x);
    if pair.mu.is_zero() {
        return Ok(wx);
    }
    if wx <= w0 {
        return Ok(wx);
    }
    let nu = &pair.nu;
    let mu = &pair.mu;
    let integral = integrate(
        |w| (-mu.cum(nu.w_inverse(w))).exp(),
        w0,
        wx,
        cfg,
    )?;
    Ok(w0 + integral)
}

/// `W^μ(∞) = ∫₀^∞ W(x) e^{-μ̲(x)} μ(dx)`, via the substitution `u = μ̲(x)`.
///
/// Errors with [`Error::Divergent`] when μ has no mass (then `W^μ = W` and
/// the limit is `W(∞)`, finite only for supercritical ν).
pub fn w_mu_inf(pair: &MeasurePair, cfg: &QuadratureConfig) -> Result<f64> {
    if pair.mu.is_zero() {
        let w = pair.nu.w_at_infinity();
        return if w.is_finite() {
            Ok(w)
        } else {
            Err(Error::Divergent("W^μ(∞) with zero μ and critical ν".into()))
        };
    }
    if !pair.mu.has_infinite_mass() {
        return Err(invalid("μ must have infinite total mass"));
    }
    let nu = &pair.nu;
    let mu = &pair.mu;
    let w_cap = nu.w_at_infinity();
    integrate_to_inf(
        |u| {
            let x = mu.inverse_cum(u);
            let w = if x.is_finite() { nu.w(x) } else { w_cap };
            if w.is_finite() {
                (-u).exp() * w
            } else {
                0.0
            }
        },
        0.0,
        cfg,
    )
}

/// Tail of the clonal branching intensity: `ν̄^μ(x) = 1/W^μ(x)`.
pub fn nu_mu_tail(pair: &MeasurePair, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(1.0 / w_mu(pair, x, cfg)?)
}
