//! Closed-form and quadrature-based laws for marked combs: the Laplace
//! exponent and renewal density of the clonal record set, existence and
//! onset probabilities, the allele intensity (frequency spectrum), expected
//! mutation counts, and the population-size Laplace transform of binary
//! birth-death processes.
//!
//! All improper integrals are evaluated after substituting the cumulative
//! of the integrating measure (`u = μ̲(x)` or `v = ν̄(x)`), which bounds the
//! integrands and turns the measures into Lebesgue measure.

use crate::birth_death::{BirthDeathModel, RateMeasure};
use crate::error::{invalid, Error, Result};
use crate::measures::{w_mu, MeasurePair};
use crate::mutation::mutation_count_is_finite;
use crate::quad::{integrate, integrate_to_inf, QuadratureConfig};
use crate::special::exp_integral_e1;

/// Laplace exponent φ of the subordinator whose closed range is the clonal
/// record set: `1/φ(λ) = ∫ e^{-μ̲(x)} / (λ + ν̄(x)) μ(dx)`.
pub fn laplace_exponent(pair: &MeasurePair, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(invalid("need lambda >= 0"));
    }
    if !pair.mu.has_infinite_mass() {
        return Err(invalid("μ must have infinite total mass"));
    }
    let nu = &pair.nu;
    let mu = &pair.mu;
    let inv = integrate_to_inf(
        |u| {
            let x = mu.inverse_cum(u);
            if x <= 0.0 {
                return 0.0;
            }
            let tail = if x.is_finite() {
                nu.tail(x)
            } else {
                nu.atom_at_infinity()
            };
            (-u).exp() / (lambda + tail)
        },
        0.0,
        cfg,
    )?;
    Ok(1.0 / inv)
}

/// Renewal density of the clonal record set:
/// `P(t ∈ R̃) = ∫ e^{-t ν̄(x) - μ̲(x)} μ(dx)`.
pub fn renewal_density(pair: &MeasurePair, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("need t >= 0"));
    }
    if !pair.mu.has_infinite_mass() {
        return Err(invalid("μ must have infinite total mass"));
    }
    let nu = &pair.nu;
    let mu = &pair.mu;
    integrate_to_inf(
        |u| {
            let x = mu.inverse_cum(u);
            if x <= 0.0 {
                return 0.0;
            }
            let tail = if x.is_finite() {
                nu.tail(x)
            } else {
                nu.atom_at_infinity()
            };
            (-u - t * tail).exp()
        },
        0.0,
        cfg,
    )
}

/// Probability that a fixed boundary point `t` of the `z`-window tree sits
/// in the clonal record set (origin-lineage marks ignored) with the window
/// still open at `t`. Equals the renewal density of the `z`-truncated pair.
pub fn windowed_record_probability(
    pair: &MeasurePair,
    z: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let truncated = pair.truncate_at_height(z)?;
    renewal_density(&truncated, t, cfg)
}

/// Laplace transform of the renewal density, `U(λ) = ∫₀^∞ e^{-λt} u(t) dt`,
/// computed by direct time integration. Up to quadrature error it satisfies
/// `φ(λ) · U(λ) = 1`.
pub fn renewal_laplace_transform(
    pair: &MeasurePair,
    lambda: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("need lambda > 0"));
    }
    // Inner quadrature errors make the integrand slightly noisy; keep the
    // outer tolerance above the inner one.
    let mut outer = *cfg;
    outer.rel_tol = cfg.rel_tol.max(1e-7) * 10.0;
    outer.abs_tol = cfg.abs_tol.max(1e-10);
    let mut inner_err: Option<crate::error::Error> = None;
    let val = integrate_to_inf(
        |t| match renewal_density(pair, t, cfg) {
            Ok(u) => (-lambda * t).exp() * u,
            Err(e) => {
                inner_err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        &outer,
    )?;
    match inner_err {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

/// Probability that the boundary of the `z`-window tree contains points of
/// the ancestral type: `W(z) e^{-μ̲(z)} / W^μ(z)`.
pub fn ancestral_existence_probability(
    pair: &MeasurePair,
    z: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(z > 0.0) {
        return Err(invalid("need z > 0"));
    }
    let w = pair.nu.w(z);
    let wm = w_mu(pair, z, cfg)?;
    Ok(w * (-pair.mu.cum(z)).exp() / wm)
}

/// CDF of the clonal onset time: `P(τ_z ≤ η)` equals the ancestral
/// existence probability once μ is thinned to `e^{-η} μ`.
pub fn clonal_onset_cdf(
    pair: &MeasurePair,
    z: f64,
    eta: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let thinned = MeasurePair::new(pair.nu.clone(), pair.mu.scaled((-eta).exp())?);
    ancestral_existence_probability(&thinned, z, cfg)
}

/// CDF of the record-set boundary mass `ℓ(R̃^z)`: exponential with mean
/// `W^μ(z)`.
pub fn record_mass_cdf(pair: &MeasurePair, z: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let mean = w_mu(pair, z, cfg)?;
    Ok(-(-x / mean).exp_m1())
}

/// CDF of a coalescence depth of the reduced clonal subtree of the
/// `z`-window tree, conditioned to exceed `eps_prime`:
/// `(ν̄^μ(ε') − ν̄^μ(x)) / (ν̄^μ(ε') − ν̄^μ(z))` with `ν̄^μ = 1/W^μ`.
pub fn reduced_depth_cdf(
    pair: &MeasurePair,
    z: f64,
    eps_prime: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(eps_prime > 0.0 && eps_prime < z) {
        return Err(invalid("need 0 < eps_prime < z"));
    }
    let hi = 1.0 / w_mu(pair, eps_prime, cfg)?;
    let lo = 1.0 / w_mu(pair, z, cfg)?;
    let x = x.clamp(eps_prime, z);
    let at = 1.0 / w_mu(pair, x, cfg)?;
    Ok((hi - at) / (hi - lo))
}

/// Shared kernel of the allele-mass intensity and its density: the window
/// root's ancestral-cluster term plus the integral over in-window mutation
/// depths (via `u = μ̲(x)`), with an extra `1/W^μ` factor for the density.
fn spectrum_integral(
    pair: &MeasurePair,
    z: f64,
    q: f64,
    cfg: &QuadratureConfig,
    density: bool,
) -> Result<f64> {
    if !(z > 0.0 && q >= 0.0) {
        return Err(invalid("need z > 0 and q >= 0"));
    }
    let mu = &pair.mu;
    let term = |x: f64| -> Result<f64> {
        let rate = 1.0 / w_mu(pair, x, cfg)?;
        let weight = if density { rate * rate } else { rate };
        Ok(weight * (-q * rate).exp())
    };
    // Mutations strictly inside the window, via u = μ̲(x).
    let mut inner_err: Option<crate::error::Error> = None;
    let body = integrate(
        |u| {
            let x = mu.inverse_cum(u).min(z);
            match term(x) {
                Ok(v) => (-u).exp() * v,
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        mu.cum(z),
        cfg,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    // Boundary term: lineages older than the window root.
    let boundary = (-mu.cum(z)).exp() * term(z)?;
    Ok(body + boundary)
}

/// Mean intensity of allele carrier masses exceeding `q`, per unit boundary
/// length, for the `z`-window tree: `Λ_z((q, ∞))/W(z)`. As `z → ∞` this
/// tends to `Λ((q, ∞))`, an exponential integral for Lebesgue μ.
pub fn spectrum_tail_intensity(
    pair: &MeasurePair,
    z: f64,
    q: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    spectrum_integral(pair, z, q, cfg, false)
}

/// Density in `q` of the allele-mass intensity per unit boundary length,
/// `(Λ_z(dq)/dq) / W(z)`. Integrating it over `(q, ∞)` recovers
/// [`spectrum_tail_intensity`]; without mutations only the ancestral-cluster
/// term survives and the density reduces to the span law `ν̄(z)²e^{-qν̄(z)}`.
pub fn spectrum_density(
    pair: &MeasurePair,
    z: f64,
    q: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    spectrum_integral(pair, z, q, cfg, true)
}

/// The `z → ∞` limit of [`spectrum_tail_intensity`] for Lebesgue mutation
/// measure `θ dx` and any ν with `W^μ(∞) = 1/θ`: `θ E₁(θ q)`.
pub fn spectrum_tail_limit(theta: f64, q: f64) -> Result<f64> {
    if !(theta > 0.0 && q > 0.0) {
        return Err(invalid("need theta > 0 and q > 0"));
    }
    Ok(theta * exp_integral_e1(theta * q))
}

/// Expected total number of mutations on the `z`-window tree across all
/// resolutions: `μ̲(z) + W(z) ∫_{(0,z)} μ̲(x) ν(dx)`. Errors when the
/// integral diverges (infinitely many mutations almost surely).
pub fn expected_total_mutations(
    pair: &MeasurePair,
    z: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(z > 0.0) {
        return Err(invalid("need z > 0"));
    }
    let per_span = branch_mutation_mass(pair, 0.0, z, cfg)?;
    Ok(pair.mu.cum(z) + pair.nu.w(z) * per_span)
}

/// `∫_{(lo, hi)} μ̲(x) ν(dx)` via the substitution `v = ν̄(x)` (improper at
/// `lo = 0` for infinite-mass ν).
pub fn branch_mutation_mass(
    pair: &MeasurePair,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(hi > lo && lo >= 0.0) {
        return Err(invalid("need 0 <= lo < hi"));
    }
    let nu = &pair.nu;
    let mu = &pair.mu;
    let v_hi = nu.tail(hi);
    let f = |v: f64| mu.cum(nu.inverse_tail(v));
    if lo > 0.0 {
        integrate(f, v_hi, nu.tail(lo), cfg)
    } else {
        // The improper end (v → ∞, i.e. depth → 0) can diverge so slowly —
        // logarithmically — that adaptive refinement bottoms out at floating-
        // point resolution and reports a finite value. Classify first.
        if !mutation_count_is_finite(pair, cfg)? {
            return Err(Error::Divergent(
                "branch mutation mass diverges near depth 0".into(),
            ));
        }
        integrate_to_inf(f, v_hi, cfg)
    }
}

/// Expected number of marks missed when sampling only the visible skeleton
/// (atoms ≥ ε) with a depth floor at ε: per visible branch the mass below
/// the floor, plus the whole skeleton below the resolution, per unit span.
pub fn per_span_missed_mark_mass(
    pair: &MeasurePair,
    epsilon: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    branch_mutation_mass(pair, 0.0, epsilon, cfg)
}

/// `E[e^{-α N}]` from the window functionals `(A, I)` of a birth-death
/// process: `1 - (1 - e^{-α}) / (A + (1 - e^{-α}) I)`. With `α = ∞` this is
/// the extinction probability `1 - 1/(A + I)`.
fn laplace_from_functionals(a: f64, i: f64, alpha: f64) -> f64 {
    let s = -(-alpha).exp_m1(); // 1 − e^{-α}
    1.0 - s / (a + s * i)
}

/// Laplace transform of the population size at `horizon` of a binary
/// birth-death process started from one individual at `t`. Piecewise-
/// constant rates admit exact window functionals, so no quadrature is
/// needed. `alpha` may be `+∞` (survival complement).
pub fn population_laplace(
    model: &BirthDeathModel,
    t: f64,
    horizon: f64,
    alpha: f64,
) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(invalid("need alpha >= 0"));
    }
    let (a, i) = model.window_functionals(t, horizon)?;
    Ok(laplace_from_functionals(a, i, alpha))
}

/// [`population_laplace`] for general diffuse rate measures: the window
/// functionals are computed by quadrature after substituting the birth
/// cumulative, `I = ∫₀^{β([t,T])} e^{κ([t,s(u)]) - u} du` with `s(u)` the
/// time at which the birth mass after `t` reaches `u`.
pub fn population_laplace_general(
    beta: &RateMeasure,
    kappa: &RateMeasure,
    t: f64,
    horizon: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(invalid("need alpha >= 0"));
    }
    if !(t < horizon) || horizon >= beta.upper_end() || horizon >= kappa.upper_end() {
        return Err(invalid("need t < horizon inside the rate supports"));
    }
    let total_birth = beta.cum(t, horizon);
    let a = (kappa.cum(t, horizon) - total_birth).exp();
    let i = integrate(
        |u| {
            let s = beta.first_arrival(t, u).unwrap_or(horizon);
            (kappa.cum(t, s) - u).exp()
        },
        0.0,
        total_birth,
        cfg,
    )?;
    Ok(laplace_from_functionals(a, i, alpha))
}
