//! Simulation and numerical analysis of coalescent point processes (CPPs):
//! ultrametric random trees whose consecutive coalescence depths come from a
//! Poisson point process, carrying Poissonian neutral mutations.
//!
//! The crate has three layers that check each other:
//!
//! * **Samplers** ([`comb`], [`mutation`], [`clonal`], [`simple_tree`],
//!   [`growth`], [`birth_death`]) draw the random objects — combs, mutation
//!   marks, mutation-free boundary sets, allelic partitions, grafting-grown
//!   clonal trees, and (pure-)birth–death genealogies.
//! * **Analytics** ([`measures`], [`analytics`], [`special`], [`quad`])
//!   evaluate the corresponding closed-form laws: scale functions `W`,
//!   `W^μ`, Laplace exponents, renewal densities, existence probabilities,
//!   and the allele frequency spectrum.
//! * **Verification** ([`stats`], [`harness`], [`suites`]) runs replicated
//!   Monte Carlo experiments and tests the samples against the laws.
//!
//! Everything is deterministic given a master seed: replicate streams are
//! derived by counter, so results are independent of thread count.

pub mod analytics;
pub mod birth_death;
pub mod clonal;
pub mod comb;
pub mod error;
pub mod growth;
pub mod harness;
pub mod intervals;
pub mod measures;
pub mod mutation;
pub mod quad;
pub mod rng;
pub mod simple_tree;
pub mod special;
pub mod stats;
pub mod suites;

pub use error::{Error, Result};
