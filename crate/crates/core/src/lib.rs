#![no_std]

//! Partial information decomposition over exact finite distributions.
//!
//! The crate is organised bottom-up:
//!
//! - [`dist`]: joint distributions, marginals, posteriors and the classical
//!   information functionals (entropy, mutual information, KL divergence).
//! - [`lattice`]: antichains of source subsets, the redundancy order on them
//!   and Möbius inversion of cumulative redundancy into local atoms.
//! - [`measures`]: redundancy measures (`I_min`, `I_I`, and the geometric
//!   `SI_KL` / `SI_lr`) behind one trait, plus the bivariate decomposition.
//! - [`geometric`]: the least-informative convex combination of posteriors.
//! - [`axioms`]: executable property checks, the strong-symmetry
//!   infeasibility certificate and a seeded counterexample search.
//! - [`knowledge`]: partition models with knowledge, shared-knowledge and
//!   common-knowledge operators.
//!
//! Everything here is pure computation; file formats and the command line
//! live in the `pidkit` crate.

extern crate alloc;

pub mod axioms;
pub mod dist;
mod error;
pub mod geometric;
pub mod knowledge;
pub mod lattice;
mod mass;
pub mod measures;
mod varset;

pub use crate::dist::{ConditionalFamily, JointDistribution, Variable};
pub use crate::error::{Error, Result};
pub use crate::lattice::{Antichain, DecompositionTable, PiLattice};
pub use crate::mass::Mass;
pub use crate::measures::{MeasureKind, RedundancyMeasure};
pub use crate::varset::VarSet;

/// Equality tolerance for arithmetic identities.
pub const TOLERANCE: f64 = 1e-9;

/// Tolerance used by axiom verdicts.
pub const AXIOM_TOLERANCE: f64 = 1e-7;

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}
