//! Pairwise dependence and quality analysis for scrambled digital nets.
//!
//! Points are stored as base-`b` digit expansions. Scrambling them with nested
//! uniform or affine matrix randomizations makes any two points dependent in a
//! way governed by how many leading digits they share. This crate counts those
//! shared digits, turns the counts into gain coefficients, and exposes the
//! resulting joint density, dependence function and variance behaviour.

pub mod dependence;
pub mod digits;
pub mod error;
pub mod fieldlinalg;
pub mod netgen;
pub mod quality;
pub mod scramble;
pub mod seed;
pub mod tables;
pub mod variance;

pub use digits::{gamma_scalar, gamma_vector, DigitPoint, Gamma, GammaVector, PointSet, Provenance};
pub use error::{Error, Result};
pub use fieldlinalg::{FbMatrix, GeneratingMatrices};
pub use netgen::{NetKind, NetSpec, SequenceKind};
pub use quality::{quality_profile, MultiIndex, PairCounts, QualityProfile};
pub use scramble::{scramble, ScrambleMethod, ScrambleSpec};
pub use variance::{Integrand, VarianceReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/digits.md")]
    mod digits {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    mod constructions {}
    #[doc = include_str!("../../../book/src/scrambling.md")]
    mod scrambling {}
    #[doc = include_str!("../../../book/src/quality.md")]
    mod quality {}
    #[doc = include_str!("../../../book/src/dependence.md")]
    mod dependence {}
    #[doc = include_str!("../../../book/src/variance.md")]
    mod variance {}
}
