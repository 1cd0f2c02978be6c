//! Theorem engine: applies the power-convergence characterizations to a
//! validated B-operator plus structural certificates, emitting verdicts
//! with premise traces. Only decided premises justify a conclusion;
//! probe data is evidence, never proof.

mod engine;
mod range;
mod rules;
mod semispectral;
#[cfg(test)]
mod tests;
mod verdict;

pub use crate::analysis::{OperatorRole, StructuralCertificate, StructuralFacts};
pub use range::{
    crimmins_residual, isometric_equivalence_residual, range_closedness, RangeClosednessReport,
};
pub use rules::{
    adjoint_strong_stability, classify_sot, classify_wot, classify_wot_subnormal,
    isometry_persistence, never_strong_or_uniform, ClassifyParams,
};
pub use semispectral::{verify_semispectral, SemispectralReport};
pub use verdict::{BlockLimit, Conclusion, Premise, PremiseStatus, TheoremVerdict};
