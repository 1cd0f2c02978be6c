//! Numerical laboratory for B-operators: upper-triangular 2x2 block operators
//! `[V E; 0 X]` with V an isometry, ran V ⊥ ran E and X commuting with E*E.
//!
//! The crate provides exact linear algebra over structured index sets
//! ([`opcore`]), construction and power calculus of B-operators
//! ([`boperator`]), convergence/stability analysis primitives ([`analysis`]),
//! a theorem engine emitting premise-traced verdicts ([`classify`]) and a
//! gallery of concrete instances ([`gallery`]).

pub mod analysis;
pub mod boperator;
pub mod classify;
pub mod corpus;
pub mod error;
pub mod gallery;
pub mod opcore;

pub use error::{CoreError, Result};

/// Tolerance for algebraic identities that hold exactly in the theory.
///
/// Leaves headroom over floating-point accumulation for power sweeps up to
/// n = 512. Overridable per call wherever it matters.
pub const ALGEBRA_TOL: f64 = 1e-10;

/// Default probe tolerance for WOT/SOT convergence detection.
pub const DEFAULT_PROBE_TOL: f64 = 1e-8;

/// Default horizon for WOT/SOT probes.
pub const DEFAULT_HORIZON: u32 = 256;

/// Default probe horizon for validating the defining conditions.
pub const VALIDATION_HORIZON: u32 = 64;

/// Cluster values are considered distinct when separated by this factor
/// times the probe tolerance.
pub const CLUSTER_SEPARATION_FACTOR: f64 = 10.0;
