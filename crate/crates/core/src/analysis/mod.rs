//! Numerical and certificate-backed analysis primitives: spectral radius,
//! summability panels, sup ||E_n|| boundedness, Wold membership, Cesàro
//! averages and WOT/SOT convergence probes.

pub mod cert;
mod ergodic;
mod probes;
mod spectral;

pub use cert::{OperatorRole, Sided, StructuralCertificate, StructuralFacts, SymbolInfo, Track};
pub use ergodic::{cesaro_projection, wold_membership, WoldMembership};
pub use probes::{
    cluster_values, sot_probe, wot_probe, AdjointAction, Cluster, ConvergenceVerdict, ProbeReport,
    ProbeStatus, ProbeTarget, VerdictStatus, Witness,
};
pub use spectral::{
    restricted_radius, spectral_radius, sup_en_norm, wikwi_panel, ConditionStatus, PanelCondition,
    ProbeSumOutcome, SpectralRadiusEstimate, SupEnDecision, SupEnReport, WikwiPanel,
};
