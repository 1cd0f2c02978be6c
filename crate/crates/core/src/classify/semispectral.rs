//! Atomic check of the semispectral-measure consequence: when ||X|| <= 1
//! and the E_n stay bounded, the semispectral measure of X restricted to
//! closure(ran |E|) puts no mass on the unit circle. For diagonal X this
//! means no atom of modulus 1 with a nonzero |E|-weight.

use crate::analysis::{sup_en_norm, OperatorRole, StructuralFacts, SupEnDecision};
use crate::boperator::BOperator;
use crate::classify::engine::decide_contraction;
use crate::classify::range::probed_atoms;
use crate::error::{CoreError, Result};
use crate::opcore::Index;

#[derive(Debug, Clone)]
pub struct SemispectralReport {
    /// Atoms of modulus 1 carrying |E|-weight; empty on pass.
    pub circle_atoms_on_h22: Vec<Index>,
    /// ker E / closure(ran |E|) split verified to reduce X on probes.
    pub split_verified: bool,
    pub pass: bool,
    /// Set when the premises were decided true by certificates that the
    /// atomic data contradicts.
    pub inconsistency: Option<String>,
    pub notes: Vec<String>,
}

pub fn verify_semispectral(
    t: &BOperator,
    facts: &StructuralFacts,
    probe_window: usize,
    tol: f64,
) -> Result<SemispectralReport> {
    facts.verify(t, 16, tol.max(1e-10))?;
    if !t.x().is_diagonal_on_probes(probe_window)? {
        return Err(CoreError::UnsupportedStructure(
            "semispectral check handles diagonal normal X".into(),
        ));
    }
    // Premises must be decided true before the conclusion is testable.
    let contraction = decide_contraction(t.x(), facts.certs(OperatorRole::X), probe_window)?;
    let sup_en = sup_en_norm(t, facts, 64)?;
    let sup_bounded = match &sup_en.decision {
        SupEnDecision::Bounded { reason, .. } => reason.clone(),
        SupEnDecision::Unbounded { reason } => {
            return Err(CoreError::PremisesUndecided(format!(
                "sup ||E_n|| decided unbounded ({reason}); the hypothesis fails"
            )));
        }
        SupEnDecision::Undecided => {
            return Err(CoreError::PremisesUndecided("sup ||E_n|| undecided".into()));
        }
    };
    match contraction.value {
        Some(true) => {}
        Some(false) => {
            return Err(CoreError::PremisesUndecided(format!(
                "||X|| <= 1 decided false ({})",
                contraction.detail
            )));
        }
        None => {
            return Err(CoreError::PremisesUndecided("||X|| <= 1 undecided".into()));
        }
    }

    // The split exists and reduces X; kernel_split verifies invariance.
    let split = t.kernel_split(probe_window as u32, tol)?;
    let split_verified = split.invariance_residual <= tol;

    let mut circle_atoms = Vec::new();
    for k in probed_atoms(t, probe_window) {
        let weight = t.gram_diagonal_entry(k)?;
        if weight <= 0.0 {
            continue;
        }
        let modulus = t.x().diagonal_entry(k)?.norm();
        if (modulus - 1.0).abs() <= 1e-12 {
            circle_atoms.push(k);
        }
    }

    let mut notes = vec![
        format!("sup ||E_n|| bounded: {sup_bounded}"),
        format!("||X|| <= 1: {}", contraction.detail),
        "the semispectral measure splits across ker E ⊕ closure(ran |E|)".to_string(),
    ];
    let inconsistency = if circle_atoms.is_empty() {
        None
    } else {
        // Bounded E_n force ||X^n f|| -> 0 on ran |E|; a circle atom with
        // |E|-weight makes the Gram series diverge instead.
        let msg = format!(
            "atoms {circle_atoms:?} have modulus 1 with nonzero |E|-weight, so the Gram \
             series diverges there; the certificates deciding the premises are inconsistent"
        );
        notes.push(msg.clone());
        Some(msg)
    };

    Ok(SemispectralReport {
        pass: circle_atoms.is_empty() && split_verified,
        circle_atoms_on_h22: circle_atoms,
        split_verified,
        inconsistency,
        notes,
    })
}
