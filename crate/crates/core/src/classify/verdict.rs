use std::fmt;

use crate::boperator::BlockVector;
use crate::error::Result;
use crate::opcore::{BandedOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremiseStatus {
    Holds,
    Fails,
    Undecided,
}

impl fmt::Display for PremiseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PremiseStatus::Holds => write!(f, "holds"),
            PremiseStatus::Fails => write!(f, "fails"),
            PremiseStatus::Undecided => write!(f, "undecided"),
        }
    }
}

/// One hypothesis of a characterization, with how it was decided.
#[derive(Debug, Clone)]
pub struct Premise {
    pub name: String,
    pub status: PremiseStatus,
    pub evidence: String,
}

impl Premise {
    pub fn new(
        name: impl Into<String>,
        status: PremiseStatus,
        evidence: impl Into<String>,
    ) -> Self {
        Premise {
            name: name.into(),
            status,
            evidence: evidence.into(),
        }
    }

    pub fn decided(&self) -> bool {
        self.status != PremiseStatus::Undecided
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conclusion {
    WotConvergent { weakly_stable: bool },
    NotWotConvergent,
    SotConvergent,
    NotSotConvergent,
    NeverStrongOrUniformStable,
    AdjointStronglyStable,
    NotAdjointStronglyStable,
    RangeClosed,
    RangeNotClosed,
    Undetermined,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::WotConvergent {
                weakly_stable: true,
            } => write!(f, "weakly-stable"),
            Conclusion::WotConvergent {
                weakly_stable: false,
            } => write!(f, "wot-convergent"),
            Conclusion::NotWotConvergent => write!(f, "not-wot-convergent"),
            Conclusion::SotConvergent => write!(f, "sot-convergent"),
            Conclusion::NotSotConvergent => write!(f, "not-sot-convergent"),
            Conclusion::NeverStrongOrUniformStable => write!(f, "never-strong-or-uniform-stable"),
            Conclusion::AdjointStronglyStable => write!(f, "adjoint-strongly-stable"),
            Conclusion::NotAdjointStronglyStable => write!(f, "not-adjoint-strongly-stable"),
            Conclusion::RangeClosed => write!(f, "range-closed"),
            Conclusion::RangeNotClosed => write!(f, "range-not-closed"),
            Conclusion::Undetermined => write!(f, "undetermined"),
        }
    }
}

/// Block-diagonal limit `[L₁ 0; 0 L₂]` of a convergent power sequence.
#[derive(Debug, Clone)]
pub struct BlockLimit {
    pub h1_block: BandedOperator,
    pub h2_block: BandedOperator,
}

impl BlockLimit {
    /// ⟨L f, g⟩ for the assembled limit.
    pub fn pair(&self, f: &BlockVector, g: &BlockVector) -> Result<C64> {
        let top = self.h1_block.apply(&f.top)?;
        let bottom = self.h2_block.apply(&f.bottom)?;
        Ok(top.inner(&g.top)? + bottom.inner(&g.bottom)?)
    }

    pub fn apply(&self, f: &BlockVector) -> Result<BlockVector> {
        Ok(BlockVector {
            top: self.h1_block.apply(&f.top)?,
            bottom: self.h2_block.apply(&f.bottom)?,
        })
    }
}

/// Classification outcome with its premise trace. A conclusion other than
/// `Undetermined` requires every premise it relies on to be decided.
#[derive(Debug, Clone)]
pub struct TheoremVerdict {
    pub rule: &'static str,
    pub conclusion: Conclusion,
    pub premises: Vec<Premise>,
    pub limit: Option<BlockLimit>,
    /// Statements of the mathematical facts the decision used.
    pub trace: Vec<String>,
}

impl TheoremVerdict {
    pub(crate) fn check_invariant(&self) -> bool {
        if self.conclusion == Conclusion::Undetermined {
            return true;
        }
        // A positive conclusion needs all premises decided; a negative one
        // needs at least one decided failing premise or is uncondition-free.
        match self.conclusion {
            Conclusion::NotWotConvergent
            | Conclusion::NotSotConvergent
            | Conclusion::NotAdjointStronglyStable => self
                .premises
                .iter()
                .any(|p| p.status == PremiseStatus::Fails),
            _ => self.premises.iter().all(|p| p.decided()),
        }
    }

    pub fn premise(&self, name: &str) -> Option<&Premise> {
        self.premises.iter().find(|p| p.name == name)
    }
}

impl fmt::Display for TheoremVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule {} -> {}", self.rule, self.conclusion)?;
        for p in &self.premises {
            writeln!(f, "  premise [{}] {}: {}", p.status, p.name, p.evidence)?;
        }
        for t in &self.trace {
            writeln!(f, "  using: {t}")?;
        }
        Ok(())
    }
}
