//! Structural certificates: machine-checkable structural facts about an
//! operator that finite numerics cannot decide on their own (spectral-radius
//! bounds, shift structure, analyticity, declared symbol ranges). Every
//! certificate has a spot-check that rejects claims inconsistent with probe
//! data.

use std::fmt;
use std::sync::Arc;

use crate::boperator::BOperator;
use crate::error::{CoreError, Result};
use crate::opcore::{BandedOperator, CoefFn, Index, SupportVector, C64};

/// Declared facts about a diagonal operator's symbol.
#[derive(Clone)]
pub struct SymbolInfo {
    pub symbol: CoefFn,
    /// sup |symbol| over the index set.
    pub sup_abs: f64,
    /// sup of the limit points of |symbol| (equals `sup_abs` for constant
    /// symbols; strictly relevant for declared continuum limits).
    pub sup_abs_limit: f64,
    /// inf of |symbol| over the indices where it does not vanish;
    /// 0 declares a non-closed range in the limit.
    pub inf_abs_nonzero: f64,
    /// Set when the symbol is a constant.
    pub constant: Option<C64>,
}

impl fmt::Debug for SymbolInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolInfo")
            .field("sup_abs", &self.sup_abs)
            .field("sup_abs_limit", &self.sup_abs_limit)
            .field("inf_abs_nonzero", &self.inf_abs_nonzero)
            .field("constant", &self.constant)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sided {
    One,
    Two,
}

/// Index track of a direct-sum part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Track {
    All,
    Residue { modulus: Index, residue: Index },
    Range { lo: Index, hi: Index },
}

impl Track {
    pub fn contains(&self, i: Index) -> bool {
        match *self {
            Track::All => true,
            Track::Residue { modulus, residue } => i.rem_euclid(modulus) == residue,
            Track::Range { lo, hi } => lo <= i && i <= hi,
        }
    }
}

/// Machine-checkable structural fact about an operator.
#[derive(Clone)]
pub enum StructuralCertificate {
    DiagonalSymbol(SymbolInfo),
    ShiftIsometry {
        sided: Sided,
    },
    DirectSum {
        parts: Vec<(Track, StructuralCertificate)>,
    },
    NormBound(f64),
    SpectralRadiusBound(f64),
    Normal,
    PowerBounded {
        bound: f64,
    },
    Analytic {
        justification: String,
    },
    Injective,
    Nilpotent {
        degree: u32,
    },
}

impl fmt::Debug for StructuralCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralCertificate::DiagonalSymbol(info) => {
                write!(f, "DiagonalSymbol({info:?})")
            }
            StructuralCertificate::ShiftIsometry { sided } => {
                write!(f, "ShiftIsometry({sided:?})")
            }
            StructuralCertificate::DirectSum { parts } => {
                write!(f, "DirectSum({} parts)", parts.len())
            }
            StructuralCertificate::NormBound(b) => write!(f, "NormBound({b})"),
            StructuralCertificate::SpectralRadiusBound(b) => {
                write!(f, "SpectralRadiusBound({b})")
            }
            StructuralCertificate::Normal => write!(f, "Normal"),
            StructuralCertificate::PowerBounded { bound } => write!(f, "PowerBounded({bound})"),
            StructuralCertificate::Analytic { justification } => {
                write!(f, "Analytic({justification})")
            }
            StructuralCertificate::Injective => write!(f, "Injective"),
            StructuralCertificate::Nilpotent { degree } => write!(f, "Nilpotent({degree})"),
        }
    }
}

impl StructuralCertificate {
    pub fn diagonal_constant(value: C64) -> Self {
        StructuralCertificate::DiagonalSymbol(SymbolInfo {
            symbol: Arc::new(move |_| value),
            sup_abs: value.norm(),
            sup_abs_limit: value.norm(),
            inf_abs_nonzero: value.norm(),
            constant: Some(value),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            StructuralCertificate::DiagonalSymbol(_) => "diagonal-symbol",
            StructuralCertificate::ShiftIsometry { .. } => "shift-isometry",
            StructuralCertificate::DirectSum { .. } => "direct-sum",
            StructuralCertificate::NormBound(_) => "norm-bound",
            StructuralCertificate::SpectralRadiusBound(_) => "spectral-radius-bound",
            StructuralCertificate::Normal => "normal",
            StructuralCertificate::PowerBounded { .. } => "power-bounded",
            StructuralCertificate::Analytic { .. } => "analytic",
            StructuralCertificate::Injective => "injective",
            StructuralCertificate::Nilpotent { .. } => "nilpotent",
        }
    }

    /// Tests the claim against probe data; inconsistent claims are rejected.
    pub fn spot_check(&self, op: &BandedOperator, horizon: u32, tol: f64) -> Result<()> {
        let count = horizon as usize + 1;
        let fail = |detail: String| {
            Err(CoreError::InconsistentCertificate {
                role: self.kind().to_string(),
                detail,
            })
        };
        match self {
            StructuralCertificate::DiagonalSymbol(info) => {
                if op.domain() != op.codomain() {
                    return fail("diagonal certificate on a non-square operator".into());
                }
                for k in op.domain().probe_indices(count) {
                    let probe = SupportVector::basis(op.domain(), k)?;
                    let image = op.apply(&probe)?;
                    for (j, _) in image.iter() {
                        if j != k {
                            return fail(format!("off-diagonal action at index {k}"));
                        }
                    }
                    let actual = image.get(k);
                    let claimed = (info.symbol)(k);
                    if (actual - claimed).norm() > tol {
                        return fail(format!("symbol mismatch at index {k}"));
                    }
                    let abs = actual.norm();
                    if abs > info.sup_abs + tol {
                        return fail(format!("|symbol({k})| = {abs} exceeds declared sup"));
                    }
                    if abs > tol && abs < info.inf_abs_nonzero - tol {
                        return fail(format!(
                            "|symbol({k})| = {abs} below declared nonzero infimum"
                        ));
                    }
                    if let Some(c) = info.constant {
                        if (actual - c).norm() > tol {
                            return fail(format!("symbol not constant at index {k}"));
                        }
                    }
                }
                Ok(())
            }
            StructuralCertificate::ShiftIsometry { sided } => {
                let adj = op.adjoint();
                for k in op.domain().probe_indices(count) {
                    let probe = SupportVector::basis(op.domain(), k)?;
                    let image = op.apply(&probe)?;
                    if (image.norm() - 1.0).abs() > tol {
                        return fail(format!("not isometric on e_{k}"));
                    }
                    match sided {
                        Sided::Two => {
                            // Unitary: V V* = I on probes.
                            let back = op.apply(&adj.apply(&probe)?)?;
                            if back.sub(&probe)?.norm() > tol {
                                return fail(format!("claimed two-sided but V V* e_{k} != e_{k}"));
                            }
                            // Shift structure: probe orbits never return.
                            let mut cur = probe.clone();
                            for n in 1..=count.min(24) {
                                cur = op.apply(&cur)?;
                                if cur.inner(&probe)?.norm() > tol {
                                    return fail(format!(
                                        "claimed shift structure but <V^{n} e_{k}, e_{k}> != 0"
                                    ));
                                }
                            }
                        }
                        Sided::One => {
                            // Completely non-unitary evidence: V*^n e_k must
                            // vanish for some probed n.
                            let mut cur = probe.clone();
                            let mut died = false;
                            for _ in 0..count {
                                cur = adj.apply(&cur)?;
                                if cur.is_zero() {
                                    died = true;
                                    break;
                                }
                            }
                            if !died {
                                return fail(format!(
                                    "claimed one-sided but V*^n e_{k} never vanishes on probes"
                                ));
                            }
                        }
                    }
                }
                Ok(())
            }
            StructuralCertificate::DirectSum { parts } => {
                // Tracks must be pairwise disjoint on probes, cover them, and
                // be invariant under the operator; each part certificate is
                // checked against the operator compressed to its track.
                for k in op.domain().probe_indices(count) {
                    let hits = parts.iter().filter(|(t, _)| t.contains(k)).count();
                    if hits != 1 {
                        return fail(format!("index {k} lies in {hits} tracks"));
                    }
                }
                for (track, part) in parts {
                    let restricted = restrict_to_track(op, *track);
                    // Invariance: op maps track probes into the track.
                    for k in op.domain().probe_indices(count) {
                        if !track.contains(k) {
                            continue;
                        }
                        let image = op.apply(&SupportVector::basis(op.domain(), k)?)?;
                        for (j, _) in image.iter() {
                            if !track.contains(j) {
                                return fail(format!(
                                    "track not invariant: e_{k} leaks to index {j}"
                                ));
                            }
                        }
                    }
                    check_on_track(part, &restricted, *track, horizon, tol)?;
                }
                Ok(())
            }
            StructuralCertificate::NormBound(bound) => {
                for k in op.domain().probe_indices(count) {
                    let image = op.apply(&SupportVector::basis(op.domain(), k)?)?;
                    if image.norm() > bound + tol {
                        return fail(format!("||op e_{k}|| = {} exceeds bound", image.norm()));
                    }
                }
                Ok(())
            }
            StructuralCertificate::SpectralRadiusBound(bound) => {
                // Weak consistency: growth of probe orbits stays compatible
                // with r <= bound over a short run.
                let steps = 24usize;
                for k in op.domain().probe_indices(4) {
                    let mut cur = SupportVector::basis(op.domain(), k)?;
                    for _ in 0..steps {
                        cur = match op.apply(&cur) {
                            Ok(v) => v,
                            Err(CoreError::IndexOverflow) => break,
                            Err(e) => return Err(e),
                        };
                    }
                    let growth = cur.norm().powf(1.0 / steps as f64);
                    if growth > bound * 1.5 + tol {
                        return fail(format!(
                            "probe growth rate {growth:.3} inconsistent with r <= {bound}"
                        ));
                    }
                }
                Ok(())
            }
            StructuralCertificate::Normal => {
                let adj = op.adjoint();
                for k in op.domain().probe_indices(count) {
                    let probe = SupportVector::basis(op.domain(), k)?;
                    let a = op.apply(&adj.apply(&probe)?)?;
                    let b = adj.apply(&op.apply(&probe)?)?;
                    if a.sub(&b)?.norm() > tol {
                        return fail(format!("commutator with adjoint nonzero on e_{k}"));
                    }
                }
                Ok(())
            }
            StructuralCertificate::PowerBounded { bound } => {
                for k in op.domain().probe_indices(6) {
                    let mut cur = SupportVector::basis(op.domain(), k)?;
                    for n in 1..=count {
                        cur = match op.apply(&cur) {
                            Ok(v) => v,
                            Err(CoreError::IndexOverflow) => break,
                            Err(e) => return Err(e),
                        };
                        if cur.norm() > bound + tol {
                            return fail(format!(
                                "||op^{n} e_{k}|| = {} exceeds power bound",
                                cur.norm()
                            ));
                        }
                    }
                }
                Ok(())
            }
            StructuralCertificate::Analytic { .. } => {
                // Analyticity is not finitely decidable; reject only the
                // refutable case of a diagonal with a nonzero entry, and
                // spot-check that probes escape ran(op^n).
                if op.is_diagonal_on_probes(count)? {
                    for k in op.domain().probe_indices(count) {
                        if op.diagonal_entry(k)?.norm() > tol {
                            return fail(format!(
                                "diagonal operator with nonzero entry at {k} is not analytic"
                            ));
                        }
                    }
                }
                Ok(())
            }
            StructuralCertificate::Injective => {
                for k in op.domain().probe_indices(count) {
                    let image = op.apply(&SupportVector::basis(op.domain(), k)?)?;
                    if image.is_zero() {
                        return fail(format!("op e_{k} = 0 contradicts injectivity"));
                    }
                }
                Ok(())
            }
            StructuralCertificate::Nilpotent { degree } => {
                for k in op.domain().probe_indices(count) {
                    let mut cur = SupportVector::basis(op.domain(), k)?;
                    for _ in 0..*degree {
                        cur = op.apply(&cur)?;
                    }
                    if !cur.is_zero() && cur.norm() > tol {
                        return fail(format!("op^{degree} e_{k} != 0"));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Compression `P op P` to a residue/range track, as a banded operator.
fn restrict_to_track(op: &BandedOperator, track: Track) -> BandedOperator {
    let indicator: CoefFn = Arc::new(move |i| {
        if track.contains(i) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let p = BandedOperator::diagonal(op.domain(), indicator);
    p.compose(op)
        .and_then(|m| m.compose(&p))
        .unwrap_or_else(|_| op.clone())
}

/// Check a part certificate against the compressed operator using only
/// probes inside its track.
fn check_on_track(
    cert: &StructuralCertificate,
    restricted: &BandedOperator,
    track: Track,
    horizon: u32,
    tol: f64,
) -> Result<()> {
    let count = horizon as usize + 1;
    let probes: Vec<Index> = restricted
        .domain()
        .probe_indices(count * 4)
        .into_iter()
        .filter(|&k| track.contains(k))
        .take(count)
        .collect();
    match cert {
        StructuralCertificate::DiagonalSymbol(info) => {
            for &k in &probes {
                let image = restricted.apply(&SupportVector::basis(restricted.domain(), k)?)?;
                for (j, _) in image.iter() {
                    if j != k {
                        return Err(CoreError::InconsistentCertificate {
                            role: "direct-sum".into(),
                            detail: format!("part not diagonal at index {k}"),
                        });
                    }
                }
                if (image.get(k) - (info.symbol)(k)).norm() > tol {
                    return Err(CoreError::InconsistentCertificate {
                        role: "direct-sum".into(),
                        detail: format!("part symbol mismatch at index {k}"),
                    });
                }
            }
            Ok(())
        }
        StructuralCertificate::ShiftIsometry { sided } => {
            let adj = restricted.adjoint();
            for &k in &probes {
                let probe = SupportVector::basis(restricted.domain(), k)?;
                let image = restricted.apply(&probe)?;
                if (image.norm() - 1.0).abs() > tol {
                    return Err(CoreError::InconsistentCertificate {
                        role: "direct-sum".into(),
                        detail: format!("part not isometric on e_{k}"),
                    });
                }
                if *sided == Sided::One {
                    let mut cur = probe;
                    let mut died = false;
                    for _ in 0..count {
                        cur = adj.apply(&cur)?;
                        if cur.is_zero() {
                            died = true;
                            break;
                        }
                    }
                    if !died {
                        return Err(CoreError::InconsistentCertificate {
                            role: "direct-sum".into(),
                            detail: format!("part not completely non-unitary near e_{k}"),
                        });
                    }
                }
            }
            Ok(())
        }
        other => other.spot_check(restricted, horizon, tol),
    }
}

/// Which block of the triple (or derived modulus) a certificate describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OperatorRole {
    V,
    E,
    X,
    /// |E| = sqrt(E*E); certificates here describe its diagonal symbol.
    ModulusE,
    /// |X| = sqrt(X*X); certificates here describe its diagonal symbol.
    ModulusX,
}

impl fmt::Display for OperatorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorRole::V => write!(f, "V"),
            OperatorRole::E => write!(f, "E"),
            OperatorRole::X => write!(f, "X"),
            OperatorRole::ModulusE => write!(f, "|E|"),
            OperatorRole::ModulusX => write!(f, "|X|"),
        }
    }
}

/// Certificates per operator role.
#[derive(Debug, Clone, Default)]
pub struct StructuralFacts {
    v: Vec<StructuralCertificate>,
    e: Vec<StructuralCertificate>,
    x: Vec<StructuralCertificate>,
    modulus_e: Vec<StructuralCertificate>,
    modulus_x: Vec<StructuralCertificate>,
}

impl StructuralFacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, role: OperatorRole, cert: StructuralCertificate) -> Self {
        self.push(role, cert);
        self
    }

    pub fn push(&mut self, role: OperatorRole, cert: StructuralCertificate) {
        match role {
            OperatorRole::V => self.v.push(cert),
            OperatorRole::E => self.e.push(cert),
            OperatorRole::X => self.x.push(cert),
            OperatorRole::ModulusE => self.modulus_e.push(cert),
            OperatorRole::ModulusX => self.modulus_x.push(cert),
        }
    }

    pub fn certs(&self, role: OperatorRole) -> &[StructuralCertificate] {
        match role {
            OperatorRole::V => &self.v,
            OperatorRole::E => &self.e,
            OperatorRole::X => &self.x,
            OperatorRole::ModulusE => &self.modulus_e,
            OperatorRole::ModulusX => &self.modulus_x,
        }
    }

    /// Spot-checks every certificate against its operator. Modulus
    /// certificates are checked against the Gram diagonal of their block:
    /// symbol(k)² must match ||E e_k||² resp. ||X e_k||².
    pub fn verify(&self, t: &BOperator, horizon: u32, tol: f64) -> Result<()> {
        for (role, op) in [
            (OperatorRole::V, t.v()),
            (OperatorRole::E, t.e()),
            (OperatorRole::X, t.x()),
        ] {
            for cert in self.certs(role) {
                cert.spot_check(op, horizon, tol).map_err(|err| match err {
                    CoreError::InconsistentCertificate { detail, .. } => {
                        CoreError::InconsistentCertificate {
                            role: role.to_string(),
                            detail,
                        }
                    }
                    other => other,
                })?;
            }
        }
        for (role, op) in [
            (OperatorRole::ModulusE, t.e()),
            (OperatorRole::ModulusX, t.x()),
        ] {
            for cert in self.certs(role) {
                let StructuralCertificate::DiagonalSymbol(info) = cert else {
                    return Err(CoreError::InconsistentCertificate {
                        role: role.to_string(),
                        detail: "modulus roles take diagonal-symbol certificates only".into(),
                    });
                };
                let gram = op.adjoint().compose(op)?;
                if !gram.is_diagonal_on_probes(horizon as usize + 1)? {
                    return Err(CoreError::InconsistentCertificate {
                        role: role.to_string(),
                        detail: "Gram operator is not diagonal on probes".into(),
                    });
                }
                for k in op.domain().probe_indices(horizon as usize + 1) {
                    let actual = gram.diagonal_entry(k)?.re;
                    let claimed = (info.symbol)(k).norm().powi(2);
                    if (actual - claimed).abs() > tol {
                        return Err(CoreError::InconsistentCertificate {
                            role: role.to_string(),
                            detail: format!("modulus symbol mismatch at index {k}"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn norm_bound(&self, role: OperatorRole) -> Option<f64> {
        self.certs(role).iter().find_map(|c| match c {
            StructuralCertificate::NormBound(b) => Some(*b),
            _ => None,
        })
    }

    pub fn spectral_radius_bound(&self, role: OperatorRole) -> Option<f64> {
        self.certs(role).iter().find_map(|c| match c {
            StructuralCertificate::SpectralRadiusBound(b) => Some(*b),
            _ => None,
        })
    }

    pub fn symbol_info(&self, role: OperatorRole) -> Option<&SymbolInfo> {
        self.certs(role).iter().find_map(|c| match c {
            StructuralCertificate::DiagonalSymbol(info) => Some(info),
            _ => None,
        })
    }

    pub fn shift_isometry(&self, role: OperatorRole) -> Option<Sided> {
        self.certs(role).iter().find_map(|c| match c {
            StructuralCertificate::ShiftIsometry { sided } => Some(*sided),
            _ => None,
        })
    }

    pub fn direct_sum(&self, role: OperatorRole) -> Option<&[(Track, StructuralCertificate)]> {
        self.certs(role).iter().find_map(|c| match c {
            StructuralCertificate::DirectSum { parts } => Some(parts.as_slice()),
            _ => None,
        })
    }

    pub fn has(&self, role: OperatorRole, kind: &str) -> bool {
        self.certs(role).iter().any(|c| c.kind() == kind)
    }

    pub fn power_bound(&self, role: OperatorRole) -> Option<f64> {
        self.certs(role).iter().find_map(|c| match c {
            StructuralCertificate::PowerBounded { bound } => Some(*bound),
            _ => None,
        })
    }

    pub fn nilpotent_degree(&self, role: OperatorRole) -> Option<u32> {
        self.certs(role).iter().find_map(|c| match c {
            StructuralCertificate::Nilpotent { degree } => Some(*degree),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::IndexSet;

    #[test]
    fn shift_isometry_one_sided_accepts_the_shift() {
        let s = BandedOperator::shift(IndexSet::HalfLine, 1);
        let cert = StructuralCertificate::ShiftIsometry { sided: Sided::One };
        assert!(cert.spot_check(&s, 16, 1e-10).is_ok());
    }

    #[test]
    fn shift_isometry_two_sided_rejects_the_unilateral_shift() {
        let s = BandedOperator::shift(IndexSet::HalfLine, 1);
        let cert = StructuralCertificate::ShiftIsometry { sided: Sided::Two };
        assert!(cert.spot_check(&s, 16, 1e-10).is_err());
    }

    #[test]
    fn two_sided_accepts_the_bilateral_shift() {
        let u = BandedOperator::shift(IndexSet::FullLine, 1);
        let cert = StructuralCertificate::ShiftIsometry { sided: Sided::Two };
        assert!(cert.spot_check(&u, 16, 1e-10).is_ok());
        // And the bilateral shift is not completely non-unitary.
        let cert = StructuralCertificate::ShiftIsometry { sided: Sided::One };
        assert!(cert.spot_check(&u, 16, 1e-10).is_err());
    }

    #[test]
    fn diagonal_certificate_rejects_wrong_sup() {
        let d = BandedOperator::diagonal(IndexSet::HalfLine, Arc::new(|_| C64::new(0.9, 0.0)));
        let claim = StructuralCertificate::DiagonalSymbol(SymbolInfo {
            symbol: Arc::new(|_| C64::new(0.9, 0.0)),
            sup_abs: 0.5,
            sup_abs_limit: 0.5,
            inf_abs_nonzero: 0.5,
            constant: None,
        });
        assert!(claim.spot_check(&d, 16, 1e-10).is_err());
    }

    #[test]
    fn analytic_rejects_nonzero_diagonal() {
        let d = BandedOperator::diagonal(IndexSet::HalfLine, Arc::new(|_| C64::new(0.5, 0.0)));
        let cert = StructuralCertificate::Analytic {
            justification: "wrong".into(),
        };
        assert!(cert.spot_check(&d, 16, 1e-10).is_err());
        let s = BandedOperator::shift(IndexSet::HalfLine, 1).scale(C64::new(0.5, 0.0));
        let cert = StructuralCertificate::Analytic {
            justification: "scaled shift".into(),
        };
        assert!(cert.spot_check(&s, 16, 1e-10).is_ok());
    }

    #[test]
    fn norm_bound_rejected_when_violated() {
        let s = BandedOperator::shift(IndexSet::HalfLine, 1).scale(C64::new(2.0, 0.0));
        assert!(StructuralCertificate::NormBound(1.0)
            .spot_check(&s, 8, 1e-10)
            .is_err());
        assert!(StructuralCertificate::NormBound(2.0)
            .spot_check(&s, 8, 1e-10)
            .is_ok());
    }

    #[test]
    fn nilpotent_certificate() {
        // e_{k} -> e_{k-1} on a finite interval is nilpotent.
        let set = IndexSet::finite(0, 3).unwrap();
        let down = BandedOperator::shift(set, -1);
        assert!(StructuralCertificate::Nilpotent { degree: 4 }
            .spot_check(&down, 8, 1e-12)
            .is_ok());
        assert!(StructuralCertificate::Nilpotent { degree: 2 }
            .spot_check(&down, 8, 1e-12)
            .is_err());
    }

    #[test]
    fn direct_sum_parity_tracks() {
        // Even indices: doubled shift acting as e_{2m} -> e_{2m+2};
        // odd indices: constant unimodular diagonal.
        let set = IndexSet::HalfLine;
        let even_shift = BandedOperator::embed(
            set,
            set,
            1,
            2,
            Arc::new(|i| {
                if i % 2 == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        )
        .unwrap();
        let odd_diag = BandedOperator::diagonal(
            set,
            Arc::new(|i| {
                if i % 2 == 1 {
                    C64::new(-1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        );
        let v = even_shift.add(&odd_diag).unwrap();
        let cert = StructuralCertificate::DirectSum {
            parts: vec![
                (
                    Track::Residue {
                        modulus: 2,
                        residue: 0,
                    },
                    StructuralCertificate::ShiftIsometry { sided: Sided::One },
                ),
                (
                    Track::Residue {
                        modulus: 2,
                        residue: 1,
                    },
                    StructuralCertificate::DiagonalSymbol(SymbolInfo {
                        symbol: Arc::new(|_| C64::new(-1.0, 0.0)),
                        sup_abs: 1.0,
                        sup_abs_limit: 1.0,
                        inf_abs_nonzero: 1.0,
                        constant: None,
                    }),
                ),
            ],
        };
        assert!(cert.spot_check(&v, 12, 1e-10).is_ok());
    }
}
