//! Shared decision machinery: exhaustive structural analysis where index
//! sets are finite or symbols are certified, probe refutations elsewhere.
//! Only decided facts feed conclusions; probes alone never do.

use std::sync::Arc;

use crate::analysis::{OperatorRole, Sided, StructuralCertificate, StructuralFacts};
use crate::boperator::{BOperator, SubspaceDesc};
use crate::error::Result;
use crate::opcore::{BandedOperator, DenseMatrix, Index, SupportVector, C64};

pub(crate) const FIXED_POINT_TOL: f64 = 1e-12;
pub(crate) const DECAY_MARGIN: f64 = 1e-12;

/// Three-valued decision with a human-readable justification.
#[derive(Debug, Clone)]
pub(crate) struct Decision {
    pub value: Option<bool>,
    pub detail: String,
}

impl Decision {
    pub fn yes(detail: impl Into<String>) -> Self {
        Decision {
            value: Some(true),
            detail: detail.into(),
        }
    }
    pub fn no(detail: impl Into<String>) -> Self {
        Decision {
            value: Some(false),
            detail: detail.into(),
        }
    }
    pub fn unknown(detail: impl Into<String>) -> Self {
        Decision {
            value: None,
            detail: detail.into(),
        }
    }
}

/// Power-sequence analysis of one block operator.
#[derive(Debug, Clone)]
pub(crate) struct PowerLimitAnalysis {
    pub convergent: Option<bool>,
    pub limit: Option<BandedOperator>,
    pub limit_is_zero: Option<bool>,
    pub detail: String,
}

fn classify_value(v: C64) -> ValueKind {
    if (v - C64::new(1.0, 0.0)).norm() <= FIXED_POINT_TOL {
        ValueKind::Fixed
    } else if v.norm() < 1.0 - DECAY_MARGIN {
        ValueKind::Decaying
    } else {
        ValueKind::Obstructs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueKind {
    Fixed,
    Decaying,
    Obstructs,
}

/// Decides WOT/SOT convergence of `{op^n}` for diagonal, certified, shift
/// or small dense operators; for diagonal operators the two topologies
/// agree, and the limit is the indicator of the fixed part.
pub(crate) fn analyze_power_convergence(
    op: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<PowerLimitAnalysis> {
    let set = op.domain();
    if op.is_diagonal_on_probes(probe_window)? {
        if let Some(dim) = set.dim() {
            let mut has_fixed = false;
            for k in set.probe_indices(dim) {
                match classify_value(op.diagonal_entry(k)?) {
                    ValueKind::Obstructs => {
                        return Ok(PowerLimitAnalysis {
                            convergent: Some(false),
                            limit: None,
                            limit_is_zero: None,
                            detail: format!(
                                "diagonal entry at {k} lies on or outside the unit circle away from 1"
                            ),
                        });
                    }
                    ValueKind::Fixed => has_fixed = true,
                    ValueKind::Decaying => {}
                }
            }
            return Ok(PowerLimitAnalysis {
                convergent: Some(true),
                limit: Some(fixed_indicator(op)),
                limit_is_zero: Some(!has_fixed),
                detail: "diagonal symbol enumerated: every entry decays or equals 1".into(),
            });
        }
        // Infinite diagonal: decide from the certificate, refute from probes.
        for k in set.probe_indices(probe_window) {
            if classify_value(op.diagonal_entry(k)?) == ValueKind::Obstructs {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(false),
                    limit: None,
                    limit_is_zero: None,
                    detail: format!("probed diagonal entry at {k} obstructs convergence"),
                });
            }
        }
        if let Some(info) = certs.iter().find_map(|c| match c {
            StructuralCertificate::DiagonalSymbol(i) => Some(i),
            _ => None,
        }) {
            if let Some(c) = info.constant {
                return Ok(match classify_value(c) {
                    ValueKind::Fixed => PowerLimitAnalysis {
                        convergent: Some(true),
                        limit: Some(BandedOperator::identity(set)),
                        limit_is_zero: Some(false),
                        detail: "constant symbol 1: identity".into(),
                    },
                    ValueKind::Decaying => PowerLimitAnalysis {
                        convergent: Some(true),
                        limit: Some(BandedOperator::zero(set, set)),
                        limit_is_zero: Some(true),
                        detail: "constant symbol strictly inside the unit disk".into(),
                    },
                    ValueKind::Obstructs => PowerLimitAnalysis {
                        convergent: Some(false),
                        limit: None,
                        limit_is_zero: None,
                        detail: "constant unimodular symbol distinct from 1".into(),
                    },
                });
            }
            if info.sup_abs < 1.0 - DECAY_MARGIN {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(true),
                    limit: Some(BandedOperator::zero(set, set)),
                    limit_is_zero: Some(true),
                    detail: format!("declared sup |symbol| = {} < 1", info.sup_abs),
                });
            }
        }
        return Ok(PowerLimitAnalysis {
            convergent: None,
            limit: None,
            limit_is_zero: None,
            detail: "infinite diagonal without a deciding certificate".into(),
        });
    }

    if let Some(sided) = certs.iter().find_map(|c| match c {
        StructuralCertificate::ShiftIsometry { sided } => Some(*sided),
        _ => None,
    }) {
        let detail = match sided {
            Sided::One => {
                "completely non-unitary isometry: weakly stable by the Wold decomposition"
            }
            Sided::Two => "two-sided shift: weakly stable by the Riemann-Lebesgue lemma",
        };
        return Ok(PowerLimitAnalysis {
            convergent: Some(true),
            limit: Some(BandedOperator::zero(set, set)),
            limit_is_zero: Some(true),
            detail: detail.into(),
        });
    }

    for cert in certs {
        match cert {
            StructuralCertificate::SpectralRadiusBound(b) if *b < 1.0 - DECAY_MARGIN => {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(true),
                    limit: Some(BandedOperator::zero(set, set)),
                    limit_is_zero: Some(true),
                    detail: format!("spectral radius bound {b} < 1: uniform decay"),
                });
            }
            StructuralCertificate::NormBound(b) if *b < 1.0 - DECAY_MARGIN => {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(true),
                    limit: Some(BandedOperator::zero(set, set)),
                    limit_is_zero: Some(true),
                    detail: format!("norm bound {b} < 1: uniform decay"),
                });
            }
            StructuralCertificate::Nilpotent { degree } => {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(true),
                    limit: Some(BandedOperator::zero(set, set)),
                    limit_is_zero: Some(true),
                    detail: format!("nilpotent of degree {degree}: powers vanish"),
                });
            }
            _ => {}
        }
    }

    if let Some(dim) = set.dim() {
        if dim <= 48 {
            let dense = op.to_dense()?;
            return analyze_dense_powers(&dense, set);
        }
    }

    Ok(PowerLimitAnalysis {
        convergent: None,
        limit: None,
        limit_is_zero: None,
        detail: "no deciding structure or certificate".into(),
    })
}

fn analyze_dense_powers(
    dense: &DenseMatrix,
    set: crate::opcore::IndexSet,
) -> Result<PowerLimitAnalysis> {
    let eigs = dense.eigenvalues()?;
    let r = eigs.first().map(|v| v.norm()).unwrap_or(0.0);
    if r <= 1.0 - 1e-9 {
        return Ok(PowerLimitAnalysis {
            convergent: Some(true),
            limit: Some(BandedOperator::zero(set, set)),
            limit_is_zero: Some(true),
            detail: format!("all eigenvalues inside the disk (r = {r:.6})"),
        });
    }
    if eigs.iter().any(|l| l.norm() > 1.0 + 1e-9) {
        return Ok(PowerLimitAnalysis {
            convergent: Some(false),
            limit: None,
            limit_is_zero: None,
            detail: format!("eigenvalue of modulus {r:.6} > 1"),
        });
    }
    // Boundary eigenvalues: for normal operators the powers converge iff
    // every boundary eigenvalue equals 1; the limit is the orthogonal
    // projection onto ker(op - I).
    let n = dense.rows();
    let commutator = dense
        .mul(&dense.dagger())?
        .sub(&dense.dagger().mul(dense)?)?
        .max_abs();
    if commutator <= 1e-10 {
        for l in &eigs {
            if l.norm() > 1.0 - 1e-9 && (l - C64::new(1.0, 0.0)).norm() > 1e-9 {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(false),
                    limit: None,
                    limit_is_zero: None,
                    detail: format!("unimodular eigenvalue {l} distinct from 1"),
                });
            }
        }
        // Projector onto ker(op - I) via the Gram route.
        let shifted = dense.sub(&DenseMatrix::identity(n))?;
        let gram = shifted.dagger().mul(&shifted)?;
        let (vals, q) = gram.hermitian_eigen()?;
        let top = vals.first().copied().unwrap_or(0.0).max(1.0);
        let mut proj = DenseMatrix::zeros(n, n);
        let mut zero_dim = 0usize;
        for (c, &lam) in vals.iter().enumerate() {
            if lam <= 1e-18 * top.max(1.0) + 1e-18 {
                zero_dim += 1;
                for i in 0..n {
                    for j in 0..n {
                        let v = proj.get(i, j) + q.get(i, c) * q.get(j, c).conj();
                        proj.set(i, j, v);
                    }
                }
            }
        }
        let limit_op = BandedOperator::dense(set, set, &proj)?;
        return Ok(PowerLimitAnalysis {
            convergent: Some(true),
            limit: Some(limit_op),
            limit_is_zero: Some(zero_dim == 0),
            detail: "normal block: boundary spectrum is {1}; limit projects onto its eigenspace"
                .into(),
        });
    }
    Ok(PowerLimitAnalysis {
        convergent: None,
        limit: None,
        limit_is_zero: None,
        detail: "non-normal block with boundary spectrum: undecided".into(),
    })
}

/// Indicator of the fixed part {k : symbol(k) = 1} as a diagonal operator.
fn fixed_indicator(op: &BandedOperator) -> BandedOperator {
    let probe = op.clone();
    BandedOperator::diagonal(
        op.domain(),
        Arc::new(move |k| match probe.diagonal_entry(k) {
            Ok(v) if classify_value(v) == ValueKind::Fixed => C64::new(1.0, 0.0),
            _ => C64::new(0.0, 0.0),
        }),
    )
}

/// Analysis of the Wold structure of the isometry V.
#[derive(Debug, Clone)]
pub(crate) struct UnitaryPartAnalysis {
    pub u_convergent: Option<bool>,
    /// P ⊕ 0 on H₁, defined when convergent.
    pub p_block: Option<BandedOperator>,
    pub p_is_zero: Option<bool>,
    pub completely_non_unitary: Option<bool>,
    pub detail: String,
}

fn undecided_unitary(detail: impl Into<String>) -> UnitaryPartAnalysis {
    UnitaryPartAnalysis {
        u_convergent: None,
        p_block: None,
        p_is_zero: None,
        completely_non_unitary: None,
        detail: detail.into(),
    }
}

pub(crate) fn analyze_unitary_part(
    v: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<UnitaryPartAnalysis> {
    let h1 = v.domain();
    if let Some(sided) = certs.iter().find_map(|c| match c {
        StructuralCertificate::ShiftIsometry { sided } => Some(*sided),
        _ => None,
    }) {
        return Ok(match sided {
            Sided::One => UnitaryPartAnalysis {
                u_convergent: Some(true),
                p_block: Some(BandedOperator::zero(h1, h1)),
                p_is_zero: Some(true),
                completely_non_unitary: Some(true),
                detail: "V completely non-unitary: trivial unitary part".into(),
            },
            Sided::Two => UnitaryPartAnalysis {
                u_convergent: Some(true),
                p_block: Some(BandedOperator::zero(h1, h1)),
                p_is_zero: Some(true),
                completely_non_unitary: Some(false),
                detail: "V a two-sided shift: weakly stable unitary".into(),
            },
        });
    }
    if v.is_diagonal_on_probes(probe_window)? {
        // A diagonal isometry is a diagonal unitary, so U = V.
        let powers = analyze_power_convergence(v, certs, probe_window)?;
        return Ok(UnitaryPartAnalysis {
            u_convergent: powers.convergent,
            p_is_zero: powers.limit_is_zero,
            p_block: powers.limit,
            completely_non_unitary: Some(false),
            detail: format!("diagonal unitary V: {}", powers.detail),
        });
    }
    if let Some(parts) = certs.iter().find_map(|c| match c {
        StructuralCertificate::DirectSum { parts } => Some(parts),
        _ => None,
    }) {
        let mut all_cnu = true;
        let mut convergent = Some(true);
        let mut p_is_zero = Some(true);
        let mut indicators: Vec<(
            crate::analysis::Track,
            Arc<dyn Fn(Index) -> bool + Send + Sync>,
        )> = Vec::new();
        for (track, part) in parts {
            match part {
                StructuralCertificate::ShiftIsometry { sided } => {
                    if *sided == Sided::Two {
                        all_cnu = false;
                    }
                }
                StructuralCertificate::DiagonalSymbol(info) => {
                    all_cnu = false;
                    // Unitary diagonal part: convergent iff its symbol is 1.
                    if let Some(c) = info.constant {
                        match classify_value(c) {
                            ValueKind::Fixed => {
                                p_is_zero = Some(false);
                                let t = *track;
                                indicators.push((t, Arc::new(move |k| t.contains(k))));
                            }
                            _ => {
                                convergent = Some(false);
                            }
                        }
                    } else {
                        // Probe for refutation; otherwise undecided.
                        let symbol = info.symbol.clone();
                        let mut refuted = false;
                        for k in h1.probe_indices(probe_window) {
                            if track.contains(k) && classify_value(symbol(k)) != ValueKind::Fixed {
                                refuted = true;
                                break;
                            }
                        }
                        if refuted {
                            convergent = Some(false);
                        } else if h1.is_finite() {
                            p_is_zero = Some(false);
                            let t = *track;
                            let symbol = info.symbol.clone();
                            indicators.push((
                                t,
                                Arc::new(move |k| {
                                    t.contains(k) && classify_value(symbol(k)) == ValueKind::Fixed
                                }),
                            ));
                        } else {
                            return Ok(undecided_unitary(
                                "direct-sum diagonal part on an infinite track without constant",
                            ));
                        }
                    }
                }
                _ => {
                    return Ok(undecided_unitary(
                        "direct-sum part certificate not decisive",
                    ));
                }
            }
        }
        if convergent == Some(false) {
            return Ok(UnitaryPartAnalysis {
                u_convergent: Some(false),
                p_block: None,
                p_is_zero: None,
                completely_non_unitary: Some(all_cnu),
                detail: "a unitary summand has spectrum away from 1".into(),
            });
        }
        let p_block = if indicators.is_empty() {
            BandedOperator::zero(h1, h1)
        } else {
            BandedOperator::diagonal(
                h1,
                Arc::new(move |k| {
                    if indicators.iter().any(|(_, pred)| pred(k)) {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }),
            )
        };
        return Ok(UnitaryPartAnalysis {
            u_convergent: Some(true),
            p_is_zero,
            p_block: Some(p_block),
            completely_non_unitary: Some(all_cnu),
            detail: "direct-sum structure combined per track".into(),
        });
    }
    if let Some(dim) = h1.dim() {
        // A validated finite isometry is unitary; its powers converge iff
        // it is the identity.
        let dense = v.to_dense()?;
        let dev = dense.sub(&DenseMatrix::identity(dim))?.max_abs();
        if dev <= FIXED_POINT_TOL {
            return Ok(UnitaryPartAnalysis {
                u_convergent: Some(true),
                p_block: Some(BandedOperator::identity(h1)),
                p_is_zero: Some(false),
                completely_non_unitary: Some(false),
                detail: "finite V equals the identity".into(),
            });
        }
        return Ok(UnitaryPartAnalysis {
            u_convergent: Some(false),
            p_block: None,
            p_is_zero: None,
            completely_non_unitary: Some(false),
            detail: format!("finite unitary V differs from the identity by {dev:.3e}"),
        });
    }
    Ok(undecided_unitary(
        "no certificate describes the Wold structure of V",
    ))
}

/// Exact decision of V = I where possible.
pub(crate) fn decide_identity(op: &BandedOperator, probe_window: usize) -> Result<Decision> {
    let set = op.domain();
    for k in set.probe_indices(probe_window.max(set.dim().unwrap_or(0))) {
        let probe = SupportVector::basis(set, k)?;
        let image = op.apply(&probe)?;
        if image.sub(&probe)?.norm() > FIXED_POINT_TOL {
            return Ok(Decision::no(format!("op e_{k} != e_{k}")));
        }
    }
    if set.is_finite() {
        return Ok(Decision::yes("all basis vectors fixed (finite space)"));
    }
    Ok(Decision::unknown(
        "all probes fixed; infinite space needs a constant certificate",
    ))
}

pub(crate) fn decide_identity_with_certs(
    op: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<Decision> {
    let base = decide_identity(op, probe_window)?;
    if base.value.is_some() {
        return Ok(base);
    }
    for cert in certs {
        if let StructuralCertificate::DiagonalSymbol(info) = cert {
            if let Some(c) = info.constant {
                if (c - C64::new(1.0, 0.0)).norm() <= FIXED_POINT_TOL {
                    return Ok(Decision::yes("constant diagonal symbol 1"));
                }
                return Ok(Decision::no("constant diagonal symbol differs from 1"));
            }
        }
    }
    Ok(base)
}

/// Exact decision of E = 0 where possible.
pub(crate) fn decide_zero(
    op: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<Decision> {
    let set = op.domain();
    for k in set.probe_indices(probe_window.max(set.dim().unwrap_or(0))) {
        let image = op.apply(&SupportVector::basis(set, k)?)?;
        if !image.is_zero() && image.norm() > 0.0 {
            return Ok(Decision::no(format!("op e_{k} != 0")));
        }
    }
    if set.is_finite() {
        return Ok(Decision::yes("all basis images vanish (finite domain)"));
    }
    if certs
        .iter()
        .any(|c| matches!(c, StructuralCertificate::NormBound(b) if *b == 0.0))
    {
        return Ok(Decision::yes("norm bound 0"));
    }
    Ok(Decision::unknown(
        "probes vanish; infinite domain needs a norm-0 certificate",
    ))
}

/// Decision of ||op|| <= 1.
pub(crate) fn decide_contraction(
    op: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<Decision> {
    if op.is_diagonal_on_probes(probe_window)? {
        if let Some(dim) = op.domain().dim() {
            let mut sup: f64 = 0.0;
            for k in op.domain().probe_indices(dim) {
                sup = sup.max(op.diagonal_entry(k)?.norm());
            }
            return Ok(if sup <= 1.0 + FIXED_POINT_TOL {
                Decision::yes(format!("diagonal sup |symbol| = {sup:.6} <= 1"))
            } else {
                Decision::no(format!("diagonal sup |symbol| = {sup:.6} > 1"))
            });
        }
        for k in op.domain().probe_indices(probe_window) {
            if op.diagonal_entry(k)?.norm() > 1.0 + FIXED_POINT_TOL {
                return Ok(Decision::no(format!("probed |symbol({k})| > 1")));
            }
        }
        if let Some(info) = certs.iter().find_map(|c| match c {
            StructuralCertificate::DiagonalSymbol(i) => Some(i),
            _ => None,
        }) {
            return Ok(if info.sup_abs <= 1.0 + FIXED_POINT_TOL {
                Decision::yes(format!("declared sup |symbol| = {}", info.sup_abs))
            } else {
                Decision::no(format!("declared sup |symbol| = {}", info.sup_abs))
            });
        }
        return Ok(Decision::unknown(
            "infinite diagonal without a sup certificate",
        ));
    }
    for cert in certs {
        match cert {
            StructuralCertificate::NormBound(b) if *b <= 1.0 + FIXED_POINT_TOL => {
                return Ok(Decision::yes(format!("norm bound {b}")));
            }
            StructuralCertificate::ShiftIsometry { .. } => {
                return Ok(Decision::yes("isometry: norm 1"));
            }
            _ => {}
        }
    }
    if let Some(dim) = op.domain().dim() {
        if dim <= 64 {
            let norm = op.to_dense()?.op_norm()?;
            return Ok(if norm <= 1.0 + 1e-10 {
                Decision::yes(format!("dense operator norm {norm:.9}"))
            } else {
                Decision::no(format!("dense operator norm {norm:.9}"))
            });
        }
    }
    Ok(Decision::unknown("no norm information"))
}

/// Decision of power boundedness of op.
pub(crate) fn decide_power_bounded(
    op: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<Decision> {
    for cert in certs {
        match cert {
            StructuralCertificate::PowerBounded { bound } => {
                return Ok(Decision::yes(format!("certified power bound {bound}")));
            }
            StructuralCertificate::ShiftIsometry { .. } => {
                return Ok(Decision::yes("isometry powers have norm 1"));
            }
            StructuralCertificate::NormBound(b) if *b <= 1.0 + FIXED_POINT_TOL => {
                return Ok(Decision::yes(format!("contraction: norm bound {b}")));
            }
            StructuralCertificate::SpectralRadiusBound(b) if *b < 1.0 - DECAY_MARGIN => {
                return Ok(Decision::yes(format!("spectral radius bound {b} < 1")));
            }
            _ => {}
        }
    }
    if op.is_diagonal_on_probes(probe_window)? {
        let con = decide_contraction(op, certs, probe_window)?;
        // For diagonal operators power boundedness is equivalent to being
        // a contraction.
        return Ok(Decision {
            value: con.value,
            detail: con.detail,
        });
    }
    if let Some(dim) = op.domain().dim() {
        if dim <= 48 {
            let dense = op.to_dense()?;
            let r = dense
                .eigenvalues()?
                .first()
                .map(|v| v.norm())
                .unwrap_or(0.0);
            if r > 1.0 + 1e-9 {
                return Ok(Decision::no(format!("spectral radius {r:.6} > 1")));
            }
            if r <= 1.0 - 1e-9 {
                return Ok(Decision::yes(format!("spectral radius {r:.6} < 1")));
            }
            let norm = dense.op_norm()?;
            if norm <= 1.0 + 1e-10 {
                return Ok(Decision::yes(format!("contraction: norm {norm:.9}")));
            }
            let commutator = dense
                .mul(&dense.dagger())?
                .sub(&dense.dagger().mul(&dense)?)?
                .max_abs();
            if commutator <= 1e-10 {
                return Ok(Decision::no(format!(
                    "normal block with norm {norm:.6} > 1 is not power bounded"
                )));
            }
            return Ok(Decision::unknown("boundary spectral radius, non-normal"));
        }
    }
    Ok(Decision::unknown("no power-boundedness information"))
}

/// Decision of injectivity of op.
pub(crate) fn decide_injective(
    op: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<Decision> {
    if op.is_diagonal_on_probes(probe_window)? {
        if let Some(dim) = op.domain().dim() {
            for k in op.domain().probe_indices(dim) {
                if op.diagonal_entry(k)?.norm() == 0.0 {
                    return Ok(Decision::no(format!("diagonal entry at {k} vanishes")));
                }
            }
            return Ok(Decision::yes("diagonal with no vanishing entries"));
        }
        for k in op.domain().probe_indices(probe_window) {
            if op.diagonal_entry(k)?.norm() == 0.0 {
                return Ok(Decision::no(format!("diagonal entry at {k} vanishes")));
            }
        }
    }
    if certs
        .iter()
        .any(|c| matches!(c, StructuralCertificate::Injective))
    {
        return Ok(Decision::yes("certified injective"));
    }
    if certs
        .iter()
        .any(|c| matches!(c, StructuralCertificate::ShiftIsometry { .. }))
    {
        return Ok(Decision::yes("isometries are injective"));
    }
    if let Some(dim) = op.domain().dim() {
        if dim <= 64 && op.codomain().is_finite() {
            let sv = op.to_dense()?.singular_values()?;
            let smallest = sv.last().copied().unwrap_or(0.0);
            let largest = sv.first().copied().unwrap_or(0.0);
            if sv.len() < dim || smallest <= 1e-12 * largest.max(1.0) {
                return Ok(Decision::no("dense block has a kernel"));
            }
            return Ok(Decision::yes(format!(
                "smallest singular value {smallest:.3e}"
            )));
        }
    }
    Ok(Decision::unknown("no injectivity information"))
}

/// Decision of analyticity (∩ ran op^n = {0}).
pub(crate) fn decide_analytic(
    op: &BandedOperator,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<Decision> {
    if op.is_diagonal_on_probes(probe_window)? {
        for k in op.domain().probe_indices(probe_window) {
            if op.diagonal_entry(k)?.norm() > 0.0 {
                return Ok(Decision::no(format!(
                    "e_{k} stays in every range: diagonal entry nonzero"
                )));
            }
        }
    }
    for cert in certs {
        if let StructuralCertificate::Analytic { justification } = cert {
            cert.spot_check(op, probe_window as u32, 1e-10)?;
            return Ok(Decision::yes(format!(
                "certified analytic: {justification}"
            )));
        }
        if let StructuralCertificate::Nilpotent { degree } = cert {
            return Ok(Decision::yes(format!("nilpotent of degree {degree}")));
        }
    }
    Ok(Decision::unknown("analyticity is certificate-only"))
}

/// Decision of invertibility of |E|² + |X|² in B(H₂).
pub(crate) fn decide_defect_invertible(
    t: &BOperator,
    facts: &StructuralFacts,
    probe_window: usize,
) -> Result<Decision> {
    let h2 = t.h2();
    if let Some(dim) = h2.dim() {
        if dim <= 64 {
            let indices = h2.probe_indices(dim);
            let mut d = DenseMatrix::zeros(dim, dim);
            for (col, &kc) in indices.iter().enumerate() {
                let fc = SupportVector::basis(h2, kc)?;
                let e_fc = t.e().apply(&fc)?;
                let x_fc = t.x().apply(&fc)?;
                for (row, &kr) in indices.iter().enumerate() {
                    let fr = SupportVector::basis(h2, kr)?;
                    let val = e_fc.inner(&t.e().apply(&fr)?)? + x_fc.inner(&t.x().apply(&fr)?)?;
                    d.set(row, col, val);
                }
            }
            let (vals, _) = d.hermitian_eigen()?;
            let smallest = vals.last().copied().unwrap_or(0.0);
            return Ok(if smallest > 1e-12 {
                Decision::yes(format!(
                    "smallest eigenvalue of |E|²+|X|² is {smallest:.3e}"
                ))
            } else {
                Decision::no(format!("|E|²+|X|² has eigenvalue {smallest:.3e}"))
            });
        }
    }
    // Pointwise symbol: m(k) = ||E e_k||² + ||X e_k||², valid when both
    // Gram operators act diagonally.
    let gram_diag = t.gram()?.is_diagonal_on_probes(probe_window)?;
    let xsq_diag = t
        .x()
        .adjoint()
        .compose(t.x())?
        .is_diagonal_on_probes(probe_window)?;
    if gram_diag && xsq_diag {
        let mut probed_inf = f64::INFINITY;
        for k in h2.probe_indices(probe_window) {
            let e_part = t.gram_diagonal_entry(k)?;
            let x_part = t.x().apply(&SupportVector::basis(h2, k)?)?.norm_sqr();
            probed_inf = probed_inf.min(e_part + x_part);
        }
        if probed_inf <= 1e-12 {
            return Ok(Decision::no(format!(
                "probed symbol infimum {probed_inf:.3e}"
            )));
        }
        let me = facts.symbol_info(OperatorRole::ModulusE);
        let mx = facts.symbol_info(OperatorRole::ModulusX);
        if let (Some(me), Some(mx)) = (me, mx) {
            if let (Some(ce), Some(cx)) = (me.constant, mx.constant) {
                let total = ce.norm_sqr() + cx.norm_sqr();
                return Ok(if total > 1e-12 {
                    Decision::yes(format!("constant symbol |E|²+|X|² = {total:.6}"))
                } else {
                    Decision::no("constant symbol vanishes")
                });
            }
        }
        return Ok(Decision::unknown(format!(
            "probed infimum {probed_inf:.3e} > 0; invertibility needs declared symbols"
        )));
    }
    Ok(Decision::unknown("no tractable structure for |E|²+|X|²"))
}

/// Power-sequence analysis of the restriction of X to a reducing part.
pub(crate) fn analyze_restricted_powers(
    x: &BandedOperator,
    part: &SubspaceDesc,
    certs: &[StructuralCertificate],
    probe_window: usize,
) -> Result<PowerLimitAnalysis> {
    match part {
        SubspaceDesc::DiagonalPredicate {
            set,
            member,
            finite_members,
        } => {
            if part.is_trivial(probe_window) {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(true),
                    limit: Some(BandedOperator::zero(*set, *set)),
                    limit_is_zero: Some(true),
                    detail: "restriction to the zero subspace".into(),
                });
            }
            if !x.is_diagonal_on_probes(probe_window)? {
                return Ok(PowerLimitAnalysis {
                    convergent: None,
                    limit: None,
                    limit_is_zero: None,
                    detail: "predicate part of a non-diagonal X".into(),
                });
            }
            let indices: Vec<Index> = match finite_members {
                Some(m) => m.clone(),
                None => set
                    .probe_indices(probe_window)
                    .into_iter()
                    .filter(|&k| member(k))
                    .collect(),
            };
            let exhaustive = finite_members.is_some();
            let mut has_fixed = false;
            for &k in &indices {
                match classify_value(x.diagonal_entry(k)?) {
                    ValueKind::Obstructs => {
                        return Ok(PowerLimitAnalysis {
                            convergent: Some(false),
                            limit: None,
                            limit_is_zero: None,
                            detail: format!("restricted diagonal entry at {k} obstructs"),
                        });
                    }
                    ValueKind::Fixed => has_fixed = true,
                    ValueKind::Decaying => {}
                }
            }
            if !exhaustive {
                return Ok(PowerLimitAnalysis {
                    convergent: None,
                    limit: None,
                    limit_is_zero: None,
                    detail: "restriction over an infinite predicate needs certificates".into(),
                });
            }
            let x_probe = x.clone();
            let member = member.clone();
            let limit = BandedOperator::diagonal(
                *set,
                Arc::new(move |k| {
                    if member(k) {
                        match x_probe.diagonal_entry(k) {
                            Ok(v) if classify_value(v) == ValueKind::Fixed => C64::new(1.0, 0.0),
                            _ => C64::new(0.0, 0.0),
                        }
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }),
            );
            Ok(PowerLimitAnalysis {
                convergent: Some(true),
                limit: Some(limit),
                limit_is_zero: Some(!has_fixed),
                detail: "restricted diagonal enumerated".into(),
            })
        }
        SubspaceDesc::DenseBasis { set, basis } => {
            if basis.cols() == 0 {
                return Ok(PowerLimitAnalysis {
                    convergent: Some(true),
                    limit: Some(BandedOperator::zero(*set, *set)),
                    limit_is_zero: Some(true),
                    detail: "restriction to the zero subspace".into(),
                });
            }
            let x_dense = x.to_dense()?;
            let compressed = basis.dagger().mul(&x_dense)?.mul(basis)?;
            let inner = analyze_dense_powers(
                &compressed,
                crate::opcore::IndexSet::Finite {
                    lo: 0,
                    hi: basis.cols() as Index - 1,
                },
            )?;
            let _ = certs;
            match inner.convergent {
                Some(true) => {
                    // Embed the compressed limit back: Q L Q*.
                    let l = inner
                        .limit
                        .as_ref()
                        .map(|op| op.to_dense())
                        .transpose()?
                        .unwrap_or_else(|| DenseMatrix::zeros(basis.cols(), basis.cols()));
                    let embedded = basis.mul(&l)?.mul(&basis.dagger())?;
                    let limit = BandedOperator::dense(*set, *set, &embedded)?;
                    Ok(PowerLimitAnalysis {
                        convergent: Some(true),
                        limit: Some(limit),
                        limit_is_zero: inner.limit_is_zero,
                        detail: format!("compressed block analysis: {}", inner.detail),
                    })
                }
                other => Ok(PowerLimitAnalysis {
                    convergent: other,
                    limit: None,
                    limit_is_zero: inner.limit_is_zero,
                    detail: inner.detail,
                }),
            }
        }
    }
}
