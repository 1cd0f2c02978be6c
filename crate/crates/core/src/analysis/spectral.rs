//! Spectral radius estimation, the five equivalent summability conditions
//! for r(T) < 1, and boundedness analysis of the off-diagonal power blocks
//! sup_n ||E_n||.

use crate::analysis::cert::{OperatorRole, StructuralCertificate, StructuralFacts};
use crate::boperator::{BOperator, SubspaceDesc};
use crate::error::{CoreError, Result};
use crate::opcore::{BandedOperator, DenseMatrix, Index, IndexSet, SupportVector};

/// Spectral radius knowledge: a closed interval, with `exact` set when the
/// endpoints coincide by an exact computation or certificate.
#[derive(Debug, Clone, Copy)]
pub struct SpectralRadiusEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl SpectralRadiusEstimate {
    pub fn decided_below_one(&self) -> bool {
        self.upper < 1.0
    }

    pub fn decided_at_least_one(&self) -> bool {
        self.exact && self.lower >= 1.0 - 1e-12
    }
}

/// Exact for diagonal symbols and finite sections; otherwise a Gelfand
/// estimate from growing finite sections, which only bounds from below.
pub fn spectral_radius(
    op: &BandedOperator,
    cert: Option<&StructuralCertificate>,
) -> Result<SpectralRadiusEstimate> {
    if op.domain() != op.codomain() {
        return Err(CoreError::UnsupportedStructure(
            "spectral radius needs a square operator".into(),
        ));
    }
    let probe_count = 64usize;
    if let Some(dim) = op.domain().dim() {
        if op.is_diagonal_on_probes(dim)? {
            let mut r: f64 = 0.0;
            for k in op.domain().probe_indices(dim) {
                r = r.max(op.diagonal_entry(k)?.norm());
            }
            return Ok(SpectralRadiusEstimate {
                lower: r,
                upper: r,
                exact: true,
            });
        }
        // Small dense block: eigenvalues decide exactly.
        let dense = op.to_dense()?;
        if dense.rows() <= 64 {
            let r = dense
                .eigenvalues()?
                .first()
                .map(|v| v.norm())
                .unwrap_or(0.0);
            return Ok(SpectralRadiusEstimate {
                lower: r,
                upper: r,
                exact: true,
            });
        }
    }
    if op.is_diagonal_on_probes(probe_count)? {
        let mut probed: f64 = 0.0;
        for k in op.domain().probe_indices(probe_count) {
            probed = probed.max(op.diagonal_entry(k)?.norm());
        }
        if let Some(StructuralCertificate::DiagonalSymbol(info)) = cert {
            // The spectrum of a diagonal operator is the closure of its
            // symbol values, so r equals the declared sup.
            return Ok(SpectralRadiusEstimate {
                lower: info.sup_abs,
                upper: info.sup_abs,
                exact: true,
            });
        }
        // Probed sup only bounds from below.
        return Ok(SpectralRadiusEstimate {
            lower: probed,
            upper: f64::INFINITY,
            exact: false,
        });
    }
    let mut upper = f64::INFINITY;
    match cert {
        Some(StructuralCertificate::ShiftIsometry { .. }) => {
            // ||V^n|| = 1 for all n.
            return Ok(SpectralRadiusEstimate {
                lower: 1.0,
                upper: 1.0,
                exact: true,
            });
        }
        Some(StructuralCertificate::SpectralRadiusBound(b)) => upper = *b,
        Some(StructuralCertificate::NormBound(b)) => upper = *b,
        _ => {}
    }
    let lower = gelfand_section_estimate(op)?;
    Ok(SpectralRadiusEstimate {
        lower,
        upper: upper.max(lower),
        exact: false,
    })
}

/// ||T^n||_section^{1/n} over doubling sections until the estimate moves
/// less than 1e-6 or the cap is hit.
fn gelfand_section_estimate(op: &BandedOperator) -> Result<f64> {
    let n_pow = 24u32;
    let mut prev: Option<f64> = None;
    let mut size = 64usize;
    let mut best = 0.0f64;
    while size <= 1024 {
        let (lo, hi) = section_window(op.domain(), size);
        let sec = op.finite_section(lo, hi)?;
        let norm = power_norm(&sec, n_pow)?;
        let est = norm.powf(1.0 / n_pow as f64);
        best = est;
        if let Some(p) = prev {
            if (est - p).abs() < 1e-6 {
                return Ok(est);
            }
        }
        prev = Some(est);
        size *= 2;
    }
    Ok(best)
}

fn section_window(set: IndexSet, size: usize) -> (Index, Index) {
    match set {
        IndexSet::Finite { lo, hi } => (lo, hi.min(lo + size as Index - 1)),
        IndexSet::HalfLine => (0, size as Index - 1),
        IndexSet::FullLine => {
            let half = (size / 2) as Index;
            (-half, half)
        }
    }
}

/// Power-iteration estimate of ||A^n||.
fn power_norm(a: &DenseMatrix, n: u32) -> Result<f64> {
    let dim = a.rows();
    let mut v: Vec<crate::opcore::C64> = (0..dim)
        .map(|i| crate::opcore::C64::new(1.0 / (i as f64 + 1.0), 0.3 / (i as f64 + 2.0)))
        .collect();
    let mut estimate = 0.0f64;
    for _ in 0..18 {
        // w = A^n v
        let mut w = v.clone();
        for _ in 0..n {
            w = a.matvec(&w)?;
        }
        let norm_w: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm_v: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_v == 0.0 || norm_w == 0.0 {
            return Ok(0.0);
        }
        estimate = norm_w / norm_v;
        // Iterate on (A^n)* A^n v to converge to the top singular pair.
        let mut back = w;
        let at = a.dagger();
        for _ in 0..n {
            back = at.matvec(&back)?;
        }
        let norm_b: f64 = back.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_b == 0.0 {
            return Ok(estimate);
        }
        v = back.iter().map(|z| z / norm_b).collect();
    }
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionStatus {
    Holds,
    Fails,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct PanelCondition {
    pub name: &'static str,
    pub status: ConditionStatus,
}

/// Outcome of the probed series Σ_j ||T^j f||² for one probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeSumOutcome {
    ConvergesTo(f64),
    Diverges,
    Undecided,
}

/// The five equivalent characterizations of r(T) < 1: spectral radius below
/// one, WOT-bounded partial sums of T*^j T^j, square-summable orbits,
/// WOT convergence of the series, and norm convergence of the series.
#[derive(Debug, Clone)]
pub struct WikwiPanel {
    pub radius: SpectralRadiusEstimate,
    pub conditions: Vec<PanelCondition>,
    pub probe_sums: Vec<Vec<(u32, f64)>>,
    pub probe_outcomes: Vec<ProbeSumOutcome>,
    pub consistent: bool,
}

pub fn wikwi_panel(
    op: &BandedOperator,
    probes: &[SupportVector],
    horizon: u32,
    cert: Option<&StructuralCertificate>,
) -> Result<WikwiPanel> {
    let radius = spectral_radius(op, cert)?;
    let global: ConditionStatus = if radius.decided_below_one() {
        ConditionStatus::Holds
    } else if radius.decided_at_least_one() {
        ConditionStatus::Fails
    } else {
        ConditionStatus::Undecided
    };

    let diagonal = op.is_diagonal_on_probes(64)?;
    let mut probe_sums = Vec::with_capacity(probes.len());
    let mut probe_outcomes = Vec::with_capacity(probes.len());
    for f in probes {
        let mut series = Vec::with_capacity(horizon as usize + 1);
        let mut cur = f.clone();
        let mut acc = f.norm_sqr();
        series.push((0u32, acc));
        for j in 1..=horizon {
            cur = match op.apply(&cur) {
                Ok(v) => v,
                Err(CoreError::IndexOverflow) => break,
                Err(e) => return Err(e),
            };
            acc += cur.norm_sqr();
            series.push((j, acc));
        }
        // For a diagonal operator and a finitely supported probe the series
        // is an explicit mixture of geometric series; decide it exactly.
        let outcome = if diagonal {
            let mut sum = 0.0f64;
            let mut diverges = false;
            for (k, v) in f.iter() {
                let a = op.diagonal_entry(k)?.norm_sqr();
                if a >= 1.0 {
                    diverges = true;
                    break;
                }
                sum += v.norm_sqr() / (1.0 - a);
            }
            if diverges {
                ProbeSumOutcome::Diverges
            } else {
                ProbeSumOutcome::ConvergesTo(sum)
            }
        } else {
            ProbeSumOutcome::Undecided
        };
        probe_sums.push(series);
        probe_outcomes.push(outcome);
    }

    // A single exactly-divergent probe refutes conditions (ii)-(v) and
    // hence r(T) < 1.
    let any_diverges = probe_outcomes
        .iter()
        .any(|o| matches!(o, ProbeSumOutcome::Diverges));
    let effective = if any_diverges {
        ConditionStatus::Fails
    } else {
        global
    };

    let names = [
        "r(T) < 1",
        "partial sums of T*^j T^j bounded (WOT)",
        "sum of ||T^j f||^2 finite for all f",
        "series of T*^j T^j converges (WOT)",
        "series of T*^j T^j converges in norm",
    ];
    let conditions: Vec<PanelCondition> = names
        .iter()
        .map(|&name| PanelCondition {
            name,
            status: effective,
        })
        .collect();

    // The five conditions are equivalent; any split decision would be an
    // internal inconsistency.
    let consistent = !(any_diverges && global == ConditionStatus::Holds);

    Ok(WikwiPanel {
        radius,
        conditions,
        probe_sums,
        probe_outcomes,
        consistent,
    })
}

/// Boundedness verdict for sup_n ||E_n||.
#[derive(Debug, Clone)]
pub enum SupEnDecision {
    Bounded { bound: Option<f64>, reason: String },
    Unbounded { reason: String },
    Undecided,
}

#[derive(Debug, Clone)]
pub struct SupEnReport {
    /// max over n <= horizon of the probed (or exact) ||E_n||.
    pub probed_max: f64,
    /// (n, ||E_n|| estimate) series; exact for diagonal symbols.
    pub per_n: Vec<(u32, f64)>,
    pub decision: SupEnDecision,
    /// True when per_n values are exact rather than probe lower bounds.
    pub exact_values: bool,
}

impl SupEnReport {
    pub fn decided_bounded(&self) -> Option<bool> {
        match self.decision {
            SupEnDecision::Bounded { .. } => Some(true),
            SupEnDecision::Unbounded { .. } => Some(false),
            SupEnDecision::Undecided => None,
        }
    }
}

pub fn sup_en_norm(t: &BOperator, facts: &StructuralFacts, horizon: u32) -> Result<SupEnReport> {
    if horizon < 1 {
        return Err(CoreError::InvalidParameter("horizon must be >= 1".into()));
    }
    let probe_window = 64usize;
    let gram = t.gram()?;
    let diag_gram = gram.is_diagonal_on_probes(probe_window)?;
    let diag_x = t.x().is_diagonal_on_probes(probe_window)?;
    let h2 = t.h2();

    // Exact symbol sweep when both E*E and X act diagonally and H2 is
    // enumerable; otherwise probe lower bounds via the E_n recursion.
    let (per_n, exact_values) = if diag_gram && diag_x {
        let indices = match h2.dim() {
            Some(d) => h2.probe_indices(d),
            None => h2.probe_indices(probe_window),
        };
        let eta: Vec<f64> = indices
            .iter()
            .map(|&k| t.gram_diagonal_entry(k))
            .collect::<Result<_>>()?;
        let xsq: Vec<f64> = indices
            .iter()
            .map(|&k| t.x().diagonal_entry(k).map(|v| v.norm_sqr()))
            .collect::<Result<_>>()?;
        let mut geo = vec![0.0f64; indices.len()];
        let mut xpow = vec![1.0f64; indices.len()];
        let mut series = Vec::with_capacity(horizon as usize);
        for n in 1..=horizon {
            for i in 0..indices.len() {
                geo[i] += xpow[i];
                xpow[i] *= xsq[i];
            }
            let norm_sq = indices
                .iter()
                .enumerate()
                .map(|(i, _)| eta[i] * geo[i])
                .fold(0.0f64, f64::max);
            series.push((n, norm_sq.sqrt()));
        }
        (series, h2.is_finite())
    } else {
        let probes: Vec<SupportVector> = h2
            .probe_indices(8)
            .into_iter()
            .map(|k| SupportVector::basis(h2, k))
            .collect::<Result<_>>()?;
        let mut orbits: Vec<_> = probes.iter().map(|f| t.en_orbit(f)).collect();
        let mut series = Vec::with_capacity(horizon as usize);
        let mut alive = vec![true; orbits.len()];
        for n in 1..=horizon {
            let mut best = 0.0f64;
            for (i, orbit) in orbits.iter_mut().enumerate() {
                if !alive[i] {
                    continue;
                }
                match orbit.next() {
                    Some(Ok(v)) => best = best.max(v.norm()),
                    Some(Err(CoreError::IndexOverflow)) | None => alive[i] = false,
                    Some(Err(e)) => return Err(e),
                }
            }
            series.push((n, best));
            if alive.iter().all(|a| !a) {
                break;
            }
        }
        (series, false)
    };
    let probed_max = per_n.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);

    let e_is_zero = {
        let mut zero = true;
        for k in h2.probe_indices(probe_window) {
            if t.gram_diagonal_entry(k)? > 0.0 {
                zero = false;
                break;
            }
        }
        zero && (h2.dim().map(|d| d <= probe_window).unwrap_or(false)
            || facts.norm_bound(OperatorRole::E) == Some(0.0))
    };

    let decision = decide_sup_en(t, facts, diag_gram, diag_x, e_is_zero)?;
    Ok(SupEnReport {
        probed_max,
        per_n,
        decision,
        exact_values,
    })
}

fn decide_sup_en(
    t: &BOperator,
    facts: &StructuralFacts,
    diag_gram: bool,
    diag_x: bool,
    e_is_zero: bool,
) -> Result<SupEnDecision> {
    if e_is_zero {
        return Ok(SupEnDecision::Bounded {
            bound: Some(0.0),
            reason: "E = 0, so every E_n vanishes".into(),
        });
    }
    let h2 = t.h2();
    let probe_window = 64usize;

    // r(X) < 1 settles it: r(X|H22) <= r(X) < 1 forces WOT decay of E_n.
    let rx = spectral_radius(t.x(), facts.certs(OperatorRole::X).first())?;
    let rx = match facts.spectral_radius_bound(OperatorRole::X) {
        Some(b) => SpectralRadiusEstimate {
            lower: rx.lower.min(b),
            upper: rx.upper.min(b),
            exact: rx.exact,
        },
        None => rx,
    };
    if rx.upper < 1.0 {
        let bound = if diag_gram && diag_x && h2.is_finite() {
            let indices = h2.probe_indices(h2.dim().unwrap());
            let mut b = 0.0f64;
            for k in indices {
                let eta = t.gram_diagonal_entry(k)?;
                let a = t.x().diagonal_entry(k)?.norm_sqr();
                if a < 1.0 {
                    b = b.max(eta / (1.0 - a));
                }
            }
            Some(b.sqrt())
        } else {
            None
        };
        return Ok(SupEnDecision::Bounded {
            bound,
            reason: format!("r(X) <= {:.6} < 1 bounds the Gram series", rx.upper),
        });
    }

    // Isometric X with E != 0: E_n*E_n = n E*E grows without bound.
    let x_isometric = facts.shift_isometry(OperatorRole::X).is_some()
        || matches!(
            facts.symbol_info(OperatorRole::X),
            Some(info) if info.constant.map(|c| (c.norm() - 1.0).abs() < 1e-12).unwrap_or(false)
        );
    if x_isometric {
        return Ok(SupEnDecision::Unbounded {
            reason: "X isometric and E != 0: ||E_n||^2 = n ||E||^2".into(),
        });
    }

    // Finite H2: ran |E| is closed, so boundedness is equivalent to
    // r(X|H22) < 1.
    if h2.is_finite() && h2.dim().unwrap_or(usize::MAX) <= probe_window {
        let split = t.kernel_split(probe_window as u32, crate::ALGEBRA_TOL)?;
        let r22 = restricted_radius(t.x(), &split.h22)?;
        if let Some(r22) = r22 {
            if r22 < 1.0 {
                let bound = if diag_gram && diag_x {
                    let indices = h2.probe_indices(h2.dim().unwrap());
                    let mut b = 0.0f64;
                    for k in indices {
                        let eta = t.gram_diagonal_entry(k)?;
                        let a = t.x().diagonal_entry(k)?.norm_sqr();
                        if eta > 0.0 {
                            b = b.max(eta / (1.0 - a));
                        }
                    }
                    Some(b.sqrt())
                } else {
                    None
                };
                return Ok(SupEnDecision::Bounded {
                    bound,
                    reason: format!("ran |E| closed and r(X|H22) = {r22:.6} < 1"),
                });
            } else {
                return Ok(SupEnDecision::Unbounded {
                    reason: format!("ran |E| closed and r(X|H22) = {r22:.6} >= 1"),
                });
            }
        }
    }
    Ok(SupEnDecision::Undecided)
}

/// Spectral radius of X compressed to the subspace, when computable.
pub fn restricted_radius(x: &BandedOperator, part: &SubspaceDesc) -> Result<Option<f64>> {
    match part {
        SubspaceDesc::DiagonalPredicate {
            set,
            member,
            finite_members,
        } => {
            if !x.is_diagonal_on_probes(64)? {
                return Ok(None);
            }
            let indices: Vec<Index> = match finite_members {
                Some(m) => m.clone(),
                None => set
                    .probe_indices(64)
                    .into_iter()
                    .filter(|&k| member(k))
                    .collect(),
            };
            if finite_members.is_none() {
                // Probed restriction of an infinite diagonal only bounds
                // from below; do not claim exactness.
                return Ok(None);
            }
            let mut r = 0.0f64;
            for k in indices {
                r = r.max(x.diagonal_entry(k)?.norm());
            }
            Ok(Some(r))
        }
        SubspaceDesc::DenseBasis { basis, .. } => {
            if basis.cols() == 0 {
                return Ok(Some(0.0));
            }
            let x_dense = x.to_dense()?;
            // B = Q* X Q on the part's orthonormal basis.
            let b = basis.dagger().mul(&x_dense)?.mul(basis)?;
            let r = b.eigenvalues()?.first().map(|v| v.norm()).unwrap_or(0.0);
            Ok(Some(r))
        }
    }
}
