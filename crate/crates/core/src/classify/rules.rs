//! The characterization rules: WOT convergence of powers, SOT convergence,
//! the impossibility of strong/uniform stability, the subnormal refinement
//! and strong stability of the adjoint.

use crate::analysis::{
    sot_probe, sup_en_norm, OperatorRole, StructuralFacts, SupEnDecision, VerdictStatus,
};
use crate::boperator::{BOperator, BlockVector};
use crate::classify::engine::{
    analyze_power_convergence, analyze_restricted_powers, analyze_unitary_part, decide_analytic,
    decide_contraction, decide_defect_invertible, decide_identity_with_certs, decide_injective,
    decide_power_bounded, decide_zero, Decision,
};
use crate::classify::verdict::{BlockLimit, Conclusion, Premise, PremiseStatus, TheoremVerdict};
use crate::error::{CoreError, Result};
use crate::opcore::{BandedOperator, SupportVector};

/// Tunables shared by the rules.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyParams {
    pub horizon: u32,
    pub tol: f64,
    pub probe_window: usize,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            horizon: crate::DEFAULT_HORIZON,
            tol: crate::ALGEBRA_TOL,
            probe_window: 48,
        }
    }
}

fn premise_of(name: &str, d: &Decision) -> Premise {
    let status = match d.value {
        Some(true) => PremiseStatus::Holds,
        Some(false) => PremiseStatus::Fails,
        None => PremiseStatus::Undecided,
    };
    Premise::new(name, status, d.detail.clone())
}

fn status_of(opt: Option<bool>) -> PremiseStatus {
    match opt {
        Some(true) => PremiseStatus::Holds,
        Some(false) => PremiseStatus::Fails,
        None => PremiseStatus::Undecided,
    }
}

fn verify_facts(t: &BOperator, facts: &StructuralFacts, params: &ClassifyParams) -> Result<()> {
    facts.verify(t, 16, params.tol.max(1e-10))
}

/// WOT convergence of {T^n}: equivalent to WOT convergence of the unitary
/// part's powers and of {X^n} together with sup_n ||E_n|| < ∞; the limit is
/// then `[P ⊕ 0, 0; 0, A]` with P the projection onto the fixed space of U.
pub fn classify_wot(
    t: &BOperator,
    facts: &StructuralFacts,
    params: &ClassifyParams,
) -> Result<TheoremVerdict> {
    verify_facts(t, facts, params)?;
    let u = analyze_unitary_part(t.v(), facts.certs(OperatorRole::V), params.probe_window)?;
    let mut x =
        analyze_power_convergence(t.x(), facts.certs(OperatorRole::X), params.probe_window)?;
    let sup_en = sup_en_norm(t, facts, params.horizon)?;
    let mut sup_en_status = match sup_en.decision {
        SupEnDecision::Bounded { .. } => Some(true),
        SupEnDecision::Unbounded { .. } => Some(false),
        SupEnDecision::Undecided => None,
    };
    let mut sup_en_detail = match &sup_en.decision {
        SupEnDecision::Bounded { reason, .. } | SupEnDecision::Unbounded { reason } => {
            reason.clone()
        }
        SupEnDecision::Undecided => {
            format!(
                "undecided; probed max over n <= {} is {:.6}",
                params.horizon, sup_en.probed_max
            )
        }
    };
    let mut trace = vec![
        "powers of a block triangle converge iff all three block sequences do".to_string(),
        "the completely non-unitary part of an isometry is weakly stable".to_string(),
        "E_n is WOT-null exactly when sup_n ||E_n|| is finite".to_string(),
    ];

    // Shortcut branch: r(X) < 1 settles both the X-powers and the E_n
    // boundedness at once, with A = 0.
    if x.convergent.is_none() || sup_en_status.is_none() {
        let rx = crate::analysis::spectral_radius(t.x(), facts.certs(OperatorRole::X).first())?;
        let rx_upper = facts
            .spectral_radius_bound(OperatorRole::X)
            .map(|b| b.min(rx.upper))
            .unwrap_or(rx.upper);
        if rx_upper < 1.0 {
            trace.push("r(X) < 1 forces X^n -> 0 and bounded E_n".to_string());
            if x.convergent.is_none() {
                x = crate::classify::engine::PowerLimitAnalysis {
                    convergent: Some(true),
                    limit: Some(BandedOperator::zero(t.h2(), t.h2())),
                    limit_is_zero: Some(true),
                    detail: format!("r(X) <= {rx_upper:.6} < 1"),
                };
            }
            if sup_en_status.is_none() {
                sup_en_status = Some(true);
                sup_en_detail = format!("r(X) <= {rx_upper:.6} < 1 bounds the Gram series");
            }
        }
    }

    let premises = vec![
        Premise::new(
            "powers of the unitary part of V converge (WOT)",
            status_of(u.u_convergent),
            u.detail.clone(),
        ),
        Premise::new(
            "powers of X converge (WOT)",
            status_of(x.convergent),
            x.detail.clone(),
        ),
        Premise::new(
            "sup_n ||E_n|| finite",
            status_of(sup_en_status),
            sup_en_detail,
        ),
    ];

    let all_hold = premises.iter().all(|p| p.status == PremiseStatus::Holds);
    let any_fails = premises.iter().any(|p| p.status == PremiseStatus::Fails);

    let (conclusion, limit) = if all_hold {
        let p_block = u
            .p_block
            .clone()
            .expect("decided unitary part carries its projection");
        let a_block = x.limit.clone().expect("decided X powers carry their limit");
        let weakly_stable = u.p_is_zero == Some(true) && x.limit_is_zero == Some(true);
        (
            Conclusion::WotConvergent { weakly_stable },
            Some(BlockLimit {
                h1_block: p_block,
                h2_block: a_block,
            }),
        )
    } else if any_fails {
        (Conclusion::NotWotConvergent, None)
    } else {
        (Conclusion::Undetermined, None)
    };

    let verdict = TheoremVerdict {
        rule: "wot-power-convergence",
        conclusion,
        premises,
        limit,
        trace,
    };
    debug_assert!(verdict.check_invariant());
    Ok(verdict)
}

/// SOT convergence of {T^n}: happens exactly when V = I, E = 0 and {X^n}
/// is SOT convergent; the limit is then diag(I, A).
pub fn classify_sot(
    t: &BOperator,
    facts: &StructuralFacts,
    params: &ClassifyParams,
) -> Result<TheoremVerdict> {
    verify_facts(t, facts, params)?;
    let v_is_identity =
        decide_identity_with_certs(t.v(), facts.certs(OperatorRole::V), params.probe_window)?;
    let e_is_zero = decide_zero(t.e(), facts.certs(OperatorRole::E), params.probe_window)?;
    // For the operators in scope (diagonal, certified shifts, small dense)
    // the SOT analysis of X^n coincides with the WOT one.
    let x = analyze_power_convergence(t.x(), facts.certs(OperatorRole::X), params.probe_window)?;

    let premises = vec![
        premise_of("V = I", &v_is_identity),
        premise_of("E = 0", &e_is_zero),
        Premise::new(
            "powers of X converge (SOT)",
            status_of(x.convergent),
            x.detail.clone(),
        ),
    ];
    let trace = vec![
        "an isometry with SOT-convergent powers is the identity".to_string(),
        "with V = I, orthogonality of ran V and ran E forces E = 0".to_string(),
    ];

    let all_hold = premises.iter().all(|p| p.status == PremiseStatus::Holds);
    let any_fails = premises.iter().any(|p| p.status == PremiseStatus::Fails);

    let (conclusion, limit) = if all_hold {
        let a_block = x.limit.clone().expect("decided X powers carry their limit");
        (
            Conclusion::SotConvergent,
            Some(BlockLimit {
                h1_block: BandedOperator::identity(t.h1()),
                h2_block: a_block,
            }),
        )
    } else if any_fails {
        (Conclusion::NotSotConvergent, None)
    } else {
        (Conclusion::Undetermined, None)
    };

    let mut verdict = TheoremVerdict {
        rule: "sot-power-convergence",
        conclusion,
        premises,
        limit,
        trace,
    };
    if verdict.conclusion == Conclusion::NotSotConvergent {
        // Attach an isometry-persistence witness: the first block column
        // keeps unit norm, so T^n h cannot be Cauchy unless V fixes h.
        if let Some(w) = sot_witness(t, params)? {
            verdict.trace.push(w);
        }
    }
    debug_assert!(verdict.check_invariant());
    Ok(verdict)
}

fn sot_witness(t: &BOperator, params: &ClassifyParams) -> Result<Option<String>> {
    let probes: Vec<BlockVector> = t
        .h1()
        .probe_indices(4)
        .into_iter()
        .map(|i| SupportVector::basis(t.h1(), i).map(|f| BlockVector::from_top(f, t.h2())))
        .collect::<Result<_>>()?;
    let (verdict, _) = sot_probe(t, &probes, params.horizon.min(64), params.tol)?;
    if verdict.status == VerdictStatus::NotConverged {
        if let Some(w) = verdict.witness() {
            return Ok(Some(format!(
                "witness: ||T^{} h - T^{} h|| = {:.6} on probe {}",
                w.n, w.m, w.separation, w.probe
            )));
        }
    }
    Ok(None)
}

/// No B-operator is strongly or uniformly stable: the first block column is
/// isometric, so ||T^n (h ⊕ 0)|| = ||h|| for every n.
pub fn never_strong_or_uniform(t: &BOperator, params: &ClassifyParams) -> Result<TheoremVerdict> {
    let horizon = params.horizon.min(64);
    let deviation = isometry_persistence(t, horizon, 6)?;
    let premises = vec![Premise::new(
        "V isometric (validated structure)",
        PremiseStatus::Holds,
        format!(
            "max |(||T^n (h ⊕ 0)|| / ||h||) - 1| = {deviation:.3e} over probes, n <= {horizon}"
        ),
    )];
    let verdict = TheoremVerdict {
        rule: "no-strong-or-uniform-stability",
        conclusion: Conclusion::NeverStrongOrUniformStable,
        premises,
        limit: None,
        trace: vec!["||T^n (h ⊕ 0)|| = ||V^n h|| = ||h||, so ||T^n|| >= 1 for every n".to_string()],
    };
    debug_assert!(verdict.check_invariant());
    Ok(verdict)
}

/// max over probes h and 1 <= n <= horizon of |(||T^n (h⊕0)|| / ||h||) - 1|,
/// computed by honest repeated application.
pub fn isometry_persistence(t: &BOperator, horizon: u32, probe_count: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in t.h1().probe_indices(probe_count) {
        let mut h = BlockVector::from_top(SupportVector::basis(t.h1(), i)?, t.h2());
        // Mix two basis directions to avoid probing only single columns.
        if let Some(&j) = t.h1().probe_indices(probe_count * 2).last() {
            if j != i {
                let extra =
                    SupportVector::basis(t.h1(), j)?.scale(crate::opcore::C64::new(0.5, 0.25));
                h = BlockVector::from_top(h.top.add(&extra)?, t.h2());
            }
        }
        let norm0 = h.norm();
        let mut cur = h;
        for _ in 1..=horizon {
            cur = match t.apply(&cur) {
                Ok(v) => v,
                Err(CoreError::IndexOverflow) => break,
                Err(e) => return Err(e),
            };
            worst = worst.max((cur.norm() / norm0 - 1.0).abs());
        }
    }
    Ok(worst)
}

/// The subnormal (here: normal, certified) refinement: convergence is
/// equivalent to convergence of the unitary part and of X restricted to
/// ker E, boundedness of the E_n, and contractivity of X. The limit's lower
/// block is B ⊕ 0 across ker E ⊕ closure(ran |E|).
pub fn classify_wot_subnormal(
    t: &BOperator,
    facts: &StructuralFacts,
    params: &ClassifyParams,
) -> Result<TheoremVerdict> {
    verify_facts(t, facts, params)?;
    let x_normal_certified =
        facts.has(OperatorRole::X, "normal") || t.x().is_diagonal_on_probes(params.probe_window)?;
    if !x_normal_certified {
        return Err(CoreError::MissingCertificate(
            "the subnormal rule needs X certified normal (or diagonal)".into(),
        ));
    }

    let u = analyze_unitary_part(t.v(), facts.certs(OperatorRole::V), params.probe_window)?;
    let sup_en = sup_en_norm(t, facts, params.horizon)?;
    let contraction = decide_contraction(t.x(), facts.certs(OperatorRole::X), params.probe_window)?;
    let split = t.kernel_split(params.probe_window as u32, params.tol)?;
    let e_injective = decide_injective(t.e(), facts.certs(OperatorRole::E), params.probe_window)?;
    let restricted = analyze_restricted_powers(
        t.x(),
        &split.h21,
        facts.certs(OperatorRole::X),
        params.probe_window,
    )?;

    let sup_status = match sup_en.decision {
        SupEnDecision::Bounded { .. } => PremiseStatus::Holds,
        SupEnDecision::Unbounded { .. } => PremiseStatus::Fails,
        SupEnDecision::Undecided => PremiseStatus::Undecided,
    };
    let sup_detail = match &sup_en.decision {
        SupEnDecision::Bounded { reason, .. } | SupEnDecision::Unbounded { reason } => {
            reason.clone()
        }
        SupEnDecision::Undecided => "undecided".into(),
    };

    let mut premises = vec![
        Premise::new(
            "powers of the unitary part of V converge (WOT)",
            status_of(u.u_convergent),
            u.detail.clone(),
        ),
        Premise::new(
            "powers of X restricted to ker E converge (WOT)",
            status_of(restricted.convergent),
            restricted.detail.clone(),
        ),
        Premise::new("sup_n ||E_n|| finite", sup_status, sup_detail),
        premise_of("||X|| <= 1", &contraction),
    ];
    if e_injective.value == Some(true) {
        premises.push(Premise::new(
            "E injective, so ker E = {0}",
            PremiseStatus::Holds,
            e_injective.detail.clone(),
        ));
    }

    let trace = vec![
        "a WOT-convergent subnormal power sequence forces ||X|| <= 1".to_string(),
        "the semispectral measure of X puts no mass on the circle over closure(ran |E|)"
            .to_string(),
        "hence X restricted to closure(ran |E|) is weakly stable and A = B ⊕ 0".to_string(),
    ];

    let all_hold = premises.iter().all(|p| p.status == PremiseStatus::Holds);
    let any_fails = premises.iter().any(|p| p.status == PremiseStatus::Fails);

    let (conclusion, limit) = if all_hold {
        let p_block = u
            .p_block
            .clone()
            .expect("decided unitary part carries its projection");
        let b_embedded = restricted
            .limit
            .clone()
            .expect("decided restriction carries its limit");
        let weakly_stable = u.p_is_zero == Some(true) && restricted.limit_is_zero == Some(true);
        (
            Conclusion::WotConvergent { weakly_stable },
            Some(BlockLimit {
                h1_block: p_block,
                h2_block: b_embedded,
            }),
        )
    } else if any_fails {
        (Conclusion::NotWotConvergent, None)
    } else {
        (Conclusion::Undetermined, None)
    };

    let verdict = TheoremVerdict {
        rule: "subnormal-wot-power-convergence",
        conclusion,
        premises,
        limit,
        trace,
    };
    debug_assert!(verdict.check_invariant());
    Ok(verdict)
}

/// Sufficient conditions for strong stability of T*: V completely
/// non-unitary, sup ||E_n|| < ∞, X power bounded, X injective and analytic,
/// and |E|² + |X|² invertible. The first three are also necessary.
pub fn adjoint_strong_stability(
    t: &BOperator,
    facts: &StructuralFacts,
    params: &ClassifyParams,
) -> Result<TheoremVerdict> {
    verify_facts(t, facts, params)?;
    let u = analyze_unitary_part(t.v(), facts.certs(OperatorRole::V), params.probe_window)?;
    let cnu = Decision {
        value: u.completely_non_unitary,
        detail: u.detail.clone(),
    };
    let sup_en = sup_en_norm(t, facts, params.horizon)?;
    let sup_decision = match &sup_en.decision {
        SupEnDecision::Bounded { reason, .. } => Decision::yes(reason.clone()),
        SupEnDecision::Unbounded { reason } => Decision::no(reason.clone()),
        SupEnDecision::Undecided => Decision::unknown("undecided"),
    };
    let power_bounded =
        decide_power_bounded(t.x(), facts.certs(OperatorRole::X), params.probe_window)?;
    let injective = decide_injective(t.x(), facts.certs(OperatorRole::X), params.probe_window)?;
    let analytic = decide_analytic(t.x(), facts.certs(OperatorRole::X), params.probe_window)?;
    let invertible = decide_defect_invertible(t, facts, params.probe_window)?;

    let premises = vec![
        premise_of("V completely non-unitary (necessary)", &cnu),
        premise_of("sup_n ||E_n|| finite (necessary)", &sup_decision),
        premise_of("X power bounded (necessary)", &power_bounded),
        premise_of("X injective", &injective),
        premise_of("X analytic", &analytic),
        premise_of("|E|² + |X|² invertible", &invertible),
    ];

    let necessary_fails = premises[..3]
        .iter()
        .any(|p| p.status == PremiseStatus::Fails);
    let all_hold = premises.iter().all(|p| p.status == PremiseStatus::Holds);

    let mut trace = vec![
        "power-bounded, left-invertible and analytic T has strongly stable adjoint".to_string(),
        "T is power bounded iff sup ||E_n|| < ∞ and X is power bounded".to_string(),
        "left invertibility of T amounts to invertibility of |E|² + |X|²".to_string(),
    ];

    let conclusion = if all_hold {
        // Probe evidence: adjoint orbits of basis vectors decay.
        let mut max_tail: f64 = 0.0;
        for i in t.h1().probe_indices(3) {
            let h = BlockVector::from_top(SupportVector::basis(t.h1(), i)?, t.h2());
            let mut cur = h;
            for _ in 0..params.horizon.min(200) {
                cur = t.apply_adjoint(&cur)?;
            }
            max_tail = max_tail.max(cur.norm());
        }
        trace.push(format!(
            "probe evidence: max ||T*^{} (e_i ⊕ 0)|| = {max_tail:.3e}",
            params.horizon.min(200)
        ));
        Conclusion::AdjointStronglyStable
    } else if necessary_fails {
        Conclusion::NotAdjointStronglyStable
    } else {
        Conclusion::Undetermined
    };

    let verdict = TheoremVerdict {
        rule: "adjoint-strong-stability",
        conclusion,
        premises,
        limit: None,
        trace,
    };
    debug_assert!(verdict.check_invariant());
    Ok(verdict)
}
