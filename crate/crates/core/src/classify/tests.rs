use std::sync::Arc;

use super::*;
use crate::analysis::{Sided, SymbolInfo};
use crate::boperator::{BOperator, BlockVector};
use crate::error::CoreError;
use crate::gallery;
use crate::opcore::{BandedOperator, IndexSet, SupportVector, C64};

fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn params() -> ClassifyParams {
    ClassifyParams {
        horizon: 128,
        ..Default::default()
    }
}

/// V = I, E = 0, X given by a table on a finite space.
fn trivial_with_x(x_values: Vec<C64>) -> (BOperator, StructuralFacts) {
    let h1 = IndexSet::finite(0, 2).unwrap();
    let dim = x_values.len() as i128;
    let h2 = IndexSet::finite(0, dim - 1).unwrap();
    let v = BandedOperator::identity(h1);
    let e = BandedOperator::zero(h2, h1);
    let x = BandedOperator::diagonal_table(h2, x_values).unwrap();
    (BOperator::new(v, e, x).unwrap(), StructuralFacts::new())
}

#[test]
fn tz_is_weakly_stable() {
    let inst = gallery::b_normal_tz(cr(0.5)).unwrap();
    let verdict = classify_wot(&inst.operator, &inst.facts, &params()).unwrap();
    assert_eq!(
        verdict.conclusion,
        Conclusion::WotConvergent {
            weakly_stable: true
        },
        "{verdict}"
    );
    let limit = verdict.limit.unwrap();
    // Zero limit on probes.
    for (f, g) in inst.wot_dictionary.iter().take(6) {
        assert!(limit.pair(f, g).unwrap().norm() < 1e-15);
    }
}

#[test]
fn b_isometry_with_nonzero_e_is_not_wot_convergent() {
    let inst = gallery::b_isometry(1.0, gallery::BIsometryVariant::Quasi).unwrap();
    let verdict = classify_wot(&inst.operator, &inst.facts, &params()).unwrap();
    assert_eq!(
        verdict.conclusion,
        Conclusion::NotWotConvergent,
        "{verdict}"
    );
    let sup = verdict.premise("sup_n ||E_n|| finite").unwrap();
    assert_eq!(sup.status, PremiseStatus::Fails);
}

#[test]
fn b_isometry_with_zero_e_is_weakly_stable() {
    let inst = gallery::b_isometry(0.0, gallery::BIsometryVariant::Quasi).unwrap();
    let verdict = classify_wot(&inst.operator, &inst.facts, &params()).unwrap();
    assert_eq!(
        verdict.conclusion,
        Conclusion::WotConvergent {
            weakly_stable: true
        }
    );
}

#[test]
fn block_diagonal_identity_converges_with_projection_limit() {
    let (t, facts) = trivial_with_x(vec![cr(0.0), cr(0.0)]);
    let verdict = classify_wot(&t, &facts, &params()).unwrap();
    assert_eq!(
        verdict.conclusion,
        Conclusion::WotConvergent {
            weakly_stable: false
        }
    );
    let limit = verdict.limit.unwrap();
    // Limit is diag(I, 0).
    for i in 0..3 {
        let f = BlockVector::from_top(SupportVector::basis(t.h1(), i).unwrap(), t.h2());
        assert!((limit.pair(&f, &f).unwrap() - cr(1.0)).norm() < 1e-15);
    }
    for k in 0..2 {
        let f = BlockVector::from_bottom(t.h1(), SupportVector::basis(t.h2(), k).unwrap());
        assert!(limit.pair(&f, &f).unwrap().norm() < 1e-15);
    }
}

#[test]
fn sot_positive_branch_with_mixed_diagonal() {
    let (t, facts) = trivial_with_x(vec![cr(1.0), cr(0.5)]);
    let verdict = classify_sot(&t, &facts, &params()).unwrap();
    assert_eq!(verdict.conclusion, Conclusion::SotConvergent, "{verdict}");
    let limit = verdict.limit.unwrap();
    // Limit diag(I, diag(1, 0)).
    let f0 = BlockVector::from_bottom(t.h1(), SupportVector::basis(t.h2(), 0).unwrap());
    let f1 = BlockVector::from_bottom(t.h1(), SupportVector::basis(t.h2(), 1).unwrap());
    assert!((limit.pair(&f0, &f0).unwrap() - cr(1.0)).norm() < 1e-15);
    assert!(limit.pair(&f1, &f1).unwrap().norm() < 1e-15);
}

#[test]
fn shift_v_blocks_sot_convergence() {
    let inst = gallery::b_normal_tz(cr(0.5)).unwrap();
    let verdict = classify_sot(&inst.operator, &inst.facts, &params()).unwrap();
    assert_eq!(
        verdict.conclusion,
        Conclusion::NotSotConvergent,
        "{verdict}"
    );
    assert_eq!(
        verdict.premise("V = I").unwrap().status,
        PremiseStatus::Fails
    );
}

#[test]
fn sot_convergent_isometry_powers_force_identity() {
    // Standalone check of the remark: for each gallery V with V != I the
    // probe orbits of V are not Cauchy, while V = I converges at once.
    use crate::analysis::{sot_probe, VerdictStatus};
    for inst in gallery::all_instances().unwrap() {
        let v = inst.operator.v();
        let probes: Vec<SupportVector> = v
            .domain()
            .probe_indices(3)
            .into_iter()
            .map(|i| SupportVector::basis(v.domain(), i).unwrap())
            .collect();
        let (verdict, _) = sot_probe(v, &probes, 64, 1e-8).unwrap();
        assert_eq!(verdict.status, VerdictStatus::NotConverged, "{}", inst.name);
    }
    let id = BandedOperator::identity(IndexSet::HalfLine);
    let probes = vec![SupportVector::basis(IndexSet::HalfLine, 0).unwrap()];
    let (verdict, _) = sot_probe(&id, &probes, 16, 1e-10).unwrap();
    assert_eq!(verdict.status, crate::analysis::VerdictStatus::Converged);
}

#[test]
fn never_stable_across_the_gallery() {
    for inst in gallery::all_instances().unwrap() {
        let verdict = never_strong_or_uniform(&inst.operator, &params()).unwrap();
        assert_eq!(
            verdict.conclusion,
            Conclusion::NeverStrongOrUniformStable,
            "{}",
            inst.name
        );
        let dev = isometry_persistence(&inst.operator, 64, 4).unwrap();
        assert!(dev <= 1e-12, "{}: deviation {dev}", inst.name);
    }
}

#[test]
fn subnormal_rule_agrees_with_general_rule_on_nitclyst() {
    let measure = gallery::DiscreteMeasure::planar_lebesgue_radial(24).unwrap();
    let inst = gallery::nitclyst(&measure).unwrap();
    let general = classify_wot(&inst.operator, &inst.facts, &params()).unwrap();
    let refined = classify_wot_subnormal(&inst.operator, &inst.facts, &params()).unwrap();
    assert_eq!(
        general.conclusion,
        Conclusion::WotConvergent {
            weakly_stable: true
        }
    );
    assert_eq!(
        refined.conclusion, general.conclusion,
        "\n{general}\n{refined}"
    );
}

#[test]
fn subnormal_rule_rejects_expanding_diagonal() {
    let (t, facts) = trivial_with_x(vec![cr(1.2), cr(0.5)]);
    let verdict = classify_wot_subnormal(&t, &facts, &params()).unwrap();
    assert_eq!(verdict.conclusion, Conclusion::NotWotConvergent);
    assert_eq!(
        verdict.premise("||X|| <= 1").unwrap().status,
        PremiseStatus::Fails
    );
}

#[test]
fn subnormal_rule_requires_normality() {
    // X a scaled one-sided shift is not normal and carries no normality
    // certificate.
    let inst = gallery::remark_nycuxa(cr(1.0), cr(0.5)).unwrap();
    assert!(matches!(
        classify_wot_subnormal(&inst.operator, &inst.facts, &params()),
        Err(CoreError::MissingCertificate(_))
    ));
}

#[test]
fn semispectral_nitclyst_passes() {
    let measure = gallery::DiscreteMeasure::planar_lebesgue_radial(16).unwrap();
    let inst = gallery::nitclyst(&measure).unwrap();
    let report = verify_semispectral(&inst.operator, &inst.facts, 48, 1e-10).unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.circle_atoms_on_h22.is_empty());
}

#[test]
fn semispectral_vacuous_for_zero_e() {
    let (t, facts) = trivial_with_x(vec![cr(0.5), cr(0.25)]);
    let report = verify_semispectral(&t, &facts, 16, 1e-10).unwrap();
    assert!(report.pass);
}

#[test]
fn semispectral_flags_inconsistent_certificates() {
    // An atom of modulus 1 carries |E|-weight while a (false, but not
    // probe-refutable) spectral radius certificate claims r(X) < 1.
    let h1 = IndexSet::HalfLine;
    let h2 = IndexSet::finite(0, 1).unwrap();
    let v = BandedOperator::embed(h1, h1, 2, 2, Arc::new(|_| cr(1.0))).unwrap();
    let w = BandedOperator::embed(h2, h1, 2, 1, Arc::new(|_| cr(1.0))).unwrap();
    let e = w
        .compose(&BandedOperator::diagonal_table(h2, vec![cr(0.5), cr(0.5)]).unwrap())
        .unwrap();
    let x = BandedOperator::diagonal_table(h2, vec![cr(1.0), cr(0.5)]).unwrap();
    let t = BOperator::new(v, e, x).unwrap();
    let facts = StructuralFacts::new().with(
        OperatorRole::X,
        StructuralCertificate::SpectralRadiusBound(0.9),
    );
    let report = verify_semispectral(&t, &facts, 16, 1e-10).unwrap();
    assert!(!report.pass);
    assert_eq!(report.circle_atoms_on_h22, vec![0]);
    assert!(report.inconsistency.is_some());
}

#[test]
fn nycuxa_adjoint_is_strongly_stable() {
    let inst = gallery::remark_nycuxa(cr(1.0), cr(0.5)).unwrap();
    let verdict = adjoint_strong_stability(&inst.operator, &inst.facts, &params()).unwrap();
    assert_eq!(
        verdict.conclusion,
        Conclusion::AdjointStronglyStable,
        "{verdict}"
    );
    for p in &verdict.premises {
        assert_eq!(p.status, PremiseStatus::Holds, "{}: {}", p.name, p.evidence);
    }
    // Probe decay: ||T*^n (e_k ⊕ 0)|| -> 0.
    let t = &inst.operator;
    for k in [0i128, 3, 8] {
        let h = BlockVector::from_top(SupportVector::basis(t.h1(), k).unwrap(), t.h2());
        let norms: Vec<f64> = t
            .adjoint_orbit(&h)
            .take(60)
            .map(|r| r.unwrap().norm())
            .collect();
        assert!(norms.last().unwrap() < &1e-6, "k={k}");
        for pair in norms.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "k={k}: not monotone");
        }
    }
}

#[test]
fn unitary_part_blocks_adjoint_stability() {
    // V = I has a full unitary part: a necessary condition fails.
    let (t, facts) = trivial_with_x(vec![cr(0.5), cr(0.25)]);
    let verdict = adjoint_strong_stability(&t, &facts, &params()).unwrap();
    assert_eq!(verdict.conclusion, Conclusion::NotAdjointStronglyStable);
    assert_eq!(
        verdict
            .premise("V completely non-unitary (necessary)")
            .unwrap()
            .status,
        PremiseStatus::Fails
    );
}

#[test]
fn unbounded_en_blocks_adjoint_stability() {
    let inst = gallery::b_isometry(1.0, gallery::BIsometryVariant::Quasi).unwrap();
    let verdict = adjoint_strong_stability(&inst.operator, &inst.facts, &params()).unwrap();
    assert_eq!(
        verdict.conclusion,
        Conclusion::NotAdjointStronglyStable,
        "{verdict}"
    );
    assert_eq!(
        verdict
            .premise("sup_n ||E_n|| finite (necessary)")
            .unwrap()
            .status,
        PremiseStatus::Fails
    );
}

#[test]
fn tttp_range_not_closed_then_closed() {
    let inst = gallery::tttp_example().unwrap();
    let r1 = range_closedness(&inst.operator, 1, &inst.facts, 48, 1e-10).unwrap();
    assert_eq!(r1.conclusion, Conclusion::RangeNotClosed, "{r1:?}");
    assert_eq!(r1.symbol_inf_nonzero, Some(0.0));
    let r2 = range_closedness(&inst.operator, 2, &inst.facts, 48, 1e-10).unwrap();
    assert_eq!(r2.conclusion, Conclusion::RangeClosed, "{r2:?}");
    assert!(r2.symbol_inf_nonzero.unwrap() >= 1.0 - 1e-12);
    assert!(!r1.n_independent);
    for report in [&r1, &r2] {
        assert!(report.isometric_residual <= 1e-10);
        // The four conditions carry one consistent status.
        let statuses: Vec<_> = report.conditions.iter().map(|c| c.status).collect();
        assert!(statuses.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn nitclyst_defect_is_the_identity() {
    // psi² + phi² = (1 - r) + r = 1, so |E|² + |X|² = I and ran T is closed.
    let measure = gallery::DiscreteMeasure::planar_lebesgue_radial(16).unwrap();
    let inst = gallery::nitclyst(&measure).unwrap();
    let r = range_closedness(&inst.operator, 1, &inst.facts, 32, 1e-10).unwrap();
    assert_eq!(r.conclusion, Conclusion::RangeClosed);
    assert!((r.symbol_inf_nonzero.unwrap() - 1.0).abs() < 1e-12);
    assert!(r.n_independent);
}

#[test]
fn zero_blocks_leave_the_isometry_range() {
    // E = 0, X = 0: ran T^n = ran V^n is closed.
    let h1 = IndexSet::HalfLine;
    let h2 = IndexSet::HalfLine;
    let t = BOperator::new(
        BandedOperator::shift(h1, 1),
        BandedOperator::zero(h2, h1),
        BandedOperator::zero(h2, h2),
    )
    .unwrap();
    let facts = StructuralFacts::new();
    let r = range_closedness(&t, 3, &facts, 24, 1e-10).unwrap();
    assert_eq!(r.conclusion, Conclusion::RangeClosed);
}

#[test]
fn isometric_equivalence_on_gallery() {
    for inst in gallery::all_instances().unwrap() {
        for n in [1u32, 2, 5] {
            let res = isometric_equivalence_residual(&inst.operator, n, 8).unwrap();
            assert!(res <= 1e-10, "{} n={n}: {res}", inst.name);
        }
    }
}

#[test]
fn crimmins_on_structured_pairs() {
    use crate::opcore::DenseMatrix;
    // Rank-deficient pair with overlapping column spaces.
    let mut a = DenseMatrix::zeros(4, 4);
    a.set(0, 0, cr(1.0));
    a.set(1, 0, cr(1.0));
    a.set(2, 1, C64::new(0.0, 2.0));
    let mut b = DenseMatrix::zeros(4, 4);
    b.set(0, 0, cr(3.0));
    b.set(3, 2, C64::new(0.5, 0.5));
    let res = crimmins_residual(&a, &b).unwrap();
    assert!(res <= 1e-10, "{res}");
}

#[test]
fn wot_verdicts_match_probe_limits_on_gallery() {
    // Soundness: a convergence verdict's limit agrees with probed pairings.
    use crate::analysis::{wot_probe, ProbeStatus};
    for inst in gallery::all_instances().unwrap() {
        let verdict = classify_wot(&inst.operator, &inst.facts, &params()).unwrap();
        if let Some(limit) = &verdict.limit {
            let probe = wot_probe(&inst.operator, &inst.wot_dictionary, 256, 1e-8).unwrap();
            for (report, (f, g)) in probe.probes.iter().zip(&inst.wot_dictionary) {
                if let ProbeStatus::Converged { limit: probed } = report.status {
                    let claimed = limit.pair(f, g).unwrap();
                    assert!(
                        (claimed - probed).norm() <= 1e-6,
                        "{}: {} vs {}",
                        inst.name,
                        claimed,
                        probed
                    );
                }
            }
        }
    }
}
