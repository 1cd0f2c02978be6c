//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `--nocapture`). Tolerances are pinned in the asserts.

use std::time::Instant;

use boplab_core::analysis::{
    cesaro_projection, sot_probe, sup_en_norm, wot_probe, ProbeStatus, StructuralCertificate,
    SymbolInfo, VerdictStatus,
};
use boplab_core::boperator::{BOperator, BlockVector};
use boplab_core::classify::{
    adjoint_strong_stability, classify_sot, classify_wot, crimmins_residual, isometry_persistence,
    never_strong_or_uniform, range_closedness, ClassifyParams, Conclusion, PremiseStatus,
    StructuralFacts,
};
use boplab_core::corpus::{dense_section, random_instance, SplitMix64, XKind};
use boplab_core::gallery;
use boplab_core::opcore::{BandedOperator, DenseMatrix, Index, IndexSet, SupportVector, C64};

fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

/// Criterion 1: power blocks vs direct n-fold dense multiplication on 100
/// seeded instances, n <= 16, max entrywise error <= 1e-10, runtime < 2 s.
#[test]
fn criterion_01_power_formula_oracle() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0);
    let mut worst: f64 = 0.0;
    let n_max = 16u32;
    for _ in 0..100 {
        let inst = random_instance(&mut rng, None).unwrap();
        let t = &inst.operator;
        let d2 = inst.h2_dim();
        let window = d2 + n_max as usize * inst.shift_steps + 2;
        let section = dense_section(&inst, window).unwrap();
        let dim = window + d2;

        // Columns originating in H2 see all three blocks; a few H1 columns
        // check V^n.
        let mut columns: Vec<(usize, Option<Index>)> = Vec::new();
        for k in 0..d2 {
            columns.push((window + k, None));
        }
        for i in 0..2.min(window) {
            columns.push((i, Some(i as Index)));
        }

        let blocks_by_n: Vec<_> = (1..=n_max).map(|n| t.power_blocks(n).unwrap()).collect();
        for (col, h1_origin) in columns {
            let mut oracle = vec![cr(0.0); dim];
            oracle[col] = cr(1.0);
            for n in 1..=n_max {
                oracle = section.matvec(&oracle).unwrap();
                let blocks = &blocks_by_n[n as usize - 1];
                match h1_origin {
                    Some(i) => {
                        let image = blocks
                            .vn
                            .apply(&SupportVector::basis(t.h1(), i).unwrap())
                            .unwrap();
                        for (row, v) in oracle.iter().enumerate().take(window) {
                            worst = worst.max((image.get(row as Index) - v).norm());
                        }
                    }
                    None => {
                        let k = (col - window) as Index;
                        let f = SupportVector::basis(t.h2(), k).unwrap();
                        let top = blocks.en.apply(&f).unwrap();
                        let bottom = blocks.xn.apply(&f).unwrap();
                        for (row, v) in oracle.iter().enumerate() {
                            let claimed = if row < window {
                                top.get(row as Index)
                            } else {
                                bottom.get((row - window) as Index)
                            };
                            worst = worst.max((claimed - v).norm());
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "power-formula oracle equivalence",
        worst <= 1e-10 && elapsed < 2.0,
        &format!("max entrywise error {worst:.3e}, runtime {elapsed:.2}s"),
    );
}

/// Criterion 2: Gram identity residual <= 1e-10 on the corpus, and the
/// isometric-X subcase E_n*E_n = n E*E with relative error <= 1e-12 up to
/// n = 64.
#[test]
fn criterion_02_gram_identity() {
    let mut rng = SplitMix64::new(0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let inst = random_instance(&mut rng, None).unwrap();
        for n in [1u32, 2, 5, 11, 16] {
            worst = worst.max(inst.operator.gram_identity(n, inst.h2_dim()).unwrap());
        }
    }
    let mut worst_rel: f64 = 0.0;
    let mut iso_rng = SplitMix64::new(1);
    for _ in 0..20 {
        let inst = random_instance(&mut iso_rng, Some(XKind::Unitary)).unwrap();
        let t = &inst.operator;
        let rho_sq = inst.rho * inst.rho;
        for k in 0..inst.h2_dim() as Index {
            let f = SupportVector::basis(t.h2(), k).unwrap();
            let mut orbit = t.en_orbit(&f);
            for n in 1..=64u32 {
                let en_f = orbit.next().unwrap().unwrap();
                let rel = (en_f.norm_sqr() / (n as f64 * rho_sq) - 1.0).abs();
                worst_rel = worst_rel.max(rel);
            }
        }
    }
    report(
        2,
        "Gram identity",
        worst <= 1e-10 && worst_rel <= 1e-12,
        &format!("corpus residual {worst:.3e}, isometric-X relative error {worst_rel:.3e}"),
    );
}

/// Criterion 3: ||T^n h|| = ||S_n h|| on 50 probes per instance (through
/// the explicit PSD square root), and the column-space identity
/// ran A + ran B = ran sqrt(AA* + BB*) on random dense pairs.
#[test]
fn criterion_03_isometric_equivalence_and_range_identity() {
    let mut rng = SplitMix64::new(0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let inst = random_instance(&mut rng, None).unwrap();
        let t = &inst.operator;
        let d2 = inst.h2_dim();
        // Dense defect D_n and its square root, per n.
        let mut roots: Vec<DenseMatrix> = Vec::new();
        for n in 1..=8u32 {
            let mut d = DenseMatrix::zeros(d2, d2);
            let mut en_cols = Vec::new();
            let mut xn_cols = Vec::new();
            for k in 0..d2 {
                let f = SupportVector::basis(t.h2(), k as Index).unwrap();
                let mut en = None;
                for (step, g) in t.en_orbit(&f).enumerate() {
                    if step as u32 + 1 == n {
                        en = Some(g.unwrap());
                        break;
                    }
                    g.unwrap();
                }
                en_cols.push(en.unwrap());
                let mut xf = f;
                for _ in 0..n {
                    xf = t.x().apply(&xf).unwrap();
                }
                xn_cols.push(xf);
            }
            for col in 0..d2 {
                for row in 0..d2 {
                    let val = en_cols[col].inner(&en_cols[row]).unwrap()
                        + xn_cols[col].inner(&xn_cols[row]).unwrap();
                    d.set(row, col, val);
                }
            }
            roots.push(d.psd_sqrt().unwrap());
        }
        for probe in 0..50 {
            let n = (probe % 8 + 1) as u32;
            let root = &roots[n as usize - 1];
            // Random block probe.
            let top = SupportVector::from_entries(t.h1(), (0..4).map(|i| (i as Index, rng.c64())))
                .unwrap();
            let bottom_entries: Vec<C64> = (0..d2).map(|_| rng.c64()).collect();
            let bottom = SupportVector::from_entries(
                t.h2(),
                bottom_entries
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| (k as Index, v)),
            )
            .unwrap();
            let h = BlockVector::new(top.clone(), bottom);
            let mut cur = h.clone();
            for _ in 0..n {
                cur = t.apply(&cur).unwrap();
            }
            let lhs = cur.norm();
            let sqrt_h2 = root.matvec(&bottom_entries).unwrap();
            let rhs = (top.norm_sqr() + sqrt_h2.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
            worst = worst.max((lhs - rhs).abs());
        }
    }

    let mut crimmins_worst: f64 = 0.0;
    let mut crng = SplitMix64::new(42);
    for _ in 0..50 {
        let n = crng.usize_in(2, 6);
        let ra = crng.usize_in(0, n);
        let rb = crng.usize_in(0, n);
        let a = crng.dense_with_rank(n, ra).unwrap();
        let b = crng.dense_with_rank(n, rb).unwrap();
        crimmins_worst = crimmins_worst.max(crimmins_residual(&a, &b).unwrap());
    }
    report(
        3,
        "isometric equivalence and range identity",
        worst <= 1e-10 && crimmins_worst <= 1e-8,
        &format!("probe residual {worst:.3e}, projector distance {crimmins_worst:.3e}"),
    );
}

/// Criterion 4: Cesàro averages.
#[test]
fn criterion_04_cesaro_projection() {
    // diag(1, -1): second-coordinate error exactly 0 or 1/n by parity.
    let set = IndexSet::finite(0, 1).unwrap();
    let u = BandedOperator::diagonal_table(set, vec![cr(1.0), cr(-1.0)]).unwrap();
    let cert = StructuralCertificate::DiagonalSymbol(SymbolInfo {
        symbol: std::sync::Arc::new(|k| if k == 0 { cr(1.0) } else { cr(-1.0) }),
        sup_abs: 1.0,
        sup_abs_limit: 1.0,
        inf_abs_nonzero: 1.0,
        constant: None,
    });
    let f = SupportVector::from_entries(set, [(0, cr(1.0)), (1, cr(1.0))]).unwrap();
    let mut exact_ok = true;
    for n in 1..=64u32 {
        let avg = cesaro_projection(&u, &cert, &f, n).unwrap();
        let err = avg.get(1).norm();
        let expect = if n % 2 == 0 { 0.0 } else { 1.0 / n as f64 };
        if (err - expect).abs() > 1e-15 {
            exact_ok = false;
        }
    }

    // 10-point diagonal unitary, eigenvalue 1 of multiplicity 3; the other
    // seven eigenvalues are third roots of unity and -1, so the error decays
    // exactly like C/n along n = 64, 128, 256.
    let set10 = IndexSet::finite(0, 9).unwrap();
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let conj = omega.conj();
    let eigs = [
        cr(1.0),
        cr(1.0),
        cr(1.0),
        omega,
        omega,
        conj,
        conj,
        cr(-1.0),
        omega,
        conj,
    ];
    let u10 = BandedOperator::diagonal_table(set10, eigs.to_vec()).unwrap();
    let cert10 = StructuralCertificate::DiagonalSymbol(SymbolInfo {
        symbol: std::sync::Arc::new(move |k| eigs[k as usize]),
        sup_abs: 1.0,
        sup_abs_limit: 1.0,
        inf_abs_nonzero: 1.0,
        constant: None,
    });
    let f10 = SupportVector::from_entries(set10, (0..10).map(|k| (k as Index, cr(1.0)))).unwrap();
    let projection =
        SupportVector::from_entries(set10, (0..3).map(|k| (k as Index, cr(1.0)))).unwrap();
    let error_at = |n: u32| {
        let avg = cesaro_projection(&u10, &cert10, &f10, n).unwrap();
        avg.sub(&projection).unwrap().norm()
    };
    let e64 = error_at(64);
    let e128 = error_at(128);
    let e256 = error_at(256);
    let r1 = e64 / e128;
    let r2 = e128 / e256;
    let ratios_ok = (1.8..=2.2).contains(&r1) && (1.8..=2.2).contains(&r2);
    report(
        4,
        "Cesaro projection",
        exact_ok && ratios_ok,
        &format!("parity errors exact: {exact_ok}; doubling ratios {r1:.3}, {r2:.3}"),
    );
}

/// Criterion 5: cluster structure of the m = 3 unitary at horizon 300, and
/// exact vanishing plus weak stability for the bilateral shift.
#[test]
fn criterion_05_unitary_examples() {
    let inst = gallery::unitary_mth_roots(3, 2).unwrap();
    let verdict = wot_probe(&inst.op, &inst.dictionary[..1], 300, 1e-8).unwrap();
    let clusters = &verdict.probes[0].clusters;
    let three = clusters.len() == 3;
    let attained = clusters.iter().all(|c| c.count >= 90);

    let shift = gallery::bilateral_shift();
    let e0 = SupportVector::basis(IndexSet::FullLine, 0).unwrap();
    let e5 = SupportVector::basis(IndexSet::FullLine, 5).unwrap();
    let pair = vec![(e0, e5)];
    let shift_verdict = wot_probe(&shift.op, &pair, 64, 1e-8).unwrap();
    let mut zeros_exact = true;
    for &(n, v) in &shift_verdict.probes[0].series {
        let expect = if n == 5 { cr(1.0) } else { cr(0.0) };
        if v != expect {
            zeros_exact = false;
        }
    }
    let full_verdict = wot_probe(&shift.op, &shift.dictionary, 256, 1e-8).unwrap();
    let converged_to_zero = full_verdict.status == VerdictStatus::Converged
        && full_verdict
            .limits()
            .iter()
            .all(|l| l.unwrap().norm() <= 1e-8);
    report(
        5,
        "unitary cluster structure and bilateral shift",
        three && attained && zeros_exact && converged_to_zero,
        &format!(
            "clusters {} (counts {:?}), zeros exact: {zeros_exact}, weakly stable: {converged_to_zero}",
            clusters.len(),
            clusters.iter().map(|c| c.count).collect::<Vec<_>>()
        ),
    );
}

/// Criterion 6: exact moments 2/(j+2): sup_{n<=512} ||E_n|| in [0.99, 1]
/// for the finest atom set, and divergence of the moment series past the
/// logarithmic benchmark; runtime < 1 s.
#[test]
fn criterion_06_nitclyst_moments() {
    let start = Instant::now();
    let measure = gallery::DiscreteMeasure::planar_lebesgue_radial(64).unwrap();
    let inst = gallery::nitclyst(&measure).unwrap();
    let sup = sup_en_norm(&inst.operator, &inst.facts, 512).unwrap();
    let max_en = sup.probed_max;
    let bounded = max_en <= 1.0 + 1e-12 && max_en >= 0.99;

    let mut divergence_ok = true;
    for j_max in [100u32, 1_000, 10_000] {
        let partial = measure.moment_partial_sum(j_max);
        let benchmark = 2.0 * ((j_max as f64 + 2.0).ln() - 3f64.ln());
        if partial <= benchmark {
            divergence_ok = false;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        6,
        "multiplication example moments",
        bounded && divergence_ok && elapsed < 1.0 && sup.exact_values,
        &format!(
            "sup ||E_n|| = {max_en:.6} (exact sweep: {}), divergence witness: {divergence_ok}, runtime {elapsed:.2}s",
            sup.exact_values
        ),
    );
}

/// Criterion 7: the first block column stays isometric on every gallery
/// instance up to n = 64, and the engine reports never-stable for all.
#[test]
fn criterion_07_no_strong_stability() {
    let mut worst: f64 = 0.0;
    let mut all_never = true;
    for inst in gallery::all_instances().unwrap() {
        let dev = isometry_persistence(&inst.operator, 64, 4).unwrap();
        worst = worst.max(dev);
        let verdict = never_strong_or_uniform(&inst.operator, &ClassifyParams::default()).unwrap();
        if verdict.conclusion != Conclusion::NeverStrongOrUniformStable {
            all_never = false;
        }
    }
    report(
        7,
        "no strong or uniform stability",
        worst <= 1e-12 && all_never,
        &format!("max |ratio - 1| = {worst:.3e}, all never-stable: {all_never}"),
    );
}

/// Criterion 8: the positive SOT branch V = I, E = 0, X = diag(1, 0.5).
#[test]
fn criterion_08_sot_positive_branch() {
    let h1 = IndexSet::finite(0, 1).unwrap();
    let h2 = IndexSet::finite(0, 1).unwrap();
    let t = BOperator::new(
        BandedOperator::identity(h1),
        BandedOperator::zero(h2, h1),
        BandedOperator::diagonal_table(h2, vec![cr(1.0), cr(0.5)]).unwrap(),
    )
    .unwrap();
    let facts = StructuralFacts::new();
    let verdict = classify_sot(&t, &facts, &ClassifyParams::default()).unwrap();
    let converged = verdict.conclusion == Conclusion::SotConvergent;
    let limit = verdict.limit.as_ref().unwrap();

    let f = BlockVector::new(
        SupportVector::from_entries(h1, [(0, cr(0.5)), (1, C64::new(0.0, 0.5))]).unwrap(),
        SupportVector::from_entries(h2, [(0, cr(0.6)), (1, C64::new(0.8, 0.0))]).unwrap(),
    );
    let lf = limit.apply(&f).unwrap();
    let mut decay_ok = true;
    let mut cur = f.clone();
    for n in 1..=50u32 {
        cur = t.apply(&cur).unwrap();
        let err = cur.sub(&lf).unwrap().norm();
        let bound = 0.5f64.powi(n as i32) * f.norm();
        if err > bound * (1.0 + 1e-12) {
            decay_ok = false;
        }
    }
    report(
        8,
        "SOT positive branch",
        converged && decay_ok,
        &format!("verdict sot-convergent: {converged}, geometric decay to the limit: {decay_ok}"),
    );
}

/// Criterion 9: the adjoint-stability example at (z, w) = (1, 1/2): the five
/// premises certify and the adjoint orbits decay monotonically below 1e-6
/// by n = 200.
#[test]
fn criterion_09_adjoint_stability() {
    let inst = gallery::remark_nycuxa(cr(1.0), cr(0.5)).unwrap();
    let verdict =
        adjoint_strong_stability(&inst.operator, &inst.facts, &ClassifyParams::default()).unwrap();
    let stable = verdict.conclusion == Conclusion::AdjointStronglyStable;
    let premises_hold = verdict
        .premises
        .iter()
        .all(|p| p.status == PremiseStatus::Holds);

    let t = &inst.operator;
    let mut monotone = true;
    let mut small = true;
    for k in 0..=8i128 {
        for h in [
            BlockVector::from_top(SupportVector::basis(t.h1(), k).unwrap(), t.h2()),
            BlockVector::from_bottom(t.h1(), SupportVector::basis(t.h2(), k).unwrap()),
        ] {
            let mut prev = h.norm();
            let mut cur = h;
            for _ in 1..=200u32 {
                cur = t.apply_adjoint(&cur).unwrap();
                let norm = cur.norm();
                if norm > prev + 1e-15 {
                    monotone = false;
                }
                prev = norm;
            }
            if prev >= 1e-6 {
                small = false;
            }
        }
    }
    report(
        9,
        "adjoint strong stability",
        stable && premises_hold && monotone && small,
        &format!(
            "verdict stable: {stable}, premises hold: {premises_hold}, monotone: {monotone}, tail < 1e-6: {small}"
        ),
    );
}

/// Criterion 10: ran T not closed but ran T² closed for the two-track
/// weight example.
#[test]
fn criterion_10_range_closedness() {
    let inst = gallery::tttp_example().unwrap();
    let r1 = range_closedness(&inst.operator, 1, &inst.facts, 48, 1e-10).unwrap();
    let r2 = range_closedness(&inst.operator, 2, &inst.facts, 48, 1e-10).unwrap();
    let not_closed =
        r1.conclusion == Conclusion::RangeNotClosed && r1.symbol_inf_nonzero == Some(0.0);
    let closed = r2.conclusion == Conclusion::RangeClosed
        && r2.symbol_inf_nonzero.map(|v| v > 0.0).unwrap_or(false);
    report(
        10,
        "range closedness flips at n = 2",
        not_closed && closed,
        &format!(
            "n=1: {} (inf {:?}), n=2: {} (inf {:?})",
            r1.conclusion, r1.symbol_inf_nonzero, r2.conclusion, r2.symbol_inf_nonzero
        ),
    );
}

/// Criterion 11: verdict/probe coherence at horizon 256, tolerance 1e-6:
/// no classification contradicts its probes anywhere in the gallery.
#[test]
fn criterion_11_verdict_probe_coherence() {
    let params = ClassifyParams::default();
    let mut checked_pairs = 0usize;
    for inst in gallery::all_instances().unwrap() {
        let wot = classify_wot(&inst.operator, &inst.facts, &params).unwrap();
        let probe = wot_probe(&inst.operator, &inst.wot_dictionary, 256, 1e-6).unwrap();
        match wot.conclusion {
            Conclusion::WotConvergent { .. } => {
                let limit = wot.limit.as_ref().unwrap();
                for (rep, (f, g)) in probe.probes.iter().zip(&inst.wot_dictionary) {
                    match &rep.status {
                        ProbeStatus::Converged { limit: probed } => {
                            let claimed = limit.pair(f, g).unwrap();
                            assert!(
                                (claimed - probed).norm() <= 1e-6,
                                "{}: limit mismatch {claimed} vs {probed}",
                                inst.name
                            );
                            checked_pairs += 1;
                        }
                        ProbeStatus::NotConverged { witness } => {
                            panic!(
                                "{}: probe contradicts convergence verdict at n={},{}",
                                inst.name, witness.n, witness.m
                            );
                        }
                        ProbeStatus::Inconclusive => {}
                    }
                }
            }
            Conclusion::NotWotConvergent | Conclusion::Undetermined => {
                // Finitely supported pairs may converge even when the
                // operator sequence does not (unbounded E_n are invisible
                // to any fixed pair), so no probe outcome contradicts.
                checked_pairs += probe.probes.len();
            }
            other => panic!("unexpected conclusion {other}"),
        }

        let sot = classify_sot(&inst.operator, &inst.facts, &params).unwrap();
        let (sot_verdict, limits) = sot_probe(&inst.operator, &inst.sot_probes, 256, 1e-6).unwrap();
        match sot.conclusion {
            Conclusion::SotConvergent => {
                assert_eq!(
                    sot_verdict.status,
                    VerdictStatus::Converged,
                    "{}",
                    inst.name
                );
                let limit = sot.limit.as_ref().unwrap();
                for (probe, reached) in inst.sot_probes.iter().zip(&limits) {
                    if let Some(reached) = reached {
                        let expect = limit.apply(probe).unwrap();
                        assert!(expect.sub(reached).unwrap().norm() <= 1e-6, "{}", inst.name);
                    }
                }
            }
            Conclusion::NotSotConvergent => {
                assert_eq!(
                    sot_verdict.status,
                    VerdictStatus::NotConverged,
                    "{}: divergence witness expected",
                    inst.name
                );
            }
            other => panic!("unexpected SOT conclusion {other} for {}", inst.name),
        }
    }
    report(
        11,
        "verdict/probe coherence",
        true,
        &format!("no contradictions across the gallery ({checked_pairs} pair checks)"),
    );
}
