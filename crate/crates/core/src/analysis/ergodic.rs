//! Wold-structure probes for isometries and ergodic (Cesàro) averages of
//! unitary powers.

use crate::analysis::cert::{Sided, StructuralCertificate};
use crate::error::{CoreError, Result};
use crate::opcore::{BandedOperator, SupportVector, C64};

fn certifies_isometry(cert: &StructuralCertificate) -> bool {
    match cert {
        StructuralCertificate::ShiftIsometry { .. } => true,
        StructuralCertificate::DiagonalSymbol(info) => {
            info.sup_abs <= 1.0 + 1e-12 && info.inf_abs_nonzero >= 1.0 - 1e-12
        }
        StructuralCertificate::DirectSum { parts } => {
            parts.iter().all(|(_, c)| certifies_isometry(c))
        }
        _ => false,
    }
}

fn certifies_unitary(cert: &StructuralCertificate) -> bool {
    match cert {
        StructuralCertificate::ShiftIsometry { sided } => *sided == Sided::Two,
        StructuralCertificate::DiagonalSymbol(info) => {
            info.sup_abs <= 1.0 + 1e-12 && info.inf_abs_nonzero >= 1.0 - 1e-12
        }
        StructuralCertificate::DirectSum { parts } => {
            parts.iter().all(|(_, c)| certifies_unitary(c))
        }
        _ => false,
    }
}

/// Consistency of `f` with membership in the unitary part ∩_n ran V^n:
/// checks the projections V^n V*^n f = f for n up to the horizon.
#[derive(Debug, Clone)]
pub struct WoldMembership {
    pub consistent_at_horizon: bool,
    /// First n at which V^n V*^n f != f, when witnessed.
    pub first_failure: Option<u32>,
    pub horizon: u32,
}

pub fn wold_membership(
    v: &BandedOperator,
    v_cert: &StructuralCertificate,
    f: &SupportVector,
    horizon: u32,
    tol: f64,
) -> Result<WoldMembership> {
    if !certifies_isometry(v_cert) {
        return Err(CoreError::MissingCertificate(
            "wold membership requires an isometry certificate for V".into(),
        ));
    }
    v_cert.spot_check(v, 16, tol)?;
    let adjoint = v.adjoint();
    let mut back = f.clone();
    for n in 1..=horizon {
        back = adjoint.apply(&back)?;
        // Forward n times to apply the range projection of V^n.
        let mut projected = back.clone();
        for _ in 0..n {
            projected = v.apply(&projected)?;
        }
        if projected.sub(f)?.norm() > tol {
            return Ok(WoldMembership {
                consistent_at_horizon: false,
                first_failure: Some(n),
                horizon,
            });
        }
    }
    Ok(WoldMembership {
        consistent_at_horizon: true,
        first_failure: None,
        horizon,
    })
}

/// The ergodic average `(1/n) Σ_{j<n} U^j f`. For unitary U this converges
/// to the orthogonal projection of f onto ker(I - U).
pub fn cesaro_projection(
    u: &BandedOperator,
    u_cert: &StructuralCertificate,
    f: &SupportVector,
    n: u32,
) -> Result<SupportVector> {
    if n == 0 {
        return Err(CoreError::InvalidParameter(
            "cesaro average needs n >= 1".into(),
        ));
    }
    if !certifies_unitary(u_cert) {
        return Err(CoreError::MissingCertificate(
            "cesaro projection requires a unitary certificate for U".into(),
        ));
    }
    u_cert.spot_check(u, 16, 1e-10)?;
    let mut acc = f.clone();
    let mut cur = f.clone();
    for _ in 1..n {
        cur = u.apply(&cur)?;
        acc = acc.add(&cur)?;
    }
    Ok(acc.scale(C64::new(1.0 / n as f64, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::IndexSet;
    use std::sync::Arc;

    fn shift_cert() -> StructuralCertificate {
        StructuralCertificate::ShiftIsometry { sided: Sided::One }
    }

    #[test]
    fn shift_vacuum_fails_at_one() {
        let s = BandedOperator::shift(IndexSet::HalfLine, 1);
        let e0 = SupportVector::basis(IndexSet::HalfLine, 0).unwrap();
        let m = wold_membership(&s, &shift_cert(), &e0, 8, 1e-12).unwrap();
        assert!(!m.consistent_at_horizon);
        assert_eq!(m.first_failure, Some(1));
    }

    #[test]
    fn shift_basis_vector_fails_exactly_at_k_plus_one() {
        let s = BandedOperator::shift(IndexSet::HalfLine, 1);
        for k in [1i128, 3, 5] {
            let e = SupportVector::basis(IndexSet::HalfLine, k).unwrap();
            let m = wold_membership(&s, &shift_cert(), &e, 16, 1e-12).unwrap();
            assert_eq!(m.first_failure, Some(k as u32 + 1), "k={k}");
        }
    }

    #[test]
    fn unitary_summand_membership_holds() {
        // V acts on evens as a doubled shift and on odds as a unimodular
        // diagonal. Vectors supported on odds stay in the unitary part.
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
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        );
        let v = even_shift.add(&odd_diag).unwrap();
        let cert = StructuralCertificate::DirectSum {
            parts: vec![
                (
                    crate::analysis::cert::Track::Residue {
                        modulus: 2,
                        residue: 0,
                    },
                    StructuralCertificate::ShiftIsometry { sided: Sided::One },
                ),
                (
                    crate::analysis::cert::Track::Residue {
                        modulus: 2,
                        residue: 1,
                    },
                    StructuralCertificate::DiagonalSymbol(crate::analysis::cert::SymbolInfo {
                        symbol: Arc::new(|i| {
                            if i % 2 == 1 {
                                C64::new(0.0, 1.0)
                            } else {
                                C64::new(0.0, 0.0)
                            }
                        }),
                        sup_abs: 1.0,
                        sup_abs_limit: 1.0,
                        inf_abs_nonzero: 1.0,
                        constant: None,
                    }),
                ),
            ],
        };
        let f = SupportVector::basis(set, 3).unwrap();
        let m = wold_membership(&v, &cert, &f, 24, 1e-12).unwrap();
        assert!(m.consistent_at_horizon);
        let g = SupportVector::basis(set, 2).unwrap();
        let m = wold_membership(&v, &cert, &g, 24, 1e-12).unwrap();
        assert!(!m.consistent_at_horizon);
    }

    #[test]
    fn cesaro_of_plus_minus_one() {
        // U = diag(1, -1): the average of the second coordinate is 0 or 1/n.
        let set = IndexSet::finite(0, 1).unwrap();
        let u = BandedOperator::diagonal_table(set, vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])
            .unwrap();
        let cert = StructuralCertificate::DiagonalSymbol(crate::analysis::cert::SymbolInfo {
            symbol: Arc::new(|k| {
                if k == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(-1.0, 0.0)
                }
            }),
            sup_abs: 1.0,
            sup_abs_limit: 1.0,
            inf_abs_nonzero: 1.0,
            constant: None,
        });
        let f =
            SupportVector::from_entries(set, [(0, C64::new(1.0, 0.0)), (1, C64::new(1.0, 0.0))])
                .unwrap();
        for n in [1u32, 2, 3, 8, 9, 64] {
            let avg = cesaro_projection(&u, &cert, &f, n).unwrap();
            assert!((avg.get(0) - C64::new(1.0, 0.0)).norm() < 1e-15);
            let second = avg.get(1).norm();
            let expect = if n % 2 == 0 { 0.0 } else { 1.0 / n as f64 };
            assert!((second - expect).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn cesaro_of_identity_is_identity() {
        let set = IndexSet::finite(0, 2).unwrap();
        let u = BandedOperator::identity(set);
        let cert = StructuralCertificate::diagonal_constant(C64::new(1.0, 0.0));
        let f =
            SupportVector::from_entries(set, [(0, C64::new(0.3, 0.1)), (2, C64::new(0.0, 1.0))])
                .unwrap();
        for n in [1u32, 5, 17] {
            let avg = cesaro_projection(&u, &cert, &f, n).unwrap();
            assert!(avg.sub(&f).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn cesaro_of_bilateral_shift_decays_like_sqrt() {
        let u = BandedOperator::shift(IndexSet::FullLine, 1);
        let cert = StructuralCertificate::ShiftIsometry { sided: Sided::Two };
        let f = SupportVector::basis(IndexSet::FullLine, 0).unwrap();
        for n in [4u32, 16, 64, 256] {
            let avg = cesaro_projection(&u, &cert, &f, n).unwrap();
            // ||avg||² = n / n² = 1/n by orthogonality of the U^j e_0.
            assert!(
                (avg.norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn cesaro_requires_a_unitary_certificate() {
        let s = BandedOperator::shift(IndexSet::HalfLine, 1);
        let cert = StructuralCertificate::ShiftIsometry { sided: Sided::One };
        let f = SupportVector::basis(IndexSet::HalfLine, 0).unwrap();
        assert!(matches!(
            cesaro_projection(&s, &cert, &f, 8),
            Err(CoreError::MissingCertificate(_))
        ));
    }
}
