//! Concrete instances: root-of-unity and rotation unitaries, the bilateral
//! shift, B-isometries (quasi and Brownian variants), the weakly stable
//! B-normal family T_z, the multiplication-operator example with exact
//! disk moments, the adjoint-stability example and the range-closedness
//! example where ran T² is closed but ran T is not.
//!
//! Orthogonality of ran V and ran E is realized by interleaving: V maps
//! basis vectors onto even indices, the embedding W onto odd indices.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::analysis::{OperatorRole, Sided, StructuralCertificate, StructuralFacts, SymbolInfo};
use crate::boperator::{BOperator, BlockVector};
use crate::error::{CoreError, Result};
use crate::opcore::{BandedOperator, CoefFn, Index, IndexSet, SupportVector, C64};

fn unit() -> CoefFn {
    Arc::new(|_| C64::new(1.0, 0.0))
}

fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A B-operator together with its certificates and canonical probes.
pub struct GalleryInstance {
    pub name: String,
    pub operator: BOperator,
    pub facts: StructuralFacts,
    pub wot_dictionary: Vec<(BlockVector, BlockVector)>,
    pub sot_probes: Vec<BlockVector>,
    pub notes: Vec<String>,
}

/// A bare unitary with its certificate and probe dictionary.
pub struct UnitaryInstance {
    pub name: String,
    pub op: BandedOperator,
    pub cert: StructuralCertificate,
    pub dictionary: Vec<(SupportVector, SupportVector)>,
}

/// Probability measure on the closed unit disk given by finitely many
/// atoms, optionally with an exact moment function j ↦ ∫ |z|^j dμ attached.
pub struct DiscreteMeasure {
    atoms: Vec<C64>,
    weights: Vec<f64>,
    moment_fn: Option<Arc<dyn Fn(u32) -> f64 + Send + Sync>>,
    circle_mass_zero: bool,
    declared_sup_radius: f64,
}

impl DiscreteMeasure {
    pub fn new(
        atoms: Vec<C64>,
        weights: Vec<f64>,
        circle_mass_zero: bool,
        declared_sup_radius: f64,
    ) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(CoreError::InvalidParameter(
                "measure needs matching nonempty atom and weight lists".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidParameter(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for (z, w) in atoms.iter().zip(&weights) {
            if *w <= 0.0 {
                return Err(CoreError::InvalidParameter(
                    "weights must be positive".into(),
                ));
            }
            if z.norm() > 1.0 + 1e-12 {
                return Err(CoreError::InvalidParameter(format!(
                    "atom {z} lies outside the closed disk"
                )));
            }
            if circle_mass_zero && (z.norm() - 1.0).abs() <= 1e-12 {
                return Err(CoreError::InvalidParameter(
                    "circle mass must vanish but an atom has modulus 1".into(),
                ));
            }
        }
        Ok(DiscreteMeasure {
            atoms,
            weights,
            moment_fn: None,
            circle_mass_zero,
            declared_sup_radius,
        })
    }

    /// Radial midpoint discretization of the normalized planar Lebesgue
    /// measure on the disk: ring i of width 1/n carries weight (2i+1)/n².
    /// The exact moment function ∫ |z|^j dμ = 2/(j+2) is attached.
    pub fn planar_lebesgue_radial(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(CoreError::InvalidParameter("need at least one atom".into()));
        }
        let n = n_atoms as f64;
        let atoms: Vec<C64> = (0..n_atoms).map(|i| cr((i as f64 + 0.5) / n)).collect();
        let weights: Vec<f64> = (0..n_atoms).map(|i| (2 * i + 1) as f64 / (n * n)).collect();
        let mut m = DiscreteMeasure::new(atoms, weights, true, 1.0)?;
        m.moment_fn = Some(Arc::new(|j| 2.0 / (j as f64 + 2.0)));
        Ok(m)
    }

    /// One atom at the origin with full mass.
    pub fn dirac_at_zero() -> Self {
        DiscreteMeasure {
            atoms: vec![cr(0.0)],
            weights: vec![1.0],
            moment_fn: None,
            circle_mass_zero: true,
            declared_sup_radius: 0.0,
        }
    }

    pub fn atoms(&self) -> &[C64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn circle_mass_zero(&self) -> bool {
        self.circle_mass_zero
    }

    pub fn declared_sup_radius(&self) -> f64 {
        self.declared_sup_radius
    }

    /// ∫ |z|^j dμ: the attached exact form when present, the atomic sum
    /// otherwise.
    pub fn moment(&self, j: u32) -> f64 {
        match &self.moment_fn {
            Some(f) => f(j),
            None => self.atomic_moment(j),
        }
    }

    /// Σ_k w_k |z_k|^j, always from the atoms.
    pub fn atomic_moment(&self, j: u32) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * z.norm().powi(j as i32))
            .sum()
    }

    /// Σ_{j<=j_max} moment(j).
    pub fn moment_partial_sum(&self, j_max: u32) -> f64 {
        (0..=j_max).map(|j| self.moment(j)).sum()
    }

    pub fn has_exact_moments(&self) -> bool {
        self.moment_fn.is_some()
    }
}

/// The standard completely non-unitary interleaving isometry e_k ↦ e_{2k+2}
/// on ℓ²(ℕ); its range misses every odd index and e_0.
fn interleaving_v(h1: IndexSet) -> Result<BandedOperator> {
    BandedOperator::embed(h1, h1, 2, 2, unit())
}

/// The companion embedding e_k ↦ e_{2k+1} with range orthogonal to the one
/// above.
fn interleaving_w(h2: IndexSet, h1: IndexSet) -> Result<BandedOperator> {
    BandedOperator::embed(h2, h1, 2, 1, unit())
}

fn one_sided_cert() -> StructuralCertificate {
    StructuralCertificate::ShiftIsometry { sided: Sided::One }
}

fn constant_symbol(value: C64) -> SymbolInfo {
    SymbolInfo {
        symbol: Arc::new(move |_| value),
        sup_abs: value.norm(),
        sup_abs_limit: value.norm(),
        inf_abs_nonzero: value.norm(),
        constant: Some(value),
    }
}

fn block_pairs(
    t: &BOperator,
    h1_count: usize,
    h2_count: usize,
) -> Result<Vec<(BlockVector, BlockVector)>> {
    let mut dict = Vec::new();
    let h1_idx = t.h1().probe_indices(h1_count);
    let h2_idx = t.h2().probe_indices(h2_count);
    for &i in &h1_idx {
        for &j in &h1_idx {
            dict.push((
                BlockVector::from_top(SupportVector::basis(t.h1(), i)?, t.h2()),
                BlockVector::from_top(SupportVector::basis(t.h1(), j)?, t.h2()),
            ));
        }
    }
    for &k in &h2_idx {
        for &l in &h2_idx {
            dict.push((
                BlockVector::from_bottom(t.h1(), SupportVector::basis(t.h2(), k)?),
                BlockVector::from_bottom(t.h1(), SupportVector::basis(t.h2(), l)?),
            ));
        }
    }
    // Cross pairings see the off-diagonal block E_n.
    for &k in h2_idx.iter().take(2) {
        for &i in h1_idx.iter().take(3) {
            dict.push((
                BlockVector::from_bottom(t.h1(), SupportVector::basis(t.h2(), k)?),
                BlockVector::from_top(SupportVector::basis(t.h1(), i)?, t.h2()),
            ));
        }
    }
    Ok(dict)
}

fn block_probes(t: &BOperator, count: usize) -> Result<Vec<BlockVector>> {
    let mut probes = Vec::new();
    for i in t.h1().probe_indices(count) {
        probes.push(BlockVector::from_top(
            SupportVector::basis(t.h1(), i)?,
            t.h2(),
        ));
    }
    for k in t.h2().probe_indices(count) {
        probes.push(BlockVector::from_bottom(
            t.h1(),
            SupportVector::basis(t.h2(), k)?,
        ));
    }
    Ok(probes)
}

/// Diagonal unitary whose spectrum is the m-th roots of unity, each with
/// the given multiplicity; index j carries the root exp(2πi (j mod m) / m).
pub fn unitary_mth_roots(m: u32, multiplicity: u32) -> Result<UnitaryInstance> {
    if m == 0 || multiplicity == 0 {
        return Err(CoreError::InvalidParameter(
            "m and multiplicity must be >= 1".into(),
        ));
    }
    let dim = (m * multiplicity) as Index;
    let set = IndexSet::finite(0, dim - 1)?;
    let m_idx = m as Index;
    let symbol: CoefFn = Arc::new(move |j| {
        let root = (j.rem_euclid(m_idx)) as f64;
        let angle = 2.0 * PI * root / m_idx as f64;
        C64::new(angle.cos(), angle.sin())
    });
    let op = BandedOperator::diagonal(set, symbol.clone());
    let cert = StructuralCertificate::DiagonalSymbol(SymbolInfo {
        symbol,
        sup_abs: 1.0,
        sup_abs_limit: 1.0,
        inf_abs_nonzero: 1.0,
        constant: if m == 1 { Some(cr(1.0)) } else { None },
    });
    // Probe on an eigenvector of a primitive root (index 1 when m >= 2),
    // so the pairing cycles through all m values.
    let probe_index = if m >= 2 { 1 } else { 0 };
    let f = SupportVector::basis(set, probe_index)?;
    let mut dictionary = vec![(f.clone(), f)];
    // An eigenvector-sum probe mixes all roots.
    let sum = SupportVector::from_entries(set, (0..m_idx.min(dim)).map(|j| (j, cr(1.0))))?;
    dictionary.push((sum.clone(), sum));
    Ok(UnitaryInstance {
        name: format!("mth-roots(m={m},mult={multiplicity})"),
        op,
        cert,
        dictionary,
    })
}

/// Scalar unitary e^{2πiθ} I; for irrational θ the pairing values fill the
/// circle densely.
pub fn irrational_rotation(theta: f64) -> Result<UnitaryInstance> {
    let set = IndexSet::HalfLine;
    let angle = 2.0 * PI * theta;
    let z = C64::new(angle.cos(), angle.sin());
    let op = BandedOperator::diagonal(set, Arc::new(move |_| z));
    let cert = StructuralCertificate::DiagonalSymbol(constant_symbol(z));
    let f = SupportVector::basis(set, 0)?;
    Ok(UnitaryInstance {
        name: format!("irrational-rotation(theta={theta})"),
        op,
        cert,
        dictionary: vec![(f.clone(), f)],
    })
}

/// The two-sided shift: the multiplication unitary by the independent
/// variable in its Fourier model; weakly stable.
pub fn bilateral_shift() -> UnitaryInstance {
    let set = IndexSet::FullLine;
    let op = BandedOperator::shift(set, 1);
    let cert = StructuralCertificate::ShiftIsometry { sided: Sided::Two };
    let mut dictionary = Vec::new();
    let e0 = SupportVector::basis(set, 0).unwrap();
    let e5 = SupportVector::basis(set, 5).unwrap();
    let em2 = SupportVector::basis(set, -2).unwrap();
    dictionary.push((e0.clone(), e0.clone()));
    dictionary.push((e0.clone(), e5));
    dictionary.push((em2, e0));
    UnitaryInstance {
        name: "bilateral-shift".into(),
        op,
        cert,
        dictionary,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BIsometryVariant {
    /// V, X one-sided shift isometries on half-lines.
    Quasi,
    /// X the bilateral shift (unitary); full-line spaces with two-branch
    /// completely non-unitary V.
    Brownian,
}

/// B-isometry with E = σW for an isometric embedding W into (ran V)^⊥;
/// the Gram identity gives E_n*E_n = n σ² I.
pub fn b_isometry(sigma: f64, variant: BIsometryVariant) -> Result<GalleryInstance> {
    if sigma < 0.0 {
        return Err(CoreError::InvalidParameter("sigma must be >= 0".into()));
    }
    let (v, w, x, x_cert) = match variant {
        BIsometryVariant::Quasi => {
            let h1 = IndexSet::HalfLine;
            let h2 = IndexSet::HalfLine;
            (
                interleaving_v(h1)?,
                interleaving_w(h2, h1)?,
                BandedOperator::shift(h2, 1),
                one_sided_cert(),
            )
        }
        BIsometryVariant::Brownian => {
            let h1 = IndexSet::FullLine;
            let h2 = IndexSet::FullLine;
            let even_branch = BandedOperator::embed(
                h1,
                h1,
                2,
                2,
                Arc::new(|k| if k >= 0 { cr(1.0) } else { cr(0.0) }),
            )?;
            let odd_branch = BandedOperator::embed(
                h1,
                h1,
                2,
                -1,
                Arc::new(|k| if k < 0 { cr(1.0) } else { cr(0.0) }),
            )?;
            let v = even_branch.add(&odd_branch)?;
            let w_pos = BandedOperator::embed(
                h2,
                h1,
                2,
                1,
                Arc::new(|k| if k >= 0 { cr(1.0) } else { cr(0.0) }),
            )?;
            let w_neg = BandedOperator::embed(
                h2,
                h1,
                2,
                0,
                Arc::new(|k| if k < 0 { cr(1.0) } else { cr(0.0) }),
            )?;
            let w = w_pos.add(&w_neg)?;
            (
                v,
                w,
                BandedOperator::shift(h2, 1),
                StructuralCertificate::ShiftIsometry { sided: Sided::Two },
            )
        }
    };
    let e = w.scale(cr(sigma));
    let t = BOperator::new(v, e, x)?;
    let mut facts = StructuralFacts::new()
        .with(OperatorRole::V, one_sided_cert())
        .with(OperatorRole::X, x_cert)
        .with(OperatorRole::E, StructuralCertificate::NormBound(sigma))
        .with(
            OperatorRole::ModulusE,
            StructuralCertificate::DiagonalSymbol(constant_symbol(cr(sigma))),
        );
    if sigma > 0.0 {
        facts.push(OperatorRole::E, StructuralCertificate::Injective);
    }
    let wot_dictionary = block_pairs(&t, 3, 3)?;
    let sot_probes = block_probes(&t, 2)?;
    let notes = vec![
        format!("covariance sigma = {sigma}; Gram identity gives ||E_n||² = n sigma²"),
        "weakly stable exactly when E = 0 and the unitary parts are weakly stable".into(),
    ];
    Ok(GalleryInstance {
        name: format!("b-isometry(sigma={sigma},{variant:?})"),
        operator: t,
        facts,
        wot_dictionary,
        sot_probes,
        notes,
    })
}

/// The weakly stable B-normal family T_z = [V E; 0 zX] with V completely
/// non-unitary, E an isometric embedding (injective, closed range) and X a
/// diagonal unitary; requires 0 < |z| < 1.
pub fn b_normal_tz(z: C64) -> Result<GalleryInstance> {
    if z.norm() == 0.0 || z.norm() >= 1.0 {
        return Err(CoreError::InvalidParameter(format!(
            "T_z needs 0 < |z| < 1, got |z| = {}",
            z.norm()
        )));
    }
    let h1 = IndexSet::HalfLine;
    let h2 = IndexSet::HalfLine;
    let v = interleaving_v(h1)?;
    let e = interleaving_w(h2, h1)?;
    // Diagonal unitary with golden-ratio phases.
    let theta = (5f64.sqrt() - 1.0) / 2.0;
    let unitary_symbol: CoefFn = Arc::new(move |k| {
        let angle = 2.0 * PI * theta * k as f64;
        C64::new(angle.cos(), angle.sin())
    });
    let scaled_symbol: CoefFn = {
        let u = unitary_symbol.clone();
        Arc::new(move |k| z * u(k))
    };
    let x = BandedOperator::diagonal(h2, scaled_symbol.clone());
    let t = BOperator::new(v, e, x)?;
    let facts = StructuralFacts::new()
        .with(OperatorRole::V, one_sided_cert())
        .with(
            OperatorRole::X,
            StructuralCertificate::DiagonalSymbol(SymbolInfo {
                symbol: scaled_symbol,
                sup_abs: z.norm(),
                sup_abs_limit: z.norm(),
                inf_abs_nonzero: z.norm(),
                constant: None,
            }),
        )
        .with(OperatorRole::X, StructuralCertificate::Normal)
        .with(OperatorRole::X, StructuralCertificate::NormBound(z.norm()))
        .with(
            OperatorRole::X,
            StructuralCertificate::SpectralRadiusBound(z.norm()),
        )
        .with(OperatorRole::E, StructuralCertificate::NormBound(1.0))
        .with(OperatorRole::E, StructuralCertificate::Injective)
        .with(
            OperatorRole::ModulusE,
            StructuralCertificate::DiagonalSymbol(constant_symbol(cr(1.0))),
        );
    let wot_dictionary = block_pairs(&t, 3, 3)?;
    let sot_probes = block_probes(&t, 2)?;
    Ok(GalleryInstance {
        name: format!("b-normal-tz(z={z})"),
        operator: t,
        facts,
        wot_dictionary,
        sot_probes,
        notes: vec![
            "every power is again a B-normal operator of the same shape".into(),
            "weakly stable: trivial unitary part, ||zX|| < 1, E injective".into(),
        ],
    })
}

/// The multiplication-operator example over a discrete measure: X acts by
/// |z_k|^{1/2}, |E| by (1 - |z_k|)^{1/2}, so E_n*E_n acts by 1 - |z_k|^n
/// and sup_n ||E_n|| <= 1, while r(X) approaches 1 as atoms approach the
/// circle.
pub fn nitclyst(measure: &DiscreteMeasure) -> Result<GalleryInstance> {
    if !measure.circle_mass_zero() {
        return Err(CoreError::InvalidParameter(
            "the construction needs vanishing circle mass".into(),
        ));
    }
    let m = measure.atoms().len();
    let h2 = IndexSet::finite(0, m as Index - 1)?;
    let h1 = IndexSet::HalfLine;
    let radii: Arc<Vec<f64>> = Arc::new(measure.atoms().iter().map(|z| z.norm()).collect());
    let phi: CoefFn = {
        let radii = radii.clone();
        Arc::new(move |k| {
            if k >= 0 && (k as usize) < radii.len() {
                cr(radii[k as usize].sqrt())
            } else {
                cr(0.0)
            }
        })
    };
    let psi: CoefFn = {
        let radii = radii.clone();
        Arc::new(move |k| {
            if k >= 0 && (k as usize) < radii.len() {
                cr((1.0 - radii[k as usize]).sqrt())
            } else {
                cr(0.0)
            }
        })
    };
    let v = interleaving_v(h1)?;
    let w = interleaving_w(h2, h1)?;
    let e = w.compose(&BandedOperator::diagonal(h2, psi.clone()))?;
    let x = BandedOperator::diagonal(h2, phi.clone());
    let t = BOperator::new(v, e, x)?;

    let sup_radius = radii.iter().cloned().fold(0.0f64, f64::max);
    let declared_sup = measure.declared_sup_radius();
    let facts = StructuralFacts::new()
        .with(OperatorRole::V, one_sided_cert())
        .with(
            OperatorRole::X,
            StructuralCertificate::DiagonalSymbol(SymbolInfo {
                symbol: phi,
                sup_abs: sup_radius.sqrt(),
                // Declared limit: atoms approach the circle.
                sup_abs_limit: declared_sup.sqrt(),
                inf_abs_nonzero: radii
                    .iter()
                    .cloned()
                    .filter(|r| *r > 0.0)
                    .fold(1.0f64, f64::min)
                    .sqrt(),
                constant: None,
            }),
        )
        .with(OperatorRole::X, StructuralCertificate::Normal)
        .with(OperatorRole::X, StructuralCertificate::NormBound(1.0))
        .with(OperatorRole::E, StructuralCertificate::Injective)
        .with(
            OperatorRole::ModulusE,
            StructuralCertificate::DiagonalSymbol(SymbolInfo {
                symbol: psi,
                sup_abs: radii
                    .iter()
                    .map(|r| (1.0 - r).sqrt())
                    .fold(0.0f64, f64::max),
                sup_abs_limit: 1.0,
                // In the declared limit the modulus is not bounded below on
                // its support: ran |E| is not closed there.
                inf_abs_nonzero: (1.0 - declared_sup).max(0.0).sqrt(),
                constant: None,
            }),
        );
    let wot_dictionary = block_pairs(&t, 3, 3.min(m))?;
    let sot_probes = block_probes(&t, 2)?;
    Ok(GalleryInstance {
        name: format!("nitclyst(atoms={m})"),
        operator: t,
        facts,
        wot_dictionary,
        sot_probes,
        notes: vec![
            format!(
                "finite truncation: r(X) = {:.6}; declared limit 1",
                sup_radius.sqrt()
            ),
            "ran |E| closed at this truncation, non-closed in the declared limit".into(),
            "(E_n* E_n f)(z_k) = (1 - |z_k|^n) f(z_k), so sup_n ||E_n|| <= 1".into(),
        ],
    })
}

/// Adjoint-stability example: E = z W₁ and X = w W₂ built from completely
/// non-unitary shift isometries, 0 < |w| < 1, z != 0. All premises of the
/// adjoint-stability rule hold.
pub fn remark_nycuxa(z: C64, w: C64) -> Result<GalleryInstance> {
    if z.norm() == 0.0 {
        return Err(CoreError::InvalidParameter("z must be nonzero".into()));
    }
    if w.norm() == 0.0 || w.norm() >= 1.0 {
        return Err(CoreError::InvalidParameter(
            "w must satisfy 0 < |w| < 1".into(),
        ));
    }
    let h1 = IndexSet::HalfLine;
    let h2 = IndexSet::HalfLine;
    let v = interleaving_v(h1)?;
    let e = interleaving_w(h2, h1)?.scale(z);
    let x = BandedOperator::shift(h2, 1).scale(w);
    let t = BOperator::new(v, e, x)?;
    let facts = StructuralFacts::new()
        .with(OperatorRole::V, one_sided_cert())
        .with(OperatorRole::X, StructuralCertificate::NormBound(w.norm()))
        .with(
            OperatorRole::X,
            StructuralCertificate::SpectralRadiusBound(w.norm()),
        )
        .with(
            OperatorRole::X,
            StructuralCertificate::PowerBounded { bound: 1.0 },
        )
        .with(OperatorRole::X, StructuralCertificate::Injective)
        .with(
            OperatorRole::X,
            StructuralCertificate::Analytic {
                justification: "nonzero multiple of a completely non-unitary shift".into(),
            },
        )
        .with(OperatorRole::E, StructuralCertificate::NormBound(z.norm()))
        .with(OperatorRole::E, StructuralCertificate::Injective)
        .with(
            OperatorRole::ModulusE,
            StructuralCertificate::DiagonalSymbol(constant_symbol(cr(z.norm()))),
        )
        .with(
            OperatorRole::ModulusX,
            StructuralCertificate::DiagonalSymbol(constant_symbol(cr(w.norm()))),
        );
    let wot_dictionary = block_pairs(&t, 3, 3)?;
    let sot_probes = block_probes(&t, 2)?;
    Ok(GalleryInstance {
        name: format!("remark-nycuxa(z={z},w={w})"),
        operator: t,
        facts,
        wot_dictionary,
        sot_probes,
        notes: vec!["not strongly stable (no B-operator is), yet T* is strongly stable".into()],
    })
}

/// Range-closedness example on four interleaved tracks of ℓ²(ℕ)
/// (k mod 4 selects the track): E is the identity on track 0, X maps track
/// 3 into track 1 with weights 1/(m+1) -> 0, V fills tracks 2 and 3.
/// ran T is not closed but ran T² is.
pub fn tttp_example() -> Result<GalleryInstance> {
    let h = IndexSet::HalfLine;
    let even_branch = BandedOperator::embed(
        h,
        h,
        2,
        2,
        Arc::new(|k| if k % 2 == 0 { cr(1.0) } else { cr(0.0) }),
    )?;
    let odd_branch = BandedOperator::embed(
        h,
        h,
        2,
        1,
        Arc::new(|k| if k % 2 == 1 { cr(1.0) } else { cr(0.0) }),
    )?;
    let v = even_branch.add(&odd_branch)?;
    let e = BandedOperator::diagonal(h, Arc::new(|k| if k % 4 == 0 { cr(1.0) } else { cr(0.0) }));
    let weight = |k: Index| {
        let m = (k - 3) / 4;
        1.0 / (m as f64 + 1.0)
    };
    let x = BandedOperator::new(
        h,
        h,
        vec![crate::opcore::Band {
            p: 1,
            r: 1,
            d: -2,
            coef: Arc::new(move |k| if k % 4 == 3 { cr(weight(k)) } else { cr(0.0) }),
        }],
    )?;
    let t = BOperator::new(v, e, x)?;
    let modulus_e: CoefFn = Arc::new(|k| if k % 4 == 0 { cr(1.0) } else { cr(0.0) });
    let modulus_x: CoefFn = Arc::new(move |k| if k % 4 == 3 { cr(weight(k)) } else { cr(0.0) });
    let facts = StructuralFacts::new()
        .with(OperatorRole::V, one_sided_cert())
        .with(
            OperatorRole::X,
            StructuralCertificate::Nilpotent { degree: 2 },
        )
        .with(
            OperatorRole::X,
            StructuralCertificate::SpectralRadiusBound(0.0),
        )
        .with(OperatorRole::X, StructuralCertificate::NormBound(1.0))
        .with(
            OperatorRole::ModulusE,
            StructuralCertificate::DiagonalSymbol(SymbolInfo {
                symbol: modulus_e,
                sup_abs: 1.0,
                sup_abs_limit: 1.0,
                inf_abs_nonzero: 1.0,
                constant: None,
            }),
        )
        .with(
            OperatorRole::ModulusX,
            StructuralCertificate::DiagonalSymbol(SymbolInfo {
                symbol: modulus_x,
                sup_abs: 1.0,
                sup_abs_limit: 1.0,
                // The weights decay to zero: ran |X| is not closed.
                inf_abs_nonzero: 0.0,
                constant: None,
            }),
        );
    let wot_dictionary = block_pairs(&t, 3, 3)?;
    let sot_probes = block_probes(&t, 2)?;
    Ok(GalleryInstance {
        name: "tttp-example".into(),
        operator: t,
        facts,
        wot_dictionary,
        sot_probes,
        notes: vec!["ran T is not closed (defect weights decay to 0), ran T² is closed".into()],
    })
}

/// All B-operator gallery instances at default parameters.
pub fn all_instances() -> Result<Vec<GalleryInstance>> {
    Ok(vec![
        b_isometry(1.0, BIsometryVariant::Quasi)?,
        b_isometry(0.75, BIsometryVariant::Brownian)?,
        b_isometry(0.0, BIsometryVariant::Quasi)?,
        b_normal_tz(cr(0.5))?,
        nitclyst(&DiscreteMeasure::planar_lebesgue_radial(32)?)?,
        nitclyst(&DiscreteMeasure::dirac_at_zero())?,
        remark_nycuxa(cr(1.0), cr(0.5))?,
        tttp_example()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ALGEBRA_TOL, VALIDATION_HORIZON};

    #[test]
    fn every_instance_validates_at_horizon_64() {
        for inst in all_instances().unwrap() {
            let report = inst.operator.validate(VALIDATION_HORIZON, 1e-12).unwrap();
            assert!(report.passed(), "{}: {report}", inst.name);
            assert!(report.worst_residual() <= 1e-12, "{}", inst.name);
        }
    }

    #[test]
    fn every_instance_facts_spot_check() {
        for inst in all_instances().unwrap() {
            inst.facts
                .verify(&inst.operator, 16, ALGEBRA_TOL)
                .unwrap_or_else(|e| panic!("{}: {e}", inst.name));
        }
    }

    #[test]
    fn mth_roots_structure() {
        let inst = unitary_mth_roots(3, 2).unwrap();
        // Eigenvalues cycle through the three cube roots of unity.
        let e1 = SupportVector::basis(inst.op.domain(), 1).unwrap();
        let image = inst.op.apply(&e1).unwrap();
        let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
        assert!((image.get(1) - omega).norm() < 1e-12);
        inst.cert.spot_check(&inst.op, 8, 1e-10).unwrap();
        // m = 1 degenerates to the identity.
        let id = unitary_mth_roots(1, 4).unwrap();
        for k in 0..4 {
            let e = SupportVector::basis(id.op.domain(), k).unwrap();
            assert_eq!(id.op.apply(&e).unwrap().get(k), cr(1.0));
        }
    }

    #[test]
    fn rational_rotation_half_gives_two_clusters() {
        use crate::analysis::{wot_probe, VerdictStatus};
        let inst = irrational_rotation(0.5).unwrap();
        let verdict = wot_probe(&inst.op, &inst.dictionary, 100, 1e-8).unwrap();
        assert_eq!(verdict.status, VerdictStatus::NotConverged);
        assert_eq!(verdict.probes[0].clusters.len(), 2);
    }

    #[test]
    fn golden_rotation_fills_the_circle() {
        use crate::analysis::wot_probe;
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        let inst = irrational_rotation(theta).unwrap();
        let verdict = wot_probe(&inst.op, &inst.dictionary, 500, 1e-8).unwrap();
        // Cluster count grows with the horizon; far more than 50 distinct
        // values at horizon 500.
        assert!(verdict.probes[0].clusters.len() >= 50);
    }

    #[test]
    fn brownian_gram_identity_is_n_sigma_squared() {
        let inst = b_isometry(1.0, BIsometryVariant::Quasi).unwrap();
        let t = &inst.operator;
        let f = SupportVector::basis(t.h2(), 0).unwrap();
        for n in [1u32, 2, 7, 33, 64] {
            let val = t.en_inner(&f, &f, n).unwrap();
            assert!((val.re - n as f64).abs() < 1e-12, "n={n}: {val}");
            assert!(val.im.abs() < 1e-15);
        }
        let cov = t.covariance(&inst.facts).unwrap();
        assert!(cov.exact);
        assert!((cov.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brownian_variant_validates_and_grows() {
        let inst = b_isometry(0.75, BIsometryVariant::Brownian).unwrap();
        let t = &inst.operator;
        let report = t.validate(32, 1e-12).unwrap();
        assert!(report.passed(), "{report}");
        let f = SupportVector::basis(t.h2(), -1).unwrap();
        for n in [1u32, 4, 16] {
            let val = t.en_inner(&f, &f, n).unwrap();
            assert!((val.re - 0.5625 * n as f64).abs() < 1e-12, "n={n}");
        }
        let cov = t.covariance(&inst.facts).unwrap();
        assert!((cov.value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn covariance_requires_isometric_x() {
        let inst = b_normal_tz(cr(0.5)).unwrap();
        assert!(matches!(
            inst.operator.covariance(&inst.facts),
            Err(CoreError::MissingCertificate(_))
        ));
    }

    #[test]
    fn nitclyst_gram_action() {
        let measure = DiscreteMeasure::planar_lebesgue_radial(16).unwrap();
        let inst = nitclyst(&measure).unwrap();
        let t = &inst.operator;
        for (k, z) in measure.atoms().iter().enumerate() {
            let f = SupportVector::basis(t.h2(), k as Index).unwrap();
            for n in [1u32, 5, 32] {
                let val = t.en_inner(&f, &f, n).unwrap().re;
                let expect = 1.0 - z.norm().powi(n as i32);
                assert!((val - expect).abs() < 1e-12, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn nitclyst_single_atom_at_zero() {
        let inst = nitclyst(&DiscreteMeasure::dirac_at_zero()).unwrap();
        let t = &inst.operator;
        // X = 0 and E = W: sup_n ||E_n|| = 1.
        let f = SupportVector::basis(t.h2(), 0).unwrap();
        for n in [1u32, 2, 9] {
            assert!((t.en_inner(&f, &f, n).unwrap().re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn planar_lebesgue_moments_match_quadrature() {
        // Independent oracle: Simpson quadrature of ∫₀¹ r^j 2r dr.
        let simpson = |j: u32| {
            let steps = 4000usize;
            let h = 1.0 / steps as f64;
            let f = |r: f64| 2.0 * r.powi(j as i32 + 1);
            let mut acc = f(0.0) + f(1.0);
            for i in 1..steps {
                let r = i as f64 * h;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(r);
            }
            acc * h / 3.0
        };
        let measure = DiscreteMeasure::planar_lebesgue_radial(64).unwrap();
        for j in [0u32, 1, 2, 7, 19] {
            let exact = measure.moment(j);
            assert!((exact - 2.0 / (j as f64 + 2.0)).abs() < 1e-15);
            assert!((exact - simpson(j)).abs() < 1e-9, "j={j}");
            // Atomic cross-check approximates the exact moment.
            assert!((measure.atomic_moment(j) - exact).abs() < 0.02, "j={j}");
        }
    }

    #[test]
    fn measure_invariants_enforced() {
        assert!(DiscreteMeasure::new(vec![cr(0.5)], vec![0.5], true, 1.0).is_err());
        assert!(DiscreteMeasure::new(vec![cr(1.5)], vec![1.0], false, 1.0).is_err());
        assert!(DiscreteMeasure::new(vec![cr(1.0)], vec![1.0], true, 1.0).is_err());
        assert!(DiscreteMeasure::new(vec![cr(1.0)], vec![1.0], false, 1.0).is_ok());
    }

    #[test]
    fn nycuxa_preconditions() {
        assert!(remark_nycuxa(cr(0.0), cr(0.5)).is_err());
        assert!(remark_nycuxa(cr(1.0), cr(0.0)).is_err());
        assert!(remark_nycuxa(cr(1.0), cr(1.0)).is_err());
        assert!(remark_nycuxa(cr(1.0), cr(0.5)).is_ok());
    }

    #[test]
    fn tz_preconditions() {
        assert!(b_normal_tz(cr(0.0)).is_err());
        assert!(b_normal_tz(cr(1.0)).is_err());
        assert!(b_normal_tz(C64::new(0.3, 0.4)).is_ok());
    }

    #[test]
    fn tttp_structure() {
        let inst = tttp_example().unwrap();
        let t = &inst.operator;
        // X² = 0.
        for k in 0..16 {
            let f = SupportVector::basis(t.h2(), k).unwrap();
            let x2 = t.x().apply(&t.x().apply(&f).unwrap()).unwrap();
            assert!(x2.is_zero(), "k={k}");
        }
        // X e_{4m+3} = e_{4m+1} / (m+1).
        let f = SupportVector::basis(t.h2(), 7).unwrap();
        let xf = t.x().apply(&f).unwrap();
        assert!((xf.get(5) - cr(0.5)).norm() < 1e-15);
        assert_eq!(xf.support_len(), 1);
    }
}
