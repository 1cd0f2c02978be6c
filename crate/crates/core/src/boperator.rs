//! Construction, validation and exact power calculus of B-operators: block
//! operators `[V E; 0 X]` with V an isometry, ran V ⊥ ran E and X commuting
//! with E*E. Powers satisfy `T^n = [V^n E_n; 0 X^n]` with
//! `E_n = Σ_{j<n} V^j E X^{n-1-j}`, materialized here through the recursion
//! `E_{n+1} = V E_n + E X^n`.
//!
//! A square finite isometry is unitary, and V*E = 0 with V unitary forces
//! E = 0; nontrivial instances therefore keep H₁ infinite with a
//! shift-structured (completely non-unitary) V, while H₂ may be finite.

use std::fmt;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::opcore::{BandedOperator, DenseMatrix, Index, IndexSet, SupportVector, C64};

/// Element of H₁ ⊕ H₂.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub top: SupportVector,
    pub bottom: SupportVector,
}

impl BlockVector {
    pub fn new(top: SupportVector, bottom: SupportVector) -> Self {
        BlockVector { top, bottom }
    }

    pub fn zero(h1: IndexSet, h2: IndexSet) -> Self {
        BlockVector {
            top: SupportVector::zero(h1),
            bottom: SupportVector::zero(h2),
        }
    }

    pub fn from_top(top: SupportVector, h2: IndexSet) -> Self {
        BlockVector {
            bottom: SupportVector::zero(h2),
            top,
        }
    }

    pub fn from_bottom(h1: IndexSet, bottom: SupportVector) -> Self {
        BlockVector {
            top: SupportVector::zero(h1),
            bottom,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.top.norm_sqr() + self.bottom.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inner(&self, other: &BlockVector) -> Result<C64> {
        Ok(self.top.inner(&other.top)? + self.bottom.inner(&other.bottom)?)
    }

    pub fn add(&self, other: &BlockVector) -> Result<BlockVector> {
        Ok(BlockVector {
            top: self.top.add(&other.top)?,
            bottom: self.bottom.add(&other.bottom)?,
        })
    }

    pub fn sub(&self, other: &BlockVector) -> Result<BlockVector> {
        Ok(BlockVector {
            top: self.top.sub(&other.top)?,
            bottom: self.bottom.sub(&other.bottom)?,
        })
    }

    pub fn scale(&self, factor: C64) -> BlockVector {
        BlockVector {
            top: self.top.scale(factor),
            bottom: self.bottom.scale(factor),
        }
    }
}

/// Triple (V, E, X) acting on H₁ ⊕ H₂ as `[V E; 0 X]`.
#[derive(Debug, Clone)]
pub struct BOperator {
    v: BandedOperator,
    e: BandedOperator,
    x: BandedOperator,
}

impl BOperator {
    /// Wires the blocks together; the defining conditions are checked by
    /// [`BOperator::validate`], not here.
    pub fn new(v: BandedOperator, e: BandedOperator, x: BandedOperator) -> Result<Self> {
        if v.domain() != v.codomain() {
            return Err(CoreError::IndexSetMismatch {
                expected: v.domain(),
                got: v.codomain(),
            });
        }
        if x.domain() != x.codomain() {
            return Err(CoreError::IndexSetMismatch {
                expected: x.domain(),
                got: x.codomain(),
            });
        }
        if e.domain() != x.domain() {
            return Err(CoreError::IndexSetMismatch {
                expected: x.domain(),
                got: e.domain(),
            });
        }
        if e.codomain() != v.domain() {
            return Err(CoreError::IndexSetMismatch {
                expected: v.domain(),
                got: e.codomain(),
            });
        }
        Ok(BOperator { v, e, x })
    }

    pub fn v(&self) -> &BandedOperator {
        &self.v
    }

    pub fn e(&self) -> &BandedOperator {
        &self.e
    }

    pub fn x(&self) -> &BandedOperator {
        &self.x
    }

    pub fn h1(&self) -> IndexSet {
        self.v.domain()
    }

    pub fn h2(&self) -> IndexSet {
        self.x.domain()
    }

    /// `[V E; 0 X] (h₁ ⊕ h₂) = (V h₁ + E h₂) ⊕ X h₂`.
    pub fn apply(&self, h: &BlockVector) -> Result<BlockVector> {
        let top = self.v.apply(&h.top)?.add(&self.e.apply(&h.bottom)?)?;
        let bottom = self.x.apply(&h.bottom)?;
        Ok(BlockVector { top, bottom })
    }

    /// `[V* 0; E* X*] (h₁ ⊕ h₂) = V* h₁ ⊕ (E* h₁ + X* h₂)`.
    pub fn apply_adjoint(&self, h: &BlockVector) -> Result<BlockVector> {
        let top = self.v.adjoint().apply(&h.top)?;
        let bottom = self
            .e
            .adjoint()
            .apply(&h.top)?
            .add(&self.x.adjoint().apply(&h.bottom)?)?;
        Ok(BlockVector { top, bottom })
    }

    /// E*E as an operator on H₂.
    pub fn gram(&self) -> Result<BandedOperator> {
        self.e.adjoint().compose(&self.e)
    }

    /// ⟨E*E e_k, e_k⟩ = ‖E e_k‖², exact.
    pub fn gram_diagonal_entry(&self, k: Index) -> Result<f64> {
        let image = self.e.apply(&SupportVector::basis(self.h2(), k)?)?;
        Ok(image.norm_sqr())
    }

    /// Checks the three defining conditions on basis probes.
    pub fn validate(&self, horizon: u32, tol: f64) -> Result<ValidationReport> {
        if horizon < 1 {
            return Err(CoreError::InvalidParameter(
                "validation horizon must be >= 1".into(),
            ));
        }
        let count = horizon as usize + 1;
        let vt = self.v.adjoint();
        let gram = self.gram()?;

        let mut isometry: f64 = 0.0;
        for i in self.h1().probe_indices(count) {
            let e_i = SupportVector::basis(self.h1(), i)?;
            let back = vt.apply(&self.v.apply(&e_i)?)?;
            isometry = isometry.max(back.sub(&e_i)?.norm());
        }

        let mut orthogonality: f64 = 0.0;
        let mut commutation: f64 = 0.0;
        for k in self.h2().probe_indices(count) {
            let f = SupportVector::basis(self.h2(), k)?;
            orthogonality = orthogonality.max(vt.apply(&self.e.apply(&f)?)?.norm());
            let xg = self.x.apply(&gram.apply(&f)?)?;
            let gx = gram.apply(&self.x.apply(&f)?)?;
            commutation = commutation.max(xg.sub(&gx)?.norm());
        }

        Ok(ValidationReport {
            horizon,
            tol,
            conditions: vec![
                ConditionCheck::new(ConditionKind::Isometry, isometry, tol),
                ConditionCheck::new(ConditionKind::RangeOrthogonality, orthogonality, tol),
                ConditionCheck::new(ConditionKind::GramCommutation, commutation, tol),
            ],
        })
    }

    /// The block operators of T^n. Rejects n = 0: powers are indexed from 1.
    pub fn power_blocks(&self, n: u32) -> Result<PowerBlocks> {
        if n == 0 {
            return Err(CoreError::InvalidParameter(
                "power index must be >= 1".into(),
            ));
        }
        let vn = self.v.pow(n)?;
        let xn = self.x.pow(n)?;
        let mut en = self.e.clone();
        let mut xk = BandedOperator::identity(self.h2());
        for _ in 1..n {
            xk = self.x.compose(&xk)?;
            en = self.v.compose(&en)?.add(&self.e.compose(&xk)?)?;
        }
        Ok(PowerBlocks { n, vn, en, xn })
    }

    /// E_n materialized from the n-term sum `Σ_{j<n} V^j E X^{n-1-j}`.
    /// Quadratic in n; kept as an independent cross-check of the recursion.
    pub fn en_sum_form(&self, n: u32) -> Result<BandedOperator> {
        if n == 0 {
            return Err(CoreError::InvalidParameter(
                "power index must be >= 1".into(),
            ));
        }
        let mut acc = BandedOperator::zero(self.h2(), self.h1());
        for j in 0..n {
            let term = self
                .v
                .pow(j)?
                .compose(&self.e)?
                .compose(&self.x.pow(n - 1 - j)?)?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Iterator over `T^n h` for n = 1, 2, ... by repeated application.
    pub fn power_orbit(&self, h: &BlockVector) -> PowerOrbit<'_> {
        PowerOrbit {
            op: self,
            state: Some(h.clone()),
        }
    }

    /// Iterator over `T*^n h` for n = 1, 2, ...
    pub fn adjoint_orbit(&self, h: &BlockVector) -> AdjointOrbit<'_> {
        AdjointOrbit {
            op: self,
            state: Some(h.clone()),
        }
    }

    /// Iterator over `E_n f` for n = 1, 2, ... via the power recursion;
    /// one V-, E- and X-application per step.
    pub fn en_orbit(&self, f: &SupportVector) -> EnOrbit<'_> {
        EnOrbit {
            op: self,
            seed: f.clone(),
            state: None,
        }
    }

    /// Worst probe deviation of `E_n* E_n` against both orderings of the
    /// product of E*E with `Σ_{j<n} X*^j X^j`.
    pub fn gram_identity(&self, n: u32, probe_count: usize) -> Result<f64> {
        if n == 0 {
            return Err(CoreError::InvalidParameter(
                "power index must be >= 1".into(),
            ));
        }
        let gram = self.gram()?;
        let probes: Vec<SupportVector> = self
            .h2()
            .probe_indices(probe_count)
            .into_iter()
            .map(|k| SupportVector::basis(self.h2(), k))
            .collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        let pair_limit = probes.len().min(6);
        for (a, f) in probes.iter().enumerate() {
            for (b, g) in probes.iter().enumerate() {
                if a != b && (a >= pair_limit || b >= pair_limit) {
                    continue;
                }
                let lhs = self.en_inner(f, g, n)?;
                // ⟨(Σ X*^j X^j) E*E f, g⟩ = Σ ⟨X^j (E*E f), X^j g⟩
                let mut sum_left = C64::new(0.0, 0.0);
                // ⟨E*E (Σ X*^j X^j) f, g⟩ = Σ ⟨X^j f, X^j (E*E g)⟩
                let mut sum_right = C64::new(0.0, 0.0);
                let mut xf_gram = gram.apply(f)?;
                let mut xg = g.clone();
                let mut xf = f.clone();
                let mut xg_gram = gram.apply(g)?;
                for j in 0..n {
                    if j > 0 {
                        xf_gram = self.x.apply(&xf_gram)?;
                        xg = self.x.apply(&xg)?;
                        xf = self.x.apply(&xf)?;
                        xg_gram = self.x.apply(&xg_gram)?;
                    }
                    sum_left += xf_gram.inner(&xg)?;
                    sum_right += xf.inner(&xg_gram)?;
                }
                worst = worst
                    .max((lhs - sum_left).norm())
                    .max((lhs - sum_right).norm());
            }
        }
        Ok(worst)
    }

    /// ⟨E_n f, E_n g⟩ via the iterative recursion.
    pub fn en_inner(&self, f: &SupportVector, g: &SupportVector, n: u32) -> Result<C64> {
        if n == 0 {
            return Err(CoreError::InvalidParameter(
                "power index must be >= 1".into(),
            ));
        }
        let mut ef = None;
        let mut eg = None;
        for (step, (rf, rg)) in self.en_orbit(f).zip(self.en_orbit(g)).enumerate() {
            if step as u32 + 1 == n {
                ef = Some(rf?);
                eg = Some(rg?);
                break;
            }
            rf?;
            rg?;
        }
        ef.unwrap().inner(&eg.unwrap())
    }

    /// Worst probe deviation of `T*^n T^n` from `diag(I, E_n*E_n + X*^n X^n)`.
    pub fn normal_equation_blocks(&self, n: u32, probe_count: usize) -> Result<f64> {
        if n == 0 {
            return Err(CoreError::InvalidParameter(
                "power index must be >= 1".into(),
            ));
        }
        let top_probes: Vec<SupportVector> = self
            .h1()
            .probe_indices(probe_count)
            .into_iter()
            .map(|i| SupportVector::basis(self.h1(), i))
            .collect::<Result<_>>()?;
        let bottom_probes: Vec<SupportVector> = self
            .h2()
            .probe_indices(probe_count)
            .into_iter()
            .map(|k| SupportVector::basis(self.h2(), k))
            .collect::<Result<_>>()?;

        let power_of = |h: &BlockVector| -> Result<BlockVector> {
            let mut cur = h.clone();
            for _ in 0..n {
                cur = self.apply(&cur)?;
            }
            Ok(cur)
        };

        let tops: Vec<BlockVector> = top_probes
            .iter()
            .map(|f| power_of(&BlockVector::from_top(f.clone(), self.h2())))
            .collect::<Result<_>>()?;
        let bottoms: Vec<BlockVector> = bottom_probes
            .iter()
            .map(|f| power_of(&BlockVector::from_bottom(self.h1(), f.clone())))
            .collect::<Result<_>>()?;

        let mut worst: f64 = 0.0;
        // Upper-left block: ⟨T^n(e_i⊕0), T^n(e_j⊕0)⟩ = δ_ij.
        for (i, a) in tops.iter().enumerate() {
            for (j, b) in tops.iter().enumerate() {
                let expect = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((a.inner(b)? - expect).norm());
            }
        }
        // Off-diagonal blocks vanish.
        for a in &tops {
            for b in &bottoms {
                worst = worst.max(a.inner(b)?.norm());
            }
        }
        // Lower-right block: ⟨T^n(0⊕f), T^n(0⊕g)⟩ = ⟨E_n f, E_n g⟩ + ⟨X^n f, X^n g⟩.
        for (k, a) in bottoms.iter().enumerate() {
            for (l, b) in bottoms.iter().enumerate() {
                let en_part = self.en_inner(&bottom_probes[k], &bottom_probes[l], n)?;
                let mut xf = bottom_probes[k].clone();
                let mut xg = bottom_probes[l].clone();
                for _ in 0..n {
                    xf = self.x.apply(&xf)?;
                    xg = self.x.apply(&xg)?;
                }
                let expect = en_part + xf.inner(&xg)?;
                worst = worst.max((a.inner(b)? - expect).norm());
            }
        }
        Ok(worst)
    }

    /// The reducing decomposition H₂ = ker E ⊕ closure(ran |E|), with
    /// X-invariance of both parts verified on probes.
    pub fn kernel_split(&self, horizon: u32, tol: f64) -> Result<KernelSplit> {
        let count = horizon as usize + 1;
        let gram = self.gram()?;
        if gram.is_diagonal_on_probes(count)? {
            let h2 = self.h2();
            let member22: Arc<dyn Fn(Index) -> bool + Send + Sync> = {
                let op = self.clone();
                Arc::new(move |k| op.gram_diagonal_entry(k).map(|v| v > 0.0).unwrap_or(false))
            };
            let member21: Arc<dyn Fn(Index) -> bool + Send + Sync> = {
                let m22 = member22.clone();
                Arc::new(move |k| !m22(k))
            };
            let dim = h2.dim();
            let collect = |pred: &Arc<dyn Fn(Index) -> bool + Send + Sync>| -> Option<Vec<Index>> {
                dim.map(|d| {
                    h2.probe_indices(d)
                        .into_iter()
                        .filter(|&k| pred(k))
                        .collect()
                })
            };
            let h21 = SubspaceDesc::DiagonalPredicate {
                set: h2,
                member: member21.clone(),
                finite_members: collect(&member21),
            };
            let h22 = SubspaceDesc::DiagonalPredicate {
                set: h2,
                member: member22.clone(),
                finite_members: collect(&member22),
            };
            // Both parts must be invariant under X and X*.
            let mut residual: f64 = 0.0;
            let xt = self.x.adjoint();
            for k in h2.probe_indices(count) {
                let in22 = member22(k);
                let probe = SupportVector::basis(h2, k)?;
                for image in [self.x.apply(&probe)?, xt.apply(&probe)?] {
                    let mut leak = 0.0;
                    for (j, v) in image.iter() {
                        if member22(j) != in22 {
                            leak += v.norm_sqr();
                        }
                    }
                    residual = residual.max(leak.sqrt());
                }
            }
            if residual > tol {
                return Err(CoreError::UnsupportedStructure(format!(
                    "kernel split parts fail to reduce X on probes (residual {residual:.3e})"
                )));
            }
            return Ok(KernelSplit {
                h21,
                h22,
                invariance_residual: residual,
            });
        }
        if let Some(dim) = self.h2().dim() {
            // Dense route: eigenspaces of E*E.
            let gram_dense = dense_gram(self, dim)?;
            let (vals, q) = gram_dense.hermitian_eigen()?;
            let top = vals.first().copied().unwrap_or(0.0).max(0.0);
            let cut = (top * 1e-12).max(tol * tol);
            let kernel_cols: Vec<usize> = (0..dim).filter(|&c| vals[c] <= cut).collect();
            let range_cols: Vec<usize> = (0..dim).filter(|&c| vals[c] > cut).collect();
            let pick = |cols: &[usize]| {
                let mut m = DenseMatrix::zeros(dim, cols.len());
                for (new_c, &c) in cols.iter().enumerate() {
                    for r in 0..dim {
                        m.set(r, new_c, q.get(r, c));
                    }
                }
                m
            };
            let h21 = SubspaceDesc::DenseBasis {
                set: self.h2(),
                basis: pick(&kernel_cols),
            };
            let h22 = SubspaceDesc::DenseBasis {
                set: self.h2(),
                basis: pick(&range_cols),
            };
            let x_dense = self.x.to_dense()?;
            let leak = if range_cols.is_empty() || kernel_cols.is_empty() {
                0.0
            } else {
                let p22 = pick(&range_cols).col_space_projector(1e-12)?;
                let id = DenseMatrix::identity(dim);
                let p21 = id.sub(&p22)?;
                p21.mul(&x_dense)?
                    .mul(&p22)?
                    .max_abs()
                    .max(p22.mul(&x_dense)?.mul(&p21)?.max_abs())
            };
            if leak > tol {
                return Err(CoreError::UnsupportedStructure(format!(
                    "kernel split parts fail to reduce X (residual {leak:.3e})"
                )));
            }
            return Ok(KernelSplit {
                h21,
                h22,
                invariance_residual: leak,
            });
        }
        Err(CoreError::UnsupportedStructure(
            "kernel split needs diagonal E*E or a finite H2".into(),
        ))
    }

    /// The covariance ||T*T - I||^{1/2} = ||E|| of a B-isometry. Requires a
    /// certificate that X is isometric; exact for finite or certified-norm
    /// E, a probe lower bound (flagged) otherwise.
    pub fn covariance(&self, facts: &crate::analysis::StructuralFacts) -> Result<Covariance> {
        use crate::analysis::{OperatorRole, StructuralCertificate};
        let probe_window = 64usize;
        let x_isometric = facts.shift_isometry(OperatorRole::X).is_some()
            || matches!(
                facts.symbol_info(OperatorRole::X),
                Some(info) if info.sup_abs <= 1.0 + 1e-12 && info.inf_abs_nonzero >= 1.0 - 1e-12
            )
            || {
                // Finite X: decide isometry exactly on the full basis.
                match self.h2().dim() {
                    Some(dim) if dim <= probe_window => {
                        let mut ok = true;
                        for k in self.h2().probe_indices(dim) {
                            let f = SupportVector::basis(self.h2(), k)?;
                            if (self.x.apply(&f)?.norm() - 1.0).abs() > 1e-12 {
                                ok = false;
                                break;
                            }
                        }
                        // Norm preservation on a basis is necessary, not
                        // sufficient; require adjoint consistency too.
                        if ok {
                            let xt = self.x.adjoint();
                            for k in self.h2().probe_indices(dim) {
                                let f = SupportVector::basis(self.h2(), k)?;
                                let back = xt.apply(&self.x.apply(&f)?)?;
                                if back.sub(&f)?.norm() > 1e-12 {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                        ok
                    }
                    _ => false,
                }
            };
        if !x_isometric {
            return Err(CoreError::MissingCertificate(
                "covariance requires X certified isometric".into(),
            ));
        }
        let mut probed: f64 = 0.0;
        for k in self
            .h2()
            .probe_indices(self.h2().dim().unwrap_or(probe_window))
        {
            probed = probed.max(self.gram_diagonal_entry(k)?);
        }
        let probed = probed.sqrt();
        if self.h2().is_finite() && self.gram()?.is_diagonal_on_probes(probe_window)? {
            return Ok(Covariance {
                value: probed,
                exact: true,
            });
        }
        if let Some(bound) = facts.certs(OperatorRole::E).iter().find_map(|c| match c {
            StructuralCertificate::NormBound(b) => Some(*b),
            _ => None,
        }) {
            if (bound - probed).abs() <= 1e-10 {
                return Ok(Covariance {
                    value: bound,
                    exact: true,
                });
            }
        }
        Ok(Covariance {
            value: probed,
            exact: false,
        })
    }
}

/// ||E|| with an exactness flag (probe lower bound when not exact).
#[derive(Debug, Clone, Copy)]
pub struct Covariance {
    pub value: f64,
    pub exact: bool,
}

fn dense_gram(op: &BOperator, dim: usize) -> Result<DenseMatrix> {
    let h2 = op.h2();
    let indices = h2.probe_indices(dim);
    let images: Vec<SupportVector> = indices
        .iter()
        .map(|&k| op.e().apply(&SupportVector::basis(h2, k)?))
        .collect::<Result<_>>()?;
    let mut m = DenseMatrix::zeros(dim, dim);
    for (col, f) in images.iter().enumerate() {
        for (row, g) in images.iter().enumerate() {
            // (E*E)[row][col] = ⟨E e_col, E e_row⟩
            m.set(row, col, f.inner(g)?);
        }
    }
    Ok(m)
}

/// `T^n = [V^n E_n; 0 X^n]`, materialized as banded operators.
#[derive(Debug, Clone)]
pub struct PowerBlocks {
    pub n: u32,
    pub vn: BandedOperator,
    pub en: BandedOperator,
    pub xn: BandedOperator,
}

impl PowerBlocks {
    pub fn apply(&self, h: &BlockVector) -> Result<BlockVector> {
        let top = self.vn.apply(&h.top)?.add(&self.en.apply(&h.bottom)?)?;
        let bottom = self.xn.apply(&h.bottom)?;
        Ok(BlockVector { top, bottom })
    }
}

pub struct PowerOrbit<'a> {
    op: &'a BOperator,
    state: Option<BlockVector>,
}

impl Iterator for PowerOrbit<'_> {
    type Item = Result<BlockVector>;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.state.take()?;
        match self.op.apply(&cur) {
            Ok(next) => {
                self.state = Some(next.clone());
                Some(Ok(next))
            }
            Err(err) => Some(Err(err)),
        }
    }
}

pub struct AdjointOrbit<'a> {
    op: &'a BOperator,
    state: Option<BlockVector>,
}

impl Iterator for AdjointOrbit<'_> {
    type Item = Result<BlockVector>;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.state.take()?;
        match self.op.apply_adjoint(&cur) {
            Ok(next) => {
                self.state = Some(next.clone());
                Some(Ok(next))
            }
            Err(err) => Some(Err(err)),
        }
    }
}

pub struct EnOrbit<'a> {
    op: &'a BOperator,
    seed: SupportVector,
    /// (E_n f, X^n f) after the n-th yield.
    state: Option<(SupportVector, SupportVector)>,
}

impl Iterator for EnOrbit<'_> {
    type Item = Result<SupportVector>;

    fn next(&mut self) -> Option<Self::Item> {
        let step = match self.state.take() {
            None => {
                let g = self.op.e.apply(&self.seed);
                let xf = self.op.x.apply(&self.seed);
                match (g, xf) {
                    (Ok(g), Ok(xf)) => Ok((g, xf)),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                }
            }
            Some((g, xf)) => (|| {
                let g_next = self.op.v.apply(&g)?.add(&self.op.e.apply(&xf)?)?;
                let xf_next = self.op.x.apply(&xf)?;
                Ok((g_next, xf_next))
            })(),
        };
        match step {
            Ok(state) => {
                self.state = Some(state.clone());
                Some(Ok(state.0))
            }
            Err(err) => Some(Err(err)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// V*V = I
    Isometry,
    /// V*E = 0
    RangeOrthogonality,
    /// X E*E = E*E X
    GramCommutation,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionKind::Isometry => write!(f, "V*V = I"),
            ConditionKind::RangeOrthogonality => write!(f, "V*E = 0"),
            ConditionKind::GramCommutation => write!(f, "X E*E = E*E X"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub condition: ConditionKind,
    pub worst_residual: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn new(condition: ConditionKind, worst_residual: f64, tol: f64) -> Self {
        // Residuals are maxima of norms; scrub the sign of zero.
        let worst_residual = worst_residual.abs();
        ConditionCheck {
            condition,
            worst_residual,
            pass: worst_residual <= tol,
        }
    }
}

/// Per-condition validation outcome; failures are reported, not thrown.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub horizon: u32,
    pub tol: f64,
    pub conditions: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn worst_residual(&self) -> f64 {
        self.conditions
            .iter()
            .map(|c| c.worst_residual)
            .fold(0.0, f64::max)
    }

    pub fn residual_of(&self, kind: ConditionKind) -> Option<f64> {
        self.conditions
            .iter()
            .find(|c| c.condition == kind)
            .map(|c| c.worst_residual)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation horizon {} tol {:e}", self.horizon, self.tol)?;
        for c in &self.conditions {
            writeln!(
                f,
                "  {}: {} (residual {:.3e})",
                c.condition,
                if c.pass { "pass" } else { "FAIL" },
                c.worst_residual
            )?;
        }
        Ok(())
    }
}

/// Description of a closed subspace of H₂.
#[derive(Clone)]
pub enum SubspaceDesc {
    DiagonalPredicate {
        set: IndexSet,
        member: Arc<dyn Fn(Index) -> bool + Send + Sync>,
        finite_members: Option<Vec<Index>>,
    },
    DenseBasis {
        set: IndexSet,
        basis: DenseMatrix,
    },
}

impl SubspaceDesc {
    pub fn contains_index(&self, k: Index) -> Option<bool> {
        match self {
            SubspaceDesc::DiagonalPredicate { member, .. } => Some(member(k)),
            SubspaceDesc::DenseBasis { .. } => None,
        }
    }

    pub fn is_trivial(&self, probe: usize) -> bool {
        match self {
            SubspaceDesc::DiagonalPredicate {
                set,
                member,
                finite_members,
            } => {
                if let Some(m) = finite_members {
                    m.is_empty()
                } else {
                    set.probe_indices(probe).into_iter().all(|k| !member(k))
                }
            }
            SubspaceDesc::DenseBasis { basis, .. } => basis.cols() == 0,
        }
    }
}

impl fmt::Debug for SubspaceDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubspaceDesc::DiagonalPredicate {
                set,
                finite_members,
                ..
            } => f
                .debug_struct("DiagonalPredicate")
                .field("set", set)
                .field("finite_members", finite_members)
                .finish(),
            SubspaceDesc::DenseBasis { set, basis } => f
                .debug_struct("DenseBasis")
                .field("set", set)
                .field("dim", &basis.cols())
                .finish(),
        }
    }
}

/// ker E and closure(ran |E|), both reducing X.
#[derive(Debug, Clone)]
pub struct KernelSplit {
    pub h21: SubspaceDesc,
    pub h22: SubspaceDesc,
    pub invariance_residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::cr;
    use crate::{ALGEBRA_TOL, VALIDATION_HORIZON};
    use std::sync::Arc;

    fn unit_coef() -> crate::opcore::CoefFn {
        Arc::new(|_| C64::new(1.0, 0.0))
    }

    /// V = S on ℓ²(ℕ), E = 0, X diagonal.
    fn block_diagonal_example() -> BOperator {
        let h1 = IndexSet::HalfLine;
        let h2 = IndexSet::finite(0, 3).unwrap();
        let v = BandedOperator::shift(h1, 1);
        let e = BandedOperator::zero(h2, h1);
        let x =
            BandedOperator::diagonal_table(h2, vec![cr(1.0), cr(0.5), cr(-0.25), cr(0.0)]).unwrap();
        BOperator::new(v, e, x).unwrap()
    }

    /// V: e_k -> e_{2k+2}, E = W diag(psi), W: e_k -> e_{2k+1}, X diagonal,
    /// with psi(k)² + x(k)² = 1.
    fn interleaved_example() -> BOperator {
        let h1 = IndexSet::HalfLine;
        let h2 = IndexSet::finite(0, 7).unwrap();
        let v = BandedOperator::embed(h1, h1, 2, 2, unit_coef()).unwrap();
        let w = BandedOperator::embed(h2, h1, 2, 1, unit_coef()).unwrap();
        let psi = BandedOperator::diagonal(
            h2,
            Arc::new(|k| C64::new((1.0 - 0.1 * (k as f64 + 1.0)).sqrt(), 0.0)),
        );
        let e = w.compose(&psi).unwrap();
        let x = BandedOperator::diagonal(
            h2,
            Arc::new(|k| C64::new((0.1 * (k as f64 + 1.0)).sqrt(), 0.0)),
        );
        BOperator::new(v, e, x).unwrap()
    }

    #[test]
    fn block_diagonal_triple_validates() {
        let t = block_diagonal_example();
        let report = t.validate(VALIDATION_HORIZON, ALGEBRA_TOL).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.worst_residual(), 0.0);
    }

    #[test]
    fn shift_for_both_v_and_e_fails_orthogonality() {
        let h = IndexSet::HalfLine;
        let s = BandedOperator::shift(h, 1);
        let zero_x = BandedOperator::zero(h, h);
        let t = BOperator::new(s.clone(), s, zero_x).unwrap();
        let report = t.validate(16, ALGEBRA_TOL).unwrap();
        assert!(!report.passed());
        let res = report
            .residual_of(ConditionKind::RangeOrthogonality)
            .unwrap();
        assert!(
            (res - 1.0).abs() < 1e-15,
            "V*E = V*V = I has residual 1, got {res}"
        );
        assert_eq!(report.residual_of(ConditionKind::Isometry).unwrap(), 0.0);
    }

    #[test]
    fn interleaved_triple_validates_exactly() {
        let t = interleaved_example();
        let report = t.validate(VALIDATION_HORIZON, ALGEBRA_TOL).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.worst_residual() <= 1e-15);
    }

    #[test]
    fn power_blocks_collapse_at_n_1_and_2() {
        let t = interleaved_example();
        let p1 = t.power_blocks(1).unwrap();
        let p2 = t.power_blocks(2).unwrap();
        // E_1 = E and E_2 = V E + E X.
        let e2_expected = t
            .v()
            .compose(t.e())
            .unwrap()
            .add(&t.e().compose(t.x()).unwrap())
            .unwrap();
        for k in 0..8 {
            let f = SupportVector::basis(t.h2(), k).unwrap();
            let a = p1.en.apply(&f).unwrap();
            let b = t.e().apply(&f).unwrap();
            assert!(a.sub(&b).unwrap().norm() < 1e-15);
            let a2 = p2.en.apply(&f).unwrap();
            let b2 = e2_expected.apply(&f).unwrap();
            assert!(a2.sub(&b2).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn power_blocks_reject_n_zero() {
        let t = block_diagonal_example();
        assert!(t.power_blocks(0).is_err());
        assert!(t.gram_identity(0, 4).is_err());
        assert!(t.en_sum_form(0).is_err());
    }

    #[test]
    fn en_orbit_matches_materialized_blocks() {
        let t = interleaved_example();
        for k in 0..4 {
            let f = SupportVector::basis(t.h2(), k).unwrap();
            let mut orbit = t.en_orbit(&f);
            for n in 1..=8u32 {
                let iterated = orbit.next().unwrap().unwrap();
                let blocks = t.power_blocks(n).unwrap();
                let direct = blocks.en.apply(&f).unwrap();
                assert!(iterated.sub(&direct).unwrap().norm() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn recursion_matches_sum_form() {
        let t = interleaved_example();
        for n in [1u32, 2, 3, 5, 8] {
            let rec = t.power_blocks(n).unwrap().en;
            let sum = t.en_sum_form(n).unwrap();
            for k in 0..6 {
                let f = SupportVector::basis(t.h2(), k).unwrap();
                let d = rec.apply(&f).unwrap().sub(&sum.apply(&f).unwrap()).unwrap();
                assert!(d.norm() <= 1e-10, "n={n} k={k}: {}", d.norm());
            }
        }
    }

    #[test]
    fn both_recursion_factorizations_agree() {
        // E_{n+1} = V E_n + E X^n = V^n E + E_n X on probes.
        let t = interleaved_example();
        for n in [2u32, 3, 6] {
            let en1 = t.power_blocks(n + 1).unwrap().en;
            let alt = t
                .v()
                .pow(n)
                .unwrap()
                .compose(t.e())
                .unwrap()
                .add(&t.power_blocks(n).unwrap().en.compose(t.x()).unwrap())
                .unwrap();
            for k in 0..6 {
                let f = SupportVector::basis(t.h2(), k).unwrap();
                let d = en1.apply(&f).unwrap().sub(&alt.apply(&f).unwrap()).unwrap();
                assert!(d.norm() <= 1e-10, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn gram_identity_residual_is_tiny_for_valid_triples() {
        let t = interleaved_example();
        for n in [1u32, 2, 4, 8, 16] {
            let res = t.gram_identity(n, 8).unwrap();
            assert!(res <= 1e-12, "n={n}: {res}");
        }
    }

    #[test]
    fn gram_action_matches_one_minus_radius_power() {
        // E*E has symbol 1 - r_k and X has symbol r_k^{1/2}, so E_n*E_n acts
        // by 1 - r_k^n.
        let t = interleaved_example();
        let radius = |k: Index| 0.1 * (k as f64 + 1.0);
        for k in 0..8 {
            let f = SupportVector::basis(t.h2(), k).unwrap();
            for n in [1u32, 3, 7] {
                let val = t.en_inner(&f, &f, n).unwrap();
                let expect = 1.0 - radius(k).powi(n as i32);
                assert!((val.re - expect).abs() < 1e-12, "n={n} k={k}");
                assert!(val.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normal_equation_blocks_hold_on_probes() {
        let t = interleaved_example();
        for n in [1u32, 2, 5] {
            let res = t.normal_equation_blocks(n, 5).unwrap();
            assert!(res <= 1e-12, "n={n}: {res}");
        }
    }

    #[test]
    fn first_block_column_is_isometric() {
        let t = interleaved_example();
        let h = BlockVector::from_top(
            SupportVector::from_entries(t.h1(), [(0, C64::new(0.6, 0.0)), (3, C64::new(0.0, 0.8))])
                .unwrap(),
            t.h2(),
        );
        let norm0 = h.norm();
        for (n, step) in t.power_orbit(&h).take(32).enumerate() {
            let hn = step.unwrap();
            assert!(
                (hn.norm() - norm0).abs() <= 1e-12,
                "norm drifted at n={}",
                n + 1
            );
        }
    }

    #[test]
    fn kernel_split_of_injective_diagonal_modulus() {
        let t = interleaved_example();
        let split = t.kernel_split(16, ALGEBRA_TOL).unwrap();
        assert!(split.h21.is_trivial(16));
        assert!(!split.h22.is_trivial(16));
    }

    #[test]
    fn kernel_split_of_zero_e() {
        let t = block_diagonal_example();
        let split = t.kernel_split(16, ALGEBRA_TOL).unwrap();
        assert!(!split.h21.is_trivial(16));
        assert!(split.h22.is_trivial(16));
    }

    #[test]
    fn kernel_split_alternating_diagonal() {
        // |E| = diag(1,0,1,0,...) splits H2 into odd and even tracks.
        let h2 = IndexSet::finite(0, 5).unwrap();
        let h1 = IndexSet::HalfLine;
        let v = BandedOperator::embed(h1, h1, 2, 2, unit_coef()).unwrap();
        let w = BandedOperator::embed(h2, h1, 2, 1, unit_coef()).unwrap();
        let alternating = BandedOperator::diagonal(
            h2,
            Arc::new(|k| {
                if k % 2 == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        );
        let e = w.compose(&alternating).unwrap();
        let x = BandedOperator::diagonal(h2, Arc::new(|k| C64::new(0.3 + 0.05 * k as f64, 0.0)));
        let t = BOperator::new(v, e, x).unwrap();
        let split = t.kernel_split(16, ALGEBRA_TOL).unwrap();
        for k in 0..6 {
            assert_eq!(split.h21.contains_index(k), Some(k % 2 == 1), "k={k}");
            assert_eq!(split.h22.contains_index(k), Some(k % 2 == 0), "k={k}");
        }
    }
}
