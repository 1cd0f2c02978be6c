//! Seeded random shift-structured B-operators for oracle checks: V = S^m on
//! ℓ²(ℕ), H₂ finite of dimension d ≤ m, E = (embedding onto the first d
//! coordinates) ∘ (ρ · unitary) and X an arbitrary dense d×d block. Then
//! E*E = ρ²I commutes with every X, ran E ⊥ ran V exactly, and all blocks
//! stay within reach of dense finite-section oracles.

use std::sync::Arc;

use crate::analysis::{OperatorRole, Sided, StructuralCertificate, StructuralFacts};
use crate::boperator::BOperator;
use crate::error::Result;
use crate::opcore::{BandedOperator, DenseMatrix, Index, IndexSet, C64};

/// Deterministic splitmix64 stream; small and reproducible by seed.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn usize_in(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() as usize) % (hi_inclusive - lo + 1)
    }

    /// Complex with independent coordinates uniform in [-1, 1].
    pub fn c64(&mut self) -> C64 {
        C64::new(self.range(-1.0, 1.0), self.range(-1.0, 1.0))
    }

    pub fn dense(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| self.c64())
    }

    /// Random matrix of the given rank (as a product of thin factors).
    pub fn dense_with_rank(&mut self, n: usize, rank: usize) -> Result<DenseMatrix> {
        if rank == 0 {
            return Ok(DenseMatrix::zeros(n, n));
        }
        let left = self.dense(n, rank);
        let right = self.dense(rank, n);
        left.mul(&right)
    }

    /// Random unitary via Gram-Schmidt on a random square matrix.
    pub fn unitary(&mut self, n: usize) -> Result<DenseMatrix> {
        loop {
            let g = self.dense(n, n);
            if let Some(q) = gram_schmidt(&g)? {
                return Ok(q);
            }
        }
    }
}

fn gram_schmidt(m: &DenseMatrix) -> Result<Option<DenseMatrix>> {
    let n = m.rows();
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| m.get(i, j)).collect())
        .collect();
    for j in 0..n {
        // Two re-orthogonalization passes.
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = cols[j]
                    .iter()
                    .zip(&cols[k])
                    .map(|(a, b)| a * b.conj())
                    .sum();
                for i in 0..n {
                    let corr = proj * cols[k][i];
                    cols[j][i] -= corr;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return Ok(None);
        }
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut q = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            q.set(i, j, cols[j][i]);
        }
    }
    Ok(Some(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XKind {
    /// ||X|| scaled to lie strictly inside the unit ball.
    Contractive,
    /// Random unitary: the B-isometry subcase with E_n*E_n = n E*E.
    Unitary,
    /// Spectral radius pushed above 1.
    Expanding,
}

pub struct CorpusInstance {
    pub operator: BOperator,
    pub facts: StructuralFacts,
    /// V = S^m.
    pub shift_steps: usize,
    pub dim_h2: usize,
    pub rho: f64,
    pub x_kind: XKind,
    pub x_dense: DenseMatrix,
    pub e_block: DenseMatrix,
}

impl CorpusInstance {
    pub fn h2_dim(&self) -> usize {
        self.dim_h2
    }
}

/// One seeded instance. `x_kind` of `None` draws the kind from the stream.
pub fn random_instance(rng: &mut SplitMix64, x_kind: Option<XKind>) -> Result<CorpusInstance> {
    let d2 = rng.usize_in(1, 8);
    let m = rng.usize_in(d2, 8);
    let rho = rng.range(0.25, 1.75);
    let h1 = IndexSet::HalfLine;
    let h2 = IndexSet::finite(0, d2 as Index - 1)?;

    let v = BandedOperator::shift(h1, m as Index);
    let w = BandedOperator::embed(h2, h1, 1, 0, Arc::new(|_| C64::new(1.0, 0.0)))?;
    let q = rng.unitary(d2)?;
    let e_block = q.scale(C64::new(rho, 0.0));
    let e = w.compose(&BandedOperator::dense(h2, h2, &e_block)?)?;

    let kind = x_kind.unwrap_or(match rng.usize_in(0, 2) {
        0 => XKind::Contractive,
        1 => XKind::Unitary,
        _ => XKind::Expanding,
    });
    let x_dense = match kind {
        XKind::Unitary => rng.unitary(d2)?,
        XKind::Contractive => {
            let g = rng.dense(d2, d2);
            let norm = g.op_norm()?.max(1e-6);
            g.scale(C64::new(rng.range(0.2, 0.9) / norm, 0.0))
        }
        XKind::Expanding => {
            // Kept close to the circle: far outside it the Gram values grow
            // like ||X^n||² and drown double precision for no extra insight.
            let g = rng.dense(d2, d2);
            let r = g
                .eigenvalues()?
                .first()
                .map(|v| v.norm())
                .unwrap_or(0.0)
                .max(1e-6);
            g.scale(C64::new(rng.range(1.02, 1.15) / r, 0.0))
        }
    };
    let x = BandedOperator::dense(h2, h2, &x_dense)?;

    let operator = BOperator::new(v, e, x)?;
    // E*E = rho² Q*Q carries Gram-Schmidt roundoff off the diagonal, so no
    // exact modulus symbol is declared here.
    let mut facts = StructuralFacts::new()
        .with(
            OperatorRole::V,
            StructuralCertificate::ShiftIsometry { sided: Sided::One },
        )
        .with(
            OperatorRole::E,
            StructuralCertificate::NormBound(rho + 1e-12),
        );
    if rho > 0.0 {
        facts.push(OperatorRole::E, StructuralCertificate::Injective);
    }
    if kind == XKind::Unitary {
        facts.push(OperatorRole::X, StructuralCertificate::Normal);
        facts.push(OperatorRole::X, StructuralCertificate::NormBound(1.0));
    }
    Ok(CorpusInstance {
        operator,
        facts,
        shift_steps: m,
        dim_h2: d2,
        rho,
        x_kind: kind,
        x_dense,
        e_block,
    })
}

/// Dense block-matrix section of the instance: the H₁ window [0, window)
/// stacked above the d₂-dimensional H₂ block. Entries come from single
/// applications of the defining blocks, so n-fold multiplication of this
/// matrix is an oracle independent of the power calculus.
pub fn dense_section(inst: &CorpusInstance, window: usize) -> Result<DenseMatrix> {
    let t = &inst.operator;
    let d2 = inst.dim_h2;
    let dim = window + d2;
    let mut full = DenseMatrix::zeros(dim, dim);
    let v_sec = t.v().finite_section(0, window as Index - 1)?;
    for i in 0..window {
        for j in 0..window {
            full.set(i, j, v_sec.get(i, j));
        }
    }
    for col in 0..d2 {
        let f = crate::opcore::SupportVector::basis(t.h2(), col as Index)?;
        let image = t.e().apply(&f)?;
        for (idx, val) in image.iter() {
            if (idx as usize) < window {
                full.set(idx as usize, window + col, val);
            }
        }
        for row in 0..d2 {
            full.set(window + row, window + col, inst.x_dense.get(row, col));
        }
    }
    Ok(full)
}
