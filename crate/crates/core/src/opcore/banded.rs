use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{DenseMatrix, Index, IndexSet, SupportVector, C64};
use crate::error::{CoreError, Result};

/// Pure, total coefficient function of a band.
pub type CoefFn = Arc<dyn Fn(Index) -> C64 + Send + Sync>;

/// One band of a banded operator: `e_i ↦ coef(i) · e_{(p·i + d) / r}`, with
/// the term dropped whenever `r` does not divide `p·i + d` or the target
/// index leaves the codomain. Translation bands have `p = r = 1` and `d` the
/// usual diagonal offset.
#[derive(Clone)]
pub struct Band {
    pub p: Index,
    pub r: Index,
    pub d: Index,
    pub coef: CoefFn,
}

impl Band {
    fn key(&self) -> (Index, Index, Index) {
        (self.p, self.r, self.d)
    }

    /// Target index of `i` under this band, when defined.
    fn target(&self, i: Index) -> Result<Option<Index>> {
        let num = self
            .p
            .checked_mul(i)
            .and_then(|t| t.checked_add(self.d))
            .ok_or(CoreError::IndexOverflow)?;
        if num % self.r == 0 {
            Ok(Some(num / self.r))
        } else {
            Ok(None)
        }
    }

    /// Canonical form: divide (p, r, d) by their gcd. The index map and the
    /// divisibility condition are invariant under this reduction.
    fn reduced(mut self) -> Band {
        let g = gcd(
            gcd(self.p.unsigned_abs(), self.r.unsigned_abs()),
            self.d.unsigned_abs(),
        );
        if g > 1 {
            self.p /= g as Index;
            self.r /= g as Index;
            self.d /= g as Index;
        }
        self
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Linear operator between sequence spaces given by finitely many bands.
/// Application to finitely supported vectors is exact.
#[derive(Clone)]
pub struct BandedOperator {
    domain: IndexSet,
    codomain: IndexSet,
    bands: Vec<Band>,
}

impl fmt::Debug for BandedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandedOperator")
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .field(
                "bands",
                &self
                    .bands
                    .iter()
                    .map(|b| (b.p, b.r, b.d))
                    .collect::<Vec<_>>(),
            )
            .finish()
    }
}

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

impl BandedOperator {
    pub fn new(domain: IndexSet, codomain: IndexSet, bands: Vec<Band>) -> Result<Self> {
        for b in &bands {
            if b.p <= 0 || b.r <= 0 {
                return Err(CoreError::InvalidParameter(
                    "band stride and divisor must be positive".into(),
                ));
            }
        }
        let mut op = BandedOperator {
            domain,
            codomain,
            bands: Vec::new(),
        };
        for b in bands {
            op.push_band(b.reduced());
        }
        Ok(op)
    }

    fn push_band(&mut self, band: Band) {
        for existing in &mut self.bands {
            if existing.key() == band.key() {
                let a = existing.coef.clone();
                let b = band.coef;
                existing.coef = Arc::new(move |i| a(i) + b(i));
                return;
            }
        }
        self.bands.push(band);
    }

    pub fn domain(&self) -> IndexSet {
        self.domain
    }

    pub fn codomain(&self) -> IndexSet {
        self.codomain
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Largest |offset numerator| over stored bands, scaled by the divisor.
    /// For translation bands this is the classical bandwidth max |j - i|.
    pub fn bandwidth(&self) -> u128 {
        self.bands
            .iter()
            .map(|b| b.d.unsigned_abs().div_ceil(b.r.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    // ----- constructors -----

    pub fn zero(domain: IndexSet, codomain: IndexSet) -> Self {
        BandedOperator {
            domain,
            codomain,
            bands: Vec::new(),
        }
    }

    pub fn identity(set: IndexSet) -> Self {
        BandedOperator {
            domain: set,
            codomain: set,
            bands: vec![Band {
                p: 1,
                r: 1,
                d: 0,
                coef: Arc::new(|_| C64::new(1.0, 0.0)),
            }],
        }
    }

    /// Translation `e_i ↦ e_{i+steps}` on one space (images outside the
    /// space are dropped, so negative steps give the backward shift with its
    /// defect on the half-line).
    pub fn shift(set: IndexSet, steps: Index) -> Self {
        BandedOperator {
            domain: set,
            codomain: set,
            bands: vec![Band {
                p: 1,
                r: 1,
                d: steps,
                coef: Arc::new(|_| C64::new(1.0, 0.0)),
            }],
        }
    }

    /// Weighted embedding `e_i ↦ coef(i) · e_{stride·i + offset}` between
    /// possibly different spaces.
    pub fn embed(
        domain: IndexSet,
        codomain: IndexSet,
        stride: Index,
        offset: Index,
        coef: CoefFn,
    ) -> Result<Self> {
        if stride <= 0 {
            return Err(CoreError::InvalidParameter(
                "stride must be positive".into(),
            ));
        }
        Ok(BandedOperator {
            domain,
            codomain,
            bands: vec![Band {
                p: stride,
                r: 1,
                d: offset,
                coef,
            }],
        })
    }

    pub fn diagonal(set: IndexSet, symbol: CoefFn) -> Self {
        BandedOperator {
            domain: set,
            codomain: set,
            bands: vec![Band {
                p: 1,
                r: 1,
                d: 0,
                coef: symbol,
            }],
        }
    }

    /// Diagonal with entries from a table; `set` must be finite with
    /// matching dimension.
    pub fn diagonal_table(set: IndexSet, values: Vec<C64>) -> Result<Self> {
        let dim = set.dim().ok_or_else(|| {
            CoreError::InvalidParameter("table diagonal needs a finite set".into())
        })?;
        if dim != values.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "diagonal table has {} entries for a set of dimension {dim}",
                values.len()
            )));
        }
        let lo = match set {
            IndexSet::Finite { lo, .. } => lo,
            _ => unreachable!(),
        };
        let table = Arc::new(values);
        Ok(BandedOperator::diagonal(
            set,
            Arc::new(move |i| {
                let k = i - lo;
                if k >= 0 && (k as usize) < table.len() {
                    table[k as usize]
                } else {
                    czero()
                }
            }),
        ))
    }

    /// Table-backed operator from a dense matrix between finite sets.
    /// Row index runs over the codomain, column index over the domain.
    pub fn dense(domain: IndexSet, codomain: IndexSet, matrix: &DenseMatrix) -> Result<Self> {
        let (dlo, ddim) = match domain {
            IndexSet::Finite { lo, hi } => (lo, (hi - lo + 1) as usize),
            _ => {
                return Err(CoreError::InvalidParameter(
                    "dense operator needs finite domain".into(),
                ))
            }
        };
        let (clo, cdim) = match codomain {
            IndexSet::Finite { lo, hi } => (lo, (hi - lo + 1) as usize),
            _ => {
                return Err(CoreError::InvalidParameter(
                    "dense operator needs finite codomain".into(),
                ))
            }
        };
        if matrix.rows() != cdim || matrix.cols() != ddim {
            return Err(CoreError::DimensionMismatch(format!(
                "matrix is {}x{}, spaces need {}x{}",
                matrix.rows(),
                matrix.cols(),
                cdim,
                ddim
            )));
        }
        let mut bands: Vec<Band> = Vec::new();
        // One translation band per offset j - i that carries a nonzero entry.
        let mut offsets: BTreeMap<Index, Vec<C64>> = BTreeMap::new();
        for col in 0..ddim {
            for row in 0..cdim {
                let v = matrix.get(row, col);
                if v != czero() {
                    let i = dlo + col as Index;
                    let j = clo + row as Index;
                    let entry = offsets.entry(j - i).or_insert_with(|| vec![czero(); ddim]);
                    entry[col] = v;
                }
            }
        }
        for (d, table) in offsets {
            let table = Arc::new(table);
            bands.push(Band {
                p: 1,
                r: 1,
                d,
                coef: Arc::new(move |i| {
                    let k = i - dlo;
                    if k >= 0 && (k as usize) < table.len() {
                        table[k as usize]
                    } else {
                        czero()
                    }
                }),
            });
        }
        Ok(BandedOperator {
            domain,
            codomain,
            bands,
        })
    }

    // ----- algebra -----

    pub fn scale(&self, factor: C64) -> BandedOperator {
        if factor == czero() {
            return BandedOperator::zero(self.domain, self.codomain);
        }
        let bands = self
            .bands
            .iter()
            .map(|b| {
                let coef = b.coef.clone();
                Band {
                    p: b.p,
                    r: b.r,
                    d: b.d,
                    coef: Arc::new(move |i| factor * coef(i)),
                }
            })
            .collect();
        BandedOperator {
            domain: self.domain,
            codomain: self.codomain,
            bands,
        }
    }

    pub fn add(&self, other: &BandedOperator) -> Result<BandedOperator> {
        if self.domain != other.domain {
            return Err(CoreError::IndexSetMismatch {
                expected: self.domain,
                got: other.domain,
            });
        }
        if self.codomain != other.codomain {
            return Err(CoreError::IndexSetMismatch {
                expected: self.codomain,
                got: other.codomain,
            });
        }
        let mut out = self.clone();
        for b in &other.bands {
            out.push_band(b.clone());
        }
        Ok(out)
    }

    /// `entry'(i, j) = conj(entry(j, i))`; an involution.
    pub fn adjoint(&self) -> BandedOperator {
        let domain = self.domain;
        let bands = self
            .bands
            .iter()
            .map(|b| {
                let coef = b.coef.clone();
                let (p, r, d) = (b.p, b.r, b.d);
                Band {
                    p: r,
                    r: p,
                    d: -d,
                    coef: Arc::new(move |j| {
                        // Source index of the original band hitting j.
                        let num = match r.checked_mul(j).and_then(|t| t.checked_sub(d)) {
                            Some(n) => n,
                            None => return czero(),
                        };
                        if num % p != 0 {
                            return czero();
                        }
                        let i = num / p;
                        if !domain.contains(i) {
                            return czero();
                        }
                        coef(i).conj()
                    }),
                }
            })
            .collect();
        BandedOperator {
            domain: self.codomain,
            codomain: self.domain,
            bands,
        }
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &BandedOperator) -> Result<BandedOperator> {
        if other.codomain != self.domain {
            return Err(CoreError::IndexSetMismatch {
                expected: self.domain,
                got: other.codomain,
            });
        }
        // Finite-through-finite compositions are materialized eagerly; lazy
        // closures would nest once per factor in long power chains.
        if other.domain.is_finite() && self.codomain.is_finite() && self.domain.is_finite() {
            let inner = other.to_dense()?;
            let outer = self.to_dense()?;
            let product = outer.mul(&inner)?;
            return BandedOperator::dense(other.domain, self.codomain, &product);
        }
        let mid = other.codomain;
        let mut out = BandedOperator::zero(other.domain, self.codomain);
        for ob in &self.bands {
            for ib in &other.bands {
                let p = ib.p.checked_mul(ob.p).ok_or(CoreError::IndexOverflow)?;
                let r = ib.r.checked_mul(ob.r).ok_or(CoreError::IndexOverflow)?;
                let d =
                    ob.p.checked_mul(ib.d)
                        .and_then(|t| ob.d.checked_mul(ib.r).and_then(|u| t.checked_add(u)))
                        .ok_or(CoreError::IndexOverflow)?;
                let ic = ib.coef.clone();
                let oc = ob.coef.clone();
                let (ip, ir, id) = (ib.p, ib.r, ib.d);
                let coef: CoefFn = Arc::new(move |i| {
                    let num = match ip.checked_mul(i).and_then(|t| t.checked_add(id)) {
                        Some(n) => n,
                        None => return czero(),
                    };
                    if num % ir != 0 {
                        return czero();
                    }
                    let m = num / ir;
                    if !mid.contains(m) {
                        return czero();
                    }
                    ic(i) * oc(m)
                });
                out.push_band(Band { p, r, d, coef }.reduced());
            }
        }
        Ok(out)
    }

    /// n-fold composition with itself. Requires a square operator.
    pub fn pow(&self, n: u32) -> Result<BandedOperator> {
        if self.domain != self.codomain {
            return Err(CoreError::IndexSetMismatch {
                expected: self.domain,
                got: self.codomain,
            });
        }
        let mut acc = BandedOperator::identity(self.domain);
        for _ in 0..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    // ----- action -----

    /// Exact matrix-vector product.
    pub fn apply(&self, v: &SupportVector) -> Result<SupportVector> {
        if v.index_set() != self.domain {
            return Err(CoreError::IndexSetMismatch {
                expected: self.domain,
                got: v.index_set(),
            });
        }
        let mut out = SupportVector::zero(self.codomain);
        for band in &self.bands {
            for (i, value) in v.iter() {
                if let Some(j) = band.target(i)? {
                    if self.codomain.contains(j) {
                        out.accumulate(j, (band.coef)(i) * value);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `⟨op e_i, e_j⟩` for i in the domain and j in the codomain.
    pub fn entry(&self, i: Index, j: Index) -> Result<C64> {
        self.domain.check_member(i)?;
        self.codomain.check_member(j)?;
        let mut acc = czero();
        for band in &self.bands {
            if band.target(i)? == Some(j) {
                acc += (band.coef)(i);
            }
        }
        Ok(acc)
    }

    /// Corner restriction to the window `[lo, hi]` on both the domain and
    /// the codomain. Row index = codomain, column index = domain.
    pub fn finite_section(&self, lo: Index, hi: Index) -> Result<DenseMatrix> {
        if lo > hi {
            return Err(CoreError::EmptyWindow);
        }
        for set in [self.domain, self.codomain] {
            if !(set.contains(lo) && set.contains(hi)) {
                return Err(CoreError::WindowOutOfRange { lo, hi, set });
            }
        }
        let dim = (hi - lo + 1) as usize;
        let mut m = DenseMatrix::zeros(dim, dim);
        for col in 0..dim {
            let i = lo + col as Index;
            for band in &self.bands {
                if let Some(j) = band.target(i)? {
                    if j >= lo && j <= hi {
                        let row = (j - lo) as usize;
                        m.set(row, col, m.get(row, col) + (band.coef)(i));
                    }
                }
            }
        }
        Ok(m)
    }

    /// Dense materialization of an operator between finite sets.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let (dlo, ddim) = match self.domain {
            IndexSet::Finite { lo, hi } => (lo, (hi - lo + 1) as usize),
            set => return Err(CoreError::WindowOutOfRange { lo: 0, hi: 0, set }),
        };
        let (clo, cdim) = match self.codomain {
            IndexSet::Finite { lo, hi } => (lo, (hi - lo + 1) as usize),
            set => return Err(CoreError::WindowOutOfRange { lo: 0, hi: 0, set }),
        };
        let mut m = DenseMatrix::zeros(cdim, ddim);
        for col in 0..ddim {
            let i = dlo + col as Index;
            for band in &self.bands {
                if let Some(j) = band.target(i)? {
                    if self.codomain.contains(j) {
                        let row = (j - clo) as usize;
                        m.set(row, col, m.get(row, col) + (band.coef)(i));
                    }
                }
            }
        }
        Ok(m)
    }

    // ----- structure probes -----

    /// True when the operator acts diagonally on the probed basis vectors.
    pub fn is_diagonal_on_probes(&self, horizon: usize) -> Result<bool> {
        if self.domain != self.codomain {
            return Ok(false);
        }
        for i in self.domain.probe_indices(horizon) {
            let image = self.apply(&SupportVector::basis(self.domain, i)?)?;
            for (j, _) in image.iter() {
                if j != i {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Diagonal entry ⟨op e_i, e_i⟩.
    pub fn diagonal_entry(&self, i: Index) -> Result<C64> {
        self.entry(i, i)
    }
}
