use std::collections::BTreeMap;

use super::{Index, IndexSet, C64};
use crate::error::{CoreError, Result};

/// Finitely supported complex vector over an index set. Exact zeros are not
/// stored; all stored indices belong to the index set.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    index_set: IndexSet,
    entries: BTreeMap<Index, C64>,
}

impl SupportVector {
    pub fn zero(index_set: IndexSet) -> Self {
        SupportVector {
            index_set,
            entries: BTreeMap::new(),
        }
    }

    pub fn basis(index_set: IndexSet, i: Index) -> Result<Self> {
        index_set.check_member(i)?;
        let mut entries = BTreeMap::new();
        entries.insert(i, C64::new(1.0, 0.0));
        Ok(SupportVector { index_set, entries })
    }

    pub fn from_entries<I>(index_set: IndexSet, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Index, C64)>,
    {
        let mut v = SupportVector::zero(index_set);
        for (i, value) in entries {
            index_set.check_member(i)?;
            if value != C64::new(0.0, 0.0) {
                let slot = v.entries.entry(i).or_insert(C64::new(0.0, 0.0));
                *slot += value;
                if *slot == C64::new(0.0, 0.0) {
                    v.entries.remove(&i);
                }
            }
        }
        Ok(v)
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn get(&self, i: Index) -> C64 {
        self.entries.get(&i).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn set(&mut self, i: Index, value: C64) -> Result<()> {
        self.index_set.check_member(i)?;
        if value == C64::new(0.0, 0.0) {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, value);
        }
        Ok(())
    }

    pub(crate) fn accumulate(&mut self, i: Index, value: C64) {
        if value == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.entries.entry(i).or_insert(C64::new(0.0, 0.0));
        *slot += value;
        if *slot == C64::new(0.0, 0.0) {
            self.entries.remove(&i);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Index, C64)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest supported index, when nonempty.
    pub fn support_bounds(&self) -> Option<(Index, Index)> {
        let lo = self.entries.keys().next()?;
        let hi = self.entries.keys().next_back()?;
        Some((*lo, *hi))
    }

    pub fn support_diameter(&self) -> Index {
        match self.support_bounds() {
            Some((lo, hi)) => hi - lo,
            None => 0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        // The empty sum folds from -0.0; keep the zero positive.
        self.entries.values().map(|v| v.norm_sqr()).sum::<f64>() + 0.0
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ⟨self, other⟩, linear in the first argument.
    pub fn inner(&self, other: &SupportVector) -> Result<C64> {
        self.check_same_space(other)?;
        let mut acc = C64::new(0.0, 0.0);
        // Iterate over the smaller support.
        let (a, _b) = if self.entries.len() <= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (&i, _) in &a.entries {
            acc += self.get(i) * other.get(i).conj();
        }
        Ok(acc)
    }

    pub fn add(&self, other: &SupportVector) -> Result<SupportVector> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (&i, &v) in &other.entries {
            out.accumulate(i, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SupportVector) -> Result<SupportVector> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (&i, &v) in &other.entries {
            out.accumulate(i, -v);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: C64) -> SupportVector {
        if factor == C64::new(0.0, 0.0) {
            return SupportVector::zero(self.index_set);
        }
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= factor;
        }
        out
    }

    fn check_same_space(&self, other: &SupportVector) -> Result<()> {
        if self.index_set != other.index_set {
            return Err(CoreError::IndexSetMismatch {
                expected: self.index_set,
                got: other.index_set,
            });
        }
        Ok(())
    }
}
