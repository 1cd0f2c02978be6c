use std::fmt;

use crate::error::{CoreError, Result};

/// Basis index. Wide on purpose: stride-2 isometries double indices per
/// power, so probe supports reach ~2^70 within the default horizons.
pub type Index = i128;

/// Carrier of an ℓ² basis: a finite interval, the naturals or the integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexSet {
    Finite { lo: Index, hi: Index },
    HalfLine,
    FullLine,
}

impl IndexSet {
    pub fn finite(lo: Index, hi: Index) -> Result<Self> {
        if lo > hi {
            return Err(CoreError::InvalidParameter(format!(
                "finite index set requires lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(IndexSet::Finite { lo, hi })
    }

    pub fn contains(&self, i: Index) -> bool {
        match *self {
            IndexSet::Finite { lo, hi } => lo <= i && i <= hi,
            IndexSet::HalfLine => i >= 0,
            IndexSet::FullLine => true,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, IndexSet::Finite { .. })
    }

    /// Dimension when finite.
    pub fn dim(&self) -> Option<usize> {
        match *self {
            IndexSet::Finite { lo, hi } => Some((hi - lo + 1) as usize),
            _ => None,
        }
    }

    /// Canonical probe enumeration: the first `count` basis indices.
    /// Finite sets enumerate from `lo`, the half-line from 0, the full line
    /// as 0, 1, -1, 2, -2, ...
    pub fn probe_indices(&self, count: usize) -> Vec<Index> {
        let mut out = Vec::with_capacity(count);
        match *self {
            IndexSet::Finite { lo, hi } => {
                let mut i = lo;
                while i <= hi && out.len() < count {
                    out.push(i);
                    i += 1;
                }
            }
            IndexSet::HalfLine => {
                for i in 0..count as Index {
                    out.push(i);
                }
            }
            IndexSet::FullLine => {
                out.push(0);
                let mut k: Index = 1;
                while out.len() < count {
                    out.push(k);
                    if out.len() < count {
                        out.push(-k);
                    }
                    k += 1;
                }
            }
        }
        out
    }

    pub(crate) fn check_member(&self, i: Index) -> Result<()> {
        if self.contains(i) {
            Ok(())
        } else {
            Err(CoreError::IndexOutOfRange {
                index: i,
                set: *self,
            })
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            IndexSet::Finite { lo, hi } => write!(f, "finite[{lo},{hi}]"),
            IndexSet::HalfLine => write!(f, "half-line"),
            IndexSet::FullLine => write!(f, "full-line"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_requires_ordered_bounds() {
        assert!(IndexSet::finite(3, 2).is_err());
        assert!(IndexSet::finite(2, 2).is_ok());
    }

    #[test]
    fn membership_is_consistent_with_kind() {
        let f = IndexSet::finite(-1, 4).unwrap();
        assert!(f.contains(-1) && f.contains(4) && !f.contains(5));
        assert!(IndexSet::HalfLine.contains(0) && !IndexSet::HalfLine.contains(-1));
        assert!(IndexSet::FullLine.contains(-1_000_000));
    }

    #[test]
    fn probe_enumeration_full_line_alternates() {
        assert_eq!(IndexSet::FullLine.probe_indices(5), vec![0, 1, -1, 2, -2]);
        assert_eq!(IndexSet::finite(2, 3).unwrap().probe_indices(5), vec![2, 3]);
    }
}
