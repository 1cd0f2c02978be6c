//! Exact linear algebra over finite and structured infinite index sets:
//! finitely supported vectors, banded operators with rational-affine index
//! maps, adjoints, compositions and dense finite sections.

mod banded;
mod dense;
mod index;
mod vector;

pub use banded::{Band, BandedOperator, CoefFn};
pub use dense::DenseMatrix;
pub use index::{Index, IndexSet};
pub use vector::SupportVector;

use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;

#[cfg(test)]
pub(crate) fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}
