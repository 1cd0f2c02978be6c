use super::C64;
use crate::error::{CoreError, Result};

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Small dense complex matrix, row-major. Used for finite sections and the
/// dense oracles; the eigen routines target sizes well below 100.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(CoreError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == czero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(CoreError::DimensionMismatch(format!(
                "matvec: {}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![czero(); self.rows];
        for i in 0..self.rows {
            let mut acc = czero();
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: C64) -> DenseMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= factor;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CoreError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn check_square(&self) -> Result<usize> {
        if self.rows != self.cols {
            return Err(CoreError::DimensionMismatch(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..=i {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns eigenvalues in descending order with matching
    /// eigenvector columns: `A = Q diag(λ) Q*`.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, DenseMatrix)> {
        let n = self.check_square()?;
        let mut a = self.clone();
        let mut q = DenseMatrix::identity(n);
        let scale = self.frobenius().max(1.0);
        for _sweep in 0..60 {
            let mut off = 0.0;
            for p in 0..n {
                for qq in (p + 1)..n {
                    off += a.get(p, qq).norm_sqr();
                }
            }
            if off.sqrt() <= 1e-14 * scale {
                break;
            }
            for p in 0..n {
                for col in (p + 1)..n {
                    let apq = a.get(p, col);
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    let app = a.get(p, p).re;
                    let aqq = a.get(col, col).re;
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let cth = 1.0 / (1.0 + t * t).sqrt();
                    let sth = t * cth;
                    // R = diag(phase, 1) * [[c, -s], [s, c]] in the (p, col) plane.
                    let rpp = phase * cth;
                    let rpq = -phase * sth;
                    let rqp = C64::new(sth, 0.0);
                    let rqq = C64::new(cth, 0.0);
                    // A <- R* A R
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, col);
                        a.set(k, p, akp * rpp + akq * rqp);
                        a.set(k, col, akp * rpq + akq * rqq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(col, k);
                        a.set(p, k, rpp.conj() * apk + rqp.conj() * aqk);
                        a.set(col, k, rpq.conj() * apk + rqq.conj() * aqk);
                    }
                    for k in 0..n {
                        let qkp = q.get(k, p);
                        let qkq = q.get(k, col);
                        q.set(k, p, qkp * rpp + qkq * rqp);
                        q.set(k, col, qkp * rpq + qkq * rqq);
                    }
                }
            }
        }
        let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a.get(i, i).re, i)).collect();
        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        let vals: Vec<f64> = pairs.iter().map(|&(v, _)| v).collect();
        let mut vecs = DenseMatrix::zeros(n, n);
        for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
            for k in 0..n {
                vecs.set(k, new_col, q.get(k, old_col));
            }
        }
        Ok((vals, vecs))
    }

    /// Square root of a positive semidefinite Hermitian matrix. Negative
    /// eigenvalues within roundoff are clamped to zero.
    pub fn psd_sqrt(&self) -> Result<DenseMatrix> {
        let n = self.check_square()?;
        let (vals, q) = self.hermitian_eigen()?;
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            let s = lam.max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + q.get(i, k) * q.get(j, k).conj() * s;
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let gram = if self.rows >= self.cols {
            self.dagger().mul(self)?
        } else {
            self.mul(&self.dagger())?
        };
        let (vals, _) = gram.hermitian_eigen()?;
        Ok(vals.into_iter().map(|v| v.max(0.0).sqrt()).collect())
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> Result<f64> {
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    /// Orthogonal projector onto the column space; columns with singular
    /// value below `rel_tol` times the largest are treated as zero.
    pub fn col_space_projector(&self, rel_tol: f64) -> Result<DenseMatrix> {
        let gram = self.mul(&self.dagger())?;
        let (vals, q) = gram.hermitian_eigen()?;
        let top = vals.first().copied().unwrap_or(0.0).max(0.0);
        let cut = top * rel_tol;
        let n = self.rows;
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= cut || lam <= 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + q.get(i, k) * q.get(j, k).conj();
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// All eigenvalues of a general complex matrix via Hessenberg reduction
    /// and shifted QR iteration.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let n = self.check_square()?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut h = self.clone();
        hessenberg(&mut h);
        let scale = h.frobenius().max(1.0);
        let eps = 1e-15 * scale;
        let mut eigs = Vec::with_capacity(n);
        let mut hi = n - 1;
        let mut iter_guard = 0usize;
        loop {
            // Deflate converged subdiagonals.
            loop {
                if hi == 0 {
                    eigs.push(h.get(0, 0));
                    return finish_eigs(eigs, n);
                }
                let sub = h.get(hi, hi - 1).norm();
                if sub <= eps.max(1e-14 * (h.get(hi - 1, hi - 1).norm() + h.get(hi, hi).norm())) {
                    eigs.push(h.get(hi, hi));
                    hi -= 1;
                } else {
                    break;
                }
            }
            // Find the start of the active block.
            let mut lo = hi;
            while lo > 0 {
                let sub = h.get(lo, lo - 1).norm();
                if sub <= eps.max(1e-14 * (h.get(lo - 1, lo - 1).norm() + h.get(lo, lo).norm())) {
                    break;
                }
                lo -= 1;
            }
            if hi == lo + 1 {
                // Solve the trailing 2x2 block directly.
                let (l1, l2) = eig2(h.get(lo, lo), h.get(lo, hi), h.get(hi, lo), h.get(hi, hi));
                eigs.push(l1);
                eigs.push(l2);
                if lo == 0 {
                    return finish_eigs(eigs, n);
                }
                hi = lo - 1;
                continue;
            }
            iter_guard += 1;
            if iter_guard > 60 * n {
                return Err(CoreError::NoConvergence("QR eigenvalue iteration".into()));
            }
            let mu = if iter_guard % 12 == 0 {
                // Exceptional shift to break stagnation.
                h.get(hi, hi) + C64::new(h.get(hi, hi - 1).norm(), 0.0)
            } else {
                wilkinson_shift(
                    h.get(hi - 1, hi - 1),
                    h.get(hi - 1, hi),
                    h.get(hi, hi - 1),
                    h.get(hi, hi),
                )
            };
            qr_step(&mut h, lo, hi, mu);
        }
    }
}

fn finish_eigs(mut eigs: Vec<C64>, n: usize) -> Result<Vec<C64>> {
    debug_assert_eq!(eigs.len(), n);
    eigs.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    Ok(eigs)
}

fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut x: Vec<C64> = (k + 1..n).map(|i| a.get(i, k)).collect();
        let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            continue;
        }
        let alpha = if x[0].norm() > 0.0 {
            -(x[0] / x[0].norm()) * norm
        } else {
            C64::new(-norm, 0.0)
        };
        x[0] -= alpha;
        let vnorm2: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        if vnorm2 <= 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // A <- H A, rows k+1..n
        for j in 0..n {
            let mut s = czero();
            for (idx, v) in x.iter().enumerate() {
                s += v.conj() * a.get(k + 1 + idx, j);
            }
            s *= beta;
            for (idx, v) in x.iter().enumerate() {
                let cur = a.get(k + 1 + idx, j);
                a.set(k + 1 + idx, j, cur - s * v);
            }
        }
        // A <- A H, cols k+1..n
        for i in 0..n {
            let mut s = czero();
            for (idx, v) in x.iter().enumerate() {
                s += a.get(i, k + 1 + idx) * *v;
            }
            s *= beta;
            for (idx, v) in x.iter().enumerate() {
                let cur = a.get(i, k + 1 + idx);
                a.set(i, k + 1 + idx, cur - s * v.conj());
            }
        }
        // Enforce the Hessenberg zeros exactly.
        a.set(k + 1, k, alpha);
        for i in k + 2..n {
            a.set(i, k, czero());
        }
    }
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let delta = (a - d) * 0.5;
    let disc = (delta * delta + b * c).sqrt();
    (half_tr + disc, half_tr - disc)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let delta = (a - d) * 0.5;
    let disc = (delta * delta + b * c).sqrt();
    // Pick the root closer to d.
    let denom1 = delta + disc;
    let denom2 = delta - disc;
    let denom = if denom1.norm() >= denom2.norm() {
        denom1
    } else {
        denom2
    };
    if denom.norm() <= 1e-300 {
        d
    } else {
        d - (b * c) / denom
    }
}

fn givens(f: C64, g: C64) -> (f64, C64) {
    if g.norm() == 0.0 {
        return (1.0, czero());
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let denom = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / denom;
    let s = (f / f.norm()) * g.conj() / denom;
    (c, s)
}

fn qr_step(h: &mut DenseMatrix, lo: usize, hi: usize, mu: C64) {
    let n = h.rows();
    for i in lo..=hi {
        let v = h.get(i, i) - mu;
        h.set(i, i, v);
    }
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h.get(i, i), h.get(i + 1, i));
        rots.push((c, s));
        for j in i..n {
            let a = h.get(i, j);
            let b = h.get(i + 1, j);
            h.set(i, j, a * c + b * s);
            h.set(i + 1, j, -a * s.conj() + b * c);
        }
    }
    for (k, &(c, s)) in rots.iter().enumerate() {
        let i = lo + k;
        let top = (i + 1).min(hi) + 1;
        for row in 0..top.min(n) {
            let a = h.get(row, i);
            let b = h.get(row, i + 1);
            h.set(row, i, a * c + b * s.conj());
            h.set(row, i + 1, -a * s + b * c);
        }
    }
    for i in lo..=hi {
        let v = h.get(i, i) + mu;
        h.set(i, i, v);
    }
}
