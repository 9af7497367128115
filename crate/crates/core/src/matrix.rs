//! Row-major dense matrices and the factorizations the solvers need.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Relative pivot tolerance used by every factorization in this crate.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// A rectangular real matrix stored in row-major order.
#[derive(Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting a length mismatch or
    /// any non-finite entry.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (i, v) in values.iter().enumerate() {
            self.data[i * self.cols + j] = *v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Matrix whose columns are `cols` of `self`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            let src = self.row(i);
            for (k, &j) in cols.iter().enumerate() {
                out.data[i * cols.len() + k] = src[j];
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, rhs.row(k), dst);
                }
            }
        }
        Ok(out)
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for a matrix with {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        self.gemv(x, &mut out);
        Ok(out)
    }

    /// `Aᵀ y`.
    pub fn mul_t_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} for a matrix with {} rows",
                y.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        self.gemv_t(y, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn gemv(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    #[inline]
    pub(crate) fn gemv_t(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), out);
            }
        }
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self::from_vec_unchecked(self.rows, self.cols, data))
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        Self::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|v| v * c).collect())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_sq())
    }

    pub fn entrywise_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Number of entries of column `j` with `|x_ij| > rel · max_i |x_ij|`.
    pub fn column_support(&self, j: usize, rel: f64) -> usize {
        let col = self.column(j);
        support_size(&col, rel)
    }
}

/// Size of `{i : |x_i| > rel · ‖x‖_∞}`; zero for the zero vector.
pub fn support_size(x: &[f64], rel: f64) -> usize {
    let peak = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if peak == 0.0 {
        return 0;
    }
    x.iter().filter(|v| v.abs() > rel * peak).count()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    libm::sqrt(dot(x, x))
}

pub(crate) fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Cholesky factor `L` of `AAᵀ` for a wide, full-row-rank `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactor {
    size: usize,
    lower: Vec<f64>,
}

impl GramFactor {
    /// Factors a symmetric positive definite matrix given in row-major
    /// order. A pivot `d_j ≤ PIVOT_TOLERANCE · max_i g_ii` is rejected.
    pub fn factor_spd(size: usize, g: &[f64]) -> Result<Self> {
        debug_assert_eq!(g.len(), size * size);
        let scale = (0..size).fold(0.0_f64, |acc, i| acc.max(g[i * size + i]));
        let mut l = vec![0.0; size * size];
        for j in 0..size {
            let (head, tail) = l.split_at_mut(j * size);
            let row_j = &mut tail[..size];
            for k in 0..j {
                let row_k = &head[k * size..k * size + k + 1];
                let s = g[j * size + k] - dot(&row_j[..k], &row_k[..k]);
                row_j[k] = s / row_k[k];
            }
            let d = g[j * size + j] - dot(&row_j[..j], &row_j[..j]);
            if !(d > PIVOT_TOLERANCE * scale) {
                return Err(Error::Singular { pivot: j });
            }
            row_j[j] = libm::sqrt(d);
        }
        Ok(Self { size, lower: l })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn lower(&self) -> DenseMatrix {
        DenseMatrix::from_vec_unchecked(self.size, self.size, self.lower.clone())
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let m = self.size;
        let mut out = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = dot(&self.lower[i * m..i * m + j + 1], &self.lower[j * m..j * m + j + 1]);
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    /// Solves `L Lᵀ y = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let m = self.size;
        debug_assert_eq!(rhs.len(), m);
        for i in 0..m {
            let row = &self.lower[i * m..i * m + i];
            rhs[i] = (rhs[i] - dot(row, &rhs[..i])) / self.lower[i * m + i];
        }
        // Lᵀ by rows of L, so the inner loop is contiguous
        for i in (0..m).rev() {
            let yi = rhs[i] / self.lower[i * m + i];
            rhs[i] = yi;
            axpy(-yi, &self.lower[i * m..i * m + i], &mut rhs[..i]);
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.size {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for a factor of size {}",
                rhs.len(),
                self.size
            )));
        }
        let mut y = rhs.to_vec();
        self.solve_in_place(&mut y);
        Ok(y)
    }
}

fn gram(a: &DenseMatrix) -> Vec<f64> {
    let m = a.rows();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let v = dot(a.row(i), a.row(j));
            g[i * m + j] = v;
            g[j * m + i] = v;
        }
    }
    g
}

/// Cholesky factor of `AAᵀ`. Requires `m ≤ n` and full row rank.
pub fn cholesky_gram(a: &DenseMatrix) -> Result<GramFactor> {
    let (m, n) = a.shape();
    if m == 0 || m > n {
        return Err(Error::Dimension(format!("expected a wide matrix with 1 <= m <= n, got {m}x{n}")));
    }
    GramFactor::factor_spd(m, &gram(a))
}

/// Moore–Penrose pseudoinverse `Aᵀ(AAᵀ)⁻¹` of a full-row-rank wide matrix.
pub fn mpp(a: &DenseMatrix) -> Result<DenseMatrix> {
    let factor = cholesky_gram(a)?;
    Ok(mpp_with_factor(a, &factor))
}

pub(crate) fn mpp_with_factor(a: &DenseMatrix, factor: &GramFactor) -> DenseMatrix {
    let (m, n) = a.shape();
    // rows of G⁻¹ (symmetric, so also its columns)
    let mut ginv = DenseMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for i in 0..m {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[i] = 1.0;
        factor.solve_in_place(&mut e);
        ginv.data[i * m..(i + 1) * m].copy_from_slice(&e);
    }
    // X = Aᵀ G⁻¹, row r of X is Σ_k A[k, r] · G⁻¹[k, :]
    let mut x = DenseMatrix::zeros(n, m);
    for k in 0..m {
        let grow = &ginv.data[k * m..(k + 1) * m];
        for r in 0..n {
            let akr = a.get(k, r);
            axpy(akr, grow, &mut x.data[r * m..(r + 1) * m]);
        }
    }
    x
}

/// Orthogonal projection of `z` onto `{x : Ax = b}`:
/// `z − Aᵀ(AAᵀ)⁻¹(Az − b)`.
pub fn affine_project(a: &DenseMatrix, factor: &GramFactor, b: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if factor.size() != m || b.len() != m || z.len() != n {
        return Err(Error::Dimension(format!(
            "affine projection with A {m}x{n}, factor {}, b {}, z {}",
            factor.size(),
            b.len(),
            z.len()
        )));
    }
    let mut out = vec![0.0; n];
    let mut r = vec![0.0; m];
    Projector { a, factor, b }.apply(z, &mut r, &mut out);
    Ok(out)
}

/// Allocation-free projection used inside the iterative solver.
pub(crate) struct Projector<'a> {
    pub a: &'a DenseMatrix,
    pub factor: &'a GramFactor,
    pub b: &'a [f64],
}

impl Projector<'_> {
    #[inline]
    pub fn apply(&self, z: &[f64], scratch_m: &mut [f64], out: &mut [f64]) {
        self.a.gemv(z, scratch_m);
        for (r, bi) in scratch_m.iter_mut().zip(self.b) {
            *r -= bi;
        }
        self.factor.solve_in_place(scratch_m);
        out.copy_from_slice(z);
        for (i, &w) in scratch_m.iter().enumerate() {
            if w != 0.0 {
                axpy(-w, self.a.row(i), out);
            }
        }
    }
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactor {
    size: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactor {
    /// Rejects the matrix when a pivot falls below
    /// `PIVOT_TOLERANCE · max |a_ij|`.
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let (n, c) = a.shape();
        if n != c {
            return Err(Error::Dimension(format!("LU needs a square matrix, got {n}x{c}")));
        }
        let scale = a.max_abs();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if !(best > PIVOT_TOLERANCE * scale) {
                return Err(Error::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let (upper, lower) = lu.split_at_mut((k + 1) * n);
            let row_k = &upper[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row_i = &mut lower[i * n..(i + 1) * n];
                let f = row_i[k] / pivot;
                row_i[k] = f;
                if f != 0.0 {
                    axpy(-f, row_k, &mut row_i[k + 1..]);
                }
            }
        }
        Ok(Self { size: n, lu, perm })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Solves `M x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.size;
        assert_eq!(rhs.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu[i * n..i * n + i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves `Mᵀ y = rhs`.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.size;
        assert_eq!(rhs.len(), n);
        // Mᵀ = Uᵀ Lᵀ P, so solve Uᵀ w = rhs, Lᵀ v = w, y = Pᵀ v.
        let mut w = rhs.to_vec();
        for i in 0..n {
            let d = self.lu[i * n + i];
            w[i] /= d;
            let wi = w[i];
            if wi != 0.0 {
                axpy(-wi, &self.lu[i * n + i + 1..(i + 1) * n], &mut w[i + 1..]);
            }
        }
        for i in (0..n).rev() {
            let wi = w[i];
            if wi != 0.0 {
                let (head, _) = w.split_at_mut(i);
                axpy(-wi, &self.lu[i * n..i * n + i], head);
            }
        }
        let mut y = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = w[k];
        }
        y
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.size;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            inv.set_column(j, &col);
        }
        inv
    }
}
