//! Dense row-major matrices, a one-sided Jacobi SVD, and the seeded random
//! number generator every other module draws from.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix, rejecting a length mismatch or non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix contains non-finite entries"));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix without validating entries. The length must still match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Matrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        let data = rows.iter().flatten().copied().collect();
        Matrix::new(rows.len(), cols, data)
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

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// The leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        assert!(k <= self.cols);
        let mut out = Matrix::zeros(self.rows, k);
        for r in 0..self.rows {
            out.row_mut(r).copy_from_slice(&self.row(r)[..k]);
        }
        out
    }

    /// Selected rows, in the order given.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix::from_vec(rows.len(), self.cols, data)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows == 0 {
            return Ok(other.clone());
        }
        if other.rows == 0 {
            return Ok(self.clone());
        }
        if self.cols != other.cols {
            return Err(Error::invalid(format!(
                "vstack column mismatch: {} vs {}",
                self.cols, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Matrix::from_vec(self.rows + other.rows, self.cols, data))
    }

    fn check_same_shape(&self, other: &Matrix, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!(
                "{op}: shape mismatch {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix::from_vec(self.rows, self.cols, data))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix::from_vec(self.rows, self.cols, data))
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Matrix) -> Result<()> {
        self.check_same_shape(other, "axpy")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&self, alpha: f64) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|v| v * alpha).collect())
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_columns(&mut self, factors: &[f64]) {
        assert_eq!(factors.len(), self.cols);
        for r in 0..self.rows {
            for (v, f) in self.row_mut(r).iter_mut().zip(factors) {
                *v *= f;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "matmul: {:?} x {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(gemm(
            self.rows,
            self.cols,
            other.cols,
            GemmOperand::plain(self),
            GemmOperand::plain(other),
        ))
    }

    /// `self · otherᵀ`.
    pub fn matmul_t(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::invalid(format!(
                "matmul_t: {:?} x {:?}ᵀ",
                self.shape(),
                other.shape()
            )));
        }
        Ok(gemm(
            self.rows,
            self.cols,
            other.rows,
            GemmOperand::plain(self),
            GemmOperand::transposed(other),
        ))
    }

    /// `selfᵀ · other`.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::invalid(format!(
                "t_matmul: {:?}ᵀ x {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(gemm(
            self.cols,
            self.rows,
            other.cols,
            GemmOperand::transposed(self),
            GemmOperand::plain(other),
        ))
    }
}

struct GemmOperand<'a> {
    data: &'a [f64],
    row_stride: isize,
    col_stride: isize,
}

impl<'a> GemmOperand<'a> {
    fn plain(m: &'a Matrix) -> Self {
        GemmOperand {
            data: &m.data,
            row_stride: m.cols as isize,
            col_stride: 1,
        }
    }

    fn transposed(m: &'a Matrix) -> Self {
        GemmOperand {
            data: &m.data,
            row_stride: 1,
            col_stride: m.cols as isize,
        }
    }
}

fn gemm(m: usize, k: usize, n: usize, a: GemmOperand<'_>, b: GemmOperand<'_>) -> Matrix {
    let mut out = Matrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    // SAFETY: the operand shapes were validated by the callers, so every
    // strided access stays inside the borrowed slices, and `out` is a fresh
    // m×n row-major buffer that aliases neither input.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.row_stride,
            a.col_stride,
            b.data.as_ptr(),
            b.row_stride,
            b.col_stride,
            0.0,
            out.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    out
}

pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Thin singular value decomposition `a = U · diag(S) · Vᵀ`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `rows × r` with orthonormal columns.
    pub left_vectors: Matrix,
    /// Length `r`, nonincreasing.
    pub singular_values: Vec<f64>,
    /// `r × cols` with orthonormal rows.
    pub right_vectors: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.left_vectors.clone();
        us.scale_columns(&self.singular_values);
        us.matmul(&self.right_vectors).expect("svd factor shapes agree")
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;
const JACOBI_TOL: f64 = 1e-15;

/// SVD by one-sided (Hestenes) Jacobi rotations, `r = min(rows, cols)`.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    if !a.is_finite() {
        return Err(Error::invalid("svd input contains non-finite entries"));
    }
    if a.rows >= a.cols {
        let (u, s, v) = jacobi_tall(a);
        Ok(SvdResult {
            left_vectors: u,
            singular_values: s,
            right_vectors: v.transpose(),
        })
    } else {
        let (u, s, v) = jacobi_tall(&a.transpose());
        Ok(SvdResult {
            left_vectors: v,
            singular_values: s,
            right_vectors: u.transpose(),
        })
    }
}

/// Tall case (`rows ≥ cols`). Returns U (m×n), S (n), V (n×n).
fn jacobi_tall(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    // Column-major working copies.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..m {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let sigma_max = norms[order[0]];
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    let mut v_out = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        singular_values.push(sigma);
        let col = if sigma > 0.0 && sigma > 1e-13 * sigma_max {
            cols[src].iter().map(|x| x / sigma).collect()
        } else {
            vec![0.0; m]
        };
        u_cols.push(col);
        for (i, &x) in v[src].iter().enumerate() {
            v_out.set(i, dst, x);
        }
    }
    orthonormalize_columns(&mut u_cols, m);

    let mut u = Matrix::zeros(m, n);
    for (j, col) in u_cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            u.set(i, j, x);
        }
    }
    (u, singular_values, v_out)
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Columns that
/// collapse (null-space directions) are replaced by canonical vectors
/// orthogonalized against everything kept so far.
fn orthonormalize_columns(cols: &mut [Vec<f64>], m: usize) {
    let mut next_canonical = 0usize;
    for j in 0..cols.len() {
        let mut candidate = std::mem::take(&mut cols[j]);
        let mut accepted = false;
        loop {
            for _ in 0..2 {
                for prev in cols[..j].iter() {
                    let proj = dot(prev, &candidate);
                    for (c, p) in candidate.iter_mut().zip(prev) {
                        *c -= proj * p;
                    }
                }
            }
            let norm = dot(&candidate, &candidate).sqrt();
            if norm > 1e-8 {
                for c in candidate.iter_mut() {
                    *c /= norm;
                }
                accepted = true;
            }
            if accepted || next_canonical >= m {
                break;
            }
            candidate = vec![0.0; m];
            candidate[next_canonical] = 1.0;
            next_canonical += 1;
        }
        cols[j] = candidate;
    }
}

/// Mixes a master seed with a stream tag into an independent sub-seed
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(stream.wrapping_mul(0xD6E8_FEB8_6659_FD93)))
}

/// Seeded, reproducible generator.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for a named consumer of this seed.
    pub fn fork(&self, stream: u64) -> Rng {
        Rng::new(derive_seed(self.seed, stream))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.inner);
    }

    /// `amount` distinct indices from `0..n`, in random order.
    pub fn sample_indices(&mut self, n: usize, amount: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.inner, n, amount.min(n)).into_vec()
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

/// I.i.d. standard normal entries.
pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.normal()).collect();
    Matrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::Rng;
    use super::*;
    use proptest::prelude::*;

    fn rel_reconstruction_error(a: &Matrix) -> f64 {
        let res = svd(a).unwrap();
        res.reconstruct().sub(a).unwrap().frobenius_norm() / a.frobenius_norm()
    }

    fn max_gram_deviation(cols_matrix: &Matrix) -> f64 {
        let gram = cols_matrix.t_matmul(cols_matrix).unwrap();
        gram.max_abs_diff(&Matrix::identity(gram.rows()))
    }

    #[test]
    fn svd_identity() {
        let res = svd(&Matrix::identity(3)).unwrap();
        assert_eq!(res.singular_values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn svd_diagonal() {
        let res = svd(&Matrix::diag(&[3.0, 2.0])).unwrap();
        assert_eq!(res.singular_values, vec![3.0, 2.0]);
        let res = svd(&Matrix::diag(&[2.0, 3.0])).unwrap();
        assert_eq!(res.singular_values, vec![3.0, 2.0]);
    }

    #[test]
    fn svd_random_reconstructs() {
        let mut rng = Rng::new(7);
        let a = gaussian_matrix(&mut rng, 4, 3);
        assert!(rel_reconstruction_error(&a) < 1e-8);
    }

    #[test]
    fn svd_wide_and_rank_deficient() {
        let mut rng = Rng::new(11);
        let a = gaussian_matrix(&mut rng, 3, 7);
        assert!(rel_reconstruction_error(&a) < 1e-8);

        // rank 1: outer product
        let x = gaussian_matrix(&mut rng, 6, 1);
        let y = gaussian_matrix(&mut rng, 1, 4);
        let a = x.matmul(&y).unwrap();
        let res = svd(&a).unwrap();
        assert!(res.singular_values[1] < 1e-12 * res.singular_values[0]);
        assert!(max_gram_deviation(&res.left_vectors) < 1e-8);
        assert!(rel_reconstruction_error(&a) < 1e-8);

        let zero = Matrix::zeros(3, 2);
        let res = svd(&zero).unwrap();
        assert_eq!(res.singular_values, vec![0.0, 0.0]);
        assert!(max_gram_deviation(&res.left_vectors) < 1e-8);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let a = Matrix::from_vec(1, 2, vec![1.0, f64::NAN]);
        assert!(matches!(svd(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&Matrix::from_vec(1, 2, vec![3.0, 4.0])), 5.0);
        assert_eq!(frobenius_norm(&Matrix::zeros(2, 2)), 0.0);
        assert_eq!(frobenius_norm(&Matrix::filled(2, 2, 1.0)), 2.0);
    }

    #[test]
    fn gaussian_determinism_and_moments() {
        let a = gaussian_matrix(&mut Rng::new(3), 5, 5);
        let b = gaussian_matrix(&mut Rng::new(3), 5, 5);
        assert_eq!(a, b);
        let c = gaussian_matrix(&mut Rng::new(4), 2, 2);
        assert_ne!(a.leading_columns(2).select_rows(&[0, 1]), c);

        let g = gaussian_matrix(&mut Rng::new(99), 100, 100);
        let n = g.data().len() as f64;
        let mean = g.data().iter().sum::<f64>() / n;
        let var = g.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn matmul_variants_agree() {
        let mut rng = Rng::new(5);
        let a = gaussian_matrix(&mut rng, 4, 3);
        let b = gaussian_matrix(&mut rng, 5, 3);
        let direct = a.matmul(&b.transpose()).unwrap();
        assert!(direct.max_abs_diff(&a.matmul_t(&b).unwrap()) < 1e-14);
        let c = gaussian_matrix(&mut rng, 4, 2);
        let tn = a.t_matmul(&c).unwrap();
        assert!(tn.max_abs_diff(&a.transpose().matmul(&c).unwrap()) < 1e-14);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let s: Vec<u64> = (0..8).map(|k| derive_seed(1, k)).collect();
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn svd_contract(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12) {
            let a = gaussian_matrix(&mut Rng::new(seed), rows, cols);
            let res = svd(&a).unwrap();
            let r = rows.min(cols);
            prop_assert_eq!(res.singular_values.len(), r);
            prop_assert!(res.singular_values.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(rel_reconstruction_error(&a) < 1e-8);
            prop_assert!(max_gram_deviation(&res.left_vectors) < 1e-8);
            prop_assert!(max_gram_deviation(&res.right_vectors.transpose()) < 1e-8);
            let energy: f64 = res.singular_values.iter().map(|s| s * s).sum();
            let fro2 = a.frobenius_norm().powi(2);
            prop_assert!((energy - fro2).abs() <= 1e-8 * fro2);
        }

        #[test]
        fn distinct_seeds_give_distinct_draws(seed in any::<u64>()) {
            let a = gaussian_matrix(&mut Rng::new(seed), 2, 2);
            let b = gaussian_matrix(&mut Rng::new(seed.wrapping_add(1)), 2, 2);
            prop_assert_ne!(a, b);
        }
    }
}
