//! Dense linear-algebra primitives.
//!
//! Matrices are stored row-major in [`DenseMatrix`]. Heavy kernels (the thin
//! SVD and matrix products) are delegated to `faer` through zero-copy
//! row-major views; everything else is plain slice arithmetic.

use std::fmt;
use std::ops::Index;

use faer::{Mat, MatRef};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, num_err, param_err, Result};

/// Row-major matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(dim_err!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(dim_err!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    /// Matrix with i.i.d. standard normal entries, drawn in row-major order.
    pub fn standard_normal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Largest absolute entrywise difference; `+inf` on a shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(dim_err!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            ));
        }
        let prod = self.as_faer() * other.as_faer();
        Ok(Self::from_faer(prod.as_ref()))
    }

    /// `selfᵀ · other`.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(dim_err!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            ));
        }
        let prod = self.as_faer().transpose() * other.as_faer();
        Ok(Self::from_faer(prod.as_ref()))
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(dim_err!(
                "{}x{} vs {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            ));
        }
        Ok(())
    }

    pub(crate) fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    pub(crate) fn from_faer(m: MatRef<'_, f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row = self.row(i);
            let shown: Vec<String> = row.iter().take(8).map(|x| format!("{x:>10.4}")).collect();
            let more = if self.cols > 8 { " ..." } else { "" };
            writeln!(f, "  {}{more}", shown.join(" "))?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// The observed index set Ω as a boolean matrix (`true` = observed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    observed: Vec<bool>,
    n_observed: usize,
}

impl ObservationMask {
    pub fn new(rows: usize, cols: usize, observed: Vec<bool>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(observed.len()) {
            return Err(dim_err!(
                "{} flags cannot fill a {rows}x{cols} mask",
                observed.len()
            ));
        }
        let n_observed = observed.iter().filter(|&&o| o).count();
        Ok(Self {
            rows,
            cols,
            observed,
            n_observed,
        })
    }

    pub fn all_observed(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            observed: vec![true; rows * cols],
            n_observed: rows * cols,
        }
    }

    pub fn all_missing(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            observed: vec![false; rows * cols],
            n_observed: 0,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut observed = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                observed.push(f(i, j));
            }
        }
        let n_observed = observed.iter().filter(|&&o| o).count();
        Self {
            rows,
            cols,
            observed,
            n_observed,
        }
    }

    /// Mask whose observed set is exactly `indices`.
    pub fn from_observed(rows: usize, cols: usize, indices: &[(usize, usize)]) -> Result<Self> {
        let mut observed = vec![false; rows * cols];
        for &(i, j) in indices {
            if i >= rows || j >= cols {
                return Err(dim_err!("index ({i}, {j}) outside {rows}x{cols}"));
            }
            observed[i * cols + j] = true;
        }
        Self::new(rows, cols, observed)
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
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[i * self.cols + j]
    }

    #[inline]
    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        !self.is_observed(i, j)
    }

    #[inline]
    pub fn n_observed(&self) -> usize {
        self.n_observed
    }

    #[inline]
    pub fn n_missing(&self) -> usize {
        self.observed.len() - self.n_observed
    }

    /// Row-major observation flags.
    pub fn as_slice(&self) -> &[bool] {
        &self.observed
    }

    pub fn row_pattern(&self, i: usize) -> &[bool] {
        &self.observed[i * self.cols..(i + 1) * self.cols]
    }

    pub fn complement(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            observed: self.observed.iter().map(|o| !o).collect(),
            n_observed: self.n_missing(),
        }
    }

    /// Iterator over observed `(i, j)` positions in row-major order.
    pub fn observed_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.observed
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(move |(k, _)| (k / cols, k % cols))
    }

    pub(crate) fn check_matches(&self, a: &DenseMatrix) -> Result<()> {
        if self.shape() != a.shape() {
            return Err(dim_err!(
                "mask is {}x{}, matrix is {}x{}",
                self.rows,
                self.cols,
                a.rows(),
                a.cols()
            ));
        }
        Ok(())
    }
}

/// Singular triplets `U · diag(θ) · Vᵀ` with column-orthonormal `U`, `V`.
///
/// Rank zero is allowed and represents the zero matrix of the stored shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowRankFactors {
    rows: usize,
    cols: usize,
    u: DenseMatrix,
    theta: Vec<f64>,
    v: DenseMatrix,
}

impl LowRankFactors {
    /// Validating constructor: shapes, a nonincreasing nonnegative spectrum
    /// and orthonormal frames to 1e-8.
    pub fn new(u: DenseMatrix, theta: Vec<f64>, v: DenseMatrix) -> Result<Self> {
        let q = theta.len();
        if u.cols() != q || v.cols() != q {
            return Err(dim_err!(
                "U has {} columns, V has {}, theta has {q} values",
                u.cols(),
                v.cols()
            ));
        }
        if theta.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(param_err!("singular values must be finite and nonnegative"));
        }
        if theta.windows(2).any(|w| w[0] < w[1]) {
            return Err(param_err!("singular values must be nonincreasing"));
        }
        let f = Self {
            rows: u.rows(),
            cols: v.rows(),
            u,
            theta,
            v,
        };
        let err = f.orthonormality_error();
        if err > 1e-8 {
            return Err(param_err!("frames are not orthonormal (error {err:.3e})"));
        }
        Ok(f)
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            u: DenseMatrix::zeros(rows, 0),
            theta: Vec::new(),
            v: DenseMatrix::zeros(cols, 0),
        }
    }

    pub(crate) fn from_parts_unchecked(u: DenseMatrix, theta: Vec<f64>, v: DenseMatrix) -> Self {
        debug_assert_eq!(u.cols(), theta.len());
        debug_assert_eq!(v.cols(), theta.len());
        Self {
            rows: u.rows(),
            cols: v.rows(),
            u,
            theta,
            v,
        }
    }

    pub fn rank(&self) -> usize {
        self.theta.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.theta.iter().sum()
    }

    /// Keeps the leading `k` triplets (or all of them if `k` exceeds the rank).
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.rank());
        let u = DenseMatrix::from_fn(self.rows, k, |i, j| self.u.get(i, j));
        let v = DenseMatrix::from_fn(self.cols, k, |i, j| self.v.get(i, j));
        Self::from_parts_unchecked(u, self.theta[..k].to_vec(), v)
    }

    /// `U · diag(θ) · Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let q = self.rank();
        if q == 0 {
            return DenseMatrix::zeros(self.rows, self.cols);
        }
        let us = Mat::<f64>::from_fn(self.rows, q, |i, j| self.u.get(i, j) * self.theta[j]);
        let prod = &us * self.v.as_faer().transpose();
        DenseMatrix::from_faer(prod.as_ref())
    }

    /// `max(‖UᵀU − I‖_max, ‖VᵀV − I‖_max)`.
    pub fn orthonormality_error(&self) -> f64 {
        gram_identity_error(&self.u).max(gram_identity_error(&self.v))
    }
}

/// `‖AᵀA − I‖_max` for a tall matrix `A`.
pub fn gram_identity_error(a: &DenseMatrix) -> f64 {
    let q = a.cols();
    let mut worst = 0.0_f64;
    for p in 0..q {
        for r in p..q {
            let dot: f64 = (0..a.rows()).map(|i| a.get(i, p) * a.get(i, r)).sum();
            let target = if p == r { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// `P_Ω A`: keeps observed entries, zeroes the rest.
///
/// Entries outside Ω are never read, so they may hold NaN or any sentinel.
pub fn project_observed(a: &DenseMatrix, mask: &ObservationMask) -> Result<DenseMatrix> {
    mask.check_matches(a)?;
    let data = a
        .data()
        .iter()
        .zip(mask.as_slice())
        .map(|(&x, &o)| if o { x } else { 0.0 })
        .collect();
    DenseMatrix::new(a.rows(), a.cols(), data)
}

/// `P_Ω⊥ A`: keeps missing entries, zeroes the observed ones.
pub fn project_missing(a: &DenseMatrix, mask: &ObservationMask) -> Result<DenseMatrix> {
    mask.check_matches(a)?;
    let data = a
        .data()
        .iter()
        .zip(mask.as_slice())
        .map(|(&x, &o)| if o { 0.0 } else { x })
        .collect();
    DenseMatrix::new(a.rows(), a.cols(), data)
}

/// `P_Ω Y + P_Ω⊥ Z` in one pass; `Y` is only read on Ω.
pub(crate) fn fill_missing(
    y: &DenseMatrix,
    mask: &ObservationMask,
    z: &DenseMatrix,
) -> Result<DenseMatrix> {
    mask.check_matches(y)?;
    mask.check_matches(z)?;
    let data = y
        .data()
        .iter()
        .zip(z.data())
        .zip(mask.as_slice())
        .map(|((&yv, &zv), &o)| if o { yv } else { zv })
        .collect();
    DenseMatrix::new(y.rows(), y.cols(), data)
}

/// Thin SVD, optionally truncated to the leading `k` triplets.
///
/// Singular values come back nonincreasing. Each column of `U` is signed so
/// that its entry of largest magnitude (lowest row index on ties) is
/// nonnegative; the matching column of `V` is flipped with it.
pub fn thin_svd(a: &DenseMatrix, k: Option<usize>) -> Result<LowRankFactors> {
    let (m, n) = a.shape();
    let full = m.min(n);
    if full == 0 {
        return Err(param_err!("cannot factor an empty {m}x{n} matrix"));
    }
    let k = match k {
        Some(k) if k == 0 || k > full => {
            return Err(param_err!("rank cap {k} outside 1..={full}"));
        }
        Some(k) => k,
        None => full,
    };
    if !a.is_finite() {
        return Err(num_err!("SVD input contains non-finite entries"));
    }

    let svd = a
        .as_faer()
        .thin_svd()
        .map_err(|e| num_err!("SVD did not converge: {e:?}"))?;
    let (su, ss, sv) = (svd.U(), svd.S(), svd.V());

    let mut u = DenseMatrix::from_fn(m, k, |i, j| su[(i, j)]);
    let mut v = DenseMatrix::from_fn(n, k, |i, j| sv[(i, j)]);
    let theta: Vec<f64> = (0..k).map(|j| ss[j].max(0.0)).collect();
    if theta.iter().any(|t| !t.is_finite()) || theta.windows(2).any(|w| w[0] < w[1]) {
        return Err(num_err!("SVD returned an invalid spectrum"));
    }

    for j in 0..k {
        let mut pivot = 0;
        let mut best = -1.0;
        for i in 0..m {
            let x = u.get(i, j).abs();
            if x > best {
                best = x;
                pivot = i;
            }
        }
        if u.get(pivot, j) < 0.0 {
            for i in 0..m {
                u.set(i, j, -u.get(i, j));
            }
            for i in 0..n {
                v.set(i, j, -v.get(i, j));
            }
        }
    }

    Ok(LowRankFactors::from_parts_unchecked(u, theta, v))
}

/// Largest singular value; zero for an all-zero matrix.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(num_err!("spectral norm of a non-finite matrix"));
    }
    if a.rows().min(a.cols()) == 0 {
        return Ok(0.0);
    }
    let sv = a
        .as_faer()
        .singular_values()
        .map_err(|e| num_err!("SVD did not converge: {e:?}"))?;
    Ok(sv.first().copied().unwrap_or(0.0).max(0.0))
}

/// Proximal map of `λ‖·‖_*` on the spectrum: `max(θ_k − λ, 0)`.
pub fn soft_threshold_spectrum(theta: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(param_err!(
            "threshold must be finite and nonnegative, got {lambda}"
        ));
    }
    Ok(theta.iter().map(|t| (t - lambda).max(0.0)).collect())
}

/// Haar-distributed `m × q` column-orthonormal frame.
///
/// Draws an `m × q` standard Gaussian matrix and orthonormalizes it with
/// twice-iterated modified Gram–Schmidt, which is a QR factorization with a
/// positive `R` diagonal and therefore left-rotation invariant.
pub fn random_orthonormal<R: Rng + ?Sized>(m: usize, q: usize, rng: &mut R) -> Result<DenseMatrix> {
    if q == 0 {
        return Err(param_err!("frame width must be at least 1"));
    }
    if q > m {
        return Err(param_err!(
            "cannot fit {q} orthonormal columns in dimension {m}"
        ));
    }
    let g = DenseMatrix::standard_normal(m, q, rng);
    let mut cols: Vec<Vec<f64>> = (0..q).map(|j| g.col(j)).collect();
    for j in 0..q {
        let (done, rest) = cols.split_at_mut(j);
        let c = &mut rest[0];
        for _ in 0..2 {
            for prev in done.iter() {
                let dot: f64 = prev.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
                for (ci, pi) in c.iter_mut().zip(prev) {
                    *ci -= dot * pi;
                }
            }
        }
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-300) {
            return Err(num_err!("degenerate Gaussian draw in column {j}"));
        }
        for x in c.iter_mut() {
            *x /= norm;
        }
    }
    Ok(DenseMatrix::from_fn(m, q, |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a22() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap()
    }

    #[test]
    fn projection_identity_and_annihilation() {
        let a = a22();
        let all = ObservationMask::all_observed(2, 2);
        let none = ObservationMask::all_missing(2, 2);
        assert_eq!(project_observed(&a, &all).unwrap(), a);
        assert_eq!(
            project_observed(&a, &none).unwrap(),
            DenseMatrix::zeros(2, 2)
        );
        assert_eq!(project_missing(&a, &all).unwrap(), DenseMatrix::zeros(2, 2));
        assert_eq!(project_missing(&a, &none).unwrap(), a);
    }

    #[test]
    fn projection_keeps_diagonal() {
        let mask = ObservationMask::from_observed(2, 2, &[(0, 0), (1, 1)]).unwrap();
        let p = project_observed(&a22(), &mask).unwrap();
        assert_eq!(
            p,
            DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 4.0]]).unwrap()
        );
        assert_eq!(mask.n_observed(), 2);
    }

    #[test]
    fn projection_rejects_shape_mismatch() {
        let mask = ObservationMask::all_observed(3, 2);
        assert!(matches!(
            project_observed(&a22(), &mask),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            project_missing(&a22(), &mask),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn projection_never_reads_missing_values() {
        let a = DenseMatrix::from_rows(&[[1.0, f64::NAN], [f64::INFINITY, 4.0]]).unwrap();
        let mask = ObservationMask::from_observed(2, 2, &[(0, 0), (1, 1)]).unwrap();
        let p = project_observed(&a, &mask).unwrap();
        assert!(p.is_finite());
    }

    #[test]
    fn complementary_projections_sum_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseMatrix::standard_normal(4, 3, &mut rng);
        let mask = ObservationMask::from_fn(4, 3, |i, j| (i * 7 + j * 3) % 5 < 2);
        let sum = project_observed(&a, &mask)
            .unwrap()
            .add(&project_missing(&a, &mask).unwrap())
            .unwrap();
        assert_eq!(sum, a);
    }

    #[test]
    fn svd_of_identity() {
        let f = thin_svd(&DenseMatrix::identity(3), None).unwrap();
        for t in f.theta() {
            assert!((t - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_of_diagonal_is_exact() {
        let a = DenseMatrix::from_diag(&[3.0, 1.0]);
        let f = thin_svd(&a, None).unwrap();
        assert!((f.theta()[0] - 3.0).abs() < 1e-14);
        assert!((f.theta()[1] - 1.0).abs() < 1e-14);
        assert!(f.reconstruct().max_abs_diff(&a) < 1e-14);
        // Sign convention pins U to the identity here.
        assert!(f.u().max_abs_diff(&DenseMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DenseMatrix::standard_normal(5, 4, &mut rng);
        let f = thin_svd(&a, None).unwrap();
        let err = f.reconstruct().sub(&a).unwrap().frobenius_norm();
        assert!(err <= 1e-10 * a.frobenius_norm());
        assert!(f.orthonormality_error() < 1e-12);
    }

    #[test]
    fn svd_sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::standard_normal(7, 4, &mut rng);
        let f = thin_svd(&a, None).unwrap();
        for j in 0..f.rank() {
            let col = f.u().col(j);
            let mut pivot = 0;
            for i in 1..col.len() {
                if col[i].abs() > col[pivot].abs() {
                    pivot = i;
                }
            }
            assert!(col[pivot] >= 0.0);
        }
    }

    #[test]
    fn svd_truncation_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DenseMatrix::standard_normal(6, 5, &mut rng);
        assert_eq!(thin_svd(&a, Some(2)).unwrap().rank(), 2);
        assert!(matches!(thin_svd(&a, Some(0)), Err(Error::Parameter(_))));
        assert!(matches!(thin_svd(&a, Some(6)), Err(Error::Parameter(_))));
        let mut bad = a.clone();
        bad.set(1, 1, f64::NAN);
        assert!(matches!(thin_svd(&bad, None), Err(Error::Numerical(_))));
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(
            soft_threshold_spectrum(&[3.0, 1.0, 0.5], 1.0).unwrap(),
            vec![2.0, 0.0, 0.0]
        );
        assert_eq!(
            soft_threshold_spectrum(&[3.0, 1.0, 0.5], 0.0).unwrap(),
            vec![3.0, 1.0, 0.5]
        );
        assert_eq!(
            soft_threshold_spectrum(&[3.0, 1.0], 3.0).unwrap(),
            vec![0.0, 0.0]
        );
        assert!(matches!(
            soft_threshold_spectrum(&[1.0], -0.1),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn random_orthonormal_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let one = random_orthonormal(1, 1, &mut rng).unwrap();
        assert!((one.get(0, 0).abs() - 1.0).abs() < 1e-15);

        let u = random_orthonormal(50, 5, &mut rng).unwrap();
        assert!(gram_identity_error(&u) <= 1e-10);

        let a = random_orthonormal(20, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = random_orthonormal(20, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a.data(), b.data());

        assert!(matches!(
            random_orthonormal(3, 4, &mut rng),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            random_orthonormal(3, 0, &mut rng),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn factors_validation() {
        let u = DenseMatrix::identity(2);
        assert!(LowRankFactors::new(u.clone(), vec![1.0, 2.0], u.clone()).is_err());
        assert!(LowRankFactors::new(u.clone(), vec![2.0, -1.0], u.clone()).is_err());
        let f = LowRankFactors::new(u.clone(), vec![2.0, 1.0], u).unwrap();
        assert_eq!(f.reconstruct(), DenseMatrix::from_diag(&[2.0, 1.0]));
        assert_eq!(
            LowRankFactors::zero(3, 2).reconstruct(),
            DenseMatrix::zeros(3, 2)
        );
    }
}
