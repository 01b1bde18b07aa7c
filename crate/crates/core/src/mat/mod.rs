//! Dense complex-matrix kernel.
//!
//! Multipartite indices are flattened row-major with party 0 as the most
//! significant digit; every module in the crate shares this convention.
//! Complex scalars are double-precision pairs throughout.

mod eig;
pub mod linalg;
mod textfmt;

pub use eig::hermitian_eig_raw;
pub use textfmt::{parse_matrix_text, read_matrix_text, write_matrix_text};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const C_ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const C_ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const C_I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Hermiticity tolerance relative to the Frobenius norm.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(12) {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Builds from a row-major slice of (re, im) pairs; panics on length mismatch.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows*cols");
        ComplexMatrix {
            rows,
            cols,
            data: entries.to_vec(),
        }
    }

    /// Real matrix lifted to complex.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        ComplexMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Rank-1 projector |v><v| (v need not be normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |r, c| v[r] * v[c].conj())
    }

    /// Ket-bra |u><v|.
    pub fn ket_bra(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conjugate(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: Complex64) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b * s;
        }
    }

    /// Matrix product.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C_ZERO {
                    continue;
                }
                let lhs = k * other.cols;
                let dst = r * other.cols;
                for c in 0..other.cols {
                    out.data[dst + c] += a * other.data[lhs + c];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C_ZERO; self.rows];
        for r in 0..self.rows {
            let base = r * self.cols;
            let mut acc = C_ZERO;
            for c in 0..self.cols {
                acc += self.data[base + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// tr(A B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = C_ZERO;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += self[(r, c)] * other[(c, r)];
            }
        }
        acc
    }

    /// Real part of the Hilbert-Schmidt inner product tr(A† B).
    pub fn hs_inner_re(&self, other: &Self) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Max entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity relative to max(1, ||M||_F).
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev / self.frobenius_norm().max(1.0)
    }

    /// (M + M†)/2.
    pub fn symmetrize(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, other: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(other)
    }
}

/// Per-party dimensions of a multipartite space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimList(Vec<usize>);

impl DimList {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("empty dimension list".into()));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidArgument(format!(
                "every party dimension must be >= 2, got {:?}",
                dims
            )));
        }
        Ok(DimList(dims))
    }

    pub fn single(d: usize) -> Self {
        Self::new(vec![d]).expect("dimension must be >= 2")
    }

    pub fn pair(da: usize, db: usize) -> Self {
        Self::new(vec![da, db]).expect("dimensions must be >= 2")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self, party: usize) -> usize {
        self.0[party]
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// Product of the per-party dimensions (the constant written Omega).
    pub fn omega(&self) -> f64 {
        self.total() as f64
    }

    /// Number of measurement settings / decomposition coefficients per party list.
    pub fn setting_count(&self) -> usize {
        self.0.iter().map(|d| d * d).product()
    }

    pub fn check_matches(&self, ambient: usize) -> Result<()> {
        if self.total() != ambient {
            return Err(Error::DimMismatch(format!(
                "dims {:?} have product {} but operator dimension is {}",
                self.0,
                self.total(),
                ambient
            )));
        }
        Ok(())
    }

    /// Concatenation (used for multicopy spaces).
    pub fn repeat(&self, copies: usize) -> DimList {
        let mut v = Vec::with_capacity(self.0.len() * copies);
        for _ in 0..copies {
            v.extend_from_slice(&self.0);
        }
        DimList(v)
    }
}

/// Decodes a flat index into a multi-index (party 0 most significant).
pub fn unflatten_index(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for j in (0..dims.len()).rev() {
        out[j] = flat % dims[j];
        flat /= dims[j];
    }
    out
}

/// Flattens a multi-index (party 0 most significant).
pub fn flatten_index(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0;
    for (i, d) in idx.iter().zip(dims.iter()) {
        flat = flat * d + i;
    }
    flat
}

/// Hermitian matrix with a validated constructor.
///
/// Inputs are symmetrized ((H + H†)/2) on construction; construction fails
/// when the deviation from Hermiticity exceeds [`HERMITICITY_TOL`] relative
/// to the Frobenius norm.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.all_finite() {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let dev = m.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(HermitianMatrix(m.symmetrize()))
    }

    /// Wraps without checking; for matrices Hermitian by construction.
    pub fn new_unchecked(m: ComplexMatrix) -> Self {
        HermitianMatrix(m.symmetrize())
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    /// Real expectation tr(H X) for Hermitian H against any square X.
    pub fn expectation(&self, x: &ComplexMatrix) -> f64 {
        self.0.trace_product(x).re
    }

    /// Eigendecomposition; eigenvalues ascending, columns of the returned
    /// matrix are the corresponding orthonormal eigenvectors.
    pub fn eig(&self) -> (Vec<f64>, ComplexMatrix) {
        hermitian_eig_raw(&self.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// Checked Hermitian eigendecomposition of a general square matrix.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = HermitianMatrix::new(m.clone())?;
    Ok(h.eig())
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C_ZERO {
                continue;
            }
            for k in 0..br {
                let dst = (i * br + k) * (ac * bc) + j * bc;
                let src = k * bc;
                for l in 0..bc {
                    out.data[dst + l] = aij * b.data[src + l];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_list(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = kron(&acc, f);
    }
    acc
}

/// Reorders the tensor factors of a square operator.
///
/// `perm[p]` names the old party placed at new position `p`; `dims` are the
/// old per-party dimensions.
pub fn permute_systems(m: &ComplexMatrix, dims: &DimList, perm: &[usize]) -> Result<ComplexMatrix> {
    let n = dims.len();
    if perm.len() != n {
        return Err(Error::DimMismatch(format!(
            "permutation length {} does not match party count {}",
            perm.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidArgument(format!("invalid permutation {:?}", perm)));
        }
        seen[p] = true;
    }
    dims.check_matches(m.rows())?;
    let total = dims.total();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims.dim(p)).collect();

    // Map each new flat index to the old flat index.
    let mut old_of_new = vec![0usize; total];
    for new_flat in 0..total {
        let new_idx = unflatten_index(new_flat, &new_dims);
        let mut old_idx = vec![0usize; n];
        for (p, &old_party) in perm.iter().enumerate() {
            old_idx[old_party] = new_idx[p];
        }
        old_of_new[new_flat] = flatten_index(&old_idx, dims.dims());
    }

    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        let or = old_of_new[r];
        for c in 0..total {
            out[(r, c)] = m[(or, old_of_new[c])];
        }
    }
    Ok(out)
}

/// Permutation operator S on the multipartite space: S |x_0 ... x_{n-1}> =
/// |y_0 ... y_{n-1}> with y_{perm[j]} = x_j (system j moves to slot perm[j]).
/// Requires dims[j] == dims[perm[j]] for all j.
pub fn permutation_operator(dims: &DimList, perm: &[usize]) -> Result<ComplexMatrix> {
    let n = dims.len();
    if perm.len() != n {
        return Err(Error::DimMismatch("permutation length mismatch".into()));
    }
    for (j, &p) in perm.iter().enumerate() {
        if dims.dim(j) != dims.dim(p) {
            return Err(Error::DimMismatch(
                "permutation must map between equal dimensions".into(),
            ));
        }
    }
    let total = dims.total();
    let mut out = ComplexMatrix::zeros(total, total);
    for col in 0..total {
        let x = unflatten_index(col, dims.dims());
        let mut y = vec![0usize; n];
        for j in 0..n {
            y[perm[j]] = x[j];
        }
        let row = flatten_index(&y, dims.dims());
        out[(row, col)] = C_ONE;
    }
    Ok(out)
}

/// Partial trace keeping the parties in `keep` (ascending order of the kept
/// parties is preserved). The trace of the input is preserved when all other
/// parties are traced out.
pub fn partial_trace(m: &ComplexMatrix, dims: &DimList, keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimMismatch("partial_trace input must be square".into()));
    }
    dims.check_matches(m.rows())?;
    let n = dims.len();
    for &k in keep {
        if k >= n {
            return Err(Error::IndexOutOfRange(format!(
                "keep party {} out of range for {} parties",
                k, n
            )));
        }
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..n).filter(|p| !keep_sorted.contains(p)).collect();

    let keep_dims: Vec<usize> = keep_sorted.iter().map(|&p| dims.dim(p)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&p| dims.dim(p)).collect();
    let keep_total: usize = keep_dims.iter().product::<usize>().max(1);
    let traced_total: usize = traced_dims.iter().product::<usize>().max(1);

    let mut out = ComplexMatrix::zeros(keep_total, keep_total);
    let mut full_r = vec![0usize; n];
    let mut full_c = vec![0usize; n];
    for kr in 0..keep_total {
        let kr_idx = unflatten_index(kr, &keep_dims);
        for kc in 0..keep_total {
            let kc_idx = unflatten_index(kc, &keep_dims);
            let mut acc = C_ZERO;
            for t in 0..traced_total {
                let t_idx = unflatten_index(t, &traced_dims);
                for (pos, &party) in keep_sorted.iter().enumerate() {
                    full_r[party] = kr_idx[pos];
                    full_c[party] = kc_idx[pos];
                }
                for (pos, &party) in traced.iter().enumerate() {
                    full_r[party] = t_idx[pos];
                    full_c[party] = t_idx[pos];
                }
                acc += m[(
                    flatten_index(&full_r, dims.dims()),
                    flatten_index(&full_c, dims.dims()),
                )];
            }
            out[(kr, kc)] = acc;
        }
    }
    Ok(out)
}

/// Partial transpose on a single party; involutive.
pub fn partial_transpose(m: &ComplexMatrix, dims: &DimList, party: usize) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimMismatch("partial_transpose input must be square".into()));
    }
    dims.check_matches(m.rows())?;
    if party >= dims.len() {
        return Err(Error::IndexOutOfRange(format!(
            "party {} out of range for {} parties",
            party,
            dims.len()
        )));
    }
    let total = dims.total();
    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        let mut ri = unflatten_index(r, dims.dims());
        for c in 0..total {
            let mut ci = unflatten_index(c, dims.dims());
            std::mem::swap(&mut ri[party], &mut ci[party]);
            let nr = flatten_index(&ri, dims.dims());
            let nc = flatten_index(&ci, dims.dims());
            out[(nr, nc)] = m[(r, c)];
            std::mem::swap(&mut ri[party], &mut ci[party]);
        }
    }
    Ok(out)
}

/// Partial transpose over a set of parties.
pub fn partial_transpose_multi(
    m: &ComplexMatrix,
    dims: &DimList,
    parties: &[usize],
) -> Result<ComplexMatrix> {
    let mut acc = m.clone();
    let mut done = std::collections::HashSet::new();
    for &p in parties {
        if done.insert(p) {
            acc = partial_transpose(&acc, dims, p)?;
        }
    }
    Ok(acc)
}

/// Sum of singular values. Hermitian inputs take the precise |eigenvalue|
/// path; general square matrices go through the sqrt of eig(M†M).
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    assert!(m.is_square(), "trace_norm requires a square matrix");
    if m.hermiticity_deviation() <= HERMITICITY_TOL {
        let (vals, _) = hermitian_eig_raw(&m.symmetrize());
        vals.iter().map(|v| v.abs()).sum()
    } else {
        let gram = m.adjoint().matmul(m);
        let (vals, _) = hermitian_eig_raw(&gram.symmetrize());
        vals.iter().map(|v| v.max(0.0).sqrt()).sum()
    }
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to 0.
pub fn psd_project(h: &HermitianMatrix) -> HermitianMatrix {
    let (vals, vecs) = h.eig();
    let n = h.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        for r in 0..n {
            let vr = vecs[(r, k)] * v;
            for c in 0..n {
                out[(r, c)] += vr * vecs[(c, k)].conj();
            }
        }
    }
    HermitianMatrix::new_unchecked(out)
}

/// Hermitian square root of a positive semi-definite matrix, with negative
/// rounding clipped to zero.
pub fn psd_sqrt(h: &HermitianMatrix) -> HermitianMatrix {
    apply_spectral(h, |v| v.max(0.0).sqrt())
}

/// Inverse square root restricted to the positive spectrum.
pub fn psd_inv_sqrt(h: &HermitianMatrix, cutoff: f64) -> HermitianMatrix {
    apply_spectral(h, |v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 })
}

fn apply_spectral(h: &HermitianMatrix, f: impl Fn(f64) -> f64) -> HermitianMatrix {
    let (vals, vecs) = h.eig();
    let n = h.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        let fv = f(v);
        if fv == 0.0 {
            continue;
        }
        for r in 0..n {
            let vr = vecs[(r, k)] * fv;
            for c in 0..n {
                out[(r, c)] += vr * vecs[(c, k)].conj();
            }
        }
    }
    HermitianMatrix::new_unchecked(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, rng_from_seed};

    pub(crate) fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub(crate) fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rng_from_seed(seed);
        ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng))
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        HermitianMatrix::new_unchecked(random_matrix(n, seed))
    }

    fn random_psd(n: usize, seed: u64) -> ComplexMatrix {
        let g = random_matrix(n, seed);
        g.matmul(&g.adjoint())
    }

    fn phi_plus(d: usize) -> ComplexMatrix {
        let mut v = vec![C_ZERO; d * d];
        for j in 0..d {
            v[j * d + j] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        ComplexMatrix::outer(&v)
    }

    #[test]
    fn kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_diagonal_product() {
        let z = pauli_z();
        let zz = kron(&z, &z);
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        assert!(zz.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn kron_xx_maps_00_to_11() {
        let xx = kron(&pauli_x(), &pauli_x());
        let ket00 = [C_ONE, C_ZERO, C_ZERO, C_ZERO];
        let out = xx.matvec(&ket00);
        assert_eq!(out, vec![C_ZERO, C_ZERO, C_ZERO, C_ONE]);
    }

    #[test]
    fn kron_associative_and_trace_multiplicative() {
        for seed in 0..8u64 {
            let a = random_matrix(2, seed);
            let b = random_matrix(3, seed + 100);
            let c = random_matrix(2, seed + 200);
            let lhs = kron(&kron(&a, &b), &c);
            let rhs = kron(&a, &kron(&b, &c));
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
            let tk = kron(&a, &b).trace();
            let tp = a.trace() * b.trace();
            assert!((tk - tp).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_phi_plus_is_maximally_mixed() {
        let dims = DimList::pair(2, 2);
        let out = partial_trace(&phi_plus(2), &dims, &[0]).unwrap();
        let expected = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(out.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn partial_trace_product_factorizes() {
        let rho = random_psd(2, 3);
        let sigma = random_psd(3, 4);
        let dims = DimList::pair(2, 3);
        let out = partial_trace(&kron(&rho, &sigma), &dims, &[0]).unwrap();
        let expected = rho.scale(sigma.trace());
        assert!(out.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let m = random_psd(9, 9);
        let dims = DimList::pair(3, 3);
        let out = partial_trace(&m, &dims, &[1]).unwrap();
        assert!((out.trace() - m.trace()).norm() < 1e-12 * m.trace().norm().max(1.0));
    }

    #[test]
    fn partial_trace_rejects_bad_party() {
        let m = random_psd(4, 1);
        let dims = DimList::pair(2, 2);
        assert!(partial_trace(&m, &dims, &[2]).is_err());
    }

    #[test]
    fn partial_transpose_involutive() {
        let m = random_matrix(6, 11);
        let dims = DimList::pair(2, 3);
        let once = partial_transpose(&m, &dims, 1).unwrap();
        let twice = partial_transpose(&once, &dims, 1).unwrap();
        assert!(twice.max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn partial_transpose_phi_plus_is_half_swap() {
        let dims = DimList::pair(2, 2);
        let pt = partial_transpose(&phi_plus(2), &dims, 1).unwrap();
        let swap = permutation_operator(&dims, &[1, 0]).unwrap();
        assert!(pt.max_abs_diff(&swap.scale_re(0.5)) < 1e-14);
    }

    #[test]
    fn partial_transpose_product_case() {
        let rho = random_psd(2, 21);
        let sigma = random_psd(3, 22);
        let dims = DimList::pair(2, 3);
        let lhs = partial_transpose(&kron(&rho, &sigma), &dims, 1).unwrap();
        let rhs = kron(&rho, &sigma.transpose());
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn partial_transpose_commutes_with_tracing_out() {
        let m = random_psd(6, 31);
        let dims = DimList::pair(2, 3);
        let pt = partial_transpose(&m, &dims, 1).unwrap();
        let a = partial_trace(&pt, &dims, &[0]).unwrap();
        let b = partial_trace(&m, &dims, &[0]).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn eig_pauli_z() {
        let (vals, _) = hermitian_eig(&pauli_z()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_x_eigenvectors() {
        let (vals, vecs) = hermitian_eig(&pauli_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        // |-> for eigenvalue -1: components with opposite sign, equal modulus.
        let (a, b) = (vecs[(0, 0)], vecs[(1, 0)]);
        assert!((a + b).norm() < 1e-12);
        assert!((a.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn eig_trace_identity_and_reconstruction() {
        let h = random_hermitian(9, 77);
        let (vals, vecs) = h.eig();
        let sum: f64 = vals.iter().sum();
        assert!((sum - h.trace_re()).abs() < 1e-10);
        // Reconstruction V diag V†.
        let n = h.dim();
        let mut rec = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            for r in 0..n {
                for c in 0..n {
                    rec[(r, c)] += vecs[(r, k)] * vals[k] * vecs[(c, k)].conj();
                }
            }
        }
        let resid = rec.max_abs_diff(h.matrix());
        assert!(resid < 1e-10 * h.matrix().frobenius_norm().max(1.0));
        // Orthonormality.
        let gram = vecs.adjoint().matmul(&vecs);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
        // Ascending order.
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-14);
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&pauli_z()) - 2.0).abs() < 1e-14);
        let rho = {
            let g = random_psd(4, 5);
            let t = g.trace();
            g.scale(C_ONE / t)
        };
        assert!((trace_norm(&rho) - 1.0).abs() < 1e-12);
        let dims = DimList::pair(2, 2);
        let pt = partial_transpose(&phi_plus(2), &dims, 1).unwrap();
        assert!((trace_norm(&pt) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn psd_project_examples() {
        let z = HermitianMatrix::new(pauli_z()).unwrap();
        let proj = psd_project(&z);
        let expected = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(proj.matrix().max_abs_diff(&expected) < 1e-14);

        let p = HermitianMatrix::new_unchecked(random_psd(4, 8));
        let fixed = psd_project(&p);
        assert!(fixed.matrix().max_abs_diff(p.matrix()) < 1e-10);

        let neg = HermitianMatrix::new_unchecked(ComplexMatrix::identity(2).scale_re(-1.0));
        let zeroed = psd_project(&neg);
        assert!(zeroed.matrix().frobenius_norm() < 1e-14);

        let h = random_hermitian(5, 13);
        let pp = psd_project(&h);
        assert!(pp.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn permute_systems_swaps_kron_factors() {
        let a = random_matrix(2, 41);
        let b = random_matrix(3, 42);
        let ab = kron(&a, &b);
        let dims = DimList::pair(2, 3);
        let ba = permute_systems(&ab, &dims, &[1, 0]).unwrap();
        assert!(ba.max_abs_diff(&kron(&b, &a)) < 1e-14);
    }

    #[test]
    fn permutation_operator_swap_trick() {
        let rho = random_psd(3, 51);
        let sigma = random_psd(3, 52);
        let dims = DimList::pair(3, 3);
        let swap = permutation_operator(&dims, &[1, 0]).unwrap();
        let lhs = swap.trace_product(&kron(&rho, &sigma));
        let rhs = rho.trace_product(&sigma);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hermitian_rejects_non_hermitian() {
        let mut m = pauli_z();
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(HermitianMatrix::new(m).is_err());
    }
}
