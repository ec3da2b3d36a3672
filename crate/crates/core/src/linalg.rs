//! Dense complex linear algebra at desk scale.
//!
//! Everything here targets Hermitian operators of dimension up to a few
//! hundred. The eigensolver is a cyclic Jacobi iteration with complex
//! rotations; it is simple, dependency-free, and more than fast enough for
//! the matrix sizes this crate works with.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on the dimension of tensor-product results.
pub const DIM_CAP: usize = 4096;

/// Maximum number of Jacobi sweeps before giving up.
const MAX_SWEEPS: usize = 100;

/// Relative off-diagonal Frobenius threshold for Jacobi convergence.
const JACOBI_TOL: f64 = 1e-14;

/// Relative tolerance for the Hermitian symmetry check.
pub const HERM_TOL: f64 = 1e-12;

/// Relative eigenvalue threshold used when counting numerical rank.
pub const RANK_TOL: f64 = 1e-9;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major entry vector.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(
                "matrix",
                format!("expected {} entries, got {}", rows * cols, data.len()),
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix", "non-finite entry"));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm, sqrt of the sum of squared entry magnitudes.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// In-place accumulate `self += factor * other`.
    pub fn add_scaled(&mut self, other: &ComplexMatrix, factor: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    /// Writes `block` into the square region starting at (offset, offset).
    pub fn set_block(&mut self, offset: usize, block: &ComplexMatrix) {
        assert!(offset + block.rows <= self.rows && offset + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(offset + i, offset + j)] = block[(i, j)];
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product `A (x) B`, capped at [`DIM_CAP`] in either dimension.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_cap(a, b, DIM_CAP)
}

pub fn kron_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows > cap || cols > cap {
        return Err(Error::DimensionOverflow {
            dim: rows.max(cols),
            cap,
        });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let av = a[(ia, ja)];
            if av == Complex64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = av * b[(ib, jb)];
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace over one factor of a bipartite space of shape
/// `dim_a * dim_b`. `keep_first` selects which factor survives.
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep_first: bool,
) -> Result<ComplexMatrix> {
    if m.rows() != dim_a * dim_b || !m.is_square() {
        return Err(Error::DimensionMismatch {
            left: m.rows(),
            right: dim_a * dim_b,
        });
    }
    if keep_first {
        let mut out = ComplexMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim_b {
                    acc += m[(i * dim_b + k, j * dim_b + k)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    } else {
        let mut out = ComplexMatrix::zeros(dim_b, dim_b);
        for i in 0..dim_b {
            for j in 0..dim_b {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim_a {
                    acc += m[(k * dim_b + i, k * dim_b + j)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }
}

/// Square matrix certified Hermitian at construction.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates `A = A^dagger` up to `HERM_TOL * max |A_ij|`.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid(
                "hermitian operator",
                format!("matrix is {}x{}, not square", mat.rows(), mat.cols()),
            ));
        }
        let tol = HERM_TOL * mat.max_abs_entry();
        let mut worst = 0.0_f64;
        for i in 0..mat.rows() {
            for j in i..mat.cols() {
                let asym = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                worst = worst.max(asym);
            }
        }
        if worst > tol {
            return Err(Error::NotHermitian {
                asymmetry: worst,
                tol,
            });
        }
        Ok(HermitianOperator { mat })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        HermitianOperator {
            mat: ComplexMatrix::diagonal(entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Difference of two Hermitian operators, Hermitian by construction.
    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(HermitianOperator {
            mat: self.mat.sub(&other.mat),
        })
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Eigenvalues are sorted descending; `vectors` holds the matching
/// orthonormal eigenvectors as columns, so `A = V diag(w) V^dagger`.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn eig_hermitian(op: &HermitianOperator) -> Result<EigDecomposition> {
    let n = op.dim();
    let mut a = op.matrix().clone();
    let mut v = ComplexMatrix::identity(n);

    let fro = a.frobenius_norm();
    let target = JACOBI_TOL * fro;
    // Per-element skip threshold: if every off-diagonal entry were this
    // small the sweep target would already be met.
    let pair_count = (n * n.saturating_sub(1)).max(1) as f64;
    let skip = target / pair_count.sqrt();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || fro == 0.0 {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= skip {
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq, mag);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, new_col)] = v[(row, old_col)];
        }
    }
    Ok(EigDecomposition {
        eigenvalues,
        vectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += 2.0 * a[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// One complex Jacobi rotation annihilating `a[(p, q)]`.
///
/// The unitary is `G = D J` with `D` absorbing the phase of `a_pq` and `J` a
/// real Givens rotation on the (p, q) plane; the update is `A <- G^dagger A G`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: Complex64, mag: f64) {
    let n = a.rows();
    let u = apq / mag; // phase so that conj(u) * a_pq is real
    let alpha = a[(p, p)].re;
    let gamma = a[(q, q)].re;
    let tau = (gamma - alpha) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let uc = u.conj();

    // Columns p and q: (A G)_kp = c A_kp - s conj(u) A_kq, etc.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * uc * s;
        a[(k, q)] = akp * s + akq * uc * c;
    }
    // Rows p and q of the column-updated matrix.
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * u * s;
        a[(q, k)] = apk * s + aqk * u * c;
    }
    a[(p, p)] = Complex64::new(alpha - t * mag, 0.0);
    a[(q, q)] = Complex64::new(gamma + t * mag, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * uc * s;
        v[(k, q)] = vkp * s + vkq * uc * c;
    }
}

/// Trace norm `tr |A|` of a Hermitian operator, the sum of absolute
/// eigenvalues.
pub fn trace_norm(op: &HermitianOperator) -> Result<f64> {
    let dim = op.dim();
    let m = op.matrix();
    match dim {
        1 => Ok(m[(0, 0)].re.abs()),
        2 => {
            // closed-form 2x2 spectrum
            let a = m[(0, 0)].re;
            let c = m[(1, 1)].re;
            let half_diff = 0.5 * (a - c);
            let r = (half_diff * half_diff + m[(0, 1)].norm_sqr()).sqrt();
            let mid = 0.5 * (a + c);
            Ok((mid + r).abs() + (mid - r).abs())
        }
        _ => Ok(jacobi_eigenvalues(op)?.iter().map(|l| l.abs()).sum()),
    }
}

/// Eigenvalues only, skipping the eigenvector accumulation; same Jacobi
/// iteration as [`eig_hermitian`].
pub fn jacobi_eigenvalues(op: &HermitianOperator) -> Result<Vec<f64>> {
    let n = op.dim();
    let mut a = op.matrix().clone();
    let fro = a.frobenius_norm();
    let target = JACOBI_TOL * fro;
    let pair_count = (n * n.saturating_sub(1)).max(1) as f64;
    let skip = target / pair_count.sqrt();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || fro == 0.0 {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= skip {
                    continue;
                }
                rotate_values_only(&mut a, p, q, apq, mag);
            }
        }
        sweeps += 1;
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(vals)
}

fn rotate_values_only(a: &mut ComplexMatrix, p: usize, q: usize, apq: Complex64, mag: f64) {
    let n = a.rows();
    let u = apq / mag;
    let alpha = a[(p, p)].re;
    let gamma = a[(q, q)].re;
    let tau = (gamma - alpha) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let uc = u.conj();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * uc * s;
        a[(k, q)] = akp * s + akq * uc * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * u * s;
        a[(q, k)] = apk * s + aqk * u * c;
    }
    a[(p, p)] = Complex64::new(alpha - t * mag, 0.0);
    a[(q, q)] = Complex64::new(gamma + t * mag, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
}

/// Numerical rank: eigenvalues with `|l| > RANK_TOL * max |l|`.
pub fn rank_from_eigenvalues(eigenvalues: &[f64]) -> usize {
    let lmax = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if lmax == 0.0 {
        return 0;
    }
    let cut = RANK_TOL * lmax;
    eigenvalues.iter().filter(|l| l.abs() > cut).count()
}
