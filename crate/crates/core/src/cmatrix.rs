//! Dense complex matrices and the handful of factorizations the rest of the
//! crate needs: Hermitian eigendecomposition (cyclic Jacobi), one-sided
//! Jacobi SVD for rank decisions, left null spaces and random semi-unitary
//! factories.
//!
//! Matrices are small (rarely beyond 16×16), so everything is a plain
//! row-major `Vec<Complex64>` and clarity wins over blocking or SIMD.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub type C64 = Complex64;

/// Relative Hermitian asymmetry accepted by the eigen solvers.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Rank threshold factor: singular values below
/// `RANK_TOL * sigma_max * max(rows, cols)` count as zero.
pub const RANK_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds {limit:.3e}")]
    NotHermitian { asymmetry: f64, limit: f64 },
    #[error("requested {requested} columns from a dimension-{available} space")]
    TooManyColumns { requested: usize, available: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero matrix has no direction")]
    ZeroMatrix,
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// The first `cols` columns of the `rows`-dimensional identity.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        CMatrix { rows, cols, data }
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::from_row_major(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Rebuilds a `rows × cols` matrix from its column-stacked vectorization.
    pub fn unvec(rows: usize, cols: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), rows * cols, "vector length must equal rows*cols");
        Self::from_fn(rows, cols, |i, j| v[j * rows + i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Column-stacked vectorization, `vec(A)`.
    pub fn vec(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[C64]) {
        assert_eq!(col.len(), self.rows);
        for (i, &z) in col.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> CMatrix {
        assert!(start <= end && end <= self.cols);
        Self::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    /// Top-left `rows × cols` block.
    pub fn top_left(&self, rows: usize, cols: usize) -> CMatrix {
        assert!(rows <= self.rows && cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    /// Pads with zero rows at the bottom up to `rows` rows.
    pub fn pad_rows(&self, rows: usize) -> CMatrix {
        assert!(rows >= self.rows);
        let mut m = Self::zeros(rows, self.cols);
        m.data[..self.data.len()].copy_from_slice(&self.data);
        m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        self.scale(C64::new(s, 0.0))
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `self · other†` without materializing the adjoint.
    pub fn mul_adjoint(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.cols, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..other.rows {
                let b = &other.data[j * other.cols..(j + 1) * other.cols];
                out.data[i * other.rows + j] = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            }
        }
        out
    }

    /// `self† · other` without materializing the adjoint.
    pub fn adjoint_mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Gram matrix `self · self†` (rows × rows, Hermitian).
    pub fn gram_rows(&self) -> CMatrix {
        self.mul_adjoint(self)
    }

    /// Horizontal concatenation `[a₁ a₂ …]`. All blocks must share a row count.
    pub fn hstack(blocks: &[CMatrix]) -> Result<CMatrix, LinalgError> {
        let Some(first) = blocks.first() else {
            return Err(LinalgError::ShapeMismatch("hstack of no blocks".into()));
        };
        let rows = first.rows;
        if let Some(bad) = blocks.iter().find(|b| b.rows != rows) {
            return Err(LinalgError::ShapeMismatch(format!(
                "hstack rows {} vs {}",
                rows, bad.rows
            )));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, offset + j)] = b[(i, j)];
                }
            }
            offset += b.cols;
        }
        Ok(out)
    }

    /// Frobenius norm of `self − self†` relative to the norm of `self`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖self†self − I‖_F`, the semi-unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint_mul(self);
        (&g - &CMatrix::identity(self.cols)).norm()
    }

    fn checked_same_shape(&self, other: &CMatrix) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.checked_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.checked_same_shape(rhs);
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Rotation that diagonalizes the Hermitian 2×2 block
/// `[[app, apq], [conj(apq), aqq]]`.
///
/// Returns `(c, s, w)` such that the unitary
/// `J = [[c, s], [−s·w, c·w]]` with `w = e^{−iφ}`, `φ = arg(apq)`,
/// satisfies `(J† B J)_{pq} = 0`.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, f64, C64) {
    let r = apq.norm();
    let w = (apq / r).conj();
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, w)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Eigenvalues are returned in ascending order with the matching
/// eigenvectors as the columns of a unitary matrix. Each eigenvector's
/// largest-magnitude entry is rotated to be real positive so the output is
/// reproducible; within a degenerate eigenspace any orthonormal basis may be
/// returned.
pub fn hermitian_eig(a: &CMatrix) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let scale = a.norm();
    let asym = a.hermitian_asymmetry();
    let limit = HERMITIAN_TOL * scale;
    if asym > limit {
        return Err(LinalgError::NotHermitian {
            asymmetry: asym,
            limit,
        });
    }
    // Work on the exact Hermitian part.
    let mut m = CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);

    if n > 1 && scale > 0.0 {
        let eps = f64::EPSILON * scale;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= eps {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    let (c, s, w) = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, apq);
                    // Columns: M ← M J.
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = mkp * c - mkq * w * s;
                        m[(k, q)] = mkp * s + mkq * w * c;
                    }
                    // Rows: M ← J† M.
                    let wc = w.conj();
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = mpk * c - mqk * wc * s;
                        m[(q, k)] = mpk * s + mqk * wc * c;
                    }
                    m[(p, q)] = C64::new(0.0, 0.0);
                    m[(q, p)] = C64::new(0.0, 0.0);
                    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * w * s;
                        v[(k, q)] = vkp * s + vkq * w * c;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(x, x)].re.total_cmp(&m[(y, y)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    canonicalize_phases(&mut vectors);
    Ok((values, vectors))
}

/// Rotates each column so its largest-magnitude entry is real positive
/// (first such entry on ties).
pub fn canonicalize_phases(m: &mut CMatrix) {
    for j in 0..m.cols {
        let mut best = 0;
        let mut best_mag = -1.0;
        for i in 0..m.rows {
            let mag = m[(i, j)].norm();
            if mag > best_mag * (1.0 + 1e-12) {
                best = i;
                best_mag = mag;
            }
        }
        if best_mag > 0.0 {
            let phase = m[(best, j)].conj() / best_mag;
            for i in 0..m.rows {
                m[(i, j)] *= phase;
            }
            m[(best, j)] = C64::new(m[(best, j)].norm(), 0.0);
        }
    }
}

/// The `d` eigenvectors of a Hermitian matrix belonging to its `d` smallest
/// eigenvalues, in ascending eigenvalue order.
pub fn smallest_eigvecs(a: &CMatrix, d: usize) -> Result<CMatrix, LinalgError> {
    if a.is_square() && d > a.rows {
        return Err(LinalgError::TooManyColumns {
            requested: d,
            available: a.rows,
        });
    }
    let (_, q) = hermitian_eig(a)?;
    Ok(q.columns(0, d))
}

/// Singular values (descending) and the matching left singular vectors of
/// `a`, via one-sided Jacobi on the columns of `a`.
///
/// Returns `min(rows, cols)` values. The left vectors are only meaningful
/// for nonzero singular values.
pub fn svd_left(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (m, n) = a.shape();
    // Columns of `w` converge to U·Σ.
    let mut w = a.clone();
    let scale = a.norm();
    if scale > 0.0 && n > 1 {
        let tol = f64::EPSILON * 4.0;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = C64::new(0.0, 0.0);
                    for k in 0..m {
                        let x = w[(k, p)];
                        let y = w[(k, q)];
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    if gamma.norm() <= tol * (alpha * beta).sqrt() || gamma.norm() <= 1e-300 {
                        continue;
                    }
                    rotated = true;
                    let (c, s, e) = jacobi_rotation(alpha, beta, gamma);
                    for k in 0..m {
                        let x = w[(k, p)];
                        let y = w[(k, q)];
                        w[(k, p)] = x * c - y * e * s;
                        w[(k, q)] = x * s + y * e * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let mut cols: Vec<(f64, usize)> = (0..n)
        .map(|j| ((0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt(), j))
        .collect();
    cols.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let k = m.min(n);
    let sigmas: Vec<f64> = cols.iter().take(k).map(|c| c.0).collect();
    let u = CMatrix::from_fn(m, k, |i, j| {
        let (s, col) = cols[j];
        if s > 0.0 {
            w[(i, col)] / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (sigmas, u)
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    svd_left(a).0
}

/// Numerical rank with threshold `RANK_TOL · σ_max · max(rows, cols)`.
pub fn rank(a: &CMatrix) -> usize {
    let s = singular_values(a);
    let thresh = rank_threshold(&s, a.rows.max(a.cols));
    s.iter().filter(|&&x| x > thresh).count()
}

fn rank_threshold(sigmas: &[f64], dim: usize) -> f64 {
    let smax = sigmas.first().copied().unwrap_or(0.0);
    RANK_TOL * smax * dim as f64
}

/// Orthonormal basis of the left null space `{u : u†a = 0}`.
///
/// The basis is obtained by Gram–Schmidt on the projections of the
/// standard basis vectors `e₁, e₂, …` onto the null space, so it is a
/// function of the subspace alone (not of how `a` spans it). An `m × 0`
/// matrix is returned when `a` has full row rank.
pub fn left_null_space(a: &CMatrix) -> CMatrix {
    let m = a.rows;
    let (sigmas, u) = svd_left(a);
    let thresh = rank_threshold(&sigmas, a.rows.max(a.cols));
    let r = sigmas.iter().filter(|&&x| x > thresh && x > 0.0).count();
    let mut range: Vec<Vec<C64>> = (0..r).map(|j| u.column(j)).collect();
    orthonormalize_in_place(&mut range);
    complement_basis(m, &range)
}

/// Orthonormal basis of the orthogonal complement of `span(range)` in
/// `C^m`, built from projected standard basis vectors in index order.
fn complement_basis(m: usize, range: &[Vec<C64>]) -> CMatrix {
    let target = m - range.len();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(target);
    for pass_thresh in [1e-3, 1e-10] {
        for e in 0..m {
            if basis.len() == target {
                break;
            }
            let mut v = vec![C64::new(0.0, 0.0); m];
            v[e] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for q in range.iter().chain(basis.iter()) {
                    project_out(&mut v, q);
                }
            }
            let nrm = vec_norm(&v);
            if nrm > pass_thresh {
                v.iter_mut().for_each(|z| *z /= nrm);
                basis.push(v);
            }
        }
        if basis.len() == target {
            break;
        }
    }
    let mut out = CMatrix::zeros(m, basis.len());
    for (j, v) in basis.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn project_out(v: &mut [C64], q: &[C64]) {
    let ip: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    for (x, y) in v.iter_mut().zip(q) {
        *x -= ip * y;
    }
}

/// Modified Gram–Schmidt with re-orthogonalization.
fn orthonormalize_in_place(vs: &mut [Vec<C64>]) {
    for j in 0..vs.len() {
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = vs.split_at_mut(j);
                project_out(&mut tail[0], &head[i]);
            }
        }
        let nrm = vec_norm(&vs[j]);
        if nrm > 0.0 {
            vs[j].iter_mut().for_each(|z| *z /= nrm);
        }
    }
}

/// Orthonormalizes the columns of `a` (thin QR, `Q` factor with positive
/// diagonal `R`).
pub fn orthonormalize_columns(a: &CMatrix) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = (0..a.cols).map(|j| a.column(j)).collect();
    orthonormalize_in_place(&mut cols);
    let mut out = CMatrix::zeros(a.rows, a.cols);
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// A `rows × cols` matrix with i.i.d. `CN(0, 1)` entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let sd = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * sd, im * sd)
    })
}

/// Draws a semi-unitary `rows × cols` matrix whose distribution is
/// invariant under left multiplication by unitaries: a complex Gaussian
/// matrix orthonormalized column by column.
pub fn random_semi_unitary<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<CMatrix, LinalgError> {
    if rows < cols {
        return Err(LinalgError::TooManyColumns {
            requested: cols,
            available: rows,
        });
    }
    loop {
        let g = complex_gaussian(rows, cols, rng);
        let q = orthonormalize_columns(&g);
        // A rank-deficient Gaussian draw has probability zero; redraw if it happens.
        if q.unitarity_defect() < 1e-10 {
            return Ok(q);
        }
    }
}

/// Column-stacked vectorization divided by the Frobenius norm.
pub fn vec_normalize(h: &CMatrix) -> Result<(Vec<C64>, f64), LinalgError> {
    let norm = h.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(LinalgError::ZeroMatrix);
    }
    Ok((h.vec().into_iter().map(|z| z / norm).collect(), norm))
}

/// `log₂ det(a)` for a Hermitian positive definite matrix.
pub fn log2_det_hpd(a: &CMatrix) -> Result<f64, LinalgError> {
    if a.rows == 1 && a.cols == 1 {
        return Ok(a[(0, 0)].re.log2());
    }
    let (vals, _) = hermitian_eig(a)?;
    Ok(vals.iter().map(|v| v.log2()).sum())
}
