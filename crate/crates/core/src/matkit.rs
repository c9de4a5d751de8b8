//! Small dense symmetric-matrix kernel.
//!
//! Everything here works on tiny matrices (a handful of antennas), so the
//! routines favour robustness and determinism over asymptotic speed. The
//! symmetric eigensolver is a cyclic Jacobi iteration with a fixed sweep
//! order, which makes every downstream result bit-reproducible for a given
//! input.
//!
//! Logarithms are base 2 throughout: determinants feed rate expressions
//! measured in bits per channel use.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance used for every PSD / PD decision.
pub const PSD_REL_TOL: f64 = 1e-10;

const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Absolute PSD tolerance for a spectrum whose largest magnitude is `scale`.
pub fn psd_tol(scale: f64) -> f64 {
    PSD_REL_TOL * scale.abs().max(1.0)
}

/// Real symmetric matrix. The upper triangle is authoritative: construction
/// copies it onto the lower triangle, so `m[(i, j)] == m[(j, i)]` holds
/// bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Builds a symmetric matrix from the upper triangle of `m`.
    pub fn from_upper(mut m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("symmetric matrix must have dim >= 1".into()));
        }
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                m[(i, j)] = m[(j, i)];
            }
        }
        Ok(SymMatrix(m))
    }

    /// Like [`SymMatrix::from_upper`] for matrices known to be square and
    /// non-empty (results of `X Q Xᵀ` style products).
    pub(crate) fn from_square(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square() && m.nrows() > 0);
        Self::from_upper(m).expect("square non-empty matrix")
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows must form a square matrix".into()));
        }
        Self::from_upper(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// `v vᵀ`.
    pub fn outer(v: &DVector<f64>) -> Self {
        Self::from_square(v * v.transpose())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMatrix(&self.0 * s)
    }

    /// `self + other`.
    pub fn add(&self, other: &SymMatrix) -> Self {
        SymMatrix(&self.0 + &other.0)
    }

    /// `self - other`.
    pub fn sub(&self, other: &SymMatrix) -> Self {
        SymMatrix(&self.0 - &other.0)
    }

    /// `(1 - t) self + t other`.
    pub fn lerp(&self, other: &SymMatrix, t: f64) -> Self {
        SymMatrix(&self.0 * (1.0 - t) + &other.0 * t)
    }

    /// Congruence `X S Xᵀ` for any conformable `X`.
    pub fn congruence(&self, x: &DMatrix<f64>) -> Self {
        Self::from_square(x * &self.0 * x.transpose())
    }

    /// `tr(self · other)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.0.component_mul(&other.0).sum()
    }

    /// Quadratic form `vᵀ S v`.
    pub fn quad(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.0 * v))
    }

    /// Entries of the upper triangle in row-major order.
    pub fn upper_entries(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Eigendecomposition `S = V Λ Vᵀ` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

impl EigenDecomp {
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }

    /// Tolerance below which an eigenvalue counts as zero.
    pub fn tol(&self) -> f64 {
        psd_tol(self.max().abs().max(self.min().abs()))
    }

    /// Rebuilds `V f(Λ) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = DMatrix::from_diagonal(&self.values.map(f));
        SymMatrix::from_square(&self.vectors * d * self.vectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps visit pairs `(p, q)` with `p < q` in row-major order and stop once
/// the off-diagonal Frobenius norm drops below `1e-14 · ‖S‖_F`. Each
/// eigenvector's largest-magnitude component (first one on ties) is made
/// positive.
pub fn sym_eigen(s: &SymMatrix) -> Result<EigenDecomp> {
    if !s.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = s.dim();
    let mut a = s.as_matrix().clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = JACOBI_REL_TOL * s.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| a[(k, k)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        fix_sign_largest(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(EigenDecomp { values, vectors })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

// A <- Jᵀ A J and V <- V J for the plane rotation J acting on (p, q).
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    // Kill rounding residue on the annihilated pair.
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn fix_sign_largest(col: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..col.len() {
        if col[i].abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.neg_mut();
    }
}

fn fix_sign_first_nonzero(v: &mut DVector<f64>) {
    let cutoff = 1e-14 * v.amax();
    if let Some(x) = v.iter().find(|x| x.abs() > cutoff) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
}

/// `log₂ det S` for a positive definite `S`, summed over the eigenvalues.
pub fn logdet_psd(s: &SymMatrix) -> Result<f64> {
    let eig = sym_eigen(s)?;
    let tol = eig.tol();
    if eig.min() <= tol {
        return Err(Error::not_pd("logdet argument", eig.min()));
    }
    Ok(eig.values.iter().map(|x| x.log2()).sum())
}

/// Fast `log₂ det` through a Cholesky factorisation. Returns `None` when the
/// matrix is not numerically positive definite.
pub(crate) fn log2_det_chol(m: &DMatrix<f64>) -> Option<f64> {
    let chol = nalgebra::Cholesky::new(m.clone())?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        acc += d.log2();
    }
    Some(2.0 * acc)
}

/// Checks positive definiteness through the Jacobi spectrum and returns it.
pub fn require_pd(s: &SymMatrix, what: &str) -> Result<EigenDecomp> {
    let eig = sym_eigen(s)?;
    if eig.min() <= eig.tol() {
        return Err(Error::not_pd(what, eig.min()));
    }
    Ok(eig)
}

/// `true` when every eigenvalue is `>= -psd_tol`.
pub fn is_psd(s: &SymMatrix) -> Result<bool> {
    let eig = sym_eigen(s)?;
    Ok(eig.min() >= -eig.tol())
}

/// Inverse of a positive definite matrix via its eigendecomposition.
pub fn inverse_pd(s: &SymMatrix, what: &str) -> Result<SymMatrix> {
    let eig = require_pd(s, what)?;
    Ok(eig.reconstruct_with(|x| 1.0 / x))
}

/// Largest generalized eigenpair of the pencil `(S, T)` with `T ≻ 0`.
///
/// Reduces to the standard problem `L⁻¹ S L⁻ᵀ y = λ y` with `T = L Lᵀ` and
/// maps back through `v = L⁻ᵀ y`. The returned `v` has unit Euclidean norm and
/// its first nonzero component is positive.
pub fn gen_eig_max(s: &SymMatrix, t: &SymMatrix) -> Result<(f64, DVector<f64>)> {
    if s.dim() != t.dim() {
        return Err(Error::InvalidInput(format!(
            "pencil dimensions differ: {} vs {}",
            s.dim(),
            t.dim()
        )));
    }
    require_pd(t, "T")?;
    let chol = nalgebra::Cholesky::new(t.as_matrix().clone())
        .ok_or_else(|| Error::not_pd("T", f64::NAN))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::not_pd("T", f64::NAN))?;
    let reduced = s.congruence(&l_inv);
    let eig = sym_eigen(&reduced)?;
    let lambda = eig.max();
    let mut v = l_inv.transpose() * eig.vector(0);
    v /= v.norm();
    fix_sign_first_nonzero(&mut v);
    Ok((lambda, v))
}

/// Checks the Schur-complement condition `I - A Σ⁻¹ Aᵀ ⪰ 0`, which for
/// `Σ ≻ 0` is equivalent to `[[I, A], [Aᵀ, Σ]] ⪰ 0`.
pub fn schur_psd_check(a: &DMatrix<f64>, sigma: &SymMatrix) -> Result<bool> {
    Ok(schur_margin(a, sigma)? >= 0.0)
}

/// Smallest eigenvalue of `I - A Σ⁻¹ Aᵀ` plus its PSD tolerance; nonnegative
/// exactly when [`schur_psd_check`] passes.
pub fn schur_margin(a: &DMatrix<f64>, sigma: &SymMatrix) -> Result<f64> {
    if a.ncols() != sigma.dim() {
        return Err(Error::InvalidInput(format!(
            "A has {} columns but Σ is {}x{}",
            a.ncols(),
            sigma.dim(),
            sigma.dim()
        )));
    }
    let sigma_inv = inverse_pd(sigma, "Σ")?;
    let compl = SymMatrix::identity(a.nrows()).sub(&sigma_inv.congruence(a));
    let eig = sym_eigen(&compl)?;
    Ok(eig.min() + eig.tol())
}

/// `(I + h2p · c cᵀ)⁻¹ x = x - h2p / (1 + h2p) · c (cᵀ x)` for unit `c`.
pub fn rank_one_inv_apply(h2p: f64, c: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let coef = h2p / (1.0 + h2p) * c.dot(x);
    x - c * coef
}

/// Closed-form eigenvalues `(λ₁, λ₂)`, `λ₁ ≥ λ₂`, of `x₁x₁ᵀ + x₂x₂ᵀ`
/// restricted to the span of the two vectors.
pub fn rank2_eigenvalues(x1: &DVector<f64>, x2: &DVector<f64>) -> (f64, f64) {
    let n1 = x1.norm_squared();
    let n2 = x2.norm_squared();
    let cross = x1.dot(x2);
    let mid = 0.5 * (n1 + n2);
    let rad = 0.5 * ((n1 - n2).powi(2) + 4.0 * cross * cross).sqrt();
    (mid + rad, mid - rad)
}

/// For an eigenvector `x` of `M = x₁x₁ᵀ + x₂x₂ᵀ` with `x₁ᵀx₂ > 0`, reports
/// whether `x` belongs to the largest eigenvalue, decided by the sign of
/// `(xᵀx₁)(xᵀx₂)`.
pub fn top_eig_rank2_predicate(
    x1: &DVector<f64>,
    x2: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<bool> {
    if x1.len() != x2.len() || x1.len() != x.len() {
        return Err(Error::InvalidInput("vector lengths differ".into()));
    }
    let cross = x1.dot(x2);
    if cross <= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "x1ᵀx2 must be positive, got {cross:e}"
        )));
    }
    let xn = x.norm();
    if xn == 0.0 {
        return Err(Error::PreconditionViolated("x is the zero vector".into()));
    }
    let m = x1 * x1.transpose() + x2 * x2.transpose();
    let mx = &m * x;
    let rayleigh = x.dot(&mx) / (xn * xn);
    let residual = (mx - x * rayleigh).norm();
    if residual > 1e-8 * m.norm().max(1.0) * xn {
        return Err(Error::PreconditionViolated(format!(
            "x is not an eigenvector of x1x1ᵀ + x2x2ᵀ (residual {residual:e})"
        )));
    }
    Ok(x.dot(x1) * x.dot(x2) > 0.0)
}
