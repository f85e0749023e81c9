//! Dense complex linear algebra kernels: definiteness tests, norms,
//! spectra, the matrix Cayley transform and isometric (matrix-convex)
//! combinations.

mod schur;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use schur::{eigenvalues, ComplexSchur};

/// Dense complex matrix; square matrices play the role of `SquareMatrix`.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a complex matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols, "real_matrix: wrong data length");
    CMatrix::from_fn(rows, cols, |i, j| cplx(data[i * cols + j]))
}

pub(crate) fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// LU solve of `a x = b` that reports near-singularity instead of returning
/// garbage. `a` is singular when its smallest pivot falls below
/// `rel_tol` times the largest.
pub(crate) fn solve_checked(a: &CMatrix, b: &CMatrix, rel_tol: f64) -> Option<CMatrix> {
    let n = a.nrows();
    if n == 0 {
        return Some(b.clone());
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let p = u[(i, i)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if !(lo > rel_tol * hi.max(f64::MIN_POSITIVE)) {
        return None;
    }
    lu.solve(b)
}

/// Spectral classification of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
    NegativeSemidefinite,
    NegativeDefinite,
}

impl Definiteness {
    pub fn is_psd(self) -> bool {
        matches!(self, Self::PositiveDefinite | Self::PositiveSemidefinite)
    }
}

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Symmetrizes `m` into `(m + m*)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        let h = (&m + m.adjoint()) * cplx(0.5);
        Ok(Self(h))
    }

    /// Rejects inputs whose asymmetry exceeds `tol_herm` (relative to the
    /// largest entry) instead of silently symmetrizing them.
    pub fn new_strict(m: CMatrix, tol_herm: f64) -> Result<Self> {
        ensure_square(&m)?;
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > tol_herm * scale {
            return Err(Error::InvalidParameter(format!(
                "matrix is not Hermitian (asymmetry {asym:e})"
            )));
        }
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(CMatrix::from_fn(n, n, |i, j| if i == j { cplx(d[i]) } else { cplx(0.0) }))
    }

    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                context: "hermitian data",
                expected: n * n,
                found: data.len(),
            });
        }
        Self::new(real_matrix(n, n, data))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let eig = SymmetricEigen::new(self.0.clone());
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        debug_assert!(ev.iter().all(|x| x.is_finite()));
        ev
    }

    /// Smallest eigenvalue; `+inf` for the empty matrix so that
    /// zero-dimensional blocks never spoil a definiteness test.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn classify(&self, tol: f64) -> Definiteness {
        psd_classify(self, tol)
    }

    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.min_eigenvalue() > tol
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `T* H T`.
    pub fn congruence(&self, t: &CMatrix) -> Result<Self> {
        if t.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "congruence",
                expected: self.dim(),
                found: t.nrows(),
            });
        }
        Self::new(t.adjoint() * &self.0 * t)
    }

    /// `H^p` for positive definite `H` via the spectral decomposition;
    /// `p = 1/2` and `p = -1/2` are the cases used by the similarity-norm
    /// membership test.
    pub fn pd_power(&self, p: f64) -> Result<CMatrix> {
        let n = self.dim();
        if n == 0 {
            return Ok(CMatrix::zeros(0, 0));
        }
        let eig = SymmetricEigen::new(self.0.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidParameter(
                "matrix power requires a positive definite matrix".into(),
            ));
        }
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                cplx(eig.eigenvalues[i].powf(p))
            } else {
                cplx(0.0)
            }
        });
        Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
    }
}

/// Classifies a Hermitian matrix by its extreme eigenvalues against `±tol`.
pub fn psd_classify(m: &HermitianMatrix, tol: f64) -> Definiteness {
    let ev = m.eigenvalues();
    let (lo, hi) = match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Definiteness::PositiveDefinite,
    };
    if lo > tol {
        Definiteness::PositiveDefinite
    } else if hi < -tol {
        Definiteness::NegativeDefinite
    } else if lo >= -tol {
        Definiteness::PositiveSemidefinite
    } else if hi <= tol {
        Definiteness::NegativeSemidefinite
    } else {
        Definiteness::Indefinite
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &CMatrix) -> Result<f64> {
    ensure_square(m)?;
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Matrix Cayley transform `(I - M)(I + M)^{-1}`.
pub fn cayley(m: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    let id = CMatrix::identity(n, n);
    let plus = &id + m;
    let minus = &id - m;
    // (I - M) and (I + M)^{-1} commute
    solve_checked(&plus, &minus, 1e-12).ok_or(Error::SingularShift)
}

/// Stacked isometry `Υ = [υ_1; ...; υ_k]` (`kn × n`) with `Υ*Υ = I_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    n: usize,
    stacked: CMatrix,
}

impl Isometry {
    pub fn new(stacked: CMatrix, n: usize) -> Result<Self> {
        if n == 0 || stacked.ncols() != n || stacked.nrows() % n != 0 {
            return Err(Error::DimensionMismatch {
                context: "isometry columns",
                expected: n,
                found: stacked.ncols(),
            });
        }
        let gram = stacked.adjoint() * &stacked - CMatrix::identity(n, n);
        let err = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "blocks do not form an isometry (error {err:e})"
            )));
        }
        Ok(Self { n, stacked })
    }

    /// Isometry whose blocks are `√θ_j I_n`; reproduces ordinary convex
    /// combinations with weights `θ`.
    pub fn scalar_weights(weights: &[f64], n: usize) -> Result<Self> {
        let k = weights.len();
        let stacked = CMatrix::from_fn(k * n, n, |i, j| {
            if i % n == j {
                cplx(weights[i / n].max(0.0).sqrt())
            } else {
                cplx(0.0)
            }
        });
        Self::new(stacked, n)
    }

    /// Haar-like random isometry from the thin QR factor of a complex
    /// Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        let g = ginibre(k * n, n, rng);
        let q = g.qr().q();
        Self::new(q, n).expect("QR factor is an isometry")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.stacked.nrows() / self.n
    }

    pub fn block(&self, j: usize) -> CMatrix {
        self.stacked.rows(j * self.n, self.n).into_owned()
    }

    pub fn stacked(&self) -> &CMatrix {
        &self.stacked
    }
}

/// `Σ_j υ_j* A_j υ_j`.
pub fn convex_combine(mats: &[CMatrix], iso: &Isometry) -> Result<CMatrix> {
    if mats.len() != iso.blocks() {
        return Err(Error::DimensionMismatch {
            context: "convex_combine blocks",
            expected: iso.blocks(),
            found: mats.len(),
        });
    }
    let n = iso.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (j, a) in mats.iter().enumerate() {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "convex_combine matrix",
                expected: n,
                found: a.nrows(),
            });
        }
        let u = iso.block(j);
        acc += u.adjoint() * a * &u;
    }
    Ok(acc)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Matrix with i.i.d. standard real Gaussian entries (stored as complex).
pub fn real_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cplx(rng.sample(StandardNormal)))
}

/// Random unitary matrix (QR of a Ginibre matrix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    ginibre(n, n, rng).qr().q()
}
