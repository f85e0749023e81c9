use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{cplx, eigenvalues, real_matrix, solve_checked, CMatrix};

/// Rank tolerance of the controllability / observability staircase.
pub const MINIMAL_TOL: f64 = 1e-9;

/// State-space quadruple realizing `F(s) = C(sI − A)^{-1}B + D`, with `n`
/// states and `m` ports.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl Realization {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let n = a.nrows();
        let m = d.nrows();
        let check = |context, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                })
            }
        };
        check("A columns", n, a.ncols())?;
        check("D columns", m, d.ncols())?;
        check("B rows", n, b.nrows())?;
        check("B columns", m, b.ncols())?;
        check("C rows", m, c.nrows())?;
        check("C columns", n, c.ncols())?;
        if m == 0 {
            return Err(Error::InvalidParameter("realization needs at least one port".into()));
        }
        Ok(Self { a, b, c, d })
    }

    /// Real row-major data for each block.
    pub fn from_real(n: usize, m: usize, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Self> {
        let sizes = [(a.len(), n * n, "A data"), (b.len(), n * m, "B data"), (c.len(), m * n, "C data"), (d.len(), m * m, "D data")];
        for (found, expected, context) in sizes {
            if found != expected {
                return Err(Error::DimensionMismatch { context, expected, found });
            }
        }
        Self::new(real_matrix(n, n, a), real_matrix(n, m, b), real_matrix(m, n, c), real_matrix(m, m, d))
    }

    /// Static gain `F ≡ D`.
    pub fn constant(d: CMatrix) -> Result<Self> {
        let m = d.nrows();
        Self::new(CMatrix::zeros(0, 0), CMatrix::zeros(0, m), CMatrix::zeros(m, 0), d)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    /// `[[A, B], [C, D]]` as one `(n+m) × (n+m)` array.
    pub fn system_matrix(&self) -> CMatrix {
        let (n, m) = (self.n(), self.m());
        let mut r = CMatrix::zeros(n + m, n + m);
        r.view_mut((0, 0), (n, n)).copy_from(&self.a);
        r.view_mut((0, n), (n, m)).copy_from(&self.b);
        r.view_mut((n, 0), (m, n)).copy_from(&self.c);
        r.view_mut((n, n), (m, m)).copy_from(&self.d);
        r
    }

    pub fn is_real(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .all(|mat| mat.iter().all(|z| z.im == 0.0))
    }

    /// `C(sI − A)^{-1}B + D`.
    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let n = self.n();
        if n == 0 {
            return Ok(self.d.clone());
        }
        let shifted = CMatrix::identity(n, n) * s - &self.a;
        let x = solve_checked(&shifted, &self.b, 1e-14).ok_or(Error::PoleAtEvaluationPoint(s))?;
        Ok(&self.c * x + &self.d)
    }

    /// `F(iω)`; `ω = ±∞` returns `D`.
    pub fn eval_freq(&self, omega: f64) -> Result<CMatrix> {
        if omega.is_infinite() {
            return Ok(self.d.clone());
        }
        self.eval(Complex64::new(0.0, omega))
    }

    /// Eigenvalues of `A`.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.a)
    }

    /// Realization of `s ↦ F(s − ε)`.
    pub fn shift(&self, eps: f64) -> Self {
        let n = self.n();
        Self {
            a: &self.a + CMatrix::identity(n, n) * cplx(eps),
            ..self.clone()
        }
    }

    /// State coordinates `x = T x̃`: `(T^{-1}AT, T^{-1}B, CT, D)`.
    pub fn similarity(&self, t: &CMatrix) -> Result<Self> {
        let tinv = t.clone().try_inverse().ok_or_else(|| Error::Numeric("singular similarity".into()))?;
        Self::new(&tinv * &self.a * t, &tinv * &self.b, &self.c * t, self.d.clone())
    }

    /// Realization of `C(F) = 2(F + I)^{-1} − I = (I − F)(I + F)^{-1}`.
    pub fn cayley(&self) -> Result<Self> {
        let m = self.m();
        let id = CMatrix::identity(m, m);
        let inv = solve_checked(&(&id + &self.d), &id, 1e-12).ok_or(Error::SingularIplusD)?;
        let r2 = std::f64::consts::SQRT_2;
        let a = &self.a - &self.b * &inv * &self.c;
        let b = &self.b * &inv * cplx(-r2);
        let c = &inv * &self.c * cplx(r2);
        let d = &inv * (&id - &self.d);
        Self::new(a, b, c, d)
    }

    /// Realization of `F^{-1}`.
    pub fn inverse(&self) -> Result<Self> {
        let m = self.m();
        let dinv = solve_checked(&self.d, &CMatrix::identity(m, m), 1e-12).ok_or(Error::SingularD)?;
        let a = &self.a - &self.b * &dinv * &self.c;
        let b = &self.b * &dinv;
        let c = -(&dinv * &self.c);
        Self::new(a, b, c, dinv)
    }

    pub fn negate(&self) -> Self {
        Self {
            c: -&self.c,
            d: -&self.d,
            ..self.clone()
        }
    }

    /// Removes uncontrollable and then unobservable states by orthogonal
    /// projection onto the Krylov subspaces. A minimal realization is
    /// returned unchanged.
    pub fn minimize(&self, tol: f64) -> Self {
        if self.n() == 0 {
            return self.clone();
        }
        let v = krylov_basis(&self.a, &self.b, tol);
        if v.ncols() == self.n() {
            let w = krylov_basis(&self.a.adjoint(), &self.c.adjoint(), tol);
            if w.ncols() == self.n() {
                // already minimal: keep the caller's coordinates
                return self.clone();
            }
        }
        let ac = v.adjoint() * &self.a * &v;
        let bc = v.adjoint() * &self.b;
        let cc = &self.c * &v;
        if ac.nrows() == 0 {
            return Self::constant(self.d.clone()).expect("valid constant");
        }
        let w = krylov_basis(&ac.adjoint(), &cc.adjoint(), tol);
        Self {
            a: w.adjoint() * &ac * &w,
            b: w.adjoint() * &bc,
            c: &cc * &w,
            d: self.d.clone(),
        }
    }
}

/// Orthonormal basis of `span{B, AB, A²B, ...}`.
fn krylov_basis(a: &CMatrix, b: &CMatrix, tol: f64) -> CMatrix {
    let n = a.nrows();
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    let mut candidates: Vec<DVector<Complex64>> = (0..b.ncols()).map(|j| b.column(j).into_owned()).collect();
    while !candidates.is_empty() && basis.len() < n {
        let mut added = Vec::new();
        for mut v in candidates {
            let norm0 = v.norm();
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
            }
            let norm = v.norm();
            if norm > tol * norm0.max(scale) && basis.len() < n {
                v /= cplx(norm);
                basis.push(v.clone());
                added.push(v);
            }
        }
        candidates = added.iter().map(|q| a * q).collect();
    }
    let mut out = CMatrix::zeros(n, basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

/// JSON layout `{"n","m","A","B","C","D"}` with each block a row-major list
/// of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct RealizationJson {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<[f64; 2]>,
    #[serde(rename = "B")]
    b: Vec<[f64; 2]>,
    #[serde(rename = "C")]
    c: Vec<[f64; 2]>,
    #[serde(rename = "D")]
    d: Vec<[f64; 2]>,
}

fn flatten(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn unflatten(data: &[[f64; 2]], rows: usize, cols: usize, context: &'static str) -> Result<CMatrix> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            context,
            expected: rows * cols,
            found: data.len(),
        });
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = data[i * cols + j];
        Complex64::new(re, im)
    }))
}

impl Serialize for Realization {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RealizationJson {
            n: self.n(),
            m: self.m(),
            a: flatten(&self.a),
            b: flatten(&self.b),
            c: flatten(&self.c),
            d: flatten(&self.d),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Realization {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RealizationJson::deserialize(de)?;
        let build = || -> Result<Realization> {
            let (n, m) = (raw.n, raw.m);
            Realization::new(
                unflatten(&raw.a, n, n, "A")?,
                unflatten(&raw.b, n, m, "B")?,
                unflatten(&raw.c, m, n, "C")?,
                unflatten(&raw.d, m, m, "D")?,
            )
        };
        build().map_err(serde::de::Error::custom)
    }
}
