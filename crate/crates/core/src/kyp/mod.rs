//! Kalman-Yakubovich-Popov certificates: the Lyapunov-form residual of the
//! classical positive real lemma, the quantitative bounded-real quadratic
//! form on the Cayley realization, their verification and a Riccati-based
//! search for `H`.

pub mod riccati;

use serde::{Serialize, Serializer};

use crate::classify::{eta_of, ClassifyOptions, is_strictly_positive_real};
use crate::error::{Error, Result};
use crate::matcore::{cplx, solve_checked, spectral_norm, CMatrix, HermitianMatrix};
use crate::rational::{Realization, MINIMAL_TOL};
use crate::sets::EtaParam;
use crate::tolerance::Tolerances;
use riccati::care_stabilizing;

/// Magnitude below which the extreme residual eigenvalue is reported as
/// singular.
pub const SINGULAR_TOL: f64 = 1e-8;

/// Indefinite weight `[[0,0,−H,0],[0,cI,0,0],[−H,0,0,0],[0,0,0,I]]` with
/// `c = (1+η)/(1−η)`, rows ordered (state, port, state, port).
#[derive(Debug, Clone)]
pub struct Wmatrix {
    n: usize,
    m: usize,
    matrix: HermitianMatrix,
}

impl Wmatrix {
    pub fn new(h: &HermitianMatrix, eta: EtaParam, m: usize) -> Self {
        let n = h.dim();
        let c = eta.bounded_real_coefficient();
        let k = n + m;
        let mut w = CMatrix::zeros(2 * k, 2 * k);
        let neg_h = -h.matrix();
        w.view_mut((0, k), (n, n)).copy_from(&neg_h);
        w.view_mut((k, 0), (n, n)).copy_from(&neg_h);
        for i in 0..m {
            w[(n + i, n + i)] = cplx(c);
            w[(k + n + i, k + n + i)] = cplx(1.0);
        }
        let out = Self {
            n,
            m,
            matrix: HermitianMatrix::new(w).expect("square"),
        };
        debug_assert!(
            !h.is_positive_definite(0.0) || out.inertia(1e-12) == (k, k, 0),
            "W must have inertia (n+m, n+m)"
        );
        out
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// `(positive, negative, zero)` eigenvalue counts with zero band `tol`.
    pub fn inertia(&self, tol: f64) -> (usize, usize, usize) {
        let ev = self.matrix.eigenvalues();
        let pos = ev.iter().filter(|&&l| l > tol).count();
        let neg = ev.iter().filter(|&&l| l < -tol).count();
        (pos, neg, ev.len() - pos - neg)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }
}

fn check_h(r: &Realization, h: &HermitianMatrix) -> Result<()> {
    if h.dim() != r.n() {
        return Err(Error::DimensionMismatch {
            context: "H",
            expected: r.n(),
            found: h.dim(),
        });
    }
    Ok(())
}

/// `diag(−H, I)·R + R*·diag(−H, I)` with `R = [[A, B], [C, D]]`.
pub fn plemma_residual(r: &Realization, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_h(r, h)?;
    let (n, m) = (r.n(), r.m());
    let mut e = CMatrix::identity(n + m, n + m);
    e.view_mut((0, 0), (n, n)).copy_from(&(-h.matrix()));
    let s = r.system_matrix();
    HermitianMatrix::new(&e * &s + s.adjoint() * &e)
}

/// `M* W M` with `M = [Â B̂; Ĉ D̂; I 0; 0 I]` built from the Cayley
/// realization of `r`.
pub fn qmi_residual(r: &Realization, h: &HermitianMatrix, eta: EtaParam) -> Result<HermitianMatrix> {
    check_h(r, h)?;
    let g = r.cayley()?;
    let (n, m) = (r.n(), r.m());
    let k = n + m;
    let mut stack = CMatrix::zeros(2 * k, k);
    stack.view_mut((0, 0), (k, k)).copy_from(&g.system_matrix());
    stack.view_mut((k, 0), (k, k)).copy_from(&CMatrix::identity(k, k));
    let w = Wmatrix::new(h, eta, m);
    HermitianMatrix::new(stack.adjoint() * w.matrix().matrix() * &stack)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CertifiesP,
    CertifiesSP,
    CertifiesHP,
    CertifiesHPeta,
    Fails,
}

impl Verdict {
    pub fn certifies(self) -> bool {
        self != Verdict::Fails
    }
}

/// Split `Q = Q₁ + diag(δI, 0)` with `Q₁` PSD, and the shift bound
/// `ε ≤ δ/(2‖H‖₂)` it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpSplit {
    pub delta: f64,
    pub eps_bound: f64,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub h: HermitianMatrix,
    pub eta: EtaParam,
    pub residual: HermitianMatrix,
    pub lambda_min: f64,
    pub verdict: Verdict,
    pub split: Option<SpSplit>,
    /// The residual is singular to `SINGULAR_TOL`; informational only.
    pub singular: bool,
}

impl Certificate {
    pub fn residual_norm(&self) -> f64 {
        spectral_norm(self.residual.matrix())
    }
}

/// `H` is written as real rows when it is real, as `[re, im]` pairs
/// otherwise.
pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    let real = m.iter().all(|z| z.im == 0.0);
    if real {
        MatrixRows::Real((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect())
    } else {
        MatrixRows::Complex(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MatrixRows {
    Real(Vec<Vec<f64>>),
    Complex(Vec<Vec<[f64; 2]>>),
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json<'a> {
            #[serde(rename = "H")]
            h: MatrixRows,
            eta: &'a EtaParam,
            lambda_min: f64,
            verdict: Verdict,
            residual_norm: f64,
        }
        Json {
            h: matrix_to_rows(self.h.matrix()),
            eta: &self.eta,
            lambda_min: self.lambda_min,
            verdict: self.verdict,
            residual_norm: self.residual_norm(),
        }
        .serialize(s)
    }
}

/// Largest `δ ≥ 0` with `Q − diag(δI_n, 0)` PSD to `tol`, by bisection.
pub fn sp_split(q: &HermitianMatrix, h: &HermitianMatrix, tol: f64) -> Option<SpSplit> {
    let n = h.dim();
    if n == 0 || !q.is_positive_semidefinite(tol) {
        return None;
    }
    let shifted = |d: f64| {
        let mut m = q.matrix().clone();
        for i in 0..n {
            m[(i, i)] -= cplx(d);
        }
        HermitianMatrix::new(m).expect("square").is_positive_semidefinite(tol)
    };
    let mut hi = (0..n).map(|i| q.matrix()[(i, i)].re).fold(f64::INFINITY, f64::min);
    if !(hi > 0.0) {
        return None;
    }
    let mut lo = 0.0;
    if shifted(hi) {
        lo = hi;
    } else {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if shifted(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
    }
    (lo > tol).then(|| SpSplit {
        delta: lo,
        eps_bound: lo / (2.0 * spectral_norm(h.matrix())),
    })
}

/// Checks a user-supplied pair `(H, η)`. Finite `η` uses the quadratic form
/// on the Cayley realization; `η = ∞` uses the Lyapunov-form residual and
/// grades it P, SP or HP.
pub fn verify(r: &Realization, h: &HermitianMatrix, eta: EtaParam, tol: &Tolerances) -> Result<Certificate> {
    let h_pd = h.is_positive_definite(tol.psd);
    let (residual, verdict, split) = match eta {
        EtaParam::Finite(_) => {
            let res = qmi_residual(r, h, eta)?;
            let ok = h_pd && res.is_positive_semidefinite(tol.psd);
            (res, if ok { Verdict::CertifiesHPeta } else { Verdict::Fails }, None)
        }
        EtaParam::Infinity => {
            let q = plemma_residual(r, h)?;
            let split = if h_pd { sp_split(&q, h, tol.psd) } else { None };
            let verdict = if !h_pd {
                Verdict::Fails
            } else if q.is_positive_definite(tol.psd) {
                Verdict::CertifiesHP
            } else if split.is_some() {
                Verdict::CertifiesSP
            } else if q.is_positive_semidefinite(tol.psd) {
                Verdict::CertifiesP
            } else {
                Verdict::Fails
            };
            (q, verdict, split)
        }
    };
    let lambda_min = residual.min_eigenvalue();
    Ok(Certificate {
        h: h.clone(),
        eta,
        singular: lambda_min.abs() <= SINGULAR_TOL,
        residual,
        lambda_min,
        verdict,
        split,
    })
}

/// Riccati data `(F, G, Q₀)` whose solutions `X` with `F*X + XF + XGX + Q₀
/// + εI = 0` make the bounded-real residual of `(Â, B̂, Ĉ, D̂)` at level `γ`
/// equal to `εI` after a Schur complement.
fn bounded_real_data(g: &Realization, gamma: f64) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let m = g.m();
    let (a, b, c, d) = (g.a(), g.b(), g.c(), g.d());
    let inv_g2 = 1.0 / (gamma * gamma);
    let rr = CMatrix::identity(m, m) - d.adjoint() * d * cplx(inv_g2);
    let rinv = solve_checked(&rr, &CMatrix::identity(m, m), 1e-12)
        .ok_or_else(|| Error::Numeric("I − D̂*D̂/γ² is singular".into()))?;
    let s0 = c.adjoint() * d * cplx(inv_g2);
    let f = a + b * &rinv * s0.adjoint();
    let gg = b * &rinv * b.adjoint();
    let q0 = c.adjoint() * c * cplx(inv_g2) + &s0 * &rinv * s0.adjoint();
    Ok((f, gg, q0))
}

/// Same reduction for the Lyapunov-form residual with `R = D + D*`.
fn positive_real_data(r: &Realization) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let m = r.m();
    let (a, b, c, d) = (r.a(), r.b(), r.c(), r.d());
    let rr = d + d.adjoint();
    let rinv = solve_checked(&rr, &CMatrix::identity(m, m), 1e-12).ok_or_else(|| Error::NoCertificate {
        eta: f64::INFINITY,
        eta_star: f64::INFINITY,
        gap: f64::INFINITY,
    })?;
    let f = a - b * &rinv * c;
    let gg = b * &rinv * b.adjoint();
    let q0 = c.adjoint() * &rinv * c;
    Ok((f, gg, q0))
}

/// Searches a PD `H` certifying `F ∈ HP_η` (finite `η`) or the classical
/// lemma (`η = ∞`). The realization is minimized first; a minimal input
/// keeps its coordinates so the returned `H` applies to it directly.
pub fn search_h(r: &Realization, eta: EtaParam, opts: &ClassifyOptions) -> Result<Certificate> {
    let r = r.minimize(MINIMAL_TOL);
    if let Some(p) = r.poles()?.into_iter().find(|p| p.re >= 0.0) {
        return Err(Error::UnstablePoles(p));
    }
    let report = eta_of(&r, opts)?;
    if r.n() == 0 {
        // the certificate is the feedthrough block alone
        let cert = verify(&r, &HermitianMatrix::zeros(0), eta, &opts.tol)?;
        if cert.verdict.certifies() {
            return Ok(cert);
        }
    }
    let (f, g, q0) = match eta {
        EtaParam::Finite(e) => {
            match report.eta_star {
                None => {
                    return Err(Error::NoCertificate {
                        eta: e,
                        eta_star: f64::INFINITY,
                        gap: f64::INFINITY,
                    })
                }
                Some(s) if s > e * (1.0 + 1e-12) => {
                    return Err(Error::NoCertificate {
                        eta: e,
                        eta_star: s,
                        gap: s - e,
                    })
                }
                Some(_) => {}
            }
            // a singular reduction means the peak is reached at infinity
            match bounded_real_data(&r.cayley()?, eta.contraction_radius()) {
                Err(Error::Numeric(_)) => return Err(Error::HamiltonianImaginaryAxisEigenvalues(e)),
                other => other?,
            }
        }
        EtaParam::Infinity => positive_real_data(&r)?,
    };
    let scale = q0.norm().max(1.0);
    let mut last = Error::HamiltonianImaginaryAxisEigenvalues(eta.value());
    let mut fallback: Option<Certificate> = None;
    // the slack left near a critical level can be tiny, hence one rung per decade
    for eps in (6..=16).map(|j| 10f64.powi(-j)).chain([0.0]) {
        let n = r.n();
        let q = &q0 + CMatrix::identity(n, n) * cplx(eps * scale);
        match care_stabilizing(&f, &g, &q) {
            Ok(x) => {
                let h = HermitianMatrix::new(x)?;
                let cert = verify(&r, &h, eta, &opts.tol)?;
                match cert.verdict {
                    Verdict::CertifiesHPeta | Verdict::CertifiesHP => return Ok(cert),
                    Verdict::Fails => {
                        last = Error::Numeric(format!("candidate H fails verification (λ_min = {:e})", cert.lambda_min));
                    }
                    _ => {
                        fallback.get_or_insert(cert);
                    }
                }
            }
            Err(Error::HamiltonianImaginaryAxisEigenvalues(_)) => {
                last = Error::HamiltonianImaginaryAxisEigenvalues(eta.value());
            }
            Err(e) => last = e,
        }
    }
    fallback.ok_or(last)
}

/// The three booleans of "HP ⇔ SP and `lim_{s→∞} F(s)` has a positive
/// definite Hermitian part", each computed independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HpLimitReport {
    pub sp: bool,
    pub limit_positive: bool,
    pub hp: bool,
    pub consistent: bool,
}

pub fn hp_iff_sp_plus_limit(r: &Realization, opts: &ClassifyOptions) -> Result<HpLimitReport> {
    let sp = is_strictly_positive_real(r, opts)?;
    let d = r.d();
    let limit_positive = HermitianMatrix::new(d + d.adjoint())?.is_positive_definite(opts.tol.psd);
    let hp = eta_of(r, opts)?.is_hyper_positive();
    Ok(HpLimitReport {
        sp,
        limit_positive,
        hp,
        consistent: hp == (sp && limit_positive),
    })
}
