//! Membership tests and structural operations for the quantitative Stein
//! sets `Stein_H(η)` and their Cayley images, the Riccati-type sets
//! `L_H(η)`.
//!
//! For finite `η`,
//!
//! * `Â ∈ Stein_H(η)` iff `(η−1)H − (η+1)Â*HÂ` is positive definite,
//! * `A ∈ L_H(η)` iff `−A*HA/η + A*H + HA − H/η` is positive definite.
//!
//! At `η = ∞` both degenerate to the plain Stein form `H − Â*HÂ` and the
//! Lyapunov form `HA + A*H`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matcore::{cayley, cplx, ginibre, real_ginibre, spectral_norm, CMatrix, HermitianMatrix};

/// Quantitative class index `η ∈ (1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaParam {
    Finite(f64),
    Infinity,
}

impl EtaParam {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_nan() || value <= 1.0 {
            return Err(Error::InvalidEta(value));
        }
        if value.is_infinite() {
            return Ok(Self::Infinity);
        }
        Ok(Self::Finite(value))
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(v) => v,
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// `√((η−1)/(η+1))`, the norm bound of the bounded-real side; 1 at `η = ∞`.
    pub fn contraction_radius(self) -> f64 {
        match self {
            Self::Finite(v) => ((v - 1.0) / (v + 1.0)).sqrt(),
            Self::Infinity => 1.0,
        }
    }

    /// Inverse of [`EtaParam::contraction_radius`]: `η = (1+γ²)/(1−γ²)`.
    pub fn from_contraction_radius(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidEta(1.0));
        }
        if gamma >= 1.0 {
            return Ok(Self::Infinity);
        }
        let g2 = gamma * gamma;
        Self::finite((1.0 + g2) / (1.0 - g2))
    }

    /// `(1+η)/(1−η)`; tends to −1 as `η → ∞`.
    pub fn bounded_real_coefficient(self) -> f64 {
        match self {
            Self::Finite(v) => (1.0 + v) / (1.0 - v),
            Self::Infinity => -1.0,
        }
    }
}

impl fmt::Display for EtaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for EtaParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for EtaParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => EtaParam::finite(v).map_err(serde::de::Error::custom),
            Raw::Text(t) if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") => {
                Ok(EtaParam::Infinity)
            }
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid eta `{t}`"))),
        }
    }
}

/// Parameters `(H, η)` of a Stein set.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinSetSpec {
    pub h: HermitianMatrix,
    pub eta: EtaParam,
}

/// Parameters `(H, η)` of a Riccati-type set `L_H(η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapSetSpec {
    pub h: HermitianMatrix,
    pub eta: EtaParam,
}

impl SteinSetSpec {
    pub fn new(h: HermitianMatrix, eta: EtaParam) -> Self {
        Self { h, eta }
    }

    pub fn lyap(&self) -> LyapSetSpec {
        LyapSetSpec::new(self.h.clone(), self.eta)
    }
}

impl LyapSetSpec {
    pub fn new(h: HermitianMatrix, eta: EtaParam) -> Self {
        Self { h, eta }
    }
}

fn check_dim(h: &HermitianMatrix, a: &CMatrix, context: &'static str) -> Result<()> {
    if a.nrows() != h.dim() || a.ncols() != h.dim() {
        return Err(Error::DimensionMismatch {
            context,
            expected: h.dim(),
            found: if a.nrows() != h.dim() { a.nrows() } else { a.ncols() },
        });
    }
    Ok(())
}

/// `(η−1)H − (η+1)Â*HÂ`, or `H − Â*HÂ` at `η = ∞`.
pub fn stein_residual(spec: &SteinSetSpec, ahat: &CMatrix) -> Result<HermitianMatrix> {
    check_dim(&spec.h, ahat, "stein_residual")?;
    let h = spec.h.matrix();
    let quad = ahat.adjoint() * h * ahat;
    let m = match spec.eta {
        EtaParam::Finite(eta) => h * cplx(eta - 1.0) - quad * cplx(eta + 1.0),
        EtaParam::Infinity => h - quad,
    };
    HermitianMatrix::new(m)
}

/// `−A*HA/η + A*H + HA − H/η`, or `HA + A*H` at `η = ∞`.
pub fn lyap_residual(spec: &LyapSetSpec, a: &CMatrix) -> Result<HermitianMatrix> {
    check_dim(&spec.h, a, "lyap_residual")?;
    let h = spec.h.matrix();
    let lin = h * a + a.adjoint() * h;
    let m = match spec.eta {
        EtaParam::Finite(eta) => lin - (a.adjoint() * h * a + h) * cplx(1.0 / eta),
        EtaParam::Infinity => lin,
    };
    HermitianMatrix::new(m)
}

/// Strict membership (positive definite residual).
pub fn is_stein_member(spec: &SteinSetSpec, ahat: &CMatrix, tol: f64) -> Result<bool> {
    Ok(stein_residual(spec, ahat)?.is_positive_definite(tol))
}

/// Membership in the closure (positive semidefinite residual).
pub fn is_stein_member_closure(spec: &SteinSetSpec, ahat: &CMatrix, tol: f64) -> Result<bool> {
    Ok(stein_residual(spec, ahat)?.is_positive_semidefinite(tol))
}

pub fn is_lyap_member(spec: &LyapSetSpec, a: &CMatrix, tol: f64) -> Result<bool> {
    Ok(lyap_residual(spec, a)?.is_positive_definite(tol))
}

pub fn is_lyap_member_closure(spec: &LyapSetSpec, a: &CMatrix, tol: f64) -> Result<bool> {
    Ok(lyap_residual(spec, a)?.is_positive_semidefinite(tol))
}

/// `‖H^{1/2} Â H^{−1/2}‖₂` for positive definite `H`.
pub fn similarity_norm(h: &HermitianMatrix, ahat: &CMatrix) -> Result<f64> {
    check_dim(h, ahat, "similarity_norm")?;
    let root = h.pd_power(0.5)?;
    let inv_root = h.pd_power(-0.5)?;
    Ok(spectral_norm(&(root * ahat * inv_root)))
}

/// Norm-route membership, valid only for positive definite `H`.
pub fn is_stein_member_by_norm(spec: &SteinSetSpec, ahat: &CMatrix) -> Result<bool> {
    Ok(similarity_norm(&spec.h, ahat)? < spec.eta.contraction_radius())
}

/// `η₁ = (η + 1/η)/2`: products of two members of `Stein_H(η)` lie in
/// `Stein_H(η₁)`.
pub fn product_contract_eta(eta: EtaParam) -> EtaParam {
    match eta {
        EtaParam::Finite(v) => EtaParam::Finite(0.5 * (v + 1.0 / v)),
        EtaParam::Infinity => EtaParam::Infinity,
    }
}

/// Random `G` with `‖G‖₂ < 1`: a normalized Gaussian matrix scaled by a
/// uniform radius.
pub fn sample_contraction<R: Rng + ?Sized>(n: usize, real: bool, rng: &mut R) -> CMatrix {
    let g = if real { real_ginibre(n, n, rng) } else { ginibre(n, n, rng) };
    let norm = spectral_norm(&g);
    if norm == 0.0 {
        return g;
    }
    let r: f64 = rng.random_range(0.0..1.0);
    g * cplx(r / norm)
}

/// Interior sample `Â = γ(1−ε) H^{−1/2} G H^{1/2}` of `Stein_H(η)` for
/// positive definite `H`, `‖G‖₂ < 1`.
pub fn random_stein_member<R: Rng + ?Sized>(
    spec: &SteinSetSpec,
    real: bool,
    margin: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    let n = spec.h.dim();
    let root = spec.h.pd_power(0.5)?;
    let inv_root = spec.h.pd_power(-0.5)?;
    let g = sample_contraction(n, real, rng);
    let scale = spec.eta.contraction_radius() * (1.0 - margin);
    Ok(inv_root * g * root * cplx(scale))
}

/// Interior sample of `L_H(η)` obtained as the Cayley image of a Stein member.
pub fn random_lyap_member<R: Rng + ?Sized>(
    spec: &LyapSetSpec,
    real: bool,
    margin: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    let stein = SteinSetSpec::new(spec.h.clone(), spec.eta);
    cayley(&random_stein_member(&stein, real, margin, rng)?)
}

/// Outcome of [`nested_inclusion_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub samples: usize,
    pub failures: usize,
}

/// Samples members of `Stein_H(η_small)` and counts those that fail
/// membership in `Stein_H(η_large)`.
pub fn nested_inclusion_check<R: Rng + ?Sized>(
    h: &HermitianMatrix,
    eta_small: EtaParam,
    eta_large: EtaParam,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<InclusionReport> {
    if eta_small.value() > eta_large.value() {
        return Err(Error::InvalidParameter(format!(
            "nested inclusion needs eta_small <= eta_large, got {eta_small} > {eta_large}"
        )));
    }
    let small = SteinSetSpec::new(h.clone(), eta_small);
    let large = SteinSetSpec::new(h.clone(), eta_large);
    let mut failures = 0;
    for _ in 0..samples {
        let a = random_stein_member(&small, false, 1e-3, rng)?;
        if !is_stein_member(&large, &a, tol)? {
            failures += 1;
        }
    }
    Ok(InclusionReport { samples, failures })
}
