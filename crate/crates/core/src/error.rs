use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the analysis kernels.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("-1 is (numerically) an eigenvalue: I + M is singular")]
    SingularShift,
    #[error("I + D is singular: the Cayley transform of the realization is undefined")]
    SingularIplusD,
    #[error("D is singular: the realization has no proper inverse")]
    SingularD,
    #[error("evaluation point {0} is a pole")]
    PoleAtEvaluationPoint(Complex64),
    #[error("cannot invert the zero rational function")]
    ZeroInversion,
    #[error("polynomial degree {0} exceeds the supported maximum of 64")]
    DegreeOverflow(usize),
    #[error("rational function is improper (numerator degree {num} > denominator degree {den})")]
    ImproperFunction { num: usize, den: usize },
    #[error("denominator polynomial is identically zero")]
    ZeroDenominator,
    #[error("realization has a pole at {0} outside the open left half-plane")]
    UnstablePoles(Complex64),
    #[error("no certificate exists at eta = {eta}: sharpest eta is {eta_star} (gap {gap:e})")]
    NoCertificate { eta: f64, eta_star: f64, gap: f64 },
    #[error("Hamiltonian has eigenvalues on the imaginary axis; eta {0} is (numerically) critical, retry with eta*(1+1e-8)")]
    HamiltonianImaginaryAxisEigenvalues(f64),
    #[error("eta must exceed 1, got {0}")]
    InvalidEta(f64),
    #[error("sector requires 0 < k <= K < inf, got k = {k}, K = {big_k}")]
    NonpositiveSector { k: f64, big_k: f64 },
    #[error("invalid sector: K = {big_k} < k = {k}")]
    InvalidSector { k: f64, big_k: f64 },
    #[error("inner function is not strictly positive real")]
    InnerNotSP,
    #[error("feedback loop is ill-posed: 1 + gain * D vanishes inside the sector")]
    IllPosedLoop,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
