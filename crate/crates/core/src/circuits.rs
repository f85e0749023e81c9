//! Degree-one driving-point impedance: a series resistor `Rs` followed by a
//! parallel `R ∥ C`. Impedances are normalized so that `R/2 = √(η²−1)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::SisoRational;
use crate::sets::EtaParam;

/// Component values in normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RlcDegreeOne {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "Rs")]
    pub rs: f64,
}

/// `√((R/2)² + 1) − R/2`, written to avoid cancellation for large `R`.
fn series_for(r: f64) -> f64 {
    let h = 0.5 * r;
    1.0 / ((h * h + 1.0).sqrt() + h)
}

impl RlcDegreeOne {
    /// Checks positivity and the series-resistor relation to `1e-9`.
    pub fn new(r: f64, c: f64, rs: f64) -> Result<Self> {
        if !(r > 0.0 && c > 0.0 && rs > 0.0) || !(r.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "component values must be positive and finite (R = {r}, C = {c}, Rs = {rs})"
            )));
        }
        let expected = series_for(r);
        if (rs - expected).abs() > 1e-9 * expected.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "Rs = {rs} does not match sqrt((R/2)^2 + 1) - R/2 = {expected}"
            )));
        }
        Ok(Self { r, c, rs })
    }

    /// `Z(s) = Rs + R/(1 + sRC)`.
    pub fn impedance(&self, s: Complex64) -> Complex64 {
        self.rs + self.r / (1.0 + s * self.r * self.c)
    }

    /// Parameters `(η, a)` with `R = 2√(η²−1)` and `a = 1/(RC)`.
    pub fn parameters(&self) -> (f64, f64) {
        let h = 0.5 * self.r;
        ((h * h + 1.0).sqrt(), 1.0 / (self.r * self.c))
    }
}

/// `R = 2√(η²−1)`, `C = 1/(aR)`, `Rs = η − √(η²−1)`.
pub fn synthesize(eta: EtaParam, a: f64) -> Result<RlcDegreeOne> {
    let EtaParam::Finite(e) = eta else {
        return Err(Error::InvalidEta(f64::INFINITY));
    };
    if !(e > 1.0) {
        return Err(Error::InvalidEta(e));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
    }
    let root = (e * e - 1.0).sqrt();
    let r = 2.0 * root;
    Ok(RlcDegreeOne {
        r,
        c: 1.0 / (a * r),
        rs: series_for(r),
    })
}

/// Impedance as a rational function together with `(η, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub impedance: SisoRational,
    pub eta: f64,
    pub a: f64,
}

pub fn analyze(circuit: &RlcDegreeOne) -> Result<Analysis> {
    let c = RlcDegreeOne::new(circuit.r, circuit.c, circuit.rs)?;
    let (eta, a) = c.parameters();
    Ok(Analysis {
        impedance: SisoRational::degree_one(c.rs, 1.0 / c.c, a),
        eta,
        a,
    })
}

/// Three element lines preceded by a comment carrying `(η, a)`.
pub fn netlist(circuit: &RlcDegreeOne) -> String {
    let (eta, a) = circuit.parameters();
    let mut out = String::new();
    let _ = writeln!(out, "* degree-one impedance: Rs in series with R || C; eta = {eta}, a = {a}");
    let _ = writeln!(out, "Rs {}", circuit.rs);
    let _ = writeln!(out, "R {}", circuit.r);
    let _ = writeln!(out, "C {}", circuit.c);
    out
}
