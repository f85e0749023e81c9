//! Parsing of command-line values: numbers with `p/q` fractions and `inf`,
//! matrices as real rows or `[re, im]` pairs, and the tolerance override.

use std::sync::OnceLock;

use hyperreal::matcore::CMatrix;
use hyperreal::rational::{Realization, SisoRational};
use hyperreal::sets::EtaParam;
use hyperreal::Tolerances;
use num_complex::Complex64;
use regex::Regex;
use serde::de::DeserializeOwned;
use serde_json::Value;

/// A user input problem, reported with the offending field.
#[derive(Debug)]
pub struct InputError {
    pub field: String,
    pub message: String,
}

impl InputError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub type Parsed<T> = std::result::Result<T, InputError>;

fn fraction_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*/\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)").unwrap()
    })
}

/// Replaces every `p/q` literal in JSON text by its decimal value.
pub fn expand_fractions(field: &str, text: &str) -> Parsed<String> {
    let mut err = None;
    let out = fraction_re().replace_all(text, |caps: &regex::Captures| {
        let p: f64 = caps[1].parse().unwrap_or(f64::NAN);
        let q: f64 = caps[2].parse().unwrap_or(f64::NAN);
        if q == 0.0 || !p.is_finite() || !q.is_finite() {
            err = Some(InputError::new(field, format!("invalid fraction `{}`", &caps[0])));
            return String::from("0");
        }
        format!("{:?}", p / q)
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out.into_owned()),
    }
}

/// A real number, `p/q`, or `inf`.
pub fn number(field: &str, text: &str) -> Parsed<f64> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| InputError::new(field, format!("invalid number `{t}`")))?;
        let q: f64 = q.trim().parse().map_err(|_| InputError::new(field, format!("invalid number `{t}`")))?;
        if q == 0.0 {
            return Err(InputError::new(field, "zero denominator"));
        }
        return Ok(p / q);
    }
    t.parse().map_err(|_| InputError::new(field, format!("invalid number `{t}`")))
}

pub fn finite_number(field: &str, text: &str) -> Parsed<f64> {
    let v = number(field, text)?;
    if !v.is_finite() {
        return Err(InputError::new(field, "must be finite"));
    }
    Ok(v)
}

pub fn eta(field: &str, text: &str) -> Parsed<EtaParam> {
    let v = number(field, text)?;
    if v.is_infinite() {
        return Ok(EtaParam::Infinity);
    }
    EtaParam::finite(v).map_err(|e| InputError::new(field, e.to_string()))
}

pub fn json<T: DeserializeOwned>(field: &str, text: &str) -> Parsed<T> {
    let expanded = expand_fractions(field, text)?;
    serde_json::from_str(&expanded).map_err(|e| InputError::new(field, e.to_string()))
}

pub fn read_file(field: &str, path: &str) -> Parsed<String> {
    std::fs::read_to_string(path).map_err(|e| InputError::new(field, format!("cannot read `{path}`: {e}")))
}

fn entry(field: &str, v: &Value) -> Parsed<Complex64> {
    match v {
        Value::Number(n) => Ok(Complex64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(InputError::new(field, "complex entries must be [re, im] numbers")),
        },
        _ => Err(InputError::new(field, format!("unexpected matrix entry `{v}`"))),
    }
}

/// A matrix written as an array of rows whose entries are real numbers or
/// `[re, im]` pairs.
pub fn matrix(field: &str, text: &str) -> Parsed<CMatrix> {
    let v: Value = json(field, text)?;
    let rows = v.as_array().ok_or_else(|| InputError::new(field, "expected an array of rows"))?;
    if rows.is_empty() {
        return Ok(CMatrix::zeros(0, 0));
    }
    let mut data = Vec::new();
    let mut width = None;
    for row in rows {
        let row = row.as_array().ok_or_else(|| InputError::new(field, "each row must be an array"))?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(InputError::new(field, "rows have different lengths"));
        }
        for e in row {
            data.push(entry(field, e)?);
        }
    }
    let cols = width.unwrap_or(0);
    Ok(CMatrix::from_row_slice(rows.len(), cols, &data))
}

pub fn real_vector(field: &str, text: &str) -> Parsed<Vec<f64>> {
    json(field, text)
}

/// The function under study: a realization file or an inline SISO
/// rational function.
pub fn system(realization: Option<&str>, siso: Option<&str>) -> Parsed<Realization> {
    match (realization, siso) {
        (Some(path), None) => json("--realization", &read_file("--realization", path)?),
        (None, Some(text)) => siso_function(text)?
            .to_realization()
            .map_err(|e| InputError::new("--siso", e.to_string())),
        (Some(_), Some(_)) => Err(InputError::new("--realization", "give either --realization or --siso, not both")),
        (None, None) => Err(InputError::new("--realization", "one of --realization or --siso is required")),
    }
}

pub fn siso_function(text: &str) -> Parsed<SisoRational> {
    json("--siso", text)
}

/// `HYPERREAL_TOL`: either one number (the definiteness slack) or a
/// comma-separated list of `herm=`, `psd=`, `eq=` assignments.
pub fn tolerances(value: Option<&str>) -> Parsed<Tolerances> {
    let mut tol = Tolerances::default();
    let Some(text) = value.map(str::trim).filter(|t| !t.is_empty()) else {
        return Ok(tol);
    };
    const FIELD: &str = "HYPERREAL_TOL";
    if !text.contains('=') {
        tol.psd = positive(FIELD, text)?;
        return Ok(tol);
    }
    for part in text.split(',') {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| InputError::new(FIELD, format!("expected key=value, got `{part}`")))?;
        let v = positive(FIELD, val)?;
        match key.trim() {
            "herm" => tol.herm = v,
            "psd" => tol.psd = v,
            "eq" => tol.eq = v,
            other => return Err(InputError::new(FIELD, format!("unknown tolerance `{other}`"))),
        }
    }
    Ok(tol)
}

fn positive(field: &str, text: &str) -> Parsed<f64> {
    let v = finite_number(field, text)?;
    if !(v >= 0.0) {
        return Err(InputError::new(field, "tolerances must be nonnegative"));
    }
    Ok(v)
}
