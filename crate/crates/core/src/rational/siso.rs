use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::realization::Realization;
use crate::error::{Error, Result};
use crate::matcore::{cplx, CMatrix};

/// Coefficient tolerance (relative to the largest coefficient) used when
/// cancelling common factors.
pub const GCD_TOL: f64 = 1e-10;

/// Largest polynomial degree accepted by the algebra.
pub const MAX_DEGREE: usize = 64;

/// Scalar real rational function `num(s)/den(s)`, kept in lowest terms with
/// a monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSiso")]
pub struct SisoRational {
    num: Poly,
    den: Poly,
}

#[derive(Deserialize)]
struct RawSiso {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TryFrom<RawSiso> for SisoRational {
    type Error = Error;
    fn try_from(raw: RawSiso) -> Result<Self> {
        SisoRational::new(Poly::new(raw.num), Poly::new(raw.den))
    }
}

fn guard(p: &Poly) -> Result<()> {
    match p.degree() {
        Some(d) if d > MAX_DEGREE => Err(Error::DegreeOverflow(d)),
        _ => Ok(()),
    }
}

impl SisoRational {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        guard(&num)?;
        guard(&den)?;
        Ok(Self::reduce(num, den))
    }

    /// Builds from ascending coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Poly::new(num.to_vec()), Poly::new(den.to_vec()))
    }

    pub fn constant(c: f64) -> Self {
        Self::reduce(Poly::constant(c), Poly::constant(1.0))
    }

    /// The identity function `s`.
    pub fn identity() -> Self {
        Self::reduce(Poly::s(), Poly::constant(1.0))
    }

    /// `d + b/(s + a)`.
    pub fn degree_one(d: f64, b: f64, a: f64) -> Self {
        let den = Poly::new(vec![a, 1.0]);
        let num = den.scale(d) + Poly::constant(b);
        Self::reduce(num, den)
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self {
                num,
                den: Poly::constant(1.0),
            };
        }
        let g = num.gcd(&den, GCD_TOL);
        let (mut num, mut den) = if g.degree().unwrap_or(0) > 0 {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        } else {
            (num, den)
        };
        let lead = den.leading();
        num = num.scale(1.0 / lead);
        den = den.scale(1.0 / lead);
        Self { num, den }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// McMillan degree of the reduced function.
    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    pub fn is_proper(&self) -> bool {
        self.num.degree().unwrap_or(0) <= self.den.degree().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval(s);
        let scale = self.den.coeffs().iter().enumerate().fold(0.0, |acc, (i, c)| {
            acc + c.abs() * s.norm().powi(i as i32)
        });
        if d.norm() <= 1e-14 * scale {
            return Err(Error::PoleAtEvaluationPoint(s));
        }
        Ok(self.num.eval(s) / d)
    }

    /// Value at `s = ∞`; `None` when the function is improper.
    pub fn value_at_infinity(&self) -> Option<f64> {
        let nd = self.num.degree().unwrap_or(0);
        let dd = self.den.degree().unwrap_or(0);
        if self.num.is_zero() || nd < dd {
            Some(0.0)
        } else if nd == dd {
            Some(self.num.leading() / self.den.leading())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.num.clone() * other.den.clone() + other.num.clone() * self.den.clone(),
            self.den.clone() * other.den.clone(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.num.clone() * other.num.clone(),
            self.den.clone() * other.den.clone(),
        )
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::reduce(self.num.scale(k), self.den.clone())
    }

    pub fn invert(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::ZeroInversion);
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    /// `self(inner(s))`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let k = self.degree();
        let p = &inner.num;
        let q = &inner.den;
        if k.saturating_mul(p.degree().unwrap_or(0).max(q.degree().unwrap_or(0))) > MAX_DEGREE {
            return Err(Error::DegreeOverflow(k * p.degree().unwrap_or(0).max(q.degree().unwrap_or(0))));
        }
        let p_pows: Vec<Poly> = (0..=k).map(|i| p.pow(i)).collect();
        let q_pows: Vec<Poly> = (0..=k).map(|i| q.pow(i)).collect();
        let expand = |outer: &Poly| {
            (0..=k).fold(Poly::zero(), |acc, i| {
                acc + (p_pows[i].clone() * q_pows[k - i].clone()).scale(outer.coeff(i))
            })
        };
        Self::new(expand(&self.num), expand(&self.den))
    }

    /// `(½(f + 1/f))^{-1}`, the midpoint-inverse that maps `HP_η` into
    /// `HP_{(η+1/η)/2}`.
    pub fn midpoint_inverse(&self) -> Result<Self> {
        let inv = self.invert()?;
        self.add(&inv)?.scale(0.5).invert()
    }

    /// Controllable canonical realization of a proper function.
    pub fn to_realization(&self) -> Result<Realization> {
        if !self.is_proper() {
            return Err(Error::ImproperFunction {
                num: self.num.degree().unwrap_or(0),
                den: self.den.degree().unwrap_or(0),
            });
        }
        let n = self.den.degree().unwrap_or(0);
        let den = self.den.monic();
        let num = self.num.scale(1.0 / self.den.leading());
        let d = if num.degree() == Some(n) { num.leading() } else { 0.0 };
        let rem = num - den.scale(d);
        let a = CMatrix::from_fn(n, n, |i, j| {
            if i + 1 < n {
                cplx(if j == i + 1 { 1.0 } else { 0.0 })
            } else {
                cplx(-den.coeff(j))
            }
        });
        let b = CMatrix::from_fn(n, 1, |i, _| cplx(if i + 1 == n { 1.0 } else { 0.0 }));
        let c = CMatrix::from_fn(1, n, |_, j| cplx(rem.coeff(j)));
        let dm = CMatrix::from_element(1, 1, cplx(d));
        Realization::new(a, b, c, dm)
    }
}
