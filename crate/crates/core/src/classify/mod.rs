//! Class membership of rational functions: positive real (P), strictly
//! positive real (SP), hyper-positive real (HP), the sharpest index `η` of
//! `HP_η`, and hyper-bounded membership `HB_η`.
//!
//! The sharpest `η` is computed on the boundary through the Cayley image:
//! `η* = (1 + γ²)/(1 − γ²)` with `γ` the `H∞` norm of `C(F)`.

pub mod hinf;
pub mod sweep;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{spectral_norm, CMatrix, HermitianMatrix};
use crate::rational::{Realization, SisoRational, MINIMAL_TOL};
use crate::sets::EtaParam;
use crate::tolerance::Tolerances;
use hinf::{grid_norm, hinf_norm, HinfNorm};
use sweep::{grid_max, sweep_frequencies};

/// Shift ladder length of the SP search: `ε = ε_max · 2^{-j}`, `j ≤ 40`.
const SP_STEPS: i32 = 40;
/// Radius around imaginary-axis poles excluded from the positivity sweep.
const POLE_EXCLUSION: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Relative accuracy of the `H∞` level iteration.
    pub gamma_tol: f64,
    pub tol: Tolerances,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            gamma_tol: 1e-8,
            tol: Tolerances::default(),
        }
    }
}

/// Where an extremum or a violation was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Boundary point `s = iω`.
    Frequency { omega: f64 },
    /// The limit `s → ∞`.
    Infinity,
    /// A pole outside the admissible region.
    Pole { re: f64, im: f64 },
    /// A point of the open right half-plane where `I + F(s)` is singular.
    Point { re: f64, im: f64 },
    None,
}

impl Witness {
    pub fn from_omega(omega: f64) -> Self {
        if omega.is_finite() {
            Witness::Frequency { omega }
        } else {
            Witness::Infinity
        }
    }

    fn pole(p: Complex64) -> Self {
        Witness::Pole { re: p.re, im: p.im }
    }

    pub fn omega(&self) -> Option<f64> {
        match self {
            Witness::Frequency { omega } => Some(*omega),
            Witness::Infinity => Some(f64::INFINITY),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Hamiltonian level-set iteration.
    Bisection,
    /// Log-spaced sweep with golden refinement.
    Grid,
}

/// Outcome of [`eta_of`]. `eta_star = None` means the function is not
/// hyper-positive; `Some(1.0)` is the infimum for `F ≡ I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaReport {
    pub eta_star: Option<f64>,
    /// `H∞` norm of the Cayley image, when it was computed.
    pub gamma: Option<f64>,
    pub witness: Witness,
    pub method: Method,
}

impl EtaReport {
    pub fn is_hyper_positive(&self) -> bool {
        self.eta_star.is_some()
    }

    /// `true` when `F ∈ HP_η` (nonstrict, up to `tol` on the `η` scale).
    pub fn admits(&self, eta: EtaParam, tol: f64) -> bool {
        match (self.eta_star, eta) {
            (None, _) => false,
            (Some(_), EtaParam::Infinity) => true,
            (Some(s), EtaParam::Finite(e)) => s <= e + tol,
        }
    }

    fn not_hp(witness: Witness, gamma: Option<f64>, method: Method) -> Self {
        Self {
            eta_star: None,
            gamma,
            witness,
            method,
        }
    }
}

/// Flags `p ⇐ sp ⇐ hp` together with the `η` data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub p: bool,
    pub sp: bool,
    pub hp: bool,
    pub eta_star: Option<f64>,
    pub witness: Witness,
    pub method: Method,
    /// Smallest eigenvalue of `F(iω) + F(iω)*` seen by the sweep.
    pub margin: f64,
    /// Poles on the imaginary axis were excluded from the sweep; residue
    /// conditions are not checked.
    pub boundary_poles: bool,
}

fn herm_part(f: &CMatrix) -> HermitianMatrix {
    HermitianMatrix::new(f + f.adjoint()).expect("square")
}

/// `ρ((F*F + I)(F* + F)^{-1})`, or `+∞` when `F + F*` is not positive
/// definite.
pub fn eta_pointwise(f: &CMatrix) -> f64 {
    let s = herm_part(f);
    let lmin = s.min_eigenvalue();
    if !(lmin > 1e-14 * s.max_eigenvalue().abs().max(1.0)) {
        return f64::INFINITY;
    }
    let m = f.nrows();
    let inv_half = match s.pd_power(-0.5) {
        Ok(x) => x,
        Err(_) => return f64::INFINITY,
    };
    let num = f.adjoint() * f + CMatrix::identity(m, m);
    let sym = HermitianMatrix::new(&inv_half * num * &inv_half).expect("square");
    sym.max_eigenvalue()
}

fn pole_is_stable(p: Complex64) -> bool {
    p.re < -1e-12 * p.norm().max(1.0)
}

fn pole_is_boundary(p: Complex64) -> bool {
    p.re.abs() <= 1e-9 * p.norm().max(1.0)
}

/// `η* = (1 + γ²)/(1 − γ²)`.
pub fn eta_from_gamma(gamma: f64) -> Option<f64> {
    if gamma < 1.0 {
        let g2 = gamma * gamma;
        Some((1.0 + g2) / (1.0 - g2))
    } else {
        None
    }
}

/// Sharpest `η` with `F ∈ HP_η`.
pub fn eta_of(f: &Realization, opts: &ClassifyOptions) -> Result<EtaReport> {
    let r = f.minimize(MINIMAL_TOL);
    let poles = r.poles()?;
    if let Some(p) = poles.iter().find(|p| !pole_is_stable(**p)) {
        return Ok(EtaReport::not_hp(Witness::pole(*p), None, Method::Bisection));
    }
    let dd = herm_part(r.d());
    if !dd.is_positive_definite(opts.tol.psd) {
        return Ok(EtaReport::not_hp(Witness::Infinity, None, Method::Bisection));
    }
    let g = match r.cayley() {
        Ok(g) => g,
        Err(Error::SingularIplusD) => return Ok(eta_by_grid(&r)),
        Err(e) => return Err(e),
    };
    if let Some(p) = g.poles()?.into_iter().find(|p| !pole_is_stable(*p)) {
        return Ok(EtaReport::not_hp(Witness::Point { re: p.re, im: p.im }, None, Method::Bisection));
    }
    let h: HinfNorm = hinf_norm(&g, opts.gamma_tol)?;
    let method = if h.hamiltonian { Method::Bisection } else { Method::Grid };
    let witness = Witness::from_omega(h.omega);
    Ok(match eta_from_gamma(h.gamma) {
        Some(eta) => EtaReport {
            eta_star: Some(eta),
            gamma: Some(h.gamma),
            witness,
            method,
        },
        None => EtaReport::not_hp(witness, Some(h.gamma), method),
    })
}

/// Direct sweep of the pointwise index over the boundary.
fn eta_by_grid(r: &Realization) -> EtaReport {
    let freqs = sweep_frequencies(!r.is_real(), &[]);
    let point = |w: f64| r.eval_freq(w).map(|v| eta_pointwise(&v)).unwrap_or(f64::INFINITY);
    let (w, v) = grid_max(point, &freqs);
    let at_inf = eta_pointwise(r.d());
    let (w, v) = if at_inf > v { (f64::INFINITY, at_inf) } else { (w, v) };
    let witness = Witness::from_omega(w);
    if v.is_finite() {
        EtaReport {
            eta_star: Some(v),
            gamma: None,
            witness,
            method: Method::Grid,
        }
    } else {
        EtaReport::not_hp(witness, None, Method::Grid)
    }
}

struct Positivity {
    ok: bool,
    min: f64,
    witness: Witness,
    boundary_poles: bool,
}

/// Pole location plus boundary sweep of `λ_min(F(iω) + F(iω)*)`, accepted
/// when the minimum stays above `−slack · scale`.
fn positivity(r: &Realization, slack: f64) -> Result<Positivity> {
    let poles = r.poles()?;
    if let Some(p) = poles.iter().find(|p| p.re > 0.0 && !pole_is_boundary(**p)) {
        return Ok(Positivity {
            ok: false,
            min: f64::NEG_INFINITY,
            witness: Witness::pole(*p),
            boundary_poles: false,
        });
    }
    let axis: Vec<f64> = poles.iter().filter(|p| pole_is_boundary(**p)).map(|p| p.im).collect();
    let symmetric = !r.is_real();
    let mut extra: Vec<f64> = Vec::new();
    for p in &poles {
        extra.push(p.norm());
        extra.push(p.im);
        if symmetric {
            extra.push(-p.norm());
        }
    }
    let freqs: Vec<f64> = sweep_frequencies(symmetric, &extra)
        .into_iter()
        .filter(|w| axis.iter().all(|a| (w - a).abs() > POLE_EXCLUSION))
        .collect();
    let mut scale = 1.0 + spectral_norm(r.d());
    let mut neg_min = |w: f64| -> f64 {
        if axis.iter().any(|a| (w - a).abs() <= POLE_EXCLUSION) {
            return f64::NEG_INFINITY;
        }
        match r.eval_freq(w) {
            Ok(v) => {
                scale = scale.max(1.0 + spectral_norm(&v));
                -herm_part(&v).min_eigenvalue()
            }
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let (w, v) = if freqs.is_empty() { (0.0, f64::NEG_INFINITY) } else { grid_max(&mut neg_min, &freqs) };
    let at_inf = herm_part(r.d()).min_eigenvalue();
    let (min, witness) = if at_inf < -v { (at_inf, Witness::Infinity) } else { (-v, Witness::from_omega(w)) };
    Ok(Positivity {
        ok: min >= -slack * scale,
        min,
        witness,
        boundary_poles: !axis.is_empty(),
    })
}

/// `true` when `F(s − ε)` is positive real for some `ε` on the ladder
/// `ε_max 2^{-j}`, `ε_max = ½ min |Re pole|`; without states SP ⇔ P.
pub fn is_strictly_positive_real(f: &Realization, opts: &ClassifyOptions) -> Result<bool> {
    let r = f.minimize(MINIMAL_TOL);
    if r.n() == 0 {
        return Ok(positivity(&r, opts.tol.psd)?.ok);
    }
    let poles = r.poles()?;
    if !poles.iter().all(|p| pole_is_stable(*p)) {
        return Ok(false);
    }
    if !positivity(&r, opts.tol.psd)?.ok {
        return Ok(false);
    }
    let eps_max = 0.5 * poles.iter().map(|p| p.re.abs()).fold(f64::INFINITY, f64::min);
    for j in 0..=SP_STEPS {
        let eps = eps_max * 2f64.powi(-j);
        // no slack: a P but not SP function turns negative by O(ε)
        if positivity(&r.shift(eps), 1e-14)?.ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// P / SP / HP classification with the sharpest `η`.
pub fn classify_prs(f: &Realization, opts: &ClassifyOptions) -> Result<ClassVerdict> {
    let r = f.minimize(MINIMAL_TOL);
    let pos = positivity(&r, opts.tol.psd)?;
    let eta = eta_of(&r, opts)?;
    let hp = eta.is_hyper_positive();
    let sp = hp || (pos.ok && is_strictly_positive_real(&r, opts)?);
    let p = sp || pos.ok;
    Ok(ClassVerdict {
        p,
        sp,
        hp,
        eta_star: eta.eta_star,
        witness: if hp { eta.witness } else { pos.witness },
        method: eta.method,
        margin: pos.min,
        boundary_poles: pos.boundary_poles,
    })
}

/// Result of [`hb_membership`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HbReport {
    pub member: bool,
    /// `sup_ω ‖G(iω)‖₂` (`+∞` for unstable `G`).
    pub sup_norm: f64,
    /// `√((η−1)/(η+1))`.
    pub threshold: f64,
    pub witness: Witness,
}

/// `G ∈ HB_η`: stable with `sup ‖G(iω)‖₂ ≤ √((η−1)/(η+1)) + tol`.
pub fn hb_membership(g: &Realization, eta: EtaParam, tol: f64) -> Result<HbReport> {
    let r = g.minimize(MINIMAL_TOL);
    let threshold = eta.contraction_radius();
    if let Some(p) = r.poles()?.into_iter().find(|p| !pole_is_stable(*p)) {
        return Ok(HbReport {
            member: false,
            sup_norm: f64::INFINITY,
            threshold,
            witness: Witness::pole(p),
        });
    }
    let h = hinf_norm(&r, 1e-10).unwrap_or_else(|_| grid_norm(&r));
    Ok(HbReport {
        member: h.gamma <= threshold + tol,
        sup_norm: h.gamma,
        threshold,
        witness: Witness::from_omega(h.omega),
    })
}

/// Result of [`composition_eta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositionReport {
    /// Sharpest `η` of `F(h(s))`, `None` when not hyper-positive.
    pub eta_star: Option<f64>,
    /// Sharpest `η` of `F` itself.
    pub outer_eta: Option<f64>,
    pub witness: Witness,
    /// `eta_star ≤ outer_eta` up to the sweep tolerance.
    pub dominated: bool,
}

/// `true` when `h` maps the open right half-plane into itself: proper `h`
/// must be SP; an improper `h = c s + h₀` needs `c > 0` and `h₀` positive
/// real.
fn inner_admissible(h: &SisoRational, opts: &ClassifyOptions) -> Result<bool> {
    if h.is_proper() {
        return is_strictly_positive_real(&h.to_realization()?, opts);
    }
    let (nd, dd) = (h.num().degree().unwrap_or(0), h.den().degree().unwrap_or(0));
    if nd != dd + 1 {
        return Ok(false);
    }
    let c = h.num().leading() / h.den().leading();
    if c <= 0.0 {
        return Ok(false);
    }
    let rest = h.sub(&SisoRational::identity().scale(c))?;
    Ok(classify_prs(&rest.to_realization()?, opts)?.p)
}

/// Sharpest `η` of the composition `F(h(s))`, by a boundary sweep of the
/// pointwise index.
pub fn composition_eta(f: &Realization, h: &SisoRational, opts: &ClassifyOptions) -> Result<CompositionReport> {
    if !inner_admissible(h, opts)? {
        return Err(Error::InnerNotSP);
    }
    let outer = eta_of(f, opts)?;
    let point = |w: f64| -> f64 {
        h.eval(Complex64::new(0.0, w))
            .and_then(|z| f.eval(z))
            .map(|v| eta_pointwise(&v))
            .unwrap_or(f64::INFINITY)
    };
    let freqs = sweep_frequencies(!f.is_real(), &[]);
    let (w, v) = grid_max(point, &freqs);
    let at_inf = match h.value_at_infinity() {
        Some(z) => f.eval(Complex64::new(z, 0.0)).map(|v| eta_pointwise(&v)).unwrap_or(f64::INFINITY),
        None => eta_pointwise(f.d()),
    };
    let (w, v) = if at_inf > v { (f64::INFINITY, at_inf) } else { (w, v) };
    let eta_star = v.is_finite().then_some(v);
    let dominated = match (eta_star, outer.eta_star) {
        (Some(a), Some(b)) => a <= b + 1e-6 * b,
        (None, _) => false,
        (Some(_), None) => true,
    };
    Ok(CompositionReport {
        eta_star,
        outer_eta: outer.eta_star,
        witness: Witness::from_omega(w),
        dominated,
    })
}
