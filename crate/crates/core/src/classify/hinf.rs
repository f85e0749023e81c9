//! `H∞` norm of a stable realization by the Hamiltonian level-set
//! iteration, with a grid fallback.

use num_complex::Complex64;

use super::sweep::{golden_max, grid_max, improves, log_grid, sweep_frequencies};
use crate::error::{Error, Result};
use crate::matcore::{cplx, eigenvalues, solve_checked, spectral_norm, CMatrix};
use crate::rational::Realization;

/// Peak gain and the frequency attaining it (`±∞` when the sup is the
/// feedthrough limit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HinfNorm {
    pub gamma: f64,
    pub omega: f64,
    /// `true` when the Hamiltonian iteration produced the value.
    pub hamiltonian: bool,
}

fn sigma(r: &Realization, omega: f64) -> f64 {
    match r.eval_freq(omega) {
        Ok(g) => spectral_norm(&g),
        Err(_) => f64::INFINITY,
    }
}

/// Hamiltonian whose imaginary-axis eigenvalues `iω` are exactly the
/// frequencies with `γ` as a singular value of `G(iω)`.
pub fn hamiltonian(r: &Realization, gamma: f64) -> Option<CMatrix> {
    let (n, m) = (r.n(), r.m());
    let (a, b, c, d) = (r.a(), r.b(), r.c(), r.d());
    let rr = CMatrix::identity(m, m) * cplx(gamma * gamma) - d.adjoint() * d;
    let rinv = solve_checked(&rr, &CMatrix::identity(m, m), 1e-13)?;
    let h11 = a + b * &rinv * d.adjoint() * c;
    let h12 = b * &rinv * b.adjoint();
    let h21 = -(c.adjoint() * (CMatrix::identity(m, m) + d * &rinv * d.adjoint()) * c);
    let h22 = -h11.adjoint();
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&h11);
    h.view_mut((0, n), (n, n)).copy_from(&h12);
    h.view_mut((n, 0), (n, n)).copy_from(&h21);
    h.view_mut((n, n), (n, n)).copy_from(&h22);
    Some(h)
}

/// Frequencies `ω` with `iω` an eigenvalue of the Hamiltonian at level
/// `gamma`, sorted ascending.
fn crossings(r: &Realization, gamma: f64, symmetric: bool) -> Option<Vec<f64>> {
    let h = hamiltonian(r, gamma)?;
    let scale = h.iter().fold(0.0f64, |s, z| s.max(z.norm())).max(1.0);
    let eigs = eigenvalues(&h).ok()?;
    let mut ws: Vec<f64> = eigs
        .iter()
        .filter(|l: &&Complex64| l.re.abs() <= 1e-6 * scale)
        .map(|l| l.im)
        .filter(|w| symmetric || *w >= 0.0)
        .collect();
    ws.sort_by(f64::total_cmp);
    Some(ws)
}

/// `sup_ω ‖G(iω)‖₂` of a realization with `A` Hurwitz. The iteration
/// stops once a level `lb·(1 + 2 tol)` produces no frequency beating `lb`.
pub fn hinf_norm(r: &Realization, tol: f64) -> Result<HinfNorm> {
    let symmetric = !r.is_real();
    let d_norm = spectral_norm(r.d());
    if r.n() == 0 {
        return Ok(HinfNorm {
            gamma: d_norm,
            omega: 0.0,
            hamiltonian: true,
        });
    }
    let poles = r.poles()?;
    if let Some(p) = poles.iter().find(|p| p.re >= 0.0) {
        return Err(Error::UnstablePoles(*p));
    }

    // initial samples: 0, pole magnitudes and imaginary parts, a coarse grid
    let pmin = poles.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min).max(1e-12);
    let pmax = poles.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-12);
    let mut samples = vec![0.0];
    for p in &poles {
        samples.push(p.norm());
        samples.push(p.im);
        if symmetric {
            samples.push(-p.norm());
        }
    }
    for w in log_grid(64, pmin * 1e-3, pmax * 1e3) {
        samples.push(w);
        if symmetric {
            samples.push(-w);
        }
    }
    let samples: Vec<f64> = samples.into_iter().filter(|w| symmetric || *w >= 0.0).collect();

    let (mut lb, mut best_w) = (d_norm, f64::INFINITY);
    for &w in &samples {
        let s = sigma(r, w);
        if improves(s, w, lb, best_w) {
            lb = s;
            best_w = w;
        }
    }
    if lb == 0.0 {
        return Ok(grid_norm(r));
    }

    let mut bracket: Option<(f64, f64)> = None;
    let mut converged = false;
    for _ in 0..60 {
        let level = lb * (1.0 + 2.0 * tol);
        let Some(ws) = crossings(r, level, symmetric) else {
            break;
        };
        let mut improved = false;
        let mut probes: Vec<(f64, (f64, f64))> = ws.iter().map(|&w| (w, (w, w))).collect();
        for pair in ws.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            probes.push((mid, (lo, hi)));
        }
        if !symmetric && !ws.is_empty() {
            probes.push((0.0, (0.0, ws[0])));
        }
        for (w, br) in probes {
            let s = sigma(r, w);
            if improves(s, w, lb, best_w) {
                if s > lb * (1.0 + tol) {
                    improved = true;
                }
                lb = s;
                best_w = w;
                bracket = Some(br);
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }
    if !converged {
        return Ok(grid_norm(r));
    }

    if best_w.is_finite() {
        let (lo, hi) = match bracket {
            Some((lo, hi)) if hi > lo && lo <= best_w && best_w <= hi => (lo, hi),
            _ => {
                let span = 0.05 * best_w.abs().max(pmin);
                let lo = if symmetric { best_w - span } else { (best_w - span).max(0.0) };
                (lo, best_w + span)
            }
        };
        let (w, s) = golden_max(|w| sigma(r, w), lo, hi, 1e-10);
        if improves(s, w, lb, best_w) {
            lb = s;
            best_w = w;
        }
    }
    Ok(HinfNorm {
        gamma: lb,
        omega: best_w,
        hamiltonian: true,
    })
}

/// Log-grid sweep with golden refinement, including `ω = 0` and `∞`.
pub fn grid_norm(r: &Realization) -> HinfNorm {
    let symmetric = !r.is_real();
    let freqs = sweep_frequencies(symmetric, &[]);
    let (w, s) = grid_max(|w| sigma(r, w), &freqs);
    let d_norm = spectral_norm(r.d());
    if improves(d_norm, f64::INFINITY, s, w) {
        return HinfNorm {
            gamma: d_norm,
            omega: f64::INFINITY,
            hamiltonian: false,
        };
    }
    HinfNorm {
        gamma: s,
        omega: w,
        hamiltonian: false,
    }
}
