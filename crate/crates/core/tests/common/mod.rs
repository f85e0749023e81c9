//! Random generators and independent oracles shared by the integration
//! tests.
#![allow(dead_code)]

use hyperreal::classify::hinf::hinf_norm;
use hyperreal::matcore::{eigenvalues, ginibre, real_ginibre, spectral_norm, CMatrix};
use hyperreal::rational::Realization;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(rows: usize, cols: usize, real: bool, rng: &mut R) -> CMatrix {
    if real {
        real_ginibre(rows, cols, rng)
    } else {
        ginibre(rows, cols, rng)
    }
}

/// Random realization with every pole at real part ≤ −0.3.
pub fn random_stable<R: Rng>(n: usize, m: usize, real: bool, rng: &mut R) -> Realization {
    let mut a = gaussian(n, n, real, rng);
    if n > 0 {
        let abscissa = eigenvalues(&a).unwrap().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let shift = abscissa + rng.random_range(0.3..2.0);
        for i in 0..n {
            a[(i, i)] -= Complex64::new(shift, 0.0);
        }
    }
    let b = gaussian(n, m, real, rng);
    let c = gaussian(m, n, real, rng);
    let d = gaussian(m, m, real, rng) * Complex64::new(0.5, 0.0);
    Realization::new(a, b, c, d).unwrap()
}

/// Stable `G` rescaled so that `sup_ω ‖G(iω)‖₂ = rho`.
pub fn scaled_contraction<R: Rng>(n: usize, m: usize, rho: f64, real: bool, rng: &mut R) -> Realization {
    let g = random_stable(n, m, real, rng);
    let gamma = hinf_norm(&g, 1e-12).unwrap().gamma;
    let k = Complex64::new(rho / gamma, 0.0);
    Realization::new(g.a().clone(), g.b().clone(), g.c() * k, g.d() * k).unwrap()
}

/// Dense sweep `max ‖G(iω)‖₂` over `count` log-spaced frequencies in
/// `[1e-4, 1e4]` (both signs for complex data), plus `0` and `∞`.
pub fn sampled_peak(g: &Realization, count: usize) -> f64 {
    let mut best = spectral_norm(g.d());
    let mut eval = |w: f64| {
        if let Ok(v) = g.eval(Complex64::new(0.0, w)) {
            best = best.max(spectral_norm(&v));
        }
    };
    eval(0.0);
    for i in 0..count {
        let w = 10f64.powf(-4.0 + 8.0 * i as f64 / (count - 1) as f64);
        eval(w);
        eval(-w);
    }
    best
}

/// `(1 − M)(1 + M)^{-1}` computed independently with an explicit inverse.
pub fn cayley_oracle(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let id = CMatrix::identity(n, n);
    (&id - m) * (&id + m).try_inverse().unwrap()
}

/// Maximum entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |s, z| s.max(z.norm()))
}

/// Random point of the open right half-plane away from the axis.
pub fn rhp_point<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(0.05..3.0), rng.random_range(-5.0..5.0))
}
