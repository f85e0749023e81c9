//! Frequency grids and golden-section refinement shared by the boundary
//! sweeps.

/// Number of grid points of the fallback sweep.
pub const GRID_POINTS: usize = 4096;
/// Lower end of the log-spaced sweep.
pub const GRID_LO: f64 = 1e-6;
/// Upper end of the log-spaced sweep.
pub const GRID_HI: f64 = 1e6;

/// `count` log-spaced points in `[lo, hi]`.
pub fn log_grid(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Sorted sweep frequencies: `0`, the log grid and, when `symmetric`, the
/// mirrored negative grid. `∞` is handled separately by callers.
pub fn sweep_frequencies(symmetric: bool, extra: &[f64]) -> Vec<f64> {
    let grid = log_grid(GRID_POINTS, GRID_LO, GRID_HI);
    let mut out: Vec<f64> = vec![0.0];
    out.extend(grid.iter().copied());
    out.extend(extra.iter().filter(|w| w.is_finite()).map(|w| if symmetric { *w } else { w.abs() }));
    if symmetric {
        out.extend(grid.iter().map(|w| -w));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `true` when `(value, omega)` should replace `(best, best_omega)`: strictly
/// larger values win; equal values (to `1e-12` relative) prefer smaller `|ω|`
/// and then positive `ω`.
pub fn improves(value: f64, omega: f64, best: f64, best_omega: f64) -> bool {
    let tie = 1e-12 * best.abs().max(1e-300);
    if value > best + tie {
        return true;
    }
    if value < best - tie {
        return false;
    }
    let (a, b) = (omega.abs(), best_omega.abs());
    a < b || (a == b && omega > best_omega)
}

/// Golden-section maximization of `f` on `[lo, hi]`, stopping when the
/// bracket is below `rel_tol` relative to its location.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (hi - lo).abs() <= rel_tol * (lo.abs().max(hi.abs())).max(1e-300) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximizes `f` over the sorted grid `freqs`, then refines the best point
/// between its neighbours. Returns `(ω, f(ω))`.
pub fn grid_max<F: FnMut(f64) -> f64>(mut f: F, freqs: &[f64]) -> (f64, f64) {
    let values: Vec<f64> = freqs.iter().map(|&w| f(w)).collect();
    let mut best = 0;
    for i in 1..freqs.len() {
        if improves(values[i], freqs[i], values[best], freqs[best]) {
            best = i;
        }
    }
    let (mut w, mut v) = (freqs[best], values[best]);
    let lo = if best > 0 { freqs[best - 1] } else { freqs[best] };
    let hi = if best + 1 < freqs.len() { freqs[best + 1] } else { freqs[best] };
    if hi > lo {
        let (wr, vr) = golden_max(&mut f, lo, hi, 1e-10);
        if vr > v {
            w = wr;
            v = vr;
        }
    }
    (w, v)
}
