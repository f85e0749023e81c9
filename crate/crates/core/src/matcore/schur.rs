//! Complex Schur decomposition by Hessenberg reduction followed by the
//! shifted QR iteration, plus reordering of the triangular factor.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// `M = Q T Q*` with `Q` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub q: CMatrix,
    pub t: CMatrix,
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(f, g)` onto `(r, 0)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let fnorm = f.norm();
    if fnorm == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let r = fnorm.hypot(gn);
    let phase = f / fnorm;
    (fnorm / r, phase * g.conj() / r)
}

fn rotate_rows(a: &mut CMatrix, i: usize, j: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for col in cols {
        let x = a[(i, col)];
        let y = a[(j, col)];
        a[(i, col)] = x * c + s * y;
        a[(j, col)] = y * c - s.conj() * x;
    }
}

fn rotate_cols(a: &mut CMatrix, i: usize, j: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for row in rows {
        let x = a[(row, i)];
        let y = a[(row, j)];
        a[(row, i)] = x * c + s.conj() * y;
        a[(row, j)] = y * c - s * x;
    }
}

fn hessenberg(a: &mut CMatrix, q: &mut CMatrix) {
    let n = a.nrows();
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<Complex64> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        for j in 0..n {
            let s: Complex64 = (0..len).map(|i| v[i].conj() * a[(k + 1 + i, j)]).sum();
            for i in 0..len {
                a[(k + 1 + i, j)] -= v[i] * s * 2.0;
            }
        }
        for mat in [&mut *a, &mut *q] {
            for i in 0..n {
                let s: Complex64 = (0..len).map(|l| mat[(i, k + 1 + l)] * v[l]).sum();
                for j in 0..len {
                    mat[(i, k + 1 + j)] -= s * v[j].conj() * 2.0;
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

impl ComplexSchur {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let mut t = m.clone();
        let mut q = CMatrix::identity(n, n);
        if n <= 1 {
            return Ok(Self { q, t });
        }
        if t.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("non-finite matrix entry".into()));
        }
        hessenberg(&mut t, &mut q);

        let anorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let eps = f64::EPSILON;
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut total = 0usize;
        let max_total = 100 * n.max(10);
        while hi > 0 {
            let mut l = hi;
            while l > 0 {
                let mut scale = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
                if scale == 0.0 {
                    scale = anorm;
                }
                if t[(l, l - 1)].norm() <= eps * scale || t[(l, l - 1)].norm() < f64::MIN_POSITIVE {
                    t[(l, l - 1)] = Complex64::new(0.0, 0.0);
                    break;
                }
                l -= 1;
            }
            if l == hi {
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > max_total {
                return Err(Error::Numeric("QR iteration did not converge".into()));
            }
            let shift = if iter % 10 == 0 {
                t[(hi, hi)] + Complex64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
            } else {
                wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
            };
            let mut x = t[(l, l)] - shift;
            let mut y = t[(l + 1, l)];
            for k in l..hi {
                let (c, s) = givens(x, y);
                let col_start = if k > l { k - 1 } else { l };
                rotate_rows(&mut t, k, k + 1, c, s, col_start..n);
                if k > l {
                    t[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
                }
                let row_end = (k + 2).min(hi);
                rotate_cols(&mut t, k, k + 1, c, s, 0..row_end + 1);
                rotate_cols(&mut q, k, k + 1, c, s, 0..n);
                if k + 1 < hi {
                    x = t[(k + 1, k)];
                    y = t[(k + 2, k)];
                }
            }
        }
        for j in 0..n {
            for i in j + 1..n {
                t[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { q, t })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    fn swap(&mut self, k: usize) {
        let n = self.t.nrows();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        rotate_rows(&mut self.t, k, k + 1, c, s, k..n);
        rotate_cols(&mut self.t, k, k + 1, c, s, 0..k + 2);
        rotate_cols(&mut self.q, k, k + 1, c, s, 0..n);
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
        self.t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    }

    /// Moves every eigenvalue accepted by `select` to the leading diagonal
    /// positions, preserving their relative order. Returns how many were
    /// selected; the first that many columns of `q` then span the
    /// corresponding invariant subspace.
    pub fn reorder<F: Fn(Complex64) -> bool>(&mut self, select: F) -> usize {
        let n = self.t.nrows();
        let mut count = 0;
        for i in 0..n {
            if select(self.t[(i, i)]) {
                let mut k = i;
                while k > count {
                    self.swap(k - 1);
                    k -= 1;
                }
                count += 1;
            }
        }
        count
    }
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(ComplexSchur::new(m)?.eigenvalues())
}
