//! Stabilizing solution of `F*X + XF + XGX + Q = 0` from the ordered Schur
//! form of the Hamiltonian `[[F, G], [−Q, −F*]]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{solve_checked, CMatrix, ComplexSchur};

/// Eigenvalues with `|Re λ|` below this fraction of the Hamiltonian scale
/// count as imaginary-axis eigenvalues.
const AXIS_TOL: f64 = 1e-13;

pub fn hamiltonian(f: &CMatrix, g: &CMatrix, q: &CMatrix) -> CMatrix {
    let n = f.nrows();
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(f);
    h.view_mut((0, n), (n, n)).copy_from(g);
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-f.adjoint()));
    h
}

/// Hermitian `X` with `F + GX` Hurwitz. Fails with
/// `HamiltonianImaginaryAxisEigenvalues(0)` when the stable invariant
/// subspace does not exist; callers attach the level they were solving at.
pub fn care_stabilizing(f: &CMatrix, g: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let n = f.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let h = hamiltonian(f, g, q);
    let scale = h.iter().fold(0.0f64, |s, z| s.max(z.norm())).max(1e-300);
    let mut schur = ComplexSchur::new(&h)?;
    if schur.eigenvalues().iter().any(|l| l.re.abs() <= AXIS_TOL * scale) {
        return Err(Error::HamiltonianImaginaryAxisEigenvalues(0.0));
    }
    let k = schur.reorder(|l| l.re < 0.0);
    if k != n {
        return Err(Error::HamiltonianImaginaryAxisEigenvalues(0.0));
    }
    let u1 = schur.q.view((0, 0), (n, n)).into_owned();
    let u2 = schur.q.view((n, 0), (n, n)).into_owned();
    // X U1 = U2, solved as U1* X* = U2*
    let xt = solve_checked(&u1.adjoint(), &u2.adjoint(), 1e-12)
        .ok_or_else(|| Error::Numeric("stable invariant subspace is not a graph".into()))?;
    let x = xt.adjoint();
    let x = refine(f, g, q, hermitian_part(&x));
    let res = riccati_residual(f, g, q, &x);
    let xs = x.norm().max(q.norm()).max(1.0);
    if res.norm() > 1e-6 * xs * scale.max(1.0) {
        return Err(Error::Numeric(format!("Riccati residual {:e} too large", res.norm())));
    }
    Ok(x)
}

fn hermitian_part(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()) * Complex64::new(0.5, 0.0)
}

fn riccati_residual(f: &CMatrix, g: &CMatrix, q: &CMatrix, x: &CMatrix) -> CMatrix {
    f.adjoint() * x + x * f + x * g * x + q
}

/// Newton steps on the Riccati equation, kept while the residual shrinks.
fn refine(f: &CMatrix, g: &CMatrix, q: &CMatrix, mut x: CMatrix) -> CMatrix {
    let mut res = riccati_residual(f, g, q, &x);
    for _ in 0..4 {
        let closed = f + g * &x;
        let Some(dx) = lyapunov(&closed, &(-&res)) else {
            break;
        };
        let next = hermitian_part(&(&x + dx));
        let next_res = riccati_residual(f, g, q, &next);
        if !(next_res.norm() < res.norm()) {
            break;
        }
        x = next;
        res = next_res;
    }
    x
}

/// `Y` with `A*Y + YA = C` by Bartels–Stewart on the Schur form of `A`.
pub(crate) fn lyapunov(a: &CMatrix, c: &CMatrix) -> Option<CMatrix> {
    let n = a.nrows();
    let schur = ComplexSchur::new(a).ok()?;
    let (u, t) = (&schur.q, &schur.t);
    // T*Z + ZT = U*CU, column by column
    let rhs = u.adjoint() * c * u;
    let mut z = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut col = rhs.column(j).into_owned();
        for k in 0..j {
            let tkj = t[(k, j)];
            for i in 0..n {
                col[i] -= z[(i, k)] * tkj;
            }
        }
        // (T* + t_jj) is lower triangular
        for i in 0..n {
            let mut v = col[i];
            for k in 0..i {
                v -= t[(k, i)].conj() * z[(k, j)];
            }
            let piv = t[(i, i)].conj() + t[(j, j)];
            if piv.norm() == 0.0 {
                return None;
            }
            z[(i, j)] = v / piv;
        }
    }
    let y = u * z * u.adjoint();
    y.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::real_matrix;

    #[test]
    fn scalar_equation() {
        // −2x + x² + 0.75 = 0 with f = −1, g = 1, q = 0.75: roots 0.5, 1.5;
        // stabilizing root has f + g x < 0, i.e. x = 0.5
        let x = care_stabilizing(&real_matrix(1, 1, &[-1.0]), &real_matrix(1, 1, &[1.0]), &real_matrix(1, 1, &[0.75])).unwrap();
        assert!((x[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_limit() {
        // g = 0 reduces to the Lyapunov equation F*X + XF + Q = 0
        let f = real_matrix(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let q = real_matrix(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let x = care_stabilizing(&f, &CMatrix::zeros(2, 2), &q).unwrap();
        let res = f.adjoint() * &x + &x * &f + &q;
        assert!(res.norm() < 1e-10);
    }

    #[test]
    fn lyapunov_solve() {
        let a = CMatrix::from_fn(3, 3, |i, j| Complex64::new(if i == j { -2.0 } else { 0.0 } + 0.3 * (i as f64 - j as f64), 0.1 * (i + 2 * j) as f64));
        let c = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i * j) as f64 + 1.0, i as f64 - j as f64));
        let y = lyapunov(&a, &c).unwrap();
        assert!((a.adjoint() * &y + &y * &a - &c).norm() < 1e-12);
    }

    #[test]
    fn no_stabilizing_solution() {
        // −2x + x² + 1 = 0 has the double root 1 and f + g x = 0
        let err = care_stabilizing(&real_matrix(1, 1, &[-1.0]), &real_matrix(1, 1, &[1.0]), &real_matrix(1, 1, &[1.0]));
        assert!(matches!(err, Err(Error::HamiltonianImaginaryAxisEigenvalues(_))));
    }
}
