//! Absolute stability of Lurie loops by the circle criterion, fixed-step
//! simulation of sector-bounded feedback, and the decay bound of difference
//! inclusions with Stein-set coefficients.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::classify::{is_strictly_positive_real, ClassifyOptions};
use crate::error::{Error, Result};
use crate::matcore::{cplx, eigenvalues, real_ginibre, real_matrix, CMatrix, HermitianMatrix};
use crate::rational::{Realization, SisoRational};
use crate::sets::{is_stein_member_closure, random_stein_member, EtaParam, SteinSetSpec};

/// Norm beyond which a trajectory is flagged as divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Sector `(K·y − ψ)(ψ − k·y) ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sector {
    pub k: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
}

impl Sector {
    pub fn new(k: f64, big_k: f64) -> Result<Self> {
        if !(k.is_finite() && big_k.is_finite()) || big_k < k {
            return Err(Error::InvalidSector { k, big_k });
        }
        Ok(Self { k, big_k })
    }

    /// `(K y − ψ)(ψ − k y)`, nonnegative inside the sector.
    pub fn slack(&self, y: f64, psi: f64) -> f64 {
        (self.big_k * y - psi) * (psi - self.k * y)
    }

    pub fn contains(&self, y: f64, psi: f64, tol: f64) -> bool {
        self.slack(y, psi) >= -tol * (1.0 + y * y * self.big_k.abs().max(self.k.abs()).powi(2))
    }

    pub fn is_linear(&self) -> bool {
        self.k == self.big_k
    }
}

/// Built-in sector nonlinearities, parametrized relative to `[k, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `ψ = c·y`.
    Linear { gain: f64 },
    /// `ψ = k y + (K − k) clamp(y, ±level)`.
    Saturation { level: f64 },
    /// `ψ = k y + (K − k) sign(y) max(|y| − width, 0)`.
    Deadzone { width: f64 },
    /// `ψ = k y + (K − k) scale tanh(y/scale)`.
    Tanh { scale: f64 },
    /// `ψ = (k + (K − k)(1 + sin ωt)/2) y`.
    TimeVarying { omega: f64 },
}

impl Nonlinearity {
    pub fn eval(&self, sector: &Sector, t: f64, y: f64) -> f64 {
        let (k, big_k) = (sector.k, sector.big_k);
        match *self {
            Nonlinearity::Linear { gain } => gain * y,
            Nonlinearity::Saturation { level } => k * y + (big_k - k) * y.clamp(-level, level),
            Nonlinearity::Deadzone { width } => k * y + (big_k - k) * y.signum() * (y.abs() - width).max(0.0),
            Nonlinearity::Tanh { scale } => k * y + (big_k - k) * scale * (y / scale).tanh(),
            Nonlinearity::TimeVarying { omega } => (k + (big_k - k) * 0.5 * (1.0 + (omega * t).sin())) * y,
        }
    }

    fn check_parameters(&self, sector: &Sector) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        match *self {
            Nonlinearity::Linear { gain } if !(sector.k <= gain && gain <= sector.big_k) => bad("linear gain outside the sector"),
            Nonlinearity::Saturation { level } if !(level > 0.0) => bad("saturation level must be positive"),
            Nonlinearity::Deadzone { width } if !(width >= 0.0) => bad("deadzone width must be nonnegative"),
            Nonlinearity::Tanh { scale } if !(scale > 0.0) => bad("tanh scale must be positive"),
            _ => Ok(()),
        }
    }
}

/// Plant `h(s)` in negative feedback with `ψ(t, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LurieLoop {
    pub plant: SisoRational,
    pub sector: Sector,
    pub nonlinearity: Nonlinearity,
}

impl LurieLoop {
    /// Validates the plant (proper), the nonlinearity parameters, and the
    /// sector bound on a fixed sample of `(t, y)`.
    pub fn new(plant: SisoRational, sector: Sector, nonlinearity: Nonlinearity) -> Result<Self> {
        if !plant.is_proper() {
            return Err(Error::ImproperFunction {
                num: plant.num().degree().unwrap_or(0),
                den: plant.den().degree().unwrap_or(0),
            });
        }
        nonlinearity.check_parameters(&sector)?;
        for i in 0..512 {
            let y = (i as f64 - 255.5) * 0.37;
            let t = i as f64 * 0.113;
            if !sector.contains(y, nonlinearity.eval(&sector, t, y), 1e-12) {
                return Err(Error::InvalidParameter(format!("nonlinearity leaves the sector at y = {y}")));
            }
        }
        Ok(Self {
            plant,
            sector,
            nonlinearity,
        })
    }
}

/// `f(s) = (1 + Ks)/(1 + ks)`.
pub fn circle_transform(sector: &Sector) -> SisoRational {
    SisoRational::from_coeffs(&[1.0, sector.big_k], &[1.0, sector.k]).expect("nonzero denominator")
}

/// Degree-one representative `(η − √(η²−1)) + 2a√(η²−1)/(s + a)` with
/// `η = ½(√(K/k) + √(k/K))` and `a = 1/K`.
pub fn circle_transform_eta(sector: &Sector) -> Result<(SisoRational, EtaParam, f64)> {
    if !(sector.k > 0.0) {
        return Err(Error::NonpositiveSector {
            k: sector.k,
            big_k: sector.big_k,
        });
    }
    let beta = (sector.big_k / sector.k).sqrt();
    let eta = EtaParam::finite(0.5 * (beta + 1.0 / beta))?;
    let a = 1.0 / sector.big_k;
    Ok((degree_one_representative(eta.value(), a), eta, a))
}

/// `(η − √(η²−1)) + 2a√(η²−1)/(s + a)`.
pub fn degree_one_representative(eta: f64, a: f64) -> SisoRational {
    let r = (eta * eta - 1.0).sqrt();
    SisoRational::degree_one(eta - r, 2.0 * a * r, a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionRoute {
    /// `(1 + Kh)/(1 + kh) ∈ SP`.
    Classical,
    /// Degree-one `HP_η` representative composed with `h`, in SP.
    Hyperpositive,
    /// `k = K`: eigenvalues of the closed loop.
    LinearTimeInvariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub criterion_holds: bool,
    pub route: CriterionRoute,
    /// Rightmost closed-loop pole at gain `k`.
    pub abscissa_at_k: f64,
}

/// Closed loop `A − c B C/(1 + cD)` of a SISO realization at gain `c`.
pub fn closed_loop_matrix(r: &Realization, c: f64) -> Result<DMatrix<f64>> {
    let (a, b, cc, d) = real_blocks(r);
    let den = 1.0 + c * d;
    if den.abs() <= 1e-14 {
        return Err(Error::IllPosedLoop);
    }
    Ok(&a - &b * cc.transpose() * (c / den))
}

fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let m = real_matrix(a.nrows(), a.ncols(), a.transpose().as_slice());
    Ok(eigenvalues(&m)?.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
}

fn real_blocks(r: &Realization) -> (DMatrix<f64>, DVector<f64>, DVector<f64>, f64) {
    let re = |m: &CMatrix| m.map(|z| z.re);
    let a = re(r.a());
    let b = DVector::from_iterator(r.n(), r.b().iter().map(|z| z.re));
    let c = DVector::from_iterator(r.n(), r.c().iter().map(|z| z.re));
    (a, b, c, r.d()[(0, 0)].re)
}

/// Route I of the circle criterion (or the LTI test when `k = K`).
pub fn absolute_stability_check(lp: &LurieLoop, opts: &ClassifyOptions) -> Result<StabilityReport> {
    criterion(&lp.plant, &lp.sector, CriterionRoute::Classical, opts)
}

/// Evaluates the criterion along a chosen route.
pub fn criterion(plant: &SisoRational, sector: &Sector, route: CriterionRoute, opts: &ClassifyOptions) -> Result<StabilityReport> {
    let r = plant.to_realization()?;
    let abscissa_at_k = spectral_abscissa(&closed_loop_matrix(&r, sector.k)?)?;
    if sector.is_linear() {
        return Ok(StabilityReport {
            criterion_holds: abscissa_at_k < 0.0,
            route: CriterionRoute::LinearTimeInvariant,
            abscissa_at_k,
        });
    }
    let f = match route {
        CriterionRoute::Hyperpositive => circle_transform_eta(sector)?.0,
        _ => circle_transform(sector),
    };
    let composed = f.compose(plant)?;
    let holds = composed.is_proper() && is_strictly_positive_real(&composed.to_realization()?, opts)?;
    Ok(StabilityReport {
        criterion_holds: holds,
        route,
        abscissa_at_k,
    })
}

/// Sampled trajectory of a Lurie loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub psi: Vec<f64>,
    pub sup_norm: f64,
    pub final_norm: f64,
    /// `−d ln‖x‖/dt` fitted over the second half of the horizon.
    pub decay_rate: f64,
    pub diverged: bool,
    pub dt: f64,
}

impl Trajectory {
    /// CSV with header `t,x_1..x_n,y,psi`.
    pub fn to_csv(&self) -> String {
        let n = self.x.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x_{i}");
        }
        out.push_str(",y,psi\n");
        for i in 0..self.t.len() {
            let _ = write!(out, "{}", self.t[i]);
            for v in &self.x[i] {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{},{}", self.y[i], self.psi[i]);
        }
        out
    }
}

struct LoopModel {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: f64,
    sector: Sector,
    psi: Nonlinearity,
}

impl LoopModel {
    /// Solves `y = Cx − D ψ(t, y)` inside the bracket spanned by the linear
    /// gains `k` and `K`; returns `(y, ψ)`.
    fn output(&self, t: f64, x: &DVector<f64>) -> Result<(f64, f64)> {
        let cx = self.c.dot(x);
        if self.d == 0.0 {
            return Ok((cx, self.psi.eval(&self.sector, t, cx)));
        }
        let (dk, dk_big) = (1.0 + self.sector.k * self.d, 1.0 + self.sector.big_k * self.d);
        if dk <= 0.0 || dk_big <= 0.0 {
            return Err(Error::IllPosedLoop);
        }
        let g = |y: f64| y + self.d * self.psi.eval(&self.sector, t, y) - cx;
        let (mut lo, mut hi) = (cx / dk, cx / dk_big);
        let (mut glo, mut ghi) = (g(lo), g(hi));
        if glo == 0.0 {
            return Ok((lo, self.psi.eval(&self.sector, t, lo)));
        }
        if ghi == 0.0 || lo == hi {
            return Ok((hi, self.psi.eval(&self.sector, t, hi)));
        }
        if glo.signum() == ghi.signum() {
            // no sign change: an endpoint is already a root up to rounding
            let y = if glo.abs() < ghi.abs() { lo } else { hi };
            return Ok((y, self.psi.eval(&self.sector, t, y)));
        }
        // Illinois variant of regula falsi
        let mut side = 0;
        let mut y = hi;
        for _ in 0..200 {
            y = (lo * ghi - hi * glo) / (ghi - glo);
            if !(y > lo.min(hi) && y < lo.max(hi)) {
                // rounding left the secant step outside the bracket
                y = 0.5 * (lo + hi);
            }
            let gy = g(y);
            if gy == 0.0 || (hi - lo).abs() <= 4.0 * f64::EPSILON * (1.0 + y.abs()) {
                break;
            }
            if gy.signum() == ghi.signum() {
                hi = y;
                ghi = gy;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            } else {
                lo = y;
                glo = gy;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            }
        }
        Ok((y, self.psi.eval(&self.sector, t, y)))
    }

    fn rhs(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (_, psi) = self.output(t, x)?;
        Ok(&self.a * x - &self.b * psi)
    }
}

/// Default step `1e-3 / max|λ|` over the plant poles and the linear closed
/// loops at gains `k` and `K`.
pub fn default_step(lp: &LurieLoop) -> Result<f64> {
    let r = lp.plant.to_realization()?;
    let mut fastest: f64 = 0.0;
    let mut mats = vec![real_blocks(&r).0];
    for c in [lp.sector.k, lp.sector.big_k] {
        if let Ok(m) = closed_loop_matrix(&r, c) {
            mats.push(m);
        }
    }
    for m in mats {
        if m.nrows() == 0 {
            continue;
        }
        let cm = real_matrix(m.nrows(), m.ncols(), m.transpose().as_slice());
        for l in eigenvalues(&cm)? {
            fastest = fastest.max(l.norm());
        }
    }
    Ok(if fastest > 0.0 { 1e-3 / fastest } else { 1e-3 })
}

/// Slowest decay time constant `1/min(−Re λ)` over the plant and the
/// linear closed loops at `k` and `K`; `None` when one of them is not
/// asymptotically stable.
pub fn time_constant(lp: &LurieLoop) -> Result<Option<f64>> {
    let r = lp.plant.to_realization()?;
    let mut slowest = f64::INFINITY;
    let mut mats = vec![real_blocks(&r).0];
    for c in [lp.sector.k, lp.sector.big_k] {
        mats.push(closed_loop_matrix(&r, c)?);
    }
    for m in mats {
        if m.nrows() == 0 {
            continue;
        }
        let ab = spectral_abscissa(&m)?;
        if ab >= 0.0 {
            return Ok(None);
        }
        slowest = slowest.min(-ab);
    }
    Ok(Some(if slowest.is_finite() { 1.0 / slowest } else { 0.0 }))
}

/// Fixed-step RK4 integration of `ẋ = Ax − Bψ(t, y)`, `y = Cx − Dψ(t, y)`
/// up to `t_end`, storing at most about `max_rows` samples.
pub fn simulate_lurie(lp: &LurieLoop, x0: &[f64], t_end: f64, dt: Option<f64>, max_rows: usize) -> Result<Trajectory> {
    let r = lp.plant.to_realization()?;
    if x0.len() != r.n() {
        return Err(Error::DimensionMismatch {
            context: "x0",
            expected: r.n(),
            found: x0.len(),
        });
    }
    let dt = match dt {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::InvalidParameter(format!("dt must be positive, got {h}"))),
        None => default_step(lp)?,
    };
    let (a, b, c, d) = real_blocks(&r);
    let model = LoopModel {
        a,
        b,
        c,
        d,
        sector: lp.sector,
        psi: lp.nonlinearity,
    };
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    let stride = (steps / max_rows.max(1)).max(1);
    let mut x = DVector::from_column_slice(x0);
    let mut traj = Trajectory {
        t: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
        psi: Vec::new(),
        sup_norm: x.norm(),
        final_norm: x.norm(),
        decay_rate: 0.0,
        diverged: false,
        dt,
    };
    let record = |traj: &mut Trajectory, t: f64, x: &DVector<f64>| -> Result<()> {
        let (y, psi) = model.output(t, x)?;
        traj.t.push(t);
        traj.x.push(x.iter().copied().collect());
        traj.y.push(y);
        traj.psi.push(psi);
        Ok(())
    };
    record(&mut traj, 0.0, &x)?;
    let half = steps / 2;
    let mut half_norm = x.norm();
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = model.rhs(t, &x)?;
        let k2 = model.rhs(t + 0.5 * dt, &(&x + &k1 * (0.5 * dt)))?;
        let k3 = model.rhs(t + 0.5 * dt, &(&x + &k2 * (0.5 * dt)))?;
        let k4 = model.rhs(t + dt, &(&x + &k3 * dt))?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let norm = x.norm();
        traj.sup_norm = traj.sup_norm.max(norm);
        if i + 1 == half {
            half_norm = norm;
        }
        if !(norm <= DIVERGENCE_NORM) {
            traj.diverged = true;
            record(&mut traj, t + dt, &x)?;
            break;
        }
        if (i + 1) % stride == 0 || i + 1 == steps {
            record(&mut traj, t + dt, &x)?;
        }
    }
    traj.final_norm = x.norm();
    let span = (steps - half) as f64 * dt;
    traj.decay_rate = if traj.final_norm == 0.0 || half_norm == 0.0 {
        f64::INFINITY
    } else if span > 0.0 {
        -(traj.final_norm.ln() - half_norm.ln()) / span
    } else {
        0.0
    };
    Ok(traj)
}

/// `x(k+1) = A(k) x(k)` with every `A(k)` drawn from `Stein_{I_n}(η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceInclusion {
    pub eta: EtaParam,
    pub n: usize,
    /// Relative distance of the samples from the boundary of the set.
    pub margin: f64,
}

impl DifferenceInclusion {
    pub fn new(eta: EtaParam, n: usize) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::InvalidEta(f64::INFINITY));
        }
        Ok(Self { eta, n, margin: 1e-3 })
    }

    /// Alternates Ginibre-normalized members with scaled random orthogonal
    /// matrices, which sit at the largest admissible norm.
    pub fn sample<R: Rng + ?Sized>(&self, step: usize, rng: &mut R) -> Result<CMatrix> {
        let spec = SteinSetSpec::new(HermitianMatrix::identity(self.n), self.eta);
        if step % 2 == 0 {
            random_stein_member(&spec, true, self.margin, rng)
        } else {
            let g = real_ginibre(self.n, self.n, rng);
            let q = g.qr().q();
            Ok(q * cplx(self.eta.contraction_radius() * (1.0 - self.margin)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionTrajectory {
    pub norms: Vec<f64>,
    /// Steps with `‖x(k)‖ > ‖x(0)‖ γ^k`.
    pub violations: usize,
    /// Emitted matrices that failed the membership check.
    pub nonmembers: usize,
    /// `max_k ‖x(k)‖ / (‖x(0)‖ γ^k)`.
    pub worst_ratio: f64,
}

/// Iterates the inclusion for `steps` steps and checks
/// `‖x(k)‖ ≤ ‖x(0)‖ ((η−1)/(η+1))^{k/2}` at every step.
pub fn simulate_difference_inclusion<R: Rng + ?Sized>(
    di: &DifferenceInclusion,
    x0: &[f64],
    steps: usize,
    rng: &mut R,
) -> Result<InclusionTrajectory> {
    if x0.len() != di.n {
        return Err(Error::DimensionMismatch {
            context: "x0",
            expected: di.n,
            found: x0.len(),
        });
    }
    let gamma = di.eta.contraction_radius();
    let spec = SteinSetSpec::new(HermitianMatrix::identity(di.n), di.eta);
    let mut x = CMatrix::from_fn(di.n, 1, |i, _| cplx(x0[i]));
    let n0 = x.norm();
    let mut out = InclusionTrajectory {
        norms: vec![n0],
        violations: 0,
        nonmembers: 0,
        worst_ratio: if n0 > 0.0 { 1.0 } else { 0.0 },
    };
    for k in 1..=steps {
        let a = di.sample(k, rng)?;
        if !is_stein_member_closure(&spec, &a, 0.0)? {
            out.nonmembers += 1;
        }
        x = a * x;
        let norm = x.norm();
        let bound = n0 * gamma.powi(k as i32);
        if norm > bound * (1.0 + 1e-12) {
            out.violations += 1;
        }
        if bound > 0.0 {
            out.worst_ratio = out.worst_ratio.max(norm / bound);
        }
        out.norms.push(norm);
    }
    Ok(out)
}
