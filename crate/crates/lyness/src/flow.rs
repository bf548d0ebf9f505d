//! The associated vector field, adaptive Runge–Kutta integration with dense
//! output, Poincaré-section event detection, orbit periods and flight times,
//! and the resulting rotation numbers ρ = τ/T.
//!
//! The vector field commutes with the map along the shared invariant circles
//! (Lie symmetry), so the time the flow needs to reach the image point,
//! divided by the full orbit period, is the rotation number of the map on
//! that circle.

use crate::error::{Error, Result};
use crate::map::{self, Params, Point3};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// The associated vector field; vanishes exactly on the two-periodic curve.
pub fn vector_field(p: &Point3, params: &Params) -> Vector3<f64> {
    let Point3 { x, y, z } = *p;
    let a = params.a();
    Vector3::new(
        (x + 1.0) * (1.0 + y + z) * (y * z - x - y - a) / (y * z),
        (y + 1.0) * (z - x) * (a + x + y + z + x * z) / (x * z),
        (z + 1.0) * (1.0 + x + y) * (a + y + z - x * y) / (x * y),
    )
}

fn field_raw(v: &Vector3<f64>, params: &Params) -> Vector3<f64> {
    let (x, y, z) = (v[0], v[1], v[2]);
    let a = params.a();
    Vector3::new(
        (x + 1.0) * (1.0 + y + z) * (y * z - x - y - a) / (y * z),
        (y + 1.0) * (z - x) * (a + x + y + z + x * z) / (x * z),
        (z + 1.0) * (1.0 + x + y) * (a + y + z - x * y) / (x * y),
    )
}

/// One accepted integrator step with its dense-output coefficients.
#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    h: f64,
    cont: [Vector3<f64>; 5],
}

impl DenseStep {
    /// Fifth-order interpolant on `[t0, t0 + h]`.
    fn eval(&self, t: f64) -> Vector3<f64> {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        self.cont[0]
            + theta
                * (self.cont[1]
                    + theta1 * (self.cont[2] + theta * (self.cont[3] + theta1 * self.cont[4])))
    }
}

/// A forward-time integration with dense output over the covered span.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Accepted step endpoints `(t, state)`.
    pub samples: Vec<(f64, Point3)>,
    steps: Vec<DenseStep>,
    pub rtol: f64,
    pub atol: f64,
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.samples.last().map(|&(t, _)| t).unwrap_or(0.0)
    }

    /// Dense-output state at `t` within the covered span.
    pub fn eval(&self, t: f64) -> Vector3<f64> {
        debug_assert!(!self.steps.is_empty());
        let idx = self
            .steps
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(t)
    }

    /// Diagonal of the axis-aligned bounding box of the samples.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for (_, p) in &self.samples {
            let v = p.to_vector();
            lo = lo.inf(&v);
            hi = hi.sup(&v);
        }
        (hi - lo).norm()
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and 4th-order solutions.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct Integrator<'a> {
    params: &'a Params,
    rtol: f64,
    atol: f64,
    t: f64,
    y: Vector3<f64>,
    k1: Vector3<f64>,
    h: f64,
    traj: Trajectory,
}

impl<'a> Integrator<'a> {
    fn new(p: &Point3, params: &'a Params, tol: f64) -> Result<Self> {
        if !(1e-14..=1e-6).contains(&tol) {
            return Err(Error::Domain(format!(
                "tolerance {tol} outside [1e-14, 1e-6]"
            )));
        }
        let y = p.to_vector();
        let k1 = field_raw(&y, params);
        // Initial step from the field magnitude at the start point.
        let h = (0.01 * y.norm() / k1.norm().max(1e-12)).clamp(1e-8, 0.1);
        Ok(Self {
            params,
            rtol: tol,
            atol: tol,
            t: 0.0,
            y,
            k1,
            h,
            traj: Trajectory {
                samples: vec![(0.0, *p)],
                steps: Vec::new(),
                rtol: tol,
                atol: tol,
            },
        })
    }

    /// Advance by one accepted step; returns the new time.
    fn step(&mut self, h_max: f64) -> Result<f64> {
        let mut h = self.h.min(h_max);
        for _attempt in 0..60 {
            if h < 1e-15 * self.t.max(1.0) {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let mut k = [Vector3::zeros(); 7];
            k[0] = self.k1;
            let mut bad = false;
            for i in 1..7 {
                let mut acc = Vector3::zeros();
                for (j, kj) in k.iter().enumerate().take(i) {
                    acc += A[i - 1][j] * kj;
                }
                let ys = self.y + h * acc;
                if ys.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
                    bad = true;
                    break;
                }
                let _ = C[i];
                k[i] = field_raw(&ys, self.params);
            }
            if bad {
                h *= 0.5;
                continue;
            }
            // FSAL: stage 7 state is the 5th-order solution.
            let mut acc = Vector3::zeros();
            for (j, kj) in k.iter().enumerate().take(6) {
                acc += A[5][j] * kj;
            }
            let y_new = self.y + h * acc;
            if y_new.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
                h *= 0.5;
                continue;
            }
            let mut err_vec = Vector3::zeros();
            for (j, kj) in k.iter().enumerate() {
                err_vec += E[j] * kj;
            }
            err_vec *= h;
            let mut err = 0.0_f64;
            for i in 0..3 {
                let sc = self.atol + self.rtol * self.y[i].abs().max(y_new[i].abs());
                err += (err_vec[i] / sc).powi(2);
            }
            err = (err / 3.0).sqrt();
            if err <= 1.0 {
                // Dense-output coefficients for this step.
                let ydiff = y_new - self.y;
                let bspl = h * k[0] - ydiff;
                let mut rc5 = Vector3::zeros();
                for (j, kj) in k.iter().enumerate() {
                    rc5 += D[j] * kj;
                }
                rc5 *= h;
                let cont = [self.y, ydiff, bspl, ydiff - h * k[6] - bspl, rc5];
                self.traj.steps.push(DenseStep { t0: self.t, h, cont });
                self.t += h;
                self.y = y_new;
                self.k1 = k[6];
                self.traj
                    .samples
                    .push((self.t, Point3::from_vector(&y_new).map_err(|_| {
                        Error::LeftDomain { t: self.t }
                    })?));
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                self.h = h * fac;
                return Ok(self.t);
            }
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 0.9);
        }
        Err(Error::StepUnderflow { t: self.t })
    }
}

/// Guard against circles degenerating onto the singular locus, where the
/// field vanishes and timing becomes ill-conditioned.
fn check_nondegenerate(p: &Point3, params: &Params) -> Result<()> {
    let crit = map::critical_values(params);
    let fixed = Point3::new(crit.x_c, crit.x_c, crit.x_c).expect("x_c > 0");
    let threshold = 1e-4 * crit.x_c;
    if p.distance(&fixed) < threshold || map::distance_to_l(p, params) < threshold {
        return Err(Error::DegenerateCircle);
    }
    let speed = vector_field(p, params).norm();
    if speed < 1e-12 * (1.0 + p.to_vector().norm()) {
        return Err(Error::Stationary {
            x: p.x,
            y: p.y,
            z: p.z,
        });
    }
    Ok(())
}

/// Integrate the flow from `p` over `[0, t_end]`.
pub fn integrate(p: &Point3, params: &Params, t_end: f64, tol: f64) -> Result<Trajectory> {
    check_nondegenerate(p, params)?;
    let mut ig = Integrator::new(p, params, tol)?;
    while ig.t < t_end {
        ig.step(t_end - ig.t)?;
    }
    Ok(ig.traj)
}

/// A closed flow orbit: one full revolution of the invariant circle.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub trajectory: Trajectory,
    pub base: Point3,
    pub period: f64,
}

const RETURN_GUARD: f64 = 1e3;

/// Refine a sign change of `f` on `[lo, hi]` to 1e-12 relative in `t`.
fn refine_crossing(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 * hi.max(1e-6) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Compute one full revolution from `p`: integrate until the orbit returns
/// to the local section through `p` orthogonal to the field, in the positive
/// direction, within the acceptance radius.
pub fn orbit(p: &Point3, params: &Params, tol: f64) -> Result<Orbit> {
    check_nondegenerate(p, params)?;
    let x0 = p.to_vector();
    let n = vector_field(p, params).normalize();
    let section = |q: &Vector3<f64>| (q - x0).dot(&n);

    let mut ig = Integrator::new(p, params, tol)?;
    let mut prev_t = 0.0;
    let mut prev_s = 0.0; // section value at t = 0
    let mut went_negative = false;
    loop {
        let t = ig.step(RETURN_GUARD - ig.t)?;
        let s = section(&ig.y);
        if prev_s < 0.0 {
            went_negative = true;
        }
        if went_negative && prev_s < 0.0 && s >= 0.0 {
            // Candidate positive-direction crossing inside the last step.
            let traj = &ig.traj;
            let f = |tc: f64| section(&traj.eval(tc));
            let t_cross = refine_crossing(&f, prev_t, t);
            let q = ig.traj.eval(t_cross);
            let delta = 0.05 * ig.traj.bbox_diagonal();
            if (q - x0).norm() < delta {
                // Closure check for the accepted period.
                let gap = (q - x0).norm();
                if gap > 1e-8 * x0.norm() {
                    return Err(Error::NoConvergence(format!(
                        "orbit closure gap {gap:.3e} exceeds tolerance"
                    )));
                }
                return Ok(Orbit {
                    trajectory: ig.traj,
                    base: *p,
                    period: t_cross,
                });
            }
        }
        if t >= RETURN_GUARD {
            return Err(Error::NoReturn {
                guard: RETURN_GUARD,
            });
        }
        prev_t = t;
        prev_s = s;
    }
}

/// Orbit period of the flow through `p`.
pub fn period(p: &Point3, params: &Params, tol: f64) -> Result<f64> {
    Ok(orbit(p, params, tol)?.period)
}

/// Flight time within an already-computed orbit to the target point `q*`:
/// the positive-direction crossing of the local section at `q*` that passes
/// within the acceptance radius.
fn flight_time(orb: &Orbit, params: &Params, target: &Point3) -> Result<f64> {
    let qt = target.to_vector();
    let n = vector_field(target, params).normalize();
    let traj = &orb.trajectory;
    let section = |t: f64| (traj.eval(t) - qt).dot(&n);
    let delta = 0.05 * traj.bbox_diagonal();

    let mut best: Option<(f64, f64)> = None; // (distance, time)
    let mut prev: Option<(f64, f64)> = None;
    for &(t, _) in &traj.samples {
        let t = t.min(orb.period);
        let s = section(t);
        if let Some((tp, sp)) = prev {
            if sp < 0.0 && s >= 0.0 && t > tp {
                let t_cross = refine_crossing(&section, tp, t);
                let dist = (traj.eval(t_cross) - qt).norm();
                if dist < delta && t_cross > 1e-12 {
                    match best {
                        Some((d, _)) if d <= dist => {}
                        _ => best = Some((dist, t_cross)),
                    }
                }
            }
        }
        prev = Some((t, s));
        if t >= orb.period {
            break;
        }
    }
    match best {
        Some((dist, t_cross)) => {
            if dist > 1e-8 * qt.norm() {
                return Err(Error::TargetNotOnOrbit { distance: dist });
            }
            Ok(t_cross)
        }
        None => {
            // Report the closest sampled approach for diagnostics.
            let dist = traj
                .samples
                .iter()
                .map(|(_, s)| (s.to_vector() - qt).norm())
                .fold(f64::INFINITY, f64::min);
            Err(Error::TargetNotOnOrbit { distance: dist })
        }
    }
}

/// Flight time from `p` to its image under `F` (power 1, on the separating
/// surface only) or `F²` (power 2, anywhere off the singular locus).
pub fn time_to_image(p: &Point3, params: &Params, power: u8, tol: f64) -> Result<f64> {
    let orb = orbit(p, params, tol)?;
    let target = map::map_f_iter(p, params, power as u64);
    flight_time(&orb, params, &target)
}

/// Rotation data for the invariant circle through `p`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RotationRecord {
    /// Orbit period of the flow.
    pub t_period: f64,
    /// Flight time to the image point.
    pub tau: f64,
    /// Rotation number τ/T.
    pub rho: f64,
    /// 1 for F (surface circles), 2 for F².
    pub power: u8,
}

/// Rotation number of `F` (power 1) or `F²` (power 2) on the circle through
/// `p`, as flight time over period.
pub fn rotation_number(p: &Point3, params: &Params, power: u8, tol: f64) -> Result<RotationRecord> {
    let orb = orbit(p, params, tol)?;
    rotation_number_on(&orb, params, power)
}

/// Same, reusing an already-computed orbit.
pub fn rotation_number_on(orb: &Orbit, params: &Params, power: u8) -> Result<RotationRecord> {
    let target = map::map_f_iter(&orb.base, params, power as u64);
    let tau = flight_time(orb, params, &target)?;
    Ok(RotationRecord {
        t_period: orb.period,
        tau,
        rho: tau / orb.period,
        power,
    })
}

/// Independent winding-angle estimate of the rotation number: project the
/// iterates onto the principal plane of the sampled circle and accumulate
/// signed angles around the centroid.
pub fn rotation_number_oracle(
    p: &Point3,
    params: &Params,
    power: u8,
    iters: usize,
) -> Result<f64> {
    let orb = orbit(p, params, tol_default())?;
    let traj = &orb.trajectory;
    let n_samples = 1024;
    let samples: Vec<Vector3<f64>> = (0..n_samples)
        .map(|i| traj.eval(orb.period * i as f64 / n_samples as f64))
        .collect();
    let centroid = samples.iter().sum::<Vector3<f64>>() / n_samples as f64;
    let mut cov = Matrix3::zeros();
    for s in &samples {
        let d = s - centroid;
        cov += d * d.transpose();
    }
    cov /= n_samples as f64;
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let l1 = eig.eigenvalues[order[0]];
    let l2 = eig.eigenvalues[order[1]];
    if !(l1 > 0.0) || l2 < 1e-12 * l1 || l1.sqrt() < 1e-6 {
        return Err(Error::DegeneratePlane);
    }
    let e1 = eig.eigenvectors.column(order[0]).into_owned();
    let e2 = eig.eigenvectors.column(order[1]).into_owned();

    let angle = |q: &Point3| {
        let d = q.to_vector() - centroid;
        d.dot(&e2).atan2(d.dot(&e1))
    };
    let mut total = 0.0;
    let mut q = *p;
    let mut prev = angle(&q);
    for _ in 0..iters {
        q = map::map_f_iter(&q, params, power as u64);
        let cur = angle(&q);
        let mut d = cur - prev;
        while d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        while d <= -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        total += d;
        prev = cur;
    }
    // Orientation of the plane basis is arbitrary; report the positive
    // winding fraction.
    Ok((total / (std::f64::consts::TAU * iters as f64)).abs())
}

/// Default integration tolerance used throughout the table pipelines.
pub fn tol_default() -> f64 {
    1e-12
}
