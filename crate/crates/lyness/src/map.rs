//! The third-order Lyness map, its first integrals and the closed-form
//! rotation-number limits.
//!
//! The map is `F(x, y, z) = (y, z, (a + y + z) / x)` on the open positive
//! octant. Level pairs of the two first integrals `V1`, `V2` identify the
//! invariant circles that the rest of the crate works on.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Map parameter `a > 0`. `a = 1` is the fully periodic special case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    a: f64,
}

impl Params {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("parameter a must be positive, got {a}")));
        }
        Ok(Self { a })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }
}

/// A state in the open positive octant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0 && z > 0.0) || !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Domain(format!(
                "point ({x}, {y}, {z}) is outside the open positive octant"
            )));
        }
        Ok(Self { x, y, z })
    }

    #[inline]
    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    /// Coordinate-sum absolute norm `|x| + |y| + |z|`.
    #[inline]
    pub fn norm_l1(&self) -> f64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }
}

/// Invariant values `(k, h) = (V1, V2)` identifying an invariant circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPair {
    pub k: f64,
    pub h: f64,
}

/// Fixed-point data and the closed-form rotation-number constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalData {
    /// Fixed-point coordinate `x_c = 1 + sqrt(1 + a)`.
    pub x_c: f64,
    /// Global minimum of `V1` on the positive octant.
    pub k_c: f64,
    /// Global minimum of `V2` on the positive octant.
    pub h_c: f64,
    /// Limit of the rotation number of `F` on the separating surface at the
    /// fixed point.
    pub rho_fixed_limit: f64,
    /// Supremum (a > 1) resp. infimum (a < 1) of the two-periodic rotation
    /// limit, attained at `x_c`.
    pub rho_a: f64,
}

/// One application of `F(x, y, z) = (y, z, (a + y + z) / x)`.
pub fn map_f(p: &Point3, params: &Params) -> Point3 {
    Point3 {
        x: p.y,
        y: p.z,
        z: (params.a + p.y + p.z) / p.x,
    }
}

/// `n`-fold composition of [`map_f`].
pub fn map_f_iter(p: &Point3, params: &Params, n: u64) -> Point3 {
    let mut q = *p;
    for _ in 0..n {
        q = map_f(&q, params);
    }
    q
}

/// Derivative of `F` at `p`.
pub fn jacobian_f(p: &Point3, params: &Params) -> Matrix3<f64> {
    let w = params.a + p.y + p.z;
    Matrix3::new(
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        1.0,
        -w / (p.x * p.x),
        1.0 / p.x,
        1.0 / p.x,
    )
}

/// First integral `V1 = (x+1)(y+1)(z+1)(a+x+y+z) / (xyz)`.
pub fn v1(p: &Point3, params: &Params) -> f64 {
    let Point3 { x, y, z } = *p;
    (x + 1.0) * (y + 1.0) * (z + 1.0) * (params.a + x + y + z) / (x * y * z)
}

/// First integral `V2 = (1+y+z)(1+x+y)(a+x+y+z+xz) / (xyz)`.
pub fn v2(p: &Point3, params: &Params) -> f64 {
    let Point3 { x, y, z } = *p;
    (1.0 + y + z) * (1.0 + x + y) * (params.a + x + y + z + x * z) / (x * y * z)
}

/// Both first integrals at once.
pub fn invariants(p: &Point3, params: &Params) -> LevelPair {
    LevelPair {
        k: v1(p, params),
        h: v2(p, params),
    }
}

/// The cubic whose zero set is the invariant surface separating the two
/// half-circle regions swapped by `F`:
/// `G = -y^3 - (x+z+a+1) y^2 - (x+z+a) y + x z (x+1)(z+1)`.
pub fn g_value(p: &Point3, params: &Params) -> f64 {
    let Point3 { x, y, z } = *p;
    let a = params.a;
    -y * y * y - (x + z + a + 1.0) * y * y - (x + z + a) * y + x * z * (x + 1.0) * (z + 1.0)
}

/// Which side of the separating surface a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Positive,
    Negative,
    OnSurface,
}

/// Scale-aware classification: `|G| < 1e-9 (1 + |p|^3)` counts as on-surface,
/// since `G` is cubic in the coordinates.
pub fn classify_region(p: &Point3, params: &Params) -> Region {
    let g = g_value(p, params);
    let scale = 1.0 + p.to_vector().norm().powi(3);
    if g.abs() < 1e-9 * scale {
        Region::OnSurface
    } else if g > 0.0 {
        Region::Positive
    } else {
        Region::Negative
    }
}

/// Rotation-number limit of `F` on the separating surface at the fixed
/// point: `arccos((a - 1 + sqrt(1 + a)) / (2a)) / (2 pi)`.
pub fn rho_limit_fixed(params: &Params) -> f64 {
    let a = params.a;
    ((a - 1.0 + (1.0 + a).sqrt()) / (2.0 * a)).acos() / std::f64::consts::TAU
}

/// Limit of the `F^2` rotation number on circles shrinking to the
/// two-periodic point with coordinate `x_h > 1`:
/// `arccos((a - 1)(1 - x_h) / (2 x_h (a + x_h))) / (2 pi)`.
pub fn rho_limit_two_periodic(x_h: f64, params: &Params) -> Result<f64> {
    if !(x_h > 1.0) {
        return Err(Error::Domain(format!("x_h must exceed 1, got {x_h}")));
    }
    let a = params.a;
    Ok(((a - 1.0) * (1.0 - x_h) / (2.0 * x_h * (a + x_h))).acos() / std::f64::consts::TAU)
}

/// Extremal two-periodic rotation limit, attained at `x_h = x_c`:
/// `arccos((1 - a) sqrt(1 + a) / (2 (1 + sqrt(1+a)) (1 + a + sqrt(1+a)))) / (2 pi)`.
pub fn rho_a(params: &Params) -> f64 {
    let a = params.a;
    let s = (1.0 + a).sqrt();
    ((1.0 - a) * s / (2.0 * (1.0 + s) * (1.0 + a + s))).acos() / std::f64::consts::TAU
}

/// Fixed point coordinate and the minima of both integrals, plus the
/// closed-form rotation constants.
pub fn critical_values(params: &Params) -> CriticalData {
    let a = params.a;
    let s = (1.0 + a).sqrt();
    let x_c = 1.0 + s;
    let k_c = (2.0 + s).powi(3) * (a + 3.0 + 3.0 * s) / (1.0 + s).powi(3);
    let h_c = (3.0 + 2.0 * s).powi(2) * (2.0 * a + 5.0 + 5.0 * s) / (1.0 + s).powi(3);
    CriticalData {
        x_c,
        k_c,
        h_c,
        rho_fixed_limit: rho_limit_fixed(params),
        rho_a: rho_a(params),
    }
}

/// Point of the two-periodic curve with first coordinate `x > 1`:
/// `(x, (x + a)/(x - 1), x)`.
pub fn l_point(x: f64, params: &Params) -> Result<Point3> {
    if !(x > 1.0) {
        return Err(Error::Domain(format!(
            "two-periodic curve requires x > 1, got {x}"
        )));
    }
    Ok(Point3 {
        x,
        y: (x + params.a) / (x - 1.0),
        z: x,
    })
}

/// `V1` restricted to the two-periodic curve:
/// `(2x + a - 1)^2 (x + 1)^2 / (x (x + a)(x - 1))`.
///
/// Strictly decreasing on `(1, x_c)`, strictly increasing on `(x_c, inf)`,
/// with minimum `k_c` at `x_c`.
pub fn v1_on_l(x: f64, params: &Params) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::Domain(format!(
            "two-periodic curve requires x > 1, got {x}"
        )));
    }
    let a = params.a;
    let num = (2.0 * x + a - 1.0).powi(2) * (x + 1.0).powi(2);
    Ok(num / (x * (x + a) * (x - 1.0)))
}

/// Approximate Euclidean distance from `p` to the two-periodic curve,
/// probing the parameter values suggested by the coordinates of `p`.
pub fn distance_to_l(p: &Point3, params: &Params) -> f64 {
    let mut best = f64::INFINITY;
    let mut candidates = vec![0.5 * (p.x + p.z)];
    // If y ~ (x+a)/(x-1) the matching parameter is x = (y+a)/(y-1).
    if p.y > 1.0 {
        candidates.push((p.y + params.a) / (p.y - 1.0));
    }
    for x0 in candidates {
        if x0 <= 1.0 {
            continue;
        }
        // A few fixed-point polish steps of the nearest-point condition.
        let mut x = x0;
        for _ in 0..3 {
            if let Ok(q) = l_point(x, params) {
                let d = p.distance(&q);
                best = best.min(d);
                // Local descent along the curve parameter.
                let step = 1e-4 * x.max(1.0);
                let dplus = l_point(x + step, params).map(|q| p.distance(&q)).unwrap_or(d);
                let dminus = if x - step > 1.0 {
                    l_point(x - step, params).map(|q| p.distance(&q)).unwrap_or(d)
                } else {
                    d
                };
                if dplus < d {
                    x += step;
                } else if dminus < d {
                    x -= step;
                } else {
                    break;
                }
            } else {
                break;
            }
        }
    }
    best
}

/// The two solutions of `v1_on_l(x) = k` for `k > k_c`, one on each side of
/// `x_c`, found by bracketed bisection.
pub fn two_periodic_points_at_level(k: f64, params: &Params) -> Result<(f64, f64)> {
    let crit = critical_values(params);
    if !(k > crit.k_c) {
        return Err(Error::Domain(format!(
            "level k = {k} does not exceed the minimum k_c = {}",
            crit.k_c
        )));
    }
    let f = |x: f64| v1_on_l(x, params).expect("bracket stays above 1") - k;
    // Left bracket: v1_on_l blows up at 1+ and is decreasing down to k_c.
    let x_low = bisect(&f, 1.0 + 1e-9, crit.x_c, 1e-13)?;
    // Right bracket: double until the value exceeds k again.
    let mut x_big = 2.0 * crit.x_c;
    while f(x_big) < 0.0 {
        x_big *= 2.0;
        if x_big > 1e12 {
            return Err(Error::NoConvergence(
                "right bracket for the two-periodic level equation".into(),
            ));
        }
    }
    let x_high = bisect(&f, crit.x_c, x_big, 1e-13)?;
    Ok((x_low, x_high))
}

/// Bracketed bisection to the given relative tolerance. The bracket must
/// straddle a sign change.
pub(crate) fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change on bracket [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 || (hi - lo).abs() < rel_tol * mid.abs().max(1e-300) {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
