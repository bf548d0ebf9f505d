//! Level-set geometry: z-branches of the two integral level surfaces, their
//! discriminants, the equator level functions, the explicit height of the
//! separating surface, and the admissible V1-range on a fixed V2 level.

use crate::error::{Error, Result};
use crate::map::{self, Params, Point3};
use serde::{Deserialize, Serialize};

/// The two z-branches `z_± = (α ± √Δ)/β` of a level surface over `(x, y)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BranchResult {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub z_minus: Option<f64>,
    pub z_plus: Option<f64>,
}

impl BranchResult {
    fn from_parts(alpha: f64, beta: f64, delta: f64) -> Self {
        let (z_minus, z_plus) = if delta >= 0.0 {
            let s = delta.sqrt();
            let lo = (alpha - s) / beta;
            let hi = (alpha + s) / beta;
            (Some(lo.min(hi)), Some(lo.max(hi)))
        } else {
            (None, None)
        };
        Self {
            alpha,
            beta,
            delta,
            z_minus,
            z_plus,
        }
    }
}

fn check_quadrant(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y > 0.0) || !(x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!(
            "point ({x}, {y}) is outside the open positive quadrant"
        )));
    }
    Ok(())
}

/// z-branches of `{V1 = k}` over `(x, y)`.
///
/// `Δ < 0` (no surface over the point) is reported through the absent
/// branches, not as an error.
pub fn z_branches_level1(x: f64, y: f64, params: &Params, k: f64) -> Result<BranchResult> {
    check_quadrant(x, y)?;
    let a = params.a();
    let alpha = -a - 1.0 - (a + 2.0) * x - (a + 2.0) * y - x * x - (a - k + 3.0) * x * y - y * y
        - x * x * y
        - x * y * y;
    let beta = 2.0 * (1.0 + x + y + x * y);
    // Coefficients of the discriminant, collected by powers of y.
    let a2 = a * a;
    let k2 = k * k;
    let c0 = (a - 1.0) * (a - 1.0)
        + 2.0 * a * (a - 1.0) * x
        + (2.0 * a - 2.0 + a2) * x * x
        + 2.0 * a * x.powi(3)
        + x.powi(4);
    let c1 = 2.0 * a * (a - 1.0)
        + (-2.0 * k - 2.0 * k * a + 4.0 * a2 - 2.0) * x
        + (-4.0 * k - 2.0 * k * a - 2.0 + 6.0 * a + 2.0 * a2) * x * x
        + (4.0 * a - 2.0 * k + 2.0) * x.powi(3)
        + 2.0 * x.powi(4);
    let c2 = (2.0 * a - 2.0 + a2)
        + (-4.0 * k - 2.0 * k * a - 2.0 + 6.0 * a + 2.0 * a2) * x
        + (-2.0 * k * a - 6.0 * k + a2 + 3.0 + 6.0 * a + k2) * x * x
        + (-2.0 * k + 4.0 + 2.0 * a) * x.powi(3)
        + x.powi(4);
    let c3 = 2.0 * a + (4.0 * a - 2.0 * k + 2.0) * x + (-2.0 * k + 4.0 + 2.0 * a) * x * x
        + 2.0 * x.powi(3);
    let c4 = 1.0 + 2.0 * x + x * x;
    let delta = (((c4 * y + c3) * y + c2) * y + c1) * y + c0;
    Ok(BranchResult::from_parts(alpha, beta, delta))
}

/// z-branches of `{V2 = h}` over `(x, y)`.
pub fn z_branches_level2(x: f64, y: f64, params: &Params, h: f64) -> Result<BranchResult> {
    check_quadrant(x, y)?;
    let a = params.a();
    let alpha = -a - 1.0 - (a + 3.0) * x - (a + 3.0) * y - 5.0 * x * y + h * x * y
        - 2.0 * x * x
        - 2.0 * y * y
        - x * x * y
        - x * y * y;
    let beta = 2.0 * (1.0 + x) * (1.0 + x + y);
    // Discriminant grouped by powers of y; the quadratic-in-h decomposition
    // Δ = x²y²h² + p1·h + p0 is asserted in the tests as an independent
    // transcription of the same 45-term polynomial.
    let q = (1.0 - a) * (1.0 - a);
    let a2 = a * a;
    let y0 = q * (1.0 + x) * (1.0 + x);
    let y1 = 2.0 * q
        + (4.0 + 2.0 * a2 - 6.0 * a - 2.0 * h - 2.0 * h * a) * x
        + (4.0 - 4.0 * a - 6.0 * h - 2.0 * h * a) * x * x
        + (2.0 - 2.0 * a - 4.0 * h) * x.powi(3);
    let y2 = q
        + (4.0 - 4.0 * a - 6.0 * h - 2.0 * h * a) * x
        + (5.0 - 4.0 * a - 10.0 * h + h * h) * x * x
        + (2.0 - 2.0 * h) * x.powi(3)
        + x.powi(4);
    let y3 = (2.0 - 2.0 * a - 4.0 * h) * x + (2.0 - 2.0 * h) * x * x + 2.0 * x.powi(3);
    let y4 = x * x;
    let delta = (((y4 * y + y3) * y + y2) * y + y1) * y + y0;
    Ok(BranchResult::from_parts(alpha, beta, delta))
}

/// Height of the separating surface over `(x, y)`: the unique positive root
/// of `G(x, y, ·) = 0`.
pub fn g_surface_height(x: f64, y: f64, params: &Params) -> Result<f64> {
    check_quadrant(x, y)?;
    let a = params.a();
    let u = y * (y + 1.0) - x * (x + 1.0);
    let disc = u * u + 4.0 * x * (x + 1.0) * (y.powi(3) + (1.0 + a + x) * y * y + (a + x) * y);
    Ok((u + disc.sqrt()) / (2.0 * x * (x + 1.0)))
}

/// Equator levels of the `V1` family: the two values of `k` for which the
/// branch discriminant vanishes at `(x, y)`.
pub fn branch_levels_v1(x: f64, y: f64, params: &Params) -> Result<(f64, f64)> {
    check_quadrant(x, y)?;
    let a = params.a();
    let s = (x + y + a).sqrt();
    let front = (x + 1.0) * (y + 1.0) / (x * y);
    let m_minus = (x + y + a + 1.0 - 2.0 * s) * front;
    let m_plus = (x + y + a + 1.0 + 2.0 * s) * front;
    Ok((m_minus, m_plus))
}

/// Equator levels of the `V2` family.
pub fn branch_levels_v2(x: f64, y: f64, params: &Params) -> Result<(f64, f64)> {
    check_quadrant(x, y)?;
    let a = params.a();
    let d = x * x * y + x * y * y + x * x + y * y + (a + 2.0) * x * y + (a + 1.0) * x
        + (a + 1.0) * y
        + a;
    let s = d.sqrt();
    let front = (1.0 + x + y) / (x * y);
    let m_minus = (x * y + 2.0 * x + 2.0 * y + a + 1.0 - 2.0 * s) * front;
    let m_plus = (x * y + 2.0 * x + 2.0 * y + a + 1.0 + 2.0 * s) * front;
    Ok((m_minus, m_plus))
}

/// Where an extremal `V1` value on a `V2` level is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KSource {
    /// On the two-periodic curve.
    OnL,
    /// On the separating surface.
    OnG,
}

/// The admissible `V1` range `[k1, k2]` on the level surface `{V2 = h}`,
/// with the locus each endpoint was found on.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KRange {
    pub k1: f64,
    pub k2: f64,
    pub k1_source: KSource,
    pub k2_source: KSource,
}

/// `V2` restricted to the two-periodic curve.
fn v2_on_l(x: f64, params: &Params) -> f64 {
    let p = map::l_point(x, params).expect("caller keeps x > 1");
    map::v2(&p, params)
}

/// Unique positive root `y` of `G(x, y, x) = 0` for fixed `x`, by bisection.
fn g_slice_y(x: f64, params: &Params) -> Result<f64> {
    let a = params.a();
    let g = |y: f64| {
        -y * y * y - (2.0 * x + a + 1.0) * y * y - (2.0 * x + a) * y
            + x * x * (x + 1.0) * (x + 1.0)
    };
    // g(0) > 0 and g -> -inf; a single positive crossing.
    let mut hi = 1.0_f64.max(x);
    while g(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoConvergence("surface slice root bracket".into()));
        }
    }
    map::bisect(&g, 0.0, hi, 1e-14)
}

/// Endpoints of the `V1` range on `{V2 = h}`: one candidate on the
/// two-periodic curve, one on the separating surface in the plane `z = x`.
pub fn k_range(h: f64, params: &Params) -> Result<KRange> {
    let crit = map::critical_values(params);
    if !(h > crit.h_c) {
        return Err(Error::Domain(format!(
            "level h = {h} does not exceed the minimum h_c = {}",
            crit.h_c
        )));
    }

    // Candidate on the two-periodic curve: V2 restricted there is strictly
    // decreasing on (1, x_c), so bisect that bracket.
    let f_l = |x: f64| v2_on_l(x, params) - h;
    let mut lo = 1.0 + 1e-9;
    while !f_l(lo).is_finite() {
        lo = 1.0 + (lo - 1.0) * 2.0;
    }
    let x_l = map::bisect(&f_l, lo, crit.x_c, 1e-13)?;
    let k_on_l = map::v1_on_l(x_l, params)?;

    // Candidate on the separating surface: solve V2(x, y, x) = h along the
    // curve G(x, y, x) = 0. Newton in (x, y), damped, seeded past the fixed
    // point; fall back to bisection along the slice curve if it stalls.
    let k_on_g = match k_on_g_newton(h, params, &crit) {
        Ok(k) => k,
        Err(_) => k_on_g_bisect(h, params, &crit)?,
    };

    let (k1, k2, k1_source, k2_source) = if k_on_l <= k_on_g {
        (k_on_l, k_on_g, KSource::OnL, KSource::OnG)
    } else {
        (k_on_g, k_on_l, KSource::OnG, KSource::OnL)
    };
    Ok(KRange {
        k1,
        k2,
        k1_source,
        k2_source,
    })
}

fn k_on_g_residual(x: f64, y: f64, h: f64, params: &Params) -> (f64, f64) {
    let a = params.a();
    let p = Point3 { x, y, z: x };
    let r1 = map::v2(&p, params) - h;
    let r2 = -y * y * y - (2.0 * x + a + 1.0) * y * y - (2.0 * x + a) * y
        + x * x * (x + 1.0) * (x + 1.0);
    (r1, r2)
}

fn k_on_g_newton(h: f64, params: &Params, crit: &map::CriticalData) -> Result<f64> {
    let mut x = crit.x_c * 1.2;
    let mut y = g_slice_y(x, params)?;
    let norm = |r: (f64, f64)| r.0.abs() + r.1.abs();
    let mut res = k_on_g_residual(x, y, h, params);
    for _ in 0..200 {
        if norm(res) < 1e-11 * (1.0 + h) {
            let p = Point3::new(x, y, x)?;
            return Ok(map::v1(&p, params));
        }
        // Jacobian by central differences; the closed forms add nothing here.
        let ex = 1e-7 * x.max(1.0);
        let ey = 1e-7 * y.max(1.0);
        let rx1 = k_on_g_residual(x + ex, y, h, params);
        let rx0 = k_on_g_residual(x - ex, y, h, params);
        let ry1 = k_on_g_residual(x, y + ey, h, params);
        let ry0 = k_on_g_residual(x, y - ey, h, params);
        let j11 = (rx1.0 - rx0.0) / (2.0 * ex);
        let j12 = (ry1.0 - ry0.0) / (2.0 * ey);
        let j21 = (rx1.1 - rx0.1) / (2.0 * ex);
        let j22 = (ry1.1 - ry0.1) / (2.0 * ey);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return Err(Error::NoConvergence("singular step in range solver".into()));
        }
        let dx = (res.0 * j22 - res.1 * j12) / det;
        let dy = (j11 * res.1 - j21 * res.0) / det;
        // Damp: halve until the residual decreases and the iterate stays
        // positive.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let nx = x - lambda * dx;
            let ny = y - lambda * dy;
            if nx > 0.0 && ny > 0.0 {
                let nres = k_on_g_residual(nx, ny, h, params);
                if norm(nres) < norm(res) {
                    x = nx;
                    y = ny;
                    res = nres;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence("range solver stalled".into()));
        }
    }
    Err(Error::NoConvergence(
        "range solver exceeded the iteration budget".into(),
    ))
}

fn k_on_g_bisect(h: f64, params: &Params, crit: &map::CriticalData) -> Result<f64> {
    let phi = |x: f64| {
        let y = g_slice_y(x, params).expect("slice root exists for x > 0");
        let p = Point3 { x, y, z: x };
        map::v2(&p, params) - h
    };
    // V2 along the slice curve has its minimum h_c at the fixed point and
    // grows unboundedly outward.
    let mut hi = 2.0 * crit.x_c;
    while phi(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::NoConvergence("range fallback bracket".into()));
        }
    }
    let x = map::bisect(&phi, crit.x_c, hi, 1e-13)?;
    let y = g_slice_y(x, params)?;
    let p = Point3::new(x, y, x)?;
    Ok(map::v1(&p, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{critical_values, g_value, v1, v2, Params, Point3};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(a: f64) -> Params {
        Params::new(a).unwrap()
    }

    fn sample_points(n: usize) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        (0..n)
            .map(|_| (rng.gen_range(0.05..8.0), rng.gen_range(0.05..8.0)))
            .collect()
    }

    #[test]
    fn level1_discriminant_transcription() {
        // The published identity α² − Δ = 4(y+1)²(x+1)²(x+y+a) pins down the
        // 22-term discriminant against transcription slips.
        let pr = params(3.0);
        for &(x, y) in &sample_points(50) {
            for &k in &[30.0, 146.70452, 500.0] {
                let b = z_branches_level1(x, y, &pr, k).unwrap();
                let rhs = 4.0 * (y + 1.0).powi(2) * (x + 1.0).powi(2) * (x + y + pr.a());
                assert_relative_eq!(b.alpha * b.alpha - b.delta, rhs, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn level1_delta_at_origin_and_critical_point() {
        for &a in &[0.3, 1.0, 3.0, 8.3] {
            let pr = params(a);
            let crit = critical_values(&pr);
            // Δ(0,0) = (1−a)²; approach the origin through the formula's
            // constant term by evaluating at a tiny offset.
            let b = z_branches_level1(1e-12, 1e-12, &pr, crit.k_c).unwrap();
            assert_abs_diff_eq!(b.delta, (1.0 - a) * (1.0 - a), epsilon = 1e-7);
            // At (x_c, x_c) with k = k_c the branches coincide at x_c.
            let b = z_branches_level1(crit.x_c, crit.x_c, &pr, crit.k_c).unwrap();
            assert_abs_diff_eq!(b.delta / (1.0 + crit.k_c.powi(2)), 0.0, epsilon = 1e-10);
            let b = z_branches_level1(crit.x_c, crit.x_c, &pr, crit.k_c + 1e-7).unwrap();
            assert_abs_diff_eq!(b.z_plus.unwrap(), crit.x_c, epsilon = 1e-3);
            assert_abs_diff_eq!(b.z_minus.unwrap(), crit.x_c, epsilon = 1e-3);
        }
    }

    #[test]
    fn level1_branches_lie_on_the_level() {
        let pr = params(3.0);
        for &(x, y) in &sample_points(100) {
            for &k in &[50.0, 146.70452, 900.0] {
                let b = z_branches_level1(x, y, &pr, k).unwrap();
                for z in [b.z_minus, b.z_plus].into_iter().flatten() {
                    if z > 0.0 {
                        let p = Point3::new(x, y, z).unwrap();
                        assert_relative_eq!(v1(&p, &pr), k, max_relative = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn level2_discriminant_transcription() {
        // Δ is quadratic in h: Δ = x²y²h² + p1·h + p0 with the published
        // p0, p1 — an independent transcription of the same polynomial.
        let pr = params(3.0);
        let a = pr.a();
        for &(x, y) in &sample_points(50) {
            for &h in &[40.0, 170.0, 650.0] {
                let b = z_branches_level2(x, y, &pr, h).unwrap();
                let p0 = x * x * y.powi(4)
                    + (2.0 * x.powi(3) + 2.0 * x * x + (-2.0 * a + 2.0) * x) * y.powi(3)
                    + (x.powi(4)
                        + 2.0 * x.powi(3)
                        + (-4.0 * a + 5.0) * x * x
                        + (-4.0 * a + 4.0) * x
                        + a * a
                        - 2.0 * a
                        + 1.0)
                        * y
                        * y
                    + ((-2.0 * a + 2.0) * x.powi(3)
                        + (-4.0 * a + 4.0) * x * x
                        + (4.0 + 2.0 * a * a - 6.0 * a) * x
                        + 2.0
                        + 2.0 * a * a
                        - 4.0 * a)
                        * y
                    + (a * a - 2.0 * a + 1.0) * x * x
                    + (2.0 + 2.0 * a * a - 4.0 * a) * x
                    + a * a
                    - 2.0 * a
                    + 1.0;
                let p1 = (-2.0 * x * x - 4.0 * x) * y.powi(3)
                    + (-2.0 * x.powi(3) - 10.0 * x * x + (-2.0 * a - 6.0) * x) * y * y
                    + (-4.0 * x.powi(3) + (-2.0 * a - 6.0) * x * x + (-2.0 - 2.0 * a) * x) * y;
                let expected = x * x * y * y * h * h + p1 * h + p0;
                assert_relative_eq!(b.delta, expected, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn level2_alpha_squared_exceeds_delta() {
        let pr = params(0.5);
        for &(x, y) in &sample_points(80) {
            for &h in &[20.0, 100.0] {
                let b = z_branches_level2(x, y, &pr, h).unwrap();
                assert!(b.alpha * b.alpha - b.delta > 0.0);
                // The gap has the closed form 4(1+x)(1+x+y)²(1+y)(a+x+y).
                let gap = 4.0
                    * (1.0 + x)
                    * (1.0 + x + y).powi(2)
                    * (1.0 + y)
                    * (pr.a() + x + y);
                assert_relative_eq!(b.alpha * b.alpha - b.delta, gap, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn level2_branches_lie_on_the_level() {
        let pr = params(3.0);
        for &(x, y) in &sample_points(100) {
            for &h in &[60.0, 170.0] {
                let b = z_branches_level2(x, y, &pr, h).unwrap();
                for z in [b.z_minus, b.z_plus].into_iter().flatten() {
                    if z > 0.0 {
                        let p = Point3::new(x, y, z).unwrap();
                        assert_relative_eq!(v2(&p, &pr), h, max_relative = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn level2_critical_tangency() {
        for &a in &[0.5, 3.0, 8.3] {
            let pr = params(a);
            let crit = critical_values(&pr);
            let b = z_branches_level2(crit.x_c, crit.x_c, &pr, crit.h_c).unwrap();
            assert_abs_diff_eq!(b.delta / (1.0 + crit.h_c.powi(2)), 0.0, epsilon = 1e-10);
            let b = z_branches_level2(crit.x_c, crit.x_c, &pr, crit.h_c + 1e-7).unwrap();
            assert_abs_diff_eq!(b.z_plus.unwrap(), crit.x_c, epsilon = 1e-3);
        }
    }

    #[test]
    fn surface_height_values() {
        let pr3 = params(3.0);
        let crit = critical_values(&pr3);
        assert_relative_eq!(
            g_surface_height(crit.x_c, crit.x_c, &pr3).unwrap(),
            crit.x_c,
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(
            g_surface_height(4.0, 7.0 / 3.0, &pr3).unwrap(),
            1.62395,
            epsilon = 5e-6
        );
        let pr79 = params(7.0 / 9.0);
        assert_abs_diff_eq!(
            g_surface_height(10.0 / 3.0, 37.0 / 21.0, &pr79).unwrap(),
            1.11361,
            epsilon = 5e-6
        );
    }

    #[test]
    fn surface_height_is_the_unique_positive_root() {
        let pr = params(3.0);
        for &(x, y) in &sample_points(100) {
            let z = g_surface_height(x, y, &pr).unwrap();
            assert!(z > 0.0);
            let p = Point3::new(x, y, z).unwrap();
            let scale = 1.0 + p.to_vector().norm().powi(3);
            assert_abs_diff_eq!(g_value(&p, &pr) / scale, 0.0, epsilon = 1e-10);
            // Single crossing: G has opposite signs at half and double height.
            let below = g_value(&Point3::new(x, y, 0.5 * z).unwrap(), &pr);
            let above = g_value(&Point3::new(x, y, 2.0 * z).unwrap(), &pr);
            // In z the surface polynomial has positive leading coefficient
            // and a negative value at z = 0, so it is negative below the
            // positive root and positive above it.
            assert!(below < 0.0 && above > 0.0);
        }
    }

    #[test]
    fn equator_levels_v1() {
        let pr = params(3.0);
        let crit = critical_values(&pr);
        let (_, m_plus) = branch_levels_v1(crit.x_c, crit.x_c, &pr).unwrap();
        assert_relative_eq!(m_plus, crit.k_c, max_relative = 1e-12);

        // For a > 1 the lower equator level at x = y = sqrt(a−1) is
        // (1 + sqrt(a−1))².
        let pr8 = params(8.3);
        let xs = (8.3_f64 - 1.0).sqrt();
        let (m_minus, _) = branch_levels_v1(xs, xs, &pr8).unwrap();
        assert_relative_eq!(m_minus, (1.0 + xs).powi(2), max_relative = 1e-12);

        // At k = m_± the discriminant vanishes.
        for &(x, y) in &sample_points(40) {
            let (lo, hi) = branch_levels_v1(x, y, &pr).unwrap();
            assert!(lo <= hi);
            for k in [lo, hi] {
                let b = z_branches_level1(x, y, &pr, k).unwrap();
                let scale = b.alpha * b.alpha + 1.0;
                assert_abs_diff_eq!(b.delta / scale, 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn equator_levels_v2() {
        let pr = params(3.0);
        let crit = critical_values(&pr);
        let (_, m_plus) = branch_levels_v2(crit.x_c, crit.x_c, &pr).unwrap();
        assert_relative_eq!(m_plus, crit.h_c, max_relative = 1e-12);

        // For a < 1 the lower level is 1 − a along the curve where y solves
        // x y² + (1+x)(a−1+x) y + (1+x)(a−1) = 0.
        let pr05 = params(0.5);
        let a = 0.5;
        for &x in &[0.2_f64, 0.7, 1.5, 4.0] {
            let qa = x;
            let qb = (1.0 + x) * (a - 1.0 + x);
            let qc = (1.0 + x) * (a - 1.0);
            let disc = qb * qb - 4.0 * qa * qc;
            let y = (-qb + disc.sqrt()) / (2.0 * qa);
            if y > 0.0 {
                let (m_minus, _) = branch_levels_v2(x, y, &pr05).unwrap();
                assert_relative_eq!(m_minus, 1.0 - a, max_relative = 1e-9);
            }
        }

        for &(x, y) in &sample_points(40) {
            let (lo, hi) = branch_levels_v2(x, y, &pr).unwrap();
            assert!(lo <= hi);
            for h in [lo, hi] {
                let b = z_branches_level2(x, y, &pr, h).unwrap();
                let scale = b.alpha * b.alpha + 1.0;
                assert_abs_diff_eq!(b.delta / scale, 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn k_range_collapses_at_the_minimum() {
        let pr = params(3.0);
        let crit = critical_values(&pr);
        let r = k_range(crit.h_c + 1e-6, &pr).unwrap();
        assert_abs_diff_eq!(r.k1, crit.k_c, epsilon = 1e-2);
        assert_abs_diff_eq!(r.k2, crit.k_c, epsilon = 1e-2);
        assert!(k_range(crit.h_c, &pr).is_err());
    }

    #[test]
    fn k_range_brackets_the_benchmark_level() {
        // The level pair through (12, 15/11, 0.27051) has its V1 extremes on
        // the two loci; one endpoint is the benchmark level itself.
        let pr = params(3.0);
        let p = Point3::new(12.0, 15.0 / 11.0, 0.27051).unwrap();
        let h = v2(&p, &pr);
        let k_star = v1(&p, &pr);
        let r = k_range(h, &pr).unwrap();
        assert!(r.k1 < r.k2);
        assert!(critical_values(&pr).k_c < r.k1);
        assert_ne!(r.k1_source, r.k2_source);
        let close_to_star =
            (r.k1 - k_star).abs() < 1e-4 * k_star || (r.k2 - k_star).abs() < 1e-4 * k_star;
        assert!(close_to_star, "k* = {k_star}, range = [{}, {}]", r.k1, r.k2);
    }

    #[test]
    fn k_range_bounds_sampled_v1_values() {
        let pr = params(3.0);
        let h = 60.0;
        let r = k_range(h, &pr).unwrap();
        let eps = 1e-6 * r.k2;
        let mut checked = 0;
        for i in 1..100 {
            for j in 1..100 {
                let x = 0.05 + 0.2 * i as f64;
                let y = 0.05 + 0.2 * j as f64;
                let b = z_branches_level2(x, y, &pr, h).unwrap();
                for z in [b.z_minus, b.z_plus].into_iter().flatten() {
                    if z > 0.0 {
                        let p = Point3::new(x, y, z).unwrap();
                        let k = v1(&p, &pr);
                        assert!(
                            k >= r.k1 - eps && k <= r.k2 + eps,
                            "V1 = {k} outside [{}, {}] at ({x}, {y}, {z})",
                            r.k1,
                            r.k2
                        );
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn k_range_ordering_over_a_level_grid() {
        let pr = params(3.0);
        let crit = critical_values(&pr);
        for &h in &[crit.h_c + 1.0, 50.0, 80.0, 200.0, 1000.0] {
            let r = k_range(h, &pr).unwrap();
            assert!(crit.k_c < r.k1 && r.k1 < r.k2, "h = {h}: [{}, {}]", r.k1, r.k2);
            assert_ne!(r.k1_source, r.k2_source);
        }
    }
}
