//! Exact integer machinery for the attainable-period results: the prime gap
//! cover of an interval, irreducible-fraction search with outward-rounded
//! rational endpoint bounds, the excluded denominators of the rotation
//! interval, and the derived excluded even periods.

use crate::error::{Error, Result};
use crate::map::{self, Params};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Denominator used for rational brackets around non-rational endpoints.
const BRACKET_DEN: i128 = 1_000_000_000_000;

/// Candidate sets are materialized in full only up to this member count;
/// larger covers fall back to value-capped enumeration.
const MATERIALIZE_LIMIT: u64 = 1_000_000;

/// Value cap for candidate enumeration when the full set is too large.
const VALUE_CAP: u64 = 100_000_000;

/// An interval endpoint: exact rational, or a binary64 evaluation widened to
/// an outward-rounded rational bracket for all integer comparisons.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Endpoint {
    Exact { num: i64, den: i64 },
    Approx(f64),
}

impl Endpoint {
    pub fn value(&self) -> f64 {
        match *self {
            Endpoint::Exact { num, den } => num as f64 / den as f64,
            Endpoint::Approx(v) => v,
        }
    }

    /// Certain strict comparison `q/r > self`; `None` when the fraction
    /// falls inside the rounding bracket and the verdict is not certain.
    fn frac_above(&self, q: i64, r: i64) -> Option<bool> {
        match *self {
            Endpoint::Exact { num, den } => {
                Some((q as i128) * (den as i128) > (num as i128) * (r as i128))
            }
            Endpoint::Approx(v) => {
                let up = (v * BRACKET_DEN as f64).ceil() as i128;
                let dn = (v * BRACKET_DEN as f64).floor() as i128;
                let lhs = (q as i128) * BRACKET_DEN;
                if lhs > up * r as i128 {
                    Some(true)
                } else if lhs < dn * r as i128 {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }

    /// Certain strict comparison `q/r < self`.
    fn frac_below(&self, q: i64, r: i64) -> Option<bool> {
        match *self {
            Endpoint::Exact { num, den } => {
                Some((q as i128) * (den as i128) < (num as i128) * (r as i128))
            }
            Endpoint::Approx(v) => {
                let up = (v * BRACKET_DEN as f64).ceil() as i128;
                let dn = (v * BRACKET_DEN as f64).floor() as i128;
                let lhs = (q as i128) * BRACKET_DEN;
                if lhs < dn * r as i128 {
                    Some(true)
                } else if lhs > up * r as i128 {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }
}

/// An open interval with robust endpoint comparisons.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl OpenInterval {
    pub fn new(lo: Endpoint, hi: Endpoint) -> Result<Self> {
        let width = hi.value() - lo.value();
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Domain(format!(
                "empty or reversed interval ({}, {})",
                lo.value(),
                hi.value()
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi.value() - self.lo.value()
    }

    /// Certain membership `lo < q/r < hi`; borderline verdicts count as
    /// non-membership.
    pub fn contains_fraction(&self, q: i64, r: i64) -> bool {
        self.lo.frac_above(q, r).unwrap_or(false) && self.hi.frac_below(q, r).unwrap_or(false)
    }
}

/// The rotation-number interval swept by the even-period limit value over
/// all parameters: `((π − 2 arcsin(1/8))/(4π), 1/3)`.
pub fn i_rot() -> OpenInterval {
    let lo = (std::f64::consts::PI - 2.0 * (0.125_f64).asin()) / (4.0 * std::f64::consts::PI);
    OpenInterval::new(Endpoint::Approx(lo), Endpoint::Exact { num: 1, den: 3 })
        .expect("well ordered")
}

/// The companion interval for odd periods on the separating surface:
/// `(arcsin(3/4)/(2π), 1/6)`.
pub fn j_rot() -> OpenInterval {
    let lo = (0.75_f64).asin() / std::f64::consts::TAU;
    OpenInterval::new(Endpoint::Approx(lo), Endpoint::Exact { num: 1, den: 6 })
        .expect("well ordered")
}

/// Which exponent threshold the cover uses: the statement's `4/(b − a)`, or
/// the worked example's `3/(b − a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMode {
    Strict4,
    Published3,
}

/// Prime gap-cover data for an interval: all denominators outside the
/// candidate set certainly admit an irreducible fraction inside the
/// interval, and so does everything above the bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapCover {
    /// Smallest prime exceeding `3/(b − a)`.
    pub p_next: u64,
    /// All primes below `p_next`.
    pub primes: Vec<u64>,
    /// Minimal exponents with `p^s` above the threshold.
    pub exponents: Vec<u32>,
    /// `Π p_i^{s_i − 1}`, the largest candidate (exact; it overflows
    /// machine words for narrow intervals).
    pub bound: BigUint,
}

impl GapCover {
    /// Number of members of the candidate set, `Π s_i`.
    pub fn candidate_count(&self) -> BigUint {
        self.exponents
            .iter()
            .fold(BigUint::from(1u32), |acc, &s| acc * BigUint::from(s))
    }

    /// Whether `r` belongs to the candidate set: every prime power in `r`
    /// is `p_i^{t}` with `p_i` a cover prime and `t < s_i`.
    pub fn contains(&self, r: u64) -> bool {
        let mut rest = r;
        for (&p, &s) in self.primes.iter().zip(&self.exponents) {
            let mut t = 0u32;
            while rest % p == 0 {
                rest /= p;
                t += 1;
            }
            if t >= s {
                return false;
            }
        }
        rest == 1
    }

    /// All candidate-set members `≤ cap`, sorted.
    pub fn candidates_up_to(&self, cap: u64) -> Vec<u64> {
        let mut out = vec![1u64];
        for (&p, &s) in self.primes.iter().zip(&self.exponents) {
            let mut next = Vec::with_capacity(out.len());
            for &c in &out {
                let mut v = c;
                for _ in 0..s {
                    if v > cap {
                        break;
                    }
                    next.push(v);
                    match v.checked_mul(p) {
                        Some(w) => v = w,
                        None => break,
                    }
                }
            }
            next.sort_unstable();
            out = next;
        }
        out
    }

    /// The full candidate set, when small enough to materialize (the bound
    /// must fit a machine word and the member count stay moderate).
    pub fn full_candidate_set(&self) -> Option<Vec<u64>> {
        if self.candidate_count() > BigUint::from(MATERIALIZE_LIMIT) {
            return None;
        }
        let cap: u64 = self.bound.clone().try_into().ok()?;
        Some(self.candidates_up_to(cap))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Build the gap cover of the interval.
pub fn gap_cover(interval: &OpenInterval, mode: ThresholdMode) -> Result<GapCover> {
    let width = interval.width();
    if !(width > 0.0 && width < 1.0) {
        return Err(Error::Domain(format!(
            "gap cover needs an interval width in (0, 1), got {width}"
        )));
    }
    let base = 3.0 / width;
    let mut p_next = (base.floor() as u64).max(2) + 1;
    while !is_prime(p_next) {
        p_next += 1;
    }
    let primes: Vec<u64> = (2..p_next).filter(|&n| is_prime(n)).collect();
    let threshold = match mode {
        ThresholdMode::Strict4 => 4.0 / width,
        ThresholdMode::Published3 => 3.0 / width,
    };
    let exponents: Vec<u32> = primes
        .iter()
        .map(|&p| {
            let mut s = 1u32;
            let mut pow = p as f64;
            while pow <= threshold {
                s += 1;
                pow *= p as f64;
            }
            s
        })
        .collect();
    let bound = primes
        .iter()
        .zip(&exponents)
        .fold(BigUint::from(1u32), |acc, (&p, &s)| {
            acc * BigUint::from(p).pow(s - 1)
        });
    Ok(GapCover {
        p_next,
        primes,
        exponents,
        bound,
    })
}

/// Smallest numerator `q` coprime to `r` with `q/r` inside the interval, if
/// any; exhaustive over the integers in `(lo·r, hi·r)`.
pub fn has_irreducible_fraction(r: u64, interval: &OpenInterval) -> Option<u64> {
    let lo = interval.lo.value();
    let hi = interval.hi.value();
    let q_min = ((lo * r as f64).floor() as i64 - 1).max(0);
    let q_max = (hi * r as f64).ceil() as i64 + 1;
    for q in q_min..=q_max {
        if q > 0 && interval.contains_fraction(q, r as i64) && gcd(q as u64, r) == 1 {
            return Some(q as u64);
        }
    }
    None
}

/// Denominators admitting no irreducible fraction inside the interval.
///
/// Outside the strict-mode candidate set the cover theorem guarantees a
/// fraction, and that guarantee is re-checked by direct scan up to 10⁴.
/// When the candidate set is small enough to enumerate in full the result
/// is exact over all denominators; for very narrow intervals (astronomical
/// candidate sets) candidates are checked up to a 10⁸ value cap.
pub fn excluded_denominators(interval: &OpenInterval) -> Result<Vec<u64>> {
    let cover = gap_cover(interval, ThresholdMode::Strict4)?;
    let candidates = cover
        .full_candidate_set()
        .unwrap_or_else(|| cover.candidates_up_to(VALUE_CAP));
    let excluded: Vec<u64> = candidates
        .iter()
        .copied()
        .filter(|&r| has_irreducible_fraction(r, interval).is_none())
        .collect();
    // Cross-scan: nothing outside the candidate set may fail.
    for r in 1..=10_000u64 {
        if !cover.contains(r) && has_irreducible_fraction(r, interval).is_none() {
            return Err(Error::NoConvergence(format!(
                "cover guarantee violated: denominator {r} admits no fraction"
            )));
        }
    }
    Ok(excluded)
}

/// Even periods not guaranteed by the rotation interval: twice the excluded
/// denominators, minus 2 (the two-periodic curve provides period 2).
pub fn excluded_even_periods() -> Result<Vec<u64>> {
    let excluded = excluded_denominators(&i_rot())?;
    Ok(excluded
        .into_iter()
        .map(|r| 2 * r)
        .filter(|&n| n != 2)
        .collect())
}

/// The cover bound for the parameter-specific rotation interval between 1/4
/// and the extremal even-period limit: every larger denominator admits a
/// two-periodic continuum of that period.
pub fn q0_for_a(params: &Params) -> Result<BigUint> {
    let a = params.a();
    if (a - 1.0).abs() < 1e-12 {
        return Err(Error::Domain(
            "the interval is empty at a = 1 (everything is periodic)".into(),
        ));
    }
    let rho = map::rho_a(params);
    let quarter = Endpoint::Exact { num: 1, den: 4 };
    let interval = if a > 1.0 {
        OpenInterval::new(quarter, Endpoint::Approx(rho))?
    } else {
        OpenInterval::new(Endpoint::Approx(rho), quarter)?
    };
    Ok(gap_cover(&interval, ThresholdMode::Strict4)?.bound)
}
