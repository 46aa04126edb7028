use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::exact::interval::Interval;
use crate::exact::pow::pow_enclosure;
use crate::exact::rational::{fmt_fraction, int, rat, Rational};
use crate::exact::{Enclosure, PowerProduct, Sieve};

/// `G_p(a)`: intervals of radius `p^{-a}` around `r/p`, `0 < r < p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GpFamily {
    pub p: u64,
    pub radius: Enclosure,
    /// Admissible numerators `r_min..=r_max`.
    pub r_min: u64,
    pub r_max: u64,
}

impl GpFamily {
    pub fn count(&self) -> u64 {
        self.r_max + 1 - self.r_min
    }

    /// Shrunk interval around `r/p`.
    pub fn interval(&self, r: u64) -> Interval {
        Interval::centered(&rat(r as i64, self.p as i64), &self.radius.lo)
    }

    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        (self.r_min..=self.r_max).map(|r| self.interval(r))
    }
}

/// `G_p(a)` restricted to the open interval `(p^{-a}, 1 - p^{-a})`.
pub fn build_g_p(p: u64, a: &Rational, precision: u32) -> Result<GpFamily> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("G_p needs p >= 2, got {p}")));
    }
    let pb = BigUint::from(p);
    let rad = pow_enclosure(&pb, &-a, precision)?;
    // disjointness: 2 p^{-a} < 1/p
    if int(2) * &rad.hi >= rat(1, p as i64) {
        return Err(Error::Family(format!(
            "G_p intervals overlap for p = {p}, a = {}",
            fmt_fraction(a)
        )));
    }
    // with 2 rho < 1/p every 0 < r < p clears the margin rho on both sides
    Ok(GpFamily {
        p,
        radius: rad,
        r_min: 1,
        r_max: p - 1,
    })
}

/// `K_M(a)`: the union of `G_p(a)` over primes `M < p < 2M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KFamily {
    pub big_m: u64,
    pub members: Vec<GpFamily>,
    /// Certified lower bound `1/(8M^2)` on gaps between distinct intervals.
    pub gap_bound: Rational,
}

impl KFamily {
    pub fn primes(&self) -> Vec<u64> {
        self.members.iter().map(|g| g.p).collect()
    }

    pub fn count(&self) -> u64 {
        self.members.iter().map(GpFamily::count).sum()
    }

    /// All intervals sorted by center, tagged with their prime.
    pub fn sorted_intervals(&self) -> Vec<(u64, Interval)> {
        let mut v: Vec<(u64, Interval)> = self
            .members
            .iter()
            .flat_map(|g| g.intervals().map(move |iv| (g.p, iv)))
            .collect();
        v.sort_by(|x, y| x.1.center().cmp(&y.1.center()));
        v
    }
}

/// Least integer `M >= 2` with `M^{a-2} >= 16`.
pub fn min_admissible_m(a: &Rational) -> Option<u64> {
    if *a <= int(2) {
        return None;
    }
    let ok = |m: u64| {
        !PowerProduct::new(int(1))
            .times(&BigUint::from(m), a - int(2))
            .lt(&int(16))
    };
    let mut hi = 2u64;
    while !ok(hi) {
        hi = hi.checked_mul(2)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi.max(2))
}

pub fn build_k(big_m: u64, a: &Rational, sieve: &Sieve) -> Result<KFamily> {
    let ok = !PowerProduct::new(int(1))
        .times(&BigUint::from(big_m), a - int(2))
        .lt(&int(16));
    if !ok {
        let hint = min_admissible_m(a)
            .map(|m| format!("; least admissible M is {m}"))
            .unwrap_or_default();
        return Err(Error::Family(format!(
            "K_M(a) needs M^(a-2) >= 16, got M = {big_m}, a = {}{hint}",
            fmt_fraction(a)
        )));
    }
    build_k_unchecked(big_m, a, sieve)
}

/// `K_M(a)` without the `M^{a-2} >= 16` precondition. The gap bound is then
/// only a target; `certify_k_gaps` decides it pair by pair.
pub fn build_k_unchecked(big_m: u64, a: &Rational, sieve: &Sieve) -> Result<KFamily> {
    let primes = sieve.primes_in(big_m, 2 * big_m)?;
    let members = primes
        .iter()
        .map(|&p| build_g_p(p, a, super::radius::RADIUS_PRECISION))
        .collect::<Result<Vec<_>>>()?;
    Ok(KFamily {
        big_m,
        members,
        gap_bound: rat(1, 8 * (big_m as i64) * (big_m as i64)),
    })
}

/// Gap check for `K_M(a)` using enlarged radii: returns the number of
/// adjacent pairs (hence of all pairs) whose gap falls below the bound and
/// the smallest certified gap.
pub fn certify_k_gaps(k: &KFamily) -> (usize, Rational) {
    let v = k.sorted_intervals();
    let rad_hi = |p: u64| &k.members.iter().find(|g| g.p == p).unwrap().radius.hi;
    let mut failures = 0;
    let mut min_gap: Option<Rational> = None;
    for w in v.windows(2) {
        let (c1, c2) = (w[0].1.center(), w[1].1.center());
        let g = c2 - c1 - rad_hi(w[0].0) - rad_hi(w[1].0);
        if g < k.gap_bound {
            failures += 1;
        }
        if min_gap.as_ref().map_or(true, |m| &g < m) {
            min_gap = Some(g);
        }
    }
    (failures, min_gap.unwrap_or_else(|| int(1)))
}
