use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::Result;
use crate::exact::pow::pow_enclosure;
use crate::exact::rational::{floor, from_uint, int, to_uint, Rational};
use crate::exact::Enclosure;

/// Relative precision of every radius bound `m^{-a}`.
pub const RADIUS_PRECISION: u32 = 64;

/// Directed enclosure of `m^{-a}`. Intervals are built with the lower end
/// (shrunk) and gaps are certified with the upper end (enlarged).
pub fn radius(m: &BigUint, a: &Rational) -> Result<Enclosure> {
    pow_enclosure(m, &-a, RADIUS_PRECISION)
}

/// Least number of integers in any closed real interval of length `w`.
pub fn min_integers(w: &Rational) -> BigUint {
    if *w < Rational::zero() {
        return BigUint::zero();
    }
    to_uint(&floor(w)).unwrap_or_default()
}

/// Children per parent for a residue progression: the minimum over parent
/// positions and residues of the number of `r = h (mod q)` with
/// `[r/m - rho, r/m + rho]` inside a parent of length `parent_len`. The unit
/// parent is exact: `r` runs over `ceil(rho m)..=floor((1 - rho) m)`.
pub fn progression_fanout(
    unit_parent: bool,
    parent_len: &Rational,
    m: &BigUint,
    q: &BigUint,
    rho: &Rational,
) -> BigUint {
    let mq = from_uint(m);
    let n = if unit_parent {
        let lo = crate::exact::rational::ceil(&(rho * &mq));
        let hi = floor(&((int(1) - rho) * &mq));
        to_uint(&(hi - lo + 1)).unwrap_or_default()
    } else {
        min_integers(&((parent_len - int(2) * rho) * &mq))
    };
    n / q
}
