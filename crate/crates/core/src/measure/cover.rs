use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::pow::rational_pow_enclosure;
use crate::exact::rational::{frac_str, from_uint, int, Rational};
use crate::exact::{Enclosure, PowerProduct};
use crate::family::radius::radius;
use crate::family::{Construction, Family, ENUM_CAP};

pub const COVER_PRECISION: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringSum {
    pub level: usize,
    #[serde(with = "frac_str")]
    pub beta: Rational,
    #[serde(with = "frac_str")]
    pub lo: Rational,
    #[serde(with = "frac_str")]
    pub hi: Rational,
}

fn scaled(n: &BigUint, e: &Enclosure) -> (Rational, Rational) {
    let n = from_uint(n);
    (&n * &e.lo, n * &e.hi)
}

/// Enclosure of the sum over level-`k` intervals of `length^beta`, with
/// lengths taken at the enlarged radius.
pub fn covering_sum(c: &Construction, k: usize, beta: &Rational) -> Result<CoveringSum> {
    let spec = c.level(k);
    let (lo, hi) = match c.family {
        Family::E | Family::G => {
            let (l, h) = (int(2) * &spec.radius_lo, int(2) * &spec.radius_hi);
            let el = rational_pow_enclosure(&l, beta, COVER_PRECISION)?;
            let eh = rational_pow_enclosure(&h, beta, COVER_PRECISION)?;
            (scaled(c.level_count(k), &el).0, scaled(c.level_count(k), &eh).1)
        }
        Family::F | Family::EJ => {
            let mut by_p: BTreeMap<BigUint, u64> = BTreeMap::new();
            for iv in c.enumerate(k, ENUM_CAP)? {
                let p = iv.center().denom().magnitude().clone();
                *by_p.entry(p).or_default() += 1;
            }
            let (mut lo, mut hi) = (int(0), int(0));
            for (p, n) in by_p {
                let r = radius(&p, &spec.a)?;
                let el = rational_pow_enclosure(&(int(2) * &r.lo), beta, COVER_PRECISION)?;
                let eh = rational_pow_enclosure(&(int(2) * &r.hi), beta, COVER_PRECISION)?;
                let n = int(n.to_u64().unwrap_or(0));
                lo += &n * el.lo;
                hi += n * eh.hi;
            }
            (lo, hi)
        }
    };
    Ok(CoveringSum {
        level: k,
        beta: beta.clone(),
        lo,
        hi,
    })
}

/// Closed-form upper bound on the level-`k` covering sum: `2^β m^{-(β - b')}`
/// (E), `4 2^β m^{-a(β - b')}` (F), `m^{-(β - 2b')}` (G), with
/// `b' = b_{k+2}`.
pub fn covering_bound(family: Family, m: &BigUint, a: &Rational, beta: &Rational, b_next2: &Rational) -> Result<Enclosure> {
    let two = BigUint::from(2u32);
    let p = match family {
        Family::E | Family::EJ => PowerProduct::new(int(1))
            .times(&two, beta.clone())
            .times(m, b_next2 - beta),
        Family::F => PowerProduct::new(int(4))
            .times(&two, beta.clone())
            .times(m, a * (b_next2 - beta)),
        Family::G => PowerProduct::new(int(1)).times(m, int(2) * b_next2 - beta),
    };
    p.enclosure(COVER_PRECISION)
}
