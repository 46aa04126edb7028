use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::rational::{fmt_fraction, frac_str, Rational};
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "frac_str")]
    pub lo: Rational,
    #[serde(with = "frac_str")]
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "interval endpoints out of order: [{}, {}]",
                fmt_fraction(&lo),
                fmt_fraction(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval {
            lo: Rational::zero(),
            hi: Rational::from_integer(1.into()),
        }
    }

    pub fn centered(c: &Rational, r: &Rational) -> Self {
        Interval {
            lo: c - r,
            hi: c + r,
        }
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn center(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    /// Closed intersection test; touching endpoints count.
    pub fn meets(&self, other: &Interval) -> bool {
        self.hi >= other.lo && other.hi >= self.lo
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        (lo <= hi).then(|| Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        })
    }

    pub fn clip_unit(&self) -> Option<Interval> {
        self.intersect(&Interval::unit())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_fraction(&self.lo), fmt_fraction(&self.hi))
    }
}

/// Distance between the nearest endpoints of two disjoint intervals; zero
/// when they touch. Overlapping intervals are an error.
pub fn gap(i: &Interval, j: &Interval) -> Result<Rational> {
    let (a, b) = if i.lo <= j.lo { (i, j) } else { (j, i) };
    if a.hi > b.lo {
        return Err(Error::Overlap(a.to_string(), b.to_string()));
    }
    Ok(&b.lo - &a.hi)
}

/// Merges overlapping or touching intervals into a sorted disjoint list.
pub fn union_normalize(mut xs: Vec<Interval>) -> Vec<Interval> {
    xs.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    let mut out: Vec<Interval> = Vec::with_capacity(xs.len());
    for x in xs {
        match out.last_mut() {
            Some(last) if x.lo <= last.hi => {
                if x.hi > last.hi {
                    last.hi = x.hi;
                }
            }
            _ => out.push(x),
        }
    }
    out
}
