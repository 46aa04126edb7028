use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::Family;
use crate::exact::rational::{frac_str, uint_str, Rational};

/// Which part of the ambient level a thinned level keeps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Selector {
    /// Centers `r/m` with `r = h (mod q)` (families E, G).
    Residue {
        #[serde(with = "uint_str")]
        h: BigUint,
    },
    /// Denominators kept from a pool of primes in `(m, 2m)` (family F);
    /// the fan-out is equalized over every `q`-subset of the pool, which
    /// defaults to all of them.
    Primes {
        primes: Vec<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pool: Option<Vec<u64>>,
    },
    /// Every prime in `(m, 2m)` (family EJ).
    AllPrimes,
}

/// Caller-chosen parameters of one new level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelInput {
    #[serde(with = "uint_str")]
    pub m: BigUint,
    #[serde(with = "frac_str")]
    pub a: Rational,
    #[serde(with = "uint_str")]
    pub q: BigUint,
    pub selector: Selector,
}

/// One built level. `radius_lo` builds the intervals, `radius_hi` certifies
/// the gaps; for F and EJ they bound every `p^{-a}` with `m < p < 2m`, for
/// G they are the half-length `1/(2m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub k: usize,
    pub family: Family,
    #[serde(with = "uint_str")]
    pub m: BigUint,
    #[serde(with = "frac_str")]
    pub a: Rational,
    #[serde(with = "frac_str")]
    pub radius_lo: Rational,
    #[serde(with = "frac_str")]
    pub radius_hi: Rational,
    #[serde(with = "uint_str")]
    pub q: BigUint,
    pub selector: Selector,
    #[serde(with = "uint_str")]
    pub i_k: BigUint,
    #[serde(with = "frac_str")]
    pub g_k: Rational,
    pub per_parent_rule: String,
}

impl LevelSpec {
    pub fn input(&self) -> LevelInput {
        LevelInput {
            m: self.m.clone(),
            a: self.a.clone(),
            q: self.q.clone(),
            selector: self.selector.clone(),
        }
    }

    pub fn residue(&self) -> Option<&BigUint> {
        match &self.selector {
            Selector::Residue { h } => Some(h),
            _ => None,
        }
    }
}

pub const KEEP_RULE: &str = "keep the i_k children with smallest centers";
