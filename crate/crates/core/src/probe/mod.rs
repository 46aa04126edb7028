//! Sampling from the uniform measure and continued-fraction statistics.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::interval::Interval;
use crate::exact::pow::log_ratio_enclosure;
use crate::exact::rational::{abs, frac_str, from_uint, int, uint_str, Rational};
use crate::family::Construction;

/// Fractional bits of every log enclosure in the probe.
pub const LOG_BITS: u32 = 48;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub seed: u64,
    pub chain: Vec<Interval>,
    #[serde(with = "crate::exact::rational::uint_vec")]
    pub indices: Vec<BigUint>,
    #[serde(with = "frac_str")]
    pub representative: Rational,
    #[serde(with = "frac_str")]
    pub trust_radius: Rational,
}

/// Seeded walk choosing a uniform child at every level down to `depth`.
pub fn sample_point(c: &Construction, depth: usize, seed: u64) -> SamplePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = BigUint::zero();
    let mut chain = Vec::with_capacity(depth);
    let mut indices = Vec::with_capacity(depth);
    for k in 1..=depth {
        let n = &c.level(k).i_k;
        let child = rng.gen_biguint_below(n);
        idx = idx * n + child;
        chain.push(c.interval_at(k, &idx));
        indices.push(idx.clone());
    }
    let last = chain.last().cloned().unwrap_or_else(Interval::unit);
    SamplePoint {
        seed,
        representative: last.center(),
        trust_radius: last.len() / int(2),
        chain,
        indices,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    #[serde(with = "uint_str")]
    pub p: BigUint,
    #[serde(with = "uint_str")]
    pub q: BigUint,
    /// Enclosure of `log(1/|x - p/q|) / log q`; absent for `q = 1` or an
    /// exact hit.
    pub z: Option<(String, String)>,
    pub trusted: bool,
}

/// Partial quotients and convergents of `x` in `[0, 1]` by the Euclidean
/// algorithm, at most `max_terms` of each.
pub fn cf_convergents(x: &Rational, max_terms: usize) -> (Vec<BigUint>, Vec<(BigUint, BigUint)>) {
    let (mut n, mut d) = (x.numer().magnitude().clone(), x.denom().magnitude().clone());
    let mut quotients = Vec::new();
    let mut conv = Vec::new();
    let (mut p0, mut q0) = (BigUint::zero(), BigUint::one());
    let (mut p1, mut q1) = (BigUint::one(), BigUint::zero());
    while !d.is_zero() && quotients.len() < max_terms {
        let (a, r) = n.div_rem(&d);
        let p = &a * &p1 + &p0;
        let q = &a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p.clone());
        q0 = std::mem::replace(&mut q1, q.clone());
        quotients.push(a);
        conv.push((p, q));
        n = std::mem::replace(&mut d, r);
    }
    (quotients, conv)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStat {
    pub level: usize,
    #[serde(with = "frac_str")]
    pub delta: Rational,
    #[serde(with = "frac_str")]
    pub rho: Rational,
    pub contained: bool,
    pub exact_hit: bool,
    pub zeta: Option<(String, String)>,
    /// Exact lower end of the `zeta` enclosure.
    #[serde(skip)]
    pub zeta_lo: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub seed: u64,
    pub levels: Vec<LevelStat>,
    pub convergents: Vec<Convergent>,
}

impl ProbeResult {
    pub fn trusted_count(&self) -> usize {
        self.convergents.iter().filter(|c| c.trusted).count()
    }
}

fn enclosure_strings(e: &crate::exact::Enclosure) -> (String, String) {
    (crate::exact::rational::fmt_fraction(&e.lo), crate::exact::rational::fmt_fraction(&e.hi))
}

/// Exponent statistics of the convergents of `x` with the given trust
/// radius: a convergent is trusted when `q^2 r < 1/2`.
pub fn convergent_stats(x: &Rational, trust_radius: &Rational, max_terms: usize) -> Vec<Convergent> {
    let (_, conv) = cf_convergents(x, max_terms);
    let (xn, xd) = (x.numer().magnitude(), x.denom().magnitude());
    let (rn, rd) = (trust_radius.numer().magnitude(), trust_radius.denom().magnitude());
    conv.into_iter()
        .map(|(p, q)| {
            // |x - p/q| = |xn q - p xd| / (xd q), left unreduced
            let (a, b) = (xn * &q, &p * xd);
            let num = if a >= b { a - b } else { b - a };
            let z = if q.is_one() || num.is_zero() {
                None
            } else {
                let inv = Rational::new_raw((xd * &q).into(), num.into());
                Some(enclosure_strings(&log_ratio_enclosure(&inv, &from_uint(&q), LOG_BITS)))
            };
            let trusted = (&q * &q * rn) * 2u32 < *rd;
            Convergent { p, q, z, trusted }
        })
        .collect()
}

pub const MAX_TERMS: usize = 4096;

/// Per-level distance to the chain centers and the convergent statistics
/// of the representative.
pub fn exponent_estimate(s: &SamplePoint, c: &Construction) -> ProbeResult {
    let x = &s.representative;
    let levels = s
        .chain
        .iter()
        .enumerate()
        .map(|(i, iv)| {
            let k = i + 1;
            let delta = abs(&(x - iv.center()));
            let rho = iv.len() / int(2);
            let m = from_uint(&c.level(k).m);
            let (zeta, zeta_lo) = if delta.is_zero() {
                (None, None)
            } else {
                let e = log_ratio_enclosure(&delta.recip(), &m, LOG_BITS);
                (Some(enclosure_strings(&e)), Some(e.lo))
            };
            LevelStat {
                level: k,
                contained: delta <= rho,
                exact_hit: delta.is_zero(),
                delta,
                rho,
                zeta,
                zeta_lo,
            }
        })
        .collect();
    ProbeResult {
        seed: s.seed,
        levels,
        convergents: convergent_stats(x, &s.trust_radius, MAX_TERMS),
    }
}

/// `F_n / F_{n+1}`.
pub fn fibonacci_ratio(n: usize) -> Rational {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let t = &a + &b;
        a = std::mem::replace(&mut b, t);
    }
    let r = Rational::new(a, b);
    debug_assert!(!r.is_negative());
    r
}
