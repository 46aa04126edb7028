use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mu::mu;
use crate::exact::interval::Interval;
use crate::exact::rational::{frac_str, int, Rational};
use crate::family::Construction;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum MassStatus {
    Pass,
    Fail,
    Skipped { reason: String },
}

/// One comparison `mu(I)^v < |I|^u` with `b_k = u/v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassCheck {
    pub level: usize,
    pub interval: Interval,
    #[serde(with = "frac_str")]
    pub b_k: Rational,
    #[serde(with = "frac_str")]
    pub mu: Rational,
    #[serde(flatten)]
    pub status: MassStatus,
}

/// Lengths `[lower, upper]` at which the level-`k` bound is tested:
/// `upper = g_{k-1}`, `lower = g_k` (or `g_K` at the
/// deepest level), below which a deeper level takes over.
pub fn scale_window(c: &Construction, k: usize) -> Option<(Rational, Rational)> {
    if k < 2 || k > c.depth() {
        return None;
    }
    Some((c.level(k).g_k.clone(), c.level(k - 1).g_k.clone()))
}

/// `x^v < y^u` for positive rationals.
pub fn pow_lt(x: &Rational, v: u32, y: &Rational, u: u32) -> bool {
    if x.is_zero() {
        return !y.is_zero() || u == 0;
    }
    let (xn, xd) = (x.numer().magnitude(), x.denom().magnitude());
    let (yn, yd) = (y.numer().magnitude(), y.denom().magnitude());
    xn.pow(v) * yd.pow(u) < yn.pow(u) * xd.pow(v)
}

fn parts(b: &Rational) -> (u32, u32) {
    let u = b.numer().to_u32().expect("small exponent numerator");
    let v = b.denom().to_u32().expect("small exponent denominator");
    (u, v)
}

/// Checks `mu(I) < |I|^{b_k}` at the deepest level for every `I` inside
/// the level-`k` scale window; the others are skipped.
pub fn verify_mass_distribution(c: &Construction, k: usize, b_k: &Rational, tests: &[Interval]) -> Vec<MassCheck> {
    let window = scale_window(c, k);
    let (u, v) = parts(b_k);
    tests
        .iter()
        .map(|iv| {
            let len = iv.len();
            let skip = match &window {
                None => Some(format!("no scale window at level {k}")),
                Some((lo, _)) if len < *lo => Some(format!("|I| below g_{k}")),
                Some((_, hi)) if len > *hi => Some(format!("|I| above g_{}", k - 1)),
                _ => None,
            };
            let m = mu(c, iv, c.depth());
            let status = match skip {
                Some(reason) => MassStatus::Skipped { reason },
                None if pow_lt(&m, v, &len, u) => MassStatus::Pass,
                None => MassStatus::Fail,
            };
            MassCheck {
                level: k,
                interval: iv.clone(),
                b_k: b_k.clone(),
                mu: m,
                status,
            }
        })
        .collect()
}

/// `floor(log2 x)` for positive `x`.
pub fn floor_log2(x: &Rational) -> i64 {
    let (n, d) = (x.numer().magnitude(), x.denom().magnitude());
    let mut e = n.bits() as i64 - d.bits() as i64;
    // 2^e <= x < 2^(e+1) after at most one correction
    let two_e = if e >= 0 { int(BigUint::from(1u32) << e as u64) } else { int(BigUint::from(1u32) << (-e) as u64).recip() };
    if *x < two_e {
        e -= 1;
    }
    e
}

/// Dyadic `[j/2^n, (j+1)/2^n]` containing `x`.
pub fn dyadic_at(x: &Rational, n: u64) -> Interval {
    let scale = int(BigUint::from(1u32) << n);
    let j = crate::exact::rational::floor(&(x * &scale));
    let j = if j.is_negative() { Zero::zero() } else { j };
    let lo = Rational::from_integer(j.clone()) / &scale;
    let hi = Rational::from_integer(j + 1) / &scale;
    Interval::new(lo, hi).expect("ordered")
}

/// In-window dyadic test intervals for level `k`: at up to `scales`
/// evenly spread exponents, the dyadic cells containing the left ends of
/// the first, middle and last level-`k` intervals and the centers of a
/// few level-`(k-1)` intervals, plus `random` seeded cells.
pub fn dyadic_sweep(c: &Construction, k: usize, scales: usize, random: usize, seed: u64) -> Vec<Interval> {
    let Some((lo, hi)) = scale_window(c, k) else {
        return Vec::new();
    };
    let n_min = (-floor_log2(&hi)).max(0) as u64;
    let n_max = -(floor_log2(&lo)) as u64 - 1;
    if n_max < n_min {
        return Vec::new();
    }
    let steps = scales.max(1) as u64;
    let div = (steps - 1).max(1);
    let mut ns: Vec<u64> = (0..steps).map(|i| n_min + (n_max - n_min) * i / div).collect();
    ns.push(n_max);
    ns.sort_unstable();
    ns.dedup();
    let nk = c.level_count(k).clone();
    let np = c.level_count(k - 1).clone();
    let mut anchors: Vec<Rational> = [BigUint::zero(), &nk / 2u32, &nk - 1u32]
        .iter()
        .map(|i| c.interval_at(k, i).lo)
        .collect();
    for i in [BigUint::zero(), &np / 3u32, &np - 1u32] {
        anchors.push(c.interval_at(k - 1, &i).center());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &n in &ns {
        for x in &anchors {
            out.push(dyadic_at(x, n));
        }
        for _ in 0..random {
            let j: u64 = rng.gen();
            let x = Rational::new(j.into(), (BigUint::from(1u32) << 64u32).into());
            out.push(dyadic_at(&x, n));
        }
    }
    out.retain(|iv| iv.len() >= lo && iv.len() <= hi);
    out
}
