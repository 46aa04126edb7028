use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::interval::{union_normalize, Interval};
use crate::exact::pow::{pow_enclosure, rational_pow_enclosure};
use crate::exact::rational::{fmt_fraction, frac_str, from_uint, int, rat, Rational};
use crate::family::Construction;

use super::mu::{first_reaching, last_within};

/// `B(d1, d2, a*)`: intervals of radius `q^{-a*}` around every `p/q` with
/// `d1 <= q <= d2`; `d2 = None` is the infinite union.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BSetSpec {
    pub d1: u64,
    pub d2: Option<u64>,
    #[serde(with = "frac_str")]
    pub a_star: Rational,
}

pub const BSET_CAP: usize = 2_000_000;

/// All intervals of a finite B-set, clipped to `[0, 1]`, at the enlarged
/// radius. Non-reduced `p/q` are listed too.
pub fn b_set_enumerate(spec: &BSetSpec) -> Result<Vec<Interval>> {
    let Some(d2) = spec.d2 else {
        return Err(Error::Measure("B(d, inf, a*) has no finite listing; use tail_sum_bound".into()));
    };
    let mut out = Vec::new();
    if spec.d1 > d2 {
        return Ok(out);
    }
    let total: u128 = (spec.d1 as u128..=d2 as u128).map(|q| q + 1).sum();
    if total > BSET_CAP as u128 {
        return Err(Error::capacity("measure", format!("B-set holds {total} intervals, cap is {BSET_CAP}")));
    }
    for q in spec.d1.max(1)..=d2 {
        let r = if q == 1 {
            int(1)
        } else {
            pow_enclosure(&BigUint::from(q), &-&spec.a_star, 64)?.hi
        };
        for p in 0..=q {
            let c = rat(p as i64, q as i64);
            let iv = Interval::new(&c - &r, &c + &r)?;
            out.push(iv.clip_unit().expect("center in [0, 1]"));
        }
    }
    Ok(out)
}

/// Enclosure of `sum_{j >= d} j / (2j)^{alpha_bar}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailSum {
    pub d: u64,
    #[serde(with = "frac_str")]
    pub alpha_bar: Rational,
    /// Terms up to `cut` are summed, the rest bounded by integrals.
    pub cut: u64,
    #[serde(with = "frac_str")]
    pub lo: Rational,
    #[serde(with = "frac_str")]
    pub hi: Rational,
}

impl TailSum {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Fixed-point bits of each summed term.
const TERM_BITS: u64 = 64;
/// Default target `2^-21` for the integral tail beyond the cut.
pub const TAIL_LOG2: u32 = 21;

/// `floor` and `ceil` of `2^TERM_BITS j^{-e}` for `e = u/v`.
fn term(j: u64, u: u32, v: u32) -> (BigUint, BigUint) {
    let num = BigUint::one() << (TERM_BITS * v as u64);
    let den = BigUint::from(j).pow(u);
    let t = &num / &den;
    let lo = if v == 1 { t } else { t.nth_root(v) };
    let exact = lo.pow(v) * &den == num;
    let hi = if exact { lo.clone() } else { &lo + 1u32 };
    (lo, hi)
}

struct Tail {
    u: u32,
    v: u32,
    tail_log2: u32,
    alpha_bar: Rational,
    scale: Rational,
}

impl Tail {
    fn new(alpha_bar: &Rational, tail_log2: u32) -> Result<Tail> {
        if *alpha_bar <= int(2) {
            return Err(Error::Divergent(fmt_fraction(alpha_bar)));
        }
        let e = alpha_bar - int(1);
        let u = e.numer().to_u32().ok_or_else(|| Error::Measure("exponent too large".into()))?;
        let v = e.denom().to_u32().ok_or_else(|| Error::Measure("exponent too large".into()))?;
        Ok(Tail {
            u,
            v,
            tail_log2,
            alpha_bar: alpha_bar.clone(),
            scale: from_uint(&(BigUint::one() << TERM_BITS)),
        })
    }

    /// Enclosure of `sum_{j > n} j^{1-ab}` by the two integrals.
    fn integral(&self, n: u64) -> Result<(Rational, Rational)> {
        let e = int(2) - &self.alpha_bar;
        let k = (&self.alpha_bar - int(2)).recip();
        let lo = pow_enclosure(&BigUint::from(n + 1), &e, 64)?.lo * &k;
        let hi = pow_enclosure(&BigUint::from(n), &e, 64)?.hi * k;
        Ok((lo, hi))
    }

    fn cut(&self, d: u64) -> Result<u64> {
        let target = from_uint(&(BigUint::one() << self.tail_log2)).recip();
        let two = rational_pow_enclosure(&int(2), &-&self.alpha_bar, 64)?.hi;
        let ab = self.alpha_bar.to_f64().unwrap_or(3.0);
        let guess = ((2f64.powi(self.tail_log2 as i32) * 2f64.powf(-ab)) / (ab - 2.0)).powf(1.0 / (ab - 2.0));
        let mut j = (guess.ceil() as u64).max(1);
        while j > 1 && &two * self.integral(j - 1)?.1 <= target {
            j -= 1;
        }
        while &two * self.integral(j)?.1 > target {
            j += 1;
        }
        Ok(j.max(d))
    }

    fn enclose(&self, d: u64) -> Result<TailSum> {
        let cut = self.cut(d)?;
        let (mut lo, mut hi) = (BigUint::zero(), BigUint::zero());
        for j in d..=cut {
            let (l, h) = term(j, self.u, self.v);
            lo += l;
            hi += h;
        }
        let (tl, th) = self.integral(cut)?;
        let two = rational_pow_enclosure(&int(2), &-&self.alpha_bar, 64)?;
        Ok(TailSum {
            d,
            alpha_bar: self.alpha_bar.clone(),
            cut,
            lo: two.lo * (from_uint(&lo) / &self.scale + tl),
            hi: two.hi * (from_uint(&hi) / &self.scale + th),
        })
    }
}

pub fn tail_sum_bound(d: u64, alpha_bar: &Rational) -> Result<TailSum> {
    tail_sum_bound_at(d, alpha_bar, TAIL_LOG2)
}

/// `tail_sum_bound` with the integral tail pushed below `2^-tail_log2`.
pub fn tail_sum_bound_at(d: u64, alpha_bar: &Rational, tail_log2: u32) -> Result<TailSum> {
    if d == 0 {
        return Err(Error::InvalidArgument("tail sum starts at d >= 1".into()));
    }
    Tail::new(alpha_bar, tail_log2)?.enclose(d)
}

/// Least `d >= from` whose tail upper bound is below `budget` and which
/// satisfies `extra`. Bounds for successive `d` are obtained by
/// subtracting directed term bounds from the first enclosure.
pub fn least_d(from: u64, alpha_bar: &Rational, budget: &Rational, extra: impl Fn(u64) -> bool) -> Result<(u64, TailSum)> {
    let t = Tail::new(alpha_bar, TAIL_LOG2)?;
    let first = t.enclose(from.max(1))?;
    let two = rational_pow_enclosure(&int(2), &-alpha_bar, 64)?;
    let mut d = from.max(1);
    let mut upper = first.hi.clone();
    let mut lower = first.lo.clone();
    loop {
        if upper < *budget && extra(d) {
            let s = if d == first.d {
                first
            } else {
                TailSum {
                    d,
                    alpha_bar: alpha_bar.clone(),
                    cut: first.cut.max(d),
                    lo: lower,
                    hi: upper,
                }
            };
            return Ok((d, s));
        }
        let (l, h) = term(d, t.u, t.v);
        upper -= &two.lo * from_uint(&l) / &t.scale;
        lower -= &two.hi * from_uint(&h) / &t.scale;
        d += 1;
        if d > 1 << 40 {
            return Err(Error::capacity("measure", "no admissible d below 2^40"));
        }
    }
}

/// Ambient mass of the level-`l` intervals of `s` meeting the finite
/// B-set.
pub fn b_set_cover_measure(s: &Construction, ambient_count: &BigUint, l: usize, spec: &BSetSpec) -> Result<Rational> {
    let comps = union_normalize(b_set_enumerate(spec)?);
    Ok(from_uint(&cover_count(s, l, &comps)) / from_uint(ambient_count))
}

/// Number of level-`l` intervals of `s` meeting any of the sorted disjoint
/// `comps`. Index ranges are merged before counting, so an interval
/// meeting two components counts once.
pub fn cover_count(s: &Construction, l: usize, comps: &[Interval]) -> BigUint {
    let mut ranges: Vec<(BigUint, BigUint)> = Vec::new();
    for iv in comps {
        let (Some(a), Some(b)) = (first_reaching(s, l, &iv.lo), last_within(s, l, &iv.hi)) else {
            continue;
        };
        if b < a {
            continue;
        }
        match ranges.last_mut() {
            Some(r) if a <= &r.1 + 1u32 => {
                if b > r.1 {
                    r.1 = b;
                }
            }
            _ => ranges.push((a, b)),
        }
    }
    ranges.iter().map(|(a, b)| b - a + 1u32).sum()
}
