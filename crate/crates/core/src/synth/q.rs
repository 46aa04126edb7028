use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::constants::{ln_lower, ln_upper};
use super::{Family, SynthReport};
use crate::error::{Error, Result};
use crate::exact::pow::ln_enclosure;
use crate::exact::rational::{ceil, fmt_fraction, from_uint, int, rat, to_uint, Rational};
use crate::exact::{PowerProduct, Sieve};

/// Window exponents and coefficients for one level.
#[derive(Debug, Clone)]
pub struct QWindow {
    pub family: Family,
    /// Exponent of the lower window, `a_k b_{k+1} - 1` (E), `- 2` (F),
    /// `2 b_{k+1} - 1` (G).
    pub e_lo: Rational,
    pub e_hi: Rational,
}

impl QWindow {
    pub fn new(family: Family, a_k: &Rational, b1: &Rational, b2: &Rational) -> Self {
        let (s, off) = match family {
            Family::E | Family::EJ => (a_k.clone(), int(1)),
            Family::F => (a_k.clone(), int(2)),
            Family::G => (int(2), int(1)),
        };
        QWindow {
            family,
            e_lo: &s * b1 - &off,
            e_hi: &s * b2 - &off,
        }
    }
}

/// The defining product `C [ln m] m^{e_lo}` whose reciprocal bounds `q`.
fn defining(c: &PowerProduct, m: &BigUint, w: &QWindow) -> PowerProduct {
    let mut p = c.clone();
    if w.family == Family::F {
        p = p.scaled(&ln_upper(m));
    }
    p.times(m, w.e_lo.clone())
}

/// Largest `q` with `q X < 1` for the exact power product `X`.
fn largest_below_one(x: &PowerProduct) -> Result<BigInt> {
    let mut prec = 64u32;
    loop {
        let enc = x.enclosure(prec)?;
        if !enc.lo.is_positive() {
            prec *= 2;
            if prec > 1 << 22 {
                return Err(Error::capacity("synth", "cannot bound window product away from zero"));
            }
            continue;
        }
        let q_hi = ceil(&enc.lo.recip()) - 1;
        let q_lo = ceil(&enc.hi.recip()) - 1;
        if &q_hi - &q_lo <= BigInt::from(4) {
            let ok = |q: &BigInt| {
                !q.is_positive() || x.clone().scaled(&Rational::from_integer(q.clone())).lt(&int(1))
            };
            let mut q = q_hi;
            while !ok(&q) {
                q -= 1;
            }
            return Ok(q);
        }
        let bits = q_hi.bits() as u32;
        prec = prec.max(bits + 16) * 2;
    }
}

/// Lower bound on the number of primes in `[m, 2m)`; exact below the sieve
/// ceiling, otherwise `2m/ln(2m) - 1.25506 m/ln(m)`.
pub(crate) fn prime_count_lower(m: &BigUint, sieve: &Sieve) -> Result<(BigUint, bool)> {
    let two_m = m * 2u32;
    if let (Some(lo), Some(hi)) = (u64::try_from(m).ok(), u64::try_from(&two_m).ok()) {
        if hi <= sieve.ceiling {
            return Ok((BigUint::from(sieve.primes_in_half_open(lo, hi)?.len()), true));
        }
    }
    let mq = from_uint(m);
    let first = int(2) * &mq / ln_enclosure(&two_m, 64).hi;
    let second = rat(125_506, 100_000) * &mq / ln_enclosure(m, 64).lo;
    let lb = crate::exact::rational::floor(&(first - second));
    Ok((to_uint(&lb).unwrap_or_else(BigUint::zero), false))
}

/// Largest admissible `q_k` for level `k` with constant `c`; the report
/// records the two-sided window and maximality.
pub fn synth_q(
    k: usize,
    m: &BigUint,
    w: &QWindow,
    c: &PowerProduct,
    sieve: &Sieve,
) -> Result<(BigUint, SynthReport)> {
    if !w.e_lo.is_negative() {
        return Err(Error::MTooSmall(format!(
            "level {k}: window exponent {} is not negative, no q_k >= 1 exists",
            fmt_fraction(&w.e_lo)
        )));
    }
    let x = defining(c, m, w);
    let q = largest_below_one(&x)?;
    if q < BigInt::one() {
        return Err(Error::MTooSmall(format!(
            "level {k}: C*m^({}) < 1/q_k has no solution q_k >= 1 for m = {}",
            fmt_fraction(&w.e_lo),
            describe_m(m)
        )));
    }
    let q = q.to_biguint().expect("positive");
    if &q >= m {
        return Err(Error::MTooSmall(format!(
            "level {k}: q_k = {q} is not below m_k = {}",
            describe_m(m)
        )));
    }
    let mut rep = SynthReport::default();
    if w.family == Family::F {
        let (count, exact) = prime_count_lower(m, sieve)?;
        let ok = q <= count;
        rep.push(
            k,
            if exact { "q_k <= #primes in [m_k, 2m_k)" } else { "q_k <= prime count lower bound" },
            q.to_string(),
            "<=",
            count.to_string(),
            ok,
        );
        if !ok {
            return Err(Error::MTooSmall(format!(
                "level {k}: q_k = {q} exceeds the prime count {count}"
            )));
        }
    }
    let qr = from_uint(&q);
    let x1 = x.clone().scaled(&qr);
    rep.push(k, "q_k C X < 1", x1.describe(), "<", "1", x1.lt(&int(1)));
    let x2 = x.clone().scaled(&(&qr + int(1)));
    rep.push(k, "maximality (q_k+1) C X >= 1", x2.describe(), ">=", "1", !x2.lt(&int(1)));
    let (lo, hi) = window_products(m, w, &qr);
    rep.push(k, "lower window", lo.describe(), "<=", "1", lo.le(&int(1)));
    rep.push(k, "upper window", hi.describe(), ">=", "1", hi.cmp_rational(&int(1)) != Ordering::Less);
    Ok((q, rep))
}

/// `q * lower_term` and `q * upper_term`; the window holds iff the first is
/// at most 1 and the second at least 1.
pub(crate) fn window_products(m: &BigUint, w: &QWindow, q: &Rational) -> (PowerProduct, PowerProduct) {
    let (c_lo, c_hi) = match w.family {
        Family::E | Family::EJ => (int(1), int(1)),
        Family::F => (ln_upper(m), ln_lower(m)),
        Family::G => (int(2), int(1)),
    };
    (
        PowerProduct::new(c_lo * q).times(m, w.e_lo.clone()),
        PowerProduct::new(c_hi * q).times(m, w.e_hi.clone()),
    )
}

pub(crate) fn describe_m(m: &BigUint) -> String {
    match crate::exact::rational::log2_exact(m) {
        Some(n) => format!("2^{n}"),
        None => m.to_string(),
    }
}
