//! Fractions with bounded denominator inside short intervals.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::rational::{floor, int, Rational};

fn fr(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Consecutive members `l <= x <= r` of the Farey sequence of order `n`
/// bracketing `x` in `[0, 1]`, by batched Stern-Brocot descent.
pub fn farey_neighbors(x: &Rational, n: u64) -> ((u64, u64), (u64, u64)) {
    assert!(n >= 1 && !x.is_negative() && *x <= int(1));
    let (mut l, mut r) = ((0u64, 1u64), (1u64, 1u64));
    loop {
        let (md, mn) = (l.1 + r.1, l.0 + r.0);
        if md > n {
            return (l, r);
        }
        let med = fr(mn, md);
        if med == *x {
            return ((mn, md), (mn, md));
        }
        if *x > med {
            // l <- l + k r while it stays <= x
            let num = x * int(l.1) - int(l.0);
            let den = int(r.0) - x * int(r.1);
            let k_val = floor(&(num / den)).to_u64().unwrap_or(u64::MAX);
            let k_den = (n - l.1) / r.1;
            let k = k_val.min(k_den).max(1);
            l = (l.0 + k * r.0, l.1 + k * r.1);
        } else {
            let num = int(r.0) - x * int(r.1);
            let den = x * int(l.1) - int(l.0);
            let k_val = if den.is_zero() {
                u64::MAX
            } else {
                floor(&(num / den)).to_u64().unwrap_or(u64::MAX)
            };
            let k_den = (n - r.1) / l.1;
            let k = k_val.min(k_den).max(1);
            r = (r.0 + k * l.0, r.1 + k * l.1);
        }
        if fr(l.0, l.1) == *x {
            return (l, l);
        }
        if fr(r.0, r.1) == *x {
            return (r, r);
        }
    }
}

/// All reduced fractions `p/q` in `[lo, hi]` (a subset of `[0, 1]`) with
/// `q <= n`, ascending.
pub fn fractions_in(lo: &Rational, hi: &Rational, n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if lo > hi {
        return out;
    }
    if *lo == int(1) {
        out.push((1, 1));
        return out;
    }
    let (l, r) = farey_neighbors(lo, n);
    let (mut a, mut c) = if l == r {
        // lo is itself in the sequence; its successor follows from the
        // upper neighbour of a point just above it
        let (_, up) = farey_neighbors(&(lo + fr(1, 4 * n * n)), n);
        out.push(l);
        (l, up)
    } else {
        (l, r)
    };
    while fr(c.0, c.1) <= *hi {
        out.push(c);
        if c == (1, 1) {
            break;
        }
        let k = (n + a.1) / c.1;
        let next = (k * c.0 - a.0, k * c.1 - a.1);
        a = c;
        c = next;
    }
    out.retain(|&(p, q)| fr(p, q) >= *lo && fr(p, q) <= *hi);
    out
}
