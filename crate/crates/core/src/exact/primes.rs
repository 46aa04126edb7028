//! Segmented sieve of Eratosthenes over bounded ranges.

use crate::error::{Error, Result};

pub const DEFAULT_SIEVE_CEILING: u64 = 10_000_000;
const SEGMENT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sieve {
    pub ceiling: u64,
}

impl Default for Sieve {
    fn default() -> Self {
        Sieve {
            ceiling: DEFAULT_SIEVE_CEILING,
        }
    }
}

impl Sieve {
    pub fn new(ceiling: u64) -> Self {
        Sieve { ceiling }
    }

    /// Primes `p` with `lo < p < hi`, ascending.
    pub fn primes_in(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        self.range(lo.saturating_add(1), hi)
    }

    /// Primes `p` with `lo <= p < hi`, ascending.
    pub fn primes_in_half_open(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        self.range(lo, hi)
    }

    fn range(&self, start: u64, end: u64) -> Result<Vec<u64>> {
        if end > self.ceiling {
            return Err(Error::capacity(
                "exact",
                format!("prime range up to {end} exceeds sieve ceiling {}", self.ceiling),
            ));
        }
        if start >= end {
            return Ok(Vec::new());
        }
        let start = start.max(2);
        if start >= end {
            return Ok(Vec::new());
        }
        let base = small_primes(isqrt(end - 1));
        let mut out = Vec::new();
        let mut seg_lo = start;
        while seg_lo < end {
            let seg_hi = (seg_lo + SEGMENT).min(end);
            let mut composite = vec![false; (seg_hi - seg_lo) as usize];
            for &p in &base {
                if p * p >= seg_hi {
                    break;
                }
                let first = (p * p).max(seg_lo.div_ceil(p) * p);
                let mut m = first;
                while m < seg_hi {
                    composite[(m - seg_lo) as usize] = true;
                    m += p;
                }
            }
            out.extend(
                composite
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| !c)
                    .map(|(i, _)| seg_lo + i as u64),
            );
            seg_lo = seg_hi;
        }
        Ok(out)
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Plain sieve for the base primes up to `n`.
fn small_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut is = vec![true; n + 1];
    is[0] = false;
    is[1] = false;
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}
