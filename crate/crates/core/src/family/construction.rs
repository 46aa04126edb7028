use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::level::{LevelInput, LevelSpec, Selector, KEEP_RULE};
use super::radius::{progression_fanout, radius};
use super::Family;
use crate::error::{Error, Result};
use crate::exact::farey::fractions_in;
use crate::exact::interval::Interval;
use crate::exact::rational::{ceil, floor, fmt_fraction, from_uint, int, rat, to_uint, Rational};
use crate::exact::Sieve;
use crate::synth::{SynthReport, TargetSpec};

/// Largest number of intervals an enumerative level may hold.
pub const ENUM_CAP: usize = 2_000_000;

/// Ordered levels of a construction. Level `k` intervals are addressed by a
/// mixed-radix index `parent * i_k + c`, children sorted by center, so the
/// index order is the left-to-right order. E and G levels are symbolic;
/// F and EJ levels are listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub family: Family,
    pub levels: Vec<LevelSpec>,
    counts: Vec<BigUint>,
    listed: Vec<Option<Vec<Interval>>>,
    pub sieve: Sieve,
    pub target: Option<TargetSpec>,
    pub report: Option<SynthReport>,
}

impl Construction {
    pub fn new(family: Family, sieve: Sieve) -> Self {
        Construction {
            family,
            levels: Vec::new(),
            counts: vec![BigUint::one()],
            listed: Vec::new(),
            sieve,
            target: None,
            report: None,
        }
    }

    pub fn from_inputs(family: Family, sieve: Sieve, inputs: &[LevelInput]) -> Result<Self> {
        let mut c = Construction::new(family, sieve);
        for i in inputs {
            c.extend(i.clone())?;
        }
        Ok(c)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level `k >= 1`.
    pub fn level(&self, k: usize) -> &LevelSpec {
        &self.levels[k - 1]
    }

    /// `N_k = i_1 ... i_k`; `N_0 = 1`.
    pub fn level_count(&self, k: usize) -> &BigUint {
        &self.counts[k]
    }

    /// Mass of one level-`k` interval.
    pub fn mass(&self, k: usize) -> Rational {
        from_uint(&self.counts[k]).recip()
    }

    pub fn is_listed(&self, k: usize) -> bool {
        k >= 1 && self.listed[k - 1].is_some()
    }

    pub fn inputs(&self) -> Vec<LevelInput> {
        self.levels.iter().map(LevelSpec::input).collect()
    }

    /// Appends one level built from `input`.
    pub fn extend(&mut self, input: LevelInput) -> Result<()> {
        let k = self.depth() + 1;
        if input.q.is_zero() {
            return Err(Error::Family(format!("level {k}: q_k must be positive")));
        }
        if input.m < BigUint::from(2u32) {
            return Err(Error::Family(format!("level {k}: m_k must be at least 2")));
        }
        if let Some(prev) = self.levels.last() {
            if input.m <= prev.m {
                return Err(Error::Family(format!("level {k}: m_k must increase")));
            }
        }
        let (spec, list) = match self.family {
            Family::E => (self.extend_e(k, input)?, None),
            Family::G => (self.extend_g(k, input)?, None),
            Family::F | Family::EJ => {
                let (s, l) = self.extend_listed(k, input)?;
                (s, Some(l))
            }
        };
        let n = &self.counts[k - 1] * &spec.i_k;
        self.counts.push(n);
        self.levels.push(spec);
        self.listed.push(list);
        Ok(())
    }

    fn residue(k: usize, input: &LevelInput) -> Result<BigUint> {
        match &input.selector {
            Selector::Residue { h } if *h < input.q => Ok(h.clone()),
            _ => Err(Error::Family(format!(
                "level {k}: residue selector h_k in [0, q_k) required"
            ))),
        }
    }

    fn extend_e(&self, k: usize, input: LevelInput) -> Result<LevelSpec> {
        Self::residue(k, &input)?;
        let rad = radius(&input.m, &input.a)?;
        let mq = from_uint(&input.m);
        let g = from_uint(&input.q) / &mq - int(2) * &rad.hi;
        if g <= Rational::zero() {
            return Err(Error::Family(format!(
                "level {k}: siblings overlap, q_k/m_k <= 2 m_k^(-a_k)"
            )));
        }
        let plen = if k == 1 {
            int(1)
        } else {
            int(2) * &self.levels[k - 2].radius_lo
        };
        let i_k = progression_fanout(k == 1, &plen, &input.m, &input.q, &rad.lo);
        let spec = LevelSpec {
            k,
            family: Family::E,
            m: input.m,
            a: input.a,
            radius_lo: rad.lo,
            radius_hi: rad.hi,
            q: input.q,
            selector: input.selector,
            i_k,
            g_k: g,
            per_parent_rule: KEEP_RULE.to_string(),
        };
        if spec.i_k.is_zero() {
            return Err(self.starved(k, &spec));
        }
        Ok(spec)
    }

    fn extend_g(&self, k: usize, input: LevelInput) -> Result<LevelSpec> {
        Self::residue(k, &input)?;
        let prev = if k == 1 { BigUint::one() } else { self.levels[k - 2].m.clone() };
        if !(&input.m % &prev).is_zero() {
            return Err(Error::Family(format!(
                "level {k}: m_(k-1) = {prev} does not divide m_k = {}",
                input.m
            )));
        }
        let i_k = (&input.m / &prev) / &input.q;
        let half = (int(2) * from_uint(&input.m)).recip();
        let spec = LevelSpec {
            k,
            family: Family::G,
            g_k: (from_uint(&input.q) - int(1)) / from_uint(&input.m),
            m: input.m,
            a: input.a,
            radius_lo: half.clone(),
            radius_hi: half,
            q: input.q,
            selector: input.selector,
            i_k,
            per_parent_rule: KEEP_RULE.to_string(),
        };
        if spec.i_k.is_zero() {
            return Err(self.starved(k, &spec));
        }
        Ok(spec)
    }

    fn starved(&self, k: usize, spec: &LevelSpec) -> Error {
        let parent = if k == 1 { Interval::unit() } else { self.interval_at(k - 1, &BigUint::zero()) };
        let h = spec.residue().cloned().unwrap_or_default();
        let parent = if count_progression(&parent, spec, &h).is_zero() {
            format!("0 {parent}")
        } else {
            "at the least favourable position".to_string()
        };
        Error::LevelStarved { level: k, parent }
    }
}

/// Pre-equalization child count of `parent` for residue `h` (E, G).
pub fn count_progression(parent: &Interval, spec: &LevelSpec, h: &BigUint) -> BigUint {
    let mq = from_uint(&spec.m);
    let (lo, hi) = match spec.family {
        Family::G => (ceil(&(&parent.lo * &mq)), floor(&(&parent.hi * &mq)) - 1),
        _ => (
            ceil(&((&parent.lo + &spec.radius_lo) * &mq)),
            floor(&((&parent.hi - &spec.radius_lo) * &mq)),
        ),
    };
    if hi < lo {
        return BigUint::zero();
    }
    let q = num_bigint::BigInt::from(spec.q.clone());
    let h = num_bigint::BigInt::from(h.clone());
    let first = &lo + (&h - &lo).mod_floor(&q);
    if first > hi {
        return BigUint::zero();
    }
    to_uint(&((hi - first) / &q + 1)).unwrap_or_default()
}

/// Admissible `G_p(a)` intervals of primes in `pool` inside `parent`, as
/// `(p, r)` pairs sorted by center, with their shrunk radii.
fn prime_children(
    parent: &Interval,
    m: u64,
    pool: &[u64],
    radii: &mut BTreeMap<u64, Rational>,
    a: &Rational,
) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    for (r, p) in fractions_in(&parent.lo, &parent.hi, 2 * m - 1) {
        if p <= m || pool.binary_search(&p).is_err() {
            continue;
        }
        let rho = match radii.get(&p) {
            Some(x) => x.clone(),
            None => {
                let x = radius(&BigUint::from(p), a)?.lo;
                radii.insert(p, x.clone());
                x
            }
        };
        let c = rat(r as i64, p as i64);
        if &c - &rho >= parent.lo && &c + &rho <= parent.hi {
            out.push((p, r));
        }
    }
    Ok(out)
}

impl Construction {
    fn extend_listed(&self, k: usize, mut input: LevelInput) -> Result<(LevelSpec, Vec<Interval>)> {
        let m = input.m.to_u64().filter(|m| *m <= u64::MAX / 4).ok_or_else(|| {
            Error::capacity("family", format!("level {k}: m_k = {} is beyond the sieve", input.m))
        })?;
        let all = self.sieve.primes_in(m, 2 * m)?;
        let (keep, pool) = match (&self.family, &input.selector) {
            (Family::EJ, _) => {
                input.selector = Selector::AllPrimes;
                input.q = BigUint::from(all.len());
                (all.clone(), all)
            }
            (Family::F, Selector::Primes { primes, pool }) => {
                let pool = pool.clone().unwrap_or_else(|| all.clone());
                let mut keep = primes.clone();
                keep.sort_unstable();
                keep.dedup();
                let sorted = pool.windows(2).all(|w| w[0] < w[1]);
                if !sorted || pool.iter().any(|p| all.binary_search(p).is_err()) {
                    return Err(Error::Family(format!(
                        "level {k}: prime pool must be ascending primes in ({m}, {})",
                        2 * m
                    )));
                }
                if keep.iter().any(|p| pool.binary_search(p).is_err())
                    || BigUint::from(keep.len()) != input.q
                {
                    return Err(Error::Family(format!(
                        "level {k}: H_k must hold exactly q_k = {} primes of the pool",
                        input.q
                    )));
                }
                (keep, pool)
            }
            _ => {
                return Err(Error::Family(format!("level {k}: prime selector required")));
            }
        };
        if keep.is_empty() {
            return Err(Error::Family(format!("level {k}: no primes in ({m}, {})", 2 * m)));
        }
        let q = keep.len();
        let parents: Vec<Interval> = if k == 1 {
            vec![Interval::unit()]
        } else {
            match &self.listed[k - 2] {
                Some(v) => v.clone(),
                None => return Err(Error::Family("listed parent level required".into())),
            }
        };
        let mut radii = BTreeMap::new();
        let mut kids: Vec<Vec<(u64, u64)>> = Vec::with_capacity(parents.len());
        let mut i_k: Option<(usize, usize)> = None;
        for (j, par) in parents.iter().enumerate() {
            let all_kids = prime_children(par, m, &pool, &mut radii, &input.a)?;
            let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
            for (p, _) in &all_kids {
                *counts.entry(*p).or_default() += 1;
            }
            // sum of the q smallest per-prime counts over the pool
            let zeros = pool.len() - counts.len();
            let fan = if zeros >= q {
                0
            } else {
                let mut c: Vec<usize> = counts.values().copied().collect();
                c.sort_unstable();
                c.iter().take(q - zeros).sum()
            };
            if i_k.map_or(true, |(f, _)| fan < f) {
                i_k = Some((fan, j));
            }
            kids.push(
                all_kids
                    .into_iter()
                    .filter(|(p, _)| keep.binary_search(p).is_ok())
                    .collect(),
            );
        }
        let (fan, worst) = i_k.expect("at least one parent");
        if fan == 0 {
            return Err(Error::LevelStarved {
                level: k,
                parent: format!("{worst} {}", parents[worst]),
            });
        }
        if parents.len().saturating_mul(fan) > ENUM_CAP {
            return Err(Error::capacity(
                "family",
                format!("level {k} would list {} intervals", parents.len() * fan),
            ));
        }
        let mut list = Vec::with_capacity(parents.len() * fan);
        for ks in kids {
            for (p, r) in ks.into_iter().take(fan) {
                list.push(Interval::centered(&rat(r as i64, p as i64), &radii[&p]));
            }
        }
        let mb = BigUint::from(m);
        let hi = radius(&mb, &input.a)?.hi;
        let g = rat(1, 4 * (m as i64) * (m as i64)) - int(2) * &hi;
        if g <= Rational::zero() {
            return Err(Error::Family(format!(
                "level {k}: gap bound 1/(4m^2) - 2 m^(-a) is not positive for m = {m}, a = {}",
                fmt_fraction(&input.a)
            )));
        }
        let spec = LevelSpec {
            k,
            family: self.family,
            radius_lo: radius(&(&mb * 2u32), &input.a)?.lo,
            radius_hi: hi,
            m: input.m,
            a: input.a,
            q: input.q,
            selector: input.selector,
            i_k: BigUint::from(fan),
            g_k: g,
            per_parent_rule: KEEP_RULE.to_string(),
        };
        Ok((spec, list))
    }

    /// Child `c` of `parent` (the level-`k-1` interval with index
    /// `parent_idx`).
    pub fn child(&self, k: usize, parent_idx: &BigUint, parent: &Interval, c: &BigUint) -> Interval {
        let spec = self.level(k);
        if let Some(list) = &self.listed[k - 1] {
            let i = parent_idx * &spec.i_k + c;
            return list[i.to_usize().expect("listed index")].clone();
        }
        let r0 = first_residue(parent, spec);
        let r = from_uint(&(r0 + c * &spec.q));
        let mq = from_uint(&spec.m);
        match spec.family {
            Family::G => Interval {
                lo: &r / &mq,
                hi: (r + int(1)) / mq,
            },
            _ => Interval::centered(&(r / mq), &spec.radius_lo),
        }
    }

    /// Level-`k` interval with mixed-radix index `idx`.
    pub fn interval_at(&self, k: usize, idx: &BigUint) -> Interval {
        if k == 0 {
            return Interval::unit();
        }
        if let Some(list) = &self.listed[k - 1] {
            return list[idx.to_usize().expect("listed index")].clone();
        }
        let (pi, c) = idx.div_rem(&self.level(k).i_k);
        let parent = self.interval_at(k - 1, &pi);
        self.child(k, &pi, &parent, &c)
    }

    /// All `i_k` children of a level-`k-1` interval.
    pub fn children(&self, k: usize, parent_idx: &BigUint) -> Vec<Interval> {
        let parent = self.interval_at(k - 1, parent_idx);
        let n = self.level(k).i_k.to_u64().expect("fan-out fits in memory");
        (0..n)
            .map(|c| self.child(k, parent_idx, &parent, &BigUint::from(c)))
            .collect()
    }

    /// Every level-`k` interval in index order.
    pub fn enumerate(&self, k: usize, cap: usize) -> Result<Vec<Interval>> {
        if self.counts[k] > BigUint::from(cap) {
            return Err(Error::capacity(
                "family",
                format!("level {k} holds {} intervals, cap is {cap}", self.counts[k]),
            ));
        }
        let mut cur = vec![Interval::unit()];
        for j in 1..=k {
            if let Some(list) = &self.listed[j - 1] {
                cur = list.clone();
                continue;
            }
            let n = self.level(j).i_k.to_u64().expect("fan-out");
            let mut next = Vec::with_capacity(cur.len() * n as usize);
            for (pi, par) in cur.iter().enumerate() {
                let pi = BigUint::from(pi);
                for c in 0..n {
                    next.push(self.child(j, &pi, par, &BigUint::from(c)));
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Same levels with no thinning: `q = 1, h = 0` for E and G, the whole
    /// pool for F. Every interval of `self` is an interval of the ambient
    /// construction at the same level.
    pub fn ambient(&self) -> Result<Construction> {
        let mut amb = Construction::new(self.family, self.sieve);
        for l in &self.levels {
            let mut inp = l.input();
            match (&self.family, &l.selector) {
                (Family::E | Family::G, _) => {
                    inp.q = BigUint::one();
                    inp.selector = Selector::Residue { h: BigUint::zero() };
                }
                (Family::F, Selector::Primes { pool, .. }) => {
                    let m = l.m.to_u64().expect("listed m");
                    let pool = match pool {
                        Some(p) => p.clone(),
                        None => self.sieve.primes_in(m, 2 * m)?,
                    };
                    inp.q = BigUint::from(pool.len());
                    inp.selector = Selector::Primes {
                        primes: pool.clone(),
                        pool: Some(pool),
                    };
                }
                _ => {}
            }
            amb.extend(inp)?;
        }
        Ok(amb)
    }

    /// First child index `c < i_k` of `parent` with `hi >= x`.
    pub fn first_child_reaching(&self, k: usize, parent_idx: &BigUint, parent: &Interval, x: &Rational) -> Option<BigUint> {
        let spec = self.level(k);
        if let Some(list) = &self.listed[k - 1] {
            let n = spec.i_k.to_usize().unwrap();
            let base = (parent_idx * &spec.i_k).to_usize().unwrap();
            let kids = &list[base..base + n];
            let c = kids.partition_point(|iv| iv.hi < *x);
            return (c < n).then(|| BigUint::from(c));
        }
        let r0 = from_uint(&first_residue(parent, spec));
        let mq = from_uint(&spec.m);
        let qq = from_uint(&spec.q);
        // hi_c = (r0 + c q)/m + rho (E) or (r0 + c q + 1)/m (G)
        let t = match spec.family {
            Family::G => (x * &mq - int(1) - &r0) / &qq,
            _ => ((x - &spec.radius_lo) * &mq - &r0) / &qq,
        };
        let c = ceil(&t);
        let c = if c.sign() == num_bigint::Sign::Minus { BigUint::zero() } else { c.to_biguint().unwrap() };
        (c < spec.i_k).then_some(c)
    }

    /// Last child index of `parent` with `lo <= x`.
    pub fn last_child_within(&self, k: usize, parent_idx: &BigUint, parent: &Interval, x: &Rational) -> Option<BigUint> {
        let spec = self.level(k);
        if let Some(list) = &self.listed[k - 1] {
            let n = spec.i_k.to_usize().unwrap();
            let base = (parent_idx * &spec.i_k).to_usize().unwrap();
            let c = list[base..base + n].partition_point(|iv| iv.lo <= *x);
            return (c > 0).then(|| BigUint::from(c - 1));
        }
        let r0 = from_uint(&first_residue(parent, spec));
        let mq = from_uint(&spec.m);
        let qq = from_uint(&spec.q);
        let t = match spec.family {
            Family::G => (x * &mq - &r0) / &qq,
            _ => ((x + &spec.radius_lo) * &mq - &r0) / &qq,
        };
        let c = floor(&t);
        if c.sign() == num_bigint::Sign::Minus {
            return None;
        }
        let c = c.to_biguint().unwrap();
        let last = &spec.i_k - 1u32;
        Some(if c > last { last } else { c })
    }
}

impl Construction {
    /// Children of a level-`k-1` `parent` before equalization: a progression
    /// count for E and G, a sum over the kept primes for F and EJ.
    pub fn count_children(&self, k: usize, parent: &Interval) -> Result<BigUint> {
        let spec = self.level(k);
        match &spec.selector {
            Selector::Residue { h } => Ok(count_progression(parent, spec, h)),
            sel => {
                let m = spec.m.to_u64().expect("listed m");
                let keep = match sel {
                    Selector::Primes { primes, .. } => primes.clone(),
                    _ => self.sieve.primes_in(m, 2 * m)?,
                };
                let mut keep = keep;
                keep.sort_unstable();
                let n = prime_children(parent, m, &keep, &mut BTreeMap::new(), &spec.a)?.len();
                Ok(BigUint::from(n))
            }
        }
    }
}

/// Smallest admissible numerator `r = h (mod q)` inside `parent`.
fn first_residue(parent: &Interval, spec: &LevelSpec) -> BigUint {
    let mq = from_uint(&spec.m);
    let a = match spec.family {
        Family::G => ceil(&(&parent.lo * &mq)),
        _ => ceil(&((&parent.lo + &spec.radius_lo) * &mq)),
    };
    let h = num_bigint::BigInt::from(spec.residue().cloned().unwrap_or_default());
    let q = num_bigint::BigInt::from(spec.q.clone());
    let r0 = &a + (h - &a).mod_floor(&q);
    to_uint(&r0).expect("numerators are non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::interval::gap;

    fn res(m: u64, a: Rational, q: u64, h: u64) -> LevelInput {
        LevelInput {
            m: BigUint::from(m),
            a,
            q: BigUint::from(q),
            selector: Selector::Residue { h: BigUint::from(h) },
        }
    }

    fn check_nested(c: &Construction) {
        let mut prev = vec![Interval::unit()];
        for k in 1..=c.depth() {
            let cur = c.enumerate(k, ENUM_CAP).unwrap();
            assert_eq!(BigUint::from(cur.len()), *c.level_count(k));
            let n = c.level(k).i_k.to_usize().unwrap();
            for (i, iv) in cur.iter().enumerate() {
                assert!(prev[i / n].contains(iv), "level {k} #{i} {iv} escapes");
                assert_eq!(*iv, c.interval_at(k, &BigUint::from(i)));
            }
            for w in cur.windows(2) {
                let g = w[1].lo.clone() - &w[0].hi;
                assert!(g >= c.level(k).g_k, "level {k}: gap {g} below {}", c.level(k).g_k);
            }
            prev = cur;
        }
    }

    #[test]
    fn e_level_one() {
        let c = Construction::from_inputs(Family::E, Sieve::default(), &[res(60, int(2), 5, 2)]).unwrap();
        let l = c.level(1);
        assert_eq!(l.radius_lo, rat(1, 3600));
        assert_eq!(l.g_k, rat(5, 60) - rat(2, 3600));
        // r in 1..=59, floor(59/5) = 11 kept
        assert_eq!(l.i_k, BigUint::from(11u32));
        let v = c.enumerate(1, 100).unwrap();
        assert_eq!(v[0].center(), rat(2, 60));
        assert_eq!(v[10].center(), rat(52, 60));
        check_nested(&c);
    }

    #[test]
    fn g_level_one() {
        let c = Construction::from_inputs(Family::G, Sieve::default(), &[res(10, int(2), 2, 1)]).unwrap();
        let v = c.enumerate(1, 100).unwrap();
        let want: Vec<Interval> = [1, 3, 5, 7, 9]
            .iter()
            .map(|&r| Interval::new(rat(r, 10), rat(r + 1, 10)).unwrap())
            .collect();
        assert_eq!(v, want);
    }

    #[test]
    fn e_and_g_three_levels_nest() {
        let e = Construction::from_inputs(
            Family::E,
            Sieve::default(),
            &[res(16, int(3), 3, 0), res(1 << 16, int(3), 5, 1), res(1 << 51, int(3), 4, 3)],
        )
        .unwrap();
        check_nested(&e);
        let g = Construction::from_inputs(
            Family::G,
            Sieve::default(),
            &[res(16, int(2), 3, 1), res(256, int(2), 3, 0), res(4096, int(2), 3, 2)],
        )
        .unwrap();
        check_nested(&g);
    }

    #[test]
    fn g_requires_divisibility() {
        let e = Construction::from_inputs(Family::G, Sieve::default(), &[res(16, int(2), 3, 1), res(100, int(2), 3, 0)]);
        assert!(e.unwrap_err().to_string().contains("does not divide"));
    }

    #[test]
    fn progression_count_matches_brute_force() {
        let parent = Interval::new(rat(1, 4), rat(1, 2)).unwrap();
        let c = Construction::from_inputs(Family::E, Sieve::default(), &[res(1000, rat(2, 1), 7, 3)]).unwrap();
        let mut spec = c.level(1).clone();
        spec.radius_lo = rat(1, 1_000_000);
        for h in 0..7u64 {
            let brute = (0..=1000i64)
                .filter(|r| r.rem_euclid(7) == h as i64)
                .filter(|&r| {
                    let cen = rat(r, 1000);
                    &cen - &spec.radius_lo >= parent.lo && &cen + &spec.radius_lo <= parent.hi
                })
                .count();
            assert_eq!(count_progression(&parent, &spec, &BigUint::from(h)), BigUint::from(brute));
        }
    }

    #[test]
    fn fanout_is_selector_independent() {
        // every residue leaves at least i_k children in every parent
        let inputs = [res(16, int(3), 3, 0), res(1 << 16, int(3), 5, 1)];
        let c = Construction::from_inputs(Family::E, Sieve::default(), &inputs).unwrap();
        let spec = c.level(2);
        for p in c.enumerate(1, 100).unwrap() {
            for h in 0..5u64 {
                assert!(count_progression(&p, spec, &BigUint::from(h)) >= spec.i_k);
            }
        }
    }

    #[test]
    fn starved_level_reports_parent() {
        let e = Construction::from_inputs(Family::E, Sieve::default(), &[res(16, int(3), 3, 0), res(32, int(3), 31, 0)]);
        assert!(matches!(e, Err(Error::LevelStarved { level: 2, .. })), "{e:?}");
    }

    fn primes(m: u64, a: Rational, keep: &[u64], pool: Option<Vec<u64>>) -> LevelInput {
        LevelInput {
            m: BigUint::from(m),
            a,
            q: BigUint::from(keep.len()),
            selector: Selector::Primes { primes: keep.to_vec(), pool },
        }
    }

    #[test]
    fn ej_level_one_is_k_m() {
        let ej = LevelInput {
            m: BigUint::from(20u32),
            a: int(3),
            q: BigUint::one(),
            selector: Selector::AllPrimes,
        };
        let c = Construction::from_inputs(Family::EJ, Sieve::default(), &[ej]).unwrap();
        let k = super::super::build_k(20, &int(3), &Sieve::default()).unwrap();
        let want: Vec<Interval> = k.sorted_intervals().into_iter().map(|x| x.1).collect();
        let got = c.enumerate(1, ENUM_CAP).unwrap();
        // the unit parent trims nothing: every r/p with 0 < r < p fits
        assert_eq!(got, want);
        assert_eq!(c.level(1).q, BigUint::from(4u32));
        for w in got.windows(2) {
            assert!(gap(&w[0], &w[1]).unwrap() >= c.level(1).g_k);
        }
    }

    #[test]
    fn f_levels_nest_and_equalize() {
        let sieve = Sieve::default();
        let p2 = sieve.primes_in(1024, 2048).unwrap();
        let keep: Vec<u64> = p2.iter().copied().step_by(2).take(p2.len() / 2).collect();
        let c = Construction::from_inputs(
            Family::F,
            sieve,
            &[primes(4, int(4), &[7], None), primes(1024, int(4), &keep, None)],
        )
        .unwrap();
        check_nested(&c);
        // kept denominators only
        for iv in c.enumerate(2, ENUM_CAP).unwrap() {
            let cen = iv.center();
            let d = to_uint(cen.denom()).unwrap().to_u64().unwrap();
            assert!(keep.contains(&d));
        }
        // any other q-subset of the pool leaves at least i_k per parent
        let alt: Vec<u64> = p2.iter().copied().skip(1).step_by(2).take(keep.len()).collect();
        let amb = c.ambient().unwrap();
        assert!(amb.level(2).i_k >= c.level(2).i_k);
        let d = Construction::from_inputs(
            Family::F,
            sieve,
            &[primes(4, int(4), &[7], None), primes(1024, int(4), &alt, None)],
        );
        if let Ok(d) = d {
            assert_eq!(d.level(2).i_k, c.level(2).i_k);
        }
    }

    #[test]
    fn f_rejects_foreign_primes() {
        let e = Construction::from_inputs(Family::F, Sieve::default(), &[primes(16, int(4), &[19, 41], None)]);
        assert!(e.is_err());
    }

    #[test]
    fn child_search_agrees_with_scan() {
        let e = Construction::from_inputs(
            Family::E,
            Sieve::default(),
            &[res(16, int(3), 3, 0), res(1 << 16, int(3), 5, 1)],
        )
        .unwrap();
        let p = e.interval_at(1, &BigUint::from(2u32));
        let kids = e.children(2, &BigUint::from(2u32));
        for t in 0..=40 {
            let x = &p.lo + (p.len() * rat(t, 40));
            let first = kids.iter().position(|iv| iv.hi >= x).map(BigUint::from);
            let last = kids.iter().rposition(|iv| iv.lo <= x).map(BigUint::from);
            assert_eq!(e.first_child_reaching(2, &BigUint::from(2u32), &p, &x), first, "t = {t}");
            assert_eq!(e.last_child_within(2, &BigUint::from(2u32), &p, &x), last, "t = {t}");
        }
    }
}
