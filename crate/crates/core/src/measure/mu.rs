use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::interval::Interval;
use crate::exact::rational::{frac_str, from_uint, uint_str, Rational};
use crate::family::Construction;

/// Range of level indices meeting the query at one level of the descent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub level: usize,
    #[serde(with = "uint_str")]
    pub first: BigUint,
    #[serde(with = "uint_str")]
    pub last: BigUint,
    /// Parents fully inside the query, counted without descending.
    #[serde(with = "uint_str")]
    pub full_parents: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub interval: Interval,
    pub depth: usize,
    #[serde(with = "uint_str")]
    pub count: BigUint,
    #[serde(with = "frac_str")]
    pub mu: Rational,
    pub trace: Vec<TraceStep>,
}

impl MeasureReport {
    /// Recomputes `mu` from the deepest trace step.
    pub fn recompute(&self) -> Rational {
        match self.trace.last() {
            Some(t) if t.last >= t.first => from_uint(&(&t.last - &t.first + 1u32)) * &self.unit_mass(),
            _ => Rational::zero(),
        }
    }

    fn unit_mass(&self) -> Rational {
        if self.count.is_zero() {
            return Rational::zero();
        }
        &self.mu / from_uint(&self.count)
    }
}

/// Index of the first level-`k` interval with `hi >= x`.
pub fn first_reaching(c: &Construction, k: usize, x: &Rational) -> Option<BigUint> {
    if k == 0 {
        return (Interval::unit().hi >= *x).then(BigUint::zero);
    }
    let p = first_reaching(c, k - 1, x)?;
    let parent = c.interval_at(k - 1, &p);
    let n = &c.level(k).i_k;
    if let Some(ch) = c.first_child_reaching(k, &p, &parent, x) {
        return Some(&p * n + ch);
    }
    // the next parent lies wholly to the right of x
    let next = p + 1u32;
    (next < *c.level_count(k - 1)).then(|| next * n)
}

/// Index of the last level-`k` interval with `lo <= x`.
pub fn last_within(c: &Construction, k: usize, x: &Rational) -> Option<BigUint> {
    if k == 0 {
        return (Interval::unit().lo <= *x).then(BigUint::zero);
    }
    let p = last_within(c, k - 1, x)?;
    let parent = c.interval_at(k - 1, &p);
    let n = &c.level(k).i_k;
    if let Some(ch) = c.last_child_within(k, &p, &parent, x) {
        return Some(&p * n + ch);
    }
    if p.is_zero() {
        return None;
    }
    Some(p * n - 1u32)
}

fn range(c: &Construction, k: usize, iv: &Interval) -> Option<(BigUint, BigUint)> {
    let first = first_reaching(c, k, &iv.lo)?;
    let last = last_within(c, k, &iv.hi)?;
    (last >= first).then_some((first, last))
}

/// Mass of the level-`k` intervals meeting `iv`, with the per-level ranges
/// that produced it.
pub fn mu_report(c: &Construction, iv: &Interval, k: usize) -> MeasureReport {
    let mut trace = Vec::with_capacity(k);
    let mut count = BigUint::zero();
    for j in 1..=k {
        match range(c, j, iv) {
            Some((first, last)) => {
                let full = full_parents(c, j, iv, &first, &last);
                if j == k {
                    count = &last - &first + 1u32;
                }
                trace.push(TraceStep {
                    level: j,
                    first,
                    last,
                    full_parents: full,
                });
            }
            None => {
                trace.push(TraceStep {
                    level: j,
                    first: BigUint::one(),
                    last: BigUint::zero(),
                    full_parents: BigUint::zero(),
                });
                break;
            }
        }
    }
    if k == 0 {
        count = BigUint::one();
    }
    MeasureReport {
        interval: iv.clone(),
        depth: k,
        mu: from_uint(&count) * c.mass(k),
        count,
        trace,
    }
}

/// Level-`(j-1)` parents strictly between the two boundary parents; each
/// contributes all of its children.
fn full_parents(c: &Construction, j: usize, iv: &Interval, first: &BigUint, last: &BigUint) -> BigUint {
    let n = &c.level(j).i_k;
    let (pf, pl) = (first / n, last / n);
    let mut full = if pl > pf { &pl - &pf - 1u32 } else { BigUint::zero() };
    if iv.contains(&c.interval_at(j - 1, &pf)) {
        full += 1u32;
    }
    if pl != pf && iv.contains(&c.interval_at(j - 1, &pl)) {
        full += 1u32;
    }
    full
}

pub fn mu(c: &Construction, iv: &Interval, k: usize) -> Rational {
    match range(c, k, iv) {
        Some((first, last)) => from_uint(&(last - first + 1u32)) * c.mass(k),
        None if k == 0 => Rational::one(),
        None => Rational::zero(),
    }
}

/// Enumeration oracle for `mu`.
pub fn brute_mu(levels: &[Interval], mass: &Rational, iv: &Interval) -> Rational {
    let n = levels.iter().filter(|l| l.meets(iv)).count();
    Rational::from_integer(n.into()) * mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};
    use crate::family::presets::demo;
    use crate::family::Family;
    use crate::family::ENUM_CAP;

    #[test]
    fn unit_interval_has_full_mass() {
        for f in [Family::E, Family::G] {
            let c = demo(f, 3).unwrap();
            for k in 0..=3 {
                assert_eq!(mu(&c, &Interval::unit(), k), int(1));
            }
        }
    }

    #[test]
    fn single_interval_mass() {
        let c = demo(Family::E, 3).unwrap();
        let iv = c.interval_at(2, &BigUint::from(7u32));
        let n = c.level_count(2).clone();
        assert_eq!(mu(&c, &iv, 2), from_uint(&n).recip());
        assert_eq!(mu(&c, &iv, 3), from_uint(&n).recip());
    }

    #[test]
    fn matches_enumeration_on_grid() {
        for f in [Family::E, Family::G, Family::F] {
            let c = demo(f, 2).unwrap();
            let lv = c.enumerate(2, ENUM_CAP).unwrap();
            for i in 0..40 {
                for w in [1, 3, 17] {
                    let lo = rat(i, 40);
                    let hi = &lo + rat(w, 97);
                    let iv = Interval::new(lo, hi).unwrap();
                    let r = mu_report(&c, &iv, 2);
                    assert_eq!(r.mu, brute_mu(&lv, &c.mass(2), &iv), "{f} {iv}");
                    assert_eq!(r.recompute(), r.mu);
                    assert_eq!(mu(&c, &iv, 2), r.mu);
                }
            }
        }
    }

    #[test]
    fn touching_endpoints_count() {
        let c = demo(Family::G, 1).unwrap();
        let first = c.interval_at(1, &BigUint::zero());
        let pt = Interval::new(first.hi.clone(), first.hi.clone()).unwrap();
        assert_eq!(mu(&c, &pt, 1), c.mass(1));
    }
}
