use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use crate::exact::interval::Interval;
use crate::exact::pow::pow_enclosure;
use crate::exact::rational::{abs, from_uint, int, rat, Rational};
use crate::exact::Sieve;
use crate::family::presets::{demo, path_demo, strict_inputs};
use crate::family::{Construction, Family};
use crate::measure::{mu, tail_sum_bound};
use crate::probe::cf_convergents;
use crate::synth::{synthesize, Mode, TargetSpec, DEFAULT_BIT_CAP};

fn built() -> &'static [Construction] {
    static C: OnceLock<Vec<Construction>> = OnceLock::new();
    C.get_or_init(|| {
        let mut v: Vec<Construction> = [Family::E, Family::G, Family::EJ, Family::F]
            .into_iter()
            .map(|f| demo(f, 3).unwrap())
            .collect();
        v.push(path_demo(3).unwrap());
        let t = TargetSpec::new(int(3), rat(1, 5), Family::E, 3, Mode::Strict).unwrap();
        let (s, _) = synthesize(&t, &Sieve::default(), DEFAULT_BIT_CAP).unwrap();
        v.push(Construction::from_inputs(Family::E, Sieve::default(), &strict_inputs(Family::E, &s).unwrap()).unwrap());
        v
    })
}

fn index_below(n: &BigUint, bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_le(bytes) % n
}

fn point(n: u64, d: u64) -> Rational {
    rat((n % (d + 1)) as i64, d as i64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn children_nest_and_run_left_to_right(
        which in 0usize..6,
        k in 1usize..=3,
        bytes in proptest::collection::vec(any::<u8>(), 1..2048),
    ) {
        let c = &built()[which];
        let n = c.level_count(k);
        let idx = index_below(n, &bytes);
        let iv = c.interval_at(k, &idx);
        let parent = c.interval_at(k - 1, &(&idx / &c.level(k).i_k));
        prop_assert!(parent.contains(&iv));
        let next = &idx + 1u32;
        if &next < n {
            prop_assert!(iv.hi < c.interval_at(k, &next).lo);
        }
    }

    #[test]
    fn mu_is_monotone_and_additive(
        which in 0usize..5,
        xs in proptest::array::uniform3(0u64..1 << 40),
        d in 1u64..1 << 30,
    ) {
        let c = &built()[which];
        let k = c.depth();
        let mut p = xs.map(|x| point(x, d));
        p.sort();
        let [x, y, z] = p;
        let iv = |a: &Rational, b: &Rational| Interval::new(a.clone(), b.clone()).unwrap();
        let (l, r, all) = (mu(c, &iv(&x, &y), k), mu(c, &iv(&y, &z), k), mu(c, &iv(&x, &z), k));
        prop_assert_eq!(&l + &r - mu(c, &iv(&y, &y), k), all.clone());
        prop_assert!(l <= all && r <= all);
        prop_assert!(all <= int(1));
    }
}

proptest! {
    #[test]
    fn unit_interval_carries_full_mass(which in 0usize..6, k in 0usize..=3) {
        let c = &built()[which];
        prop_assert_eq!(mu(c, &Interval::unit(), k), int(1));
        prop_assert_eq!(from_uint(c.level_count(k)) * c.mass(k), int(1));
    }

    #[test]
    fn convergents_close_in_and_end_at_x(p in 0u64..1 << 40, q in 1u64..1 << 40) {
        let x = Rational::new(p.min(q).into(), q.into());
        let (_, conv) = cf_convergents(&x, usize::MAX);
        let v: Vec<Rational> = conv.iter().map(|(p, q)| from_uint(p) / from_uint(q)).collect();
        prop_assert_eq!(v.last().unwrap(), &x);
        for (i, w) in conv.windows(2).enumerate() {
            let bound = (from_uint(&w[0].1) * from_uint(&w[1].1)).recip();
            prop_assert!(abs(&(&x - &v[i])) <= bound);
        }
    }

    #[test]
    fn power_enclosures_bracket(base in 2u64..1000, num in 1i64..40, den in 1i64..8) {
        let e = rat(num, den);
        let (u, v) = (e.numer().to_u32().unwrap(), e.denom().to_usize().unwrap());
        let b = BigUint::from(base);
        let enc = pow_enclosure(&b, &e, 64).unwrap();
        // lo^v <= base^u <= hi^v
        let target = from_uint(&b.pow(u));
        prop_assert!(enc.lo <= enc.hi);
        prop_assert!(num_traits::pow(enc.lo.clone(), v) <= target);
        prop_assert!(target <= num_traits::pow(enc.hi.clone(), v));
    }

    #[test]
    fn tail_enclosures_shrink_with_d(d in 1u64..400, which in 0usize..4) {
        let ab = [int(3), rat(13, 4), rat(7, 2), int(4)][which].clone();
        let (t, u) = (tail_sum_bound(d, &ab).unwrap(), tail_sum_bound(d + 1, &ab).unwrap());
        prop_assert!(t.lo <= t.hi && u.lo <= u.hi);
        prop_assert!(u.lo < t.hi);
    }
}
