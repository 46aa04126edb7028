use num_bigint::BigUint;

use super::*;
use crate::exact::interval::Interval;
use crate::exact::rational::{int, rat, Rational};
use crate::family::presets::{path_demo, path_demo_inputs};
use crate::family::{Construction, Family, LevelInput, Selector};
use crate::measure::bset::{b_set_enumerate, least_d, tail_sum_bound, BSetSpec};
use crate::exact::Sieve;

fn ctx(depth: usize) -> PathContext {
    PathContext::new(path_demo(depth).unwrap(), int(6), 512, true).unwrap()
}

fn with_q(qs: &[u64]) -> PathContext {
    let inputs: Vec<LevelInput> = path_demo_inputs(qs.len())
        .into_iter()
        .zip(qs)
        .map(|(mut i, &q)| {
            i.q = BigUint::from(q);
            i
        })
        .collect();
    let c = Construction::from_inputs(Family::E, Sieve::default(), &inputs).unwrap();
    PathContext::new(c, int(6), 512, true).unwrap()
}

fn brute_cover(s: &Construction, k: usize, comps: &[Interval]) -> usize {
    s.enumerate(k, 1 << 20)
        .unwrap()
        .iter()
        .filter(|iv| comps.iter().any(|c| c.meets(iv)))
        .count()
}

#[test]
fn candidate_counts() {
    let c = with_q(&[5]);
    assert_eq!(candidate_branches(&c, 0, 1).unwrap().0.len(), 5);
    let c = with_q(&[5, 7]);
    let (v, capped) = candidate_branches(&c, 0, 2).unwrap();
    assert_eq!(v.len(), 35);
    assert!(!capped);
    assert_eq!(v[1], vec![Selector::Residue { h: 0u32.into() }, Selector::Residue { h: 1u32.into() }]);
}

#[test]
fn candidate_cap_is_loud_in_strict_runs() {
    let mut c = with_q(&[5, 7]);
    c.candidate_cap = 20;
    let (v, capped) = candidate_branches(&c, 0, 2).unwrap();
    assert!(capped && v.len() == 20);
    c.demo = false;
    let e = candidate_branches(&c, 0, 2).unwrap_err();
    assert!(e.to_string().contains("demo mode"), "{e}");
}

#[test]
fn candidates_are_disjoint_with_equal_mass() {
    let c = ctx(2);
    let (cands, _) = candidate_branches(&c, 0, 2).unwrap();
    let sets: Vec<Vec<Interval>> = cands
        .iter()
        .map(|ext| c.branch(ext).unwrap().enumerate(2, 1 << 16).unwrap())
        .collect();
    assert!(sets.windows(2).all(|w| w[0].len() == w[1].len()));
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            assert!(sets[i].iter().all(|x| sets[j].iter().all(|y| !x.meets(y))), "{i} {j}");
        }
    }
}

#[test]
fn choose_d_matches_scan_and_is_monotone() {
    let c = ctx(2);
    let st = c.initial().unwrap();
    // d_1 against a direct scan of the tail enclosures
    let ab = c.a_at(1);
    let scan = (1..).find(|&d| tail_sum_bound(d, &ab).unwrap().hi < rat(1, 2)).unwrap();
    assert_eq!(st.d, scan);
    let d2 = choose_d(&c, &st).unwrap();
    let budget = rat(1, 16);
    let ab2 = c.a_at(2);
    let scan = (st.d + 1..).find(|&d| tail_sum_bound(d, &ab2).unwrap().hi < budget).unwrap();
    assert_eq!(d2, scan);
    assert!(d2 > st.d);
}

#[test]
fn trivial_candidate_passes() {
    // S = everything, B empty: the finite parts vanish
    let c = ctx(1);
    let st = c.initial().unwrap();
    let data = StageData {
        s: 1,
        d_s: 50,
        d_next: 60,
        d_star: 60,
        a_s: c.a_at(1),
        a_next: c.a_at(2),
        k_next: 1,
        c: 0,
        b_s: vec![],
        b_next: vec![],
        endpoints: vec![],
        tail_log2: 21,
    };
    assert!(st.selectors.is_empty());
    let t = bad_fraction_tests(&c, &data, &c.ambient).unwrap();
    assert!(t.iter().all(|t| t.outcome == Tri::Pass), "{t:?}");
}

#[test]
fn straddling_enclosure_is_undecided() {
    let t = TestValue::new("x", rat(1, 3), rat(1, 2), rat(2, 5));
    assert_eq!(t.outcome, Tri::Undecided);
    assert_eq!(TestValue::new("x", rat(1, 2), rat(1, 2), rat(1, 2)).outcome, Tri::Fail);
}

#[test]
fn two_classical_stages_agree_with_exhaustive_oracle() {
    let c = ctx(3);
    let mut st = c.initial().unwrap();
    for _ in 0..2 {
        let (next, rep) = classical_stage(&c, &st).unwrap();
        // oracle: evaluate every candidate by brute-force enumeration
        let data = stage_data(&c, &st).unwrap();
        let (cands, _) = candidate_branches(&c, st.k, data.k_next).unwrap();
        let mut first_pass = None;
        for ext in &cands {
            let mut sels = st.selectors.clone();
            sels.extend(ext.iter().cloned());
            let s = c.branch(&sels).unwrap();
            let k = data.k_next;
            let unit = c.ambient.mass(k);
            let mu_s = Rational::from_integer(s.level_count(k).clone().into()) * &unit;
            let two = Rational::from_integer((1u64 << data.s).into());
            let t1 = tail_sum_bound(data.d_star, &data.a_s).unwrap();
            let t2 = tail_sum_bound(data.d_star, &data.a_next).unwrap();
            let f1 = int(brute_cover(&s, k, &data.b_s) as u64) * &unit + t1.hi;
            let f2 = int(brute_cover(&s, k, &data.b_next) as u64) * &unit + t2.hi;
            let pts: Vec<Interval> = data.endpoints.iter().map(|e| Interval::new(e.clone(), e.clone()).unwrap()).collect();
            let f3 = int(brute_cover(&s, k, &pts) as u64) * &unit;
            if f1 < int(4) * &mu_s / &two && f2 < &mu_s / (int(2) * &two) && f3 < &mu_s / &two {
                first_pass.get_or_insert(ext.clone());
            }
        }
        assert_eq!(rep.chosen, first_pass);
        let cert = rep.certificate.clone().unwrap();
        assert!(cert.holds);
        assert_eq!(certify(&c, &next, cert.d_star, rep.data.tail_log2).unwrap(), cert);
        assert!(next.d > st.d && next.k > st.k);
        st = next;
    }
}

#[test]
fn trajectory_is_deterministic() {
    let run = || serde_json::to_string(&run_classical(&ctx(3), 2).unwrap()).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn finite_b_parts_cover_like_brute_force() {
    let c = ctx(2);
    let comps = crate::exact::interval::union_normalize(
        b_set_enumerate(&BSetSpec { d1: 2, d2: Some(40), a_star: rat(25, 4) }).unwrap(),
    );
    for k in 1..=2 {
        let fast = crate::measure::bset::cover_count(&c.base, k, &comps);
        assert_eq!(fast, BigUint::from(brute_cover(&c.base, k, &comps)));
    }
}

fn params() -> EffectiveParams {
    EffectiveParams {
        a: int(6),
        b: rat(1, 5),
        alpha0: rat(23, 4),
        alpha_bar0: rat(25, 4),
        beta0: rat(1, 10),
        eps0: rat(1, 20),
        max_substages: DEFAULT_SUBSTAGES,
    }
}

#[test]
fn effective_initialization_checks() {
    assert!(params().validate().is_ok());
    let mut p = params();
    p.alpha_bar0 = rat(7, 1);
    assert!(p.validate().unwrap_err().to_string().contains("below 1"));
    let mut p = params();
    p.eps0 = rat(1, 10);
    assert!(p.validate().unwrap_err().to_string().contains("below b"));
    let mut p = params();
    p.alpha0 = rat(6, 1);
    assert!(p.validate().is_err());
}

#[test]
fn effective_b_schedule_climbs_to_its_limit() {
    let p = params();
    let v: Vec<Rational> = (1..=8).map(|l| p.b_at(1, l, 0)).collect();
    assert!(v.windows(2).all(|w| w[0] < w[1]));
    let lim = p.beta(2) + p.eps(2);
    assert!(v.iter().all(|b| *b < lim));
    assert!(&lim - &v[7] == p.eps(2) / int(256));
    // stage parameters keep alpha_s < a < alpha_bar_s and beta_s + eps_s < b
    for s in 0..6 {
        assert!(p.alpha(s) < p.a && p.a < p.alpha_bar(s));
        assert!(p.beta(s) + p.eps(s) < p.b);
    }
}

#[test]
fn effective_stage_commits_and_cross_checks() {
    let c = ctx(3);
    let p = params();
    let st = effective_initial(&p).unwrap();
    let (next, rep) = effective_stage(&c, &p, &st).unwrap();
    assert!(rep.tests.iter().all(|t| t.outcome == Tri::Pass));
    assert!(rep.certificate.holds);
    assert_eq!(next.path.k, rep.level);
    // gap condition at the returned d and its failure just below
    let g = int(1);
    assert!(gap_clear(rep.d_next, &p.alpha_bar(2), &g));
    // exhaustive recount of the second bullet's finite part
    let s = c.branch(&next.path.selectors).unwrap();
    let comps = crate::exact::interval::union_normalize(
        b_set_enumerate(&BSetSpec { d1: rep.d_next, d2: Some(rep.d_star.1 - 1), a_star: p.alpha_bar(2) }).unwrap(),
    );
    let unit = c.ambient.mass(rep.level);
    let tail = tail_sum_bound(rep.d_star.1, &p.alpha_bar(2)).unwrap();
    let v = int(brute_cover(&s, rep.level, &comps) as u64) * unit;
    assert_eq!(v + tail.hi, rep.tests[1].hi);
}

#[test]
fn gap_condition_binds_for_tiny_gaps() {
    let ab = rat(13, 2);
    let g = rat(1, 1_000_000);
    let (d, _) = least_d(1, &ab, &rat(1, 2), |d| gap_clear(d, &ab, &g)).unwrap();
    assert!(gap_clear(d, &ab, &g));
    assert!(!gap_clear(d - 1, &ab, &g));
}
