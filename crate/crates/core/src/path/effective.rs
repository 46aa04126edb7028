use num_bigint::BigUint;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stage::{candidate_branches, certify, endpoint_hits, PathContext, PathState, StageCertificate, TestValue, Tri};
use crate::error::{Error, Result};
use crate::exact::interval::{union_normalize, Interval};
use crate::exact::rational::{fmt_fraction, frac_str, frac_vec, from_uint, int, Rational};
use crate::exact::PowerProduct;
use crate::family::Selector;
use crate::measure::bset::{b_set_enumerate, cover_count, least_d, tail_sum_bound_at, BSetSpec, TAIL_LOG2};

pub const DEFAULT_SUBSTAGES: usize = 16;

/// Initial rational stage parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveParams {
    #[serde(with = "frac_str")]
    pub a: Rational,
    #[serde(with = "frac_str")]
    pub b: Rational,
    #[serde(with = "frac_str")]
    pub alpha0: Rational,
    #[serde(with = "frac_str")]
    pub alpha_bar0: Rational,
    #[serde(with = "frac_str")]
    pub beta0: Rational,
    #[serde(with = "frac_str")]
    pub eps0: Rational,
    pub max_substages: usize,
}

fn halve(x: &Rational, s: usize) -> Rational {
    x / from_uint(&(BigUint::one() << s))
}

impl EffectiveParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.alpha0 < self.a && self.a < self.alpha_bar0) {
            return bad("need alpha_0 < a < alpha_bar_0".into());
        }
        if &self.alpha_bar0 - &self.alpha0 >= int(1) {
            return bad(format!(
                "alpha_bar_0 - alpha_0 = {} must be below 1",
                fmt_fraction(&(&self.alpha_bar0 - &self.alpha0))
            ));
        }
        if self.alpha_bar0 <= int(2) {
            return bad("alpha_bar_0 must exceed 2".into());
        }
        if !self.beta0.is_positive() || !self.eps0.is_positive() {
            return bad("beta_0 and eps_0 must be positive".into());
        }
        if &self.beta0 + &self.eps0 >= self.b {
            return bad(format!(
                "beta_0 + eps_0 = {} must be below b = {}",
                fmt_fraction(&(&self.beta0 + &self.eps0)),
                fmt_fraction(&self.b)
            ));
        }
        if self.max_substages == 0 {
            return bad("substage budget must be positive".into());
        }
        Ok(())
    }

    pub fn alpha(&self, s: usize) -> Rational {
        &self.a - halve(&(&self.a - &self.alpha0), s)
    }
    pub fn alpha_bar(&self, s: usize) -> Rational {
        &self.a + halve(&(&self.alpha_bar0 - &self.a), s)
    }
    pub fn beta(&self, s: usize) -> Rational {
        &self.b - halve(&(&self.b - &self.beta0), s)
    }
    pub fn eps(&self, s: usize) -> Rational {
        halve(&self.eps0, s)
    }

    /// `b_{l+2}` during stage `s + 1`, with `l_s` the committed level.
    pub fn b_at(&self, s: usize, l: usize, l_s: usize) -> Rational {
        let n = s + 1;
        self.beta(n) + self.eps(n) * (int(1) - halve(&int(1), l - l_s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveState {
    pub path: PathState,
    #[serde(with = "frac_str")]
    pub alpha: Rational,
    #[serde(with = "frac_str")]
    pub beta: Rational,
    #[serde(with = "frac_str")]
    pub eps: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveReport {
    pub s: usize,
    pub d_next: u64,
    /// Substages tried, with their `b_{l+2}`.
    pub levels: Vec<usize>,
    #[serde(with = "frac_vec")]
    pub b_schedule: Vec<Rational>,
    pub level: usize,
    pub chosen: Vec<Selector>,
    pub d_star: (u64, u64),
    pub tests: Vec<TestValue>,
    pub certificate: StageCertificate,
}

pub fn effective_initial(p: &EffectiveParams) -> Result<EffectiveState> {
    p.validate()?;
    let ab = p.alpha_bar(1);
    let (d, _) = least_d(1, &ab, &Rational::new(1.into(), 2.into()), |_| true)?;
    Ok(EffectiveState {
        path: PathState {
            s: 1,
            k: 0,
            d,
            a_star: ab,
            selectors: Vec::new(),
            mu_e: int(1),
        },
        alpha: p.alpha(1),
        beta: p.beta(1),
        eps: p.eps(1),
    })
}

/// `2 d^{-alpha_bar} < g`.
pub fn gap_clear(d: u64, alpha_bar: &Rational, g: &Rational) -> bool {
    PowerProduct::new(int(2)).times(&BigUint::from(d), -alpha_bar).lt(g)
}

/// Effective `d_{s+1}`: the classical budget plus the gap condition
/// against the committed level.
pub fn choose_d_effective(ctx: &PathContext, p: &EffectiveParams, st: &PathState) -> Result<u64> {
    let ab = p.alpha_bar(st.s + 1);
    let budget = &st.mu_e / from_uint(&(BigUint::from(4u32) << (st.s + 1)));
    let g = if st.k == 0 { int(1) } else { ctx.base.level(st.k).g_k.clone() };
    Ok(least_d(st.d + 1, &ab, &budget, |d| gap_clear(d, &ab, &g))?.0)
}

fn comps(d1: u64, d2: u64, a: &Rational) -> Result<Vec<Interval>> {
    if d2 < d1 {
        return Ok(Vec::new());
    }
    Ok(union_normalize(b_set_enumerate(&BSetSpec {
        d1,
        d2: Some(d2),
        a_star: a.clone(),
    })?))
}

struct Split {
    d_star: u64,
    comps: Vec<Interval>,
    tail: (Rational, Rational),
}

fn splits(from: u64, to: u64, a_fin: &Rational, a_tail: &Rational, tail_log2: u32) -> Result<Vec<Split>> {
    (from..=to)
        .map(|d| {
            let t = tail_sum_bound_at(d, a_tail, tail_log2)?;
            Ok(Split {
                d_star: d,
                comps: comps(from - 1, d - 1, a_fin)?,
                tail: (t.lo, t.hi),
            })
        })
        .collect()
}

fn best(name: &str, fin: impl Fn(&Split) -> Rational, sp: &[Split], thr: &Rational) -> (u64, TestValue) {
    let mut out = None;
    for s in sp {
        let f = fin(s);
        let t = TestValue::new(name, &f + &s.tail.0, f + &s.tail.1, thr.clone());
        let take = match &out {
            None => true,
            Some((_, o)) => {
                let o: &TestValue = o;
                o.outcome != Tri::Pass && (t.outcome == Tri::Pass || t.hi < o.hi)
            }
        };
        if take {
            out = Some((s.d_star, t));
        }
    }
    out.expect("nonempty split range")
}

/// One effective stage: substages `l = k_s + 1, ...` over the levels of the
/// base construction until some branch and split points pass all three
/// termination bullets.
pub fn effective_stage(ctx: &PathContext, p: &EffectiveParams, est: &EffectiveState) -> Result<(EffectiveState, EffectiveReport)> {
    let st = &est.path;
    let s = st.s;
    let (a_s, a_next) = (p.alpha_bar(s), p.alpha_bar(s + 1));
    let d_next = choose_d_effective(ctx, p, st)?;
    let endpoints = {
        let mut e: Vec<Rational> = b_set_enumerate(&BSetSpec {
            d1: st.d,
            d2: Some(d_next),
            a_star: a_s.clone(),
        })?
        .into_iter()
        .flat_map(|iv| [iv.lo, iv.hi])
        .collect();
        e.sort();
        e.dedup();
        e
    };
    let two_s = from_uint(&(BigUint::one() << s));
    let last = (st.k + p.max_substages).min(ctx.base.depth());
    let mut levels = Vec::new();
    let mut b_schedule = Vec::new();
    let mut closest: Option<(usize, Vec<Selector>, Rational)> = None;
    for l in st.k + 1..=last {
        levels.push(l);
        b_schedule.push(p.b_at(s, l, st.k));
        let span = (l - st.k) as u64;
        let sp1 = splits(st.d + 1, st.d + span, &a_s, &a_next, TAIL_LOG2)?;
        let sp2 = splits(d_next + 1, d_next + span, &a_next, &a_next, TAIL_LOG2)?;
        let (cands, _) = candidate_branches(ctx, st.k, l)?;
        let unit = ctx.ambient.mass(l);
        let evals: Vec<(Vec<Selector>, u64, u64, Vec<TestValue>)> = cands
            .par_iter()
            .map(|ext| {
                let mut sels = st.selectors.clone();
                sels.extend(ext.iter().cloned());
                let s_con = ctx.branch(&sels)?;
                let mu_s = from_uint(s_con.level_count(l)) * &unit;
                let share = |cs: &[Interval]| from_uint(&cover_count(&s_con, l, cs)) * &unit;
                let (d1, t1) = best("B(d_s, inf) share", |x| share(&x.comps), &sp1, &(int(4) * &mu_s / &two_s));
                let (d2, t2) = best("B(d_s+1, inf) share", |x| share(&x.comps), &sp2, &(&mu_s / (int(2) * &two_s)));
                let f3 = from_uint(&endpoint_hits(&s_con, l, &endpoints)) * &unit;
                let t3 = TestValue::new("endpoint cover share", f3.clone(), f3, &mu_s / &two_s);
                Ok((ext.clone(), d1, d2, vec![t1, t2, t3]))
            })
            .collect::<Result<_>>()?;
        for (ext, d1, d2, tests) in &evals {
            let worst = tests.iter().map(|t| &t.hi / &t.threshold).max().expect("three tests");
            if closest.as_ref().map_or(true, |c| worst < c.2) {
                closest = Some((l, ext.clone(), worst));
            }
            if tests.iter().any(|t| t.outcome == Tri::Undecided) {
                return Err(Error::Undecided(format!("stage {} level {l}: candidate {ext:?}", s + 1)));
            }
            if tests.iter().all(|t| t.outcome == Tri::Pass) {
                let mut selectors = st.selectors.clone();
                selectors.extend(ext.iter().cloned());
                let s_con = ctx.branch(&selectors)?;
                let path = PathState {
                    s: s + 1,
                    k: l,
                    d: d_next,
                    a_star: a_next.clone(),
                    selectors,
                    mu_e: from_uint(s_con.level_count(l)) * &unit,
                };
                let certificate = certify(ctx, &path, *d2, TAIL_LOG2)?;
                let next = EffectiveState {
                    path,
                    alpha: p.alpha(s + 1),
                    beta: p.beta(s + 1),
                    eps: p.eps(s + 1),
                };
                return Ok((
                    next,
                    EffectiveReport {
                        s: s + 1,
                        d_next,
                        levels,
                        b_schedule,
                        level: l,
                        chosen: ext.clone(),
                        d_star: (*d1, *d2),
                        tests: tests.clone(),
                        certificate,
                    },
                ));
            }
        }
    }
    let detail = match closest {
        Some((l, ext, w)) => format!(
            "; closest: level {l}, branch {ext:?}, worst value/threshold {}",
            fmt_fraction(&w)
        ),
        None => String::new(),
    };
    Err(Error::Path(format!(
        "stage {}: substage budget exhausted after levels {:?}{detail}",
        s + 1,
        levels
    )))
}
