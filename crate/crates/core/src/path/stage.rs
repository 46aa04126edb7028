use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::interval::{union_normalize, Interval};
use crate::exact::rational::{fmt_fraction, frac_str, from_uint, int, Rational};
use crate::family::{Construction, LevelInput, Selector};
use crate::measure::bset::{b_set_enumerate, cover_count, least_d, tail_sum_bound_at, BSetSpec, TAIL_LOG2};
use crate::measure::mu::first_reaching;

pub const DEFAULT_CANDIDATE_CAP: usize = 4096;
/// Extra tail bits per precision escalation, and how many are allowed.
pub const ESCALATION_BITS: u32 = 4;
pub const ESCALATIONS: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathState {
    pub s: usize,
    /// Committed depth `k_s`; 0 is `[0, 1]`.
    pub k: usize,
    pub d: u64,
    /// `a + 1/2^s`.
    #[serde(with = "frac_str")]
    pub a_star: Rational,
    pub selectors: Vec<Selector>,
    /// `mu_J(E_{k_s})`.
    #[serde(with = "frac_str")]
    pub mu_e: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Pass,
    Fail,
    Undecided,
}

/// `[lo, hi] < threshold`, three-valued.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestValue {
    pub name: String,
    #[serde(with = "frac_str")]
    pub lo: Rational,
    #[serde(with = "frac_str")]
    pub hi: Rational,
    #[serde(with = "frac_str")]
    pub threshold: Rational,
    pub outcome: Tri,
}

impl TestValue {
    pub fn new(name: &str, lo: Rational, hi: Rational, threshold: Rational) -> Self {
        let outcome = if hi < threshold {
            Tri::Pass
        } else if lo >= threshold {
            Tri::Fail
        } else {
            Tri::Undecided
        };
        TestValue {
            name: name.to_string(),
            lo,
            hi,
            threshold,
            outcome,
        }
    }
}

/// Everything a stage needs besides the candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageData {
    pub s: usize,
    pub d_s: u64,
    pub d_next: u64,
    /// Finite parts of the infinite B-sets run up to `d_star - 1`.
    pub d_star: u64,
    #[serde(with = "frac_str")]
    pub a_s: Rational,
    #[serde(with = "frac_str")]
    pub a_next: Rational,
    pub k_next: usize,
    /// Number of intervals of `B(d_s, d_{s+1}, a_s)`.
    pub c: usize,
    #[serde(skip)]
    pub b_s: Vec<Interval>,
    #[serde(skip)]
    pub b_next: Vec<Interval>,
    #[serde(skip)]
    pub endpoints: Vec<Rational>,
    pub tail_log2: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEval {
    pub extension: Vec<Selector>,
    #[serde(with = "frac_str")]
    pub mu_s: Rational,
    pub tests: Vec<TestValue>,
}

impl CandidateEval {
    pub fn passes(&self) -> bool {
        self.tests.iter().all(|t| t.outcome == Tri::Pass)
    }
    fn undecided(&self) -> bool {
        self.tests.iter().any(|t| t.outcome == Tri::Undecided)
    }
}

/// Certified stage invariant for the committed branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCertificate {
    pub s: usize,
    pub k: usize,
    pub d: u64,
    pub d_star: u64,
    #[serde(with = "frac_str")]
    pub bound_lo: Rational,
    #[serde(with = "frac_str")]
    pub bound_hi: Rational,
    #[serde(with = "frac_str")]
    pub threshold: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub data: StageData,
    pub candidates: usize,
    pub capped: bool,
    /// Candidates failing each of the three tests.
    pub failing: [usize; 3],
    pub chosen: Option<Vec<Selector>>,
    pub certificate: Option<StageCertificate>,
}

/// The full construction whose levels fix `m_k, a_k, q_k`, its ambient
/// Jarnik construction, and the target exponent.
pub struct PathContext {
    pub base: Construction,
    pub ambient: Construction,
    pub a: Rational,
    pub candidate_cap: usize,
    /// Demo runs cap enumeration with a notice instead of failing.
    pub demo: bool,
}

impl PathContext {
    pub fn new(base: Construction, a: Rational, candidate_cap: usize, demo: bool) -> Result<Self> {
        let ambient = base.ambient()?;
        Ok(PathContext {
            base,
            ambient,
            a,
            candidate_cap,
            demo,
        })
    }

    /// `a + 1/2^s`.
    pub fn a_at(&self, s: usize) -> Rational {
        &self.a + from_uint(&(BigUint::one() << s)).recip()
    }

    pub fn initial(&self) -> Result<PathState> {
        let ab = self.a_at(1);
        let (d, _) = least_d(1, &ab, &Rational::new(1.into(), 2.into()), |_| true)?;
        Ok(PathState {
            s: 1,
            k: 0,
            d,
            a_star: ab,
            selectors: Vec::new(),
            mu_e: int(1),
        })
    }

    /// The branch with the given selectors for levels `1..=selectors.len()`.
    pub fn branch(&self, selectors: &[Selector]) -> Result<Construction> {
        let inputs: Vec<LevelInput> = self
            .base
            .inputs()
            .into_iter()
            .zip(selectors)
            .map(|(mut i, sel)| {
                if let Selector::Primes { primes, .. } = sel {
                    i.q = BigUint::from(primes.len());
                }
                i.selector = sel.clone();
                i
            })
            .collect();
        Construction::from_inputs(self.base.family, self.base.sieve, &inputs)
    }

    fn ambient_mass(&self, k: usize) -> Rational {
        self.ambient.mass(k)
    }
}

/// Least `d > d_s` whose tail bound at exponent `a + 1/2^{s+1}` is below
/// `mu_E / (4 2^{s+1})`.
pub fn choose_d(ctx: &PathContext, st: &PathState) -> Result<u64> {
    let ab = ctx.a_at(st.s + 1);
    let budget = &st.mu_e / from_uint(&(BigUint::from(4u32) << (st.s + 1)));
    Ok(least_d(st.d + 1, &ab, &budget, |_| true)?.0)
}

fn selector_space(spec_sel: &Selector, q: &BigUint, m: &BigUint, ctx: &PathContext) -> Result<Vec<Selector>> {
    match spec_sel {
        Selector::Residue { .. } => {
            let q = q.to_usize().filter(|q| *q <= ctx.candidate_cap).ok_or_else(|| {
                Error::capacity("path", format!("q = {q} residues exceed the candidate cap; use demo mode"))
            })?;
            Ok((0..q).map(|h| Selector::Residue { h: BigUint::from(h) }).collect())
        }
        Selector::Primes { pool, .. } => {
            let m = m.to_u64().expect("listed m");
            let pool = match pool {
                Some(p) => p.clone(),
                None => ctx.base.sieve.primes_in(m, 2 * m)?,
            };
            let q = q.to_usize().expect("listed q");
            let mut out = Vec::new();
            let mut idx: Vec<usize> = (0..q).collect();
            loop {
                out.push(Selector::Primes {
                    primes: idx.iter().map(|&i| pool[i]).collect(),
                    pool: Some(pool.clone()),
                });
                if out.len() > ctx.candidate_cap {
                    break;
                }
                // next q-combination in lexicographic order
                let mut i = q;
                while i > 0 && idx[i - 1] == pool.len() - q + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..q {
                    idx[j] = idx[j - 1] + 1;
                }
            }
            Ok(out)
        }
        Selector::AllPrimes => Ok(vec![Selector::AllPrimes]),
    }
}

/// All selector extensions for levels `from + 1..=to`, lexicographic.
/// Returns whether the cap cut the list.
pub fn candidate_branches(ctx: &PathContext, from: usize, to: usize) -> Result<(Vec<Vec<Selector>>, bool)> {
    let mut out: Vec<Vec<Selector>> = vec![Vec::new()];
    let mut capped = false;
    for k in from + 1..=to {
        let l = ctx.base.level(k);
        let space = selector_space(&l.selector, &l.q, &l.m, ctx)?;
        let mut next = Vec::new();
        'outer: for prefix in &out {
            for sel in &space {
                if next.len() == ctx.candidate_cap {
                    capped = true;
                    break 'outer;
                }
                let mut v = prefix.clone();
                v.push(sel.clone());
                next.push(v);
            }
        }
        if space.len() > ctx.candidate_cap {
            capped = true;
        }
        out = next;
    }
    if capped && !ctx.demo {
        return Err(Error::capacity(
            "path",
            format!("more than {} candidate branches; use demo mode", ctx.candidate_cap),
        ));
    }
    Ok((out, capped))
}

fn b_components(d1: u64, d2: u64, a_star: &Rational) -> Result<Vec<Interval>> {
    Ok(union_normalize(b_set_enumerate(&BSetSpec {
        d1,
        d2: Some(d2),
        a_star: a_star.clone(),
    })?))
}

/// Stage data for the step `s -> s + 1` out of `st`.
pub fn stage_data(ctx: &PathContext, st: &PathState) -> Result<StageData> {
    let s = st.s;
    let a_s = ctx.a_at(s);
    let a_next = ctx.a_at(s + 1);
    let d_next = choose_d(ctx, st)?;
    let b_fin = b_set_enumerate(&BSetSpec {
        d1: st.d,
        d2: Some(d_next),
        a_star: a_s.clone(),
    })?;
    let c = b_fin.len();
    // least k whose 2c ambient intervals weigh less than mu_E / (4 2^s)
    let target = &st.mu_e / from_uint(&(BigUint::from(4u32) << s));
    let mut k_next = None;
    for k in st.k + 1..=ctx.base.depth() {
        if int(2 * c as u64) * ctx.ambient_mass(k) < target {
            k_next = Some(k);
            break;
        }
    }
    let k_next = k_next.ok_or_else(|| {
        Error::Path(format!(
            "stage {}: no level up to depth {} makes 2c = {} ambient intervals lighter than {}",
            s + 1,
            ctx.base.depth(),
            2 * c,
            fmt_fraction(&target)
        ))
    })?;
    let mut endpoints: Vec<Rational> = b_fin.iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect();
    endpoints.sort();
    endpoints.dedup();
    // every candidate has the same mu_J(S); the finite/tail split point
    // puts the tail an eighth under the smallest threshold
    let probe = ctx.branch(&ctx.base.inputs().iter().take(k_next).map(|i| i.selector.clone()).collect::<Vec<_>>())?;
    let mu_s = from_uint(probe.level_count(k_next)) * ctx.ambient_mass(k_next);
    let thr = &mu_s / from_uint(&(BigUint::from(8u32) << (s + 1)));
    let (d_star, _) = least_d(d_next, &a_next, &thr, |_| true)?;
    Ok(StageData {
        s,
        d_s: st.d,
        d_next,
        d_star,
        b_s: b_components(st.d, d_star - 1, &a_s)?,
        b_next: b_components(d_next, d_star - 1, &a_next)?,
        a_s,
        a_next,
        k_next,
        c,
        endpoints,
        tail_log2: TAIL_LOG2,
    })
}

/// Level-`k` intervals of `s` containing one of the sorted points.
pub fn endpoint_hits(s: &Construction, k: usize, points: &[Rational]) -> BigUint {
    let mut hit = BTreeSet::new();
    for e in points {
        if let Some(i) = first_reaching(s, k, e) {
            if s.interval_at(k, &i).lo <= *e {
                hit.insert(i);
            }
        }
    }
    BigUint::from(hit.len())
}

/// The three bad-fraction tests for one candidate branch `s_con` (a
/// construction of depth `k_next`).
pub fn bad_fraction_tests(ctx: &PathContext, data: &StageData, s_con: &Construction) -> Result<Vec<TestValue>> {
    let k = data.k_next;
    let unit = ctx.ambient_mass(k);
    let mu_s = from_uint(s_con.level_count(k)) * &unit;
    let two_s = from_uint(&(BigUint::one() << data.s));
    let t1 = tail_sum_bound_at(data.d_star, &data.a_s, data.tail_log2)?;
    let t2 = tail_sum_bound_at(data.d_star, &data.a_next, data.tail_log2)?;
    let f1 = from_uint(&cover_count(s_con, k, &data.b_s)) * &unit;
    let f2 = from_uint(&cover_count(s_con, k, &data.b_next)) * &unit;
    let f3 = from_uint(&endpoint_hits(s_con, k, &data.endpoints)) * &unit;
    Ok(vec![
        TestValue::new("B(d_s, inf) share", &f1 + t1.lo, f1 + t1.hi, int(4) * &mu_s / &two_s),
        TestValue::new("B(d_s+1, inf) share", &f2 + t2.lo, f2 + t2.hi, &mu_s / (int(2) * &two_s)),
        TestValue::new("endpoint cover share", f3.clone(), f3, &mu_s / &two_s),
    ])
}

fn evaluate(ctx: &PathContext, st: &PathState, data: &StageData, ext: &[Selector]) -> Result<CandidateEval> {
    let mut sels = st.selectors.clone();
    sels.extend_from_slice(ext);
    let s_con = ctx.branch(&sels)?;
    let tests = bad_fraction_tests(ctx, data, &s_con)?;
    Ok(CandidateEval {
        extension: ext.to_vec(),
        mu_s: from_uint(s_con.level_count(data.k_next)) * ctx.ambient_mass(data.k_next),
        tests,
    })
}

/// Evaluates every candidate, escalating the tail precision on undecided
/// comparisons, and picks the lexicographically least passer.
pub fn select_branch(
    ctx: &PathContext,
    st: &PathState,
    data: &mut StageData,
    cands: &[Vec<Selector>],
) -> Result<(Vec<CandidateEval>, Option<usize>)> {
    if cands.is_empty() {
        return Err(Error::Path("empty candidate set".into()));
    }
    let mut evals: Vec<CandidateEval> = cands
        .par_iter()
        .map(|ext| evaluate(ctx, st, data, ext))
        .collect::<Result<Vec<_>>>()?;
    for _ in 0..ESCALATIONS {
        if !evals.iter().any(CandidateEval::undecided) {
            break;
        }
        data.tail_log2 += ESCALATION_BITS;
        for e in evals.iter_mut().filter(|e| e.undecided()) {
            *e = evaluate(ctx, st, data, &e.extension)?;
        }
    }
    if let Some(e) = evals.iter().find(|e| e.undecided()) {
        return Err(Error::Undecided(format!(
            "stage {}: candidate {:?} still undecided at tail 2^-{}",
            data.s + 1,
            e.extension,
            data.tail_log2
        )));
    }
    let chosen = evals.iter().position(CandidateEval::passes);
    Ok((evals, chosen))
}

/// The committed invariant `mu_J(B(d, inf, a*) ∩ E_k) < mu_J(E_k) / 2^s`
/// recomputed from the state alone.
pub fn certify(ctx: &PathContext, st: &PathState, d_star: u64, tail_log2: u32) -> Result<StageCertificate> {
    let e = ctx.branch(&st.selectors)?;
    let k = st.k;
    let unit = ctx.ambient_mass(k);
    let comps = b_components(st.d, d_star - 1, &st.a_star)?;
    let fin = from_uint(&cover_count(&e, k, &comps)) * &unit;
    let t = tail_sum_bound_at(d_star, &st.a_star, tail_log2)?;
    let threshold = &st.mu_e / from_uint(&(BigUint::one() << st.s));
    let bound_hi = &fin + t.hi;
    Ok(StageCertificate {
        s: st.s,
        k,
        d: st.d,
        d_star,
        bound_lo: fin + t.lo,
        holds: bound_hi < threshold,
        bound_hi,
        threshold,
    })
}

/// One classical stage `s -> s + 1`.
pub fn classical_stage(ctx: &PathContext, st: &PathState) -> Result<(PathState, StageReport)> {
    let mut data = stage_data(ctx, st)?;
    let (cands, capped) = candidate_branches(ctx, st.k, data.k_next)?;
    let (evals, chosen) = select_branch(ctx, st, &mut data, &cands)?;
    let mut failing = [0usize; 3];
    for e in &evals {
        for (i, t) in e.tests.iter().enumerate() {
            if t.outcome != Tri::Pass {
                failing[i] += 1;
            }
        }
    }
    let mut report = StageReport {
        candidates: evals.len(),
        capped,
        failing,
        chosen: None,
        certificate: None,
        data: data.clone(),
    };
    let Some(i) = chosen else {
        return Err(Error::Path(format!(
            "stage {}: no passing branch among {} candidates (failing per test: {:?}){}",
            st.s + 1,
            evals.len(),
            failing,
            if ctx.demo { "; demo constants need not support the counting argument" } else { "" }
        )));
    };
    let ext = evals[i].extension.clone();
    let mut selectors = st.selectors.clone();
    selectors.extend(ext.iter().cloned());
    let next = PathState {
        s: st.s + 1,
        k: data.k_next,
        d: data.d_next,
        a_star: data.a_next.clone(),
        selectors,
        mu_e: evals[i].mu_s.clone(),
    };
    report.chosen = Some(ext);
    report.certificate = Some(certify(ctx, &next, data.d_star, data.tail_log2)?);
    Ok((next, report))
}

/// Runs `stages` classical stages from the initial state.
pub fn run_classical(ctx: &PathContext, stages: usize) -> Result<(Vec<PathState>, Vec<StageReport>)> {
    let mut states = vec![ctx.initial()?];
    let mut reports = Vec::new();
    for _ in 0..stages {
        let (n, r) = classical_stage(ctx, states.last().expect("initial state"))?;
        states.push(n);
        reports.push(r);
    }
    Ok((states, reports))
}
