//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jarnik_core::exact::interval::Interval;
use jarnik_core::exact::pow::pow_enclosure;
use jarnik_core::exact::rational::{ceil, from_uint, int, parse_fraction, rat, Rational};
use jarnik_core::exact::Sieve;
use jarnik_core::family::presets::{demo, path_demo, strict_inputs};
use jarnik_core::family::{build_k, build_k_unchecked, certify_k_gaps, Construction, Family};
use jarnik_core::io::{export_jsonl, import_jsonl};
use jarnik_core::measure::{
    brute_mu, covering_bound, covering_sum, dyadic_sweep, least_d, mu, tail_sum_bound, verify_mass_distribution,
    MassStatus,
};
use jarnik_core::path::{
    candidate_branches, certify, classical_stage, code_length_witness, run_classical, select_branch, stage_data,
    PathContext,
};
use jarnik_core::probe::{convergent_stats, exponent_estimate, fibonacci_ratio, sample_point, MAX_TERMS};
use jarnik_core::synth::{synthesize, Mode, ParamSequences, SynthReport, TargetSpec, DEFAULT_BIT_CAP};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn strict(a: Rational, b: Rational, f: Family) -> (ParamSequences, SynthReport) {
    let t = TargetSpec::new(a, b, f, 3, Mode::Strict).unwrap();
    synthesize(&t, &Sieve::default(), DEFAULT_BIT_CAP).unwrap()
}

fn strict_construction(a: Rational, b: Rational, f: Family) -> (Construction, ParamSequences) {
    let (s, _) = strict(a, b, f);
    let c = Construction::from_inputs(f, Sieve::default(), &strict_inputs(f, &s).unwrap()).unwrap();
    (c, s)
}

fn c1_gaps() -> Verdict {
    let sieve = Sieve::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (m, a) in [(20, int(3)), (50, int(3)), (100, rat(5, 2))] {
        // (100, 5/2) sits below the M^(a-2) >= 16 threshold
        let k = build_k(m, &a, &sieve).or_else(|_| build_k_unchecked(m, &a, &sieve)).unwrap();
        let (fails, _) = certify_k_gaps(&k);
        // independent sweep in left-end order at the enlarged radii: once
        // neighbours are separated, every farther pair is too
        let mut v: Vec<(Rational, Rational, u64)> = k
            .members
            .iter()
            .flat_map(|g| {
                (1..g.p).map(move |r| {
                    let c = rat(r as i64, g.p as i64);
                    (&c - &g.radius.hi, c + &g.radius.hi, g.p)
                })
            })
            .collect();
        v.sort();
        let pair_fails = v.windows(2).filter(|w| &w[1].0 - &w[0].1 < k.gap_bound).count();
        ok &= fails == 0 && pair_fails == 0;
        parts.push(format!("K_{m}: {} intervals, {pair_fails} failing neighbour gaps", v.len()));
    }
    verdict(ok, parts.join("; "))
}

fn random_query(rng: &mut ChaCha8Rng, levels: &[Interval]) -> Interval {
    let pick = |rng: &mut ChaCha8Rng| -> Rational {
        match rng.gen_range(0..3) {
            // endpoints of built intervals exercise the closed-interval rule
            0 => {
                let iv = &levels[rng.gen_range(0..levels.len())];
                if rng.gen_bool(0.5) {
                    iv.lo.clone()
                } else {
                    iv.hi.clone()
                }
            }
            1 => {
                let iv = &levels[rng.gen_range(0..levels.len())];
                iv.center()
            }
            _ => {
                let d: i64 = rng.gen_range(1..1_000_000);
                rat(rng.gen_range(0..=d), d)
            }
        }
    };
    let (x, y) = (pick(rng), pick(rng));
    if x <= y {
        Interval::new(x, y).unwrap()
    } else {
        Interval::new(y, x).unwrap()
    }
}

fn c2_oracle() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in [Family::E, Family::G, Family::EJ, Family::F] {
        let c = demo(f, 3).unwrap();
        let levels = c.enumerate(3, 100_000).unwrap();
        let mass = c.mass(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut bad = 0;
        for _ in 0..200 {
            let q = random_query(&mut rng, &levels);
            if mu(&c, &q, 3) != brute_mu(&levels, &mass, &q) {
                bad += 1;
            }
        }
        ok &= bad == 0 && levels.len() <= 100_000;
        parts.push(format!("{f}: N_3 = {}, {bad} mismatches", levels.len()));
    }
    verdict(ok, parts.join("; "))
}

fn c3_normalization() -> Verdict {
    let mut built: Vec<(String, Construction)> = [Family::E, Family::G, Family::EJ, Family::F]
        .into_iter()
        .map(|f| (format!("demo {f}"), demo(f, 3).unwrap()))
        .collect();
    built.push(("path demo E".into(), path_demo(3).unwrap()));
    built.push(("strict E".into(), strict_construction(int(3), rat(1, 5), Family::E).0));
    built.push(("strict G".into(), strict_construction(int(2), rat(2, 5), Family::G).0));
    let mut ok = true;
    let mut sums = 0;
    for (_, c) in &built {
        for k in 0..=c.depth() {
            ok &= from_uint(c.level_count(k)) * c.mass(k) == int(1);
            if *c.level_count(k) <= BigUint::from(100_000u32) && k > 0 {
                let s: Rational = c
                    .enumerate(k, 100_000)
                    .unwrap()
                    .iter()
                    .map(|iv| mu(c, &Interval::new(iv.center(), iv.center()).unwrap(), k))
                    .sum();
                ok &= s == int(1);
                sums += 1;
            }
        }
    }
    verdict(ok, format!("{} constructions, {sums} levels summed interval by interval", built.len()))
}

fn sweep_failures(c: &Construction, b_seq: &[Rational]) -> (usize, usize) {
    let (mut n, mut fails) = (0, 0);
    for k in 2..=c.depth() {
        let tests = dyadic_sweep(c, k, 8, 4, 7);
        for m in verify_mass_distribution(c, k, &b_seq[k - 1], &tests) {
            n += 1;
            fails += (m.status == MassStatus::Fail) as usize;
        }
    }
    (n, fails)
}

fn c4_mass() -> Verdict {
    let (c, s) = strict_construction(int(3), rat(1, 5), Family::E);
    let (n, fails) = sweep_failures(&c, &s.b_seq);
    let mutate = |k: usize, f: &dyn Fn(&BigUint) -> BigUint| {
        let mut inputs = c.inputs();
        inputs[k - 1].q = f(&inputs[k - 1].q);
        Construction::from_inputs(Family::E, Sieve::default(), &inputs).unwrap()
    };
    // the literal mutation: q_2 halved
    let halved = mutate(2, &|q| q / 2u32);
    let (_, half_fails) = sweep_failures(&halved, &s.b_seq);
    // supplementary: q_2 pushed below its window by m^(a(b_3 - b_2))
    let m2 = &c.level(2).m;
    let e = int(3) * (&s.b_seq[2] - &s.b_seq[1]);
    let factor = pow_enclosure(m2, &e, 64).unwrap().hi;
    let factor = ceil(&factor).to_biguint().unwrap();
    let grown = mutate(2, &|q| q * &factor);
    let (_, grow_fails) = sweep_failures(&grown, &s.b_seq);
    verdict(
        fails == 0 && n > 0 && half_fails >= 1,
        format!(
            "{n} in-window tests, {fails} failures; q_2 halved: {half_fails} failures (halving only lowers mu); \
             q_2 x m^(a(b_3-b_2)): {grow_fails} failures"
        ),
    )
}

fn c5_windows() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, b, f) in [
        (int(3), rat(1, 5), Family::E),
        (int(4), rat(2, 5), Family::F),
        (int(2), rat(2, 5), Family::G),
    ] {
        let (s, rep) = strict(a, b, f);
        let maximal = rep.checks.iter().filter(|c| c.constraint.starts_with("maximality")).count();
        let windows = rep.checks.iter().filter(|c| c.constraint.ends_with("window")).count();
        ok &= rep.all_satisfied() && maximal == 3 && windows == 6;
        let bits: Vec<u64> = s.m_seq.iter().map(|m| m.bits() - 1).collect();
        parts.push(format!("{f}: {} checks, log2 m = {bits:?}", rep.checks.len()));
    }
    verdict(ok, parts.join("; "))
}

fn c6_covering() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    // G has dimension 2b
    for (a, b, f, dim) in [(int(3), rat(1, 5), Family::E, rat(1, 5)), (int(2), rat(2, 5), Family::G, rat(4, 5))] {
        let (c, s) = strict_construction(a, b, f);
        let beta = dim + rat(1, 20);
        let mut sums = Vec::new();
        for k in 1..=3 {
            let cs = covering_sum(&c, k, &beta).unwrap();
            let bound = covering_bound(f, &c.level(k).m, &c.level(k).a, &beta, &s.b_seq[k + 1]).unwrap();
            ok &= cs.hi <= bound.lo;
            sums.push(cs);
        }
        ok &= sums.windows(2).all(|w| w[1].hi < w[0].lo);
        let log2: Vec<i64> = sums.iter().map(|x| x.hi.numer().bits() as i64 - x.hi.denom().bits() as i64).collect();
        parts.push(format!("{f} at beta {beta}: log2 sums ~ {log2:?}"));
    }
    verdict(ok, parts.join("; "))
}

const ORACLE_TERMS: u64 = 1_000_000;
const ORACLE_BITS: u32 = 80;

/// Fixed-point bracket of `sum_{j >= d} j^{1-p} / 2^p` for integer `p`:
/// floors and ceilings of the first terms plus integral bounds on the rest.
fn tail_oracle(d: u64, p: u32) -> (Rational, Rational) {
    let scale = 1u128 << ORACLE_BITS;
    let (mut lo, mut hi) = (0u128, 0u128);
    let last = d + ORACLE_TERMS - 1;
    for j in d..=last {
        let den = (1u128 << p) * (j as u128).pow(p - 1);
        lo += scale / den;
        hi += scale.div_ceil(den);
    }
    let sc = from_uint(&BigUint::from(scale));
    let two_p = from_uint(&BigUint::from(1u64 << p));
    // (p-2) (N+1)^{p-2} <= 1 / sum_{j > N} j^{1-p} <= (p-2) N^{p-2}
    let e = p - 2;
    let n = BigUint::from(last);
    let rem_lo = (from_uint(&(BigUint::from(e) * (&n + 1u32).pow(e))) * &two_p).recip();
    let rem_hi = (from_uint(&(BigUint::from(e) * n.pow(e))) * &two_p).recip();
    (
        from_uint(&BigUint::from(lo)) / &sc + rem_lo,
        from_uint(&BigUint::from(hi)) / &sc + rem_hi,
    )
}

fn c7_tails() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    let width = rat(1, 1 << 20);
    for p in [3u32, 4] {
        let t = tail_sum_bound(2, &int(p)).unwrap();
        let (olo, ohi) = tail_oracle(2, p);
        ok &= t.lo <= olo && ohi <= t.hi && t.width() <= width;
        parts.push(format!(
            "(2,{p}): enclosure width 2^{:.1}, oracle inside",
            t.width().to_f64().unwrap().log2()
        ));
    }
    let scan = |budget: &Rational| (1u64..).find(|&d| tail_sum_bound(d, &int(3)).unwrap().hi < *budget).unwrap();
    for budget in [rat(1, 2), rat(1, 100), rat(1, 1000)] {
        let (d, _) = least_d(1, &int(3), &budget, |_| true).unwrap();
        ok &= d == scan(&budget);
        parts.push(format!("least d at budget {budget} = {d}"));
    }
    verdict(ok, parts.join("; "))
}

fn brute_cover(s: &Construction, k: usize, comps: &[Interval]) -> usize {
    s.enumerate(k, 1 << 20)
        .unwrap()
        .iter()
        .filter(|iv| comps.iter().any(|c| c.meets(iv)))
        .count()
}

fn c8_path() -> Verdict {
    let ctx = PathContext::new(path_demo(3).unwrap(), int(6), 512, true).unwrap();
    let mut st = ctx.initial().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for _ in 0..2 {
        let mut data = stage_data(&ctx, &st).unwrap();
        let (cands, capped) = candidate_branches(&ctx, st.k, data.k_next).unwrap();
        ok &= !capped && cands.len() <= 512;
        let (_, chosen) = select_branch(&ctx, &st, &mut data, &cands).unwrap();
        let k = data.k_next;
        let unit = ctx.ambient.mass(k);
        let two = from_uint(&(BigUint::one() << data.s));
        let t1 = tail_sum_bound(data.d_star, &data.a_s).unwrap();
        let t2 = tail_sum_bound(data.d_star, &data.a_next).unwrap();
        let pts: Vec<Interval> = data.endpoints.iter().map(|e| Interval::new(e.clone(), e.clone()).unwrap()).collect();
        let oracle = cands.iter().position(|ext| {
            let mut sels = st.selectors.clone();
            sels.extend(ext.iter().cloned());
            let s = ctx.branch(&sels).unwrap();
            let mu_s = from_uint(s.level_count(k)) * &unit;
            let f1 = int(brute_cover(&s, k, &data.b_s) as u64) * &unit + &t1.hi;
            let f2 = int(brute_cover(&s, k, &data.b_next) as u64) * &unit + &t2.hi;
            let f3 = int(brute_cover(&s, k, &pts) as u64) * &unit;
            f1 < int(4) * &mu_s / &two && f2 < &mu_s / (int(2) * &two) && f3 < &mu_s / &two
        });
        ok &= chosen == oracle;
        let (next, rep) = classical_stage(&ctx, &st).unwrap();
        let cert = rep.certificate.clone().unwrap();
        ok &= cert.holds && certify(&ctx, &next, cert.d_star, rep.data.tail_log2).unwrap() == cert;
        parts.push(format!("stage {}: {} candidates, chosen #{:?}", next.s, cands.len(), chosen));
        st = next;
    }
    let run = || serde_json::to_vec(&run_classical(&ctx, 2).unwrap()).unwrap();
    ok &= run() == run();
    verdict(ok, parts.join("; "))
}

fn c9_witness() -> Verdict {
    let (c, s) = strict_construction(int(3), rat(1, 5), Family::E);
    let b = rat(1, 5);
    let recs: Vec<_> = (1..=3)
        .map(|l| {
            let eps = &s.b_seq[l + 1] - &s.b_seq[l - 1];
            code_length_witness(&c, l, &s.b_seq[l - 1], &eps, &b, &s, true)
        })
        .collect();
    let mut ok = recs.iter().all(|r| r.pass && r.code_bits <= r.budget_bits && r.certifying);
    let d = demo(Family::E, 3).unwrap();
    let flat = ParamSequences {
        b_seq: vec![b.clone(); 5],
        ..Default::default()
    };
    let dr = code_length_witness(&d, 1, &b, &Rational::zero(), &b, &flat, false);
    ok &= !dr.certifying;
    let bits: Vec<String> = recs.iter().map(|r| format!("{}<={}", r.code_bits, r.budget_bits)).collect();
    verdict(ok, format!("strict L <= budget: {}; demo record certifying = {}", bits.join(", "), dr.certifying))
}

fn c10_probe() -> Verdict {
    let c = demo(Family::E, 4).unwrap();
    let results: Vec<_> = (0..100u64).map(|seed| exponent_estimate(&sample_point(&c, 4, seed), &c)).collect();
    let pairs: Vec<_> = results.iter().flat_map(|r| r.levels.iter()).collect();
    let contained = pairs.iter().filter(|l| l.contained).count();
    let positive: Vec<_> = pairs.iter().filter(|l| !l.exact_hit).collect();
    let high = positive
        .iter()
        .filter(|l| l.zeta_lo.as_ref().is_some_and(|z| *z >= rat(14, 5)))
        .count();
    let zeta_ok = !positive.is_empty() && high * 100 >= positive.len() * 95;
    let fib = convergent_stats(&fibonacci_ratio(20), &Rational::zero(), MAX_TERMS);
    let trusted: Vec<(Rational, Rational)> = fib
        .iter()
        .filter(|v| v.trusted)
        .filter_map(|v| v.z.as_ref())
        .map(|(lo, hi)| (parse_fraction(lo).unwrap(), parse_fraction(hi).unwrap()))
        .collect();
    let over = trusted.iter().filter(|(_, hi)| *hi > rat(21, 10)).count();
    let worst = trusted.iter().map(|(lo, _)| lo.clone()).max().unwrap_or_else(Rational::zero);
    verdict(
        contained == pairs.len() && zeta_ok && over == 0,
        format!(
            "contained {contained}/{}; zeta_lo >= 14/5 on {high}/{} pairs with delta > 0; \
             Fibonacci: {over}/{} trusted z above 21/10, max z >= {:.3}",
            pairs.len(),
            positive.len(),
            trusted.len(),
            worst.to_f64().unwrap_or(0.0)
        ),
    )
}

fn files_in(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn c11_roundtrip() -> Verdict {
    let mut built: Vec<Construction> = [Family::E, Family::G, Family::EJ, Family::F]
        .into_iter()
        .map(|f| demo(f, 3).unwrap())
        .collect();
    built.push(path_demo(3).unwrap());
    built.push(strict_construction(int(3), rat(1, 5), Family::E).0);
    built.push(strict_construction(int(2), rat(2, 5), Family::G).0);
    let mut ok = true;
    for c in &built {
        let bytes = export_jsonl(c).unwrap();
        let back = import_jsonl(&bytes).unwrap();
        ok &= back == *c && export_jsonl(&back).unwrap() == bytes;
    }
    let tmp = tempfile::tempdir().unwrap();
    let mut files = 0;
    for (i, (a, b, fam)) in [("3", "1/5", "E"), ("6", "1/10", "E"), ("2", "2/5", "G")].iter().enumerate() {
        let cfg = tmp.path().join(format!("c{i}.toml"));
        std::fs::write(&cfg, format!("a = \"{a}\"\nb = \"{b}\"\nfamily = \"{fam}\"\nseed = 7\n")).unwrap();
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("out{i}_{run}"));
            let st = Command::new(env!("CARGO_BIN_EXE_jarnik"))
                .args(["run", "--count", "10", "--config"])
                .arg(&cfg)
                .arg("--out-dir")
                .arg(&out)
                .output()
                .unwrap();
            ok &= st.status.code().is_some_and(|c| c == 0 || c == 1);
            outs.push(files_in(&out));
        }
        files += outs[0].len();
        ok &= !outs[0].is_empty() && outs[0] == outs[1];
    }
    verdict(ok, format!("{} constructions round-trip; {files} artifacts byte-equal across two CLI runs", built.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("gap certificates", c1_gaps),
        ("measure oracle equivalence", c2_oracle),
        ("normalization", c3_normalization),
        ("mass-distribution sweep", c4_mass),
        ("q-window certificates", c5_windows),
        ("covering-sum decay", c6_covering),
        ("tail-sum enclosures", c7_tails),
        ("path-selector oracle agreement", c8_path),
        ("effective witness", c9_witness),
        ("diophantine probe", c10_probe),
        ("round-trip and determinism", c11_roundtrip),
    ];
    let limits = [5, 30, 60, 60, 60, 60, 60, 120, 60, 60, 300];
    let mut failed = 0;
    for (i, ((name, f), limit)) in criteria.iter().zip(limits).enumerate() {
        let t = Instant::now();
        let v = f();
        let el = t.elapsed();
        let pass = v.pass && el < Duration::from_secs(limit);
        failed += !pass as usize;
        println!(
            "{} {:>2} {name} [{:.2}s / {limit}s]: {}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            el.as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
