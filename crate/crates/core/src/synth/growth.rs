use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::constants::{c_product, ln_lower, LN_BITS};
use super::q::{describe_m, synth_q, QWindow};
use super::{Family, ParamSequences, SynthReport};
use crate::error::{Error, Result};
use crate::exact::rational::{fmt_fraction, from_uint, int, Rational};
use crate::exact::{PowerProduct, Sieve};
use crate::family::radius::{progression_fanout, radius};

/// Default cap on `log2(m_k)`.
pub const DEFAULT_BIT_CAP: u64 = 1 << 18;

/// Budget of the effective construction: a string of length
/// `log2(m) a (b - beta)` must describe the prior levels.
#[derive(Debug, Clone)]
pub struct EffectiveBudget {
    pub a: Rational,
    pub b: Rational,
    pub beta: Rational,
    pub prefix_bits: u64,
}

#[derive(Debug, Clone)]
pub struct GrowthContext {
    pub family: Family,
    pub sieve: Sieve,
    pub bit_cap: u64,
    pub effective: Option<EffectiveBudget>,
}

fn gamma_bits(x: &BigUint) -> u64 {
    2 * x.bits().max(1) + 1
}

/// Self-delimiting length of `m_1..m_upto`, `q_1..q_upto`, `a_1..a_upto`
/// and `b_1..b_{upto+2}`.
pub fn prefix_description_bits(seqs: &ParamSequences, upto: usize) -> u64 {
    let rat_bits = |x: &Rational| {
        gamma_bits(x.numer().magnitude()) + gamma_bits(x.denom().magnitude()) + 1
    };
    let mut n = 0;
    for i in 0..upto.min(seqs.m_seq.len()) {
        n += gamma_bits(&seqs.m_seq[i]) + gamma_bits(&seqs.q_seq[i]);
    }
    n += seqs.a_seq.iter().take(upto).map(rat_bits).sum::<u64>();
    n += seqs.b_seq.iter().take(upto + 2).map(rat_bits).sum::<u64>();
    n
}

enum Outcome {
    Pass(BigUint, SynthReport),
    Fail(SynthReport),
}

/// Evaluates the constraint list at `m = 2^n`, stopping at the first failure.
fn evaluate(k: usize, n: u64, seqs: &ParamSequences, ctx: &GrowthContext, c: &PowerProduct) -> Result<Outcome> {
    let m = BigUint::one() << n;
    let ms = describe_m(&m);
    let fam = ctx.family;
    let a_k = &seqs.a_seq[k - 1];
    let (b1, b2) = (&seqs.b_seq[k], &seqs.b_seq[k + 1]);
    let mut rep = SynthReport::default();
    macro_rules! check {
        ($name:expr, $lhs:expr, $rel:expr, $rhs:expr, $ok:expr) => {{
            let ok = $ok;
            rep.push(k, $name, $lhs, $rel, $rhs, ok);
            if !ok {
                return Ok(Outcome::Fail(rep));
            }
        }};
    }
    let prev = if k >= 2 { seqs.m_seq[k - 2].clone() } else { BigUint::one() };
    check!("(i) m_k > m_{k-1}", ms.clone(), ">", prev.to_string(), m > prev);
    if fam == Family::G {
        check!("(i) m_{k-1} | m_k", ms.clone(), "div", prev.to_string(), (&m % &prev).is_zero());
    }
    let step = match fam {
        Family::G => int(2) * (b2 - b1),
        _ => a_k * (b2 - b1),
    };
    let mut lhs = c.clone().scaled(&int(2));
    if fam == Family::F {
        lhs = lhs.scaled(&ln_lower(&m).recip());
    }
    let lhs = lhs.times(&m, -step.clone());
    check!(
        "(ii) 2C < [ln m] m^(a_k(b_{k+2}-b_{k+1}))",
        lhs.describe(),
        "<",
        "1",
        lhs.lt(&int(1))
    );
    if k == 1 && fam != Family::G {
        let two = BigUint::from(2u32);
        let t = PowerProduct::new(int(3)).times(&two, a_k.clone());
        check!("(iv) m_1 > 3 2^a_1", ms.clone(), ">", t.describe(), t.lt(&from_uint(&m)));
        let t = PowerProduct::new(int(2)).times(&m, int(1) - a_k);
        check!("(iv) 1/m_1 > 2 m_1^(-a_1)", t.describe(), "<", "1", t.lt(&int(1)));
    }
    if fam == Family::F {
        let t = PowerProduct::new(int(1)).times(&m, a_k - int(2));
        check!("gap threshold m^(a_k-2) >= 16", t.describe(), ">=", "16", !t.lt(&int(16)));
    }
    let w = QWindow::new(fam, a_k, b1, b2);
    let (q, qrep) = match synth_q(k, &m, &w, c, &ctx.sieve) {
        Ok(x) => x,
        Err(Error::MTooSmall(msg)) => {
            rep.push(k, "(iii) 1 <= q_k < m_k", msg, "", "", false);
            return Ok(Outcome::Fail(rep));
        }
        Err(e) => return Err(e),
    };
    let window_ok = qrep.all_satisfied();
    rep.extend(qrep);
    if !window_ok {
        return Ok(Outcome::Fail(rep));
    }
    let qr = from_uint(&q);
    let mr = from_uint(&m);
    match fam {
        Family::E | Family::EJ => {
            let rho = radius(&m, a_k)?;
            check!(
                "gap q_k/m_k - 2 rho > 0",
                fmt_fraction(&(&qr / &mr)),
                ">",
                "2 rho_hi",
                &qr / &mr > int(2) * &rho.hi
            );
            check!(
                "count bound 6 rho m_k <= q_k",
                "6 rho_hi m_k",
                "<=",
                q.to_string(),
                int(6) * &rho.hi * &mr <= qr
            );
            let (unit, plen) = if k == 1 {
                (true, int(1))
            } else {
                let r = radius(&seqs.m_seq[k - 2], &seqs.a_seq[k - 2])?;
                (false, int(2) * r.lo)
            };
            let ik = progression_fanout(unit, &plen, &m, &q, &rho.lo);
            check!("not starved i_k >= 1", ik.to_string(), ">=", "1", !ik.is_zero());
            if k >= 2 {
                let t = PowerProduct::new((&qr * from_uint(&ik)).recip())
                    .times(&m, int(1))
                    .times(&seqs.m_seq[k - 2], -seqs.a_seq[k - 2].clone());
                check!(
                    "i_k >= m_k/(m_{k-1}^a_{k-1} q_k)",
                    ik.to_string(),
                    ">=",
                    t.describe(),
                    t.le(&int(1))
                );
            }
        }
        Family::F => {
            let per_prime = if k == 1 {
                mr.clone()
            } else {
                let two_prev = BigUint::from(2u32) * &seqs.m_seq[k - 2];
                let l = int(2) * radius(&two_prev, &seqs.a_seq[k - 2])?.lo;
                let rho = radius(&m, a_k)?;
                from_uint(&crate::family::radius::min_integers(&((l - int(2) * rho.hi) * &mr)))
                    - int(1)
            };
            let lb = per_prime * &qr;
            check!("not starved i_k >= 1", fmt_fraction(&lb), ">=", "1", lb >= int(1));
        }
        Family::G => {
            let n_par = if k == 1 { m.clone() } else { &m / &prev };
            let ik = &n_par / &q;
            check!("not starved i_k >= 1", ik.to_string(), ">=", "1", !ik.is_zero());
        }
    }
    if let Some(eff) = &ctx.effective {
        let have = int(n as i64) * &eff.a * (&eff.b - &eff.beta);
        check!(
            "(v) log2(m) a (b - beta) >= prefix bits",
            fmt_fraction(&have),
            ">=",
            eff.prefix_bits.to_string(),
            have >= int(eff.prefix_bits as i64)
        );
    }
    Ok(Outcome::Pass(q, rep))
}

/// Least power of two `m_k` meeting the constraint list, with its `q_k` and
/// an upper bound on the constant `C_k`. The report carries the passing
/// checks and the failing check at `m_k / 2`.
pub fn growth_f(
    k: usize,
    seqs: &ParamSequences,
    ctx: &GrowthContext,
) -> Result<(BigUint, BigUint, Rational, SynthReport)> {
    if seqs.b_seq.len() < k + 2 || seqs.a_seq.len() < k {
        return Err(Error::InvalidArgument(format!(
            "level {k} needs a_1..a_k and b_1..b_(k+2)"
        )));
    }
    let c = c_product(ctx.family, k, seqs);
    let n0 = if k >= 2 { seqs.m_seq[k - 2].bits() } else { 1 };
    let run = |n: u64| -> Result<Outcome> {
        if n > ctx.bit_cap {
            return Err(Error::capacity(
                "synth",
                format!("level {k} needs m_k above 2^{}; use demo mode", ctx.bit_cap),
            ));
        }
        evaluate(k, n, seqs, ctx, &c)
    };
    // gallop, then bisect on (lo fails, hi passes]
    let mut lo = n0.saturating_sub(1);
    let mut step = 1u64;
    let mut hi = n0;
    let mut best = loop {
        match run(hi)? {
            Outcome::Pass(q, r) => break (q, r),
            Outcome::Fail(_) => {
                lo = hi;
                hi = n0 + step;
                step *= 2;
            }
        }
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match run(mid)? {
            Outcome::Pass(q, r) => {
                hi = mid;
                best = (q, r);
            }
            Outcome::Fail(_) => lo = mid,
        }
    }
    let mut below = None;
    while hi > 1 {
        match run(hi - 1)? {
            Outcome::Pass(q, r) => {
                hi -= 1;
                best = (q, r);
            }
            Outcome::Fail(r) => {
                below = Some(r);
                break;
            }
        }
    }
    let (q, mut rep) = best;
    if let Some(r) = below {
        if let Some(f) = r.failures().next() {
            rep.notes.push(format!(
                "level {k}: m_k/2 = 2^{} violates {}",
                hi - 1,
                f.constraint
            ));
        }
    }
    let c_hi = c.enclosure(LN_BITS)?.hi;
    Ok((BigUint::one() << hi, q, c_hi, rep))
}
