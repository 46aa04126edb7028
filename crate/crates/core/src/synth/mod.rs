//! Parameter sequences for the thinned Jarník families and the growth
//! function that makes their measure estimates go through.

mod constants;
mod growth;
mod q;
mod report;
mod stage;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{fmt_fraction, frac_str, frac_vec, int, rat, uint_vec, Rational};
use crate::exact::Sieve;

pub use constants::c_product;
pub use growth::{growth_f, prefix_description_bits, EffectiveBudget, GrowthContext, DEFAULT_BIT_CAP};
pub use q::{synth_q, QWindow};
pub use report::{ConstraintCheck, SynthReport};
pub use stage::{synth_stage_rationals, StageRationals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    EJ,
    E,
    F,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::EJ => "EJ",
            Family::E => "E",
            Family::F => "F",
            Family::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EJ" | "ej" => Ok(Family::EJ),
            "E" | "e" => Ok(Family::E),
            "F" | "f" => Ok(Family::F),
            "G" | "g" => Ok(Family::G),
            _ => Err(Error::Config(format!("unknown family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Demo,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "demo" => Ok(Mode::Demo),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    #[serde(with = "frac_str")]
    pub a: Rational,
    #[serde(with = "frac_str")]
    pub b: Rational,
    pub family: Family,
    pub depth: usize,
    pub mode: Mode,
}

impl TargetSpec {
    pub fn new(a: Rational, b: Rational, family: Family, depth: usize, mode: Mode) -> Result<Self> {
        let t = TargetSpec {
            a,
            b,
            family,
            depth,
            mode,
        };
        t.validate()?;
        Ok(t)
    }

    /// Family/target compatibility.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (&self.a, &self.b);
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.depth == 0 {
            return bad("depth must be positive".into());
        }
        if *a < int(2) {
            return bad(format!("a = {} must be at least 2", fmt_fraction(a)));
        }
        if *b < Rational::zero() || *b > int(2) / a {
            return bad(format!("b = {} outside [0, 2/a]", fmt_fraction(b)));
        }
        let inv = a.recip();
        match self.family {
            Family::E if *b > inv => bad("family E requires b <= 1/a".into()),
            Family::F if *b < inv || *a <= int(2) => {
                bad("family F requires 1/a <= b <= 2/a and a > 2".into())
            }
            Family::G if *a != int(2) || b.is_zero() || *b > int(1) => {
                bad("family G requires a = 2 and 0 < b <= 1".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSequences {
    #[serde(with = "frac_vec")]
    pub a_seq: Vec<Rational>,
    #[serde(with = "frac_vec")]
    pub b_seq: Vec<Rational>,
    #[serde(with = "uint_vec")]
    pub m_seq: Vec<BigUint>,
    #[serde(with = "uint_vec")]
    pub q_seq: Vec<BigUint>,
    /// Upper rational enclosure of the accumulated constant per level.
    #[serde(with = "frac_vec")]
    pub c_seq: Vec<Rational>,
    #[serde(with = "frac_vec")]
    pub epsilon_seq: Vec<Rational>,
}

/// Checks the finite prefixes against the definition of appropriate
/// sequences; the error names the first violated clause.
pub fn validate_appropriate(
    a_seq: &[Rational],
    b_seq: &[Rational],
    a: &Rational,
    b: &Rational,
) -> Result<()> {
    let bad = |m: String| Err(Error::Inappropriate(m));
    if a_seq.is_empty() || b_seq.is_empty() {
        return bad("sequences must be nonempty".into());
    }
    if *a < int(2) {
        return bad(format!("limit a = {} below 2", fmt_fraction(a)));
    }
    if *b > int(2) / a {
        return bad(format!("limit b = {} above 2/a", fmt_fraction(b)));
    }
    for (i, ak) in a_seq.iter().enumerate() {
        if *ak < Rational::one() || ak > a {
            return bad(format!("a_{} = {} outside [1, a]", i + 1, fmt_fraction(ak)));
        }
        if i > 0 && ak < &a_seq[i - 1] {
            return bad(format!("a_seq not non-decreasing at index {}", i + 1));
        }
    }
    for (i, bk) in b_seq.iter().enumerate() {
        if *bk < Rational::zero() || bk > b {
            return bad(format!("b_{} = {} outside [0, b]", i + 1, fmt_fraction(bk)));
        }
        if i > 0 && bk <= &b_seq[i - 1] {
            return bad(format!("b_seq not strictly increasing at index {}", i + 1));
        }
    }
    if a.recip() < *b && b_seq[0] <= a.recip() {
        return bad(format!(
            "1/a < b but b_1 = {} is not above 1/a",
            fmt_fraction(&b_seq[0])
        ));
    }
    Ok(())
}

/// Default strict-mode exponent schedule: constant `a_k = a` and `b_k`
/// climbing linearly to `b` over `depth + 2` steps from 1/a (family F
/// above 1/a) or from 0.
pub fn default_schedule(t: &TargetSpec) -> (Vec<Rational>, Vec<Rational>) {
    let n = t.depth + 2;
    let lo = if t.family == Family::F && t.b > t.a.recip() {
        t.a.recip()
    } else {
        Rational::zero()
    };
    let a_seq = vec![t.a.clone(); t.depth];
    let b_seq = (1..=n)
        .map(|k| &lo + (&t.b - &lo) * rat(k as i64, n as i64))
        .collect();
    (a_seq, b_seq)
}

/// Strict synthesis: for each level the least admissible power of two
/// `m_k` and the maximal `q_k` of the corresponding window.
pub fn synthesize(
    t: &TargetSpec,
    sieve: &Sieve,
    bit_cap: u64,
) -> Result<(ParamSequences, SynthReport)> {
    t.validate()?;
    if t.b.is_zero() {
        return Err(Error::InvalidArgument(
            "b = 0 is the singleton case and has no thinned construction".into(),
        ));
    }
    if t.family == Family::EJ {
        return Err(Error::InvalidArgument(
            "strict synthesis covers families E, F and G".into(),
        ));
    }
    let (a_seq, b_seq) = default_schedule(t);
    validate_appropriate(&a_seq, &b_seq, &t.a, &t.b)?;
    let mut seqs = ParamSequences {
        a_seq,
        b_seq,
        ..Default::default()
    };
    let mut report = SynthReport::default();
    let ctx = GrowthContext {
        family: t.family,
        sieve: *sieve,
        bit_cap,
        effective: None,
    };
    for k in 1..=t.depth {
        let (m, q, c, r) = growth_f(k, &seqs, &ctx)?;
        seqs.m_seq.push(m);
        seqs.q_seq.push(q);
        seqs.c_seq.push(c);
        report.extend(r);
    }
    Ok((seqs, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[(i64, i64)]) -> Vec<Rational> {
        xs.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn appropriate_examples() {
        let a3 = v(&[(3, 1), (3, 1), (3, 1)]);
        assert!(validate_appropriate(&a3, &v(&[(1, 10), (3, 20), (1, 5)]), &int(3), &rat(1, 5)).is_ok());
        let e = validate_appropriate(&a3, &v(&[(1, 5), (1, 5)]), &int(3), &rat(1, 5)).unwrap_err();
        assert!(e.to_string().contains("b_seq not strictly increasing"), "{e}");
        let e = validate_appropriate(&a3, &v(&[(1, 4), (3, 10)]), &int(3), &rat(2, 5)).unwrap_err();
        assert!(e.to_string().contains("1/a < b"), "{e}");
    }

    #[test]
    fn a_seq_must_not_decrease() {
        let e = validate_appropriate(&v(&[(3, 1), (5, 2)]), &v(&[(1, 10)]), &int(3), &rat(1, 5));
        assert!(e.is_err());
    }

    #[test]
    fn target_family_ranges() {
        let mk = |a: Rational, b: Rational, f| TargetSpec::new(a, b, f, 3, Mode::Strict);
        assert!(mk(int(3), rat(1, 5), Family::E).is_ok());
        assert!(mk(int(3), rat(2, 5), Family::E).is_err());
        assert!(mk(int(4), rat(2, 5), Family::F).is_ok());
        assert!(mk(int(2), rat(2, 5), Family::F).is_err());
        assert!(mk(int(2), rat(2, 5), Family::G).is_ok());
        assert!(mk(int(3), rat(1, 5), Family::G).is_err());
        assert!(mk(int(3), rat(1, 1), Family::E).is_err());
    }

    #[test]
    fn schedule_is_appropriate() {
        for (a, b, f) in [(3, (1, 5), Family::E), (4, (2, 5), Family::F), (4, (1, 4), Family::F)] {
            let t = TargetSpec::new(int(a), rat(b.0, b.1), f, 3, Mode::Strict).unwrap();
            let (aa, bb) = default_schedule(&t);
            assert_eq!(bb.len(), 5);
            assert_eq!(bb[4], t.b);
            validate_appropriate(&aa, &bb, &t.a, &t.b).unwrap();
        }
    }
}
