use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::exact::pow::log2_enclosure;
use crate::exact::rational::{ceil, frac_str, from_uint, log2_exact, uint_str, Rational};
use crate::exact::PowerProduct;
use crate::family::Construction;
use crate::synth::{prefix_description_bits, ParamSequences};

const LOG2_BITS: u32 = 48;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub level: usize,
    #[serde(with = "uint_str")]
    pub n: BigUint,
    /// `ceil(log2 N)`.
    pub code_bits: u64,
    /// `ceil(a log2(m) (b + eps))`.
    pub budget_bits: u64,
    /// False when `m` is not a power of two and `log2 m` was bounded below.
    pub budget_exact: bool,
    pub pass: bool,
    /// `m/q < m^{a(b + eps)}`, exact.
    pub ratio_ok: bool,
    pub prefix_bits: u64,
    /// prefix + index + 1 disambiguation bit.
    pub total_bits: u64,
    #[serde(with = "frac_str")]
    pub total_budget: Rational,
    pub total_pass: bool,
    pub certifying: bool,
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn code_bits(n: &BigUint) -> u64 {
    if n.is_one() {
        0
    } else {
        (n - 1u32).bits()
    }
}

fn log2_lower(m: &BigUint) -> (Rational, bool) {
    match log2_exact(m) {
        Some(e) => (Rational::from_integer(e.into()), true),
        None => (log2_enclosure(&from_uint(m), LOG2_BITS).lo, false),
    }
}

/// Interval-code-length witness at level `l` with slack `eps`, against the
/// target dimension `b`. `seqs` supplies the prefix description.
pub fn code_length_witness(
    c: &Construction,
    l: usize,
    b_l: &Rational,
    eps: &Rational,
    b: &Rational,
    seqs: &ParamSequences,
    certifying: bool,
) -> WitnessRecord {
    let spec = c.level(l);
    let n = c.level_count(l).clone();
    let code = code_bits(&n);
    let (lg, exact) = log2_lower(&spec.m);
    let budget = ceil(&(&spec.a * &lg * (b_l + eps)));
    let budget_bits = budget.to_u64().unwrap_or(0);
    let e = &spec.a * (b_l + eps);
    // m/q < m^e  iff  q m^{e-1} > 1
    let ratio_ok = !PowerProduct::new(from_uint(&spec.q))
        .times(&spec.m, e - Rational::one())
        .le(&Rational::one());
    let prefix_bits = prefix_description_bits(seqs, l);
    let total_bits = prefix_bits + code + 1;
    let total_budget = &spec.a * &lg * b;
    WitnessRecord {
        level: l,
        n,
        code_bits: code,
        budget_bits,
        budget_exact: exact,
        pass: code <= budget_bits,
        ratio_ok,
        prefix_bits,
        total_bits,
        total_pass: Rational::from_integer(total_bits.into()) <= total_budget,
        total_budget,
        certifying,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    #[test]
    fn code_bits_is_ceil_log2() {
        assert_eq!(code_bits(&BigUint::from(1u32)), 0);
        assert_eq!(code_bits(&BigUint::from(2u32)), 1);
        assert_eq!(code_bits(&BigUint::from(4112u32)), 13);
        assert_eq!(code_bits(&BigUint::from(4096u32)), 12);
        // 2^20 / 255 floors to 4112 > 2^12
        assert_eq!(code_bits(&(BigUint::from(1u32 << 20) / 255u32)), 13);
    }

    #[test]
    fn budget_arithmetic() {
        let (lg, exact) = log2_lower(&BigUint::from(1u32 << 20));
        assert!(exact);
        assert_eq!(ceil(&(Rational::from_integer(3.into()) * lg * rat(21, 100))), 13.into());
        let (lg, exact) = log2_lower(&BigUint::from(1000u32));
        assert!(!exact);
        assert!(lg < rat(997, 100) && lg > rat(996, 100));
    }
}
