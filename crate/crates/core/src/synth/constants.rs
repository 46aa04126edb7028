use num_bigint::BigUint;
use num_traits::One;

use super::{Family, ParamSequences};
use crate::exact::pow::ln_enclosure;
use crate::exact::rational::{from_uint, int, Rational};
use crate::exact::PowerProduct;

pub(crate) const LN_BITS: u32 = 64;

pub(crate) fn ln_upper(m: &BigUint) -> Rational {
    ln_enclosure(m, LN_BITS).hi
}

pub(crate) fn ln_lower(m: &BigUint) -> Rational {
    ln_enclosure(m, LN_BITS).lo
}

/// The constant multiplying the level-`k` window term, built from levels
/// `1..k-1` (1-based). Every factor is an upper bound: `4^{b}` is replaced by
/// 4, `8^{b}` by 8, and logarithms by their upper enclosures.
///
/// E: `4 m_1^{a_1} prod_{i=2}^{k-1} q_i m_i^{a_i - 1}`
/// F: `8 2^{(k+1)(a+1)} m_1^{a_1} prod_{i=2}^{k-1} q_i ln(m_i) m_i^{a_i - 2}`
/// G: `8 2^k prod_{i<k} q_i`
pub fn c_product(family: Family, k: usize, seqs: &ParamSequences) -> PowerProduct {
    assert!(k >= 1 && seqs.m_seq.len() >= k - 1 && seqs.q_seq.len() >= k - 1);
    let two = BigUint::from(2u32);
    match family {
        Family::E | Family::EJ => {
            let mut p = PowerProduct::new(int(4));
            if k >= 2 {
                p = p.times(&seqs.m_seq[0], seqs.a_seq[0].clone());
            }
            for i in 2..k {
                p = p
                    .times(&seqs.q_seq[i - 1], Rational::one())
                    .times(&seqs.m_seq[i - 1], &seqs.a_seq[i - 1] - int(1));
            }
            p
        }
        Family::F => {
            let a = seqs.a_seq.last().cloned().unwrap_or_else(|| int(2));
            let mut p = PowerProduct::new(int(8)).times(&two, int(k as i64 + 1) * (a + int(1)));
            if k >= 2 {
                p = p.times(&seqs.m_seq[0], seqs.a_seq[0].clone());
            }
            for i in 2..k {
                p = p
                    .scaled(&ln_upper(&seqs.m_seq[i - 1]))
                    .times(&seqs.q_seq[i - 1], Rational::one())
                    .times(&seqs.m_seq[i - 1], &seqs.a_seq[i - 1] - int(2));
            }
            p
        }
        Family::G => {
            let mut c = int(8) * from_uint(&(BigUint::one() << k));
            for q in &seqs.q_seq[..k - 1] {
                c *= from_uint(q);
            }
            PowerProduct::new(c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;
    use std::cmp::Ordering;

    fn seqs() -> ParamSequences {
        ParamSequences {
            a_seq: vec![int(3); 3],
            b_seq: vec![rat(1, 25), rat(2, 25), rat(3, 25), rat(4, 25), rat(1, 5)],
            m_seq: vec![BigUint::from(16u32), BigUint::from(64u32)],
            q_seq: vec![BigUint::from(3u32), BigUint::from(5u32)],
            ..Default::default()
        }
    }

    #[test]
    fn family_e_constant() {
        let s = seqs();
        assert_eq!(c_product(Family::E, 1, &s).cmp_rational(&int(4)), Ordering::Equal);
        assert_eq!(c_product(Family::E, 2, &s).cmp_rational(&int(4 * 4096)), Ordering::Equal);
        // 4 * 16^3 * 5 * 64^2
        let want = int(4 * 4096 * 5 * 4096);
        assert_eq!(c_product(Family::E, 3, &s).cmp_rational(&want), Ordering::Equal);
    }

    #[test]
    fn family_g_constant() {
        let s = seqs();
        assert_eq!(c_product(Family::G, 3, &s).cmp_rational(&int(8 * 8 * 15)), Ordering::Equal);
    }

    #[test]
    fn family_f_constant_contains_log() {
        let mut s = seqs();
        s.a_seq = vec![int(4); 3];
        // 8 * 2^{4*5} * 16^4 * ln(64) * 5 * 64^2
        let c = c_product(Family::F, 3, &s);
        let base = int(8) * int(1 << 20) * int(65536) * int(5) * int(4096);
        let lo = &base * ln_lower(&BigUint::from(64u32));
        let hi = &base * ln_upper(&BigUint::from(64u32));
        assert_eq!(c.cmp_rational(&lo), Ordering::Greater);
        assert_eq!(c.cmp_rational(&hi), Ordering::Equal);
    }
}
