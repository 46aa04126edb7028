//! Small hand-picked constructions whose levels can be enumerated.

use num_bigint::BigUint;
use num_traits::One;

use super::construction::Construction;
use super::level::{LevelInput, Selector};
use super::Family;
use crate::error::{Error, Result};
use crate::exact::rational::{int, Rational};
use crate::exact::Sieve;
use crate::synth::ParamSequences;

fn residue(m: BigUint, a: Rational, q: u64, h: u64) -> LevelInput {
    LevelInput {
        m,
        a,
        q: BigUint::from(q),
        selector: Selector::Residue { h: BigUint::from(h) },
    }
}

fn pow2(n: u32) -> BigUint {
    BigUint::one() << n
}

/// Family E with `a_k = 3`: `m = 16, 2^16, 2^51, 2^157`, up to depth 4.
pub fn demo_e_inputs(depth: usize) -> Vec<LevelInput> {
    [(4, 3, 0), (16, 5, 1), (51, 4, 3), (157, 3, 2)]
        .iter()
        .take(depth)
        .map(|&(n, q, h)| residue(pow2(n), int(3), q, h))
        .collect()
}

/// Family G: `m = 16, 256, 4096`, `q = 3`.
pub fn demo_g_inputs(depth: usize) -> Vec<LevelInput> {
    [(4, 1), (8, 0), (12, 2)]
        .iter()
        .take(depth)
        .map(|&(n, h)| residue(pow2(n), int(2), 3, h))
        .collect()
}

const LISTED_M: [u64; 3] = [9, 300, 370_000];

/// `E^J` with `a = 3` and `m = 9, 300, 370000`.
pub fn demo_ej_inputs(depth: usize) -> Vec<LevelInput> {
    LISTED_M
        .iter()
        .take(depth)
        .map(|&m| LevelInput {
            m: BigUint::from(m),
            a: int(3),
            q: BigUint::one(),
            selector: Selector::AllPrimes,
        })
        .collect()
}

/// Family F with `a = 3` over the `EJ` levels: `H_1 = {13}` from the full
/// pool, then every other prime with that half as the pool.
pub fn demo_f_inputs(depth: usize, sieve: &Sieve) -> Result<Vec<LevelInput>> {
    let mut out = Vec::new();
    for (k, &m) in LISTED_M.iter().take(depth).enumerate() {
        let (primes, pool) = if k == 0 {
            (vec![13], None)
        } else {
            let half: Vec<u64> = sieve.primes_in(m, 2 * m)?.into_iter().step_by(2).collect();
            (half.clone(), Some(half))
        };
        out.push(LevelInput {
            m: BigUint::from(m),
            a: int(3),
            q: BigUint::from(primes.len()),
            selector: Selector::Primes { primes, pool },
        });
    }
    Ok(out)
}

pub fn demo_inputs(family: Family, depth: usize, sieve: &Sieve) -> Result<Vec<LevelInput>> {
    Ok(match family {
        Family::E => demo_e_inputs(depth),
        Family::G => demo_g_inputs(depth),
        Family::EJ => demo_ej_inputs(depth),
        Family::F => demo_f_inputs(depth, sieve)?,
    })
}

pub fn demo(family: Family, depth: usize) -> Result<Construction> {
    let sieve = Sieve::default();
    Construction::from_inputs(family, sieve, &demo_inputs(family, depth, &sieve)?)
}

/// Family E for path runs: `a = 6`, `m = 101, 2^45, 2^275`, `q = 3, 5, 4`.
/// The prime first level keeps level-1 centers off small denominators.
pub fn path_demo_inputs(depth: usize) -> Vec<LevelInput> {
    [(BigUint::from(101u32), 3), (pow2(45), 5), (pow2(275), 4)]
        .into_iter()
        .take(depth)
        .map(|(m, q)| residue(m, int(6), q, 0))
        .collect()
}

pub fn path_demo(depth: usize) -> Result<Construction> {
    Construction::from_inputs(Family::E, Sieve::default(), &path_demo_inputs(depth))
}

/// Residue levels (`h_k = 0`) for synthesized E or G sequences.
pub fn strict_inputs(family: Family, seqs: &ParamSequences) -> Result<Vec<LevelInput>> {
    if !matches!(family, Family::E | Family::G) {
        return Err(Error::Family(format!("family {family} has no symbolic construction")));
    }
    Ok(seqs
        .m_seq
        .iter()
        .zip(&seqs.q_seq)
        .zip(&seqs.a_seq)
        .map(|((m, q), a)| LevelInput {
            m: m.clone(),
            a: a.clone(),
            q: q.clone(),
            selector: Selector::Residue { h: BigUint::from(0u32) },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_three_demos_are_enumerable() {
        for f in [Family::E, Family::G, Family::EJ, Family::F] {
            let c = demo(f, 3).unwrap();
            let sizes: Vec<String> = (1..=3).map(|k| c.level(k).i_k.to_string()).collect();
            eprintln!("{f}: i_k = {sizes:?}, N_3 = {}", c.level_count(3));
            assert!(*c.level_count(3) <= BigUint::from(100_000u32));
        }
    }
}
