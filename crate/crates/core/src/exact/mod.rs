//! Exact substrate: rationals, directed power bounds, intervals, primes.

pub mod farey;
pub mod interval;
pub mod pow;
pub mod primes;
pub mod rational;

pub use interval::{gap, union_normalize, Interval};
pub use pow::{pow_bound, pow_enclosure, DirectedBound, Direction, Enclosure, PowerProduct};
pub use primes::Sieve;
pub use rational::Rational;
