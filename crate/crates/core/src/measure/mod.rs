//! Uniform measure queries and the finite certificates built on them.

pub mod bset;
pub mod cover;
pub mod mass;
pub mod mu;

pub use bset::{b_set_cover_measure, b_set_enumerate, cover_count, least_d, tail_sum_bound, tail_sum_bound_at, BSetSpec, TailSum};
pub use cover::{covering_bound, covering_sum, CoveringSum};
pub use mass::{dyadic_sweep, verify_mass_distribution, MassCheck, MassStatus};
pub use mu::{brute_mu, mu, mu_report, MeasureReport};
