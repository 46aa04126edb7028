//! Jarník interval trees and their thinned families.

pub mod radius;

pub use crate::synth::Family;
pub mod gp;

pub use gp::{build_g_p, build_k, build_k_unchecked, certify_k_gaps, GpFamily, KFamily};
pub mod construction;
pub mod level;

pub use construction::{count_progression, Construction, ENUM_CAP};
pub use level::{LevelInput, LevelSpec, Selector};
pub mod presets;
