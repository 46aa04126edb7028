pub mod error;
pub mod exact;
pub mod family;
pub mod io;
pub mod measure;
pub mod path;
pub mod probe;
pub mod synth;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
