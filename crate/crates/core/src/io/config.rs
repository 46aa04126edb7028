use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::primes::DEFAULT_SIEVE_CEILING;
use crate::exact::rational::{parse_fraction, Rational};
use crate::exact::Sieve;
use crate::path::{DEFAULT_CANDIDATE_CAP, DEFAULT_SUBSTAGES};
use crate::synth::{Family, Mode, TargetSpec};

pub const SIEVE_ENV: &str = "JARNIK_SIEVE_CEILING";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_substages")]
    pub substages: usize,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default = "default_sieve")]
    pub sieve_ceiling: u64,
}

fn default_substages() -> usize {
    DEFAULT_SUBSTAGES
}
fn default_candidates() -> usize {
    DEFAULT_CANDIDATE_CAP
}
fn default_sieve() -> u64 {
    DEFAULT_SIEVE_CEILING
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            substages: DEFAULT_SUBSTAGES,
            candidates: DEFAULT_CANDIDATE_CAP,
            sieve_ceiling: DEFAULT_SIEVE_CEILING,
        }
    }
}

/// Run configuration. Exponents are fraction strings such as `"1/5"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub a: String,
    pub b: String,
    pub family: Family,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub demo_m_list: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_mode() -> Mode {
    Mode::Demo
}
fn default_depth() -> usize {
    3
}
fn default_precision() -> u32 {
    64
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn a(&self) -> Result<Rational> {
        parse_fraction(&self.a).map_err(|e| Error::Config(format!("a: {e}")))
    }

    pub fn b(&self) -> Result<Rational> {
        parse_fraction(&self.b).map_err(|e| Error::Config(format!("b: {e}")))
    }

    /// Validated target. Family/exponent mismatches are configuration
    /// errors.
    pub fn target(&self) -> Result<TargetSpec> {
        TargetSpec::new(self.a()?, self.b()?, self.family, self.depth, self.mode).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            e => e,
        })
    }

    /// The sieve, with the ceiling overridable from the environment.
    pub fn sieve(&self) -> Result<Sieve> {
        let ceiling = match std::env::var(SIEVE_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SIEVE_ENV} = {v:?} is not an integer")))?,
            Err(_) => self.caps.sieve_ceiling,
        };
        Ok(Sieve::new(ceiling))
    }
}
