//! Run configuration, orchestration and exact export formats.

mod config;
mod export;
mod run;

pub use config::{Caps, RunConfig, SIEVE_ENV};
pub use export::{
    export_jsonl, header, import_jsonl, jsonl, plot_csv, probe_csv, records, sweep_csv, write_atomic, Header,
    IntervalRecord, EXPORT_CAP,
};
pub use run::{Outcome, Runner, SWEEP_RANDOM, SWEEP_SCALES};
