use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jarnik_core::io::{RunConfig, Runner};
use jarnik_core::synth::Mode;
use jarnik_core::Result;

#[derive(Parser)]
#[command(name = "jarnik", version, about = "Exact Jarnik-type Cantor sets: build, verify, select, probe")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// strict or demo; overrides the configuration.
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize m_k, q_k and the constraint report.
    Synthesize,
    /// Build the construction and write its interval records.
    Build,
    /// Normalization, mass-distribution sweep and covering sums.
    Verify,
    /// Distinguished-path stages and their certificates.
    Path,
    /// Interval-code-length witnesses.
    Witness,
    /// Seeded sample points.
    Sample {
        #[arg(long, default_value_t = 100)]
        count: u64,
    },
    /// Diophantine probe of seeded samples.
    Probe {
        #[arg(long, default_value_t = 100)]
        count: u64,
    },
    /// Export with an import round-trip check.
    Export,
    /// Everything above in sequence.
    Run {
        #[arg(long, default_value_t = 100)]
        count: u64,
    },
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => return Err(jarnik_core::Error::Config("--config <path> is required".into())),
    };
    if let Some(m) = &cli.mode {
        cfg.mode = m.parse::<Mode>()?;
    }
    if let Some(d) = cli.depth {
        cfg.depth = d;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> u8 {
    let res = config(&cli).and_then(|cfg| {
        let r = Runner::new(cfg, cli.out_dir.clone());
        match cli.cmd {
            Cmd::Synthesize => r.synthesize(),
            Cmd::Build => r.build(),
            Cmd::Verify => r.verify(),
            Cmd::Path => r.path(),
            Cmd::Witness => r.witness(),
            Cmd::Sample { count } => r.sample(count),
            Cmd::Probe { count } => r.probe(count),
            Cmd::Export => r.export(),
            Cmd::Run { count } => r.run(count),
        }
    });
    match res {
        Ok(o) => {
            for n in &o.notes {
                println!("note: {n}");
            }
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            println!("{}", if o.pass { "PASS" } else { "FAIL" });
            o.exit_code() as u8
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(execute(Cli::parse()))
}
