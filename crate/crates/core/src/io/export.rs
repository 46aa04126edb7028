use std::io::BufRead;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::pow::rational_pow_enclosure;
use crate::exact::rational::{fmt_fraction, frac_str, uint_str, Rational};
use crate::exact::Sieve;
use crate::family::{Construction, Family, LevelInput};
use crate::measure::{MassCheck, MassStatus};
use crate::probe::ProbeResult;
use crate::synth::{SynthReport, TargetSpec};

/// Levels with more intervals than this are described by the header only.
pub const EXPORT_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub family: Family,
    pub sieve_ceiling: u64,
    pub levels: Vec<LevelInput>,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub report: Option<SynthReport>,
    /// Levels `1..=listed_levels` follow as interval records.
    pub listed_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub level: usize,
    #[serde(with = "uint_str")]
    pub index: BigUint,
    #[serde(with = "uint_str")]
    pub parent: BigUint,
    #[serde(with = "frac_str")]
    pub lo: Rational,
    #[serde(with = "frac_str")]
    pub hi: Rational,
    #[serde(with = "frac_str")]
    pub center: Rational,
    #[serde(with = "frac_str")]
    pub radius_lo: Rational,
    #[serde(with = "frac_str")]
    pub radius_hi: Rational,
    #[serde(with = "frac_str")]
    pub mass: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Construction(Header),
    Interval(IntervalRecord),
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut name = path.file_name().ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?.to_os_string();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn header(c: &Construction) -> Header {
    let listed_levels = (1..=c.depth())
        .take_while(|&k| *c.level_count(k) <= BigUint::from(EXPORT_CAP))
        .count();
    Header {
        family: c.family,
        sieve_ceiling: c.sieve.ceiling,
        levels: c.inputs(),
        target: c.target.clone(),
        report: c.report.clone(),
        listed_levels,
    }
}

/// Interval records of level `k`, in index (= left-to-right) order.
pub fn records(c: &Construction, k: usize) -> Result<Vec<IntervalRecord>> {
    let spec = c.level(k);
    let mass = c.mass(k);
    Ok(c
        .enumerate(k, EXPORT_CAP)?
        .into_iter()
        .enumerate()
        .map(|(i, iv)| {
            let index = BigUint::from(i);
            IntervalRecord {
                level: k,
                parent: &index / &spec.i_k,
                index,
                center: iv.center(),
                lo: iv.lo,
                hi: iv.hi,
                radius_lo: spec.radius_lo.clone(),
                radius_hi: spec.radius_hi.clone(),
                mass: mass.clone(),
            }
        })
        .collect())
}

/// JSON-Lines: one header line, then interval records sorted by
/// `(level, lo)`.
pub fn export_jsonl(c: &Construction) -> Result<Vec<u8>> {
    let h = header(c);
    let n = h.listed_levels;
    let mut out = serde_json::to_vec(&Line::Construction(h)).expect("header serializes");
    out.push(b'\n');
    for k in 1..=n {
        for r in records(c, k)? {
            serde_json::to_writer(&mut out, &Line::Interval(r)).expect("record serializes");
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// Rebuilds the construction from the header and checks every record
/// against it.
pub fn import_jsonl(bytes: &[u8]) -> Result<Construction> {
    let mut lines = bytes.lines();
    let first = lines.next().ok_or_else(|| Error::Io("empty export".into()))??;
    let Line::Construction(h) = serde_json::from_str(&first).map_err(|e| Error::Io(format!("header: {e}")))? else {
        return Err(Error::Io("first line must be the construction header".into()));
    };
    let mut c = Construction::from_inputs(h.family, Sieve::new(h.sieve_ceiling), &h.levels)?;
    c.target = h.target;
    c.report = h.report;
    let mut expected = (1..=h.listed_levels).flat_map(|k| records(&c, k).into_iter().flatten());
    let mut seen = 0usize;
    for (n, line) in lines.enumerate() {
        let line = line?;
        let Line::Interval(r) = serde_json::from_str(&line).map_err(|e| Error::Io(format!("line {}: {e}", n + 2)))? else {
            return Err(Error::Io(format!("line {}: second header", n + 2)));
        };
        if expected.next().as_ref() != Some(&r) {
            return Err(Error::Io(format!("line {}: record does not match the rebuilt construction", n + 2)));
        }
        seen += 1;
    }
    let total: usize = (1..=h.listed_levels).map(|k| c.level_count(k).to_string().parse::<usize>().unwrap_or(0)).sum();
    if seen != total {
        return Err(Error::Io(format!("expected {total} interval records, found {seen}")));
    }
    Ok(c)
}

fn csv_bytes<S: Serialize>(rows: impl IntoIterator<Item = S>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct SweepRow<'a> {
    level: usize,
    constraint: &'a str,
    lhs: &'a str,
    relation: &'a str,
    rhs: &'a str,
    pass: bool,
}

/// Verification sweep: one row per checked constraint.
pub fn sweep_csv(r: &SynthReport) -> Result<Vec<u8>> {
    csv_bytes(r.checks.iter().map(|c| SweepRow {
        level: c.level,
        constraint: &c.constraint,
        lhs: &c.lhs,
        relation: &c.relation,
        rhs: &c.rhs,
        pass: c.satisfied,
    }))
}

#[derive(Serialize)]
struct PlotRow {
    level: usize,
    lo: String,
    hi: String,
    length: String,
    mu: String,
    b_k: String,
    length_pow_b_lo: String,
    length_pow_b_hi: String,
    status: String,
}

/// Plot data: scale, `mu(I)` and an enclosure of `|I|^{b_k}` per test.
pub fn plot_csv(checks: &[MassCheck]) -> Result<Vec<u8>> {
    let rows = checks
        .iter()
        .map(|m| {
            let len = m.interval.len();
            let p = rational_pow_enclosure(&len, &m.b_k, 64)?;
            Ok(PlotRow {
                level: m.level,
                lo: fmt_fraction(&m.interval.lo),
                hi: fmt_fraction(&m.interval.hi),
                length: fmt_fraction(&len),
                mu: fmt_fraction(&m.mu),
                b_k: fmt_fraction(&m.b_k),
                length_pow_b_lo: fmt_fraction(&p.lo),
                length_pow_b_hi: fmt_fraction(&p.hi),
                status: match &m.status {
                    MassStatus::Pass => "pass".into(),
                    MassStatus::Fail => "fail".into(),
                    MassStatus::Skipped { reason } => format!("skipped: {reason}"),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    csv_bytes(rows)
}

#[derive(Serialize)]
struct ProbeRow {
    seed: u64,
    level: usize,
    delta: String,
    rho: String,
    contained: bool,
    zeta_lo: String,
    zeta_hi: String,
}

pub fn probe_csv(results: &[ProbeResult]) -> Result<Vec<u8>> {
    csv_bytes(results.iter().flat_map(|r| {
        r.levels.iter().map(move |l| {
            let (zl, zh) = l.zeta.clone().unwrap_or_default();
            ProbeRow {
                seed: r.seed,
                level: l.level,
                delta: fmt_fraction(&l.delta),
                rho: fmt_fraction(&l.rho),
                contained: l.contained,
                zeta_lo: zl,
                zeta_hi: zh,
            }
        })
    }))
}

/// JSON-Lines of arbitrary serializable records.
pub fn jsonl<S: Serialize>(rows: impl IntoIterator<Item = S>) -> Vec<u8> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, &r).expect("record serializes");
        out.push(b'\n');
    }
    out
}
