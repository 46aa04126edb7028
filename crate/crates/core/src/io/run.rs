use std::path::PathBuf;

use num_traits::Zero;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::export::{export_jsonl, import_jsonl, jsonl, plot_csv, probe_csv, sweep_csv, write_atomic};
use crate::error::{Error, Result};
use crate::exact::rational::{frac_str, int, rat, Rational};
use crate::family::presets::{demo_inputs, path_demo_inputs, strict_inputs};
use crate::family::{Construction, Family};
use crate::measure::{covering_bound, covering_sum, dyadic_sweep, verify_mass_distribution, MassCheck, MassStatus};
use crate::path::{
    code_length_witness, effective_initial, effective_stage, run_classical, EffectiveParams, PathContext,
};
use crate::probe::{exponent_estimate, sample_point};
use crate::synth::{synthesize, Mode, ParamSequences, SynthReport, DEFAULT_BIT_CAP};

pub const SWEEP_SCALES: usize = 8;
pub const SWEEP_RANDOM: usize = 4;

/// What a subcommand wrote and whether its certificates hold.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn merge(&mut self, o: Outcome) {
        self.pass &= o.pass;
        self.files.extend(o.files);
        self.notes.extend(o.notes);
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub struct Runner {
    pub cfg: RunConfig,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Singleton {
    note: &'static str,
    #[serde(with = "frac_str")]
    a: Rational,
    certificate: &'static str,
}

#[derive(Serialize)]
struct Synthesized<'a> {
    sequences: &'a ParamSequences,
    report: &'a SynthReport,
}

impl Runner {
    pub fn new(cfg: RunConfig, out_dir: Option<PathBuf>) -> Self {
        let out = out_dir.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        Runner { cfg, out }
    }

    fn write(&self, o: &mut Outcome, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.out.join(name);
        write_atomic(&p, bytes)?;
        o.files.push(p);
        Ok(())
    }

    /// `b = 0`: the set is a single point of exponent `a`.
    fn singleton(&self) -> Result<Option<Outcome>> {
        let t = self.cfg.target()?;
        if !t.b.is_zero() {
            return Ok(None);
        }
        let mut o = Outcome {
            pass: true,
            ..Default::default()
        };
        let s = Singleton {
            note: "b = 0: E = {x} for any x of irrationality exponent a; dimension 0, measure concentrated on x",
            a: t.a,
            certificate: "trivial",
        };
        self.write(&mut o, "singleton.json", &serde_json::to_vec_pretty(&s).expect("serializes"))?;
        o.notes.push(s.note.into());
        Ok(Some(o))
    }

    pub fn synthesized(&self) -> Result<(ParamSequences, SynthReport)> {
        let t = self.cfg.target()?;
        synthesize(&t, &self.cfg.sieve()?, DEFAULT_BIT_CAP)
    }

    /// Demo presets exist for E at `a = 3` and `a = 6` (path runs), G at
    /// `a = 2`, F and EJ at `a = 3`.
    fn demo_construction(&self) -> Result<Construction> {
        let t = self.cfg.target()?;
        let sieve = self.cfg.sieve()?;
        let mut inputs = match (t.family, t.a == int(6)) {
            (Family::E, true) => path_demo_inputs(t.depth),
            _ => {
                let preset = match t.family {
                    Family::G => int(2),
                    _ => int(3),
                };
                if t.a != preset {
                    return Err(Error::Config(format!("no demo preset for family {} at a = {}", t.family, self.cfg.a)));
                }
                demo_inputs(t.family, t.depth, &sieve)?
            }
        };
        if inputs.len() < t.depth {
            return Err(Error::Config(format!("demo presets go to depth {}", inputs.len())));
        }
        if let Some(ms) = &self.cfg.demo_m_list {
            if ms.len() != inputs.len() {
                return Err(Error::Config(format!("demo_m_list needs {} entries", inputs.len())));
            }
            for (i, m) in inputs.iter_mut().zip(ms) {
                i.m = (*m).into();
            }
        }
        Construction::from_inputs(t.family, sieve, &inputs)
    }

    pub fn construction(&self) -> Result<Construction> {
        let t = self.cfg.target()?;
        match t.mode {
            Mode::Demo => self.demo_construction(),
            Mode::Strict => {
                let (seqs, rep) = self.synthesized()?;
                let mut c = Construction::from_inputs(t.family, self.cfg.sieve()?, &strict_inputs(t.family, &seqs)?)?;
                c.target = Some(t);
                c.report = Some(rep);
                Ok(c)
            }
        }
    }

    pub fn synthesize(&self) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let mut o = Outcome::default();
        let (seqs, rep) = self.synthesized()?;
        o.pass = rep.all_satisfied();
        let body = serde_json::to_vec_pretty(&Synthesized { sequences: &seqs, report: &rep }).expect("serializes");
        self.write(&mut o, "synth.json", &body)?;
        self.write(&mut o, "synth_sweep.csv", &sweep_csv(&rep)?)?;
        Ok(o)
    }

    pub fn build(&self) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let c = self.construction()?;
        let mut o = Outcome {
            pass: true,
            ..Default::default()
        };
        self.write(&mut o, "construction.jsonl", &export_jsonl(&c)?)?;
        Ok(o)
    }

    pub fn mass_checks(&self, c: &Construction) -> Result<Vec<MassCheck>> {
        let b = self.b_levels(c)?;
        let mut out = Vec::new();
        for k in 2..=c.depth() {
            let tests = dyadic_sweep(c, k, SWEEP_SCALES, SWEEP_RANDOM, self.cfg.seed);
            out.extend(verify_mass_distribution(c, k, &b[k - 1], &tests));
        }
        Ok(out)
    }

    /// `b_1..b_{K+2}`: the synthesized schedule, or `b` throughout for
    /// demo runs.
    fn b_levels(&self, c: &Construction) -> Result<Vec<Rational>> {
        let t = self.cfg.target()?;
        Ok(match t.mode {
            Mode::Strict => self.synthesized()?.0.b_seq,
            Mode::Demo => vec![t.b; c.depth() + 2],
        })
    }

    pub fn verify(&self) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let c = self.construction()?;
        let mut o = Outcome::default();
        let mut ok = (0..=c.depth()).all(|k| crate::exact::rational::from_uint(c.level_count(k)) * c.mass(k) == int(1));
        let checks = self.mass_checks(&c)?;
        let fails = checks.iter().filter(|m| m.status == MassStatus::Fail).count();
        // demo constants are reported, not certified
        if self.cfg.mode == Mode::Strict {
            ok &= fails == 0;
        }
        o.notes.push(format!("{} mass tests, {fails} failures", checks.len()));
        if let Some(rep) = &c.report {
            ok &= rep.all_satisfied();
            self.write(&mut o, "synth_sweep.csv", &sweep_csv(rep)?)?;
        }
        if self.cfg.mode == Mode::Strict {
            let t = self.cfg.target()?;
            let b = self.b_levels(&c)?;
            // G has dimension 2b
            let dim = if c.family == Family::G { int(2) * &t.b } else { t.b.clone() };
            let beta = dim + rat(1, 20);
            let mut sums = Vec::new();
            for k in 1..=c.depth() {
                let s = covering_sum(&c, k, &beta)?;
                let bound = covering_bound(c.family, &c.level(k).m, &c.level(k).a, &beta, &b[k + 1])?;
                ok &= s.hi <= bound.lo;
                sums.push(s);
            }
            ok &= sums.windows(2).all(|w| w[1].hi < w[0].lo);
            self.write(&mut o, "covering.jsonl", &jsonl(&sums))?;
        }
        self.write(&mut o, "mass_plot.csv", &plot_csv(&checks)?)?;
        o.pass = ok;
        Ok(o)
    }

    pub fn path(&self) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let t = self.cfg.target()?;
        let c = self.construction()?;
        let demo = t.mode == Mode::Demo;
        let ctx = PathContext::new(c, t.a.clone(), self.cfg.caps.candidates, demo)?;
        let mut o = Outcome::default();
        let stages = t.depth.saturating_sub(1).max(1);
        let (states, reports) = match run_classical(&ctx, stages) {
            Ok(r) => r,
            Err(Error::Path(m)) => {
                o.notes.push(format!("classical path: {m}"));
                return Ok(o);
            }
            Err(e) => return Err(e),
        };
        o.pass = reports.iter().all(|r| r.certificate.as_ref().is_some_and(|c| c.holds));
        self.write(&mut o, "path_states.jsonl", &jsonl(&states))?;
        self.write(&mut o, "path_stages.jsonl", &jsonl(&reports))?;
        let p = EffectiveParams {
            a: t.a.clone(),
            b: t.b.clone(),
            alpha0: &t.a - rat(1, 4),
            alpha_bar0: &t.a + rat(1, 4),
            beta0: &t.b / int(2),
            eps0: &t.b / int(4),
            max_substages: self.cfg.caps.substages,
        };
        match effective_stage(&ctx, &p, &effective_initial(&p)?) {
            Ok((_, rep)) => {
                o.pass &= rep.certificate.holds;
                self.write(&mut o, "path_effective.jsonl", &jsonl([&rep]))?;
            }
            Err(e @ Error::Capacity { .. }) => return Err(e),
            Err(e) => {
                o.pass = false;
                o.notes.push(format!("effective stage: {e}"));
            }
        }
        Ok(o)
    }

    pub fn witness(&self) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let t = self.cfg.target()?;
        let c = self.construction()?;
        let mut o = Outcome::default();
        let certifying = t.mode == Mode::Strict;
        let seqs = match t.mode {
            Mode::Strict => self.synthesized()?.0,
            Mode::Demo => ParamSequences {
                a_seq: c.levels.iter().map(|l| l.a.clone()).collect(),
                b_seq: vec![t.b.clone(); c.depth() + 2],
                m_seq: c.levels.iter().map(|l| l.m.clone()).collect(),
                q_seq: c.levels.iter().map(|l| l.q.clone()).collect(),
                ..Default::default()
            },
        };
        let recs: Vec<_> = (1..=c.depth())
            .map(|l| {
                let eps = &seqs.b_seq[l + 1] - &seqs.b_seq[l - 1];
                code_length_witness(&c, l, &seqs.b_seq[l - 1], &eps, &t.b, &seqs, certifying)
            })
            .collect();
        o.pass = recs.iter().all(|r| r.pass);
        if !certifying {
            o.notes.push("demo witness: non-certifying".into());
        }
        self.write(&mut o, "witness.jsonl", &jsonl(&recs))?;
        Ok(o)
    }

    pub fn sample(&self, count: u64) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let c = self.construction()?;
        let pts: Vec<_> = (0..count).map(|i| sample_point(&c, c.depth(), self.cfg.seed + i)).collect();
        let mut o = Outcome {
            pass: true,
            ..Default::default()
        };
        self.write(&mut o, "samples.jsonl", &jsonl(&pts))?;
        Ok(o)
    }

    pub fn probe(&self, count: u64) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let c = self.construction()?;
        let res: Vec<_> = (0..count)
            .into_par_iter()
            .map(|i| exponent_estimate(&sample_point(&c, c.depth(), self.cfg.seed + i), &c))
            .collect();
        let mut o = Outcome {
            pass: res.iter().all(|r| r.levels.iter().all(|l| l.contained)),
            ..Default::default()
        };
        self.write(&mut o, "probe.csv", &probe_csv(&res)?)?;
        self.write(&mut o, "probe.jsonl", &jsonl(&res))?;
        Ok(o)
    }

    pub fn export(&self) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let c = self.construction()?;
        let bytes = export_jsonl(&c)?;
        let mut o = Outcome::default();
        o.pass = import_jsonl(&bytes)? == c;
        self.write(&mut o, "construction.jsonl", &bytes)?;
        Ok(o)
    }

    /// Full pipeline: synthesize (strict), build, verify, path (the E path
    /// preset), probe and export.
    pub fn run(&self, count: u64) -> Result<Outcome> {
        if let Some(o) = self.singleton()? {
            return Ok(o);
        }
        let mut o = Outcome {
            pass: true,
            ..Default::default()
        };
        if self.cfg.mode == Mode::Strict {
            o.merge(self.synthesize()?);
            if self.cfg.family == Family::F {
                o.notes.push("strict family F levels are too large to list; synthesis only".into());
                return Ok(o);
            }
        }
        o.merge(self.verify()?);
        if self.cfg.family == Family::E && self.cfg.mode == Mode::Demo && self.cfg.a()? == int(6) {
            o.merge(self.path()?);
        } else {
            o.notes.push("path selection runs on the family E demo with a = 6".into());
        }
        o.merge(self.probe(count)?);
        o.merge(self.export()?);
        o.files.sort();
        o.files.dedup();
        Ok(o)
    }
}
