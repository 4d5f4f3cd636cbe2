//! Residue-class sweeps: expand a [`SweepConfig`] into (check, prime) tasks,
//! run them on a worker pool, and emit the records in a deterministic order.

use std::io::{BufRead, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{primes_in_class, PrimeCtx, ResidueClass};
use crate::identities::{
    diagnostic_check, half_index_check, reduction_crosscheck, verify_intro_identity,
    verify_theorem, CheckId, CheckRecord, IntroIdentity, Status, Theorem,
};
use crate::poly::{Claim, QuadForm};

/// Environment variable that overrides the worker count.
pub const JOBS_ENV: &str = "DETCONG_JOBS";

/// Default upper end of a theorem sweep.
pub const DEFAULT_PMAX: u64 = 503;

/// Above this, elimination cost makes sweeps slow; callers should warn.
pub const SLOW_PRIME_WARNING: u64 = 2003;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub checks: Vec<CheckId>,
    pub lo: u64,
    pub hi: u64,
    /// Replaces each check's default residue class when set.
    pub class: Option<ResidueClass>,
    /// Form for the checks that take one (bracket, reduction).
    pub form: Option<QuadForm>,
    pub jobs: usize,
    /// Count diagnostic records as failures for the exit code.
    pub strict: bool,
    /// Marks the first record as failed; exercises the exit-code path.
    pub inject_failure: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            checks: Vec::new(),
            lo: 5,
            hi: DEFAULT_PMAX,
            class: None,
            form: None,
            jobs: 1,
            strict: false,
            inject_failure: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.checks.is_empty() {
            return Err(Error::usage("no checks requested"));
        }
        if self.lo < 5 {
            return Err(Error::usage(format!(
                "pmin must be at least 5, got {}",
                self.lo
            )));
        }
        if self.hi < self.lo {
            return Err(Error::usage(format!(
                "pmax {} below pmin {}",
                self.hi, self.lo
            )));
        }
        if self.jobs == 0 {
            return Err(Error::usage("worker count must be at least 1"));
        }
        Ok(())
    }
}

/// Worker count: the environment override if set, else the flag, else the
/// number of available cores.
pub fn resolve_jobs(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(JOBS_ENV) {
        return v
            .trim()
            .parse()
            .map_err(|_| Error::usage(format!("{JOBS_ENV}={v:?} is not a worker count")));
    }
    Ok(flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

/// The residue class a check sweeps when none is given.
pub fn default_class(check: CheckId) -> Option<ResidueClass> {
    let class =
        |rs: &[u64], m: u64| Some(ResidueClass::new(rs.iter().copied(), m).expect("static class"));
    match check {
        CheckId::Theorem(Theorem::I) | CheckId::Diag(Claim::F21 | Claim::F23) => class(&[7], 8),
        CheckId::Theorem(Theorem::II) | CheckId::Diag(Claim::F26 | Claim::F210) => class(&[2], 3),
        CheckId::Theorem(Theorem::III)
        | CheckId::HalfIndex
        | CheckId::Diag(Claim::F213 | Claim::Sym43) => class(&[3, 7], 20),
        CheckId::Intro(IntroIdentity::D11) => class(&[2], 3),
        CheckId::Intro(IntroIdentity::Recip) => class(&[3], 4),
        CheckId::Intro(IntroIdentity::Wsn) => class(&[5], 6),
        CheckId::Intro(IntroIdentity::Bracket) | CheckId::Reduction => None,
    }
}

fn default_form(check: CheckId) -> QuadForm {
    match check {
        CheckId::Intro(IntroIdentity::Bracket) => QuadForm::new(1, 1),
        _ => QuadForm::new(2, 2),
    }
}

/// Whether `check` is defined at p (beyond the residue-class filter).
fn admits(check: CheckId, ctx: PrimeCtx, form: QuadForm) -> bool {
    let p = ctx.p();
    match check {
        CheckId::Theorem(t) => t.applies(p),
        CheckId::Intro(i) => i.admits(ctx, Some(form)),
        CheckId::Reduction => p >= 7,
        CheckId::HalfIndex => true,
        CheckId::Diag(claim) => claim
            .prime_class()
            .is_none_or(|(rs, m)| rs.contains(&(p % m))),
    }
}

fn run_one(check: CheckId, ctx: PrimeCtx, form: QuadForm) -> Result<CheckRecord> {
    match check {
        CheckId::Theorem(t) => verify_theorem(t, ctx),
        CheckId::Intro(i) => verify_intro_identity(i, ctx, Some(form)),
        CheckId::Reduction => reduction_crosscheck(ctx, form),
        CheckId::HalfIndex => Ok(half_index_check(ctx)),
        CheckId::Diag(claim) => diagnostic_check(ctx, claim),
    }
}

/// (check, prime, form) triples the config expands to, unordered.
pub fn plan(config: &SweepConfig) -> Result<Vec<(CheckId, PrimeCtx, QuadForm)>> {
    config.validate()?;
    let all = ResidueClass::new([0], 1)?;
    let mut tasks = Vec::new();
    for &check in &config.checks {
        let class = config
            .class
            .clone()
            .or_else(|| default_class(check))
            .unwrap_or_else(|| all.clone());
        let form = config.form.unwrap_or_else(|| default_form(check));
        for ctx in primes_in_class(config.lo, config.hi, &class)? {
            if admits(check, ctx, form) {
                tasks.push((check, ctx, form));
            }
        }
    }
    Ok(tasks)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub diagnostic: usize,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Self {
        records.iter().fold(Summary::default(), |mut s, r| {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Diagnostic => s.diagnostic += 1,
            }
            s
        })
    }
}

/// Runs every planned task and returns the records sorted by (check, p).
pub fn run_sweep(config: &SweepConfig) -> Result<(Vec<CheckRecord>, Summary)> {
    let tasks = plan(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::usage(format!("cannot start {} workers: {e}", config.jobs)))?;
    let mut records = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(check, ctx, form)| {
                let start = Instant::now();
                let mut rec = run_one(check, ctx, form)?;
                rec.ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by_key(|a| (a.check.name(), a.p, a.c, a.d));
    if config.inject_failure {
        if let Some(first) = records.first_mut() {
            first.status = Status::Fail;
            first.notes = "injected failure".to_owned();
        }
    }
    let summary = Summary::of(&records);
    Ok((records, summary))
}

/// 0 when nothing failed, 1 otherwise. Diagnostics count only when `strict`.
pub fn exit_code(records: &[CheckRecord], strict: bool) -> i32 {
    let failed = records
        .iter()
        .any(|r| r.status == Status::Fail || (strict && r.status == Status::Diagnostic));
    i32::from(failed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Jsonl,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::usage(format!(
                "unknown format {s:?}, expected jsonl or csv"
            ))),
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "check", "p", "c", "d", "lhs", "rhs", "status", "notes", "ms",
];

struct CountingWriter<W> {
    inner: W,
    count: usize,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.count += n;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Serializes records and returns the number of bytes written.
pub fn write_records<W: Write>(
    records: &[CheckRecord],
    format: OutputFormat,
    sink: W,
) -> Result<usize> {
    let mut out = CountingWriter {
        inner: sink,
        count: 0,
    };
    match format {
        OutputFormat::Jsonl => {
            for rec in records {
                serde_json::to_writer(&mut out, rec)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut out);
            w.write_record(CSV_HEADER)?;
            for rec in records {
                w.serialize(rec)?;
            }
            w.flush()?;
        }
    }
    Ok(out.count)
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<CheckRecord>> {
    r.lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}
