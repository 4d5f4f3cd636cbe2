use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use detcong::field::primes_in_class;
use detcong::lucas::{closed_form_u, half_index_probe, lucas_uv_mod, ClosedForm, LucasParams};
use detcong::poly::{coeff_diagnostics, formula_coeffs, Claim, CoeffFormula};
use detcong::sweep::{
    exit_code, resolve_jobs, run_sweep, write_records, OutputFormat, SweepConfig, DEFAULT_PMAX,
    SLOW_PRIME_WARNING,
};
use detcong::{
    build_matrix, det_mod, reduce_power_form, CheckId, Error, MatrixKind, PrimeCtx, QuadForm,
    ResidueClass,
};

const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "detcong",
    version,
    about = "Determinant congruences over prime fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run theorem, identity and diagnostic checks over a range of primes.
    Verify(VerifyArgs),
    /// Determinant of one matrix family at one prime.
    Det(DetArgs),
    /// Coefficients of the reduced polynomial of (T^2 + cT + d)^(p-2).
    Poly(PolyArgs),
    /// Lucas sequence values u_n, v_n mod p.
    Lucas(LucasArgs),
    /// Per-index coefficient diagnostics for one or more claims.
    Diag(DiagArgs),
    /// u and v of (-3, 1) at index (p+1)/2.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
struct Range {
    #[arg(long, default_value_t = 5)]
    pmin: u64,
    #[arg(long, default_value_t = DEFAULT_PMAX)]
    pmax: u64,
    /// Residue-class filter such as "3,7 mod 20"; defaults per check.
    #[arg(long)]
    class: Option<String>,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "jsonl")]
    format: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Comma-separated check ids (thm_i, thm_ii, thm_iii, d11, bracket, recip,
    /// wsn, reduction, halfindex, diag_<claim>).
    #[arg(long, value_delimiter = ',', required = true)]
    check: Vec<String>,
    #[command(flatten)]
    range: Range,
    #[arg(long, requires = "d", allow_negative_numbers = true)]
    c: Option<i64>,
    #[arg(long, requires = "c", allow_negative_numbers = true)]
    d: Option<i64>,
    /// Worker threads; the DETCONG_JOBS environment variable overrides this.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    output: Output,
    /// Treat diagnostic records as failures for the exit code.
    #[arg(long)]
    strict_diagnostics: bool,
    #[arg(long, hide = true)]
    inject_failure: bool,
}

#[derive(Debug, Args)]
struct DetArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    c: i64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    d: i64,
    /// Also write the matrix in dump format to this path ("-" for stdout).
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PolyArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    c: i64,
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    d: i64,
    /// Print a closed-form formula (f21 or f26) instead of the oracle.
    #[arg(long)]
    formula: Option<String>,
}

#[derive(Debug, Args)]
struct LucasArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = -2, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    b: i64,
    /// Largest index printed.
    #[arg(long, default_value_t = 20)]
    n: u64,
    /// Print the periodic closed form (u22 or u33) beside the recurrence.
    #[arg(long)]
    closed: Option<String>,
}

#[derive(Debug, Args)]
struct DiagArgs {
    /// Comma-separated claims: f21, f23, f26, f210, f213, sym43.
    #[arg(long, value_delimiter = ',', required = true)]
    claim: Vec<String>,
    #[command(flatten)]
    range: Range,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[command(flatten)]
    range: Range,
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_class(s: Option<&str>) -> Result<Option<ResidueClass>, Error> {
    s.map(str::parse).transpose()
}

fn warn_if_slow(pmax: u64) {
    if pmax > SLOW_PRIME_WARNING {
        eprintln!("warning: pmax {pmax} exceeds {SLOW_PRIME_WARNING}; O(p^3) elimination per prime will be slow");
    }
}

fn verify(args: VerifyArgs) -> Result<u8, Error> {
    let checks = args
        .check
        .iter()
        .map(|s| s.parse::<CheckId>())
        .collect::<Result<Vec<_>, _>>()?;
    let config = SweepConfig {
        checks,
        lo: args.range.pmin,
        hi: args.range.pmax,
        class: parse_class(args.range.class.as_deref())?,
        form: args.c.zip(args.d).map(|(c, d)| QuadForm::new(c, d)),
        jobs: resolve_jobs(args.jobs)?,
        strict: args.strict_diagnostics,
        inject_failure: args.inject_failure,
    };
    let format: OutputFormat = args.output.format.parse()?;
    config.validate()?;
    warn_if_slow(config.hi);

    let (records, summary) = run_sweep(&config)?;
    write_records(&records, format, sink(args.output.out.as_ref())?)?;
    eprintln!(
        "{} records: {} pass, {} fail, {} diagnostic",
        records.len(),
        summary.pass,
        summary.fail,
        summary.diagnostic
    );
    Ok(exit_code(&records, config.strict) as u8)
}

fn det(args: DetArgs) -> Result<u8, Error> {
    let ctx = PrimeCtx::new(args.p)?;
    let kind: MatrixKind = args.kind.parse()?;
    let m = build_matrix(kind, ctx, QuadForm::new(args.c, args.d))?;
    if let Some(path) = &args.dump {
        let mut w = sink(Some(path))?;
        m.write_dump(&mut w)?;
        w.flush()?;
    }
    let form = m.form();
    println!(
        "p={} kind={} c={} d={} n={} det={}",
        ctx,
        kind,
        form.c,
        form.d,
        m.n(),
        det_mod(&m)
    );
    Ok(0)
}

fn poly(args: PolyArgs) -> Result<u8, Error> {
    let ctx = PrimeCtx::new(args.p)?;
    let coeffs = match args.formula.as_deref() {
        None => reduce_power_form(ctx, QuadForm::new(args.c, args.d))
            .coeffs()
            .to_vec(),
        Some("f21") => formula_coeffs(CoeffFormula::F21, ctx),
        Some("f26") => formula_coeffs(CoeffFormula::F26, ctx),
        Some(other) => {
            return Err(Error::Usage(format!(
                "unknown formula {other:?}, expected f21 or f26"
            )))
        }
    };
    let line: Vec<String> = coeffs.iter().map(|r| r.to_string()).collect();
    println!("{}", line.join(" "));
    Ok(0)
}

fn lucas(args: LucasArgs) -> Result<u8, Error> {
    let ctx = PrimeCtx::new(args.p)?;
    let closed = match args.closed.as_deref() {
        None => None,
        Some("u22") => Some(ClosedForm::U22),
        Some("u33") => Some(ClosedForm::U33),
        Some(other) => {
            return Err(Error::Usage(format!(
                "unknown closed form {other:?}, expected u22 or u33"
            )))
        }
    };
    let params = closed.map_or(LucasParams::new(args.a, args.b), ClosedForm::params);
    let mut out = io::stdout().lock();
    for n in 0..=args.n {
        let (u, v) = lucas_uv_mod(params, n, ctx);
        match closed {
            Some(cf) => writeln!(out, "{n} {u} {v} {}", closed_form_u(cf, n, ctx))?,
            None => writeln!(out, "{n} {u} {v}")?,
        }
    }
    Ok(0)
}

fn diag(args: DiagArgs) -> Result<u8, Error> {
    let claims = args
        .claim
        .iter()
        .map(|s| s.parse::<Claim>())
        .collect::<Result<Vec<_>, _>>()?;
    let explicit = parse_class(args.range.class.as_deref())?;
    warn_if_slow(args.range.pmax);
    let mut w = sink(args.out.as_ref())?;
    let (mut flags, mut mismatches) = (0usize, 0usize);
    for claim in claims {
        let class = match &explicit {
            Some(c) => c.clone(),
            None => detcong::sweep::default_class(CheckId::Diag(claim))
                .expect("every claim has a default class"),
        };
        for ctx in primes_in_class(args.range.pmin, args.range.pmax, &class)? {
            let applicable = claim
                .prime_class()
                .is_none_or(|(rs, m)| rs.contains(&(ctx.p() % m)));
            if !applicable {
                continue;
            }
            let rec = coeff_diagnostics(ctx, claim.form(), &[claim])?.remove(0);
            for e in &rec.entries {
                let line = serde_json::json!({
                    "claim": claim.as_str(),
                    "p": ctx.p(),
                    "c": rec.form.c,
                    "d": rec.form.d,
                    "index": e.index,
                    "oracle": e.oracle,
                    "claimed": e.claimed,
                    "match": e.matches,
                });
                writeln!(w, "{line}")?;
            }
            flags += rec.entries.len();
            mismatches += rec.mismatched();
        }
    }
    w.flush()?;
    eprintln!("{flags} match flags, {mismatches} mismatches");
    Ok(0)
}

fn probe(args: ProbeArgs) -> Result<u8, Error> {
    let class = match parse_class(args.range.class.as_deref())? {
        Some(c) => c,
        None => ResidueClass::new([3, 7], 20)?,
    };
    let mut out = io::stdout().lock();
    for ctx in primes_in_class(args.range.pmin, args.range.pmax, &class)? {
        let (u, v) = half_index_probe(ctx);
        let which = match (u.is_zero(), v.is_zero()) {
            (true, true) => "both",
            (true, false) => "u",
            (false, true) => "v",
            (false, false) => "neither",
        };
        writeln!(out, "p={ctx} u={u} v={v} vanishing={which}")?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Det(a) => det(a),
        Command::Poly(a) => poly(a),
        Command::Lucas(a) => lucas(a),
        Command::Diag(a) => diag(a),
        Command::Probe(a) => probe(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_INTERNAL,
                _ => EXIT_USAGE,
            })
        }
    }
}
