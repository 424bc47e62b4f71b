//! Command-line interface to the BSD p-part verifier.
//!
//! Exit codes: 0 verified / success, 1 not verified or inconclusive,
//! 2 input error, 3 label lookup miss, 4 parity or rank gate,
//! 5 discriminant search exhausted.

use clap::{Parser, Subcommand, ValueEnum};
use ecbsd::certify::{
    batch_verify, certificate_json, verify_bsd_p_part, BatchInput, Depth,
    Verdict,
};
use ecbsd::curve::Curve;
use ecbsd::foundation::Config;
use ecbsd::heegner::{
    choose_field, gz_valuations, heegner_index, heegner_point, FieldRole,
};
use ecbsd::heights::{canonical_height, generator_rank1};
use ecbsd::local::{bad_primes, conductor, is_semistable};
use ecbsd::lseries::{analytic_rank_01, analytic_sha_q, real_period};
use ecbsd::Error;
use serde::Deserialize;
use std::io::Write as _;
use std::process::ExitCode;

const CORPUS: &str = include_str!("../corpus.jsonl");

const EXIT_NOT_VERIFIED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LOOKUP: u8 = 3;
const EXIT_GATE: u8 = 4;
const EXIT_SEARCH: u8 = 5;

#[derive(Debug, Deserialize)]
struct CurveRecord {
    label: String,
    ainvs: [i64; 5],
    #[serde(default)]
    #[allow(dead_code)]
    conductor: Option<u64>,
    #[serde(default)]
    #[allow(dead_code)]
    rank: Option<u32>,
}

#[derive(Parser)]
#[command(name = "ecbsd", version, about = "BSD p-part verification")]
struct Cli {
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 64)]
    prec: u32,
    /// p-adic working precision.
    #[arg(long = "padic-prec", global = true, default_value_t = 20)]
    padic_prec: u32,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Curve-level information.
    Curve {
        #[command(subcommand)]
        cmd: CurveCmd,
    },
    /// Central L-value or derivative, analytic rank, analytic Sha.
    Lfun { curve: String },
    /// Heegner discriminant, point, index and valuation identity.
    Heegner {
        curve: String,
        #[arg(short)]
        p: u64,
        #[arg(long, value_enum, default_value_t = RoleArg::Kpp)]
        role: RoleArg,
        /// Bound on |D| for the discriminant search.
        #[arg(long)]
        dmax: Option<i64>,
    },
    /// Verify the p-part of the BSD formula for one curve.
    Verify {
        curve: String,
        #[arg(short)]
        p: u64,
        #[arg(long, value_enum, default_value_t = DepthArg::Valuation)]
        depth: DepthArg,
        /// Write the certificate JSON to this file.
        #[arg(long)]
        out: Option<String>,
    },
    /// Verify a JSON-lines corpus of curves.
    Batch {
        file: String,
        /// Worker count; the output order is deterministic regardless.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = DepthArg::Valuation)]
        depth: DepthArg,
        /// Write certificates (one JSON object per line) to this file.
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    /// Print the minimal model, conductor, local data and root number.
    Info { curve: String },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RoleArg {
    /// Every bad prime splits (the field carrying the Heegner point).
    Kpp,
    /// The smallest bad prime is inert (logged only).
    Kp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DepthArg {
    Valuation,
    Heegner,
}

impl From<DepthArg> for Depth {
    fn from(d: DepthArg) -> Depth {
        match d {
            DepthArg::Valuation => Depth::ValuationOnly,
            DepthArg::Heegner => Depth::WithHeegner,
        }
    }
}

fn corpus_records() -> Vec<CurveRecord> {
    CORPUS
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("bundled corpus is valid"))
        .collect()
}

/// Resolve a free-form curve argument: a bundled label, or a-invariants
/// given as `a1,a2,a3,a4,a6` (an optional surrounding `[...]` is allowed).
fn resolve_curve(input: &str) -> Result<(String, Curve), u8> {
    let trimmed = input.trim().trim_start_matches('[').trim_end_matches(']');
    if trimmed.contains(',') {
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            eprintln!("error: expected five a-invariants, got {}", parts.len());
            return Err(EXIT_INPUT);
        }
        let mut a = [0i64; 5];
        for (i, s) in parts.iter().enumerate() {
            a[i] = s.parse().map_err(|_| {
                eprintln!("error: invalid integer {s:?}");
                EXIT_INPUT
            })?;
        }
        let e = Curve::from_ainvs(a).map_err(|err| {
            eprintln!("error: {err}");
            EXIT_INPUT
        })?;
        return Ok((format!("{a:?}"), e));
    }
    for rec in corpus_records() {
        if rec.label == input {
            let e = Curve::from_ainvs(rec.ainvs).map_err(|err| {
                eprintln!("error: {err}");
                EXIT_INPUT
            })?;
            return Ok((rec.label, e));
        }
    }
    eprintln!("error: label {input:?} not in the bundled corpus");
    Err(EXIT_LOOKUP)
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::WrongParity(_) | Error::RankGate(_) => EXIT_GATE,
        Error::SearchExhausted(_) => EXIT_SEARCH,
        Error::Argument(_) | Error::Unsupported(_) => EXIT_INPUT,
        _ => EXIT_NOT_VERIFIED,
    }
}

fn fail(err: &Error) -> u8 {
    eprintln!("error: {err}");
    exit_for(err)
}

fn cmd_info(label: &str, e: &Curve, cfg: &Config) -> Result<(), u8> {
    let (m, _) = e.minimal_model().map_err(|e| fail(&e))?;
    let n = conductor(&m).map_err(|e| fail(&e))?;
    let a = m.ainvs();
    println!("curve {label}");
    println!(
        "  minimal model: [{}, {}, {}, {}, {}]",
        a[0], a[1], a[2], a[3], a[4]
    );
    println!("  discriminant: {}", m.discriminant());
    println!("  conductor: {n}");
    println!(
        "  semistable: {}",
        is_semistable(&m).map_err(|e| fail(&e))?
    );
    for ld in bad_primes(&m).map_err(|e| fail(&e))? {
        println!(
            "  at {}: {} (f = {}, c = {}, {:?})",
            ld.prime, ld.kodaira, ld.conductor_exponent, ld.tamagawa,
            ld.reduction
        );
    }
    let t = m.torsion_subgroup().map_err(|e| fail(&e))?;
    println!("  torsion: order {} {:?}", t.order, t.structure);
    let w = ecbsd::lseries::root_number(&m, cfg).map_err(|e| fail(&e))?;
    println!("  root number: {w:+}");
    Ok(())
}

fn cmd_lfun(label: &str, e: &Curve, cfg: &Config) -> Result<(), u8> {
    let omega = real_period(e, cfg).map_err(|e| fail(&e))?;
    let report = analytic_rank_01(e, cfg).map_err(|e| fail(&e))?;
    let d = cfg.digits as usize;
    println!("curve {label}");
    println!("  omega = {:.*}", d, omega);
    println!("  root number: {:+}", report.root_number);
    println!("  analytic rank: {}", report.analytic_rank);
    if report.analytic_rank == 0 {
        println!("  L(E,1) = {:.*}", d, report.leading_value);
        let one = rug::Float::with_val(cfg.bits(), 1u32);
        let sha = analytic_sha_q(e, &one, cfg).map_err(|e| fail(&e))?;
        println!("  sha_an = {:.*}", d, sha);
    } else {
        println!("  L'(E,1) = {:.*}", d, report.leading_value);
        let g = generator_rank1(e, cfg).map_err(|e| fail(&e))?;
        let reg = canonical_height(e, &g, cfg).map_err(|e| fail(&e))?;
        println!("  regulator = {:.*}", d, reg);
        let sha = analytic_sha_q(e, &reg, cfg).map_err(|e| fail(&e))?;
        println!("  sha_an = {:.*}", d, sha);
    }
    Ok(())
}

fn cmd_heegner(
    label: &str,
    e: &Curve,
    p: u64,
    role: RoleArg,
    cfg: &Config,
) -> Result<(), u8> {
    let report = analytic_rank_01(e, cfg).map_err(|e| fail(&e))?;
    if report.analytic_rank != 1 {
        eprintln!("error: analytic rank {} is not one", report.analytic_rank);
        return Err(EXIT_GATE);
    }
    let fr = match role {
        RoleArg::Kpp => FieldRole::KDoublePrime,
        RoleArg::Kp => FieldRole::KPrime,
    };
    let setup = choose_field(e, p, fr, cfg).map_err(|e| fail(&e))?;
    println!("curve {label}, p = {p}");
    println!("  discriminant: {}", setup.d);
    println!("  class number: {}", setup.class_number);
    if fr == FieldRole::KPrime {
        println!("  (inert level: no modular Heegner system; logged only)");
        return Ok(());
    }
    for f in &setup.forms {
        println!("  form: ({}, {}, {})", f.a, f.b, f.c);
    }
    let y = heegner_point(e, &setup, cfg).map_err(|e| fail(&e))?;
    match &y {
        ecbsd::curve::Point::Affine(x, yy) => {
            println!("  point: ({x}, {yy})")
        }
        ecbsd::curve::Point::Infinity => println!("  point: infinity"),
    }
    let g = generator_rank1(e, cfg).map_err(|e| fail(&e))?;
    let m = heegner_index(e, &y, &g, cfg).map_err(|e| fail(&e))?;
    println!("  index m = {m}");
    let reg = canonical_height(e, &g, cfg).map_err(|e| fail(&e))?;
    let (lhs, rhs) =
        gz_valuations(e, &setup, m, &reg, p, cfg).map_err(|e| fail(&e))?;
    println!(
        "  valuation identity at {p}: {lhs} = {rhs} ({})",
        if lhs == rhs { "ok" } else { "MISMATCH" }
    );
    Ok(())
}

fn cmd_verify(
    label: &str,
    e: &Curve,
    p: u64,
    depth: Depth,
    out: Option<&str>,
    cfg: &Config,
) -> Result<u8, u8> {
    let cert = verify_bsd_p_part(label, e, p, depth, cfg);
    let line = certificate_json(&cert);
    match out {
        Some(path) => {
            std::fs::write(path, format!("{line}\n")).map_err(|err| {
                eprintln!("error: cannot write {path}: {err}");
                EXIT_INPUT
            })?;
            println!(
                "{label} p={p}: {}",
                serde_json::to_string(&cert.verdict).unwrap()
            );
        }
        None => println!("{line}"),
    }
    Ok(match cert.verdict {
        Verdict::Verified => 0,
        _ => EXIT_NOT_VERIFIED,
    })
}

fn cmd_batch(
    file: &str,
    jobs: usize,
    depth: Depth,
    out: Option<&str>,
    cfg: &Config,
) -> Result<u8, u8> {
    let text = std::fs::read_to_string(file).map_err(|err| {
        eprintln!("error: cannot read {file}: {err}");
        EXIT_INPUT
    })?;
    let mut inputs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: CurveRecord = serde_json::from_str(line).map_err(|err| {
            eprintln!("error: {file}:{}: {err}", i + 1);
            EXIT_INPUT
        })?;
        inputs.push(BatchInput {
            label: rec.label,
            ainvs: rec.ainvs,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|err| {
            eprintln!("error: {err}");
            EXIT_INPUT
        })?;
    let (summary, certs) =
        pool.install(|| batch_verify(&inputs, None, depth, cfg));
    let mut rendered = String::new();
    for c in &certs {
        rendered.push_str(&certificate_json(c));
        rendered.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, &rendered).map_err(|err| {
            eprintln!("error: cannot write {path}: {err}");
            EXIT_INPUT
        })?,
        None => {
            std::io::stdout().write_all(rendered.as_bytes()).ok();
        }
    }
    eprintln!(
        "total {} verified {} failed {} inconclusive {}",
        summary.total, summary.verified, summary.failed, summary.inconclusive
    );
    Ok(if summary.verified == summary.total {
        0
    } else {
        EXIT_NOT_VERIFIED
    })
}

fn run(cli: Cli) -> Result<u8, u8> {
    let mut cfg = Config::with_digits(cli.prec);
    cfg.padic_prec = cli.padic_prec;
    match cli.cmd {
        Cmd::Curve {
            cmd: CurveCmd::Info { curve },
        } => {
            let (label, e) = resolve_curve(&curve)?;
            cmd_info(&label, &e, &cfg)?;
            Ok(0)
        }
        Cmd::Lfun { curve } => {
            let (label, e) = resolve_curve(&curve)?;
            cmd_lfun(&label, &e, &cfg)?;
            Ok(0)
        }
        Cmd::Heegner {
            curve,
            p,
            role,
            dmax,
        } => {
            if let Some(b) = dmax {
                cfg.disc_bound = b;
            }
            let (label, e) = resolve_curve(&curve)?;
            cmd_heegner(&label, &e, p, role, &cfg)?;
            Ok(0)
        }
        Cmd::Verify {
            curve,
            p,
            depth,
            out,
        } => {
            let (label, e) = resolve_curve(&curve)?;
            cmd_verify(&label, &e, p, depth.into(), out.as_deref(), &cfg)
        }
        Cmd::Batch {
            file,
            jobs,
            depth,
            out,
        } => cmd_batch(&file, jobs, depth.into(), out.as_deref(), &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
