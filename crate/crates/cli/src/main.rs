//! `jsr`: joint spectral radius bounds, finiteness certificates and
//! switched-system stability from the command line.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use jsr_core::bounds::{self, BoundsTable, DEFAULT_BUDGET};
use jsr_core::certificates::{self, Status};
use jsr_core::families::FamilySpec;
use jsr_core::limits::{self, LimitSampling};
use jsr_core::setfile::{emit_set_file, parse_set_file};
use jsr_core::stability::{self, Outcome, SwitchingSequence};
use jsr_core::{MatrixSet, NormKind, Word, C64};

use output::{sig12, write_records};

#[derive(Parser)]
#[command(name = "jsr", version, about = "Joint spectral radius bounds and finiteness certificates")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "JSR_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of lower/upper bounds for depths 1..=N.
    Bounds {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        norm: NormKind,
        /// Branch-and-bound search instead of exhaustive enumeration.
        #[arg(long)]
        prune: bool,
        /// Maximum product evaluations (per depth when exhaustive, in total when pruning).
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Check the uniformly sub-peripheral finiteness certificate on a word list.
    Certify {
        #[arg(long)]
        input: PathBuf,
        /// One word per line, 1-based indices separated by commas.
        #[arg(long)]
        words: PathBuf,
        #[arg(long)]
        kappa_min: f64,
        #[arg(long, default_value_t = certificates::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Decide stability by interleaved norm and spectral bounds.
    Stability {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        max_depth: usize,
        #[arg(long)]
        norm: NormKind,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Simulate x_t = x_(t-1) S_(i_t) and report log-norms.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        /// periodic:WORD, random:SEED or sturmian:GAMMA,DELTA
        #[arg(long)]
        switching: SwitchingSequence,
        #[arg(long)]
        steps: usize,
        /// Initial row vector, comma separated (default: all ones).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = NormKind::Two)]
        norm: NormKind,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Sample limit points of normalized products.
    Limits {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        seed: u64,
        /// Normalization (default: best lower bound of a short exhaustive run).
        #[arg(long)]
        rho_est: Option<f64>,
        /// Smallest |det| accepted as nonsingular.
        #[arg(long, default_value_t = 1e-6)]
        det_tol: f64,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Write a named matrix family to a set file.
    Family {
        /// One of: hare, morris, rotation, triangular, random, sign-pair.
        name: String,
        /// key=value or key=v1,v2,...
        #[arg(long = "param", num_args = 1..)]
        params: Vec<String>,
        #[arg(long)]
        emit: PathBuf,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Malformed input: exit 2.
    Input(anyhow::Error),
    /// Analysis refused (budget) or numerically failed: exit 1.
    Refused(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<jsr_core::Error> for Failure {
    fn from(e: jsr_core::Error) -> Self {
        match e {
            jsr_core::Error::BudgetExceeded { .. } | jsr_core::Error::NoConvergence(_) => {
                Failure::Refused(e.into())
            }
            _ => Failure::Input(e.into()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load_set(path: &Path) -> CliResult<MatrixSet> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_set_file(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(Failure::Input)
}

fn describe(set: &MatrixSet, path: &Path) -> String {
    format!(
        "set: {} ({} generators, dim {}, {})",
        set.name().map_or_else(|| path.display().to_string(), str::to_string),
        set.card(),
        set.dim(),
        set.field()
    )
}

fn print_table(table: &BoundsTable) {
    println!(
        "{:>3}  {:>16}  {:<14}  {:>16}  {:<14}  {:>16}  {:>16}",
        "n", "lo", "lo_word", "hi", "hi_word", "best_lo", "best_hi"
    );
    for r in &table.rows {
        println!(
            "{:>3}  {:>16}  {:<14}  {:>16}  {:<14}  {:>16}  {:>16}",
            r.n,
            sig12(r.lo),
            r.lo_word.to_string(),
            sig12(r.hi),
            r.hi_word.as_ref().map_or("(pruned)".to_string(), Word::to_string),
            sig12(r.best_lo),
            sig12(r.best_hi)
        );
    }
    println!("best_lo = {}", sig12(table.best_lo()));
    println!("best_hi = {}", sig12(table.best_hi()));
    println!("nodes = {}", table.nodes);
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn run_bounds(
    input: &Path,
    depth: usize,
    norm: NormKind,
    prune: bool,
    budget: u64,
    records: Option<&Path>,
) -> CliResult<()> {
    let set = load_set(input)?;
    let start = Instant::now();
    let table = if prune {
        bounds::refine_bounds(&set, depth, budget, norm)?
    } else {
        bounds::bounds_table_with_budget(&set, depth, norm, budget)?
    };
    let elapsed = start.elapsed().as_secs_f64();
    println!("{}", describe(&set, input));
    println!("norm: {norm}  mode: {}", if prune { "pruned" } else { "exhaustive" });
    print_table(&table);
    if let Some(path) = records {
        let mut rows: Vec<(&str, Value)> = table.rows.iter().map(|r| ("row", to_value(r))).collect();
        rows.push((
            "summary",
            json!({
                "best_lo": table.best_lo(),
                "best_hi": table.best_hi(),
                "nodes": table.nodes,
                "exhausted_at": table.exhausted_at,
            }),
        ));
        write_records(
            path,
            "bounds",
            json!({"input": input, "depth": depth, "norm": norm.to_string(), "prune": prune, "budget": budget}),
            elapsed,
            rows,
        )?;
    }
    if let Some(d) = table.exhausted_at {
        return Err(Failure::Refused(anyhow!(
            "node budget {budget} exhausted at depth {d}; table is complete up to depth {}",
            d - 1
        )));
    }
    Ok(())
}

fn read_words(path: &Path) -> CliResult<Vec<Word>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut words = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let w: Word = body
            .parse()
            .map_err(|e| anyhow!("{}: line {}: {e}", path.display(), i + 1))?;
        words.push(w);
    }
    Ok(words)
}

fn run_certify(
    input: &Path,
    words_path: &Path,
    kappa_min: f64,
    tol: f64,
    records: Option<&Path>,
) -> CliResult<()> {
    let set = load_set(input)?;
    let words = read_words(words_path)?;
    let start = Instant::now();
    let cert = certificates::certify_finiteness(&set, &words, kappa_min, tol)?;
    let elapsed = start.elapsed().as_secs_f64();
    println!("{}", describe(&set, input));
    println!("{:>4}  {:<24}  {:>16}  {:>16}  chain", "len", "word", "kappa", "rho^(1/n)");
    for (i, w) in cert.words.iter().enumerate() {
        println!(
            "{:>4}  {:<24}  {:>16}  {:>16}  {}",
            w.len(),
            w.to_string(),
            sig12(cert.kappas[i]),
            sig12(cert.values[i]),
            if cert.residuals[i].holds() { "ok" } else { "violated" }
        );
    }
    println!("max generator rho = {}", sig12(cert.generator_sup));
    match cert.status {
        Status::Certified => {
            println!("status: certified");
            println!("joint spectral radius = {}", sig12(cert.certified_value.unwrap_or(f64::NAN)));
        }
        Status::Rejected => {
            let r = cert.rejection.as_ref().expect("rejected certificate has a reason");
            println!("status: rejected");
            println!("clause ({}): {}", r.clause.label(), r.detail);
        }
    }
    if let Some(path) = records {
        let mut rows: Vec<(&str, Value)> = cert.residuals.iter().map(|r| ("residual", to_value(r))).collect();
        rows.push(("certificate", to_value(&cert)));
        write_records(
            path,
            "certify",
            json!({"input": input, "words": words_path, "kappa_min": kappa_min, "tol": tol}),
            elapsed,
            rows,
        )?;
    }
    Ok(())
}

fn run_stability(input: &Path, max_depth: usize, norm: NormKind, records: Option<&Path>) -> CliResult<()> {
    let set = load_set(input)?;
    let start = Instant::now();
    let d = stability::decide_stability(&set, max_depth, norm)?;
    let elapsed = start.elapsed().as_secs_f64();
    println!("{}", describe(&set, input));
    println!("outcome: {}", d.outcome);
    match d.outcome {
        Outcome::Stable => {
            println!("witness_depth: {}", d.witness_depth.unwrap_or(0));
            println!("certificate: max {norm}-norm of products of that length = {}", sig12(d.value.unwrap_or(f64::NAN)));
        }
        Outcome::Unstable => {
            println!("witness_depth: {}", d.witness_depth.unwrap_or(0));
            println!("witness: {}", d.witness.as_ref().map_or(String::new(), Word::to_string));
            println!("certificate: spectral radius of witness product = {}", sig12(d.value.unwrap_or(f64::NAN)));
        }
        Outcome::Unknown => println!("no certificate up to depth {}", d.depth_reached),
    }
    if let Some(path) = records {
        write_records(
            path,
            "stability",
            json!({"input": input, "max_depth": max_depth, "norm": norm.to_string()}),
            elapsed,
            [("decision", to_value(&d))],
        )?;
    }
    Ok(())
}

fn run_simulate(
    input: &Path,
    seq: &SwitchingSequence,
    steps: usize,
    x0: Option<&[f64]>,
    norm: NormKind,
    records: Option<&Path>,
) -> CliResult<()> {
    let set = load_set(input)?;
    let x0: Vec<C64> = match x0 {
        Some(v) => v.iter().map(|&x| C64::new(x, 0.0)).collect(),
        None => vec![C64::new(1.0, 0.0); set.dim()],
    };
    let start = Instant::now();
    let tr = stability::simulate_trajectory(&set, seq, &x0, steps, norm)?;
    let elapsed = start.elapsed().as_secs_f64();
    println!("{}", describe(&set, input));
    println!("switching: {seq}  steps: {steps}  norm: {norm}");
    let last = tr.points.last().expect("at least one point");
    println!("final log-norm = {}", sig12(last.log_norm));
    println!("growth exponent = {}", sig12(tr.growth_exponent()));
    if let Some(path) = records {
        write_records(
            path,
            "simulate",
            json!({"input": input, "switching": seq.to_string(), "steps": steps, "norm": norm.to_string(),
                   "x0": x0.iter().map(|z| z.re).collect::<Vec<_>>()}),
            elapsed,
            tr.points.iter().map(|p| ("point", to_value(p))),
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_limits(
    input: &Path,
    samples: usize,
    max_len: usize,
    seed: u64,
    rho_est: Option<f64>,
    det_tol: f64,
    records: Option<&Path>,
) -> CliResult<()> {
    let set = load_set(input)?;
    let start = Instant::now();
    let rho = match rho_est {
        Some(r) => r,
        None => limits::default_rho_estimate(&set)?,
    };
    let lps = limits::sample_limit_points(&set, rho, &LimitSampling::new(samples, max_len, seed))?;
    let cert = limits::nonsingular_limit_certificate(&set, &lps, det_tol)?;
    let elapsed = start.elapsed().as_secs_f64();
    println!("{}", describe(&set, input));
    println!("rho estimate = {}", sig12(rho));
    println!("drawn {} words, kept {} normalized products", lps.drawn, lps.kept);
    println!(
        "{:>7}  {:>8}  {:>12}  {:>4}  {:>16}  {:>12}",
        "cluster", "word_len", "multiplicity", "rank", "|det|", "radius"
    );
    for p in &lps.points {
        println!(
            "{:>7}  {:>8}  {:>12}  {:>4}  {:>16}  {:>12}",
            p.cluster,
            p.word_len,
            p.multiplicity,
            p.rank,
            sig12(p.abs_det),
            sig12(p.radius)
        );
    }
    println!("irreducibility: {}", to_value(&cert.irreducibility.verdict).as_str().unwrap_or("?"));
    println!("{}", cert.message);
    if let Some(path) = records {
        let mut rows: Vec<(&str, Value)> = lps.points.iter().map(|p| ("limit_point", to_value(p))).collect();
        rows.push(("certificate", to_value(&cert)));
        write_records(
            path,
            "limits",
            json!({"input": input, "samples": samples, "max_len": max_len, "seed": seed,
                   "rho_est": rho, "det_tol": det_tol}),
            elapsed,
            rows,
        )?;
    }
    Ok(())
}

fn run_family(name: &str, params: &[String], emit: &Path) -> CliResult<()> {
    if !FamilySpec::NAMES.contains(&name) {
        return Err(Failure::Input(anyhow!(
            "unknown family `{name}` (known: {})",
            FamilySpec::NAMES.join(", ")
        )));
    }
    let set = FamilySpec::with_assignments(name, params)?.build()?;
    fs::write(emit, emit_set_file(&set)).with_context(|| format!("cannot write {}", emit.display()))?;
    println!("{}", describe(&set, emit));
    println!("wrote {}", emit.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(anyhow!("cannot configure {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Bounds { input, depth, norm, prune, budget, records } => {
            run_bounds(&input, depth, norm, prune, budget, records.as_deref())
        }
        Command::Certify { input, words, kappa_min, tol, records } => {
            run_certify(&input, &words, kappa_min, tol, records.as_deref())
        }
        Command::Stability { input, max_depth, norm, records } => {
            run_stability(&input, max_depth, norm, records.as_deref())
        }
        Command::Simulate { input, switching, steps, x0, norm, records } => {
            run_simulate(&input, &switching, steps, x0.as_deref(), norm, records.as_deref())
        }
        Command::Limits { input, samples, max_len, seed, rho_est, det_tol, records } => {
            run_limits(&input, samples, max_len, seed, rho_est, det_tol, records.as_deref())
        }
        Command::Family { name, params, emit } => run_family(&name, &params, &emit),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Refused(e)) => {
            eprintln!("refused: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
