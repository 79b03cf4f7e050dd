use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use semiperm::asymptotics::{
    constant_logs, constant_returns_logs, fit_logs, fit_returns, fit_returns_logs, ln_bigint, log_terms, AsymFit,
    LogTerms, LogValue, DEFAULT_DEPTH,
};
use semiperm::cache::{SequenceKind, Storage, TermCache, TermValues};
use semiperm::checks::{run_check, CheckKind, CheckOptions};
use semiperm::guess::ode::guess_ode_holdout;
use semiperm::guess::recurrence::{verify_recurrence, Recurrence};
use semiperm::guess::{guess_recurrence, guess_search, SearchOptions, DEFAULT_HOLDOUT};
use semiperm::kernel::{Interpretation, SubstitutionOrder};
use semiperm::model::{catalog_model, ModelSpec};
use semiperm::group::start_orbit_sum;
use semiperm::ring::{PrimeField, DEFAULT_PRIME};
use semiperm::{Error, Integers};

/// Writes to stdout; a closed pipe ends the process quietly.
fn out_raw(text: &str) {
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).is_err() {
        std::process::exit(0);
    }
}

macro_rules! out {
    ($($arg:tt)*) => {
        out_raw(&format!("{}\n", format_args!($($arg)*)))
    };
}

#[derive(Parser)]
#[command(name = "semiperm", version, about = "Lattice walks with semipermeable axis barriers")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count walks and write a term cache.
    Enumerate {
        /// Catalog id (S2, S3, S4a, S4b, S5, QP, TQP) or a JSON model file.
        model: String,
        #[arg(long, default_value_t = 10)]
        order: usize,
        /// exact, mod:<p>, or log (natural logs from a floating-point run).
        #[arg(long, default_value = "exact")]
        ring: String,
        #[arg(long, value_enum, default_value_t = Kind::Totals)]
        kind: Kind,
        /// Output file; the cache goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a residual or equivalence check; exit status 1 on failure.
    Check {
        #[arg(long, value_parser = parse_check)]
        what: CheckKind,
        #[arg(long, default_value_t = 10)]
        order: usize,
        /// Model for feq and orbit.
        #[arg(long)]
        model: Option<String>,
        /// Interpretation for feq, e.g. y-all,x-all or y-pos,x-pos.
        #[arg(long)]
        interp: Option<String>,
        /// Substitution order in the quadrant formula of s3-form.
        #[arg(long, value_enum, default_value_t = Reading::SubstituteFirst)]
        reading: Reading,
    },
    /// Check a recurrence file against a term cache.
    VerifyRecurrence { cache: PathBuf, recurrence: PathBuf },
    /// Search for recurrences or differential equations; prints JSON.
    Guess {
        /// One or more caches of the same sequence (exact or modular).
        #[arg(required = true)]
        caches: Vec<PathBuf>,
        /// Largest (r+1)(d+1) tried.
        #[arg(long, default_value_t = 64)]
        budget: usize,
        /// Prime used for exact caches.
        #[arg(long, default_value_t = DEFAULT_PRIME)]
        prime: u32,
        /// Second prime for exact caches, for the two-prime filter.
        #[arg(long)]
        second_prime: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_HOLDOUT)]
        holdout: f64,
        /// Guess only this shape, given as r,d.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        shape: Option<(i64, i64)>,
        /// Guess a differential equation of this order and degree, given as r,d.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        ode: Option<(i64, i64)>,
    },
    /// Fit c mu^n n^alpha to a cached sequence; prints JSON.
    Asymptotics {
        cache: PathBuf,
        /// Defaults to the kind recorded in the cache.
        #[arg(long, value_enum)]
        mode: Option<Kind>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        /// Fixed growth rate for a conditional estimate of c (needs --alpha).
        #[arg(long, requires = "alpha")]
        mu: Option<f64>,
        /// Fixed exponent for a conditional estimate of c (needs --mu).
        #[arg(long, requires = "mu", allow_hyphen_values = true)]
        alpha: Option<f64>,
    },
    /// Print the orbit sum of x^a y^b.
    OrbitSum {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        start: (i64, i64),
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Totals,
    Returns,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reading {
    SubstituteFirst,
    SectionFirst,
}

fn parse_check(s: &str) -> Result<CheckKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated integers")?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("'{t}' is not an integer"));
    Ok((parse(a)?, parse(b)?))
}

/// Exit status for a failed command: 3 for the resource guard, 2 otherwise.
struct Failure(Error);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e)
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn load_model(arg: &str) -> Result<ModelSpec, Error> {
    if let Some(m) = catalog_model(arg) {
        return Ok(m);
    }
    let path = Path::new(arg);
    if path.exists() {
        return ModelSpec::from_json(&std::fs::read_to_string(path)?);
    }
    Err(Error::InvalidModel(format!("'{arg}' is neither a catalog id nor a model file")))
}

fn print_json<T: Serialize>(value: &T) {
    out!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn shape(pair: (i64, i64)) -> Result<(usize, usize), Error> {
    match (usize::try_from(pair.0), usize::try_from(pair.1)) {
        (Ok(r), Ok(d)) => Ok((r, d)),
        _ => Err(Error::Parse("order and degree must be nonnegative".into())),
    }
}

fn cmd_enumerate(model: &str, order: usize, ring: &str, kind: Kind, out: Option<PathBuf>) -> CmdResult {
    let model = load_model(model)?;
    if model.start_on_barrier() {
        eprintln!("warning: the start point lies on a barrier line; barrier rules apply from the first step");
    }
    let storage: Storage = ring.parse()?;
    let kind = if kind == Kind::Totals { SequenceKind::Totals } else { SequenceKind::Returns };
    let cache = TermCache::enumerate(&model, order, storage, kind)?;
    match out {
        Some(path) => {
            cache.save(&path)?;
            eprintln!("wrote {} terms to {}", cache.values.len(), path.display());
        }
        None => out_raw(&cache.to_string()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(
    what: CheckKind,
    order: usize,
    model: Option<String>,
    interp: Option<String>,
    reading: Reading,
) -> CmdResult {
    let opts = CheckOptions {
        model: model.as_deref().map(load_model).transpose()?,
        interp: interp.as_deref().map(str::parse::<Interpretation>).transpose()?,
        reading: match reading {
            Reading::SubstituteFirst => SubstitutionOrder::SubstituteFirst,
            Reading::SectionFirst => SubstitutionOrder::SectionFirst,
        },
    };
    let outcome = run_check(what, order, &opts)?;
    out!("{outcome}");
    Ok(if outcome.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_verify(cache: &Path, recurrence: &Path) -> CmdResult {
    let cache = TermCache::load(cache)?;
    let rec: Recurrence<Integers> = std::fs::read_to_string(recurrence).map_err(Error::from)?.parse()?;
    let result = match &cache.values {
        TermValues::Exact(terms) => verify_recurrence(&rec, terms)?,
        TermValues::Mod { p, values } => {
            let field = PrimeField::new(*p)?;
            verify_recurrence(&rec.reduce_mod(field), values)?
        }
        TermValues::Log(_) => {
            return Err(Error::Unsupported("recurrences cannot be checked on log sequences".into()).into())
        }
    };
    match result.first_violation {
        None => {
            out!("SUCCESS for n = 0..={}", result.checked_to);
            Ok(ExitCode::SUCCESS)
        }
        Some(n) => {
            out!("VIOLATION at n = {n} (checked up to n = {})", result.checked_to);
            Ok(ExitCode::from(1))
        }
    }
}

/// Residue sequences from the caches, one per distinct prime, with the
/// preferred prime first.
fn residue_sequences(caches: &[TermCache], prime: u32, second: Option<u32>) -> Result<Vec<(u32, Vec<u32>)>, Error> {
    let mut out: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut push = |p: u32, v: Vec<u32>| {
        if !out.iter().any(|(q, _)| *q == p) {
            out.push((p, v));
        }
    };
    for c in caches {
        match &c.values {
            TermValues::Exact(_) => {
                push(prime, c.values.residues(prime)?);
                if let Some(q) = second {
                    push(q, c.values.residues(q)?);
                }
            }
            TermValues::Mod { p, values } => push(*p, values.clone()),
            TermValues::Log(_) => return Err(Error::Unsupported("guessing needs exact or modular terms".into())),
        }
    }
    if let Some(pos) = out.iter().position(|(p, _)| *p == prime) {
        out.swap(0, pos);
    }
    Ok(out)
}

#[derive(Serialize)]
struct ShapeReport {
    prime: u32,
    shape: (usize, usize),
    terms: usize,
    basis: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_guess(
    caches: &[PathBuf],
    budget: usize,
    prime: u32,
    second: Option<u32>,
    holdout: f64,
    fixed: Option<(i64, i64)>,
    ode: Option<(i64, i64)>,
) -> CmdResult {
    let loaded = caches.iter().map(|p| TermCache::load(p)).collect::<Result<Vec<_>, _>>()?;
    let seqs = residue_sequences(&loaded, prime, second)?;
    if !(0.0..1.0).contains(&holdout) {
        return Err(Error::Parse("holdout must lie in [0, 1)".into()).into());
    }
    if let Some(pair) = ode {
        let (r, d) = shape(pair)?;
        let (p, terms) = &seqs[0];
        print_json(&guess_ode_holdout(terms, *p, r, d, holdout)?);
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(pair) = fixed {
        let (r, d) = shape(pair)?;
        let (p, terms) = &seqs[0];
        let basis = guess_recurrence(terms, *p, r, d)?;
        print_json(&ShapeReport {
            prime: *p,
            shape: (r, d),
            terms: terms.len(),
            basis: basis.iter().map(|b| b.normal_form()).collect(),
        });
        return Ok(ExitCode::SUCCESS);
    }
    let report = guess_search(&seqs, SearchOptions { budget, holdout })?;
    out!("{}", report.to_json());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Conditional {
    mu: f64,
    alpha: f64,
    c: f64,
    uncertainty: f64,
    stable: bool,
}

#[derive(Serialize)]
struct AsymReport {
    #[serde(flatten)]
    fit: AsymFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditional: Option<Conditional>,
}

fn cmd_asymptotics(cache: &Path, mode: Option<Kind>, depth: usize, fixed: Option<(f64, f64)>) -> CmdResult {
    let cache = TermCache::load(cache)?;
    let returns = match mode {
        Some(k) => k == Kind::Returns,
        None => cache.kind == SequenceKind::Returns,
    };
    let (fit, conditional) = match (&cache.values, returns) {
        (TermValues::Mod { .. }, _) => {
            return Err(Error::Unsupported("asymptotics needs exact or log terms".into()).into())
        }
        (TermValues::Exact(v), true) => {
            let logs: Vec<f64> = v.iter().map(ln_bigint).collect();
            let fit = fit_returns(v, depth)?;
            let cond = fixed
                .map(|(mu, alpha)| constant_returns_logs(&logs, mu, alpha, depth).map(|r| (mu, alpha, r)))
                .transpose()?;
            (fit, cond)
        }
        (TermValues::Log(logs), true) => {
            let fit = fit_returns_logs(logs, depth)?;
            let cond = fixed
                .map(|(mu, alpha)| constant_returns_logs(logs, mu, alpha, depth).map(|r| (mu, alpha, r)))
                .transpose()?;
            (fit, cond)
        }
        (values, false) => {
            let terms = match values {
                TermValues::Exact(v) => log_terms(v, 0)?,
                TermValues::Log(v) => {
                    if let Some(n) = v.iter().position(|x| !x.is_finite()) {
                        return Err(Error::NonPositiveTerm { index: n }.into());
                    }
                    LogTerms {
                        start: 0,
                        values: v.iter().map(|&x| LogValue::from_f64_ln(x)).collect(),
                    }
                }
                TermValues::Mod { .. } => unreachable!(),
            };
            let fit = fit_logs(&terms, depth)?;
            let cond = fixed
                .map(|(mu, alpha)| constant_logs(&terms, mu, alpha, depth).map(|r| (mu, alpha, r)))
                .transpose()?;
            (fit, cond)
        }
    };
    print_json(&AsymReport {
        fit,
        conditional: conditional.map(|(mu, alpha, (c, est))| Conditional {
            mu,
            alpha,
            c,
            uncertainty: c * est.uncertainty,
            stable: est.stable,
        }),
    });
    Ok(ExitCode::SUCCESS)
}

fn cmd_orbit_sum(start: (i64, i64)) -> CmdResult {
    let coord = |v: i64| i32::try_from(v).map_err(|_| Error::Parse(format!("coordinate {v} out of range")));
    out!("{}", start_orbit_sum(Integers, coord(start.0)?, coord(start.1)?));
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Enumerate {
            model,
            order,
            ring,
            kind,
            out,
        } => cmd_enumerate(&model, order, &ring, kind, out),
        Command::Check {
            what,
            order,
            model,
            interp,
            reading,
        } => cmd_check(what, order, model, interp, reading),
        Command::VerifyRecurrence { cache, recurrence } => cmd_verify(&cache, &recurrence),
        Command::Guess {
            caches,
            budget,
            prime,
            second_prime,
            holdout,
            shape,
            ode,
        } => cmd_guess(&caches, budget, prime, second_prime, holdout, shape, ode),
        Command::Asymptotics {
            cache,
            mode,
            depth,
            mu,
            alpha,
        } => cmd_asymptotics(&cache, mode, depth, mu.zip(alpha)),
        Command::OrbitSum { start } => cmd_orbit_sum(start),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceLimit { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

