//! `telesum`: reduce generic double sums, specialize the results, run
//! telescoping problems and verify identities against the exact oracle.
//!
//! Exit codes: 0 success, 1 verification failure, 2 unsupported input,
//! 3 usage error.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use telesum_core::corpus;
use telesum_core::expr::{self, parse, parse_normal, SumExpr};
use telesum_core::oracle::{check_identity, default_seed, CheckOptions, CheckReport, Identity};
use telesum_core::reduce::{
    named_atom, reduce_generic, specialize, ReduceError, ReductionResult, SpecializeOptions, Specialized,
};
use telesum_core::telescope::{telescope_pieces, PiecesSolution};

#[derive(Parser, Debug)]
#[command(name = "telesum", version, about = "Exact simplification of nested sums")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Plain, global = true)]
    format: Format,
    /// Seed for random oracle tables (default: $TELESUM_SEED or built in).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Latex,
    Plain,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce `Sum(k,0,a, P(k, X, Sum(j,0,k,X[j])))` to single nested sums.
    Reduce {
        expr: String,
        /// How many fresh constrained sequences may be introduced.
        #[arg(long, default_value_t = 0)]
        extract_constraints: usize,
        /// Split and merge the sums of the closed form.
        #[arg(long)]
        simple_sums: bool,
    },
    /// Replace the generic sequence of a reduction by a concrete one.
    Specialize {
        /// Reduction result as JSON: a file path, `-` for stdin, or inline.
        result: String,
        /// binom, binom2, altbinom, harmonic, fact, pow2, powx, one, or an
        /// expression in `k`.
        #[arg(long)]
        atom: String,
        /// Grid maxima for the check, in grid order.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<i64>>,
    },
    /// Parameterized telescoping: constants c, c1, ... and g with
    /// g(k+1) - g(k) = P1 + c*P2 + c1*P3 + ...
    Telescope {
        /// Comma-separated; commas inside parentheses belong to the piece.
        /// Symbols `c`, `c1`, ... inside a piece are unknown constants too.
        #[arg(long, required = true, allow_hyphen_values = true)]
        pieces: Vec<String>,
        #[arg(long, default_value = "k")]
        var: String,
    },
    /// Check an identity `lhs = rhs`, a JSON artifact, or `corpus:ID`.
    Verify {
        identity: String,
        /// Grid maxima, in grid order (a first, then n).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<i64>>,
        /// Extra side conditions such as `a<=n` or `n>=1`.
        #[arg(long)]
        proviso: Vec<String>,
    },
    /// Verify the built-in corpus.
    Corpus {
        /// Only entries whose id contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Verification(String),
    Unsupported(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Unsupported(_) => 2,
            Failure::Usage(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Unsupported(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<ReduceError> for Failure {
    fn from(e: ReduceError) -> Self {
        match e {
            ReduceError::Unsound(_) | ReduceError::CheckFailed(_) => Failure::Verification(e.to_string()),
            _ => Failure::Unsupported(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let seed = cli.seed.unwrap_or_else(default_seed);
    match run(&cli, seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message().is_empty() {
                eprintln!("telesum: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli, seed: u64) -> Result<(), Failure> {
    match &cli.command {
        Command::Reduce {
            expr,
            extract_constraints,
            simple_sums,
        } => {
            let e = parse(expr).map_err(|e| Failure::Unsupported(e.to_string()))?;
            let mut r = reduce_generic(&e, *extract_constraints)?;
            if *simple_sums {
                r = r.simple_sums();
            }
            print_reduction(&r, cli.format);
            Ok(())
        }
        Command::Specialize { result, atom, grid } => {
            let text = read_artifact(result)?;
            let r: ReductionResult = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("not a reduction result: {e}")))?;
            let atom_expr = match named_atom(atom) {
                Some(a) => a,
                None => parse_normal(atom).map_err(|e| Failure::Unsupported(format!("atom: {e}")))?,
            };
            let opts = SpecializeOptions { grid: grid.clone(), seed };
            let s = specialize(&r, &atom_expr, &opts)?;
            print_specialized(&s, cli.format);
            Ok(())
        }
        Command::Telescope { pieces, var } => {
            let exprs: Vec<SumExpr> = pieces
                .iter()
                .flat_map(|p| split_top_level(p))
                .map(|p| parse(&p).map_err(|e| Failure::Unsupported(format!("piece `{p}`: {e}"))))
                .collect::<Result<_, _>>()?;
            let sol = telescope_pieces(&exprs, var).map_err(|e| Failure::Unsupported(e.to_string()))?;
            match sol {
                Some(s) => {
                    print_pieces(&s, var, cli.format);
                    Ok(())
                }
                None => {
                    // A proof of nonexistence is an answer, not an error.
                    match cli.format {
                        Format::Json => println!("{}", json!({ "status": "no_solution" })),
                        _ => println!("no solution"),
                    }
                    Ok(())
                }
            }
        }
        Command::Verify {
            identity,
            grid,
            proviso,
        } => {
            let mut id = load_identity(identity)?;
            for p in proviso {
                id.provisos.push(p.parse().map_err(Failure::Usage)?);
            }
            if let Some(g) = grid {
                if g.len() > id.grid.len() {
                    return Err(Failure::Usage(format!(
                        "--grid has {} values but the identity has {} grid variables",
                        g.len(),
                        id.grid.len()
                    )));
                }
            }
            let opts = CheckOptions {
                grid: grid.clone(),
                seed,
                ..CheckOptions::default()
            };
            let report = check_identity(&id, &opts);
            print_report(&id, &report, cli.format);
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verification(String::new()))
            }
        }
        Command::Corpus { filter } => {
            let entries = corpus::filtered(filter.as_deref());
            if entries.is_empty() {
                return Err(Failure::Usage(format!("no corpus entry matches `{}`", filter.as_deref().unwrap_or(""))));
            }
            let opts = CheckOptions {
                seed,
                ..CheckOptions::default()
            };
            let reports: Vec<CheckReport> = std::thread::scope(|s| {
                let handles: Vec<_> = entries.iter().map(|e| s.spawn(|| e.verify(&opts))).collect();
                handles.into_iter().map(|h| h.join().expect("corpus worker panicked")).collect()
            });
            match cli.format {
                Format::Json => println!("{}", pretty(&reports)),
                Format::Latex => {
                    for (e, r) in entries.iter().zip(&reports) {
                        println!("% {}", r.summary());
                        println!("{}", e.identity.to_latex());
                    }
                }
                Format::Plain => {
                    for r in &reports {
                        println!("{}", r.summary());
                    }
                }
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Verification(format!("{failed} of {} corpus entries failed", reports.len())))
            }
        }
    }
}

/// Splits at commas outside parentheses and brackets.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().filter(|p| !p.trim().is_empty()).collect()
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn read_artifact(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        return std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::Usage(e.to_string()));
    }
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
}

/// `corpus:ID`, a JSON artifact (an identity, a corpus entry, a specialized
/// identity or a reduction result), or `lhs = rhs`.
fn load_identity(arg: &str) -> Result<Identity, Failure> {
    if let Some(id) = arg.strip_prefix("corpus:") {
        return corpus::find(id)
            .map(|e| e.identity)
            .ok_or_else(|| Failure::Usage(format!("no corpus entry `{id}`")));
    }
    let looks_json = arg == "-" || arg.trim_start().starts_with('{') || std::path::Path::new(arg).is_file();
    if !looks_json {
        return Identity::parse("identity", arg).map_err(Failure::Unsupported);
    }
    let text = read_artifact(arg)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid JSON: {e}")))?;
    if let Some(inner) = v.get("identity") {
        return serde_json::from_value(inner.clone()).map_err(|e| Failure::Usage(format!("bad identity: {e}")));
    }
    if v.get("closed_form").is_some() {
        let r: ReductionResult =
            serde_json::from_value(v).map_err(|e| Failure::Usage(format!("bad reduction result: {e}")))?;
        return Ok(r.identity());
    }
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("bad identity: {e}")))
}

fn print_reduction(r: &ReductionResult, format: Format) {
    match format {
        Format::Json => println!("{}", pretty(r)),
        Format::Latex => println!("{}", r.to_latex()),
        Format::Plain => {
            println!("{}", r.to_plain());
            println!("case: {}", serde_json::to_value(r.case).expect("serializable").as_str().unwrap_or(""));
            if !r.params.is_empty() {
                println!("constants: {}", r.params.join(", "));
            }
            if !r.fixed_to_zero.is_empty() {
                println!("set to 0: {}", r.fixed_to_zero.join(", "));
            }
        }
    }
}

fn print_specialized(s: &Specialized, format: Format) {
    match format {
        Format::Json => println!("{}", pretty(s)),
        Format::Latex => {
            println!("{}", s.identity.to_latex());
            println!("% {}", s.report.summary());
        }
        Format::Plain => {
            println!("{}", s.identity.to_plain());
            for (c, v) in &s.constants {
                println!("  {c} = {}", v.to_plain());
            }
            for (y, g) in &s.solutions {
                println!("  {y} = {}", expr::to_plain(g));
            }
            if !s.identity.provisos.is_empty() {
                let p: Vec<String> = s.identity.provisos.iter().map(|p| p.to_string()).collect();
                println!("  provided {}", p.join(", "));
            }
            println!("{}", s.report.summary());
        }
    }
}

fn print_pieces(s: &PiecesSolution, var: &str, format: Format) {
    match format {
        Format::Json => println!("{}", pretty(s)),
        Format::Latex => {
            for (c, v) in &s.constants {
                println!("{c} = {}", v.to_latex());
            }
            println!("g_{{{var}}} = {}", expr::to_latex(&s.telescoper));
        }
        Format::Plain => {
            for (c, v) in &s.constants {
                println!("{c} = {}", v.to_plain());
            }
            println!("g = {}", expr::to_plain(&s.telescoper));
            if let Some(r) = &s.certificate {
                println!("certificate = {}", r.to_plain());
            }
            if s.threshold > 0 {
                println!("valid for {var} >= {}", s.threshold);
            }
        }
    }
}

fn print_report(id: &Identity, r: &CheckReport, format: Format) {
    match format {
        Format::Json => println!("{}", pretty(r)),
        Format::Latex => {
            println!("{}", id.to_latex());
            println!("% {}", r.summary());
        }
        Format::Plain => println!("{}", r.summary()),
    }
}
