//! `meanlab` command-line front end.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "meanlab", version, about = "Weighted means, their inequalities and counterexample search")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GlobalOpts {
    /// Worker threads (falls back to MEANLAB_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit 3 when any verdict is indeterminate.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Precision policy: double, escalate or default.
    #[arg(long, global = true)]
    precision: Option<String>,
    /// Adjudication digits; implies escalation.
    #[arg(long, global = true)]
    digits: Option<String>,
    /// Relative tolerance of double-precision verdicts.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Append violated search witnesses to this JSON-lines file.
    #[arg(long, global = true)]
    witness_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a single mean.
    #[command(subcommand)]
    Means(MeansCmd),
    /// Check a scalar inequality case.
    #[command(subcommand)]
    Ineq(IneqCmd),
    /// Verify operator inequalities on random SPD pairs.
    #[command(subcommand)]
    Operator(OperatorCmd),
    /// Counterexample and optimal-p search.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Probe the open nested-mean inequality.
    #[command(subcommand)]
    Conjecture(ConjectureCmd),
}

#[derive(Subcommand, Debug)]
enum MeansCmd {
    Eval(MeansEval),
}

#[derive(Args, Debug)]
struct MeansEval {
    /// A, G, H, L, Hz, P3, or `young` for the refined Young factor.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value = "0.5")]
    v: String,
    /// Deformation parameter for `young`.
    #[arg(long)]
    r: Option<String>,
}

#[derive(Subcommand, Debug)]
enum IneqCmd {
    Check(IneqCheck),
    /// List registered cases.
    List,
}

#[derive(Args, Debug)]
struct IneqCheck {
    #[arg(long)]
    case: String,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    v: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// Check this many seeded random points instead of one.
    #[arg(long)]
    random: Option<String>,
}

#[derive(Subcommand, Debug)]
enum OperatorCmd {
    Verify(OperatorVerify),
}

#[derive(Args, Debug)]
struct OperatorVerify {
    /// Case key or `all`.
    #[arg(long, default_value = "all")]
    case: String,
    /// Comma-separated dimensions.
    #[arg(long)]
    dims: Option<String>,
    /// Pairs per dimension.
    #[arg(long)]
    pairs: Option<String>,
    /// Quadrature nodes per panel.
    #[arg(long)]
    nodes: Option<String>,
    /// Loewner tolerance.
    #[arg(long)]
    loewner_tol: Option<String>,
    #[arg(long)]
    max_condition: Option<String>,
    /// Fixed weight; drawn per pair when absent.
    #[arg(long)]
    v: Option<f64>,
    /// Tsallis parameter; the Tsallis case runs r in {-1, -1/2, 1/2, 1} when absent.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// `unordered` pairs or pairs `matched` to the Tsallis order precondition.
    #[arg(long, default_value = "unordered")]
    order: String,
    /// JSON-lines file of `{"a": {dim, entries}, "b": {dim, entries}, "v": ...}` pairs.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SearchCmd {
    Counterexample(SearchCounterexample),
    OptimalP(SearchOptimalP),
}

#[derive(Args, Debug, Default)]
struct SearchBox {
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<String>,
    /// Simplex iterations per refinement.
    #[arg(long)]
    budget: Option<String>,
    /// Grid minima used as refinement starts.
    #[arg(long)]
    starts: Option<String>,
    /// Half-width of the ln a, ln b box.
    #[arg(long)]
    ln_range: Option<String>,
    /// v ranges over [delta, 1 - delta].
    #[arg(long)]
    delta: Option<String>,
}

#[derive(Args, Debug)]
struct SearchCounterexample {
    #[arg(long)]
    case: String,
    /// Fixed mix coefficient for cases that take one.
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    search: SearchBox,
}

#[derive(Args, Debug)]
struct SearchOptimalP {
    /// Target bracket width.
    #[arg(long, default_value_t = 1e-4)]
    width: f64,
    #[command(flatten)]
    search: SearchBox,
}

#[derive(Subcommand, Debug)]
enum ConjectureCmd {
    Probe(ConjectureProbe),
}

#[derive(Args, Debug)]
struct ConjectureProbe {
    #[arg(long)]
    samples: Option<String>,
    #[command(flatten)]
    search: SearchBox,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
