//! `treefair`: analyze transition matrices on regular trees.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use treefair::exec::Execution;
use treefair::fixtures::{all_pass, run_fixtures};
use treefair::harness::{run_sweep, MatrixFilter, RowSumFilter, SweepMode, SweepSpec};
use treefair::oracle::{Caps, FollowerOracle};
use treefair::report::{analyze, AnalyzeOptions};
use treefair::{Error, TransitionMatrix};

const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "treefair", version, about = "Root-independent transmission of 0/1 transition matrices on k-trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the relation discovery and classify the matrix for dimension k.
    ///
    /// Exit code: 0 fair, 1 not fair, 2 inconclusive, 3 error.
    Analyze(AnalyzeArgs),
    /// Exact follower-set computations up to depth n.
    Oracle(OracleArgs),
    /// Compare discovery with the oracle over many matrices.
    ///
    /// Exit code: 0 without discrepancies, 1 with discrepancies, 3 error.
    Sweep(SweepArgs),
    /// Run the built-in regression fixtures.
    Examples,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Args)]
struct MatrixInput {
    /// Matrix rows joined by '|', e.g. 110|001|100.
    matrix: Option<String>,
    /// Read the matrix from a file, one row per line.
    #[arg(long, conflicts_with = "matrix")]
    file: Option<PathBuf>,
}

impl MatrixInput {
    fn load(&self) -> Result<TransitionMatrix, String> {
        let text = match (&self.matrix, &self.file) {
            (Some(text), _) => text.clone(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
            (None, None) => return Err("a matrix argument or --file is required".into()),
        };
        TransitionMatrix::parse(&text).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct CapsArgs {
    /// Capacity overrides, e.g. d=10,k=5,depth=16,leaves=5000000.
    #[arg(long)]
    caps: Option<String>,
}

impl CapsArgs {
    fn resolve(&self) -> Result<Caps, Error> {
        let caps = Caps::from_env()?;
        match &self.caps {
            Some(text) => caps.with_overrides(text),
            None => Ok(caps),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: MatrixInput,
    /// Tree dimension.
    #[arg(long)]
    k: usize,
    /// Print the round-by-round derivation.
    #[arg(long)]
    trace: bool,
    /// Also run the oracle for n = 1..=N.
    #[arg(long, value_name = "N")]
    oracle_depth: Option<u32>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    caps: CapsArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: MatrixInput,
    #[arg(long)]
    k: usize,
    /// Largest depth.
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    caps: CapsArgs,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum ModeArg {
    Cross,
    Observations,
    #[default]
    Both,
}

#[derive(Args)]
struct SweepArgs {
    /// Alphabet size (sets both ends of the range).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    d_min: Option<usize>,
    #[arg(long)]
    d_max: Option<usize>,
    /// Tree dimension (sets both ends of the range).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 4)]
    n_max: u32,
    /// Matrix filters: `s_A<=k`, `s_A<=N`, `primitive`, `all`.
    #[arg(long)]
    filter: Vec<String>,
    /// Sample this many distinct matrices per alphabet size.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    mode: ModeArg,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    caps: CapsArgs,
}

fn parse_filters(items: &[String]) -> Result<MatrixFilter, String> {
    let mut filter = MatrixFilter::default();
    for item in items {
        let compact: String = item.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "all" => filter.row_sum = RowSumFilter::Any,
            "primitive" => filter.primitive_only = true,
            "s_A<=k" => filter.row_sum = RowSumFilter::AtMostK,
            other => match other.strip_prefix("s_A<=").map(str::parse::<usize>) {
                Some(Ok(s)) => filter.row_sum = RowSumFilter::AtMost(s),
                _ => return Err(format!("unknown filter {item:?}")),
            },
        }
    }
    Ok(filter)
}

fn range(exact: Option<usize>, lo: Option<usize>, hi: Option<usize>, default: usize) -> (usize, usize) {
    let base = exact.unwrap_or(default);
    let lo = lo.unwrap_or(base);
    let hi = hi.unwrap_or(if exact.is_some() { base } else { lo.max(base) });
    (lo, hi)
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_ERROR)
}

fn cmd_analyze(args: &AnalyzeArgs) -> ExitCode {
    let a = match args.input.load() {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let caps = match args.caps.resolve() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let options = AnalyzeOptions {
        oracle_depth: args.oracle_depth,
        caps,
    };
    match analyze(&a, args.k, &options) {
        Ok(report) => {
            match args.format {
                Format::Text => print!("{}", report.to_text(args.trace)),
                Format::Machine => print!("{}", report.to_machine()),
            }
            ExitCode::from(report.verdict.exit_code() as u8)
        }
        Err(e) => fail(e),
    }
}

fn cmd_oracle(args: &OracleArgs) -> ExitCode {
    let a = match args.input.load() {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let caps = match args.caps.resolve() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = caps.check_depth(args.n).and_then(|_| a.ensure_nonempty_rows()) {
        return fail(e);
    }
    let mut oracle = match FollowerOracle::new(&a, args.k, &caps) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let table = oracle.degree_table(args.n);
    let d = a.d();
    let mut levels = Vec::new();
    for n in 0..=args.n {
        let family: Vec<String> = oracle.family(n).sets.iter().map(|s| s.to_set_string()).collect();
        let relations = oracle.relations_at(n).render();
        let membership = (n >= 1).then(|| oracle.membership(n));
        levels.push((n, family, relations, membership));
    }
    match args.format {
        Format::Text => {
            println!("matrix: [{a}]");
            println!("k: {}", args.k);
            for (n, family, relations, membership) in &levels {
                println!("n={n}: Q_{n} = {{{}}}", family.join(", "));
                println!("  relations [{relations}]");
                if let Some(m) = membership {
                    println!("  P({},{n}) {}, P*({},{n}) {}", args.k, m.in_p, args.k, m.in_p_star);
                }
            }
            let rows: Vec<String> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| table.degree(i, j).map_or_else(|| "-".into(), |g| g.to_string()))
                        .collect::<Vec<String>>()
                        .join(",")
                })
                .collect();
            println!("degrees (≤ {}): [{}]", args.n, rows.join("|"));
        }
        Format::Machine => {
            let degrees: Vec<Vec<Option<u32>>> =
                (0..d).map(|i| (0..d).map(|j| table.degree(i, j)).collect()).collect();
            let levels: Vec<_> = levels
                .iter()
                .map(|(n, family, relations, membership)| {
                    json!({
                        "n": n,
                        "family": family,
                        "relations": relations,
                        "in_p": membership.map(|m| m.in_p),
                        "in_p_star": membership.map(|m| m.in_p_star),
                    })
                })
                .collect();
            let doc = json!({
                "matrix": a.to_string(),
                "k": args.k,
                "levels": levels,
                "degrees": degrees,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json value"));
        }
    }
    ExitCode::SUCCESS
}

fn cmd_sweep(args: &SweepArgs) -> ExitCode {
    let filter = match parse_filters(&args.filter) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let caps = match args.caps.resolve() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let (d_min, d_max) = range(args.d, args.d_min, args.d_max, 2);
    let (k_min, k_max) = range(args.k, args.k_min, args.k_max, 2);
    let mut spec = SweepSpec::new(d_min, k_min, args.n_max)
        .with_d_range(d_min, d_max)
        .with_k_range(k_min, k_max)
        .with_filter(filter)
        .with_caps(caps);
    if let Some(count) = args.sample {
        spec = spec.with_sample(count, args.seed);
    }
    let mode = match args.mode {
        ModeArg::Cross => SweepMode::CrossValidate,
        ModeArg::Observations => SweepMode::Observations,
        ModeArg::Both => SweepMode::Both,
    };
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let report = match run_sweep(&spec, mode, execution) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match args.format {
        Format::Text => {
            for x in report.failures() {
                println!("{x}");
            }
            println!("{}", report.summary.line());
        }
        Format::Machine => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            eprintln!("{}", report.summary.line());
        }
    }
    if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_examples() -> ExitCode {
    let outcomes = run_fixtures();
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        println!("{status} {}", o.name);
        println!("  expected: {}", o.expected);
        println!("  actual:   {}", o.actual);
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    println!("{passed}/{} fixtures passed", outcomes.len());
    if all_pass(&outcomes) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Examples => cmd_examples(),
    }
}
