//! Command-line front end. Every subcommand is a thin adapter over the
//! library: it parses flags, calls one library function, and prints the
//! result (JSON for single values, CSV for tables).
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors, 2 when the analysis
//! itself reports a negative outcome (an inapplicable bound, a degenerate
//! test, an unsolvable chain).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lonoise::ea::EvaluationPolicy;
use lonoise::exp::{self, ExperimentConfig, ReportKind};
use lonoise::oracle::{exact_expected_runtime, ChainSpec};
use lonoise::{bounds, stats, MutationOp, NoiseModel};

#[derive(Parser)]
#[command(
    name = "lonoise",
    version,
    about = "Simulation laboratory for the (1+1) evolutionary algorithm on \
             LeadingOnes under prior noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and print the result as JSON.
    Run(RunArgs),
    /// Run a configured sweep, persisting trial CSVs and a manifest.
    Sweep(SweepArgs),
    /// Evaluate a closed-form runtime bound and print the report as JSON.
    Bound(BoundArgs),
    /// Print the largest noise rate the bitwise bound admits at a given chi.
    Maxq(MaxqArgs),
    /// Print the exact expected runtime of a small instance as JSON.
    Oracle(OracleArgs),
    /// Welch's t-test between numeric sample files.
    Ttest(TtestArgs),
    /// Render persisted sweeps into a figure-ready CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    None,
    OneBit,
    Bitwise,
}

impl NoiseArg {
    fn model(self, q: Option<f64>) -> anyhow::Result<NoiseModel> {
        match self {
            NoiseArg::None => {
                ensure!(q.is_none(), "--q is not used with --noise none");
                Ok(NoiseModel::None)
            }
            NoiseArg::OneBit => Ok(NoiseModel::OneBit {
                q: q.context("--noise one-bit requires --q")?,
            }),
            NoiseArg::Bitwise => Ok(NoiseModel::Bitwise {
                q: q.context("--noise bitwise requires --q")?,
            }),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    OneBit,
    Standard,
}

impl MutationArg {
    fn op(self, chi: Option<f64>) -> anyhow::Result<MutationOp> {
        match self {
            MutationArg::OneBit => {
                ensure!(chi.is_none(), "--chi is not used with --mutation one-bit");
                Ok(MutationOp::OneBit)
            }
            MutationArg::Standard => Ok(MutationOp::Standard {
                chi: chi.context("--mutation standard requires --chi")?,
            }),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Ignore,
    Reevaluate,
}

impl From<PolicyArg> for EvaluationPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Ignore => EvaluationPolicy::Ignore,
            PolicyArg::Reevaluate => EvaluationPolicy::Reevaluate,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Problem size in bits.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    mutation: MutationArg,
    /// Mutation strength for --mutation standard (per-bit rate chi/n).
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long, value_enum)]
    noise: NoiseArg,
    /// Noise strength (one-bit: probability q; bitwise: per-bit rate q/n).
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_enum)]
    policy: PolicyArg,
    #[arg(long)]
    seed: u64,
    /// Iteration budget as a multiple of n^2.
    #[arg(long, default_value_t = 100.0)]
    budget_mult: f64,
    /// Absolute iteration budget, overriding --budget-mult.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment configuration (see the README for the schema).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Worker threads; defaults to LONOISE_PARALLEL, then to 1.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct BoundArgs {
    /// Which bound: 1 (one-bit noise) or 2 (bitwise noise).
    #[arg(long)]
    theorem: u8,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    q: f64,
    /// Mutation strength; required by --theorem 2.
    #[arg(long)]
    chi: Option<f64>,
    /// Evaluate at this constant instead of the largest admissible one
    /// (--theorem 2 only).
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct MaxqArgs {
    #[arg(long)]
    chi: f64,
    /// Bisection tolerance on q.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct OracleArgs {
    /// Problem size; exact enumeration caps at 8.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    mutation: MutationArg,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long, value_enum)]
    noise: NoiseArg,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args)]
struct TtestArgs {
    /// First sample file (one number per line, # comments allowed).
    #[arg(long)]
    a: Option<PathBuf>,
    /// Second sample file.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Two or more sample files; prints a CSV matrix of pairwise p-values.
    #[arg(long, num_args = 2.., value_name = "FILE", conflicts_with_all = ["a", "b"])]
    matrix: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKindArg {
    Fitness,
    Runtime,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_enum)]
    kind: ReportKindArg,
    /// Manifest files written by `sweep`.
    #[arg(long, num_args = 1.., value_name = "MANIFEST")]
    inputs: Vec<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version arrive here too; only real parse problems
            // count as usage errors.
            let code = if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<lonoise::Error>() {
                Some(le) if le.is_analysis_outcome() => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Maxq(args) => cmd_maxq(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Ttest(args) => cmd_ttest(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let op = args.mutation.op(args.chi)?;
    let noise = args.noise.model(args.q)?;
    let budget = match args.budget {
        Some(b) => b,
        None => {
            ensure!(
                args.budget_mult.is_finite() && args.budget_mult > 0.0,
                "--budget-mult must be positive"
            );
            (args.budget_mult * (args.n as f64) * (args.n as f64)).round() as u64
        }
    };
    let result = lonoise::run_trial(args.n, &op, &noise, args.policy.into(), budget, args.seed)?;
    print_json(&result)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    let parallelism = match args.parallelism {
        Some(p) => p,
        None => match std::env::var("LONOISE_PARALLEL") {
            Ok(v) => v
                .parse()
                .with_context(|| format!("LONOISE_PARALLEL is not a thread count: {v:?}"))?,
            Err(_) => 1,
        },
    };
    let batch = exp::run_batch(&config, parallelism)?;
    let manifest = exp::write_batch(&batch, &args.out_dir)?;
    let total: usize = batch.per_size.iter().map(|s| s.trials.len()).sum();
    print_json(&serde_json::json!({
        "manifest": manifest,
        "sizes": batch.per_size.iter().map(|s| s.n).collect::<Vec<_>>(),
        "total_trials": total,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bound(args: BoundArgs) -> anyhow::Result<ExitCode> {
    let report = match args.theorem {
        1 => {
            ensure!(args.chi.is_none(), "--chi is not used with --theorem 1");
            ensure!(args.c.is_none(), "--c is not used with --theorem 1");
            bounds::bound_one_bit_report(args.n, args.q)?
        }
        2 => {
            let chi = args.chi.context("--theorem 2 requires --chi")?;
            match args.c {
                Some(c) => bounds::bound_bitwise_at_c(args.n, chi, args.q, c)?,
                None => bounds::bound_bitwise(args.n, chi, args.q)?,
            }
        }
        other => bail!("--theorem must be 1 or 2, got {other}"),
    };
    print_json(&report)?;
    Ok(if report.feasible { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_maxq(args: MaxqArgs) -> anyhow::Result<ExitCode> {
    let frontier = bounds::max_q_for_chi(args.chi, args.tol)?;
    print_json(&frontier)?;
    Ok(if frontier.feasible { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_oracle(args: OracleArgs) -> anyhow::Result<ExitCode> {
    let spec = ChainSpec {
        n: args.n,
        mutation: args.mutation.op(args.chi)?,
        noise: args.noise.model(args.q)?,
        policy: EvaluationPolicy::Ignore,
    };
    let solution = exact_expected_runtime(&spec)?;
    print_json(&serde_json::json!({
        "n": spec.n,
        "mutation": spec.mutation,
        "noise": spec.noise,
        "policy": spec.policy,
        "expected_runtime": solution.expected_runtime,
        "residual_norm": solution.residual_norm,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn read_samples(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line
            .parse()
            .with_context(|| format!("{} line {}: not a number", path.display(), i + 1))?;
        values.push(value);
    }
    ensure!(!values.is_empty(), "{} contains no samples", path.display());
    Ok(values)
}

fn cmd_ttest(args: TtestArgs) -> anyhow::Result<ExitCode> {
    if !args.matrix.is_empty() {
        let samples: Vec<(String, Vec<f64>)> = args
            .matrix
            .iter()
            .map(|p| {
                let label =
                    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                read_samples(p).map(|v| (label, v))
            })
            .collect::<anyhow::Result<_>>()?;
        let mut out = String::from("sample");
        for (label, _) in &samples {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (label, a) in &samples {
            out.push_str(label);
            for (_, b) in &samples {
                out.push(',');
                // Pairs without a defined statistic stay empty.
                if let Ok(r) = stats::welch_t_test(a, b) {
                    out.push_str(&r.p_value.to_string());
                }
            }
            out.push('\n');
        }
        print!("{out}");
        return Ok(ExitCode::SUCCESS);
    }
    let a = read_samples(&args.a.context("--ttest needs --a and --b, or --matrix")?)?;
    let b = read_samples(&args.b.context("--ttest needs --a and --b, or --matrix")?)?;
    let report = stats::welch_t_test(&a, &b)?;
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<ExitCode> {
    let batches: Vec<_> = args
        .inputs
        .iter()
        .map(|p| exp::load_batch(p).map_err(anyhow::Error::from))
        .collect::<anyhow::Result<_>>()?;
    let kind = match args.kind {
        ReportKindArg::Fitness => ReportKind::Fitness,
        ReportKindArg::Runtime => ReportKind::Runtime,
    };
    let csv = exp::emit_report(&batches, kind)?;
    match args.out {
        Some(path) => std::fs::write(&path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
