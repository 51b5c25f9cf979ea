//! Command-line interface for the loop certifier.
//!
//! `analyze` reads one program, runs the requested certification goals, and
//! prints either a terminal report or a versioned JSON document. `bench`
//! sweeps a directory of programs and summarizes the verdicts per group,
//! optionally comparing them against an expected-verdict manifest.
//!
//! Exit codes: 0 on success (even when nothing could be certified), 1 when a
//! bench run deviates from its manifest, 2 on parse or validation errors and
//! malformed invocations.

mod bench;
mod report;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use probcert_core::context::AnalysisSettings;
use probcert_core::frontend::parse_program;
use probcert_core::rules::{analyze, Goal};
use probcert_core::symbolic::Polynomial;
use probcert_core::{simulate, AnalysisContext, SimulationConfig, SimulationOutcome, ValidatedProgram};

#[derive(Parser)]
#[command(
    name = "probcert",
    version,
    about = "Certifies termination and nontermination of polynomial probabilistic loops"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one loop program and report per-property verdicts
    Analyze(AnalyzeArgs),
    /// Analyze every .prob file in a directory and summarize the verdicts
    Bench(BenchArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Path of the loop program
    file: PathBuf,

    /// Property to certify
    #[arg(long, value_enum, default_value_t = GoalArg::All)]
    goal: GoalArg,

    /// Emit the report as JSON on stdout
    #[arg(long)]
    json: bool,

    /// Include certificate witnesses in the text report
    #[arg(long)]
    witness: bool,

    /// Demand rule conditions from iteration zero on instead of eventually
    #[arg(long)]
    no_relaxation: bool,

    /// Budget for one-step distribution branches
    #[arg(long, value_name = "N")]
    branch_cap: Option<usize>,

    /// Wall-clock budget in seconds for the analysis; 0 disables the budget
    #[arg(long, value_name = "SECONDS", default_value_t = 50)]
    timeout: u64,

    /// Run a guarded Monte Carlo cross-check after the analysis
    #[arg(long, num_args = 3, value_names = ["RUNS", "STEPS", "SEED"])]
    simulate: Option<Vec<u64>>,

    /// Write per-iteration statistics of every variable, conditioned on the
    /// run still being inside the loop, as CSV
    #[arg(long, value_name = "PATH", requires = "simulate")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory containing .prob programs
    dir: PathBuf,

    /// Manifest of expected verdicts to compare against
    #[arg(long, value_name = "PATH")]
    expected: Option<PathBuf>,

    /// Emit results as JSON on stdout
    #[arg(long)]
    json: bool,

    /// Demand rule conditions from iteration zero on instead of eventually
    #[arg(long)]
    no_relaxation: bool,

    /// Wall-clock budget in seconds per program; 0 disables the budget
    #[arg(long, value_name = "SECONDS", default_value_t = 50)]
    timeout: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GoalArg {
    /// Positive almost-sure termination
    Past,
    /// Almost-sure termination
    Ast,
    /// Refute almost-sure termination
    #[value(alias = "non-ast")]
    Nast,
    /// Refute positive almost-sure termination
    #[value(alias = "non-past")]
    Npast,
    /// All four properties
    All,
}

impl GoalArg {
    fn goals(self) -> Vec<Goal> {
        match self {
            GoalArg::Past => vec![Goal::Past],
            GoalArg::Ast => vec![Goal::Ast],
            GoalArg::Nast => vec![Goal::NonAst],
            GoalArg::Npast => vec![Goal::NonPast],
            GoalArg::All => Goal::all().to_vec(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Bench(args) => bench::run(
            &args.dir,
            args.expected.as_deref(),
            args.json,
            !args.no_relaxation,
            args.timeout,
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn ms(elapsed: Duration) -> f64 {
    elapsed.as_secs_f64() * 1e3
}

/// Writes to stdout, swallowing broken-pipe errors so that piping a report
/// into a pager or `head` never aborts the process.
pub(crate) fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = stdout.write_all(b"\n");
    }
}

fn run_analyze(args: AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let source = fs::read_to_string(&args.file)
        .with_context(|| format!("cannot read {}", args.file.display()))?;

    let parse_started = Instant::now();
    let program = match parse_program(&source) {
        Ok(program) => program,
        Err(err) => {
            if args.json {
                let doc = report::ErrorDoc::new(&args.file, &err.to_string());
                emit(&serde_json::to_string_pretty(&doc)?);
            }
            eprintln!("error: {}: {err}", args.file.display());
            return Ok(ExitCode::from(2));
        }
    };
    let parse_ms = ms(parse_started.elapsed());

    let settings = AnalysisSettings {
        relaxation: !args.no_relaxation,
        branch_cap: args.branch_cap.unwrap_or_else(|| AnalysisSettings::default().branch_cap),
        timeout: if args.timeout == 0 { None } else { Some(Duration::from_secs(args.timeout)) },
        ..Default::default()
    };
    let ctx = AnalysisContext::new(program.clone(), settings);

    let analysis_started = Instant::now();
    let analysis = analyze(&ctx, &args.goal.goals());
    let analysis_ms = ms(analysis_started.elapsed());

    let mut simulation_doc = None;
    let mut simulation_ms = None;
    if let Some(spec) = &args.simulate {
        let config = SimulationConfig {
            runs: spec[0],
            max_steps: spec[1],
            seed: spec[2],
            record_horizon: spec[1].min(256),
        };
        let arity = program.arity();
        let exprs: Vec<Polynomial> = (0..arity).map(|k| Polynomial::var(arity, k)).collect();
        let sim_started = Instant::now();
        let outcome = simulate(&program, &config, &exprs, true);
        simulation_ms = Some(ms(sim_started.elapsed()));
        if let Some(csv_path) = &args.csv {
            write_csv(csv_path, &program, &outcome)
                .with_context(|| format!("cannot write {}", csv_path.display()))?;
        }
        simulation_doc = Some(report::SimulationDoc::from_outcome(&config, &outcome));
    }

    let doc = report::ReportDoc::build(
        &args.file,
        &analysis,
        simulation_doc,
        report::TimingDoc { parse_ms, analysis_ms, simulation_ms },
    );
    if args.json {
        emit(&serde_json::to_string_pretty(&doc)?);
    } else {
        emit(&report::render_text(&doc, args.witness));
    }
    Ok(ExitCode::SUCCESS)
}

/// One row per recorded iteration; per-variable mean, population variance,
/// and exact extremes over the runs still inside the loop.
fn write_csv(
    path: &Path,
    program: &ValidatedProgram,
    outcome: &SimulationOutcome,
) -> anyhow::Result<()> {
    let mut file = fs::File::create(path)?;
    let mut header = String::from("iteration,alive");
    for name in &program.var_names {
        header.push_str(&format!(",{name}_mean,{name}_variance,{name}_min,{name}_max"));
    }
    writeln!(file, "{header}")?;
    for step in &outcome.per_step {
        if step.alive == 0 {
            continue;
        }
        let mut line = format!("{},{}", step.iteration, step.alive);
        for stats in &step.stats {
            line.push_str(&format!(
                ",{},{},{},{}",
                stats.mean, stats.variance, stats.min, stats.max
            ));
        }
        writeln!(file, "{line}")?;
    }
    Ok(())
}
