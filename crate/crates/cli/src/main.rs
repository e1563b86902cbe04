use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtune::exec::SimulatedBackend;
use qtune::qt::{tune_query, write_trials_csv, QtOptions, SearcherConfig};
use qtune::workload::{
    audit_workload, generate_workload, load_workload, run_sweep, save_workload, GenConfig,
    SweepSpec, WorkloadFile, ORACLE_TABLE_CAP,
};
use qtune::wt::{tune_workload, write_curve_csv, write_trial_log_csv, Scheduler};
use qtune::Error;

#[derive(Parser)]
#[command(name = "qtune", version, about = "Budget-aware tuning of optimizer cost units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic workload with planted improvable queries.
    Gen(GenArgs),
    /// Tune the cost units of one query.
    TuneQuery(TuneQueryArgs),
    /// Tune a whole workload under one shared budget.
    TuneWorkload(TuneWorkloadArgs),
    /// Run workload tuning over a grid of schedulers and budgets.
    Sweep(SweepArgs),
    /// Report each query's fastest plan under the true profile.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    queries: usize,
    /// Fraction of queries with a planted improvement.
    #[arg(long, default_value_t = 0.5)]
    planted: f64,
    #[arg(long, default_value_t = 2)]
    min_tables: usize,
    #[arg(long, default_value_t = 5)]
    max_tables: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuningFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on trials per query after the baseline.
    #[arg(long, default_value_t = 100)]
    max_trials: usize,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    no_early_stop: bool,
    /// Run the default-units baseline without charging it.
    #[arg(long)]
    free_baseline: bool,
}

impl TuningFlags {
    fn options(&self) -> QtOptions {
        QtOptions {
            max_trials: self.max_trials,
            use_cache: !self.no_cache,
            early_stopping: !self.no_early_stop,
            charge_baseline: !self.free_baseline,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SearcherKind {
    Random,
    Grid,
}

#[derive(Args)]
struct TuneQueryArgs {
    #[arg(long)]
    workload: PathBuf,
    #[arg(long)]
    query_id: String,
    #[arg(long)]
    budget_s: f64,
    #[arg(long, value_enum, default_value_t = SearcherKind::Random)]
    searcher: SearcherKind,
    /// Points per dimension for the grid searcher.
    #[arg(long, default_value_t = 3)]
    grid_points: usize,
    #[command(flatten)]
    tuning: TuningFlags,
    /// JSON result file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials_csv: Option<PathBuf>,
}

#[derive(Args)]
struct TuneWorkloadArgs {
    #[arg(long)]
    workload: PathBuf,
    #[arg(long)]
    budget_s: f64,
    /// rr, cost, ucb or rate.
    #[arg(long, default_value = "rr")]
    scheduler: Scheduler,
    #[command(flatten)]
    tuning: TuningFlags,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    curve_csv: Option<PathBuf>,
    #[arg(long)]
    trials_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    workload: PathBuf,
    /// Comma-separated, strictly ascending, in seconds.
    #[arg(long, value_delimiter = ',', required = true)]
    budgets: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "rr,cost,ucb,rate")]
    schedulers: Vec<Scheduler>,
    #[command(flatten)]
    tuning: TuningFlags,
    /// Receives sweep.json, summary.csv and curves.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    workload: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen(a) => gen(a),
        Command::TuneQuery(a) => tune_query_cmd(a),
        Command::TuneWorkload(a) => tune_workload_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
    }
}

fn gen(a: GenArgs) -> Result<(), Error> {
    let cfg = GenConfig {
        seed: a.seed,
        n_queries: a.queries,
        min_tables: a.min_tables,
        max_tables: a.max_tables,
        planted_fraction: a.planted,
        ..GenConfig::default()
    };
    let wf = generate_workload(&cfg)?;
    let report = audit_workload(&wf, ORACLE_TABLE_CAP)?;
    match &a.out {
        Some(path) => save_workload(&wf, path)?,
        None => io::stdout().write_all(wf.to_json()?.as_bytes())?,
    }
    eprintln!(
        "generated {} queries, {} improvable, oracle improvement {:.1}%",
        wf.queries.len(),
        report.improvable_queries,
        100.0 * report.improvement
    );
    for q in report.queries.iter().filter(|q| q.improvable()) {
        eprintln!("  {}: planted gain {:.1}%", q.query_id, 100.0 * q.improvement);
    }
    Ok(())
}

fn tune_query_cmd(a: TuneQueryArgs) -> Result<(), Error> {
    let wf = load_workload(&a.workload)?;
    let query = wf
        .query(&a.query_id)
        .ok_or_else(|| Error::InvalidArgument(format!("no query with id `{}`", a.query_id)))?;
    let space = wf.search_space()?;
    let config = match a.searcher {
        SearcherKind::Random => SearcherConfig::Random { seed: a.tuning.seed },
        SearcherKind::Grid => SearcherConfig::Grid { k: a.grid_points },
    };
    let mut searcher = config.build(&space, 0)?;
    let mut backend = SimulatedBackend::new(&wf.true_profile);
    let result = tune_query(
        query,
        &wf.defaults,
        &space,
        a.budget_s,
        searcher.as_mut(),
        &mut backend,
        a.tuning.options(),
    )?;
    if let Some(path) = &a.trials_csv {
        write_trials_csv(&result.trials, create(path)?)?;
    }
    emit_json(&result, a.out.as_deref())?;
    eprintln!(
        "{}: default {:.3}s, best {:.3}s, improvement {:.1}%, spent {:.3}s over {} trials",
        result.query_id,
        result.default_time,
        result.best_time,
        100.0 * result.improvement(),
        result.ledger.spent,
        result.trials.len()
    );
    Ok(())
}

fn tune_workload_cmd(a: TuneWorkloadArgs) -> Result<(), Error> {
    let wf = load_workload(&a.workload)?;
    let space = wf.search_space()?;
    let mut backend = SimulatedBackend::new(&wf.true_profile);
    let result = tune_workload(
        &wf.queries,
        &wf.defaults,
        &space,
        a.budget_s,
        a.scheduler,
        &SearcherConfig::Random { seed: a.tuning.seed },
        &mut backend,
        a.tuning.options(),
    )?;
    if let Some(path) = &a.curve_csv {
        write_curve_csv(&result.curve, create(path)?)?;
    }
    if let Some(path) = &a.trials_csv {
        write_trial_log_csv(&result.trial_log, create(path)?)?;
    }
    emit_json(&result, a.out.as_deref())?;
    if result.calibration_incomplete {
        eprintln!("warning: budget ran out before every query had a baseline run");
    }
    eprintln!(
        "{}: workload {:.3}s -> {:.3}s, improvement {:.1}%, spent {:.3}s over {} trials",
        result.scheduler,
        result.workload_default_time,
        result.workload_best_time,
        100.0 * result.improvement(),
        result.ledger.spent,
        result.trial_log.len()
    );
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), Error> {
    let wf = load_workload(&a.workload)?;
    let spec = SweepSpec {
        budgets: a.budgets,
        schedulers: a.schedulers,
        seed: a.tuning.seed,
    };
    let report = run_sweep(&wf, &spec, a.tuning.options())?;
    fs::create_dir_all(&a.out_dir)?;
    report.write_summary_csv(create(&a.out_dir.join("summary.csv"))?)?;
    report.write_curves_csv(create(&a.out_dir.join("curves.csv"))?)?;
    emit_json(&report, Some(&a.out_dir.join("sweep.json")))?;
    let failed = report
        .cells
        .iter()
        .filter(|c| matches!(c.outcome, qtune::workload::CellOutcome::Error(_)))
        .count();
    eprintln!(
        "{} cells written to {} ({} failed)",
        report.cells.len(),
        a.out_dir.display(),
        failed
    );
    if failed > 0 {
        return Err(Error::Backend(format!("{failed} sweep cells failed")));
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), Error> {
    let wf: WorkloadFile = load_workload(&a.workload)?;
    let report = audit_workload(&wf, ORACLE_TABLE_CAP)?;
    emit_json(&report, a.out.as_deref())
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
