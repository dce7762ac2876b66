use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cga_lab::cga::default_iteration_cap;
use cga_lab::harness::{
    aggregate, auto_mu, compare_jump_vs_onemax, fit_median_iterations, run_experiment, Algorithm, ExperimentConfig,
    MuRule, RunRecord, TelemetryConfig, DEFAULT_EA_CAP, DEFAULT_MU_FACTOR,
};
use cga_lab::lab::{run_suite, LemmaId, SuiteOptions, Verdict};
use cga_lab::report::{
    bound_plot, distance_plot, emit_plot_svg, emit_records, emit_summary_csv, lemma_reports_to_string, load_records,
    scaling_plot, Manifest,
};
use cga_lab::restart::{run_parallel_cga, DEFAULT_MU_MIN};
use cga_lab::{baseline::one_plus_one_ea, make_well_behaved, run_cga, Error, FitnessFunction};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_FAILURE: u8 = 4;
const EXIT_VIOLATION: u8 = 5;

#[derive(Parser)]
#[command(name = "cga-lab", version, about = "Compact genetic algorithm experiments on OneMax and Jump")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CGA_LAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one cGA or (1+1) EA.
    Run(RunArgs),
    /// Run a sweep described by a TOML config.
    Sweep(SweepArgs),
    /// Run the statistical checks.
    Verify(VerifyArgs),
    /// Run the cGA under the parallel-run restart strategy.
    Parallel(ParallelArgs),
    /// Summarize a records file.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Onemax,
    Jump,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Cga,
    Ea,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Cga => Algorithm::Cga,
            AlgorithmArg::Ea => Algorithm::Ea,
        }
    }
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long)]
    n: usize,
    /// Jump size (required for jump).
    #[arg(long)]
    k: Option<usize>,
}

impl ProblemArgs {
    fn fitness(&self) -> Result<FitnessFunction, Failure> {
        match (self.problem, self.k) {
            (ProblemArg::Onemax, None) => Ok(FitnessFunction::onemax(self.n)?),
            (ProblemArg::Onemax, Some(_)) => Err(Failure::usage("--k applies to jump only")),
            (ProblemArg::Jump, Some(k)) => Ok(FitnessFunction::jump(self.n, k)?),
            (ProblemArg::Jump, None) => Err(Failure::usage("jump needs --k")),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "cga")]
    algorithm: AlgorithmArg,
    /// Population size: `auto` or an integer (rounded up to a well-behaved value).
    #[arg(long, default_value = "auto")]
    mu: String,
    /// Factor K of the automatic population size.
    #[arg(long, default_value_t = DEFAULT_MU_FACTOR)]
    mu_factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap (cGA) or evaluation cap (EA).
    #[arg(long)]
    cap: Option<u64>,
    /// Write the run record with trajectories to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    mu_factor: Option<f64>,
    /// Fixed population size for every n.
    #[arg(long)]
    mu: Option<u64>,
    #[arg(long)]
    cap_factor: Option<f64>,
    #[arg(long)]
    trajectories: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Checks to run, by number (1-9) or name; default all.
    #[arg(long, value_delimiter = ',')]
    lemma: Vec<String>,
    #[arg(long, default_value_t = SuiteOptions::default().trials)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = SuiteOptions::default().phase_runs)]
    phase_runs: u64,
    #[arg(long, default_value_t = SuiteOptions::default().walk_trials)]
    walk_trials: u64,
    /// Write reports as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an estimate-versus-bound chart.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct ParallelArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 40)]
    max_rounds: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest population size used by any process.
    #[arg(long, default_value_t = DEFAULT_MU_MIN)]
    mu_min: u64,
    /// Print the full outcome as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    resamples: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: m.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::RecordParse { .. } => EXIT_CONFIG,
            Error::DimensionTooSmall { .. }
            | Error::InvalidJumpSize { .. }
            | Error::NotWellBehaved { .. }
            | Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error, code: u8) -> Failure {
    Failure { code, message: format!("{}: {e}", path.display()) }
}

fn resolve_mu(spec: &str, n: usize, factor: f64) -> Result<u64, Failure> {
    if spec == "auto" {
        return Ok(auto_mu(n, factor)?);
    }
    let m: u64 = spec.parse().map_err(|_| Failure::usage(format!("--mu must be `auto` or an integer, got {spec}")))?;
    Ok(make_well_behaved(n, m)?)
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let fit = a.problem.fitness()?;
    let n = fit.n();
    let mut rec = RunRecord {
        algorithm: a.algorithm.into(),
        problem: fit,
        n,
        k: fit.k(),
        mu: None,
        mu_requested: None,
        seed_index: 0,
        seed: a.seed,
        cap: 0,
        trace: None,
        error: None,
    };
    let trace = match a.algorithm {
        AlgorithmArg::Cga => {
            let mu = resolve_mu(&a.mu, n, a.mu_factor)?;
            let cap = a.cap.unwrap_or_else(|| default_iteration_cap(n, mu));
            rec.mu = Some(mu);
            rec.cap = cap;
            let telemetry = TelemetryConfig { record_trajectories: a.trace.is_some(), ..Default::default() };
            run_cga(fit, mu, Some(cap), telemetry.options_for(&fit), a.seed)?
        }
        AlgorithmArg::Ea => {
            rec.cap = a.cap.unwrap_or(DEFAULT_EA_CAP);
            one_plus_one_ea(fit, rec.cap, a.seed)?
        }
    };
    let outcome = serde_json::to_value(trace.outcome).ok().and_then(|v| v.get("kind").cloned());
    println!(
        "{} n={} mu={} seed={} outcome={} iterations={} evaluations={}",
        fit.label(),
        n,
        rec.mu.map_or("-".to_string(), |m| m.to_string()),
        a.seed,
        outcome.and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        trace.iterations,
        trace.evaluations
    );
    rec.trace = Some(trace);
    if let Some(path) = a.trace {
        emit_records(&[rec], &path)?;
    }
    Ok(())
}

fn write_reports(dir: &Path, records: &[RunRecord]) -> Result<Vec<String>, Failure> {
    let stats = aggregate(records);
    emit_summary_csv(&stats, &dir.join("summary.csv"))?;
    emit_plot_svg(&scaling_plot(&stats), &dir.join("scaling.svg"))?;
    let mut files = vec!["summary.csv".to_string(), "scaling.svg".to_string()];
    let d = distance_plot(records, 8);
    if !d.series.is_empty() {
        emit_plot_svg(&d, &dir.join("distance.svg"))?;
        files.push("distance.svg".into());
    }
    for s in &stats {
        let med = s.iterations.map_or("NA".to_string(), |i| i.median.to_string());
        println!(
            "{:?} {} n={} mu={} success={}/{} median_iterations={}",
            s.algorithm,
            s.problem,
            s.n,
            s.mu.map_or("-".to_string(), |m| m.to_string()),
            s.successes,
            s.runs,
            med
        );
    }
    for alg in [Algorithm::Cga, Algorithm::Ea] {
        for prefix in ["onemax", "jump"] {
            if let Ok(f) = fit_median_iterations(&stats, alg, prefix) {
                println!("{alg:?} {prefix} scaling slope={:.4} max_residual={:.4}", f.slope, f.max_residual);
            }
        }
    }
    Ok(files)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.config).map_err(|e| io_failure(&a.config, e, EXIT_CONFIG))?;
    let mut cfg = ExperimentConfig::from_toml_str(&text)?;
    if let Some(x) = a.algorithm {
        cfg.algorithm = x.into();
    }
    if let Some(x) = a.seeds {
        cfg.seeds.count = x;
    }
    if let Some(x) = a.base_seed {
        cfg.seeds.base = x;
    }
    if let Some(x) = a.mu_factor {
        cfg.mu.factor = x;
    }
    if let Some(x) = a.mu {
        cfg.mu = MuRule { fixed: Some(x), ..cfg.mu };
    }
    if let Some(x) = a.cap_factor {
        cfg.cap_factor = x;
    }
    if a.trajectories {
        cfg.telemetry.record_trajectories = true;
    }
    cfg.validate()?;
    let canonical = cfg.to_toml_string()?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e, EXIT_FAILURE))?;
    let records = run_experiment(&cfg)?;
    emit_records(&records, &a.out.join("records.jsonl"))?;
    fs::write(a.out.join("config.toml"), &canonical).map_err(|e| io_failure(&a.out, e, EXIT_FAILURE))?;
    let mut files = vec!["records.jsonl".to_string(), "config.toml".to_string()];
    files.extend(write_reports(&a.out, &records)?);
    Manifest::new(&canonical, cfg.seeds.base, files).write(&a.out.join("manifest.json"))?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(Failure { code: EXIT_FAILURE, message: format!("{failed} runs failed; see records.jsonl") });
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool, Failure> {
    let lemmas = if a.lemma.is_empty() {
        LemmaId::ALL.to_vec()
    } else {
        a.lemma
            .iter()
            .map(|s| LemmaId::parse(s).ok_or_else(|| Failure::usage(format!("unknown check {s}"))))
            .collect::<Result<Vec<_>, _>>()?
    };
    let opt = SuiteOptions {
        trials: a.trials,
        seed: a.seed,
        phase_runs: a.phase_runs,
        walk_trials: a.walk_trials,
        ..SuiteOptions::default()
    };
    let reports = run_suite(&lemmas, &opt)?;
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let count = |v| reports.iter().filter(|r| r.verdict == v).count();
    let violations = count(Verdict::Violation);
    println!(
        "{} reports: {} consistent, {} inconclusive, {} violations",
        reports.len(),
        count(Verdict::ConsistentWithBound),
        count(Verdict::Inconclusive),
        violations
    );
    if let Some(path) = a.out {
        fs::write(&path, lemma_reports_to_string(&reports)?).map_err(|e| io_failure(&path, e, EXIT_FAILURE))?;
    }
    if let Some(path) = a.plot {
        emit_plot_svg(&bound_plot(&reports), &path)?;
    }
    Ok(violations == 0)
}

fn cmd_parallel(a: ParallelArgs) -> Result<(), Failure> {
    let fit = a.problem.fitness()?;
    let out = run_parallel_cga(fit, a.mu_min, a.max_rounds, a.seed)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&out).map_err(|e| Failure::from(Error::Io(e.to_string())))?);
    } else {
        println!(
            "{} n={} seed={} total_budget={} rounds={} winning_process={} winning_mu={} effective_mu={}",
            fit.label(),
            fit.n(),
            a.seed,
            out.total_budget,
            out.rounds,
            out.winning_process,
            out.winning_mu,
            out.winning_effective_mu
        );
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<(), Failure> {
    let records = load_records(&a.records)?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e, EXIT_FAILURE))?;
    write_reports(&a.out, &records)?;
    for r in compare_jump_vs_onemax(&records, a.resamples, 0)? {
        println!("n={} jump{} / onemax median ratio={:.4} ci99=[{:.4}, {:.4}]", r.n, r.k, r.ratio, r.ci.0, r.ci.1);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => match cmd_verify(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_VIOLATION),
            Err(e) => Err(e),
        },
        Command::Parallel(a) => cmd_parallel(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
