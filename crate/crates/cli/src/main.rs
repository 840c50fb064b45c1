use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intsearch::analysis::{
    drift_constant_check, estimate_drift, time_to_approximation, ChainAlgorithm, ChainSpec,
    DriftSnapshot, HittingTimes, PotentialSpec,
};
use intsearch::harness::{
    parse_settings, parse_u64_list, read_trials, run_bench, run_trial, summarize, write_summary,
    write_trials, AlgorithmSpec, ExperimentConfig, PreparedExperiment, Settings, TrialKey,
    TrialResult,
};
use intsearch::rng::{trial_rng, trial_seed};
use intsearch::{Error, Result, RunBudget, TargetVector};

#[derive(Parser)]
#[command(
    name = "intsearch",
    version,
    about = "Evolutionary search on the integer lattice: experiments, exact oracles, drift checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single seeded trial and print its CSV record
    Run(GridArgs),
    /// Run an experiment grid and write the trial CSV
    Bench(GridArgs),
    /// Exact expected hitting time from a distance vector
    Oracle(OracleArgs),
    /// Drift constant check, or a Monte-Carlo drift report at a state
    Drift(DriftArgs),
    /// Time until the distance drops to a fraction of the initial distance
    Approx(ApproxArgs),
    /// Summarize trial CSV files into box-plot statistics
    Summarize(SummarizeArgs),
}

/// Grid flags. Every flag may also be given as `key=value` in `--config`;
/// flags given on the command line win.
#[derive(Args, Clone, Default)]
struct GridArgs {
    /// Flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// ea_pm1, ea_heavy or rls
    #[arg(long)]
    algo: Option<String>,
    /// Dimensions: list or lo:hi:step range
    #[arg(long)]
    n: Option<String>,
    /// Target values (all-r targets): list, range, 10^k shorthand
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Maximum evaluations per trial
    #[arg(long)]
    budget: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: Option<String>,
    /// Heavy-tailed operator exponent
    #[arg(long)]
    epsilon: Option<String>,
    /// Base of the logarithm in the heavy-tailed weights
    #[arg(long)]
    log_base: Option<String>,
    /// RLS velocity growth factor
    #[arg(long)]
    alpha: Option<String>,
    /// RLS velocity shrink factor
    #[arg(long)]
    beta: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<String>,
    /// Clamp offspring into [0, r]
    #[arg(long)]
    clamp: bool,
}

impl GridArgs {
    fn settings(&self) -> Result<Settings> {
        let mut settings = match &self.config {
            Some(path) => parse_settings(&std::fs::read_to_string(path)?)?,
            None => Settings::new(),
        };
        let mut cli = Settings::new();
        for (key, value) in [
            ("algo", &self.algo),
            ("n", &self.n),
            ("r", &self.r),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("budget", &self.budget),
            ("out", &self.out),
            ("epsilon", &self.epsilon),
            ("log-base", &self.log_base),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("workers", &self.workers),
        ] {
            if let Some(v) = value {
                cli.set(key, v.as_str());
            }
        }
        if self.clamp {
            cli.set("clamp", "true");
        }
        settings.overlay(&cli);
        Ok(settings)
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_settings(&self.settings()?)
    }
}

#[derive(Args)]
struct OracleArgs {
    /// ea_pm1 or rls_fixed (RLS with velocity frozen at 1)
    #[arg(long, default_value = "ea_pm1")]
    algo: String,
    #[arg(long)]
    n: usize,
    /// Start distances, one per coordinate; a single value is repeated
    #[arg(long)]
    d: String,
}

#[derive(Args)]
struct DriftArgs {
    #[arg(long, default_value_t = 1.2)]
    omega: f64,
    /// Distance vector to estimate drift at; without it the drift constant
    /// check for `omega` is printed
    #[arg(long)]
    d: Option<String>,
    /// ea_pm1, ea_heavy or rls
    #[arg(long, default_value = "ea_pm1")]
    algo: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, default_value_t = 1.7)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    /// RLS potential constant c
    #[arg(long, default_value_t = 0.001)]
    c: f64,
    /// RLS potential constant p
    #[arg(long, default_value_t = 0.01)]
    p: f64,
}

#[derive(Args)]
struct ApproxArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Target fraction of the initial distance, in (0, 1]
    #[arg(long)]
    ratio: f64,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Trial CSV files
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Summary CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| {
            Error::Output {
                path: path.to_path_buf(),
                source,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn single<T: Copy>(values: &[T], name: &'static str) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => Err(Error::InvalidParameter {
            name,
            reason: "expected a single value".into(),
        }),
    }
}

fn cmd_run(args: GridArgs) -> Result<()> {
    let mut config = args.experiment()?;
    let key = TrialKey {
        n: single(&config.n_values, "n")?,
        r: single(&config.r_values, "r")?,
        repetition: 0,
    };
    config.repetitions = 1;
    let out = config.output.clone();
    let result = run_trial(&PreparedExperiment::new(config)?, key)?;
    write_trials(open_output(out.as_deref())?, &[result])
}

fn cmd_bench(args: GridArgs) -> Result<()> {
    let config = args.experiment()?;
    let out = config.output.clone().ok_or(Error::InvalidParameter {
        name: "out",
        reason: "bench needs an output path".into(),
    })?;
    let results = run_bench(&config, &out)?;
    let failures = results.iter().filter(|t| !t.success).count();
    eprintln!(
        "wrote {} trials ({failures} failed) to {}",
        results.len(),
        out.display()
    );
    Ok(())
}

fn format_exact(value: f64) -> String {
    let s = format!("{value:.9}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn distances(text: &str, n: usize) -> Result<Vec<u64>> {
    let values = parse_u64_list(text)?;
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values),
        len => Err(Error::DimensionMismatch {
            expected: n,
            actual: len,
        }),
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let algorithm = match args.algo.as_str() {
        "ea_pm1" => ChainAlgorithm::EaPm1,
        "rls_fixed" => ChainAlgorithm::RlsFixedV1,
        other => {
            return Err(Error::InvalidParameter {
                name: "algo",
                reason: format!("unknown chain `{other}` (expected ea_pm1 or rls_fixed)"),
            })
        }
    };
    let start = distances(&args.d, args.n)?
        .into_iter()
        .map(|d| u32::try_from(d).map_err(|_| too_large(d)))
        .collect::<Result<Vec<u32>>>()?;
    let bound = start.iter().map(|&d| d as u64).sum::<u64>();
    let bound = u32::try_from(bound).map_err(|_| too_large(bound))?;
    let table = HittingTimes::solve(ChainSpec::new(args.n, bound, algorithm)?)?;
    println!("{}", format_exact(table.get(&start)?));
    Ok(())
}

fn too_large(d: u64) -> Error {
    Error::InvalidParameter {
        name: "d",
        reason: format!("distance {d} too large"),
    }
}

fn cmd_drift(args: DriftArgs) -> Result<()> {
    let Some(d) = args.d else {
        PotentialSpec::exp_omega(args.omega)?;
        println!("{:.7}", drift_constant_check(args.omega));
        return Ok(());
    };
    let d: Vec<i64> = parse_u64_list(&d)?
        .into_iter()
        .map(|v| i64::try_from(v).map_err(|_| too_large(v)))
        .collect::<Result<_>>()?;
    let snapshot = DriftSnapshot::from_distances(&d).ok_or(Error::ZeroTarget)??;
    let mut settings = Settings::new();
    if let Some(e) = &args.epsilon {
        settings.set("epsilon", e.as_str());
    }
    settings.set("alpha", args.alpha.to_string());
    settings.set("beta", args.beta.to_string());
    let spec = AlgorithmSpec::from_settings(&args.algo, &settings)?;
    let potential = match spec {
        AlgorithmSpec::Rls { alpha, beta } => PotentialSpec::rls_cp(alpha, beta, args.c, args.p)?,
        _ => PotentialSpec::exp_omega(args.omega)?,
    };
    let mut rng = trial_rng(args.seed);
    let report = estimate_drift(&snapshot, &spec.build()?, &potential, args.samples, &mut rng)?;
    println!("potential,{}", report.potential);
    println!("mean_drift,{}", report.mean);
    println!("std_error,{}", report.std_error);
    println!("samples,{}", report.samples);
    match report.lower_bound {
        Some(bound) => {
            println!("lower_bound,{bound}");
            println!("within_4se,{}", report.satisfies_bound(4.0));
        }
        None => println!("lower_bound,"),
    }
    Ok(())
}

fn cmd_approx(args: ApproxArgs) -> Result<()> {
    let config = args.grid.experiment()?;
    let algorithm = config.algorithm.build()?;
    let (param1, param2) = config.algorithm.params();
    let mut out = open_output(config.output.as_deref())?;
    let mut rows = Vec::new();
    for &n in &config.n_values {
        for &r in &config.r_values {
            let a = TargetVector::all_r(n, r as i64)?;
            let mut budget = RunBudget::new(config.max_evaluations)?;
            let mut algorithm = algorithm.clone();
            if config.clamp {
                budget = budget.with_box_bound(r)?;
                algorithm = algorithm.with_box_bound(Some(r));
            }
            for rep in 0..config.repetitions {
                let seed = trial_seed(config.base_seed, n, r, rep);
                let start = std::time::Instant::now();
                let outcome =
                    time_to_approximation(&algorithm, &a, args.ratio, &budget, &mut trial_rng(seed))?;
                rows.push(TrialResult {
                    algorithm: config.algorithm.label().to_string(),
                    n,
                    r,
                    param1,
                    param2,
                    seed,
                    evaluations: outcome.evaluations,
                    success: outcome.success,
                    wall_time_s: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    write_trials(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<()> {
    let mut trials = Vec::new();
    for path in &args.inputs {
        trials.extend(read_trials(File::open(path)?)?);
    }
    let mut out = open_output(args.out.as_deref())?;
    write_summary(&mut out, &summarize(&trials))?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Drift(args) => cmd_drift(args),
        Command::Approx(args) => cmd_approx(args),
        Command::Summarize(args) => cmd_summarize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
