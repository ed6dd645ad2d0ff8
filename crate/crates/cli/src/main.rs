use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use extremo::bootstrap::{
    bootstrap_replicates, ci_direct, ci_transfer, BootstrapConfig, BootstrapReplicates, Scheme,
    Wrap,
};
use extremo::harness::{
    build_oracles, parse_innovation, run_coverage_experiment, write_coverage_csv, write_plot_files,
    ExperimentConfig,
};
use extremo::oracle::OracleCache;
use extremo::rng::{label, stream};
use extremo::{
    estimate_threshold, ModelSpec, MultiplierDist, OrthantSetPair, ThresholdSpec, TimeSeries,
};

const ORACLE_DIR_ENV: &str = "EXTREMO_ORACLE_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "extremo",
    version,
    about = "Extremogram estimation and bootstrap confidence intervals"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed (overrides the config file's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for `coverage`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Oracle cache directory.
    #[arg(long, global = true, env = ORACLE_DIR_ENV)]
    oracle_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a series and write it as CSV.
    Simulate(SimulateArgs),
    /// Print the empirical extremogram of a series.
    Extremogram(ExtremogramArgs),
    /// Print bootstrap confidence intervals for a series.
    Bootstrap(BootstrapArgs),
    /// Run a coverage experiment from `--config`.
    Coverage,
    /// Build the oracle entries `--config` needs.
    Oracle,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModelName {
    Garch,
    Ar1,
    Ma,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Default-parameter model; ignored when `--config` is given.
    #[arg(long, value_enum, default_value = "garch")]
    model: ModelName,
    /// Innovation law, e.g. `student_t:8`, `frechet:3`, `normal`.
    #[arg(long)]
    innovation: Option<String>,
    #[arg(long, default_value_t = 2000)]
    n: usize,
}

#[derive(Args, Debug)]
struct SeriesInput {
    /// Series CSV, one observation per row.
    #[arg(long)]
    input: PathBuf,
    /// The CSV has a header row.
    #[arg(long)]
    header: bool,
    #[arg(long = "hmax", default_value_t = 10)]
    h_max: usize,
}

#[derive(Args, Debug)]
struct ExtremogramArgs {
    #[command(flatten)]
    series: SeriesInput,
    /// Exceedance probability of the threshold.
    #[arg(long, conflicts_with_all = ["k", "threshold"])]
    p: Option<f64>,
    /// Threshold as the (n - n/k)-th order statistic of the norms.
    #[arg(long, conflicts_with = "threshold")]
    k: Option<usize>,
    /// Fixed threshold.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct BootstrapArgs {
    #[command(flatten)]
    series: SeriesInput,
    #[arg(long, default_value = "multiplier")]
    scheme: Scheme,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 1000)]
    replicates: usize,
    /// Block length (multiplier) or mean block length (stationary).
    #[arg(long, default_value_t = 100)]
    r: usize,
    /// Exceedance probability for direct intervals.
    #[arg(long, conflicts_with_all = ["p1", "p2"])]
    p: Option<f64>,
    /// Target exceedance probability for transfer intervals.
    #[arg(long, requires = "p2")]
    p1: Option<f64>,
    /// Exceedance probability whose bootstrap supplies the quantiles.
    #[arg(long, requires = "p1")]
    p2: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Multiplier law, `student_t:<nu>` or `normal`.
    #[arg(long, default_value = "student_t:5")]
    multiplier: String,
    #[arg(long, value_enum, default_value = "shifted")]
    wrap: WrapArg,
    /// Also write the replicate matrix as CSV here.
    #[arg(long)]
    replicates_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum WrapArg {
    Shifted,
    Circular,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(global: &Global) -> Result<ExperimentConfig> {
    let path = global.config.as_ref().context("--config is required")?;
    let mut cfg =
        ExperimentConfig::from_path(path).with_context(|| format!("config {}", path.display()))?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &global.oracle_dir {
        cfg.oracle_dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn simulate(global: &Global, args: &SimulateArgs) -> Result<()> {
    let mut model = match &global.config {
        Some(_) => load_config(global)?.model,
        None => match args.model {
            ModelName::Garch => ModelSpec::reference_garch(),
            ModelName::Ar1 => ModelSpec::reference_ar1(),
            ModelName::Ma => ModelSpec::reference_ma(),
        },
    };
    if let Some(inn) = &args.innovation {
        let inn = parse_innovation(inn)?;
        model = match model.model {
            extremo::models::Model::Garch {
                alpha0,
                alpha1,
                beta1,
                ..
            } => ModelSpec::garch(alpha0, alpha1, beta1, inn),
            extremo::models::Model::Ar1 { phi, .. } => ModelSpec::ar1(phi, inn),
            extremo::models::Model::Ma { coefficients, .. } => ModelSpec::ma(coefficients, inn),
        };
    }
    for w in model.warnings() {
        log::warn!("{w}");
    }
    let mut rng = stream(global.seed.unwrap_or(0), &[label::SERIES]);
    let series = model.simulate(args.n, &mut rng)?;
    let mut out = output(global.out.as_deref())?;
    series.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn read_series(input: &SeriesInput) -> Result<TimeSeries> {
    TimeSeries::read_csv_path(&input.input, input.header)
        .with_context(|| format!("reading {}", input.input.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |v| v.to_string())
}

fn extremogram(global: &Global, args: &ExtremogramArgs) -> Result<()> {
    let series = read_series(&args.series)?;
    let spec = match (args.p, args.k, args.threshold) {
        (Some(p), _, _) => ThresholdSpec::EmpiricalQuantile(p),
        (_, Some(k), _) => ThresholdSpec::OrderStatistic(k),
        (_, _, Some(a)) => ThresholdSpec::Fixed(a),
        _ => bail!("one of --p, --k or --threshold is required"),
    };
    let pair = OrthantSetPair::tail(series.dim());
    let est = extremo::empirical_extremogram_estimated(&series, spec, &pair, args.series.h_max)?;
    if !est.is_defined() {
        log::warn!("no observation exceeds the threshold {}", est.threshold);
    }
    let mut out = output(global.out.as_deref())?;
    for (h, v) in est.values.iter().enumerate() {
        writeln!(
            out,
            "{h}, {}, {}, {}, {}",
            fmt_opt(*v),
            est.joint_counts[h],
            est.marginal_count,
            est.threshold
        )?;
    }
    out.flush()?;
    Ok(())
}

fn parse_multiplier(s: &str) -> Result<MultiplierDist> {
    Ok(match s.split_once(':') {
        Some(("student_t", nu)) => MultiplierDist::ScaledStudentT {
            nu: nu
                .parse()
                .with_context(|| format!("bad multiplier degrees of freedom `{nu}`"))?,
        },
        None if s == "normal" => MultiplierDist::StandardNormal,
        _ => bail!("unknown multiplier `{s}` (expected student_t:<nu> or normal)"),
    })
}

fn replicates_at(
    series: &TimeSeries,
    p: f64,
    h_max: usize,
    config: BootstrapConfig,
    seed: u64,
) -> Result<BootstrapReplicates> {
    let a = estimate_threshold(series, ThresholdSpec::EmpiricalQuantile(p))?;
    Ok(bootstrap_replicates(
        series,
        a,
        &OrthantSetPair::tail(series.dim()),
        h_max,
        config,
        seed,
    )?)
}

fn bootstrap(global: &Global, args: &BootstrapArgs) -> Result<()> {
    if !(args.level > 0.0 && args.level < 1.0) {
        bail!("--level must lie in (0, 1), got {}", args.level);
    }
    let series = read_series(&args.series)?;
    let h_max = args.series.h_max;
    let mut config = BootstrapConfig::new(args.scheme, args.replicates, args.r);
    config.multiplier = parse_multiplier(&args.multiplier)?;
    config.wrap = match args.wrap {
        WrapArg::Shifted => Wrap::Shifted,
        WrapArg::Circular => Wrap::Circular,
    };
    let seed = global.seed.unwrap_or(0);
    let alpha = 1.0 - args.level;
    let mut out = output(global.out.as_deref())?;
    writeln!(out, "h,estimate,lower,upper")?;
    let reps = match (args.p, args.p1, args.p2) {
        (_, Some(p1), Some(p2)) => {
            let base = extremo::empirical_extremogram_estimated(
                &series,
                ThresholdSpec::EmpiricalQuantile(p1),
                &OrthantSetPair::tail(series.dim()),
                h_max,
            )?;
            let reps = replicates_at(&series, p2, h_max, config, seed)?;
            for h in 0..=h_max {
                let row = match (
                    base.values[h],
                    reps.base.values[h],
                    reps.quantiles(h, alpha),
                ) {
                    (Some(b1), Some(b2), Ok(q)) => {
                        let ci = ci_transfer(b1, b2, &q, p1, p2, args.level)?;
                        format!("{h},{b1},{},{}", ci.lower, ci.upper)
                    }
                    (b1, _, _) => format!("{h},{},NA,NA", fmt_opt(b1)),
                };
                writeln!(out, "{row}")?;
            }
            reps
        }
        (p, None, None) => {
            let reps = replicates_at(&series, p.unwrap_or(0.05), h_max, config, seed)?;
            for h in 0..=h_max {
                let row = match (reps.base.values[h], reps.quantiles(h, alpha)) {
                    (Some(b), Ok(q)) => {
                        let ci = ci_direct(b, &q, args.level);
                        format!("{h},{b},{},{}", ci.lower, ci.upper)
                    }
                    (b, _) => format!("{h},{},NA,NA", fmt_opt(b)),
                };
                writeln!(out, "{row}")?;
            }
            reps
        }
        _ => bail!("--p1 and --p2 must be given together"),
    };
    out.flush()?;
    if let Some(path) = &args.replicates_out {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        reps.write_csv(BufWriter::new(file))?;
    }
    Ok(())
}

fn cache_for(cfg: &ExperimentConfig) -> Option<OracleCache> {
    cfg.oracle_dir.as_ref().map(OracleCache::new)
}

fn coverage(global: &Global) -> Result<()> {
    let cfg = load_config(global)?;
    let table = run_coverage_experiment(&cfg, cache_for(&cfg).as_ref())?;
    match &global.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
            let path = dir.join("coverage.csv");
            let file =
                File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
            write_coverage_csv(&table, BufWriter::new(file))?;
            write_plot_files(&table, dir)?;
        }
        None => write_coverage_csv(&table, io::stdout().lock())?,
    }
    Ok(())
}

fn oracle(global: &Global) -> Result<()> {
    let cfg = load_config(global)?;
    let cache = cache_for(&cfg).context(format!("no oracle directory: pass --oracle-dir, set {ORACLE_DIR_ENV} or `oracle_dir` in the config"))?;
    build_oracles(&cfg, &cache)?;
    let mut out = output(global.out.as_deref())?;
    for p in cfg.all_thresholds() {
        writeln!(out, "{}", cfg.oracle_key(p).path_in(cache.dir()).display())?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure thread pool")?;
    }
    match &cli.command {
        Command::Simulate(a) => simulate(&cli.global, a),
        Command::Extremogram(a) => extremogram(&cli.global, a),
        Command::Bootstrap(a) => bootstrap(&cli.global, a),
        Command::Coverage => coverage(&cli.global),
        Command::Oracle => oracle(&cli.global),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
