use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qlid::{artificial_mean_sample, bin_count, inject_outliers, Condition, DistributionSpec, Param};

use crate::config::{parse_assignments, parse_bounds, parse_list, FileConfig, Overrides, RunConfig};
use crate::ingest::{self, Ingested};
use crate::pipeline::{self, fitted_density, FitRecord};
use crate::plot::{self, Curve};
use crate::report::{self, DatasetSummary, Metadata, Report};
use crate::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "qlid", version, about = "Robust q-log-likelihood and LID estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit every configured estimator and compare them.
    Fit(RunArgs),
    /// Fit over a grid of q / p0 / p1 / u values.
    Sweep(RunArgs),
    /// Order-statistic mean sample of a fully specified density.
    Simulate(SimulateArgs),
    /// Append 2 max(x) outliers to a dataset.
    Inject(InjectArgs),
    /// Edge-inclusive bin counts of a dataset.
    Bins(BinsArgs),
    /// Histogram and density curves of fitted or given densities.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Data file, one value per line.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated bin edges.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub edges: Option<::std::vec::Vec<f64>>,
    /// Also fit the outlier-injected sample.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub outliers: Option<bool>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// `half-line` or `full-line`; inferred when absent.
    #[arg(long)]
    pub support: Option<String>,
    /// Estimator kind: mle, mqle, lid-log, lid-logq or huber.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub family0: Option<String>,
    #[arg(long)]
    pub family1: Option<String>,
    /// Fixed parameters of f0, e.g. `eta=2`.
    #[arg(long, value_parser = parse_assignments)]
    pub params0: Option<BTreeMap<String, f64>>,
    #[arg(long, value_parser = parse_assignments)]
    pub params1: Option<BTreeMap<String, f64>>,
    /// `lo:hi` per free parameter, comma-separated.
    #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
    pub bounds: Option<::std::vec::Vec<[f64; 2]>>,
    /// q value (comma-separated grid for `sweep`).
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub q: Option<::std::vec::Vec<f64>>,
    /// Huber tuning constant (grid for `sweep`).
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub u: Option<::std::vec::Vec<f64>>,
    /// Fixed shape p of f0 (grid for `sweep`).
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub p0: Option<::std::vec::Vec<f64>>,
    /// Fixed shape p of f1 (grid for `sweep`).
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub p1: Option<::std::vec::Vec<f64>>,
    /// Threads for fitting and simulation (0: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Replications of the artificial samples behind sweep bin counts.
    #[arg(long)]
    pub replications: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Family or preset name.
    #[arg(long)]
    pub family0: String,
    /// All parameters, e.g. `a=3,b=0.25`.
    #[arg(long, value_parser = parse_assignments)]
    pub params0: BTreeMap<String, f64>,
    #[arg(long, default_value_t = 90)]
    pub n: usize,
    #[arg(long, default_value_t = crate::config::DEFAULT_REPLICATIONS)]
    pub replications: usize,
    /// Use 100 000 replications.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub edges: Option<::std::vec::Vec<f64>>,
    /// Writes `sample.txt` (and `bins.csv`) here instead of stdout.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InjectArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub support: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BinsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub edges: ::std::vec::Vec<f64>,
    /// Count the outlier-injected sample instead.
    #[arg(long)]
    pub outliers: bool,
    #[arg(long)]
    pub support: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Draw a fully specified density, e.g. `gamma:a=1,b=1`; repeatable.
    /// Skips fitting.
    #[arg(long)]
    pub density: Vec<String>,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qlid: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Fit(a) => fit(a),
        Command::Sweep(a) => sweep(a),
        Command::Simulate(a) => simulate(a),
        Command::Inject(a) => inject(a),
        Command::Bins(a) => bins(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn resolve(args: RunArgs, sweep: bool) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        data: args.data,
        seed: args.seed,
        outliers: args.outliers,
        edges: args.edges,
        out_dir: args.out_dir,
        support: args.support,
        replications: args.replications,
        workers: args.workers,
        kind: args.kind,
        family0: args.family0,
        family1: args.family1,
        params0: args.params0.unwrap_or_default(),
        params1: args.params1.unwrap_or_default(),
        bounds: args.bounds,
        q: args.q,
        u: args.u,
        p0: args.p0,
        p1: args.p1,
    };
    RunConfig::resolve(file, flags, sweep)
}

fn load_data(cfg: &RunConfig) -> Result<(qlid::Sample<f64>, DatasetSummary), CliError> {
    let data: Ingested = ingest::read(&cfg.data)?;
    let support = cfg.support_for(&data);
    let summary = DatasetSummary {
        path: cfg.data.display().to_string(),
        n: data.values.len(),
        support,
        total_lines: data.total_lines,
        skipped: data.skipped,
    };
    if support == qlid::SampleSupport::HalfLine && data.values.iter().any(|&v| v < 0.0) {
        return Err(CliError::Ingest(format!(
            "{}: negative values in half-line data",
            cfg.data.display()
        )));
    }
    Ok((data.into_sample(support)?, summary))
}

fn status(records: &[FitRecord]) -> i32 {
    if records.iter().all(FitRecord::is_ok) {
        exit::OK
    } else {
        exit::PARTIAL
    }
}

/// Runs `fit` and writes its outputs to `cfg.out_dir`.
pub fn fit_with(cfg: &RunConfig) -> Result<(Vec<FitRecord>, String), CliError> {
    let (sample, summary) = load_data(cfg)?;
    let records = pipeline::run_fit(cfg, &sample);
    let comparison = pipeline::comparison(&records);
    let data_bins = match &cfg.edges {
        Some(e) => Some(bin_count(sample.values(), e).map_err(|e| CliError::Config(e.to_string()))?),
        None => None,
    };
    let out = &cfg.out_dir;
    report::write_json(
        &out.join("report.json"),
        &Report {
            command: "fit",
            dataset: &summary,
            config: cfg,
            fits: &records,
            comparison: &comparison,
            data_bins: data_bins.as_ref(),
        },
    )?;
    let text = report::render_fit_text(&records, &comparison);
    report::write(&out.join("comparison.txt"), &text)?;
    report::write(&out.join("comparison.csv"), &comparison.to_csv())?;
    report::write_json(&out.join("metadata.json"), &Metadata::now())?;
    let curves = fitted_curves(cfg, &records);
    if !curves.is_empty() {
        plot::emit(&out.join("plot"), &sample, &curves, cfg.edges.as_deref())?;
    }
    Ok((records, text))
}

/// Densities of the successful clean-sample fits.
fn fitted_curves(cfg: &RunConfig, records: &[FitRecord]) -> Vec<Curve> {
    records
        .iter()
        .filter(|r| r.condition == Condition::Clean)
        .filter_map(|r| {
            let fit = r.result.as_ref()?;
            let spec = cfg.estimators[r.spec_index].build(r.tuning).ok()?;
            Some(Curve {
                label: r.label.clone(),
                density: fitted_density(&spec, &fit.theta()),
            })
        })
        .collect()
}

fn fit(args: RunArgs) -> Result<i32, CliError> {
    let cfg = resolve(args, false)?;
    let (records, text) = fit_with(&cfg)?;
    print!("{text}");
    Ok(status(&records))
}

/// Runs `sweep` and writes its outputs to `cfg.out_dir`.
pub fn sweep_with(cfg: &RunConfig) -> Result<Vec<FitRecord>, CliError> {
    let (sample, summary) = load_data(cfg)?;
    let records = pipeline::run_sweep(cfg, &sample);
    let comparison = pipeline::comparison(&records);
    let data_bins = match &cfg.edges {
        Some(e) => Some(bin_count(sample.values(), e).map_err(|e| CliError::Config(e.to_string()))?),
        None => None,
    };
    let out = &cfg.out_dir;
    report::write_json(
        &out.join("sweep.json"),
        &Report {
            command: "sweep",
            dataset: &summary,
            config: cfg,
            fits: &records,
            comparison: &comparison,
            data_bins: data_bins.as_ref(),
        },
    )?;
    report::write(&out.join("sweep.csv"), &report::sweep_csv(&records))?;
    report::write(&out.join("sweep.txt"), &report::sweep_text(&records))?;
    report::write_json(&out.join("metadata.json"), &Metadata::now())?;
    Ok(records)
}

fn sweep(args: RunArgs) -> Result<i32, CliError> {
    let cfg = resolve(args, true)?;
    let records = sweep_with(&cfg)?;
    print!("{}", report::sweep_text(&records));
    Ok(status(&records))
}

fn density_from(name: &str, params: &BTreeMap<String, f64>) -> Result<DistributionSpec<f64>, CliError> {
    let pairs = params
        .iter()
        .map(|(k, v)| Ok((k.parse::<Param>()?, *v)))
        .collect::<qlid::Result<Vec<_>>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let spec = DistributionSpec::from_name(name, &pairs).map_err(|e| CliError::Config(e.to_string()))?;
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

fn simulate(a: SimulateArgs) -> Result<i32, CliError> {
    let spec = density_from(&a.family0, &a.params0)?;
    let reps = if a.full { 100_000 } else { a.replications };
    let sample = artificial_mean_sample(&spec, a.n, reps, a.seed, a.workers)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut text = format!("# order-statistic means, {reps} replications, seed {}\n", a.seed);
    for v in sample.values() {
        text.push_str(&format!("{v}\n"));
    }
    let bins = match &a.edges {
        Some(e) => Some(bin_count(sample.values(), e).map_err(|e| CliError::Config(e.to_string()))?),
        None => None,
    };
    match &a.out_dir {
        Some(dir) => {
            report::write(&dir.join("sample.txt"), &text)?;
            if let Some(b) = &bins {
                report::write(&dir.join("bins.csv"), &b.to_csv())?;
            }
        }
        None => {
            print!("{text}");
            if let Some(b) = &bins {
                print!("{}", b.to_csv());
            }
        }
    }
    Ok(exit::OK)
}

fn read_sample(path: &Path, support: Option<&str>) -> Result<qlid::Sample<f64>, CliError> {
    let data = ingest::read(path)?;
    let support = match support {
        Some(s) => s.parse().map_err(|e: qlid::Error| CliError::Config(e.to_string()))?,
        None => data.inferred_support(),
    };
    data.into_sample(support)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => report::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn inject(a: InjectArgs) -> Result<i32, CliError> {
    let sample = read_sample(&a.data, a.support.as_deref())?;
    let c = inject_outliers(&sample);
    let mut text = format!(
        "# {} support, {} injected value(s) appended\n",
        c.support(),
        c.injected_count()
    );
    for v in c.values() {
        text.push_str(&format!("{v}\n"));
    }
    emit(a.out.as_deref(), &text)?;
    Ok(exit::OK)
}

fn bins(a: BinsArgs) -> Result<i32, CliError> {
    let mut sample = read_sample(&a.data, a.support.as_deref())?;
    if a.outliers {
        sample = inject_outliers(&sample);
    }
    let r = bin_count(sample.values(), &a.edges).map_err(|e| CliError::Config(e.to_string()))?;
    emit(a.out.as_deref(), &r.to_csv())?;
    Ok(exit::OK)
}

fn plot_cmd(a: PlotArgs) -> Result<i32, CliError> {
    if a.density.is_empty() {
        let cfg = resolve(a.run, false)?;
        let (sample, _) = load_data(&cfg)?;
        let records = pipeline::run_fit(&cfg, &sample);
        let curves = fitted_curves(&cfg, &records);
        if curves.is_empty() {
            return Err(CliError::Config("no fit succeeded; nothing to plot".into()));
        }
        let files = plot::emit(&cfg.out_dir.join("plot"), &sample, &curves, cfg.edges.as_deref())?;
        for f in files {
            println!("{}", f.display());
        }
        return Ok(status(&records));
    }
    let data = a
        .run
        .data
        .clone()
        .ok_or_else(|| CliError::Config("plot needs --data".into()))?;
    let mut curves = Vec::new();
    for d in &a.density {
        let (name, params) = d.split_once(':').unwrap_or((d.as_str(), ""));
        let params = parse_assignments(params).map_err(CliError::Config)?;
        curves.push(Curve {
            label: d.clone(),
            density: density_from(name, &params)?,
        });
    }
    let support = a.run.support.as_deref().map(str::to_owned).or_else(|| {
        curves
            .first()
            .map(|c| c.density.support().name().to_owned())
    });
    let sample = read_sample(&data, support.as_deref())?;
    let out = a.run.out_dir.unwrap_or_else(|| PathBuf::from("qlid-out"));
    let files = plot::emit(&out.join("plot"), &sample, &curves, a.run.edges.as_deref())?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(exit::OK)
}
