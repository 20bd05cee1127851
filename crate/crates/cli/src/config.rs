//! Run configuration: a TOML file merged with command-line overrides.
//!
//! ```toml
//! data = "fixtures/half_line_n90.txt"
//! seed = 7
//! outliers = true
//! edges = [0, 0.5, 1.5, 2.5, 20]
//!
//! [optimizer]
//! generations = 150
//!
//! [[estimator]]
//! kind = "lid-logq"
//! q = 0.007
//! family0 = "gamma"
//! family1 = "weibull"
//!
//! [sweep]
//! q = [0.007, 0.1, 0.5]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qlid::{
    Bounds, DistributionSpec, EstimatorKind, EstimatorSpec, Family, FamilyBinding, OptConfig,
    Param, SampleSupport,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One estimator as written in the config file or built from flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kind: String,
    #[serde(default)]
    pub family0: Option<String>,
    #[serde(default)]
    pub family1: Option<String>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub u: Option<f64>,
    /// Fixed shape `p` of `f0` (EP and Gt).
    #[serde(default)]
    pub p0: Option<f64>,
    /// Fixed shape `p` of `f1`.
    #[serde(default)]
    pub p1: Option<f64>,
    /// Other fixed parameters of `f0`, e.g. `{ eta = 2 }`.
    #[serde(default)]
    pub params0: BTreeMap<String, f64>,
    #[serde(default)]
    pub params1: BTreeMap<String, f64>,
    /// Estimated parameters; the family's location/scale or shape/scale pair by default.
    #[serde(default)]
    pub free: Option<Vec<String>>,
    /// `[lower, upper]` per free parameter.
    #[serde(default)]
    pub bounds: Option<Vec<[f64; 2]>>,
}

/// Tuning values substituted into an estimator, e.g. one sweep grid point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Tuning {
    pub q: Option<f64>,
    pub u: Option<f64>,
    pub p0: Option<f64>,
    pub p1: Option<f64>,
}

impl EstimatorConfig {
    pub fn kind(&self) -> Result<EstimatorKind, CliError> {
        self.kind.parse().map_err(config_err)
    }

    /// Builds the estimator with the given tuning values taking precedence.
    pub fn build(&self, tuning: Tuning) -> qlid::Result<EstimatorSpec<f64>> {
        let kind: EstimatorKind = self.kind.parse()?;
        let q = tuning.q.or(self.q);
        let u = tuning.u.or(self.u);
        let p0 = tuning.p0.or(self.p0);
        let p1 = tuning.p1.or(self.p1);
        let free = match &self.free {
            Some(names) => Some(
                names
                    .iter()
                    .map(|n| n.parse::<Param>())
                    .collect::<qlid::Result<Vec<_>>>()?,
            ),
            None => None,
        };
        if kind == EstimatorKind::Huber {
            let u = u.ok_or_else(|| qlid::Error::InvalidEstimator("huber requires u".into()))?;
            return EstimatorSpec::huber(u);
        }
        let name0 = self.family0.as_deref().ok_or_else(|| {
            qlid::Error::InvalidEstimator(format!("{kind} requires family0"))
        })?;
        let f0 = binding(name0, &self.params0, p0, free.clone())?;
        let f1 = if kind.uses_f1() {
            let name1 = self.family1.as_deref().ok_or_else(|| {
                qlid::Error::InvalidEstimator(format!("{kind} requires family1"))
            })?;
            Some(binding(name1, &self.params1, p1, free)?)
        } else {
            None
        };
        EstimatorSpec::from_parts(kind, f0, f1, q, u)
    }

    pub fn bounds(&self, spec: &EstimatorSpec<f64>) -> qlid::Result<Bounds<f64>> {
        match &self.bounds {
            None => Ok(Bounds::for_params(spec.free_params())),
            Some(b) => {
                if b.len() != spec.free_params().len() {
                    return Err(qlid::Error::InvalidBounds(format!(
                        "{} bounds for {} free parameters",
                        b.len(),
                        spec.free_params().len()
                    )));
                }
                Bounds::new(b.iter().map(|x| x[0]).collect(), b.iter().map(|x| x[1]).collect())
            }
        }
    }

    /// Family of `f0` (the normal preset for Huber).
    pub fn family0(&self) -> Option<Family> {
        if self.kind().ok() == Some(EstimatorKind::Huber) {
            return Some(Family::ExpPower);
        }
        let name = self.family0.as_deref()?;
        DistributionSpec::<f64>::from_name(name, &[])
            .map(|s| s.family())
            .ok()
    }

    pub fn family1(&self) -> Option<Family> {
        let name = self.family1.as_deref()?;
        DistributionSpec::<f64>::from_name(name, &[])
            .map(|s| s.family())
            .ok()
    }
}

fn binding(
    name: &str,
    params: &BTreeMap<String, f64>,
    p: Option<f64>,
    free: Option<Vec<Param>>,
) -> qlid::Result<FamilyBinding<f64>> {
    let mut fixed = params
        .iter()
        .map(|(k, v)| Ok((k.parse::<Param>()?, *v)))
        .collect::<qlid::Result<Vec<_>>>()?;
    if let Some(p) = p {
        fixed.push((Param::P, p));
    }
    let template = DistributionSpec::from_name(name, &fixed)?;
    match free {
        Some(free) => FamilyBinding::with_free(template, free),
        None => Ok(FamilyBinding::new(template)),
    }
}

/// Grid axes for `sweep`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub p0: Option<Vec<f64>>,
    #[serde(default)]
    pub p1: Option<Vec<f64>>,
    #[serde(default)]
    pub u: Option<Vec<f64>>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.q.is_none() && self.p0.is_none() && self.p1.is_none() && self.u.is_none()
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, axis) in [("q", &self.q), ("p0", &self.p0), ("p1", &self.p1), ("u", &self.u)] {
            if let Some(values) = axis {
                if values.is_empty() {
                    return Err(CliError::Config(format!("sweep grid {name} is empty")));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(CliError::Config(format!("sweep grid {name} has a non-finite value")));
                }
            }
        }
        Ok(())
    }
}

/// Optional overrides of [`OptConfig`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub elite_fraction: Option<f64>,
    pub crossover_fraction: Option<f64>,
    pub mutation_scale: Option<f64>,
    pub polish_tolerance: Option<f64>,
    pub restarts: Option<usize>,
}

/// The config file as written.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub seed: Option<u64>,
    pub outliers: Option<bool>,
    pub edges: Option<Vec<f64>>,
    pub out_dir: Option<PathBuf>,
    pub support: Option<String>,
    pub replications: Option<usize>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub estimator: Vec<EstimatorConfig>,
    pub sweep: Option<SweepGrid>,
}

impl FileConfig {
    /// Reads a config file; a relative `data` path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let (Some(data), Some(dir)) = (&cfg.data, path.parent()) {
            if data.is_relative() {
                cfg.data = Some(dir.join(data));
            }
        }
        Ok(cfg)
    }
}

/// Values given on the command line; every `Some` overrides the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub seed: Option<u64>,
    pub outliers: Option<bool>,
    pub edges: Option<Vec<f64>>,
    pub out_dir: Option<PathBuf>,
    pub support: Option<String>,
    pub replications: Option<usize>,
    pub workers: Option<usize>,
    /// Replaces the estimator list when a kind or family is given.
    pub kind: Option<String>,
    pub family0: Option<String>,
    pub family1: Option<String>,
    pub params0: BTreeMap<String, f64>,
    pub params1: BTreeMap<String, f64>,
    pub bounds: Option<Vec<[f64; 2]>>,
    pub q: Option<Vec<f64>>,
    pub u: Option<Vec<f64>>,
    pub p0: Option<Vec<f64>>,
    pub p1: Option<Vec<f64>>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub estimators: Vec<EstimatorConfig>,
    pub optimizer: OptConfig,
    pub outliers: bool,
    pub edges: Option<Vec<f64>>,
    pub sweep: Option<SweepGrid>,
    /// Not part of the report, so reruns into other directories compare equal.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub support: Option<SampleSupport>,
    pub replications: usize,
    pub workers: usize,
}

pub const DEFAULT_REPLICATIONS: usize = 10_000;

impl RunConfig {
    /// Merges file and flags. With `sweep`, list-valued `q/u/p0/p1` flags
    /// become grid axes; otherwise each must hold a single value.
    pub fn resolve(file: FileConfig, flags: Overrides, sweep: bool) -> Result<Self, CliError> {
        let data = flags
            .data
            .or(file.data)
            .ok_or_else(|| CliError::Config("no dataset (use --data or set `data`)".into()))?;

        let mut estimators = file.estimator;
        if flags.kind.is_some() || flags.family0.is_some() {
            estimators = vec![EstimatorConfig {
                kind: flags.kind.clone().unwrap_or_else(|| "mle".into()),
                family0: flags.family0.clone(),
                family1: flags.family1.clone(),
                params0: flags.params0.clone(),
                params1: flags.params1.clone(),
                ..Default::default()
            }];
        }
        if estimators.is_empty() {
            return Err(CliError::Config(
                "no estimator (add an [[estimator]] table or use --kind/--family0)".into(),
            ));
        }
        if let Some(b) = &flags.bounds {
            for e in &mut estimators {
                e.bounds = Some(b.clone());
            }
        }

        let mut grid = file.sweep.unwrap_or_default();
        if sweep {
            for (axis, flag) in [
                (&mut grid.q, &flags.q),
                (&mut grid.u, &flags.u),
                (&mut grid.p0, &flags.p0),
                (&mut grid.p1, &flags.p1),
            ] {
                if flag.is_some() {
                    axis.clone_from(flag);
                }
            }
            grid.validate()?;
        } else {
            let single = |name: &str, v: &Option<Vec<f64>>| match v.as_deref() {
                None => Ok(None),
                Some([x]) => Ok(Some(*x)),
                Some(_) => Err(CliError::Config(format!(
                    "--{name} takes one value here; use `sweep` for grids"
                ))),
            };
            let q = single("q", &flags.q)?;
            let u = single("u", &flags.u)?;
            let p0 = single("p0", &flags.p0)?;
            let p1 = single("p1", &flags.p1)?;
            for e in &mut estimators {
                e.q = q.or(e.q);
                e.u = u.or(e.u);
                e.p0 = p0.or(e.p0);
                e.p1 = p1.or(e.p1);
            }
        }

        let mut optimizer = OptConfig::with_seed(flags.seed.or(file.seed).unwrap_or(0));
        let o = &file.optimizer;
        if let Some(v) = o.population {
            optimizer.population = v;
        }
        if let Some(v) = o.generations {
            optimizer.generations = v;
        }
        if let Some(v) = o.elite_fraction {
            optimizer.elite_fraction = v;
        }
        if let Some(v) = o.crossover_fraction {
            optimizer.crossover_fraction = v;
        }
        if let Some(v) = o.mutation_scale {
            optimizer.mutation_scale = v;
        }
        if let Some(v) = o.polish_tolerance {
            optimizer.polish_tolerance = v;
        }
        if let Some(v) = o.restarts {
            optimizer.restarts = v;
        }
        optimizer.validate().map_err(config_err)?;

        let support = flags
            .support
            .or(file.support)
            .map(|s| s.parse::<SampleSupport>())
            .transpose()
            .map_err(config_err)?;
        let edges = flags.edges.or(file.edges);
        if let Some(e) = &edges {
            qlid::bin_count::<f64>(&[], e).map_err(config_err)?;
        }
        for e in &estimators {
            e.kind()?;
            for name in [&e.family0, &e.family1].into_iter().flatten() {
                DistributionSpec::<f64>::from_name(name, &[]).map_err(config_err)?;
            }
        }

        Ok(Self {
            data,
            estimators,
            optimizer,
            outliers: flags.outliers.or(file.outliers).unwrap_or(false),
            edges,
            sweep: if sweep { Some(grid) } else { None },
            out_dir: flags
                .out_dir
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from("qlid-out")),
            support,
            replications: flags
                .replications
                .or(file.replications)
                .unwrap_or(DEFAULT_REPLICATIONS),
            workers: flags.workers.or(file.workers).unwrap_or(0),
        })
    }

    /// `--support` first, then the estimators' families, then the data sign.
    pub fn support_for(&self, data: &crate::ingest::Ingested) -> SampleSupport {
        if let Some(s) = self.support {
            return s;
        }
        let families: Vec<Family> = self.estimators.iter().filter_map(|e| e.family0()).collect();
        if let Some(f) = families.first() {
            if families.iter().all(|g| g.support() == f.support()) {
                return f.support();
            }
        }
        data.inferred_support()
    }
}

fn config_err(e: qlid::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Parses `a=3,b=0.25`.
pub fn parse_assignments(s: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got `{part}`"))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| format!("bad number in `{part}`"))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// Parses a comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| format!("bad number `{p}`")))
        .collect()
}

/// Parses `lo:hi,lo:hi`.
pub fn parse_bounds(s: &str) -> Result<Vec<[f64; 2]>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (lo, hi) = p
                .split_once(':')
                .ok_or_else(|| format!("expected lo:hi, got `{p}`"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound `{p}`"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound `{p}`"))?;
            Ok([lo, hi])
        })
        .collect()
}
