use qlid::{
    artificial_mean_sample, bin_count, compare, hga_maximize, inject_outliers, Comparison,
    Condition, DistributionSpec, EstimatorKind, EstimatorSpec, FitResult, OptConfig, Sample,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EstimatorConfig, RunConfig, SweepGrid, Tuning};

/// One estimator on one condition: a result or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    /// Position of the estimator in the configuration.
    pub spec_index: usize,
    pub condition: Condition,
    pub tuning: Tuning,
    pub label: String,
    pub result: Option<FitResult<f64>>,
    pub error: Option<String>,
    /// Counts of an artificial sample from the fitted `f0` over the
    /// configured edges (sweeps only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artificial_bins: Option<Result<Vec<usize>, String>>,
}

impl FitRecord {
    pub fn is_ok(&self) -> bool {
        self.result.is_some()
    }
}

/// The estimated density: `f0` at the optimum (the normal preset for Huber).
pub fn fitted_density(spec: &EstimatorSpec<f64>, theta: &[f64]) -> DistributionSpec<f64> {
    spec.f0().instantiate(theta)
}

/// Maximizes one estimating function on one sample.
pub fn fit_one(
    spec: &EstimatorSpec<f64>,
    cfg: &EstimatorConfig,
    sample: &Sample<f64>,
    condition: Condition,
    opt: &OptConfig,
) -> qlid::Result<FitResult<f64>> {
    let bounds = cfg.bounds(spec)?;
    let optimum = hga_maximize(
        |theta: &[f64]| spec.objective(sample, theta).value_or_sentinel(),
        &bounds,
        opt,
    )?;
    FitResult::new(
        spec,
        condition,
        &optimum.theta,
        optimum.value,
        sample.len(),
        opt.seed,
        optimum.diagnostics,
    )
}

/// A job is one (estimator, tuning, condition) triple.
struct Job {
    spec_index: usize,
    tuning: Tuning,
    condition: Condition,
}

fn run_jobs(config: &RunConfig, clean: &Sample<f64>, jobs: Vec<Job>) -> Vec<FitRecord> {
    let contaminated = inject_outliers(clean);
    let run = |job: &Job| {
        let cfg = &config.estimators[job.spec_index];
        let sample = match job.condition {
            Condition::Clean => clean,
            Condition::Contaminated => &contaminated,
        };
        let built = cfg.build(job.tuning);
        let label = match &built {
            Ok(spec) => spec.label(),
            Err(_) => fallback_label(cfg, job.tuning),
        };
        let outcome = built.and_then(|spec| fit_one(&spec, cfg, sample, job.condition, &config.optimizer));
        let (result, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        FitRecord {
            spec_index: job.spec_index,
            condition: job.condition,
            tuning: job.tuning,
            label,
            result,
            error,
            artificial_bins: None,
        }
    };
    // results come back in job order whatever the thread count
    in_pool(config.workers, || jobs.par_iter().map(run).collect())
}

pub(crate) fn in_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn fallback_label(cfg: &EstimatorConfig, t: Tuning) -> String {
    let mut s = cfg.kind.clone();
    if let Some(q) = t.q.or(cfg.q) {
        s.push_str(&format!(" q={q}"));
    }
    if let Some(u) = t.u.or(cfg.u) {
        s.push_str(&format!(" u={u}"));
    }
    for (name, f) in [("f0", &cfg.family0), ("f1", &cfg.family1)] {
        if let Some(f) = f {
            s.push_str(&format!(" {name}={f}"));
        }
    }
    s
}

fn conditions(config: &RunConfig) -> Vec<Condition> {
    if config.outliers {
        vec![Condition::Clean, Condition::Contaminated]
    } else {
        vec![Condition::Clean]
    }
}

/// Every configured estimator on the clean sample and, when enabled, on the
/// outlier-injected sample. Records are ordered by estimator, then condition.
pub fn run_fit(config: &RunConfig, sample: &Sample<f64>) -> Vec<FitRecord> {
    let conds = conditions(config);
    let jobs = (0..config.estimators.len())
        .flat_map(|i| {
            conds.iter().map(move |&c| Job {
                spec_index: i,
                tuning: Tuning::default(),
                condition: c,
            })
        })
        .collect();
    run_jobs(config, sample, jobs)
}

/// Grid points relevant to one estimator: `q` only for q-kinds, `u` only
/// for Huber, `p0` / `p1` only when the family has a shape `p`.
pub fn grid_points(cfg: &EstimatorConfig, grid: &SweepGrid) -> Vec<Tuning> {
    let kind = cfg.kind().ok();
    let axis = |values: &Option<Vec<f64>>, relevant: bool| -> Vec<Option<f64>> {
        match values {
            Some(v) if relevant => v.iter().map(|&x| Some(x)).collect(),
            _ => vec![None],
        }
    };
    let has_p = |f: Option<qlid::Family>| f.is_some_and(|f| f.has_param(qlid::Param::P));
    let is_huber = kind == Some(EstimatorKind::Huber);
    let qs = axis(&grid.q, kind.is_some_and(EstimatorKind::uses_q));
    let us = axis(&grid.u, is_huber);
    let p0s = axis(&grid.p0, !is_huber && has_p(cfg.family0()));
    let p1s = axis(&grid.p1, !is_huber && kind.is_some_and(EstimatorKind::uses_f1) && has_p(cfg.family1()));
    let mut out = Vec::new();
    for &q in &qs {
        for &p0 in &p0s {
            for &p1 in &p1s {
                for &u in &us {
                    out.push(Tuning { q, u, p0, p1 });
                }
            }
        }
    }
    out
}

/// Fits the Cartesian product of the grid for each estimator. With edges
/// configured, each successful fit also gets the bin counts of an artificial
/// order-statistic mean sample drawn from its fitted density.
pub fn run_sweep(config: &RunConfig, sample: &Sample<f64>) -> Vec<FitRecord> {
    let grid = config.sweep.clone().unwrap_or_default();
    let conds = conditions(config);
    let mut jobs = Vec::new();
    for (i, cfg) in config.estimators.iter().enumerate() {
        for tuning in grid_points(cfg, &grid) {
            for &condition in &conds {
                jobs.push(Job {
                    spec_index: i,
                    tuning,
                    condition,
                });
            }
        }
    }
    let mut records = run_jobs(config, sample, jobs);
    if let Some(edges) = &config.edges {
        for r in &mut records {
            let Some(fit) = &r.result else { continue };
            let cfg = &config.estimators[r.spec_index];
            let Ok(spec) = cfg.build(r.tuning) else { continue };
            let density = fitted_density(&spec, &fit.theta());
            let bins = artificial_mean_sample(
                &density,
                sample.len(),
                config.replications,
                config.optimizer.seed,
                config.workers,
            )
            .and_then(|s| bin_count(s.values(), edges))
            .map(|b| b.counts)
            .map_err(|e| e.to_string());
            r.artificial_bins = Some(bins);
        }
    }
    records
}

pub fn comparison(records: &[FitRecord]) -> Comparison<f64> {
    let fits: Vec<FitResult<f64>> = records.iter().filter_map(|r| r.result.clone()).collect();
    compare(&fits)
}

/// Successful records sorted by the first criterion within each
/// comparability class (classes in order of first appearance), failures last.
pub fn sweep_order(records: &[FitRecord]) -> Vec<usize> {
    let mut classes: Vec<String> = Vec::new();
    for r in records {
        if let Some(f) = &r.result {
            let k = f.class.key();
            if !classes.contains(&k) {
                classes.push(k);
            }
        }
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let key = |i: usize| match &records[i].result {
            Some(f) => (
                classes.iter().position(|c| *c == f.class.key()).unwrap_or(usize::MAX),
                f.aic,
            ),
            None => (usize::MAX, f64::INFINITY),
        };
        let (ca, va) = key(a);
        let (cb, vb) = key(b);
        ca.cmp(&cb).then(va.total_cmp(&vb)).then(a.cmp(&b))
    });
    order
}
