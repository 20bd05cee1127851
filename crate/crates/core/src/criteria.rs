//! Information criteria and fit comparison.
//!
//! `IC = -2 rho + c_k` with `c_k = 2k` (AIC) or `ln(n) k` (BIC). The robust
//! versions `RAIC_q` / `RBIC_q` apply the same penalty to the value of a
//! q-log-likelihood or LID estimating function. Values are only ranked within
//! a [`ComparabilityClass`]: two estimating functions that map densities
//! differently produce criteria on different scales.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::distributions::Family;
use crate::error::{domain, Result};
use crate::estimators::{EstimatorKind, EstimatorSpec};
use crate::optimizer::Diagnostics;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    Aic,
    Bic,
}

pub fn penalty_term<T: Real>(k: usize, n: usize, penalty: Penalty) -> T {
    let k = T::of_usize(k);
    match penalty {
        Penalty::Aic => T::of(2.0) * k,
        Penalty::Bic => T::of_usize(n).ln() * k,
    }
}

fn check_counts(k: usize, n: usize, penalty: Penalty) -> Result<()> {
    if k < 1 {
        return domain("k", "at least 1", k as f64);
    }
    let min_n = if penalty == Penalty::Bic { 2 } else { 1 };
    if n < min_n {
        return domain("n", "at least 1 (2 for BIC)", n as f64);
    }
    Ok(())
}

/// `-2 rho + c_k` for a log-likelihood value.
pub fn ic<T: Real>(rho: T, k: usize, n: usize, penalty: Penalty) -> Result<T> {
    check_counts(k, n, penalty)?;
    Ok(T::of(-2.0) * rho + penalty_term(k, n, penalty))
}

/// `-2 psi + c_k` for a q-log-likelihood or LID value.
pub fn ric_q<T: Real>(psi: T, k: usize, n: usize, penalty: Penalty) -> Result<T> {
    check_counts(k, n, penalty)?;
    Ok(T::of(-2.0) * psi + penalty_term(k, n, penalty))
}

/// Whether a fit reports `AIC/BIC` or `RAIC_q/RBIC_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriterionKind {
    Likelihood,
    Robust,
}

impl CriterionKind {
    pub fn for_kind(kind: EstimatorKind) -> Self {
        match kind {
            EstimatorKind::Mle | EstimatorKind::Huber => CriterionKind::Likelihood,
            _ => CriterionKind::Robust,
        }
    }

    pub fn labels(self) -> (&'static str, &'static str) {
        match self {
            CriterionKind::Likelihood => ("AIC", "BIC"),
            CriterionKind::Robust => ("RAIC_q", "RBIC_q"),
        }
    }
}

/// Clean data or data with injected outliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Clean,
    Contaminated,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Clean => "clean",
            Condition::Contaminated => "contaminated",
        })
    }
}

/// Fits are ranked only against fits of the same class.
///
/// All MLE fits share the `ln` mapping and are comparable across families;
/// every other kind is keyed by its tuning `q` and both families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparabilityClass {
    pub kind: EstimatorKind,
    pub q: Option<f64>,
    pub f0: Option<Family>,
    pub f1: Option<Family>,
    pub condition: Condition,
}

impl ComparabilityClass {
    pub fn of<T: Real>(spec: &EstimatorSpec<T>, condition: Condition) -> Self {
        if spec.kind() == EstimatorKind::Mle {
            return Self {
                kind: spec.kind(),
                q: None,
                f0: None,
                f1: None,
                condition,
            };
        }
        Self {
            kind: spec.kind(),
            q: spec.q().map(|q| q.get().as_f64()),
            f0: Some(spec.f0().family()),
            f1: spec.f1().map(|b| b.family()),
            condition,
        }
    }

    pub fn key(&self) -> String {
        let mut s = format!("{}", self.kind);
        if let Some(q) = self.q {
            let _ = write!(s, "/q={q}");
        }
        if let Some(f) = self.f0 {
            let _ = write!(s, "/f0={f}");
        }
        if let Some(f) = self.f1 {
            let _ = write!(s, "/f1={f}");
        }
        let _ = write!(s, "/{}", self.condition);
        s
    }
}

/// Outcome of one estimator on one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    pub label: String,
    pub kind: EstimatorKind,
    pub condition: Condition,
    pub class: ComparabilityClass,
    /// `(name, value)` of each estimated parameter.
    pub params: Vec<(String, T)>,
    /// Estimating-function value at the optimum (log-likelihood for Huber).
    pub objective: T,
    pub k: usize,
    pub n: usize,
    pub criterion_kind: CriterionKind,
    pub aic: T,
    pub bic: T,
    pub degenerate: bool,
    pub seed: u64,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> FitResult<T> {
    /// Assembles a result and computes both criteria.
    pub fn new(
        spec: &EstimatorSpec<T>,
        condition: Condition,
        theta: &[T],
        objective: T,
        n: usize,
        seed: u64,
        diagnostics: Diagnostics<T>,
    ) -> Result<Self> {
        let k = spec.free_params().len();
        let criterion_kind = CriterionKind::for_kind(spec.kind());
        let f = match criterion_kind {
            CriterionKind::Likelihood => ic::<T>,
            CriterionKind::Robust => ric_q::<T>,
        };
        Ok(Self {
            label: spec.label(),
            kind: spec.kind(),
            condition,
            class: ComparabilityClass::of(spec, condition),
            params: spec
                .free_params()
                .iter()
                .zip(theta)
                .map(|(p, v)| (p.key().to_string(), *v))
                .collect(),
            objective,
            k,
            n,
            criterion_kind,
            aic: f(objective, k, n, Penalty::Aic)?,
            bic: f(objective, k, n, Penalty::Bic)?,
            degenerate: spec.is_degenerate(),
            seed,
            diagnostics,
        })
    }

    pub fn theta(&self) -> Vec<T> {
        self.params.iter().map(|(_, v)| *v).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow<T> {
    /// Position of the fit in the input list.
    pub index: usize,
    pub label: String,
    pub class: String,
    pub condition: Condition,
    pub params: Vec<(String, T)>,
    pub criterion_kind: CriterionKind,
    pub aic: T,
    pub bic: T,
    /// Smallest AIC (resp. BIC) within a class of two or more fits.
    pub best_aic: bool,
    pub best_bic: bool,
}

/// Fits grouped by comparability class, classes in order of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison<T> {
    pub rows: Vec<ComparisonRow<T>>,
}

/// Groups fits by class and flags the minimum-criterion fit of each class
/// that has at least two members.
pub fn compare<T: Real>(fits: &[FitResult<T>]) -> Comparison<T> {
    let mut classes: Vec<String> = Vec::new();
    for f in fits {
        let key = f.class.key();
        if !classes.contains(&key) {
            classes.push(key);
        }
    }
    let argmin = |idx: &[usize], get: &dyn Fn(&FitResult<T>) -> T| {
        idx.iter().copied().fold(None, |best: Option<usize>, i| match best {
            Some(b) if !(get(&fits[i]) < get(&fits[b])) => Some(b),
            _ => Some(i),
        })
    };
    let mut rows = Vec::with_capacity(fits.len());
    for key in &classes {
        let members: Vec<usize> = (0..fits.len()).filter(|&i| &fits[i].class.key() == key).collect();
        let (best_aic, best_bic) = if members.len() > 1 {
            (argmin(&members, &|f| f.aic), argmin(&members, &|f| f.bic))
        } else {
            (None, None)
        };
        for &i in &members {
            let f = &fits[i];
            rows.push(ComparisonRow {
                index: i,
                label: f.label.clone(),
                class: key.clone(),
                condition: f.condition,
                params: f.params.clone(),
                criterion_kind: f.criterion_kind,
                aic: f.aic,
                bic: f.bic,
                best_aic: best_aic == Some(i),
                best_bic: best_bic == Some(i),
            });
        }
    }
    Comparison { rows }
}

impl<T: Real> Comparison<T> {
    /// Aligned text table, numbers at 4 decimals. `*` marks a class minimum.
    pub fn render_text(&self) -> String {
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                let (la, lb) = r.criterion_kind.labels();
                let params = r
                    .params
                    .iter()
                    .map(|(k, v)| format!("{k}={:.4}", v.as_f64()))
                    .collect::<Vec<_>>()
                    .join(" ");
                let mark = |b: bool| if b { "*" } else { "" };
                [
                    r.label.clone(),
                    r.condition.to_string(),
                    params,
                    format!("{la}={:.4}{}", r.aic.as_f64(), mark(r.best_aic)),
                    format!("{lb}={:.4}{}", r.bic.as_f64(), mark(r.best_bic)),
                ]
            })
            .collect();
        let header = ["estimating function", "condition", "estimates", "criterion 1", "criterion 2"];
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cols: &[&str]| {
            let parts: Vec<String> = cols
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(&mut out, &header);
        let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
        out.push_str(&"-".repeat(total));
        out.push('\n');
        let mut last_class: Option<&str> = None;
        for (row, c) in self.rows.iter().zip(&cells) {
            if last_class.is_some_and(|k| k != row.class) {
                out.push('\n');
            }
            last_class = Some(&row.class);
            let cols: Vec<&str> = c.iter().map(String::as_str).collect();
            line(&mut out, &cols);
        }
        out
    }

    /// CSV with full-precision numbers.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("index,label,class,condition,params,criterion,aic,bic,best_aic,best_bic\n");
        for r in &self.rows {
            let params = r
                .params
                .iter()
                .map(|(k, v)| format!("{k}={}", v.as_f64()))
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(
                out,
                "{},\"{}\",{},{},{},{},{},{},{},{}",
                r.index,
                r.label,
                r.class,
                r.condition,
                params,
                r.criterion_kind.labels().0,
                r.aic.as_f64(),
                r.bic.as_f64(),
                r.best_aic,
                r.best_bic
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{DistributionSpec, Family};
    use crate::estimators::FamilyBinding;
    use crate::qcore::QParam;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ic_examples() {
        assert_eq!(ic(0.0, 2, 90, Penalty::Aic).unwrap(), 4.0);
        assert_eq!(ric_q(0.0, 2, 90, Penalty::Aic).unwrap(), 4.0);
        let rho = -92.40925;
        assert_abs_diff_eq!(ic(rho, 2, 90, Penalty::Aic).unwrap(), 188.8185, epsilon = 5e-4);
        assert_abs_diff_eq!(ic(rho, 2, 90, Penalty::Bic).unwrap(), 193.8181, epsilon = 5e-4);
        let gap = |n| ic(0.0, 2, n, Penalty::Bic).unwrap() - ic(0.0, 2, n, Penalty::Aic).unwrap();
        assert_abs_diff_eq!(gap(95), 330.2239 - 325.1162, epsilon = 1e-3);
        assert_abs_diff_eq!(gap(90), 61.6110 - 56.6114, epsilon = 1e-3);
    }

    #[test]
    fn count_preconditions() {
        assert!(ic(1.0, 0, 10, Penalty::Aic).is_err());
        assert!(ic(1.0, 2, 0, Penalty::Aic).is_err());
        assert!(ic(1.0, 2, 1, Penalty::Bic).is_err());
        assert!(ic(1.0, 2, 1, Penalty::Aic).is_ok());
    }

    #[test]
    fn outlier_row_bic_shift() {
        // same psi, n grows from 90 to 91 with one injected outlier
        let shift = ric_q(-26.3057, 2, 91, Penalty::Bic).unwrap()
            - ric_q(-26.3057, 2, 90, Penalty::Bic).unwrap();
        assert_abs_diff_eq!(shift, 61.6331 - 61.6110, epsilon = 1e-3);
    }

    fn fit(spec: &EstimatorSpec<f64>, aic: f64, condition: Condition) -> FitResult<f64> {
        // choose the objective that produces the requested AIC
        let rho = (2.0 * spec.free_params().len() as f64 - aic) / 2.0;
        FitResult::new(spec, condition, &[1.0, 1.0], rho, 90, 1, diag()).unwrap()
    }

    fn diag() -> Diagnostics<f64> {
        Diagnostics {
            evaluations: 0,
            best_per_generation: vec![],
            restart_values: vec![],
            winning_restart: 0,
            polish_iterations: 0,
            polish_converged: true,
            boundary_params: vec![],
        }
    }

    fn binding(f: Family) -> FamilyBinding<f64> {
        FamilyBinding::new(DistributionSpec::new(f))
    }

    #[test]
    fn mle_fits_compare_across_families() {
        let burr = EstimatorSpec::mle(binding(Family::BurrIII));
        let gamma = EstimatorSpec::mle(binding(Family::Gamma));
        let c = compare(&[fit(&burr, 185.1382, Condition::Clean), fit(&gamma, 188.8185, Condition::Clean)]);
        assert!(c.rows[0].best_aic && c.rows[0].best_bic);
        assert!(!c.rows[1].best_aic && !c.rows[1].best_bic);
        assert_eq!(c.rows[0].class, c.rows[1].class);
    }

    #[test]
    fn no_flag_across_classes() {
        let mle = EstimatorSpec::mle(binding(Family::Gamma));
        let lid = EstimatorSpec::lid_logq(
            binding(Family::Gamma),
            binding(Family::Weibull),
            QParam::new(0.007).unwrap(),
        )
        .unwrap();
        let c = compare(&[fit(&mle, 188.8, Condition::Clean), fit(&lid, 56.6, Condition::Clean)]);
        assert!(c.rows.iter().all(|r| !r.best_aic && !r.best_bic));
        assert_ne!(c.rows[0].class, c.rows[1].class);

        // clean vs contaminated never compete either
        let c = compare(&[fit(&mle, 188.8, Condition::Clean), fit(&mle, 204.6, Condition::Contaminated)]);
        assert!(c.rows.iter().all(|r| !r.best_aic));
    }

    #[test]
    fn identical_labels_share_a_class() {
        let mle = EstimatorSpec::mle(binding(Family::Gamma));
        let fits = [fit(&mle, 10.0, Condition::Clean), fit(&mle, 9.0, Condition::Clean), fit(&mle, 11.0, Condition::Clean)];
        let c = compare(&fits);
        assert_eq!(c.rows.iter().filter(|r| r.best_aic).count(), 1);
        assert!(c.rows.iter().find(|r| r.best_aic).unwrap().index == 1);
    }

    #[test]
    fn rendering() {
        let burr = EstimatorSpec::mle(binding(Family::BurrIII));
        let gamma = EstimatorSpec::mle(binding(Family::Gamma));
        let c = compare(&[fit(&burr, 185.1382, Condition::Clean), fit(&gamma, 188.8185, Condition::Clean)]);
        let text = c.render_text();
        assert!(text.contains("AIC=185.1382*"));
        assert!(text.contains("AIC=188.8185"));
        let csv = c.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().ends_with("true,true"));
    }

    proptest::proptest! {
        #[test]
        fn penalty_gap_identity(rho in -1e4f64..1e4, k in 1usize..6, n in 2usize..100_000) {
            let gap = (n as f64).ln() * k as f64 - 2.0 * k as f64;
            let d = ic(rho, k, n, Penalty::Bic).unwrap() - ic(rho, k, n, Penalty::Aic).unwrap();
            proptest::prop_assert!((d - gap).abs() <= 1e-12 * (1.0 + rho.abs()));
            let d = ric_q(rho, k, n, Penalty::Bic).unwrap() - ric_q(rho, k, n, Penalty::Aic).unwrap();
            proptest::prop_assert!((d - gap).abs() <= 1e-12 * (1.0 + rho.abs()));
        }

        #[test]
        fn decreasing_in_rho(rho in -1e4f64..1e4, step in 1e-3f64..10.0, k in 1usize..6, n in 2usize..1000) {
            proptest::prop_assert!(ic(rho + step, k, n, Penalty::Aic).unwrap() < ic(rho, k, n, Penalty::Aic).unwrap());
            proptest::prop_assert!(ic(rho + step, k, n, Penalty::Bic).unwrap() < ic(rho, k, n, Penalty::Bic).unwrap());
        }
    }
}
