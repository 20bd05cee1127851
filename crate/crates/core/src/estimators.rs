//! Estimating functions.
//!
//! For a concave, strictly increasing `Lambda` the M-estimator maximizes
//! `rho_Lambda(f0) = sum_i Lambda(f0(x_i; theta))`. `Lambda = ln` gives the
//! MLE and `Lambda = log_q` the MqLE.
//!
//! The least informative distribution (LID) estimating function is the
//! derivative of `rho_Lambda` along the contamination path
//! `f_eps = (1 - eps) f0 + eps f1` at `eps = 0`:
//!
//! ```text
//! psi_Lambda(f0, f1) = sum_i Lambda'(f0(x_i)) (f1(x_i) - f0(x_i))
//! psi_logq(f0, f1)   = sum_i f0(x_i)^-q (f1(x_i) - f0(x_i))
//! psi_log(f0, f1)    = sum_i (f1(x_i) / f0(x_i) - 1)
//! ```
//!
//! Objectives that hit a zero (or non-finite) density return
//! [`Objective::Infeasible`], which orders below every finite value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::distributions::{Density, DistributionSpec, Family, Param, PreparedDensity};
use crate::error::{domain, Error, Result};
use crate::qcore::{log_q_of_ln, QParam};
use crate::sample::Sample;
use crate::scalar::Real;
use crate::special::std_normal_cdf;
use crate::sum::pairwise_sum;

/// Positive free parameters below this value are treated as infeasible.
pub const MIN_POSITIVE_PARAM: f64 = 1e-8;

/// Value of an estimating function, or the infeasible sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective<T> {
    Value(T),
    /// The density vanished (or was not finite) at observation `index`.
    Infeasible { index: usize },
}

impl<T: Real> Objective<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Objective::Value(v) => Some(v),
            Objective::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, Objective::Value(_))
    }

    /// The value, or `-inf` for infeasible points.
    pub fn value_or_sentinel(self) -> T {
        self.value().unwrap_or_else(T::neg_infinity)
    }
}

impl<T: Real> PartialOrd for Objective<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Objective::Value(a), Objective::Value(b)) => a.partial_cmp(b),
            (Objective::Value(_), Objective::Infeasible { .. }) => Some(Ordering::Greater),
            (Objective::Infeasible { .. }, Objective::Value(_)) => Some(Ordering::Less),
            (Objective::Infeasible { .. }, Objective::Infeasible { .. }) => Some(Ordering::Equal),
        }
    }
}

/// The concave map applied to density values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda<T> {
    Log,
    LogQ(QParam<T>),
}

impl<T: Real> Lambda<T> {
    /// `Lambda(t)` from `ln t`.
    #[inline]
    fn apply_ln(self, ln_t: T) -> T {
        match self {
            Lambda::Log => ln_t,
            Lambda::LogQ(q) => log_q_of_ln(ln_t, q),
        }
    }

    pub fn apply(self, t: T) -> T {
        self.apply_ln(t.ln())
    }

    /// `Lambda'(t)`: `1/t` or `t^-q`.
    pub fn derivative(self, t: T) -> T {
        match self {
            Lambda::Log => t.recip(),
            Lambda::LogQ(q) => (-q.get() * t.ln()).exp(),
        }
    }
}

/// `f_eps = (1 - eps) f0 + eps f1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexCombination<T> {
    epsilon: T,
    f0: PreparedDensity<T>,
    f1: PreparedDensity<T>,
}

impl<T: Real> ConvexCombination<T> {
    pub fn new(epsilon: T, f0: &DistributionSpec<T>, f1: &DistributionSpec<T>) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon <= T::one()) {
            return domain("epsilon", "in [0, 1]", epsilon.as_f64());
        }
        Ok(Self {
            epsilon,
            f0: f0.prepare()?,
            f1: f1.prepare()?,
        })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn f0(&self) -> &PreparedDensity<T> {
        &self.f0
    }

    pub fn f1(&self) -> &PreparedDensity<T> {
        &self.f1
    }
}

impl<T: Real> Density<T> for ConvexCombination<T> {
    fn pdf(&self, x: T) -> T {
        (T::one() - self.epsilon) * self.f0.pdf(x) + self.epsilon * self.f1.pdf(x)
    }

    fn ln_pdf(&self, x: T) -> T {
        self.pdf(x).ln()
    }
}

/// Sums `term(i, x_i)`; any non-finite term makes the whole sum infeasible.
fn sum_terms<T: Real>(sample: &Sample<T>, mut term: impl FnMut(T) -> T) -> Objective<T> {
    let mut terms = Vec::with_capacity(sample.len());
    for (index, &x) in sample.values().iter().enumerate() {
        let t = term(x);
        if !t.is_finite() {
            return Objective::Infeasible { index };
        }
        terms.push(t);
    }
    Objective::Value(pairwise_sum(&terms))
}

/// `sum_i Lambda(f(x_i))` for any density, including mixtures.
pub fn rho_lambda<T: Real, D: Density<T>>(sample: &Sample<T>, f: &D, lambda: Lambda<T>) -> Objective<T> {
    sum_terms(sample, |x| {
        let ln_f = f.ln_pdf(x);
        if ln_f.is_finite() {
            lambda.apply_ln(ln_f)
        } else {
            T::nan()
        }
    })
}

/// Log-likelihood `sum_i ln f0(x_i)`.
pub fn rho_log<T: Real, D: Density<T>>(sample: &Sample<T>, f0: &D) -> Objective<T> {
    rho_lambda(sample, f0, Lambda::Log)
}

/// q-log-likelihood `sum_i log_q f0(x_i)`.
pub fn rho_logq<T: Real, D: Density<T>>(sample: &Sample<T>, f0: &D, q: QParam<T>) -> Objective<T> {
    rho_lambda(sample, f0, Lambda::LogQ(q))
}

/// `f0(x)` and `f1(x)`, or `None` when `f0(x)` is not a positive finite number.
#[inline]
fn pair<T: Real, D0: Density<T>, D1: Density<T>>(f0: &D0, f1: &D1, x: T) -> Option<(T, T, T)> {
    let ln0 = f0.ln_pdf(x);
    if !ln0.is_finite() {
        return None;
    }
    Some((ln0, ln0.exp(), f1.pdf(x)))
}

/// LID from `log_q`: `sum_i f0^-q (f1 - f0)`.
pub fn psi_logq<T: Real, D0: Density<T>, D1: Density<T>>(
    sample: &Sample<T>,
    f0: &D0,
    f1: &D1,
    q: QParam<T>,
) -> Objective<T> {
    if q.is_unit() {
        return psi_log(sample, f0, f1);
    }
    let qv = q.get();
    sum_terms(sample, |x| match pair(f0, f1, x) {
        Some((ln0, v0, v1)) => (-qv * ln0).exp() * (v1 - v0),
        None => T::nan(),
    })
}

/// The same LID written as a weighted mixture `sum_i w1 f1 + w0 f0` with
/// `w1 = f0^-q` and `w0 = -f0^-q`.
pub fn psi_logq_weighted<T: Real, D0: Density<T>, D1: Density<T>>(
    sample: &Sample<T>,
    f0: &D0,
    f1: &D1,
    q: QParam<T>,
) -> Objective<T> {
    let qv = q.get();
    sum_terms(sample, |x| match pair(f0, f1, x) {
        Some((ln0, v0, v1)) => {
            let w1 = (-qv * ln0).exp();
            let w0 = -w1;
            w1 * v1 + w0 * v0
        }
        None => T::nan(),
    })
}

/// LID from `ln`: `sum_i (f1 / f0 - 1)`.
pub fn psi_log<T: Real, D0: Density<T>, D1: Density<T>>(
    sample: &Sample<T>,
    f0: &D0,
    f1: &D1,
) -> Objective<T> {
    sum_terms(sample, |x| match pair(f0, f1, x) {
        Some((_, v0, v1)) => v1 / v0 - T::one(),
        None => T::nan(),
    })
}

/// Generic chain-rule form `sum_i Lambda'(f0(x_i)) (f1(x_i) - f0(x_i))`,
/// i.e. `d/d eps rho_Lambda(f_eps)` at `eps = 0`. The combination's own
/// `epsilon` is ignored.
pub fn psi_gateaux<T: Real>(
    sample: &Sample<T>,
    combination: &ConvexCombination<T>,
    lambda: Lambda<T>,
) -> Objective<T> {
    let (f0, f1) = (combination.f0(), combination.f1());
    sum_terms(sample, |x| match pair(f0, f1, x) {
        Some((ln0, v0, v1)) => {
            let slope = match lambda {
                Lambda::Log => v0.recip(),
                Lambda::LogQ(q) => (-q.get() * ln0).exp(),
            };
            slope * (v1 - v0)
        }
        None => T::nan(),
    })
}

/// Huber's loss: `y^2/2` for `|y| <= u`, `u|y| - u^2/2` beyond.
pub fn huber_rho<T: Real>(y: T, u: T) -> T {
    let ay = y.abs();
    if ay <= u {
        T::of(0.5) * y * y
    } else {
        u * ay - T::of(0.5) * u * u
    }
}

/// Huber's score, the derivative of [`huber_rho`]: the identity clipped at `±u`.
pub fn huber_psi<T: Real>(y: T, u: T) -> T {
    if y.abs() <= u {
        y
    } else {
        u * y.signum()
    }
}

/// `ln C(u)` with `C(u) = sqrt(2 pi) (Phi(u) - Phi(-u)) + (2/u) exp(-u^2/2)`,
/// the normalizer of the least-favorable density `exp(-huber_rho(y)) / C(u)`.
pub fn huber_log_normalizer<T: Real>(u: T) -> T {
    let two_pi_sqrt = (T::of(2.0) * T::PI()).sqrt();
    let center = two_pi_sqrt * (std_normal_cdf(u) - std_normal_cdf(-u));
    let tails = T::of(2.0) / u * (-T::of(0.5) * u * u).exp();
    (center + tails).ln()
}

/// Negative log-likelihood of the sample under Huber's least-favorable
/// location-scale density: `sum_i [huber_rho((x_i - mu)/sigma) + ln sigma + ln C(u)]`.
pub fn huber_objective<T: Real>(sample: &Sample<T>, mu: T, sigma: T, u: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return domain("sigma", "positive", sigma.as_f64());
    }
    if !(u > T::zero()) {
        return domain("u", "positive", u.as_f64());
    }
    let offset = sigma.ln() + huber_log_normalizer(u);
    let terms: Vec<T> = sample
        .values()
        .iter()
        .map(|&x| huber_rho((x - mu) / sigma, u) + offset)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Which estimating function a fit maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Mle,
    Mqle,
    LidLog,
    LidLogq,
    Huber,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mle => "mle",
            EstimatorKind::Mqle => "mqle",
            EstimatorKind::LidLog => "lid-log",
            EstimatorKind::LidLogq => "lid-logq",
            EstimatorKind::Huber => "huber",
        }
    }

    pub fn uses_q(self) -> bool {
        matches!(self, EstimatorKind::Mqle | EstimatorKind::LidLogq)
    }

    pub fn uses_f1(self) -> bool {
        matches!(
            self,
            EstimatorKind::LidLog | EstimatorKind::LidLogq | EstimatorKind::Huber
        )
    }
}

impl serde::Serialize for EstimatorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mle" => Ok(EstimatorKind::Mle),
            "mqle" => Ok(EstimatorKind::Mqle),
            "lid-log" => Ok(EstimatorKind::LidLog),
            "lid-logq" => Ok(EstimatorKind::LidLogq),
            "huber" => Ok(EstimatorKind::Huber),
            _ => Err(Error::UnknownName {
                what: "estimator kind",
                name: s.to_string(),
            }),
        }
    }
}

/// A density family with its fixed values and the parameters left free.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBinding<T> {
    template: DistributionSpec<T>,
    free: Vec<Param>,
}

impl<T: Real> FamilyBinding<T> {
    /// Frees the family's default parameters (`a, b` or `mu, sigma`).
    pub fn new(template: DistributionSpec<T>) -> Self {
        let free = template.family().default_free().to_vec();
        Self { template, free }
    }

    pub fn with_free(template: DistributionSpec<T>, free: Vec<Param>) -> Result<Self> {
        if free.is_empty() {
            return Err(Error::InvalidEstimator("no free parameters".into()));
        }
        if let Some(&p) = free.iter().find(|p| !template.family().has_param(**p)) {
            return Err(Error::UnexpectedParameter {
                family: template.family(),
                param: p,
            });
        }
        Ok(Self { template, free })
    }

    pub fn template(&self) -> &DistributionSpec<T> {
        &self.template
    }

    pub fn template_mut(&mut self) -> &mut DistributionSpec<T> {
        &mut self.template
    }

    pub fn family(&self) -> Family {
        self.template.family()
    }

    pub fn free(&self) -> &[Param] {
        &self.free
    }

    /// The template with `theta` written into the free parameters.
    pub fn instantiate(&self, theta: &[T]) -> DistributionSpec<T> {
        let mut spec = self.template;
        for (&p, &v) in self.free.iter().zip(theta) {
            spec.set(p, v).expect("free parameter belongs to family");
        }
        spec
    }

    /// Every fixed (non-free) parameter must be set and valid.
    fn check_fixed(&self) -> Result<()> {
        for &p in self.family().params() {
            if self.free.contains(&p) {
                continue;
            }
            if self.template.get(p).is_none() {
                return Err(Error::MissingParameter {
                    family: self.family(),
                    param: p,
                });
            }
        }
        // probe with a harmless theta so fixed values get range-checked
        let probe: Vec<T> = self
            .free
            .iter()
            .map(|p| if p.is_positive() { T::one() } else { T::zero() })
            .collect();
        self.instantiate(&probe).validate()
    }
}

/// Which estimating function, with its tuning values and family bindings.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec<T> {
    kind: EstimatorKind,
    q: Option<QParam<T>>,
    u: Option<T>,
    f0: FamilyBinding<T>,
    f1: Option<FamilyBinding<T>>,
}

impl<T: Real> EstimatorSpec<T> {
    pub fn mle(f0: FamilyBinding<T>) -> Self {
        Self {
            kind: EstimatorKind::Mle,
            q: None,
            u: None,
            f0,
            f1: None,
        }
    }

    pub fn mqle(f0: FamilyBinding<T>, q: QParam<T>) -> Self {
        Self {
            kind: EstimatorKind::Mqle,
            q: Some(q),
            u: None,
            f0,
            f1: None,
        }
    }

    pub fn lid_log(f0: FamilyBinding<T>, f1: FamilyBinding<T>) -> Result<Self> {
        Self::lid(EstimatorKind::LidLog, f0, f1, None)
    }

    pub fn lid_logq(f0: FamilyBinding<T>, f1: FamilyBinding<T>, q: QParam<T>) -> Result<Self> {
        Self::lid(EstimatorKind::LidLogq, f0, f1, Some(q))
    }

    fn lid(
        kind: EstimatorKind,
        f0: FamilyBinding<T>,
        f1: FamilyBinding<T>,
        q: Option<QParam<T>>,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            q,
            u: None,
            f0,
            f1: Some(f1),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Huber M-estimation of `(mu, sigma)`; `f0` / `f1` are labelled as the
    /// normal and Laplace presets whose scores the Huber score joins.
    pub fn huber(u: T) -> Result<Self> {
        let spec = Self {
            kind: EstimatorKind::Huber,
            q: None,
            u: Some(u),
            f0: FamilyBinding::new(DistributionSpec::new(Family::ExpPower)
                .with(Param::P, T::of(2.0))
                .with(Param::Eta, T::of(2.0))),
            f1: Some(FamilyBinding::new(DistributionSpec::new(Family::ExpPower)
                .with(Param::P, T::one())
                .with(Param::Eta, T::one()))),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds any kind from parts, validating the combination.
    pub fn from_parts(
        kind: EstimatorKind,
        f0: FamilyBinding<T>,
        f1: Option<FamilyBinding<T>>,
        q: Option<T>,
        u: Option<T>,
    ) -> Result<Self> {
        let q = match (kind.uses_q(), q) {
            (true, Some(q)) => Some(QParam::new(q)?),
            (true, None) => return Err(Error::InvalidEstimator(format!("{kind} requires q"))),
            (false, _) => None,
        };
        let spec = match kind {
            EstimatorKind::Huber => {
                let u = u.ok_or_else(|| Error::InvalidEstimator("huber requires u".into()))?;
                let mut s = Self::huber(u)?;
                s.f0 = f0;
                if let Some(f1) = f1 {
                    s.f1 = Some(f1);
                }
                s
            }
            _ => Self {
                kind,
                q,
                u: None,
                f0,
                f1: if kind.uses_f1() { f1 } else { None },
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.uses_q() && self.q.is_none() {
            return Err(Error::InvalidEstimator(format!("{} requires q", self.kind)));
        }
        match self.kind {
            EstimatorKind::Huber => {
                let u = self
                    .u
                    .ok_or_else(|| Error::InvalidEstimator("huber requires u".into()))?;
                if !(u > T::zero() && u.is_finite()) {
                    return domain("u", "positive and finite", u.as_f64());
                }
                if self.f0.free() != [Param::Mu, Param::Sigma] {
                    return Err(Error::InvalidEstimator(
                        "huber estimates exactly mu and sigma".into(),
                    ));
                }
            }
            EstimatorKind::LidLog | EstimatorKind::LidLogq => {
                let f1 = self
                    .f1
                    .as_ref()
                    .ok_or_else(|| Error::InvalidEstimator(format!("{} requires f1", self.kind)))?;
                if f1.free() != self.f0.free() {
                    return Err(Error::InvalidEstimator(format!(
                        "f0 and f1 must share free parameter roles ({:?} vs {:?})",
                        self.f0.free(),
                        f1.free()
                    )));
                }
                self.f0.check_fixed()?;
                f1.check_fixed()?;
            }
            EstimatorKind::Mle | EstimatorKind::Mqle => self.f0.check_fixed()?,
        }
        Ok(())
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn q(&self) -> Option<QParam<T>> {
        self.q
    }

    pub fn u(&self) -> Option<T> {
        self.u
    }

    pub fn f0(&self) -> &FamilyBinding<T> {
        &self.f0
    }

    pub fn f1(&self) -> Option<&FamilyBinding<T>> {
        self.f1.as_ref()
    }

    pub fn free_params(&self) -> &[Param] {
        self.f0.free()
    }

    /// A LID with identical `f0` and `f1` is identically zero.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, EstimatorKind::LidLog | EstimatorKind::LidLogq)
            && self.f1.as_ref() == Some(&self.f0)
    }

    /// Evaluates the estimating function at `theta` (ordered as
    /// [`free_params`](Self::free_params)). Huber returns the log-likelihood
    /// (the negated [`huber_objective`]) so that larger is better for every kind.
    pub fn objective(&self, sample: &Sample<T>, theta: &[T]) -> Objective<T> {
        let min_pos = T::of(MIN_POSITIVE_PARAM);
        for (&p, &v) in self.free_params().iter().zip(theta) {
            if !v.is_finite() || (p.is_positive() && v < min_pos) {
                return Objective::Infeasible { index: 0 };
            }
        }
        if self.kind == EstimatorKind::Huber {
            let (mu, sigma) = (theta[0], theta[1]);
            return match huber_objective(sample, mu, sigma, self.u.unwrap()) {
                Ok(nll) if nll.is_finite() => Objective::Value(-nll),
                _ => Objective::Infeasible { index: 0 },
            };
        }
        let Ok(f0) = self.f0.instantiate(theta).prepare() else {
            return Objective::Infeasible { index: 0 };
        };
        let f1 = match &self.f1 {
            Some(b) if self.kind.uses_f1() => match b.instantiate(theta).prepare() {
                Ok(d) => Some(d),
                Err(_) => return Objective::Infeasible { index: 0 },
            },
            _ => None,
        };
        match self.kind {
            EstimatorKind::Mle => rho_log(sample, &f0),
            EstimatorKind::Mqle => rho_logq(sample, &f0, self.q.unwrap()),
            EstimatorKind::LidLog => psi_log(sample, &f0, f1.as_ref().unwrap()),
            EstimatorKind::LidLogq => psi_logq(sample, &f0, f1.as_ref().unwrap(), self.q.unwrap()),
            EstimatorKind::Huber => unreachable!(),
        }
    }

    /// Short human-readable label, e.g. `psi_log_q=0.007(f0=gamma,f1=weibull)`.
    pub fn label(&self) -> String {
        let q = self.q.map(|q| q.get().as_f64());
        let f0 = binding_label(&self.f0);
        let f1 = self.f1.as_ref().map(binding_label).unwrap_or_default();
        match self.kind {
            EstimatorKind::Mle => format!("rho_log(f0={f0})"),
            EstimatorKind::Mqle => format!("rho_log_q={}(f0={f0})", q.unwrap()),
            EstimatorKind::LidLog => format!("psi_log(f0={f0},f1={f1})"),
            EstimatorKind::LidLogq => format!("psi_log_q={}(f0={f0},f1={f1})", q.unwrap()),
            EstimatorKind::Huber => format!(
                "psi_huber_u={}(f0={f0},f1={f1})",
                self.u.unwrap().as_f64()
            ),
        }
    }
}

fn binding_label<T: Real>(b: &FamilyBinding<T>) -> String {
    let t = b.template();
    let fixed: Vec<String> = t
        .params()
        .into_iter()
        .filter(|(p, _)| !b.free().contains(p))
        .map(|(p, v)| format!("{p}={}", v.as_f64()))
        .collect();
    let name = match (t.family(), t.get(Param::P), t.get(Param::Eta)) {
        (Family::ExpPower, Some(p), Some(e)) if p == T::of(2.0) && e == T::of(2.0) => "normal",
        (Family::ExpPower, Some(p), Some(e)) if p == T::one() && e == T::one() => "laplace",
        _ => "",
    };
    if !name.is_empty() {
        return name.to_string();
    }
    if fixed.is_empty() {
        t.family().name().to_string()
    } else {
        format!("{}[{}]", t.family().name(), fixed.join(","))
    }
}
