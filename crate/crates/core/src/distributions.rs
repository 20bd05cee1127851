//! Density families: Weibull, Gamma and Burr III on `[0, inf)`; exponential
//! power (EP) and generalized t (Gt) on the whole line.
//!
//! | family  | parameters               | density |
//! |---------|--------------------------|---------|
//! | Weibull | a shape, b scale         | `(a/b) (x/b)^(a-1) exp(-(x/b)^a)` |
//! | Gamma   | a shape, b scale         | `x^(a-1) exp(-x/b) / (Γ(a) b^a)` |
//! | Burr III| a, b shapes              | `a b x^-(a+1) (1 + x^-a)^-(b+1)` |
//! | EP      | mu, sigma, p, eta        | `p exp(-(|x-mu| / (eta^(1/p) sigma))^p) / (2 sigma eta^(1/p) Γ(1/p))` |
//! | Gt      | mu, sigma, p, nu         | `p (1 + (|x-mu| / (nu^(1/p) sigma))^p)^-(nu+1/p) / (2 B(1/p,nu) nu^(1/p) sigma)` |
//!
//! `eta` defaults to 1. `EP(p=2, eta=2)` is the normal density and
//! `EP(p=1, eta=1)` the Laplace density; [`DistributionSpec::normal`] and
//! [`DistributionSpec::laplace`] build those presets.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01};

use crate::error::{domain, Error, Result};
use crate::sample::{Sample, SampleSupport};
use crate::scalar::Real;
use crate::special::{ln_beta, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Weibull,
    Gamma,
    BurrIII,
    ExpPower,
    GeneralizedT,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Weibull,
        Family::Gamma,
        Family::BurrIII,
        Family::ExpPower,
        Family::GeneralizedT,
    ];

    /// Config/CLI name.
    pub fn name(self) -> &'static str {
        match self {
            Family::Weibull => "weibull",
            Family::Gamma => "gamma",
            Family::BurrIII => "burr3",
            Family::ExpPower => "ep",
            Family::GeneralizedT => "gt",
        }
    }

    pub fn support(self) -> SampleSupport {
        match self {
            Family::Weibull | Family::Gamma | Family::BurrIII => SampleSupport::HalfLine,
            Family::ExpPower | Family::GeneralizedT => SampleSupport::FullLine,
        }
    }

    pub fn params(self) -> &'static [Param] {
        match self {
            Family::Weibull | Family::Gamma | Family::BurrIII => &[Param::A, Param::B],
            Family::ExpPower => &[Param::Mu, Param::Sigma, Param::P, Param::Eta],
            Family::GeneralizedT => &[Param::Mu, Param::Sigma, Param::P, Param::Nu],
        }
    }

    /// Parameters estimated by default; the rest are tuning values.
    pub fn default_free(self) -> &'static [Param] {
        match self.support() {
            SampleSupport::HalfLine => &[Param::A, Param::B],
            SampleSupport::FullLine => &[Param::Mu, Param::Sigma],
        }
    }

    pub fn has_param(self, p: Param) -> bool {
        self.params().contains(&p)
    }
}

impl serde::Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weibull" => Ok(Family::Weibull),
            "gamma" => Ok(Family::Gamma),
            "burr3" | "burr" | "burriii" => Ok(Family::BurrIII),
            "ep" | "exppower" => Ok(Family::ExpPower),
            "gt" | "generalizedt" => Ok(Family::GeneralizedT),
            _ => Err(Error::UnknownName {
                what: "family",
                name: s.to_string(),
            }),
        }
    }
}

/// Named density parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    A,
    B,
    Mu,
    Sigma,
    P,
    Eta,
    Nu,
}

impl Param {
    pub const ALL: [Param; 7] = [
        Param::A,
        Param::B,
        Param::Mu,
        Param::Sigma,
        Param::P,
        Param::Eta,
        Param::Nu,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Param::A => "a",
            Param::B => "b",
            Param::Mu => "mu",
            Param::Sigma => "sigma",
            Param::P => "p",
            Param::Eta => "eta",
            Param::Nu => "nu",
        }
    }

    /// Every parameter except the location must be strictly positive.
    pub fn is_positive(self) -> bool {
        self != Param::Mu
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Param::ALL
            .into_iter()
            .find(|p| p.key() == key)
            .ok_or(Error::UnknownName {
                what: "parameter",
                name: s.to_string(),
            })
    }
}

/// Family tag plus parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec<T> {
    family: Family,
    values: [Option<T>; 7],
}

impl<T: Real> DistributionSpec<T> {
    /// A spec with no parameter values set (`eta` defaults to 1 for EP).
    pub fn new(family: Family) -> Self {
        let mut spec = Self {
            family,
            values: [None; 7],
        };
        if family == Family::ExpPower {
            spec.values[Param::Eta.index()] = Some(T::one());
        }
        spec
    }

    pub fn weibull(a: T, b: T) -> Self {
        Self::new(Family::Weibull).with(Param::A, a).with(Param::B, b)
    }

    pub fn gamma(a: T, b: T) -> Self {
        Self::new(Family::Gamma).with(Param::A, a).with(Param::B, b)
    }

    pub fn burr3(a: T, b: T) -> Self {
        Self::new(Family::BurrIII).with(Param::A, a).with(Param::B, b)
    }

    pub fn exp_power(mu: T, sigma: T, p: T, eta: T) -> Self {
        Self::new(Family::ExpPower)
            .with(Param::Mu, mu)
            .with(Param::Sigma, sigma)
            .with(Param::P, p)
            .with(Param::Eta, eta)
    }

    pub fn generalized_t(mu: T, sigma: T, p: T, nu: T) -> Self {
        Self::new(Family::GeneralizedT)
            .with(Param::Mu, mu)
            .with(Param::Sigma, sigma)
            .with(Param::P, p)
            .with(Param::Nu, nu)
    }

    /// `EP(p=2, eta=2)`, i.e. `Normal(mu, sigma^2)`.
    pub fn normal(mu: T, sigma: T) -> Self {
        Self::exp_power(mu, sigma, T::of(2.0), T::of(2.0))
    }

    /// `EP(p=1, eta=1)`, i.e. `Laplace(mu, sigma)`.
    pub fn laplace(mu: T, sigma: T) -> Self {
        Self::exp_power(mu, sigma, T::one(), T::one())
    }

    /// Builds a spec from a family or preset name (`normal`, `laplace`) and
    /// `(key, value)` pairs. Missing values may be filled in later.
    pub fn from_name(name: &str, params: &[(Param, T)]) -> Result<Self> {
        let mut spec = match name.trim().to_ascii_lowercase().as_str() {
            "normal" => Self::new(Family::ExpPower)
                .with(Param::P, T::of(2.0))
                .with(Param::Eta, T::of(2.0)),
            "laplace" => Self::new(Family::ExpPower)
                .with(Param::P, T::one())
                .with(Param::Eta, T::one()),
            other => Self::new(other.parse()?),
        };
        for &(p, v) in params {
            spec.set(p, v)?;
        }
        Ok(spec)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn support(&self) -> SampleSupport {
        self.family.support()
    }

    pub fn get(&self, p: Param) -> Option<T> {
        self.values[p.index()]
    }

    /// Sets a parameter the family uses.
    pub fn set(&mut self, p: Param, value: T) -> Result<()> {
        if !self.family.has_param(p) {
            return Err(Error::UnexpectedParameter {
                family: self.family,
                param: p,
            });
        }
        self.values[p.index()] = Some(value);
        Ok(())
    }

    /// Builder form of [`set`](Self::set); panics on a parameter the family
    /// does not have.
    pub fn with(mut self, p: Param, value: T) -> Self {
        self.set(p, value).expect("parameter belongs to family");
        self
    }

    /// `(param, value)` in the family's parameter order, skipping unset ones.
    pub fn params(&self) -> Vec<(Param, T)> {
        self.family
            .params()
            .iter()
            .filter_map(|&p| self.get(p).map(|v| (p, v)))
            .collect()
    }

    fn require(&self, p: Param) -> Result<T> {
        let v = self.get(p).ok_or(Error::MissingParameter {
            family: self.family,
            param: p,
        })?;
        let ok = if p.is_positive() {
            v > T::zero() && v.is_finite()
        } else {
            v.is_finite()
        };
        if ok {
            Ok(v)
        } else if p.is_positive() {
            domain(p.key(), "positive and finite", v.as_f64())
        } else {
            domain(p.key(), "finite", v.as_f64())
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }

    /// Validates the parameters and caches the normalizing constants.
    pub fn prepare(&self) -> Result<PreparedDensity<T>> {
        let kernel = match self.family {
            Family::Weibull => {
                let (a, b) = (self.require(Param::A)?, self.require(Param::B)?);
                Kernel::Weibull {
                    a,
                    ln_b: b.ln(),
                    inv_b: b.recip(),
                    ln_norm: a.ln() - b.ln(),
                }
            }
            Family::Gamma => {
                let (a, b) = (self.require(Param::A)?, self.require(Param::B)?);
                Kernel::Gamma {
                    a,
                    inv_b: b.recip(),
                    ln_norm: -ln_gamma(a) - a * b.ln(),
                }
            }
            Family::BurrIII => {
                let (a, b) = (self.require(Param::A)?, self.require(Param::B)?);
                Kernel::BurrIII {
                    a,
                    b,
                    ln_norm: a.ln() + b.ln(),
                }
            }
            Family::ExpPower => {
                let mu = self.require(Param::Mu)?;
                let sigma = self.require(Param::Sigma)?;
                let p = self.require(Param::P)?;
                let eta = self.require(Param::Eta)?;
                let ln_eta_p = eta.ln() / p;
                Kernel::ExpPower {
                    mu,
                    p,
                    inv_scale: (-(ln_eta_p + sigma.ln())).exp(),
                    ln_norm: p.ln() - T::LN_2() - sigma.ln() - ln_eta_p - ln_gamma(p.recip()),
                }
            }
            Family::GeneralizedT => {
                let mu = self.require(Param::Mu)?;
                let sigma = self.require(Param::Sigma)?;
                let p = self.require(Param::P)?;
                let nu = self.require(Param::Nu)?;
                let ln_nu_p = nu.ln() / p;
                Kernel::GeneralizedT {
                    mu,
                    p,
                    inv_scale: (-(ln_nu_p + sigma.ln())).exp(),
                    tail: nu + p.recip(),
                    ln_norm: p.ln()
                        - T::LN_2()
                        - ln_beta(p.recip(), nu)
                        - ln_nu_p
                        - sigma.ln(),
                }
            }
        };
        Ok(PreparedDensity { spec: *self, kernel })
    }

    pub fn pdf(&self, x: T) -> Result<T> {
        Ok(self.prepare()?.pdf(x))
    }

    pub fn ln_pdf(&self, x: T) -> Result<T> {
        Ok(self.prepare()?.ln_pdf(x))
    }

    /// Closed-form quantile, available for Weibull and Burr III.
    pub fn quantile(&self, u: T) -> Result<T> {
        if !(u >= T::zero() && u < T::one()) {
            return domain("probability", "in [0, 1)", u.as_f64());
        }
        self.validate()?;
        match self.family {
            Family::Weibull => {
                let (a, b) = (self.require(Param::A)?, self.require(Param::B)?);
                Ok(b * (-(-u).ln_1p()).powf(a.recip()))
            }
            Family::BurrIII => {
                let (a, b) = (self.require(Param::A)?, self.require(Param::B)?);
                // F(x) = (1 + x^-a)^-b
                Ok((u.powf(-b.recip()) - T::one()).powf(-a.recip()))
            }
            other => Err(Error::UnsupportedFamily(other)),
        }
    }

    /// Draws `n` independent observations using the caller's generator.
    ///
    /// Weibull and Burr III use the inverse CDF; Gamma uses the
    /// Marsaglia–Tsang sampler at unit scale, multiplied by `b`; EP draws
    /// `|x - mu|` through a `Gamma(1/p)` variate. Generalized t has no sampler.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample<T>> {
        let mut values = Vec::with_capacity(n);
        self.fill_sample(n, rng, &mut values)?;
        Sample::new(values, self.support())
    }

    /// [`sample_with`](Self::sample_with) on a fresh ChaCha8 stream.
    pub fn sample_seeded(&self, n: usize, seed: u64) -> Result<Sample<T>> {
        self.sample_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub(crate) fn fill_sample<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        out: &mut Vec<T>,
    ) -> Result<()> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        self.validate()?;
        let f = |p: Param| self.get(p).unwrap().as_f64();
        out.clear();
        match self.family {
            Family::Weibull => {
                let (a, b) = (f(Param::A), f(Param::B));
                out.extend((0..n).map(|_| {
                    let u: f64 = rng.random();
                    T::of(b * (-(-u).ln_1p()).powf(a.recip()))
                }));
            }
            Family::Gamma => {
                let g = rand_distr::Gamma::new(f(Param::A), 1.0)
                    .map_err(|_| Error::UnsupportedFamily(self.family))?;
                let b = f(Param::B);
                out.extend((0..n).map(|_| T::of(b * g.sample(rng))));
            }
            Family::BurrIII => {
                let (a, b) = (f(Param::A), f(Param::B));
                out.extend((0..n).map(|_| {
                    let u: f64 = Open01.sample(rng);
                    T::of((u.powf(-b.recip()) - 1.0).powf(-a.recip()))
                }));
            }
            Family::ExpPower => {
                let (mu, sigma, p, eta) = (f(Param::Mu), f(Param::Sigma), f(Param::P), f(Param::Eta));
                let g = rand_distr::Gamma::new(p.recip(), 1.0)
                    .map_err(|_| Error::UnsupportedFamily(self.family))?;
                let scale = eta.powf(p.recip()) * sigma;
                out.extend((0..n).map(|_| {
                    let r = scale * g.sample(rng).powf(p.recip());
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    T::of(mu + sign * r)
                }));
            }
            Family::GeneralizedT => return Err(Error::UnsupportedFamily(self.family)),
        }
        Ok(())
    }

    /// Numerically integrates the density over its support with
    /// double-exponential quadrature. Used as a normalization self-check.
    pub fn quadrature_mass(&self) -> Result<QuadratureMass> {
        const PIECE_TOL: f64 = 1e-12;
        const ACCEPT: f64 = 1e-7;

        let prepared = self.prepare()?;
        let pdf = |x: f64| {
            let v = prepared.pdf(T::of(x)).as_f64();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let g = |p: Param| self.get(p).unwrap().as_f64();

        let mut total = QuadratureMass::default();
        match self.support() {
            SampleSupport::HalfLine => {
                let split = match self.family {
                    Family::Weibull => g(Param::B),
                    Family::Gamma => g(Param::A) * g(Param::B),
                    // median
                    _ => (2f64.powf(1.0 / g(Param::B)) - 1.0).powf(-1.0 / g(Param::A)),
                };
                total.add_half_line(&pdf, 0.0, 1.0, split, PIECE_TOL);
            }
            SampleSupport::FullLine => {
                let (mu, sigma) = (g(Param::Mu), g(Param::Sigma));
                total.add_half_line(&pdf, mu, 1.0, sigma, PIECE_TOL);
                total.add_half_line(&pdf, mu, -1.0, sigma, PIECE_TOL);
            }
        }
        if total.error_bound > ACCEPT || !total.mass.is_finite() {
            return Err(Error::Quadrature {
                estimate: total.mass,
                error_bound: total.error_bound,
            });
        }
        Ok(total)
    }
}

/// Result of [`DistributionSpec::quadrature_mass`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuadratureMass {
    pub mass: f64,
    pub error_bound: f64,
    pub evaluations: u32,
}

impl QuadratureMass {
    /// Adds the integral over `origin + dir * [0, inf)`, split at `split`
    /// with `x = split / t` on the outer piece.
    fn add_half_line<F: Fn(f64) -> f64>(
        &mut self,
        pdf: &F,
        origin: f64,
        dir: f64,
        split: f64,
        tol: f64,
    ) {
        let inner = quadrature::integrate(|r| pdf(origin + dir * r), 0.0, split, tol);
        let outer = quadrature::integrate(
            |t| {
                if t <= 0.0 {
                    return 0.0;
                }
                let v = pdf(origin + dir * split / t) * split / (t * t);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            tol,
        );
        for out in [inner, outer] {
            self.mass += out.integral;
            self.error_bound += out.error_estimate;
            self.evaluations += out.num_function_evaluations;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel<T> {
    Weibull { a: T, ln_b: T, inv_b: T, ln_norm: T },
    Gamma { a: T, inv_b: T, ln_norm: T },
    BurrIII { a: T, b: T, ln_norm: T },
    ExpPower { mu: T, p: T, inv_scale: T, ln_norm: T },
    GeneralizedT { mu: T, p: T, inv_scale: T, tail: T, ln_norm: T },
}

/// Density evaluation interface shared by single families and mixtures.
pub trait Density<T: Real> {
    fn ln_pdf(&self, x: T) -> T;

    fn pdf(&self, x: T) -> T {
        self.ln_pdf(x).exp()
    }
}

/// A validated [`DistributionSpec`] with its normalizing constant cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedDensity<T> {
    spec: DistributionSpec<T>,
    kernel: Kernel<T>,
}

impl<T: Real> PreparedDensity<T> {
    pub fn spec(&self) -> &DistributionSpec<T> {
        &self.spec
    }
}

/// `ln` of the value at `x = 0` for `x^(a-1)` kernels.
fn ln_at_origin<T: Real>(a: T, value_at_a_one: T) -> T {
    if a < T::one() {
        T::infinity()
    } else if a == T::one() {
        value_at_a_one
    } else {
        T::neg_infinity()
    }
}

impl<T: Real> Density<T> for PreparedDensity<T> {
    fn ln_pdf(&self, x: T) -> T {
        match self.kernel {
            Kernel::Weibull {
                a,
                ln_b,
                inv_b,
                ln_norm,
            } => {
                if x < T::zero() {
                    T::neg_infinity()
                } else if x == T::zero() {
                    ln_at_origin(a, ln_norm)
                } else {
                    ln_norm + (a - T::one()) * (x.ln() - ln_b) - (x * inv_b).powf(a)
                }
            }
            Kernel::Gamma { a, inv_b, ln_norm } => {
                if x < T::zero() {
                    T::neg_infinity()
                } else if x == T::zero() {
                    ln_at_origin(a, ln_norm)
                } else {
                    ln_norm + (a - T::one()) * x.ln() - x * inv_b
                }
            }
            Kernel::BurrIII { a, b, ln_norm } => {
                if x <= T::zero() {
                    // removable boundary: the density tends to 0 at the origin
                    return T::neg_infinity();
                }
                let ln_x = x.ln();
                let s = -a * ln_x; // ln(x^-a)
                // ln(1 + x^-a) without overflow for tiny x
                let ln1p = if s > T::zero() {
                    s + (-s).exp().ln_1p()
                } else {
                    s.exp().ln_1p()
                };
                ln_norm - (a + T::one()) * ln_x - (b + T::one()) * ln1p
            }
            Kernel::ExpPower {
                mu,
                p,
                inv_scale,
                ln_norm,
            } => ln_norm - ((x - mu).abs() * inv_scale).powf(p),
            Kernel::GeneralizedT {
                mu,
                p,
                inv_scale,
                tail,
                ln_norm,
            } => ln_norm - tail * ((x - mu).abs() * inv_scale).powf(p).ln_1p(),
        }
    }
}

impl<T: Real> Density<T> for DistributionSpec<T> {
    /// Validates on every call; prefer [`DistributionSpec::prepare`] in loops.
    /// Invalid parameters give `NaN`.
    fn ln_pdf(&self, x: T) -> T {
        self.prepare().map(|d| d.ln_pdf(x)).unwrap_or(T::nan())
    }
}
