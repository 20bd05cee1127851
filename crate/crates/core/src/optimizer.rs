//! Box-constrained global maximization: a real-coded genetic algorithm
//! followed by a bounded Nelder–Mead polish of each restart's incumbent.
//!
//! Infeasible points are signalled by the objective returning `-inf` (or
//! `NaN`, treated the same). Every candidate is clipped into the box, never
//! penalized, so returned points satisfy the bounds exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::Param;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-parameter search box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> Bounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "{} lower vs {} upper limits",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidBounds(format!(
                    "component {i}: need finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Default box: `[-50, 50]` for locations, `[0, 50]` for everything else.
    pub fn for_params(params: &[Param]) -> Self {
        let lower = params
            .iter()
            .map(|p| if *p == Param::Mu { T::of(-50.0) } else { T::zero() })
            .collect();
        let upper = vec![T::of(50.0); params.len()];
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> T {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    pub fn clip(&self, x: &mut [T]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.max(self.lower[i]).min(self.upper[i]);
        }
    }

    /// Indices of components within `1e-6` box widths of a bound.
    pub fn active(&self, x: &[T]) -> Vec<usize> {
        let tol = T::of(1e-6);
        (0..self.dim())
            .filter(|&i| {
                let w = self.width(i);
                x[i] - self.lower[i] <= tol * w || self.upper[i] - x[i] <= tol * w
            })
            .collect()
    }
}

/// Hybrid GA settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptConfig {
    pub population: usize,
    pub generations: usize,
    pub elite_fraction: f64,
    pub crossover_fraction: f64,
    /// Initial Gaussian mutation standard deviation as a fraction of the box
    /// width; decays linearly to zero over the generations.
    pub mutation_scale: f64,
    /// Nelder–Mead stops once the simplex diameter drops below this.
    pub polish_tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            population: 60,
            generations: 200,
            elite_fraction: 0.05,
            crossover_fraction: 0.8,
            mutation_scale: 0.1,
            polish_tolerance: 1e-8,
            restarts: 3,
            seed: 0,
        }
    }
}

impl OptConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.population < 10 {
            return bad("population must be at least 10");
        }
        if self.generations == 0 || self.restarts == 0 {
            return bad("generations and restarts must be positive");
        }
        if !(0.0..1.0).contains(&self.elite_fraction) {
            return bad("elite fraction must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.crossover_fraction) {
            return bad("crossover fraction must be in [0, 1]");
        }
        if !(self.mutation_scale > 0.0 && self.mutation_scale.is_finite()) {
            return bad("mutation scale must be positive");
        }
        if !(self.polish_tolerance > 0.0 && self.polish_tolerance.is_finite()) {
            return bad("polish tolerance must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics<T> {
    pub evaluations: usize,
    /// Best objective value after each generation, one trace per restart.
    #[serde(skip)]
    pub best_per_generation: Vec<Vec<T>>,
    /// Polished value reached by each restart.
    pub restart_values: Vec<T>,
    /// Restart whose polished point was returned.
    pub winning_restart: usize,
    pub polish_iterations: usize,
    pub polish_converged: bool,
    /// Components sitting on a box bound (e.g. a scale driven to its limit).
    pub boundary_params: Vec<usize>,
}

impl<T> Diagnostics<T> {
    pub fn at_boundary(&self) -> bool {
        !self.boundary_params.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum<T> {
    pub theta: Vec<T>,
    pub value: T,
    pub diagnostics: Diagnostics<T>,
}

#[inline]
fn fitness<T: Real>(v: T) -> T {
    if v.is_nan() {
        T::neg_infinity()
    } else {
        v
    }
}

struct Counter<'a, T, F> {
    objective: &'a F,
    evaluations: std::sync::atomic::AtomicUsize,
    _t: std::marker::PhantomData<T>,
}

impl<'a, T: Real, F: Fn(&[T]) -> T + Sync> Counter<'a, T, F> {
    fn eval(&self, x: &[T]) -> T {
        self.evaluations
            .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        fitness((self.objective)(x))
    }
}

/// Maximizes `objective` over `bounds`.
///
/// Each of `config.restarts` runs uses its own ChaCha8 stream of
/// `config.seed`, so results are bit-identical for a fixed seed regardless of
/// how many threads evaluate the population.
pub fn hga_maximize<T, F>(objective: F, bounds: &Bounds<T>, config: &OptConfig) -> Result<Optimum<T>>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    config.validate()?;
    let counter = Counter {
        objective: &objective,
        evaluations: 0.into(),
        _t: std::marker::PhantomData,
    };

    let mut traces = Vec::with_capacity(config.restarts);
    let mut finals: Vec<(Vec<T>, T)> = Vec::with_capacity(config.restarts);
    let mut polish_iterations = 0;
    let mut polish_converged = true;
    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64);
        let (incumbent, value, trace) = genetic_search(&counter, bounds, config, &mut rng);
        traces.push(trace);
        if value == T::neg_infinity() {
            finals.push((incumbent, value));
            continue;
        }
        let polished = nelder_mead(&counter, bounds, incumbent, value, config.polish_tolerance);
        polish_iterations += polished.iterations;
        polish_converged &= polished.converged;
        finals.push((polished.x, polished.value));
    }

    // first restart wins ties
    let (winner, _) = finals
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, (_, v))| {
            if *v > bv {
                (i, *v)
            } else {
                (bi, bv)
            }
        });
    let (theta, value) = finals[winner].clone();
    if value == T::neg_infinity() {
        return Err(Error::AllInfeasible {
            best_point: theta.iter().map(|v| v.as_f64()).collect(),
        });
    }
    let value = counter.eval(&theta);
    let diagnostics = Diagnostics {
        evaluations: counter
            .evaluations
            .load(std::sync::atomic::Ordering::Relaxed),
        best_per_generation: traces,
        restart_values: finals.iter().map(|(_, v)| *v).collect(),
        winning_restart: winner,
        polish_iterations,
        polish_converged,
        boundary_params: bounds.active(&theta),
    };
    Ok(Optimum {
        theta,
        value,
        diagnostics,
    })
}

fn uniform_in<T: Real, R: Rng>(bounds: &Bounds<T>, rng: &mut R) -> Vec<T> {
    (0..bounds.dim())
        .map(|i| bounds.lower[i] + bounds.width(i) * T::of(rng.random::<f64>()))
        .collect()
}

/// Binary tournament on a population sorted best-first.
fn tournament<R: Rng>(len: usize, rng: &mut R) -> usize {
    let a = rng.random_range(0..len);
    let b = rng.random_range(0..len);
    a.min(b)
}

fn genetic_search<T, F>(
    counter: &Counter<'_, T, F>,
    bounds: &Bounds<T>,
    config: &OptConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<T>, T, Vec<T>)
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let size = config.population;
    let n_elite = ((config.elite_fraction * size as f64).ceil() as usize).clamp(1, size - 1);
    let n_cross = (config.crossover_fraction * (size - n_elite) as f64).round() as usize;

    let mut population: Vec<Vec<T>> = (0..size).map(|_| uniform_in(bounds, rng)).collect();
    let mut scores: Vec<T> = population.par_iter().map(|x| counter.eval(x)).collect();
    let mut trace = Vec::with_capacity(config.generations);

    for generation in 0..config.generations {
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());
        let ranked: Vec<Vec<T>> = order.iter().map(|&i| population[i].clone()).collect();
        let ranked_scores: Vec<T> = order.iter().map(|&i| scores[i]).collect();
        trace.push(ranked_scores[0]);

        let decay = 1.0 - generation as f64 / config.generations as f64;
        let sd = config.mutation_scale * decay;

        let mut next: Vec<Vec<T>> = ranked[..n_elite].to_vec();
        for _ in 0..n_cross {
            let p1 = &ranked[tournament(size, rng)];
            let p2 = &ranked[tournament(size, rng)];
            let mut child: Vec<T> = p1
                .iter()
                .zip(p2)
                .map(|(&a, &b)| {
                    // intermediate recombination on an extended segment
                    let r = T::of(rng.random_range(-0.25..1.25));
                    a + r * (b - a)
                })
                .collect();
            bounds.clip(&mut child);
            next.push(child);
        }
        while next.len() < size {
            let parent = &ranked[tournament(size, rng)];
            let mut child: Vec<T> = parent
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let z: f64 = rng.sample(StandardNormal);
                    v + T::of(z * sd) * bounds.width(i)
                })
                .collect();
            bounds.clip(&mut child);
            next.push(child);
        }

        let fresh: Vec<T> = next[n_elite..].par_iter().map(|x| counter.eval(x)).collect();
        scores = ranked_scores[..n_elite].to_vec();
        scores.extend(fresh);
        population = next;
    }

    let best = (0..size).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
    trace.push(scores[best]);
    (population[best].clone(), scores[best], trace)
}

struct Polished<T> {
    x: Vec<T>,
    value: T,
    iterations: usize,
    converged: bool,
}

/// Bounded Nelder–Mead on `-objective`, started from a feasible point.
/// Never returns a point worse than `start`.
fn nelder_mead<T, F>(
    counter: &Counter<'_, T, F>,
    bounds: &Bounds<T>,
    start: Vec<T>,
    start_value: T,
    tolerance: f64,
) -> Polished<T>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let mut x = start;
    let mut value = start_value;
    let mut iterations = 0;
    let mut converged = false;
    // a second pass from a fresh simplex guards against premature collapse
    for _ in 0..2 {
        let run = nelder_mead_pass(counter, bounds, &x, value, tolerance);
        iterations += run.iterations;
        converged = run.converged;
        if run.value > value {
            x = run.x;
            value = run.value;
        }
    }
    Polished {
        x,
        value,
        iterations,
        converged,
    }
}

fn nelder_mead_pass<T, F>(
    counter: &Counter<'_, T, F>,
    bounds: &Bounds<T>,
    start: &[T],
    start_value: T,
    tolerance: f64,
) -> Polished<T>
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let n = bounds.dim();
    let max_iter = 2000 * n;
    let tol = T::of(tolerance);
    let (alpha, gamma, rho, shrink) = (T::one(), T::of(2.0), T::of(0.5), T::of(0.5));

    // minimize cost = -objective
    let mut simplex: Vec<(Vec<T>, T)> = vec![(start.to_vec(), -start_value)];
    for i in 0..n {
        let mut v = start.to_vec();
        let step = T::of(0.05) * bounds.width(i);
        v[i] = if v[i] + step <= bounds.upper[i] {
            v[i] + step
        } else {
            v[i] - step
        };
        let c = -counter.eval(&v);
        simplex.push((v, c));
    }

    let point = |base: &[T], dir: &[T], t: T| -> Vec<T> {
        let mut p: Vec<T> = base.iter().zip(dir).map(|(&b, &d)| b + t * (d - b)).collect();
        bounds.clip(&mut p);
        p
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].0.clone();
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&best).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        if diameter < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![T::zero(); n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c = *c + *x;
            }
        }
        for c in &mut centroid {
            *c = *c / T::of_usize(n);
        }
        let worst = simplex[n].clone();

        // reflection: centroid + alpha (centroid - worst)
        let reflected = point(&centroid, &worst.0, -alpha);
        let fr = -counter.eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = point(&centroid, &worst.0, -gamma);
            let fe = -counter.eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = point(&centroid, &reflected, rho);
            let f = -counter.eval(&c);
            (c, f)
        } else {
            let c = point(&centroid, &worst.0, rho);
            let f = -counter.eval(&c);
            (c, f)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let v = point(&best, &entry.0, shrink);
            let c = -counter.eval(&v);
            *entry = (v, c);
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (x, cost) = simplex.swap_remove(0);
    Polished {
        x,
        value: -cost,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> OptConfig {
        OptConfig {
            generations: 60,
            ..OptConfig::with_seed(11)
        }
    }

    #[test]
    fn one_dimensional_quadratic() {
        let b = Bounds::new(vec![0.0], vec![50.0]).unwrap();
        let r = hga_maximize(|x: &[f64]| -(x[0] - 3.0).powi(2), &b, &quick()).unwrap();
        assert!((r.theta[0] - 3.0).abs() < 1e-4);
        assert!(r.diagnostics.boundary_params.is_empty());
    }

    #[test]
    fn two_dimensional_quadratic() {
        let b = Bounds::<f64>::for_params(&[Param::A, Param::B]);
        let f = |x: &[f64]| -(x[0] - 2.0).powi(2) - (x[1] - 5.0).powi(2);
        let r = hga_maximize(f, &b, &quick()).unwrap();
        assert!((r.theta[0] - 2.0).abs() < 1e-4 && (r.theta[1] - 5.0).abs() < 1e-4);
        assert_eq!(r.value, f(&r.theta));
    }

    #[test]
    fn boundary_optimum_is_flagged() {
        let b = Bounds::new(vec![-50.0, 0.0], vec![50.0, 50.0]).unwrap();
        let r = hga_maximize(|x: &[f64]| x[1] - x[0].powi(2), &b, &quick()).unwrap();
        assert_eq!(r.theta[1], 50.0);
        assert_eq!(r.diagnostics.boundary_params, vec![1]);
    }

    #[test]
    fn incumbent_never_decreases() {
        let b = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        // Rastrigin-like multimodal surface
        let f = |x: &[f64]| {
            -x.iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos() + 10.0)
                .sum::<f64>()
        };
        let r = hga_maximize(f, &b, &quick()).unwrap();
        for trace in &r.diagnostics.best_per_generation {
            assert!(trace.windows(2).all(|w| w[1] >= w[0]));
            assert!(r.value >= *trace.last().unwrap());
        }
        assert!(r.value > -1e-6, "found {:?} at {}", r.theta, r.value);
    }

    #[test]
    fn reproducible_and_shift_invariant() {
        let b = Bounds::new(vec![0.0, 0.0], vec![50.0, 50.0]).unwrap();
        let f = |x: &[f64]| -(x[0] - 7.3).abs().powf(1.5) - (x[1] * x[0] - 20.0).powi(2) * 0.01;
        let a = hga_maximize(f, &b, &quick()).unwrap();
        let again = hga_maximize(f, &b, &quick()).unwrap();
        assert_eq!(a.theta, again.theta);
        assert_eq!(a.value.to_bits(), again.value.to_bits());
        // the shift rounds objective values differently, so only the
        // polished point is compared
        let shifted = hga_maximize(|x: &[f64]| f(x) + 3.0, &b, &quick()).unwrap();
        for (x, y) in a.theta.iter().zip(&shifted.theta) {
            assert!((x - y).abs() < 1e-6, "{:?} vs {:?}", a.theta, shifted.theta);
        }
    }

    #[test]
    fn infeasible_regions_are_avoided() {
        let b = Bounds::new(vec![0.0], vec![10.0]).unwrap();
        let f = |x: &[f64]| if x[0] < 4.0 { f64::NEG_INFINITY } else { -(x[0] - 4.5).powi(2) };
        let r = hga_maximize(f, &b, &quick()).unwrap();
        assert!((r.theta[0] - 4.5).abs() < 1e-4);
        let nan = |_: &[f64]| f64::NAN;
        assert!(matches!(hga_maximize(nan, &b, &quick()), Err(Error::AllInfeasible { .. })));
    }

    #[test]
    fn config_and_bounds_validation() {
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
        let bad = OptConfig {
            population: 5,
            ..OptConfig::default()
        };
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        assert!(hga_maximize(|x: &[f64]| x[0], &b, &bad).is_err());
        let d = Bounds::<f64>::for_params(&[Param::Mu, Param::Sigma]);
        assert_eq!(d.lower(), &[-50.0, 0.0]);
        assert_eq!(d.upper(), &[50.0, 50.0]);
    }

    #[test]
    fn single_precision_objective() {
        let b = Bounds::new(vec![0.0f32], vec![50.0]).unwrap();
        let r = hga_maximize(|x: &[f32]| -(x[0] - 3.0).powi(2), &b, &quick()).unwrap();
        assert!((r.theta[0] - 3.0).abs() < 1e-3);
    }
}
