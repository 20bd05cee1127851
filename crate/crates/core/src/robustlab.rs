//! Contamination experiments: outlier injection, order-statistic mean
//! samples and edge-inclusive bin counting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::sample::{Sample, SampleSupport};
use crate::scalar::Real;

/// Replications simulated per RNG stream.
pub const REPLICATION_BLOCK: usize = 256;

/// Appends `2 max(x)` to half-line data, or `+v` and `-v` with
/// `v = 2 max|x|` to full-line data. Appended values are flagged as injected.
pub fn inject_outliers<T: Real>(sample: &Sample<T>) -> Sample<T> {
    let mut out = sample.clone();
    match sample.support() {
        SampleSupport::HalfLine => out.push_injected(T::of(2.0) * sample.max()),
        SampleSupport::FullLine => {
            let v = T::of(2.0) * sample.max_abs();
            out.push_injected(v);
            out.push_injected(-v);
        }
    }
    out
}

/// Per-rank mean of `replications` sorted samples of size `n` from `f0`.
///
/// Replications are cut into fixed blocks of [`REPLICATION_BLOCK`]; block `j`
/// draws from ChaCha8 stream `j` of `seed`. Blocks run on a pool of `workers`
/// threads (`0` uses the global pool) and their rank sums are merged in block
/// order, so the result does not depend on the worker count.
pub fn artificial_mean_sample<T: Real>(
    f0: &DistributionSpec<T>,
    n: usize,
    replications: usize,
    seed: u64,
    workers: usize,
) -> Result<Sample<T>> {
    if n == 0 || replications == 0 {
        return Err(Error::EmptySample);
    }
    f0.validate()?;
    let blocks = replications.div_ceil(REPLICATION_BLOCK);
    let run_block = |block: usize| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block as u64);
        let start = block * REPLICATION_BLOCK;
        let reps = REPLICATION_BLOCK.min(replications - start);
        let mut sums = vec![0.0f64; n];
        let mut buf = Vec::with_capacity(n);
        for _ in 0..reps {
            f0.fill_sample(n, &mut rng, &mut buf)?;
            buf.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
            for (s, v) in sums.iter_mut().zip(&buf) {
                *s += v.as_f64();
            }
        }
        Ok(sums)
    };
    let partials: Vec<Result<Vec<f64>>> = if workers == 0 {
        (0..blocks).into_par_iter().map(run_block).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let mut sums = vec![0.0f64; n];
    for part in partials {
        for (s, p) in sums.iter_mut().zip(part?) {
            *s += p;
        }
    }
    let r = replications as f64;
    Sample::new(
        sums.into_iter().map(|s| T::of(s / r)).collect(),
        f0.support(),
    )
}

/// Per-rank mean of already drawn samples of equal length.
pub fn order_statistic_means<T: Real>(samples: &[Vec<T>]) -> Result<Vec<T>> {
    let n = samples.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut sums = vec![T::zero(); n];
    for s in samples {
        if s.len() != n {
            return Err(Error::InvalidConfig("samples differ in length".into()));
        }
        let mut sorted = s.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        for (acc, v) in sums.iter_mut().zip(sorted) {
            *acc = *acc + v;
        }
    }
    let r = T::of_usize(samples.len());
    Ok(sums.into_iter().map(|s| s / r).collect())
}

/// Edge-inclusive histogram: `counts[i]` covers `[edges[i], edges[i+1])` and
/// the last count covers `x == edges[m-1]` exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinReport<T> {
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
    /// Observations below `edges[0]`.
    pub below: usize,
    /// Observations above `edges[m-1]`.
    pub above: usize,
}

impl<T: Real> BinReport<T> {
    pub fn out_of_range(&self) -> usize {
        self.below + self.above
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.out_of_range()
    }

    /// `edge,count` lines followed by an `out_of_range` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge,count\n");
        for (e, c) in self.edges.iter().zip(&self.counts) {
            out.push_str(&format!("{},{c}\n", e.as_f64()));
        }
        out.push_str(&format!("out_of_range,{}\n", self.out_of_range()));
        out
    }
}

pub fn bin_count<T: Real>(values: &[T], edges: &[T]) -> Result<BinReport<T>> {
    if edges.len() < 2
        || edges.iter().any(|e| !e.is_finite())
        || edges.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(Error::InvalidEdges);
    }
    let m = edges.len();
    let mut report = BinReport {
        edges: edges.to_vec(),
        counts: vec![0; m],
        below: 0,
        above: 0,
    };
    for &x in values {
        if x < edges[0] {
            report.below += 1;
        } else if x > edges[m - 1] {
            report.above += 1;
        } else if x == edges[m - 1] {
            report.counts[m - 1] += 1;
        } else {
            // first edge strictly greater than x, minus one
            let i = edges.partition_point(|&e| e <= x) - 1;
            report.counts[i] += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn half_line_injection() {
        let s = Sample::new(vec![1.0, 3.29865, 2.0], SampleSupport::HalfLine).unwrap();
        let c = inject_outliers(&s);
        assert_eq!(c.len(), 4);
        assert_abs_diff_eq!(c.values()[3], 6.5973, epsilon = 1e-12);
        assert!(c.is_injected(3) && !c.is_injected(1));
        assert_eq!(&c.values()[..3], s.values());

        let s = Sample::new(vec![6.6, 0.1], SampleSupport::HalfLine).unwrap();
        assert_abs_diff_eq!(inject_outliers(&s).values()[2], 13.2, epsilon = 1e-12);
    }

    #[test]
    fn full_line_injection_is_symmetric() {
        let s = Sample::new(vec![-1.0, 2.0], SampleSupport::FullLine).unwrap();
        let c = inject_outliers(&s);
        assert_eq!(c.values(), &[-1.0, 2.0, 4.0, -4.0]);
        assert_eq!(c.injected_count(), 2);
    }

    #[test]
    fn rank_means_by_hand() {
        let m = order_statistic_means(&[vec![3.0, 1.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(m, vec![1.5, 3.5]);
        let m = order_statistic_means(&[vec![3.0, 1.0, 2.0]]).unwrap();
        assert_eq!(m, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn single_replication_is_the_sorted_sample() {
        let g = DistributionSpec::gamma(3.0, 0.25);
        let m = artificial_mean_sample(&g, 50, 1, 11, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        rng.set_stream(0);
        let mut raw = g.sample_with(50, &mut rng).unwrap().into_values();
        raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(m.values(), &raw[..]);
    }

    #[test]
    fn simulation_is_sorted_and_worker_independent() {
        let g = DistributionSpec::weibull(1.5, 2.0);
        let a = artificial_mean_sample(&g, 30, 1000, 5, 1).unwrap();
        let b = artificial_mean_sample(&g, 30, 1000, 5, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.values().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.support(), SampleSupport::HalfLine);
    }

    #[test]
    fn simulation_errors() {
        let g = DistributionSpec::gamma(3.0, 0.25);
        assert!(artificial_mean_sample(&g, 0, 10, 1, 1).is_err());
        assert!(artificial_mean_sample(&g, 10, 0, 1, 1).is_err());
        let gt = DistributionSpec::generalized_t(0.0, 1.0, 2.0, 1.0);
        assert!(matches!(
            artificial_mean_sample(&gt, 10, 10, 1, 1),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn bin_examples() {
        let r = bin_count(&[0.5, 1.5, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.counts, vec![1, 1, 1]);
        let e = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(bin_count(&e, &e).unwrap().counts, vec![1; 5]);
        let r = bin_count(&[-1.0, 0.0, 20.0, 21.0], &[0.0, 0.5, 1.5, 2.5, 20.0]).unwrap();
        assert_eq!(r.counts, vec![1, 0, 0, 0, 1]);
        assert_eq!((r.below, r.above), (1, 1));
        assert!(r.to_csv().ends_with("out_of_range,2\n"));
    }

    #[test]
    fn bad_edges() {
        assert_eq!(bin_count(&[1.0], &[0.0]), Err(Error::InvalidEdges));
        assert_eq!(bin_count(&[1.0], &[0.0, 0.0]), Err(Error::InvalidEdges));
        assert_eq!(bin_count(&[1.0], &[1.0, 0.5, 2.0]), Err(Error::InvalidEdges));
        assert_eq!(bin_count(&[1.0], &[0.0, f64::NAN]), Err(Error::InvalidEdges));
    }

    proptest! {
        #[test]
        fn bin_totals(values in prop::collection::vec(-5.0f64..25.0, 0..200)) {
            let r = bin_count(&values, &[0.0, 0.5, 1.5, 2.5, 20.0]).unwrap();
            prop_assert_eq!(r.counts.len(), 5);
            prop_assert_eq!(r.total(), values.len());
        }

        #[test]
        fn rank_means_are_sorted(
            samples in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 7), 1..20)
        ) {
            let m = order_statistic_means(&samples).unwrap();
            prop_assert!(m.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
