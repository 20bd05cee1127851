use crate::scalar::Real;

const LEAF: usize = 8;

/// Pairwise (tree) summation with a fixed split order.
///
/// The reduction tree depends only on the slice length, so a parallel caller
/// that splits at the same midpoints reproduces the result bit for bit.
pub fn pairwise_sum<T: Real>(terms: &[T]) -> T {
    if terms.len() <= LEAF {
        return terms.iter().fold(T::zero(), |acc, &t| acc + t);
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn less_drift_than_sequential() {
        let v = vec![0.1_f32; 1_000_000];
        let exact = 100_000.0_f32;
        let seq: f32 = v.iter().sum();
        assert!((pairwise_sum(&v) - exact).abs() <= (seq - exact).abs());
    }
}
