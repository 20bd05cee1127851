//! Special functions needed by the densities and the Huber normalizer.
//!
//! Evaluated in `f64` through `statrs` and converted back, so `f32` callers get
//! correctly rounded single-precision values.

use crate::scalar::Real;

pub fn ln_gamma<T: Real>(x: T) -> T {
    let x = x.as_f64();
    // exact zeros, so unit-shape densities hit their closed forms
    if x == 1.0 || x == 2.0 {
        return T::zero();
    }
    T::of(statrs::function::gamma::ln_gamma(x))
}

pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    T::of(statrs::function::beta::ln_beta(a.as_f64(), b.as_f64()))
}

pub fn digamma<T: Real>(x: T) -> T {
    T::of(statrs::function::gamma::digamma(x.as_f64()))
}

pub fn erf<T: Real>(x: T) -> T {
    T::of(statrs::function::erf::erf(x.as_f64()))
}

/// Standard normal CDF.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    T::of(0.5) * (T::one() + erf(x / T::SQRT_2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_function_values() {
        assert_relative_eq!(ln_gamma(1.0_f64), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(0.5_f64), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(5.0_f64), 24.0_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn beta_is_symmetric_combination_of_gammas() {
        let (a, b) = (0.36_f64, 1.75);
        assert_relative_eq!(
            ln_beta(a, b),
            ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b),
            epsilon = 1e-12
        );
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_relative_eq!(std_normal_cdf(0.0_f64), 0.5, epsilon = 1e-15);
        let x = 1.05_f64;
        assert_relative_eq!(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, epsilon = 1e-15);
        assert_relative_eq!(std_normal_cdf(1.96_f64), 0.975_002_104_851_780, epsilon = 1e-11);
    }
}
