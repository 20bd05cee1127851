//! q-deformed logarithm and Tsallis entropy.
//!
//! `log_q(t) = (t^(1-q) - 1) / (1 - q)` for `q > 0`, with the natural
//! logarithm as the `q -> 1` limit. It is concave and strictly increasing in
//! `t` for every `q > 0`, which is what makes it usable in place of `ln` in a
//! likelihood.

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Below this distance from 1 the power form has no significant digits left.
pub(crate) const UNIT_Q_SWITCH: f64 = 1e-12;

/// Tuning parameter of the q-logarithm, `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam<T>(T);

impl<T: Real> QParam<T> {
    pub fn new(q: T) -> Result<Self> {
        if q > T::zero() && q.is_finite() {
            Ok(Self(q))
        } else {
            domain("q", "positive and finite", q.as_f64())
        }
    }

    /// `q = 1`, the ordinary logarithm.
    pub fn unit() -> Self {
        Self(T::one())
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }

    /// True when `q` is close enough to 1 that the logarithm branch is used.
    #[inline]
    pub fn is_unit(self) -> bool {
        (T::one() - self.0).abs() <= T::of(UNIT_Q_SWITCH)
    }
}

/// `log_q(t)`.
pub fn log_q<T: Real>(t: T, q: QParam<T>) -> Result<T> {
    if !(t > T::zero()) {
        return domain("log_q argument", "positive", t.as_f64());
    }
    Ok(log_q_of_ln(t.ln(), q))
}

/// `log_q` evaluated from `ln t`, so densities can pass their log-density
/// straight through without an `exp`/`ln` round trip.
#[inline]
pub(crate) fn log_q_of_ln<T: Real>(ln_t: T, q: QParam<T>) -> T {
    let d = T::one() - q.get();
    let ad = d.abs();
    if ad <= T::of(UNIT_Q_SWITCH) {
        ln_t
    } else {
        // exp_m1 keeps the digits that `t^(1-q) - 1` cancels for q near 1
        (d * ln_t).exp_m1() / d
    }
}

/// First derivative `d/dt log_q(t) = t^(-q)`.
pub fn log_q_derivative<T: Real>(t: T, q: QParam<T>) -> Result<T> {
    if !(t > T::zero()) {
        return domain("log_q argument", "positive", t.as_f64());
    }
    Ok((-q.get() * t.ln()).exp())
}

/// Second derivative `-q t^(-q-1)`; strictly negative for `t, q > 0`.
pub fn log_q_second_derivative<T: Real>(t: T, q: QParam<T>) -> Result<T> {
    if !(t > T::zero()) {
        return domain("log_q argument", "positive", t.as_f64());
    }
    let q = q.get();
    Ok(-q * ((-q - T::one()) * t.ln()).exp())
}

/// Tsallis entropy `(sum f^q - 1) / (1 - q)`; the Shannon entropy
/// `-sum f ln f` (with `0 ln 0 = 0`) at `q = 1`.
pub fn tsallis_entropy<T: Real>(values: &[T], q: QParam<T>) -> Result<T> {
    if let Some(&bad) = values.iter().find(|v| !(**v >= T::zero()) || !v.is_finite()) {
        return domain("entropy argument", "nonnegative and finite", bad.as_f64());
    }
    if q.is_unit() {
        let terms: Vec<T> = values
            .iter()
            .map(|&f| if f > T::zero() { -f * f.ln() } else { T::zero() })
            .collect();
        return Ok(crate::pairwise_sum(&terms));
    }
    let qv = q.get();
    let powers: Vec<T> = values.iter().map(|&f| f.powf(qv)).collect();
    Ok((crate::pairwise_sum(&powers) - T::one()) / (T::one() - qv))
}
