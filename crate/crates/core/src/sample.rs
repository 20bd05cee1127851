use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Where the observations live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SampleSupport {
    /// `[0, inf)`
    HalfLine,
    /// `(-inf, inf)`
    FullLine,
}

impl SampleSupport {
    pub fn name(self) -> &'static str {
        match self {
            SampleSupport::HalfLine => "half-line",
            SampleSupport::FullLine => "full-line",
        }
    }
}

impl serde::Serialize for SampleSupport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl fmt::Display for SampleSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SampleSupport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "half-line" | "half" | "positive" => Ok(SampleSupport::HalfLine),
            "full-line" | "full" | "real" => Ok(SampleSupport::FullLine),
            _ => Err(Error::UnknownName {
                what: "support",
                name: s.to_string(),
            }),
        }
    }
}

/// Ordered, non-empty collection of finite observations.
///
/// Values appended by [`crate::inject_outliers`] carry an injection flag so
/// reports can tell them apart from the original data.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    values: Vec<T>,
    injected: Vec<bool>,
    support: SampleSupport,
}

impl<T: Real> Sample<T> {
    pub fn new(values: Vec<T>, support: SampleSupport) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObservation(i));
        }
        let injected = vec![false; values.len()];
        Ok(Self {
            values,
            injected,
            support,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn support(&self) -> SampleSupport {
        self.support
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_injected(&self, i: usize) -> bool {
        self.injected[i]
    }

    pub fn injected_count(&self) -> usize {
        self.injected.iter().filter(|&&b| b).count()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> T {
        crate::pairwise_sum(&self.values) / T::of_usize(self.len())
    }

    pub(crate) fn push_injected(&mut self, v: T) {
        self.values.push(v);
        self.injected.push(true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert_eq!(
            Sample::<f64>::new(vec![], SampleSupport::HalfLine),
            Err(Error::EmptySample)
        );
        assert_eq!(
            Sample::new(vec![1.0, f64::NAN], SampleSupport::FullLine),
            Err(Error::NonFiniteObservation(1))
        );
    }

    #[test]
    fn summary_statistics() {
        let s = Sample::new(vec![-3.0, 1.0, 2.0], SampleSupport::FullLine).unwrap();
        assert_eq!(s.max(), 2.0);
        assert_eq!(s.min(), -3.0);
        assert_eq!(s.max_abs(), 3.0);
        assert_eq!(s.mean(), 0.0);
        assert_eq!(s.injected_count(), 0);
    }

    #[test]
    fn support_names_round_trip() {
        for s in [SampleSupport::HalfLine, SampleSupport::FullLine] {
            assert_eq!(s.name().parse::<SampleSupport>().unwrap(), s);
        }
        assert!("sphere".parse::<SampleSupport>().is_err());
    }
}
