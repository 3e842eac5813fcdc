//! Categorical outcome estimation: the empirical estimate, the pooled and
//! decreasing-m-estimate fusions of target and test counts, Dirichlet
//! sampling, and a Monte Carlo bound on the estimation error.

mod delta;
mod gamma;

pub use delta::{MIN_SAMPLE_SIZE, delta_bound, delta_bounds, prior_delta_bound, DeltaBoundParams};
pub use gamma::{sample_dirichlet, sample_gamma, Dirichlet, Gamma};

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome counts of one rule in one environment; index 0 is the noise outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct CountVector(Vec<u64>);

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "count vectors need at least 2 entries, got {}",
                counts.len()
            )));
        }
        Ok(CountVector(counts))
    }

    pub fn zeros(len: usize) -> Self {
        CountVector(vec![0; len.max(2)])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn increment(&mut self, i: usize) {
        self.0[i] += 1;
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

impl TryFrom<Vec<u64>> for CountVector {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        CountVector::new(v)
    }
}

impl From<CountVector> for Vec<u64> {
    fn from(c: CountVector) -> Self {
        c.0
    }
}

impl Index<usize> for CountVector {
    type Output = u64;

    fn index(&self, i: usize) -> &u64 {
        &self.0[i]
    }
}

pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A categorical distribution: entries in `[0, 1]` summing to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(ProbVector(probs))
    }

    /// Normalize non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize weights {weights:?}"
            )));
        }
        Ok(ProbVector(weights.iter().map(|w| w / sum).collect()))
    }

    pub fn uniform(len: usize) -> Self {
        ProbVector(vec![1.0 / len as f64; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `max_i |self_i - other_i|`.
    pub fn max_abs_diff(&self, other: &ProbVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

impl Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `q_i = x_i / N`.
pub fn empirical_estimate(c: &CountVector) -> Result<ProbVector> {
    let n = c.total();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(ProbVector(
        c.0.iter().map(|&x| x as f64 / n as f64).collect(),
    ))
}

fn same_len(a: &CountVector, b: &CountVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Pool both environments as if they shared one distribution:
/// `q_i = (x1_i + x2_i) / (N1 + N2)`.
pub fn pooled_estimate(target: &CountVector, test: &CountVector) -> Result<ProbVector> {
    same_len(target, test)?;
    let n = target.total() + test.total();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(ProbVector(
        target
            .0
            .iter()
            .zip(&test.0)
            .map(|(&a, &b)| (a + b) as f64 / n as f64)
            .collect(),
    ))
}

/// Weight given to each test count: `m / sqrt(1 + N1)`.
pub fn test_weight(target_total: u64, m: f64) -> f64 {
    m / (1.0 + target_total as f64).sqrt()
}

/// Test counts scaled by [`test_weight`] and added to the target counts.
pub fn weighted_pseudo_counts(target: &CountVector, test: &CountVector, m: f64) -> Result<Vec<f64>> {
    same_len(target, test)?;
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("m must be positive, got {m}")));
    }
    let w = test_weight(target.total(), m);
    Ok(target
        .0
        .iter()
        .zip(&test.0)
        .map(|(&a, &b)| a as f64 + w * b as f64)
        .collect())
}

/// Decreasing-m-estimate of the target distribution:
/// `q_i = (x1_i + w x2_i) / (N1 + w N2)` with `w = m / sqrt(1 + N1)`.
///
/// With no target data this is the test estimate; as target data accumulates
/// the test counts fade out.
pub fn m_estimate(target: &CountVector, test: &CountVector, m: f64) -> Result<ProbVector> {
    let pseudo = weighted_pseudo_counts(target, test, m)?;
    let w = test_weight(target.total(), m);
    let denom = target.total() as f64 + w * test.total() as f64;
    if denom == 0.0 {
        return Err(Error::EmptySample);
    }
    Ok(ProbVector(pseudo.into_iter().map(|x| x / denom).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(v: &[u64]) -> CountVector {
        CountVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn empirical() {
        assert_eq!(empirical_estimate(&cv(&[3, 1])).unwrap().as_slice(), &[0.75, 0.25]);
        assert_eq!(empirical_estimate(&cv(&[0, 10])).unwrap().as_slice(), &[0.0, 1.0]);
        assert!(matches!(empirical_estimate(&cv(&[0, 0])), Err(Error::EmptySample)));
    }

    #[test]
    fn count_vector_needs_two_entries() {
        assert!(CountVector::new(vec![1]).is_err());
    }

    #[test]
    fn pooled() {
        assert_eq!(pooled_estimate(&cv(&[3, 1]), &cv(&[1, 3])).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(pooled_estimate(&cv(&[0, 0]), &cv(&[4, 6])).unwrap().as_slice(), &[0.4, 0.6]);
        assert_eq!(pooled_estimate(&cv(&[5, 5]), &cv(&[0, 0])).unwrap().as_slice(), &[0.5, 0.5]);
        assert!(matches!(
            pooled_estimate(&cv(&[1, 1]), &cv(&[1, 1, 1])),
            Err(Error::LengthMismatch(2, 3))
        ));
        assert!(matches!(pooled_estimate(&cv(&[0, 0]), &cv(&[0, 0])), Err(Error::EmptySample)));
    }

    #[test]
    fn m_estimate_examples() {
        for m in [0.5, 1.0, 10.0, 1000.0] {
            let q = m_estimate(&cv(&[0, 0]), &cv(&[5, 5]), m).unwrap();
            assert!((q[0] - 0.5).abs() < 1e-15 && (q[1] - 0.5).abs() < 1e-15);
        }
        // Frozen from a 50-digit evaluation (mpmath) of the closed form.
        let q = m_estimate(&cv(&[8, 2]), &cv(&[5, 5]), 10.0).unwrap();
        assert!((q[0] - 0.574_717_689_562_541_57).abs() < 1e-12);
        assert!((q[1] - 0.425_282_310_437_458_43).abs() < 1e-12);
        let q = m_estimate(&cv(&[8_000_000, 2_000_000]), &cv(&[5, 5]), 10.0).unwrap();
        assert!((q[0] - 0.8).abs() < 1e-3 && (q[1] - 0.2).abs() < 1e-3);
        assert!(m_estimate(&cv(&[0, 0]), &cv(&[0, 0]), 10.0).is_err());
        assert!(m_estimate(&cv(&[1, 0]), &cv(&[0, 0]), 0.0).is_err());
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.7, 0.7]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(vec![0.333333, 0.333333, 0.333334]).is_ok());
    }

    fn counts(len: usize) -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
        (
            prop::collection::vec(0u64..1000, len),
            prop::collection::vec(0u64..1000, len),
        )
    }

    fn on_simplex(p: &ProbVector) -> bool {
        p.as_slice().iter().all(|x| (0.0..=1.0).contains(x))
            && (p.as_slice().iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOLERANCE
    }

    proptest! {
        #[test]
        fn estimators_stay_on_simplex((a, b) in (2usize..6).prop_flat_map(counts), m in 0.01f64..100.0) {
            let a = CountVector::new(a).unwrap();
            let b = CountVector::new(b).unwrap();
            if let Ok(p) = empirical_estimate(&a) { prop_assert!(on_simplex(&p)); }
            if let Ok(p) = pooled_estimate(&a, &b) { prop_assert!(on_simplex(&p)); }
            if let Ok(p) = m_estimate(&a, &b, m) { prop_assert!(on_simplex(&p)); }
        }

        #[test]
        fn m_estimate_lies_between_sources((a, b) in (2usize..5).prop_flat_map(counts), m in 0.01f64..100.0) {
            let a = CountVector::new(a).unwrap();
            let b = CountVector::new(b).unwrap();
            if let (Ok(pa), Ok(pb)) = (empirical_estimate(&a), empirical_estimate(&b)) {
                let q = m_estimate(&a, &b, m).unwrap();
                for i in 0..q.len() {
                    let (lo, hi) = (pa[i].min(pb[i]), pa[i].max(pb[i]));
                    prop_assert!(q[i] >= lo - 1e-12 && q[i] <= hi + 1e-12);
                }
            }
        }
    }
}
