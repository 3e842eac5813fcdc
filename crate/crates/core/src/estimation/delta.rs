//! Monte Carlo bound on the estimation error of a categorical distribution.
//!
//! Given counts `x`, the posterior under a uniform prior is
//! `Dir(1 + x_0, ..., 1 + x_n)`. Drawing `S` parameter vectors `p'` from it and
//! recording `max_i |p'_i - x_i / N|` for each gives an error sample; its
//! `round((1 - eps) S)`-th order statistic is a `delta` such that
//! `P(max_i |p_i - q_i| > delta) <= eps`.

use super::{CountVector, Dirichlet};
use crate::error::{Error, Result};
use crate::{par, rng};

/// Draws per independently seeded chunk. Chunking fixes which stream each
/// draw comes from, so results do not depend on thread scheduling.
const CHUNK: usize = 1024;

pub const MIN_SAMPLE_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBoundParams {
    /// Probability that the true error exceeds the bound.
    pub epsilon: f64,
    pub sample_size: usize,
    pub seed: u64,
}

impl DeltaBoundParams {
    pub fn new(epsilon: f64, sample_size: usize, seed: u64) -> Result<Self> {
        let p = DeltaBoundParams {
            epsilon,
            sample_size,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        validate_epsilon(self.epsilon)?;
        if self.sample_size < MIN_SAMPLE_SIZE {
            return Err(Error::InvalidParameter(format!(
                "sample size must be at least {MIN_SAMPLE_SIZE}, got {}",
                self.sample_size
            )));
        }
        quantile_index(self.epsilon, self.sample_size).map(|_| ())
    }
}

fn validate_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {eps}"
        )));
    }
    Ok(())
}

/// 1-based index `round((1 - eps) S)`, clamped to `S`; 0 is an error.
fn quantile_index(eps: f64, s: usize) -> Result<usize> {
    let q = ((1.0 - eps) * s as f64).round() as usize;
    if q == 0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon {eps} with sample size {s} selects no order statistic"
        )));
    }
    Ok(q.min(s))
}

/// Sorted error sample `max_i |p'_i - center_i|`, `p' ~ Dir(alpha)`.
fn sorted_errors(alpha: &[f64], center: &[f64], s: usize, seed: u64) -> Result<Vec<f64>> {
    let dir = Dirichlet::new(alpha)?;
    let chunks = s.div_ceil(CHUNK);
    let parts = par::map_range(chunks, |c| {
        let mut r = rng::indexed(seed, c as u64);
        let n = CHUNK.min(s - c * CHUNK);
        let mut buf = Vec::with_capacity(alpha.len());
        (0..n)
            .map(|_| {
                dir.sample_into(&mut r, &mut buf);
                buf.iter()
                    .zip(center)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max)
            })
            .collect::<Vec<f64>>()
    });
    let mut errors: Vec<f64> = parts.into_iter().flatten().collect();
    par::sort_f64(&mut errors);
    Ok(errors)
}

/// Bounds for several confidence levels, all read from one sorted sample.
pub fn delta_bounds(
    counts: &CountVector,
    epsilons: &[f64],
    sample_size: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = counts.total();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let alpha: Vec<f64> = counts.as_slice().iter().map(|&x| 1.0 + x as f64).collect();
    let mode: Vec<f64> = counts.as_slice().iter().map(|&x| x as f64 / n as f64).collect();
    bounds_from(&alpha, &mode, epsilons, sample_size, seed)
}

fn bounds_from(
    alpha: &[f64],
    center: &[f64],
    epsilons: &[f64],
    sample_size: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let indices = epsilons
        .iter()
        .map(|&e| {
            DeltaBoundParams::new(e, sample_size, seed)?;
            quantile_index(e, sample_size)
        })
        .collect::<Result<Vec<_>>>()?;
    let errors = sorted_errors(alpha, center, sample_size, seed)?;
    Ok(indices.into_iter().map(|q| errors[q - 1]).collect())
}

/// Error bound `delta` for `counts` at confidence `1 - epsilon`.
pub fn delta_bound(counts: &CountVector, params: &DeltaBoundParams) -> Result<f64> {
    Ok(delta_bounds(counts, &[params.epsilon], params.sample_size, params.seed)?[0])
}

/// Bound before any observation: the all-ones Dirichlet measured against the
/// uniform distribution over `n_outcomes`.
pub fn prior_delta_bound(n_outcomes: usize, params: &DeltaBoundParams) -> Result<f64> {
    let alpha = vec![1.0; n_outcomes];
    let center = vec![1.0 / n_outcomes as f64; n_outcomes];
    Ok(bounds_from(&alpha, &center, &[params.epsilon], params.sample_size, params.seed)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[u64]) -> CountVector {
        CountVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn balanced_hundred_matches_beta_quantile() {
        // Oracle: 0.95 quantile of Beta(51, 51) minus 0.5 = 0.0810908 (scipy).
        let p = DeltaBoundParams::new(0.1, 100_000, 1).unwrap();
        let d = delta_bound(&cv(&[50, 50]), &p).unwrap();
        assert!((d - 0.081_090_8).abs() < 0.005, "{d}");
    }

    #[test]
    fn huge_counts_give_tiny_bound() {
        // Gaussian oracle 1.645 * sqrt(0.25 / 2e6) = 5.8e-4.
        let p = DeltaBoundParams::new(0.1, 10_000, 2).unwrap();
        let d = delta_bound(&cv(&[1_000_000, 1_000_000]), &p).unwrap();
        assert!(d < 0.002, "{d}");
    }

    #[test]
    fn smaller_epsilon_gives_larger_bound() {
        let b = delta_bounds(&cv(&[7, 3, 1]), &[0.01, 0.1], 10_000, 3).unwrap();
        assert!(b[0] >= b[1]);
        let a = delta_bound(&cv(&[7, 3, 1]), &DeltaBoundParams::new(0.01, 10_000, 3).unwrap()).unwrap();
        assert_eq!(a, b[0]);
    }

    #[test]
    fn deterministic_and_in_unit_interval() {
        let p = DeltaBoundParams::new(0.1, 5_000, 4).unwrap();
        let a = delta_bound(&cv(&[0, 2, 1]), &p).unwrap();
        assert_eq!(a, delta_bound(&cv(&[0, 2, 1]), &p).unwrap());
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn parameter_errors() {
        assert!(DeltaBoundParams::new(0.0, 1000, 0).is_err());
        assert!(DeltaBoundParams::new(1.0, 1000, 0).is_err());
        assert!(DeltaBoundParams::new(0.1, 99, 0).is_err());
        assert!(DeltaBoundParams::new(0.9999, 100, 0).is_err());
        let p = DeltaBoundParams::new(0.1, 1000, 0).unwrap();
        assert!(matches!(delta_bound(&cv(&[0, 0]), &p), Err(Error::EmptySample)));
    }

    #[test]
    fn prior_bound_is_large() {
        let p = DeltaBoundParams::new(0.1, 10_000, 0).unwrap();
        let d = prior_delta_bound(2, &p).unwrap();
        // |U - 0.5| for U ~ Uniform(0,1) has 0.9 quantile 0.45.
        assert!((d - 0.45).abs() < 0.01, "{d}");
    }
}
