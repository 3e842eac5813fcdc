//! Gamma and Dirichlet variates.
//!
//! Shapes `>= 1` use Marsaglia and Tsang's squeeze-rejection method; smaller
//! shapes draw `Gamma(a + 1)` and scale by `U^(1/a)`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::ProbVector;
use crate::error::{Error, Result};

/// Unit-scale gamma sampler with a fixed shape.
#[derive(Debug, Clone, Copy)]
pub struct Gamma {
    shape: f64,
    d: f64,
    c: f64,
}

impl Gamma {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::NonPositiveAlpha(shape));
        }
        let boosted = if shape < 1.0 { shape + 1.0 } else { shape };
        let d = boosted - 1.0 / 3.0;
        Ok(Gamma {
            shape,
            d,
            c: 1.0 / (9.0 * d).sqrt(),
        })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = loop {
            let z: f64 = rng.sample(StandardNormal);
            let v = 1.0 + self.c * z;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            // (0, 1]: keeps ln finite.
            let u = 1.0 - rng.random::<f64>();
            let z2 = z * z;
            if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + self.d * (1.0 - v + v.ln()) {
                break self.d * v;
            }
        };
        if self.shape < 1.0 {
            let u = 1.0 - rng.random::<f64>();
            x * u.powf(1.0 / self.shape)
        } else {
            x
        }
    }
}

pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    Ok(Gamma::new(shape)?.sample(rng))
}

/// Dirichlet sampler with precomputed per-component gamma samplers.
#[derive(Debug, Clone)]
pub struct Dirichlet {
    gammas: Vec<Gamma>,
}

impl Dirichlet {
    pub fn new(alpha: &[f64]) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "Dirichlet needs at least 2 parameters, got {}",
                alpha.len()
            )));
        }
        Ok(Dirichlet {
            gammas: alpha.iter().map(|&a| Gamma::new(a)).collect::<Result<_>>()?,
        })
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// Draw into `out` (resized to the dimension).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.resize(self.gammas.len(), 0.0);
        loop {
            let mut sum = 0.0;
            for (o, g) in out.iter_mut().zip(&self.gammas) {
                *o = g.sample(rng);
                sum += *o;
            }
            // All components can underflow to zero only for tiny shapes.
            if sum > 0.0 {
                out.iter_mut().for_each(|o| *o /= sum);
                return;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ProbVector {
        let mut out = Vec::new();
        self.sample_into(rng, &mut out);
        ProbVector(out)
    }
}

/// One draw from `Dir(alpha)`.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<ProbVector> {
    Ok(Dirichlet::new(alpha)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn moments(xs: impl Iterator<Item = f64>) -> (f64, f64) {
        let v: Vec<f64> = xs.collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (mean, var)
    }

    #[test]
    fn gamma_moments_match_shape() {
        // Gamma(k, 1): mean k, variance k.
        for &k in &[0.3, 0.7, 1.0, 2.5, 51.0] {
            let g = Gamma::new(k).unwrap();
            let mut r = rng::indexed(11, 0);
            let (mean, var) = moments((0..200_000).map(|_| g.sample(&mut r)));
            assert!((mean - k).abs() < 0.02 * k.max(1.0), "shape {k}: mean {mean}");
            assert!((var - k).abs() < 0.05 * k.max(1.0), "shape {k}: var {var}");
        }
    }

    #[test]
    fn rejects_non_positive_shape() {
        assert!(matches!(Gamma::new(0.0), Err(Error::NonPositiveAlpha(_))));
        assert!(matches!(Gamma::new(-1.0), Err(Error::NonPositiveAlpha(_))));
        assert!(matches!(
            sample_dirichlet(&[1.0, 0.0], &mut rng::indexed(0, 0)),
            Err(Error::NonPositiveAlpha(_))
        ));
    }

    #[test]
    fn concentrated_dirichlet() {
        let p = sample_dirichlet(&[1e9, 1e9], &mut rng::indexed(3, 0)).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-3 && (p[1] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn dirichlet_mean_matches_alpha_ratio() {
        // E[p_i] = alpha_i / sum(alpha) = 0.5.
        let d = Dirichlet::new(&[2.0, 2.0]).unwrap();
        let mut r = rng::indexed(5, 0);
        let (mean, _) = moments((0..100_000).map(|_| d.sample(&mut r)[0]));
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn uniform_dirichlet_has_beta11_variance() {
        let d = Dirichlet::new(&[1.0, 1.0]).unwrap();
        let mut r = rng::indexed(6, 0);
        let (_, var) = moments((0..100_000).map(|_| d.sample(&mut r)[0]));
        assert!((var - 1.0 / 12.0).abs() < 0.005, "{var}");
    }

    #[test]
    fn small_shape_dirichlet_mean() {
        let d = Dirichlet::new(&[0.5, 1.5]).unwrap();
        let mut r = rng::indexed(8, 0);
        let (mean, _) = moments((0..100_000).map(|_| d.sample(&mut r)[0]));
        assert!((mean - 0.25).abs() < 0.01, "{mean}");
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = sample_dirichlet(&[1.0, 2.0, 3.0], &mut rng::indexed(9, 1)).unwrap();
        let b = sample_dirichlet(&[1.0, 2.0, 3.0], &mut rng::indexed(9, 1)).unwrap();
        assert_eq!(a, b);
    }
}
