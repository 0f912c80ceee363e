//! Gaussian parametric baselines: maximum-likelihood mean and the conjugate
//! posterior for a Gaussian mean with known variance.

use crate::density::Sample1D;
use crate::error::{Error, Result};

/// Prior `μ ~ N(mu0, sigma0_sq)` with known likelihood variance `sigma_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPrior {
    pub mu0: f64,
    pub sigma0_sq: f64,
    pub sigma_sq: f64,
}

impl GaussPrior {
    pub fn new(mu0: f64, sigma0_sq: f64, sigma_sq: f64) -> Result<Self> {
        if !mu0.is_finite() {
            return Err(Error::InvalidArgument(format!("prior mean {mu0} is not finite")));
        }
        for (name, v) in [("sigma0_sq", sigma0_sq), ("sigma_sq", sigma_sq)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(GaussPrior {
            mu0,
            sigma0_sq,
            sigma_sq,
        })
    }
}

/// Posterior `μ | D ~ N(mu_n, sigma_n_sq)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPosterior {
    pub mu_n: f64,
    pub sigma_n_sq: f64,
}

pub fn mle_mean(data: &Sample1D) -> f64 {
    data.mean()
}

/// Conjugate update:
/// `μₙ = nσ₀²/(nσ₀²+σ²)·x̄ + σ²/(nσ₀²+σ²)·μ₀`, `σₙ² = σ₀²σ²/(nσ₀²+σ²)`.
pub fn bayes_posterior(data: &Sample1D, prior: &GaussPrior) -> GaussPosterior {
    let n = data.len() as f64;
    let xbar = data.mean();
    let denom = n * prior.sigma0_sq + prior.sigma_sq;
    GaussPosterior {
        mu_n: n * prior.sigma0_sq / denom * xbar + prior.sigma_sq / denom * prior.mu0,
        sigma_n_sq: prior.sigma0_sq * prior.sigma_sq / denom,
    }
}

/// Predictive `x | D ~ N(μₙ, σ² + σₙ²)`, returned as `(mean, variance)`.
pub fn posterior_predictive(post: &GaussPosterior, sigma_sq: f64) -> (f64, f64) {
    (post.mu_n, sigma_sq + post.sigma_n_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mle_is_average() {
        assert_eq!(mle_mean(&Sample1D::new(vec![5.0]).unwrap()), 5.0);
        assert_eq!(mle_mean(&Sample1D::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap()), 2.5);
    }

    #[test]
    fn single_observation_posterior() {
        let prior = GaussPrior::new(0.0, 1.0, 1.0).unwrap();
        let post = bayes_posterior(&Sample1D::new(vec![2.0]).unwrap(), &prior);
        assert_eq!((post.mu_n, post.sigma_n_sq), (1.0, 0.5));
        assert_eq!(posterior_predictive(&post, 1.0), (1.0, 1.5));
    }

    #[test]
    fn prior_validation() {
        assert!(GaussPrior::new(0.0, 0.0, 1.0).is_err());
        assert!(GaussPrior::new(0.0, 1.0, -1.0).is_err());
        assert!(GaussPrior::new(f64::NAN, 1.0, 1.0).is_err());
    }
}
