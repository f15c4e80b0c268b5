//! Misspecified analysis probabilities: logit-scale noise and rare-marker inflation.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{clamp_probability, PROB_CEIL};

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn inv_logit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Shifts each probability on the logit scale by the given error term.
pub fn shift_logit(p: f64, eps: f64) -> f64 {
    clamp_probability(inv_logit(logit(p) + eps))
}

/// `logit(p*) = logit(p) + eps`, `eps ~ N(0, sigma)` with `sigma` the standard deviation.
pub fn perturb_probabilities_logit<R: Rng + ?Sized>(ps: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise scale {sigma} must be nonnegative"
        )));
    }
    if sigma == 0.0 {
        return Ok(ps.to_vec());
    }
    let noise = Normal::new(0.0, sigma).expect("valid normal");
    Ok(ps.iter().map(|&p| shift_logit(p, noise.sample(rng))).collect())
}

/// Multiplies probabilities below `threshold` by `factor`, capped below 1.
pub fn inflate_rare(ps: &[f64], factor: f64, threshold: f64) -> Result<Vec<f64>> {
    if factor.is_nan() || factor < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "inflation factor {factor} must be at least 1"
        )));
    }
    Ok(ps
        .iter()
        .map(|&p| if p < threshold { (factor * p).min(PROB_CEIL) } else { p })
        .collect())
}
