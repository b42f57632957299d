//! Bin occupancy estimation from the superimposed bin identification symbols.
//!
//! Every user adds `a e_g` to a length-`G` observation with unit-variance
//! noise, so `y = a k + noise` where `k` counts the users per bin.

use serde::{Deserialize, Serialize};

use super::config::OccupancyEstimator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyEstimate {
    pub per_bin: Vec<usize>,
    pub total: usize,
}

impl OccupancyEstimate {
    pub fn from_counts(per_bin: Vec<usize>) -> Self {
        let total = per_bin.iter().sum();
        OccupancyEstimate { per_bin, total }
    }
}

/// Estimates the per-bin user counts.
///
/// * `Lmmse` needs the total `k`; the prior is multinomial with equal bin
///   probabilities, whose covariance `(K/G)(I - 11^T/G)` admits the closed
///   form `k = K/G + a c / (a^2 c + 1) (y - mean(y))` with `c = K/G`.
/// * `Round` uses `max(0, round(y_g / a))` per bin.
///
/// The linear estimates are rounded and clamped at zero.
pub fn estimate_occupancy(
    y_binid: &[f64],
    k: Option<usize>,
    amplitude: f64,
    method: OccupancyEstimator,
) -> Result<OccupancyEstimate> {
    if y_binid.is_empty() {
        return Err(Error::InvalidParameter("empty bin-ID observation".into()));
    }
    if amplitude.is_nan() || amplitude <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bin-ID amplitude must be positive, got {amplitude}"
        )));
    }
    let per_bin = match method {
        OccupancyEstimator::Lmmse => {
            let k = k.ok_or_else(|| {
                Error::Config("the lmmse occupancy estimator needs the total K".into())
            })?;
            let g = y_binid.len() as f64;
            let c = k as f64 / g;
            let mean = y_binid.iter().sum::<f64>() / g;
            let gain = amplitude * c / (amplitude * amplitude * c + 1.0);
            y_binid
                .iter()
                .map(|&y| round_count(c + gain * (y - mean)))
                .collect()
        }
        OccupancyEstimator::Round => y_binid
            .iter()
            .map(|&y| round_count(y / amplitude))
            .collect(),
        OccupancyEstimator::Oracle => {
            return Err(Error::Config(
                "the oracle estimator uses the true counts and has no observation model".into(),
            ))
        }
    };
    Ok(OccupancyEstimate::from_counts(per_bin))
}

fn round_count(x: f64) -> usize {
    x.round().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_lmmse_fixed_point() {
        let a = 0.9;
        let y = [3.0 * a, 5.0 * a];
        let est = estimate_occupancy(&y, Some(8), a, OccupancyEstimator::Lmmse).unwrap();
        assert_eq!(est.per_bin, vec![3, 5]);
        assert_eq!(est.total, 8);
    }

    #[test]
    fn zero_observation_rounds_to_zero() {
        let est = estimate_occupancy(&[0.0; 4], None, 0.9, OccupancyEstimator::Round).unwrap();
        assert_eq!(est.per_bin, vec![0; 4]);
    }

    #[test]
    fn lmmse_without_k_rejected() {
        assert!(estimate_occupancy(&[1.0, 2.0], None, 1.0, OccupancyEstimator::Lmmse).is_err());
        assert!(estimate_occupancy(&[1.0, 2.0], Some(3), 1.0, OccupancyEstimator::Oracle).is_err());
    }

    #[test]
    fn negative_estimates_clamped() {
        let est = estimate_occupancy(&[-3.0, 1.0], None, 1.0, OccupancyEstimator::Round).unwrap();
        assert_eq!(est.per_bin, vec![0, 1]);
    }
}
