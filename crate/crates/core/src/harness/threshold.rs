//! Required Eb/N0 for a target error rate, by bisection.

use serde::Serialize;

use super::metrics::{aggregate, pupe_from_counts, Rate};
use super::sweep::run_trials;
use crate::access::System;
use crate::error::{Error, Result};

/// Anything that can report an error rate (with interval) at an Eb/N0.
pub trait PupeOracle {
    fn pupe_at(&mut self, ebno_db: f64) -> Result<Rate>;
}

/// Monte-Carlo oracle on a built system.
pub struct SimulationOracle<'a> {
    pub system: &'a System,
    pub trials: usize,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl PupeOracle for SimulationOracle<'_> {
    fn pupe_at(&mut self, ebno_db: f64) -> Result<Rate> {
        let sys = self.system.at_ebno(ebno_db)?;
        let counts = run_trials(&sys, self.seed, self.trials, self.threads)?;
        Ok(pupe_from_counts(&aggregate(&counts)).overall)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket.
    pub ebno_db: f64,
    /// Largest evaluated point still above the target.
    pub lower: f64,
    /// Smallest evaluated point at or below the target.
    pub upper: f64,
    /// Whether the bracket endpoints' intervals both exclude the target.
    pub ci_separated: bool,
    pub evaluations: Vec<(f64, Rate)>,
}

/// Bisection on `[lo, hi]` until the bracket is narrower than
/// `tolerance_db`. The bracket is widened by up to `max_expand` steps of
/// its own width if the target is not crossed inside it.
pub fn find_threshold<O: PupeOracle>(
    oracle: &mut O,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tolerance_db: f64,
) -> Result<ThresholdResult> {
    const MAX_EXPAND: usize = 4;
    if lo.is_nan()
        || hi.is_nan()
        || lo >= hi
        || tolerance_db.is_nan()
        || tolerance_db <= 0.0
        || !(0.0..1.0).contains(&target)
    {
        return Err(Error::InvalidParameter(
            "need lo < hi, a positive tolerance and a target in [0, 1)".into(),
        ));
    }
    let mut evaluations = Vec::new();
    let mut eval = |x: f64, ev: &mut Vec<(f64, Rate)>| -> Result<Rate> {
        let r = oracle.pupe_at(x)?;
        ev.push((x, r));
        Ok(r)
    };
    let mut r_lo = eval(lo, &mut evaluations)?;
    let mut r_hi = eval(hi, &mut evaluations)?;
    for _ in 0..MAX_EXPAND {
        let width = hi - lo;
        if r_lo.value <= target {
            hi = lo;
            r_hi = r_lo;
            lo -= width;
            r_lo = eval(lo, &mut evaluations)?;
        } else if r_hi.value > target {
            lo = hi;
            r_lo = r_hi;
            hi += width;
            r_hi = eval(hi, &mut evaluations)?;
        } else {
            break;
        }
    }
    if r_lo.value <= target || r_hi.value > target {
        return Err(Error::InvalidParameter(format!(
            "target {target} not bracketed by [{lo}, {hi}]"
        )));
    }
    while hi - lo > tolerance_db {
        let mid = 0.5 * (lo + hi);
        let r = eval(mid, &mut evaluations)?;
        if r.value > target {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    Ok(ThresholdResult {
        ebno_db: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        ci_separated: r_lo.ci_lo > target && r_hi.ci_hi < target,
        evaluations,
    })
}
