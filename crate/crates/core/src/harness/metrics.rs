//! Error rates and binomial confidence intervals from raw counts.

use serde::Serialize;

use super::trial::{ClassCounts, TrialOutcome};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A rate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rate {
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub events: usize,
    pub total: usize,
}

impl Rate {
    pub fn from_counts(events: usize, total: usize) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(events, total, Z95);
        Rate {
            value: if total == 0 {
                0.0
            } else {
                events as f64 / total as f64
            },
            ci_lo,
            ci_hi,
            events,
            total,
        }
    }

    /// Whether the two 95% intervals are disjoint.
    pub fn separated_from(&self, other: &Rate) -> bool {
        self.ci_hi < other.ci_lo || other.ci_hi < self.ci_lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PupeSummary {
    pub overall: Rate,
    pub per_class: Vec<Rate>,
}

/// Sums per-class counts over trials.
pub fn aggregate(counts: &[Vec<ClassCounts>]) -> Vec<ClassCounts> {
    let classes = counts.first().map_or(0, |c| c.len());
    let mut out = vec![ClassCounts::default(); classes];
    for trial in counts {
        for (o, c) in out.iter_mut().zip(trial) {
            o.add(c);
        }
    }
    out
}

fn total(per_class: &[ClassCounts]) -> ClassCounts {
    let mut t = ClassCounts::default();
    per_class.iter().for_each(|c| t.add(c));
    t
}

/// Fraction of sent messages missing from the decoded lists.
pub fn pupe_from_counts(per_class: &[ClassCounts]) -> PupeSummary {
    let t = total(per_class);
    PupeSummary {
        overall: Rate::from_counts(t.missed, t.sent),
        per_class: per_class
            .iter()
            .map(|c| Rate::from_counts(c.missed, c.sent))
            .collect(),
    }
}

pub fn compute_pupe(outcomes: &[TrialOutcome]) -> PupeSummary {
    let counts: Vec<Vec<ClassCounts>> = outcomes.iter().map(|o| o.counts.clone()).collect();
    pupe_from_counts(&aggregate(&counts))
}

/// `(Pr(MD), Pr(FA))`: missed over sent, and unmatched entries over list
/// entries (zero for empty lists).
pub fn md_fa_from_counts(per_class: &[ClassCounts]) -> (Rate, Rate) {
    let t = total(per_class);
    (
        Rate::from_counts(t.missed, t.sent),
        Rate::from_counts(t.false_alarms, t.recovered),
    )
}

pub fn compute_md_fa(outcomes: &[TrialOutcome]) -> (f64, f64) {
    let counts: Vec<Vec<ClassCounts>> = outcomes.iter().map(|o| o.counts.clone()).collect();
    let (md, fa) = md_fa_from_counts(&aggregate(&counts));
    (md.value, fa.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(sent: usize, missed: usize, recovered: usize, fa: usize) -> ClassCounts {
        ClassCounts {
            sent,
            missed,
            recovered,
            false_alarms: fa,
        }
    }

    #[test]
    fn pupe_counting() {
        assert_eq!(pupe_from_counts(&[cc(10, 0, 10, 0)]).overall.value, 0.0);
        assert_eq!(pupe_from_counts(&[cc(10, 10, 0, 0)]).overall.value, 1.0);
        let s = pupe_from_counts(&aggregate(&[vec![cc(4, 1, 3, 0)], vec![cc(4, 2, 4, 2)]]));
        assert!((s.overall.value - 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn md_fa_edge_cases() {
        let (md, fa) = md_fa_from_counts(&[cc(5, 5, 0, 0)]);
        assert_eq!((md.value, fa.value), (1.0, 0.0));
        let (_, fa) = md_fa_from_counts(&[cc(8, 1, 8, 1)]);
        assert!((fa.value - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn wilson_known_value() {
        // 10 of 100 at 95%: [0.0552, 0.1744]
        let (lo, hi) = wilson_interval(10, 100, Z95);
        assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }
}
