//! Monte-Carlo harness: trials, error metrics, sweeps and threshold search.

pub mod metrics;
pub mod sweep;
pub mod threshold;
pub mod trial;

pub use metrics::{compute_md_fa, compute_pupe, wilson_interval, PupeSummary, Rate};
pub use sweep::{run_trials, scenario_at, sweep, Axis, SweepResult, SweepRow, CSV_HEADER};
pub use threshold::{find_threshold, PupeOracle, SimulationOracle, ThresholdResult};
pub use trial::{run_trial, trial_seed, ClassCounts, TrialOutcome};
