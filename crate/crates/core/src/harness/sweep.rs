//! Parameter sweeps over Eb/N0 or the number of users.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{aggregate, md_fa_from_counts, pupe_from_counts, Rate};
use super::trial::{run_trial, trial_seed, ClassCounts};
use crate::access::{Scenario, System};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Ebno,
    K,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ebno" => Ok(Axis::Ebno),
            "k" => Ok(Axis::K),
            other => Err(Error::Config(format!("unknown axis '{other}' (ebno|k)"))),
        }
    }
}

/// Scenario at one axis value: `ebno` sets `Eb/N0`, `k` sets the number of
/// users of every class.
pub fn scenario_at(base: &Scenario, axis: Axis, value: f64) -> Result<Scenario> {
    let mut sc = base.clone();
    match axis {
        Axis::Ebno => sc.ebno_db = value,
        Axis::K => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "user count {value} is not an integer"
                )));
            }
            sc.classes.iter_mut().for_each(|c| c.users = value as usize);
        }
    }
    sc.validate()?;
    Ok(sc)
}

/// Per-class counts of `trials` trials, computed on a pool with `threads`
/// workers (`None`: rayon's default) and returned in trial order.
pub fn run_trials(
    system: &System,
    master_seed: u64,
    trials: usize,
    threads: Option<usize>,
) -> Result<Vec<Vec<ClassCounts>>> {
    let job = || {
        (0..trials)
            .into_par_iter()
            .map(|i| run_trial(system, trial_seed(master_seed, i as u64)).map(|o| o.counts))
            .collect::<Result<Vec<_>>>()
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    /// Class index, or `None` for the row aggregating all classes.
    pub group_id: Option<usize>,
    pub pupe: Rate,
    pub md: f64,
    pub fa: f64,
    pub trials: usize,
    pub mode: String,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: &str = "axis_value,group_id,pupe,md,fa,trials,ci_lo,ci_hi,mode,G";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let group = r.group_id.map_or("all".to_string(), |g| g.to_string());
            writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{},{:.6},{:.6},{},{}",
                r.axis_value,
                group,
                r.pupe.value,
                r.md,
                r.fa,
                r.trials,
                r.pupe.ci_lo,
                r.pupe.ci_hi,
                r.mode,
                r.bins
            )
            .expect("writing to a String");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Rows for one axis point: one per class, plus an aggregate row when
/// there are several classes.
pub fn rows_for_point(
    scenario: &Scenario,
    axis_value: f64,
    counts: &[Vec<ClassCounts>],
) -> Vec<SweepRow> {
    let per_class = aggregate(counts);
    let pupe = pupe_from_counts(&per_class);
    let make = |group_id: Option<usize>, cls: &[ClassCounts], rate: Rate| {
        let (md, fa) = md_fa_from_counts(cls);
        SweepRow {
            axis_value,
            group_id,
            pupe: rate,
            md: md.value,
            fa: fa.value,
            trials: counts.len(),
            mode: scenario.mode.as_str().to_string(),
            bins: scenario.binning.bins,
        }
    };
    let mut rows: Vec<SweepRow> = per_class
        .iter()
        .enumerate()
        .map(|(c, cc)| make(Some(c), std::slice::from_ref(cc), pupe.per_class[c]))
        .collect();
    if per_class.len() > 1 {
        rows.push(make(None, &per_class, pupe.overall));
    }
    rows
}

/// Runs `trials` trials at each axis point. Results depend only on the
/// scenario, its seed and the points, not on `threads`.
pub fn sweep(
    base: &Scenario,
    axis: Axis,
    points: &[f64],
    trials: usize,
    threads: Option<usize>,
) -> Result<SweepResult> {
    let mut rows = Vec::new();
    let mut system: Option<System> = None;
    for &value in points {
        let sc = scenario_at(base, axis, value)?;
        let sys = match (&system, axis) {
            (Some(s), Axis::Ebno) => s.at_ebno(value)?,
            _ => System::new(&sc)?,
        };
        let counts = run_trials(&sys, sc.seed, trials, threads)?;
        rows.extend(rows_for_point(&sc, value, &counts));
        system = Some(sys);
    }
    Ok(SweepResult { axis, rows })
}
