//! Two classes with different rates sharing the channel, decoded by joint
//! coded demixing and by the TIN and SIC baselines on the same trials.
//!
//! Run with `cargo run --release --example multiclass`.

use coded_demixing::access::{ReceiverMode, Scenario, System};
use coded_demixing::harness::metrics::{aggregate, pupe_from_counts};
use coded_demixing::harness::run_trials;

fn main() -> coded_demixing::Result<()> {
    let base = Scenario::from_json(
        r#"{
            "n": 4096,
            "classes": [
                {"users": 10, "section_bits": 10, "sections": 16, "rate": "1/2",
                 "sensing_seed": 1, "graph_seed": 2},
                {"users": 10, "section_bits": 10, "sections": 16, "rate": "3/8",
                 "sensing_seed": 3, "graph_seed": 4}
            ],
            "ebno_db": 3.5,
            "seed": 11
        }"#,
    )?;
    let trials = 20;
    println!("{trials} trials at {} dB", base.ebno_db);
    for mode in [
        ReceiverMode::CodedDemixing,
        ReceiverMode::Sic,
        ReceiverMode::Tin,
    ] {
        let mut sc = base.clone();
        sc.mode = mode;
        let system = System::new(&sc)?;
        let counts = run_trials(&system, sc.seed, trials, None)?;
        let summary = pupe_from_counts(&aggregate(&counts));
        let per_class: Vec<String> = summary
            .per_class
            .iter()
            .map(|r| format!("{:.3} [{:.3}, {:.3}]", r.value, r.ci_lo, r.ci_hi))
            .collect();
        println!(
            "{:>15}: PUPE per class {}",
            mode.as_str(),
            per_class.join("  ")
        );
    }
    Ok(())
}
