//! Monte-Carlo sweep over Eb/N0 with Wilson intervals, and a bisection for
//! the Eb/N0 that reaches a target error rate.
//!
//! Run with `cargo run --release --example sweep_threshold`.

use coded_demixing::access::{Scenario, System};
use coded_demixing::harness::{find_threshold, sweep, Axis, SimulationOracle};

fn main() -> coded_demixing::Result<()> {
    let sc = Scenario::from_json(
        r#"{
            "n": 2048,
            "classes": [{"users": 8, "section_bits": 8, "sections": 16, "rate": "1/2",
                         "sensing_seed": 1, "graph_seed": 2}],
            "binning": {"bins": 2},
            "ebno_db": 2.0,
            "seed": 4
        }"#,
    )?;
    let result = sweep(&sc, Axis::Ebno, &[1.0, 2.0, 3.0, 4.0], 20, None)?;
    print!("{}", result.to_csv());

    let system = System::new(&sc)?;
    let mut oracle = SimulationOracle {
        system: &system,
        trials: 20,
        seed: sc.seed,
        threads: None,
    };
    let t = find_threshold(&mut oracle, 0.1, 0.0, 6.0, 0.25)?;
    println!(
        "PUPE 0.1 crossed between {:.2} and {:.2} dB ({} evaluations)",
        t.lower,
        t.upper,
        t.evaluations.len()
    );
    Ok(())
}
