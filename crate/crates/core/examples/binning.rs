//! Stochastic binning: users pick a bin from their leading message bits,
//! announce it on a short bin identification signal, and the receiver sizes
//! each bin's decoder from the estimated occupancy.
//!
//! Run with `cargo run --release --example binning`.

use coded_demixing::access::{estimate_occupancy, OccupancyEstimator, Scenario, System};
use coded_demixing::harness::run_trial;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> coded_demixing::Result<()> {
    let sc = Scenario::from_json(
        r#"{
            "n": 4096,
            "classes": [{"users": 24, "section_bits": 10, "sections": 16, "rate": "1/2",
                         "sensing_seed": 1, "graph_seed": 2}],
            "binning": {"bins": 4, "binid_power_fraction": 0.002, "occupancy_estimator": "lmmse"},
            "ebno_db": 5.0,
            "seed": 3
        }"#,
    )?;
    let system = System::new(&sc)?;
    println!(
        "{} bins, payload amplitude {:.3}, bin ID amplitude {:.3}",
        system.bins(),
        system.amplitude(0),
        system.binid_amplitude().unwrap()
    );

    // The estimators on their own: noisy bin-ID energies for known counts.
    let counts = [9usize, 4, 6, 5];
    let a = system.binid_amplitude().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let y: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let e: f64 = StandardNormal.sample(&mut rng);
            a * c as f64 + e
        })
        .collect();
    for method in [OccupancyEstimator::Round, OccupancyEstimator::Lmmse] {
        let est = estimate_occupancy(&y, Some(24), a, method)?;
        println!("{method:?}: true {counts:?}, estimated {:?}", est.per_bin);
    }

    for seed in 0..3 {
        let out = run_trial(&system, seed)?;
        let total = out.total();
        println!(
            "trial {seed}: users per bin {:?}, estimated {:?}, {} of {} messages missed",
            out.true_counts, out.receiver.occupancy, total.missed, total.sent
        );
    }
    Ok(())
}
