//! Hadamard-based sensing operators: forward and adjoint products through
//! the fast transform, checked against the explicit matrix.
//!
//! Run with `cargo run --release --example sensing`.

use std::time::Instant;

use coded_demixing::sensing::{SensingKind, SensingOperator, SensingSpec};
use coded_demixing::SectionedVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> coded_demixing::Result<()> {
    let spec = SensingSpec {
        kind: SensingKind::Hadamard,
        n: 2000,
        v: 10,
        sections: 16,
        seed: 42,
    };
    let op = SensingOperator::new(spec)?;
    println!(
        "operator {} x {} built from a {}-point transform",
        op.n(),
        op.num_columns(),
        op.transform_size().unwrap()
    );

    // a sparse index vector: one active column per section
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut x = SectionedVector::zeros(op.sections(), op.bits());
    for l in 0..op.sections() {
        x.set(l, rng.random_range(0..op.section_size()), 1.0);
    }
    let t = Instant::now();
    let y = op.forward(&x)?;
    let z: Vec<f64> = (0..op.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let back = op.adjoint(&z)?;
    println!(
        "forward + adjoint in {:.2} ms",
        t.elapsed().as_secs_f64() * 1e3
    );

    let lhs: f64 = y.iter().zip(&z).map(|(a, b)| a * b).sum();
    let rhs = x.dot(&back);
    println!("<Ax, z> = {lhs:.12}, <x, A^T z> = {rhs:.12}");

    let dense = op.to_dense();
    let worst = (0..op.n())
        .map(|i| {
            let want: f64 = dense[i].iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
            (want - y[i]).abs()
        })
        .fold(0.0, f64::max);
    println!("largest gap to the dense product: {worst:.2e}");
    Ok(())
}
