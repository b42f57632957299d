//! Outer code tour: field arithmetic, graph construction, systematic
//! encoding and belief propagation cleaning up a noisy codeword.
//!
//! Run with `cargo run --example outer_code`.

use coded_demixing::gf;
use coded_demixing::outer_code::{build_graph, encode, info_bits_of, BeliefPropagation, Rate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> coded_demixing::Result<()> {
    let bits = 8;
    let field = gf::tables(bits)?;
    let (a, b) = (0x57, 0x83);
    println!(
        "GF(2^{bits}): {a:#04x} * {b:#04x} = {:#04x}, inverse of {a:#04x} = {:#04x}",
        field.mul(a, b),
        field.inv(a).unwrap()
    );

    let graph = build_graph(16, bits, Rate::new(1, 2)?, 7)?;
    println!(
        "graph: {} sections, {} information bits, {} checks, girth {:?}",
        graph.num_sections(),
        graph.info_bits(),
        graph.checks().len(),
        graph.girth()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let message: Vec<bool> = (0..graph.info_bits()).map(|_| rng.random()).collect();
    let codeword: Vec<u32> = encode(&graph, &message)?
        .into_iter()
        .map(|s| s.value())
        .collect();
    println!("codeword symbols: {codeword:?}");

    // Local evidence: the true symbol gets most of the mass in most
    // sections, but three sections point somewhere else entirely.
    let m = graph.section_size();
    let mut locals = vec![0.0; graph.num_sections() * m];
    for (l, &sym) in codeword.iter().enumerate() {
        let sec = &mut locals[l * m..(l + 1) * m];
        sec.iter_mut().for_each(|x| *x = rng.random::<f64>() * 0.02);
        let peak = if [2, 9, 13].contains(&l) {
            (sym as usize + 1 + rng.random_range(0..m - 1)) % m
        } else {
            sym as usize
        };
        sec[peak] += 1.0;
        sec[sym as usize] += 0.3;
    }
    let hard = |bp: &BeliefPropagation| -> Vec<u32> {
        let mut post = vec![0.0; m];
        (0..graph.num_sections())
            .map(|l| {
                bp.posterior_into(l, &mut post);
                post.iter()
                    .enumerate()
                    .max_by(|x, y| x.1.total_cmp(y.1))
                    .map(|(i, _)| i as u32)
                    .unwrap()
            })
            .collect()
    };
    let mut bp = BeliefPropagation::new(&graph);
    bp.reset(&locals);
    let before = hard(&bp);
    let wrong = |w: &[u32]| w.iter().zip(&codeword).filter(|(a, b)| a != b).count();
    println!(
        "before BP: {} wrong sections, codeword: {}",
        wrong(&before),
        graph.is_codeword(&before)
    );
    for round in 1..=5 {
        bp.round();
        let now = hard(&bp);
        println!(
            "round {round}: {} wrong sections, codeword: {}",
            wrong(&now),
            graph.is_codeword(&now)
        );
    }
    let decoded = info_bits_of(&graph, &hard(&bp));
    println!("message recovered: {}", decoded == message);
    Ok(())
}
