//! Joint AMP over two groups that share the channel, followed by codeword
//! extraction on each group's outer graph.
//!
//! Run with `cargo run --release --example amp_decode`.

use coded_demixing::amp::{amp_decode, AmpConfig};
use coded_demixing::extraction::{extract_group, ExtractionConfig};
use coded_demixing::outer_code::{build_graph, encode_symbols, FactorGraph, Rate};
use coded_demixing::sensing::{SensingKind, SensingOperator, SensingSpec, StackedOperator};
use coded_demixing::SectionedVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> coded_demixing::Result<()> {
    let (n, v, sections, users) = (4096, 10, 16, 8);
    let graphs = [
        build_graph(sections, v, Rate::new(1, 2)?, 1)?,
        build_graph(sections, v, Rate::new(3, 8)?, 2)?,
    ];
    let amplitude = 5.0;
    let ops = (0..2)
        .map(|g| {
            let spec = SensingSpec {
                kind: SensingKind::Hadamard,
                n,
                v,
                sections,
                seed: 10 + g,
            };
            Ok((SensingOperator::new(spec)?, amplitude))
        })
        .collect::<coded_demixing::Result<Vec<_>>>()?;
    let stacked = StackedOperator::new(ops)?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sent = Vec::new();
    let mut states = Vec::new();
    for g in &graphs {
        let mut s = SectionedVector::zeros(sections, v);
        let mut words = Vec::new();
        for _ in 0..users {
            let info: Vec<u32> = (0..g.info_sections())
                .map(|_| rng.random_range(0..1 << v))
                .collect();
            let cw = encode_symbols(g, &info)?;
            for (l, &k) in cw.iter().enumerate() {
                let cur = s.get(l, k as usize);
                s.set(l, k as usize, cur + 1.0);
            }
            words.push(cw);
        }
        sent.push(words);
        states.push(s);
    }
    let mut y = stacked.stacked_forward(&states)?;
    for x in &mut y {
        let e: f64 = StandardNormal.sample(&mut rng);
        *x += e;
    }

    let graph_refs: Vec<&FactorGraph> = graphs.iter().collect();
    let out = amp_decode(
        &y,
        &stacked,
        &graph_refs,
        &[users, users],
        &AmpConfig::default(),
    )?;
    let trace: Vec<String> = out.tau_trace.iter().map(|t| format!("{t:.3}")).collect();
    println!("tau trace: {}", trace.join(" "));

    for (g, graph) in graphs.iter().enumerate() {
        let cands = extract_group(&out.states[g], graph, users, &ExtractionConfig::default())?;
        let top: Vec<_> = cands.iter().take(users).collect();
        let hits = top.iter().filter(|c| sent[g].contains(&c.codeword)).count();
        println!(
            "group {g}: {} parity-consistent candidates, {hits}/{users} users in the top {users}",
            cands.len()
        );
    }
    Ok(())
}
