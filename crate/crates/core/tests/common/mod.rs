//! Independent oracles shared by the integration tests and the acceptance
//! run: brute-force field and BP arithmetic, an explicitly assembled sensing
//! matrix and finite-difference divergence.

#![allow(dead_code)]

use coded_demixing::access::{run_receiver, Received, ReceiverMode, Scenario, System};
use coded_demixing::amp::{
    dynamic_denoise, onsager_divergence, pme, pme_derivative, DynamicDenoiser,
};
use coded_demixing::gf::{self, FieldElement};
use coded_demixing::outer_code::{
    build_graph, check_to_variable, encode_symbols, CheckNode, FactorGraph, Rate, SectionPmf,
};
use coded_demixing::sensing::{SensingKind, SensingOperator, SensingSpec};
use coded_demixing::SectionedVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Shift-and-add multiplication modulo the field polynomial.
pub fn slow_mul(a: u32, b: u32, bits: u32) -> u32 {
    let poly = gf::primitive_polynomial(bits).unwrap();
    let (mut a, mut b, mut acc) = (a, b, 0u32);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> bits & 1 == 1 {
            a ^= poly;
        }
    }
    acc
}

/// Direct enumeration of every assignment of the other neighbors.
pub fn brute_force_message(
    check: &CheckNode,
    target_pos: usize,
    incoming: &[Vec<f64>],
) -> Vec<f64> {
    let bits = check.coefficients[0].bits();
    let m = 1usize << bits;
    let others: Vec<usize> = (0..check.degree()).filter(|&p| p != target_pos).collect();
    let mut out = vec![0.0; m];
    let combos = m.pow(others.len() as u32);
    for code in 0..combos {
        let mut rest = code;
        let mut weight = 1.0;
        let mut sum = 0u32;
        for (j, &p) in others.iter().enumerate() {
            let x = (rest % m) as u32;
            rest /= m;
            weight *= incoming[j][x as usize];
            sum ^= slow_mul(check.coefficients[p].value(), x, bits);
        }
        // c_t x_t = sum, so x_t = c_t^{-1} sum; find it by search
        let ct = check.coefficients[target_pos].value();
        let xt = (0..m as u32)
            .find(|&x| slow_mul(ct, x, bits) == sum)
            .unwrap();
        out[xt as usize] += weight;
    }
    out
}

pub fn random_pmf(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>().powi(3)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Row-major `n x (L 2^v)` matrix from the selected rows and columns.
pub fn assemble(op: &SensingOperator) -> Vec<Vec<f64>> {
    let n = op.n();
    let scale = 1.0 / (n as f64).sqrt();
    let mut a = vec![vec![0.0; op.num_columns()]; n];
    for l in 0..op.sections() {
        let rows = op.selected_rows(l).unwrap();
        let cols = op.selected_columns(l).unwrap();
        for (i, &r) in rows.iter().enumerate() {
            for (k, &c) in cols.iter().enumerate() {
                let parity = (r & c).count_ones() & 1;
                a[i][l * op.section_size() + k] = if parity == 0 { scale } else { -scale };
            }
        }
    }
    a
}

pub fn integer_state(
    rng: &mut ChaCha8Rng,
    sections: usize,
    v: u32,
    density: f64,
) -> SectionedVector {
    let data = (0..sections << v)
        .map(|_| {
            if rng.random::<f64>() < density {
                rng.random_range(-3i32..=3) as f64
            } else {
                0.0
            }
        })
        .collect();
    SectionedVector::from_vec(sections, v, data).unwrap()
}

pub fn adjoint_gap(op: &SensingOperator, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = SectionedVector::from_vec(
        op.sections(),
        op.bits(),
        (0..op.num_columns())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap();
    let z: Vec<f64> = (0..op.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ax = op.forward(&x).unwrap();
    let atz = op.adjoint(&z).unwrap();
    let lhs: f64 = ax.iter().zip(&z).map(|(a, b)| a * b).sum();
    let rhs = x.dot(&atz);
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
}

pub fn small_graphs() -> Vec<FactorGraph> {
    vec![
        build_graph(3, 3, Rate::new(1, 3).unwrap(), 1).unwrap(),
        build_graph(3, 3, Rate::new(2, 3).unwrap(), 2)
            .unwrap()
            .with_random_coefficients(3),
    ]
}

pub fn random_observation(
    rng: &mut ChaCha8Rng,
    graph: &FactorGraph,
    d: f64,
    tau: f64,
    users: usize,
) -> SectionedVector {
    let mut r = SectionedVector::zeros(graph.num_sections(), graph.section_bits());
    let m = graph.section_size() as u32;
    for _ in 0..users {
        let info: Vec<u32> = (0..graph.info_sections())
            .map(|_| rng.random_range(0..m))
            .collect();
        for (l, &k) in encode_symbols(graph, &info).unwrap().iter().enumerate() {
            let cur = r.get(l, k as usize);
            r.set(l, k as usize, cur + d);
        }
    }
    for x in r.as_mut_slice() {
        let e: f64 = StandardNormal.sample(rng);
        *x += tau * e;
    }
    r
}

pub fn denoise(
    graph: &FactorGraph,
    r: &SectionedVector,
    d: f64,
    users: usize,
    tau: f64,
) -> Vec<f64> {
    let mut state = vec![0.0; r.len()];
    let mut priors = vec![0.0; r.len()];
    DynamicDenoiser::new(graph, true).denoise(r.as_slice(), d, users, tau, &mut state, &mut priors);
    state
}

/// Largest absolute gap between FFT-domain check messages and enumeration
/// over `draws` random checks with `v <= 4`, degree 2 to 4 and random
/// nonzero coefficients.
pub fn check_message_worst_error(draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for trial in 0..draws {
        let bits = 1 + trial % 4;
        let m = 1usize << bits;
        let degree = 2 + trial % 3;
        let coefficients: Vec<FieldElement> = (0..degree)
            .map(|_| FieldElement::new(rng.random_range(1..m as u32), bits as u32).unwrap())
            .collect();
        let check = CheckNode {
            sections: (0..degree).collect(),
            coefficients,
        };
        let target = rng.random_range(0..degree);
        let incoming: Vec<Vec<f64>> = (0..degree - 1).map(|_| random_pmf(&mut rng, m)).collect();
        let pmfs: Vec<SectionPmf> = incoming
            .iter()
            .map(|w| SectionPmf::new(w.clone()).unwrap())
            .collect();
        let fast = check_to_variable(&check, target, &pmfs).unwrap();
        let slow = brute_force_message(&check, target, &incoming);
        for (a, b) in fast.weights().iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Worst relative gap between the PME derivative and central differences.
pub fn pme_derivative_worst_error(draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let q: f64 = rng.random_range(1e-4..1.0 - 1e-4);
        let tau = rng.random_range(0.2..5.0);
        let d = rng.random_range(0.1..10.0);
        // keep the posterior away from saturation so the derivative is not
        // dominated by rounding
        let e: f64 = StandardNormal.sample(&mut rng);
        let r = d / 2.0 + tau * tau / d * ((1.0 - q) / q).ln() + e * tau * tau / d;
        let h = 1e-5 * tau * tau / d;
        let fd = (pme(q, r + h, d, tau) - pme(q, r - h, d, tau)) / (2.0 * h);
        let exact = pme_derivative(q, r, d, tau);
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    worst
}

/// Worst relative gap between the closed-form Onsager divergence and the
/// finite-difference divergence of the full denoiser, two groups on small
/// graphs, over `states` random observations.
pub fn divergence_worst_error(states: usize, seed: u64) -> f64 {
    let graphs = small_graphs();
    let amplitudes = [2.5, 1.7];
    let users = [2usize, 3];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..states {
        let tau = rng.random_range(0.6..1.5);
        let obs: Vec<SectionedVector> = graphs
            .iter()
            .zip(amplitudes)
            .zip(users)
            .map(|((g, d), k)| random_observation(&mut rng, g, d, tau, k))
            .collect();
        let est: Vec<SectionedVector> = graphs
            .iter()
            .zip(&obs)
            .enumerate()
            .map(|(i, (g, r))| {
                dynamic_denoise(g, r, amplitudes[i], users[i], tau)
                    .unwrap()
                    .state
            })
            .collect();
        let closed = onsager_divergence(&est, &amplitudes, tau);

        let mut numeric = 0.0;
        for (i, g) in graphs.iter().enumerate() {
            let d = amplitudes[i];
            for j in 0..obs[i].len() {
                let h = 1e-6 * tau;
                let mut plus = obs[i].clone();
                plus.as_mut_slice()[j] += h;
                let mut minus = obs[i].clone();
                minus.as_mut_slice()[j] -= h;
                let up = denoise(g, &plus, d, users[i], tau)[j];
                let down = denoise(g, &minus, d, users[i], tau)[j];
                numeric += d * (up - down) / (2.0 * h);
            }
        }
        worst = worst.max((closed - numeric).abs() / numeric.abs());
    }
    worst
}

/// Whether the fast Hadamard paths equal the dense matrix exactly for every
/// `v <= max_bits`. With `n` a power of four the scale `1/sqrt(n)` is a
/// power of two, so integer inputs make every path exact.
pub fn hadamard_matches_dense(max_bits: u32, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in 1..=max_bits {
        for n in [16usize, 64, 256] {
            let op = SensingOperator::new(SensingSpec {
                kind: SensingKind::Hadamard,
                n,
                v,
                sections: 3,
                seed: v as u64 * 31 + n as u64,
            })
            .unwrap();
            let a = assemble(&op);
            // very sparse inputs take the direct path, dense ones the transform
            for density in [0.02, 0.3, 1.0] {
                let x = integer_state(&mut rng, 3, v, density);
                let y = op.forward(&x).unwrap();
                for (i, row) in a.iter().enumerate() {
                    let want: f64 = row.iter().zip(x.as_slice()).map(|(p, q)| p * q).sum();
                    if y[i] != want {
                        return false;
                    }
                }
                let z: Vec<f64> = (0..n).map(|_| rng.random_range(-4i32..=4) as f64).collect();
                let back = op.adjoint(&z).unwrap();
                for (j, &got) in back.as_slice().iter().enumerate() {
                    let want: f64 = (0..n).map(|i| a[i][j] * z[i]).sum();
                    if got != want {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Desk-scale single-class scenario with `bins` bins and `users` users.
pub fn desk_scenario(bins: usize, users: usize) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{
            "n": 2048,
            "classes": [{{"users": {users}, "section_bits": 8, "sections": 8, "rate": "1/2",
                         "sensing_seed": 10, "graph_seed": 20}}],
            "binning": {{"bins": {bins}}},
            "ebno_db": 6.0,
            "noise": false
        }}"#
    ))
    .unwrap()
}

/// A random message whose leading bits select `bin`.
pub fn message_in_bin(rng: &mut ChaCha8Rng, sys: &System, bin: usize) -> Vec<bool> {
    let w = sys.groups()[0].message_bits;
    let sel = sys.scenario().binning.select_bits();
    let mut msg: Vec<bool> = (0..w).map(|_| rng.random()).collect();
    for (i, bit) in msg.iter_mut().take(sel).enumerate() {
        *bit = (bin >> (sel - 1 - i)) & 1 == 1;
    }
    msg
}

/// Noiseless transmission of one user in every bin; returns how many of
/// the `seeds` trials recovered exactly the sent messages.
pub fn noiseless_round_trips(bins: usize, seeds: u64) -> u64 {
    let sys = System::new(&desk_scenario(bins, bins)).unwrap();
    let mut ok = 0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sent: Vec<Vec<bool>> = (0..bins)
            .map(|b| message_in_bin(&mut rng, &sys, b))
            .collect();
        let codewords: Vec<(usize, Vec<u32>)> =
            sent.iter().map(|m| sys.codeword(0, m).unwrap()).collect();
        let rx = Received {
            y: sys.superimpose(&codewords),
            y_binid: sys.binid_amplitude().map_or(Vec::new(), |a| vec![a; bins]),
        };
        let out = run_receiver(&sys, &rx, ReceiverMode::CodedDemixing, false, None).unwrap();
        let mut got: Vec<Vec<bool>> = out
            .decoded
            .entries
            .iter()
            .map(|e| e.message.clone())
            .collect();
        got.sort();
        sent.sort();
        let bins_agree = out
            .decoded
            .entries
            .iter()
            .all(|e| e.bin == sys.bin_of(&e.message));
        if got == sent && out.occupancy == vec![1; bins] && bins_agree {
            ok += 1;
        }
    }
    ok
}
