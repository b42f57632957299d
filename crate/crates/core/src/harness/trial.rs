//! One Monte-Carlo trial: draw messages, synthesize the channel, decode, score.

use std::collections::HashSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::access::{run_receiver, Received, ReceiverOutput, System};
use crate::error::Result;

/// Seed of trial `index` under `master`: the first word of ChaCha8 keyed by
/// `master` on stream `index`. Independent of how trials are scheduled.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Per-class error counts of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub sent: usize,
    pub missed: usize,
    pub recovered: usize,
    pub false_alarms: usize,
}

impl ClassCounts {
    pub fn add(&mut self, other: &ClassCounts) {
        self.sent += other.sent;
        self.missed += other.missed;
        self.recovered += other.recovered;
        self.false_alarms += other.false_alarms;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    /// Messages sent, per class.
    pub sent: Vec<Vec<Vec<bool>>>,
    /// True number of users per group.
    pub true_counts: Vec<usize>,
    pub counts: Vec<ClassCounts>,
    /// Duplicate messages redrawn while sampling.
    pub duplicate_redraws: usize,
    pub receiver: ReceiverOutput,
}

impl TrialOutcome {
    pub fn total(&self) -> ClassCounts {
        let mut t = ClassCounts::default();
        self.counts.iter().for_each(|c| t.add(c));
        t
    }

    pub fn diverged(&self) -> bool {
        self.receiver.amp_runs.iter().any(|r| r.diverged)
    }
}

/// Runs a full trial with the receiver configured in the system's scenario.
pub fn run_trial(system: &System, seed: u64) -> Result<TrialOutcome> {
    let sc = system.scenario();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sent = Vec::with_capacity(sc.classes.len());
    let mut codewords = Vec::new();
    let mut true_counts = vec![0usize; system.num_groups()];
    let mut duplicate_redraws = 0;
    for (c, class) in sc.classes.iter().enumerate() {
        let w = class.message_bits()?;
        let mut seen = HashSet::with_capacity(class.users);
        let mut msgs = Vec::with_capacity(class.users);
        while msgs.len() < class.users {
            let msg: Vec<bool> = (0..w).map(|_| rng.random()).collect();
            if !seen.insert(msg.clone()) {
                duplicate_redraws += 1;
                continue;
            }
            let (g, cw) = system.codeword(c, &msg)?;
            true_counts[g] += 1;
            codewords.push((g, cw));
            msgs.push(msg);
        }
        sent.push(msgs);
    }

    let mut y = system.superimpose(&codewords);
    let mut y_binid = Vec::new();
    if let Some(a) = system.binid_amplitude() {
        y_binid = (0..system.bins())
            .map(|b| a * true_counts[b] as f64)
            .collect();
    }
    if sc.noise {
        for x in y.iter_mut().chain(y_binid.iter_mut()) {
            let e: f64 = StandardNormal.sample(&mut rng);
            *x += e;
        }
    }

    let receiver = run_receiver(
        system,
        &Received { y, y_binid },
        sc.mode,
        sc.sic_outer,
        Some(&true_counts),
    )?;

    let counts = sent
        .iter()
        .enumerate()
        .map(|(c, msgs)| {
            let truth: HashSet<&Vec<bool>> = msgs.iter().collect();
            let mine: Vec<_> = receiver
                .decoded
                .entries
                .iter()
                .filter(|e| e.class == c)
                .collect();
            let hits = mine.iter().filter(|e| truth.contains(&e.message)).count();
            ClassCounts {
                sent: msgs.len(),
                missed: msgs.len() - hits,
                recovered: mine.len(),
                false_alarms: mine.len() - hits,
            }
        })
        .collect();

    Ok(TrialOutcome {
        seed,
        sent,
        true_counts,
        counts,
        duplicate_redraws,
        receiver,
    })
}
