//! Turning final AMP states into message lists.
//!
//! Candidate roots are the largest entries of the first section. For every
//! root the first section is pinned to that index, the other sections start
//! from the normalized AMP output, and BP runs on the outer graph until the
//! per-section argmax is parity-consistent (or the round budget runs out).
//!
//! A consistent codeword is scored by the log of the normalized AMP output
//! at its indices, summed over sections. The BP posterior itself is a poor
//! score: once a check's other sections are pinned, the posterior of a parity
//! section collapses to one index whatever its own evidence says.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outer_code::{info_bits_of, BeliefPropagation, FactorGraph, WEIGHT_FLOOR};
use crate::sectioned::{argmax, SectionedVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    /// Extra roots beyond the expected number of users.
    pub delta: usize,
    /// Maximum BP rounds per root.
    pub bp_rounds: usize,
    /// Stop a root's BP as soon as the hard decisions satisfy every check.
    pub early_stop: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            delta: 10,
            bp_rounds: 10,
            early_stop: true,
        }
    }
}

/// A parity-consistent codeword with its log-likelihood score (`<= 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub codeword: Vec<u32>,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExtractionStats {
    pub roots: usize,
    pub inconsistent: usize,
    pub duplicates: usize,
}

/// Root-initialized BP extraction for one group; candidates are sorted by
/// decreasing score.
pub fn extract_group(
    state: &SectionedVector,
    graph: &FactorGraph,
    users: usize,
    cfg: &ExtractionConfig,
) -> Result<Vec<Candidate>> {
    extract_group_with_stats(state, graph, users, cfg).map(|(c, _)| c)
}

pub fn extract_group_with_stats(
    state: &SectionedVector,
    graph: &FactorGraph,
    users: usize,
    cfg: &ExtractionConfig,
) -> Result<(Vec<Candidate>, ExtractionStats)> {
    if state.sections() != graph.num_sections() || state.bits() != graph.section_bits() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_sections() * graph.section_size(),
            actual: state.len(),
        });
    }
    let m = graph.section_size();
    let num_roots = (users + cfg.delta).min(m);
    let mut stats = ExtractionStats::default();
    if num_roots == 0 {
        return Ok((Vec::new(), stats));
    }

    let mut locals = state.as_slice().to_vec();
    for sec in locals.chunks_exact_mut(m) {
        sec.iter_mut().for_each(|x| *x = x.max(0.0));
        let total: f64 = sec.iter().sum();
        if total > 0.0 && total.is_finite() {
            sec.iter_mut().for_each(|x| *x /= total);
        } else {
            sec.fill(1.0 / m as f64);
        }
    }

    let first = state.section(0);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| first[b].total_cmp(&first[a]).then(a.cmp(&b)));

    let mut bp = BeliefPropagation::new(graph);
    let mut root_local = vec![0.0; m];
    let mut posterior = vec![0.0; m];
    let mut word = vec![0u32; graph.num_sections()];
    let mut best: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut found: Vec<Vec<u32>> = Vec::new();

    for &root in &order[..num_roots] {
        stats.roots += 1;
        bp.reset(&locals);
        root_local.fill(0.0);
        root_local[root] = 1.0;
        bp.set_local(0, &root_local);
        let rounds = cfg.bp_rounds.max(1);
        let mut consistent = false;
        for round in 1..=rounds {
            bp.round();
            if !cfg.early_stop && round < rounds {
                continue;
            }
            for (l, w) in word.iter_mut().enumerate() {
                bp.posterior_into(l, &mut posterior);
                *w = argmax(&posterior) as u32;
            }
            consistent = graph.is_codeword(&word);
            if consistent {
                break;
            }
        }
        if !consistent {
            stats.inconsistent += 1;
            continue;
        }
        let score: f64 = word
            .iter()
            .enumerate()
            .map(|(l, &k)| locals[l * m + k as usize].max(WEIGHT_FLOOR).ln())
            .sum();
        match best.get_mut(&word) {
            Some(s) => {
                stats.duplicates += 1;
                if score > *s {
                    *s = score;
                }
            }
            None => {
                best.insert(word.clone(), score);
                found.push(word.clone());
            }
        }
    }

    let mut out: Vec<Candidate> = found
        .into_iter()
        .map(|codeword| {
            let score = best[&codeword];
            Candidate { codeword, score }
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.codeword.cmp(&b.codeword))
    });
    Ok((out, stats))
}

/// One recovered message with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedEntry {
    pub message: Vec<bool>,
    /// Index of the AMP group (one per class and bin).
    pub group: usize,
    pub class: usize,
    pub bin: usize,
    pub score: f64,
}

/// Recovered messages, sorted by decreasing score.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodedList {
    pub entries: Vec<DecodedEntry>,
}

impl DecodedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Candidates of one group together with what is needed to map them back
/// to messages.
#[derive(Debug, Clone, Copy)]
pub struct GroupCandidates<'a> {
    pub group: usize,
    pub class: usize,
    pub bin: usize,
    pub graph: &'a FactorGraph,
    pub candidates: &'a [Candidate],
}

fn entry_order(a: &DecodedEntry, b: &DecodedEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.group.cmp(&b.group))
        .then_with(|| a.message.cmp(&b.message))
}

/// Sorts by decreasing score, ties broken by group and then message.
pub fn sort_entries(entries: &mut [DecodedEntry]) {
    entries.sort_by(entry_order);
}

/// Global sort by score (ties broken by group, then message), deduplication
/// per (group, message), and truncation to `k` entries.
pub fn merge_and_truncate(lists: &[GroupCandidates], k: usize) -> DecodedList {
    let mut entries: Vec<DecodedEntry> = lists
        .iter()
        .flat_map(|gc| {
            gc.candidates.iter().map(move |c| DecodedEntry {
                message: info_bits_of(gc.graph, &c.codeword),
                group: gc.group,
                class: gc.class,
                bin: gc.bin,
                score: c.score,
            })
        })
        .collect();
    entries.sort_by(entry_order);
    let mut seen = std::collections::HashSet::new();
    entries.retain(|e| seen.insert((e.group, e.message.clone())));
    entries.truncate(k);
    DecodedList { entries }
}
