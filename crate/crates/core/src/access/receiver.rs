//! Receivers: joint coded demixing (optionally with one outer SIC pass) and
//! the per-group TIN and two-stage SIC baselines.

use serde::Serialize;

use super::config::{OccupancyEstimator, ReceiverMode};
use super::occupancy::{estimate_occupancy, OccupancyEstimate};
use super::transmit::System;
use crate::amp::{amp_decode, IterationRecord};
use crate::error::{Error, Result};
use crate::extraction::{
    extract_group_with_stats, merge_and_truncate, sort_entries, Candidate, DecodedEntry,
    DecodedList, ExtractionStats, GroupCandidates,
};
use crate::outer_code::FactorGraph;

/// Fraction of the list kept in the first pass of the outer SIC loop.
pub const SIC_KEEP_FRACTION: f64 = 0.7;

/// Channel observation: payload samples and bin identification samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub y: Vec<f64>,
    pub y_binid: Vec<f64>,
}

/// Diagnostics of one AMP run.
#[derive(Debug, Clone, Serialize)]
pub struct AmpRun {
    pub groups: Vec<usize>,
    pub users: Vec<usize>,
    pub tau_trace: Vec<f64>,
    pub diverged: bool,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReceiverOutput {
    pub decoded: DecodedList,
    /// Users assumed per group in the first pass.
    pub occupancy: Vec<usize>,
    pub amp_runs: Vec<AmpRun>,
    pub extraction: ExtractionStats,
    /// Parity-consistent candidates dropped because their leading bits named another bin.
    pub bin_pruned: usize,
}

struct Pass {
    lists: Vec<(usize, Vec<Candidate>)>,
}

/// Decodes `y` with the configured receiver.
///
/// `true_counts` (users per group) is only consulted by the oracle
/// occupancy estimator.
pub fn run_receiver(
    system: &System,
    rx: &Received,
    mode: ReceiverMode,
    sic_outer: bool,
    true_counts: Option<&[usize]>,
) -> Result<ReceiverOutput> {
    let sc = system.scenario();
    if rx.y.len() != sc.n {
        return Err(Error::DimensionMismatch {
            expected: sc.n,
            actual: rx.y.len(),
        });
    }
    if mode == ReceiverMode::Sic && system.num_groups() != 2 {
        return Err(Error::Config(
            "the sic baseline needs exactly two groups".into(),
        ));
    }
    if sic_outer && mode != ReceiverMode::CodedDemixing {
        return Err(Error::Config(
            "outer SIC applies to coded demixing only".into(),
        ));
    }
    let occupancy = group_occupancy(system, rx, true_counts)?;
    let list_sizes = class_list_sizes(system, &occupancy);
    let mut out = ReceiverOutput {
        decoded: DecodedList::default(),
        occupancy: occupancy.clone(),
        amp_runs: Vec::new(),
        extraction: ExtractionStats::default(),
        bin_pruned: 0,
    };
    let all: Vec<usize> = (0..system.num_groups()).collect();

    let entries = match mode {
        ReceiverMode::CodedDemixing => {
            let pass = decode_pass(system, &rx.y, &all, &occupancy, &mut out)?;
            let first = merge_by_class(system, &pass, &list_sizes);
            if !sic_outer {
                first
            } else {
                outer_sic(system, rx, first, &occupancy, &list_sizes, &mut out)?
            }
        }
        ReceiverMode::Tin => {
            let mut lists = Vec::new();
            for &g in &all {
                let pass = decode_pass(system, &rx.y, &[g], &occupancy, &mut out)?;
                lists.extend(pass.lists);
            }
            merge_by_class(system, &Pass { lists }, &list_sizes)
        }
        ReceiverMode::Sic => {
            let first = decode_pass(system, &rx.y, &[0], &occupancy, &mut out)?;
            let decoded0 = merge_by_class(system, &first, &list_sizes);
            let residual = subtract(system, &rx.y, &decoded0)?;
            let second = decode_pass(system, &residual, &[1], &occupancy, &mut out)?;
            let mut entries = decoded0;
            entries.extend(merge_by_class(system, &second, &list_sizes));
            entries
        }
    };
    let mut entries = entries;
    sort_entries(&mut entries);
    out.decoded = DecodedList { entries };
    Ok(out)
}

fn group_occupancy(system: &System, rx: &Received, truth: Option<&[usize]>) -> Result<Vec<usize>> {
    let sc = system.scenario();
    if !sc.binning.sends_binid() {
        return Ok(system
            .groups()
            .iter()
            .map(|g| sc.classes[g.class].users)
            .collect());
    }
    let est = match sc.binning.occupancy_estimator {
        OccupancyEstimator::Oracle => {
            let t = truth.ok_or_else(|| {
                Error::Config("oracle occupancy needs the true per-group counts".into())
            })?;
            OccupancyEstimate::from_counts(t.to_vec())
        }
        method => {
            let k = sc.known_k.then(|| sc.classes[0].users);
            let a = system.binid_amplitude().expect("binning sends a bin ID");
            estimate_occupancy(&rx.y_binid, k, a, method)?
        }
    };
    Ok(est.per_bin)
}

// Output list size per class: K when known, otherwise the estimate.
fn class_list_sizes(system: &System, occupancy: &[usize]) -> Vec<usize> {
    let sc = system.scenario();
    sc.classes
        .iter()
        .enumerate()
        .map(|(c, class)| {
            if sc.known_k {
                class.users
            } else {
                system
                    .groups()
                    .iter()
                    .filter(|g| g.class == c)
                    .map(|g| occupancy[g.id])
                    .sum()
            }
        })
        .collect()
}

/// Joint AMP over `groups`, then extraction and bin pruning per group.
/// Groups assumed empty are decoded jointly but not extracted.
fn decode_pass(
    system: &System,
    y: &[f64],
    groups: &[usize],
    users: &[usize],
    out: &mut ReceiverOutput,
) -> Result<Pass> {
    let sc = system.scenario();
    let op = system.stacked(groups)?;
    let graphs: Vec<&FactorGraph> = groups.iter().map(|&g| system.graph(g)).collect();
    let k: Vec<usize> = groups.iter().map(|&g| users[g]).collect();
    let amp = amp_decode(y, &op, &graphs, &k, &sc.amp)?;
    out.amp_runs.push(AmpRun {
        groups: groups.to_vec(),
        users: k.clone(),
        tau_trace: amp.tau_trace.clone(),
        diverged: amp.diverged,
        records: amp.records.clone(),
    });
    let select = sc.binning.select_bits();
    let mut lists = Vec::with_capacity(groups.len());
    for (i, &g) in groups.iter().enumerate() {
        if k[i] == 0 {
            lists.push((g, Vec::new()));
            continue;
        }
        let graph = system.graph(g);
        let (mut cands, stats) =
            extract_group_with_stats(&amp.states[i], graph, k[i], &sc.extraction)?;
        out.extraction.roots += stats.roots;
        out.extraction.inconsistent += stats.inconsistent;
        out.extraction.duplicates += stats.duplicates;
        let bin = system.groups()[g].bin;
        let before = cands.len();
        cands.retain(|c| leading_value(&c.codeword, graph.section_bits(), select) == bin);
        out.bin_pruned += before - cands.len();
        lists.push((g, cands));
    }
    Ok(Pass { lists })
}

// Integer value of the first `bits` message bits of a codeword.
fn leading_value(codeword: &[u32], v: u32, bits: usize) -> usize {
    let mut acc = 0usize;
    let mut taken = 0;
    for &sym in codeword {
        for b in (0..v).rev() {
            if taken == bits {
                return acc;
            }
            acc = (acc << 1) | ((sym >> b) & 1) as usize;
            taken += 1;
        }
    }
    acc
}

fn merge_by_class(system: &System, pass: &Pass, sizes: &[usize]) -> Vec<DecodedEntry> {
    let mut entries = Vec::new();
    for (c, &size) in sizes.iter().enumerate() {
        let lists: Vec<GroupCandidates> = pass
            .lists
            .iter()
            .filter(|(g, _)| system.groups()[*g].class == c)
            .map(|(g, cands)| GroupCandidates {
                group: *g,
                class: c,
                bin: system.groups()[*g].bin,
                graph: system.graph(*g),
                candidates: cands,
            })
            .collect();
        if !lists.is_empty() {
            entries.extend(merge_and_truncate(&lists, size).entries);
        }
    }
    entries
}

/// `y` minus the re-encoded contribution of every decoded entry.
fn subtract(system: &System, y: &[f64], entries: &[DecodedEntry]) -> Result<Vec<f64>> {
    let codewords = entries
        .iter()
        .map(|e| system.codeword(e.class, &e.message))
        .collect::<Result<Vec<_>>>()?;
    let est = system.superimpose(&codewords);
    Ok(y.iter().zip(&est).map(|(a, b)| a - b).collect())
}

fn outer_sic(
    system: &System,
    rx: &Received,
    first: Vec<DecodedEntry>,
    occupancy: &[usize],
    sizes: &[usize],
    out: &mut ReceiverOutput,
) -> Result<Vec<DecodedEntry>> {
    let classes = sizes.len();
    let mut kept = Vec::new();
    for (c, &size) in sizes.iter().enumerate() {
        let keep = (SIC_KEEP_FRACTION * size as f64).ceil() as usize;
        kept.extend(first.iter().filter(|e| e.class == c).take(keep).cloned());
    }
    let residual = subtract(system, &rx.y, &kept)?;
    let mut remaining = occupancy.to_vec();
    for e in &kept {
        remaining[e.group] = remaining[e.group].saturating_sub(1);
    }
    let all: Vec<usize> = (0..system.num_groups()).collect();
    let mut pass = decode_pass(system, &residual, &all, &remaining, out)?;
    for (g, cands) in &mut pass.lists {
        let graph = system.graph(*g);
        cands.retain(|cand| {
            let msg = crate::outer_code::info_bits_of(graph, &cand.codeword);
            !kept.iter().any(|e| e.group == *g && e.message == msg)
        });
    }
    let rest_sizes: Vec<usize> = (0..classes)
        .map(|c| sizes[c].saturating_sub(kept.iter().filter(|e| e.class == c).count()))
        .collect();
    let mut entries = kept;
    entries.extend(merge_by_class(system, &pass, &rest_sizes));
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_bits_across_sections() {
        // v = 3: symbols 0b101, 0b110 -> bits 1 0 1 1 1 0
        assert_eq!(leading_value(&[5, 6], 3, 0), 0);
        assert_eq!(leading_value(&[5, 6], 3, 1), 1);
        assert_eq!(leading_value(&[5, 6], 3, 2), 2);
        assert_eq!(leading_value(&[5, 6], 3, 4), 0b1011);
    }
}
