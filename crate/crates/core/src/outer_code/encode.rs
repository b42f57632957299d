use crate::error::{Error, Result};
use crate::gf::{self, FieldElement};

use super::graph::FactorGraph;

/// Packs `bits.len() / v` big-endian fragments of `v` bits each into symbols.
pub fn bits_to_symbols(bits: &[bool], v: u32) -> Vec<u32> {
    bits.chunks(v as usize)
        .map(|chunk| chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .collect()
}

/// Inverse of [`bits_to_symbols`].
pub fn symbols_to_bits(symbols: &[u32], v: u32) -> Vec<bool> {
    symbols
        .iter()
        .flat_map(|&s| (0..v).rev().map(move |b| (s >> b) & 1 == 1))
        .collect()
}

/// Systematic encoding of `info` (exactly `kappa * v` bits).
pub fn encode(graph: &FactorGraph, info: &[bool]) -> Result<Vec<FieldElement>> {
    if info.len() != graph.info_bits() {
        return Err(Error::LengthMismatch {
            expected: graph.info_bits(),
            actual: info.len(),
        });
    }
    let v = graph.section_bits();
    let symbols = encode_symbols(graph, &bits_to_symbols(info, v))?;
    symbols
        .into_iter()
        .map(|s| FieldElement::new(s, v))
        .collect()
}

/// Systematic encoding on raw symbols: the first `kappa` entries are copied,
/// parity sections are solved check by check in encoding order.
pub fn encode_symbols(graph: &FactorGraph, info: &[u32]) -> Result<Vec<u32>> {
    if info.len() != graph.info_sections() {
        return Err(Error::LengthMismatch {
            expected: graph.info_sections(),
            actual: info.len(),
        });
    }
    let v = graph.section_bits();
    if let Some(&bad) = info.iter().find(|&&s| s >> v != 0) {
        return Err(Error::InvalidParameter(format!(
            "symbol {bad} does not fit in {v} bits"
        )));
    }
    let t = gf::tables(v)?;
    let mut word = vec![0u32; graph.num_sections()];
    word[..info.len()].copy_from_slice(info);
    for &a in graph.encoding_order() {
        let check = &graph.checks()[a];
        let parity = graph.parity_section_of(a);
        let mut acc = 0u32;
        let mut own = 1u32;
        for (&s, c) in check.sections.iter().zip(&check.coefficients) {
            if s == parity {
                own = c.value();
            } else {
                acc ^= t.mul(c.value(), word[s]);
            }
        }
        word[parity] = t.mul(t.inv(own).expect("nonzero coefficient"), acc);
    }
    Ok(word)
}

/// Information bits of a codeword (its first `kappa` sections).
pub fn info_bits_of(graph: &FactorGraph, codeword: &[u32]) -> Vec<bool> {
    symbols_to_bits(&codeword[..graph.info_sections()], graph.section_bits())
}
