use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real vector of `sections * 2^bits` entries addressed by (section, index).
///
/// Used for AMP states, effective observations, priors and sparse messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionedVector {
    sections: usize,
    bits: u32,
    data: Vec<f64>,
}

impl SectionedVector {
    pub fn zeros(sections: usize, bits: u32) -> Self {
        SectionedVector {
            sections,
            bits,
            data: vec![0.0; sections << bits],
        }
    }

    pub fn filled(sections: usize, bits: u32, value: f64) -> Self {
        SectionedVector {
            sections,
            bits,
            data: vec![value; sections << bits],
        }
    }

    pub fn from_vec(sections: usize, bits: u32, data: Vec<f64>) -> Result<Self> {
        let expected = sections << bits;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(SectionedVector {
            sections,
            bits,
            data,
        })
    }

    /// The 1-sparse-per-section indicator of a codeword: entry `(l, symbols[l])` is one.
    pub fn indicator(bits: u32, symbols: &[u32]) -> Self {
        let mut v = Self::zeros(symbols.len(), bits);
        for (l, &k) in symbols.iter().enumerate() {
            v.section_mut(l)[k as usize] = 1.0;
        }
        v
    }

    pub fn sections(&self) -> usize {
        self.sections
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn section_len(&self) -> usize {
        1 << self.bits
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn section(&self, l: usize) -> &[f64] {
        let m = self.section_len();
        &self.data[l * m..(l + 1) * m]
    }

    pub fn section_mut(&mut self, l: usize) -> &mut [f64] {
        let m = self.section_len();
        &mut self.data[l * m..(l + 1) * m]
    }

    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.data[(l << self.bits) + k]
    }

    pub fn set(&mut self, l: usize, k: usize, value: f64) {
        self.data[(l << self.bits) + k] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.sections == other.sections && self.bits == other.bits
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) {
        assert!(self.same_shape(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_l1(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Index of the largest entry in section `l` (first on ties).
    pub fn argmax(&self, l: usize) -> usize {
        argmax(self.section(l))
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_places_ones() {
        let v = SectionedVector::indicator(3, &[5, 0, 7]);
        assert_eq!(v.len(), 24);
        assert_eq!(v.get(0, 5), 1.0);
        assert_eq!(v.get(1, 0), 1.0);
        assert_eq!(v.get(2, 7), 1.0);
        assert_eq!(v.norm_l1(), 3.0);
        assert_eq!(v.argmax(2), 7);
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(SectionedVector::from_vec(2, 3, vec![0.0; 15]).is_err());
    }
}
