//! Built system (graphs and operators for every group) and user encoding.

use std::sync::Arc;

use serde::Serialize;

use super::config::{GroupConfig, Scenario};
use crate::error::{Error, Result};
use crate::outer_code::{bits_to_symbols, build_graph, encode_symbols, FactorGraph};
use crate::sectioned::SectionedVector;
use crate::sensing::{SensingOperator, SensingSpec, StackedOperator};

/// What a single user puts on the channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmitFrame {
    pub group: usize,
    pub codeword: Vec<u32>,
    /// `a e_g`; empty when no bin identification is sent.
    pub binid: Vec<f64>,
    /// `d_g A_g m` over the `n` payload channel uses.
    pub payload: Vec<f64>,
}

impl TransmitFrame {
    pub fn energy(&self) -> f64 {
        self.binid.iter().chain(&self.payload).map(|x| x * x).sum()
    }
}

/// Graphs, operators and amplitudes for a scenario.
#[derive(Debug, Clone)]
pub struct System {
    scenario: Scenario,
    groups: Vec<GroupConfig>,
    graphs: Vec<FactorGraph>,
    operators: Vec<Arc<SensingOperator>>,
    binid_amplitude: Option<f64>,
}

impl System {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let groups = scenario.groups()?;
        let mut graphs = Vec::with_capacity(groups.len());
        let mut operators = Vec::with_capacity(groups.len());
        for g in &groups {
            graphs.push(build_graph(
                g.sections,
                g.section_bits,
                g.rate,
                g.graph_seed,
            )?);
            operators.push(Arc::new(SensingOperator::new(SensingSpec {
                kind: scenario.sensing,
                n: scenario.n,
                v: g.section_bits,
                sections: g.sections,
                seed: g.sensing_seed,
            })?));
        }
        Ok(System {
            scenario: scenario.clone(),
            groups,
            graphs,
            operators,
            binid_amplitude: scenario.binid_amplitude(),
        })
    }

    /// Same graphs and operators, amplitudes recomputed for another `Eb/N0`.
    pub fn at_ebno(&self, ebno_db: f64) -> Result<Self> {
        let mut scenario = self.scenario.clone();
        scenario.ebno_db = ebno_db;
        let groups = scenario.groups()?;
        Ok(System {
            binid_amplitude: scenario.binid_amplitude(),
            scenario,
            groups,
            graphs: self.graphs.clone(),
            operators: self.operators.clone(),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn groups(&self) -> &[GroupConfig] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn graph(&self, g: usize) -> &FactorGraph {
        &self.graphs[g]
    }

    pub fn operator(&self, g: usize) -> &Arc<SensingOperator> {
        &self.operators[g]
    }

    pub fn amplitude(&self, g: usize) -> f64 {
        self.groups[g].amplitude
    }

    pub fn binid_amplitude(&self) -> Option<f64> {
        self.binid_amplitude
    }

    pub fn bins(&self) -> usize {
        self.scenario.binning.bins
    }

    /// Group index of `(class, bin)`.
    pub fn group_index(&self, class: usize, bin: usize) -> usize {
        class * self.bins() + bin
    }

    /// Bin selected by a message: the integer value of its first `log2 G` bits.
    pub fn bin_of(&self, message: &[bool]) -> usize {
        message[..self.scenario.binning.select_bits()]
            .iter()
            .fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// Joint operator over the given groups.
    pub fn stacked(&self, groups: &[usize]) -> Result<StackedOperator> {
        StackedOperator::new(
            groups
                .iter()
                .map(|&g| (self.operators[g].clone(), self.amplitude(g)))
                .collect(),
        )
    }

    /// Group and outer codeword of a class-`class` message.
    pub fn codeword(&self, class: usize, message: &[bool]) -> Result<(usize, Vec<u32>)> {
        let w = self.scenario.classes[class].message_bits()?;
        if message.len() != w {
            return Err(Error::LengthMismatch {
                expected: w,
                actual: message.len(),
            });
        }
        let g = self.group_index(class, self.bin_of(message));
        let graph = &self.graphs[g];
        let symbols = encode_symbols(graph, &bits_to_symbols(message, graph.section_bits()))?;
        Ok((g, symbols))
    }

    /// Full transmit chain for one user of class `class`.
    pub fn encode_user(&self, class: usize, message: &[bool]) -> Result<TransmitFrame> {
        let (g, codeword) = self.codeword(class, message)?;
        let op = &self.operators[g];
        let m = SectionedVector::indicator(op.bits(), &codeword);
        let mut payload = op.forward(&m)?;
        let d = self.amplitude(g);
        payload.iter_mut().for_each(|x| *x *= d);
        let binid = match self.binid_amplitude {
            Some(a) => {
                let mut e = vec![0.0; self.bins()];
                e[self.groups[g].bin] = a;
                e
            }
            None => Vec::new(),
        };
        Ok(TransmitFrame {
            group: g,
            codeword,
            binid,
            payload,
        })
    }

    /// `sum_j d_g A_g m_j` for a batch of (group, codeword) pairs, computed
    /// with one forward map per group.
    pub fn superimpose(&self, codewords: &[(usize, Vec<u32>)]) -> Vec<f64> {
        let mut counts: Vec<Option<SectionedVector>> = vec![None; self.num_groups()];
        for (g, cw) in codewords {
            let s = counts[*g].get_or_insert_with(|| {
                SectionedVector::zeros(self.groups[*g].sections, self.groups[*g].section_bits)
            });
            for (l, &k) in cw.iter().enumerate() {
                let cur = s.get(l, k as usize);
                s.set(l, k as usize, cur + 1.0);
            }
        }
        let mut y = vec![0.0; self.scenario.n];
        let mut scratch = Vec::new();
        for (g, s) in counts.iter().enumerate() {
            if let Some(s) = s {
                self.operators[g].forward_add(
                    s.as_slice(),
                    self.amplitude(g),
                    &mut y,
                    &mut scratch,
                );
            }
        }
        y
    }
}

/// One-shot form of [`System::encode_user`] for a single-class scenario.
pub fn encode_user(system: &System, message: &[bool]) -> Result<TransmitFrame> {
    system.encode_user(0, message)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(bins: usize) -> Scenario {
        Scenario::from_json(&format!(
            r#"{{
                "n": 256,
                "classes": [{{"users": 3, "section_bits": 6, "sections": 8, "rate": "1/2",
                             "sensing_seed": 1, "graph_seed": 2}}],
                "binning": {{"bins": {bins}}},
                "ebno_db": 2.0
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn single_bin_sends_no_binid() {
        let sys = System::new(&scenario(1)).unwrap();
        let f = sys.encode_user(0, &[true; 24]).unwrap();
        assert!(f.binid.is_empty());
        assert_eq!(f.payload.len(), 256);
    }

    #[test]
    fn leading_zero_selects_first_bin() {
        let sys = System::new(&scenario(2)).unwrap();
        let mut msg = vec![true; 24];
        msg[0] = false;
        let f = sys.encode_user(0, &msg).unwrap();
        assert_eq!(f.group, 0);
        assert_eq!(f.binid.len(), 2);
        assert!(f.binid[0] > 0.0 && f.binid[1] == 0.0);
        assert!(sys.graph(0).is_codeword(&f.codeword));
    }

    #[test]
    fn superposition_matches_frame_sum() {
        let sys = System::new(&scenario(2)).unwrap();
        let msgs = [vec![false; 24], vec![true; 24], {
            let mut m = vec![false; 24];
            m[5] = true;
            m
        }];
        let mut sum = vec![0.0; 256];
        let mut cws = Vec::new();
        for m in &msgs {
            let f = sys.encode_user(0, m).unwrap();
            for (s, p) in sum.iter_mut().zip(&f.payload) {
                *s += p;
            }
            cws.push((f.group, f.codeword));
        }
        let y = sys.superimpose(&cws);
        for (a, b) in y.iter().zip(&sum) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let sys = System::new(&scenario(1)).unwrap();
        assert!(matches!(
            sys.encode_user(0, &[true; 23]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
