//! Sum-product message passing on the outer factor graph.
//!
//! Check updates are XOR-convolutions over GF(2^v). With coefficients, the
//! input of neighbor `j` is first relabelled `x -> c_j x`; the convolution is
//! then a pointwise product in the Walsh–Hadamard domain. Messages live in the
//! probability domain and are renormalized after every update.

use crate::error::{Error, Result};
use crate::gf::{self, FieldTables};
use crate::wht::{fwht, ifwht};

use super::graph::{CheckNode, FactorGraph};

/// Lower bound applied to local evidence and check messages before they are
/// multiplied into variable-to-check messages.
pub const WEIGHT_FLOOR: f64 = 1e-30;

/// Nonnegative weights over the `2^v` values of one section.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPmf(Vec<f64>);

impl SectionPmf {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if !weights.len().is_power_of_two() || weights.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "PMF length {} is not a power of two",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "PMF weights must be finite and nonnegative".into(),
            ));
        }
        Ok(SectionPmf(weights))
    }

    pub fn uniform(bits: u32) -> Self {
        let m = 1usize << bits;
        SectionPmf(vec![1.0 / m as f64; m])
    }

    pub fn delta(bits: u32, index: usize) -> Self {
        let mut w = vec![0.0; 1 << bits];
        w[index] = 1.0;
        SectionPmf(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Scaled to unit mass; `None` when the total weight is zero.
    pub fn normalized(&self) -> Option<SectionPmf> {
        let s = self.sum();
        if s > 0.0 && s.is_finite() {
            Some(SectionPmf(self.0.iter().map(|w| w / s).collect()))
        } else {
            None
        }
    }

    pub fn argmax(&self) -> usize {
        crate::sectioned::argmax(&self.0)
    }
}

fn normalize_in_place(xs: &mut [f64]) -> bool {
    let s: f64 = xs.iter().sum();
    if s > 0.0 && s.is_finite() {
        let inv = 1.0 / s;
        xs.iter_mut().for_each(|x| *x *= inv);
        true
    } else {
        false
    }
}

// out[c * k] = input[k]
fn scatter_by_coefficient(t: &FieldTables, c: u32, input: &[f64], out: &mut [f64]) {
    if c == 1 {
        out.copy_from_slice(input);
    } else {
        for (k, &x) in input.iter().enumerate() {
            out[t.mul(c, k as u32) as usize] = x;
        }
    }
}

// out[k] = conv[c * k], clamped at zero
fn gather_by_coefficient(t: &FieldTables, c: u32, conv: &[f64], out: &mut [f64]) {
    if c == 1 {
        for (o, &x) in out.iter_mut().zip(conv) {
            *o = x.max(0.0);
        }
    } else {
        for (k, o) in out.iter_mut().enumerate() {
            *o = conv[t.mul(c, k as u32) as usize].max(0.0);
        }
    }
}

/// Message from `check` to its neighbor `target`: the PMF of the symbol that
/// satisfies the check given the other neighbors, computed in the
/// Walsh–Hadamard domain.
///
/// `incoming` holds one PMF per neighbor of the check, in the check's
/// neighbor order, skipping `target`. The output is not normalized.
pub fn check_to_variable(
    check: &CheckNode,
    target: usize,
    incoming: &[SectionPmf],
) -> Result<SectionPmf> {
    let pos = check
        .sections
        .iter()
        .position(|&s| s == target)
        .ok_or_else(|| Error::InvalidParameter(format!("section {target} not in check")))?;
    if incoming.len() + 1 != check.degree() {
        return Err(Error::LengthMismatch {
            expected: check.degree() - 1,
            actual: incoming.len(),
        });
    }
    let m = incoming[0].len();
    if incoming.iter().any(|p| p.len() != m) {
        return Err(Error::InvalidParameter("PMF lengths differ".into()));
    }
    let bits = m.trailing_zeros();
    let t = gf::tables(bits)?;
    let mut acc = vec![1.0; m];
    let mut buf = vec![0.0; m];
    let others = (0..check.degree()).filter(|&p| p != pos);
    for (p, pmf) in others.zip(incoming) {
        scatter_by_coefficient(t, check.coefficients[p].value(), pmf.weights(), &mut buf);
        fwht(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a *= b;
        }
    }
    ifwht(&mut acc);
    let mut out = vec![0.0; m];
    gather_by_coefficient(t, check.coefficients[pos].value(), &acc, &mut out);
    Ok(SectionPmf(out))
}

/// Normalized product of the local evidence and the messages from all other
/// checks.
pub fn variable_to_check(local: &SectionPmf, others: &[SectionPmf]) -> Result<SectionPmf> {
    let m = local.len();
    if others.iter().any(|p| p.len() != m) {
        return Err(Error::InvalidParameter("PMF lengths differ".into()));
    }
    let mut out = local.weights().to_vec();
    for msg in others {
        for (o, w) in out.iter_mut().zip(msg.weights()) {
            *o *= w;
        }
    }
    if !normalize_in_place(&mut out) {
        return Err(Error::DegenerateMessage);
    }
    Ok(SectionPmf(out))
}

/// Runs `rounds` flooding rounds from `locals` and returns the unnormalized
/// product of incoming check messages for every section.
///
/// `rounds` must be below the girth so that no section's belief depends on
/// its own local evidence.
pub fn section_beliefs(
    graph: &FactorGraph,
    locals: &[SectionPmf],
    rounds: usize,
) -> Result<Vec<SectionPmf>> {
    if rounds >= graph.girth_or_max() {
        return Err(Error::RoundsExceedGirth {
            rounds,
            girth: graph.girth_or_max(),
        });
    }
    if locals.len() != graph.num_sections() {
        return Err(Error::LengthMismatch {
            expected: graph.num_sections(),
            actual: locals.len(),
        });
    }
    let m = graph.section_size();
    if locals.iter().any(|p| p.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: locals
                .iter()
                .map(|p| p.len())
                .find(|&l| l != m)
                .unwrap_or(m),
        });
    }
    let flat: Vec<f64> = locals
        .iter()
        .flat_map(|p| p.weights().iter().copied())
        .collect();
    let mut bp = BeliefPropagation::new(graph);
    bp.reset(&flat);
    for _ in 0..rounds {
        bp.round();
    }
    let mut out = Vec::with_capacity(graph.num_sections());
    for l in 0..graph.num_sections() {
        let mut w = vec![0.0; m];
        bp.belief_into(l, &mut w);
        out.push(SectionPmf(w));
    }
    Ok(out)
}

/// Reusable flooding-schedule BP workspace bound to one graph.
///
/// Local evidence is floored at [`WEIGHT_FLOOR`]; check-to-variable messages
/// start as all-ones so that the first round sends the normalized local
/// evidence.
pub struct BeliefPropagation<'g> {
    graph: &'g FactorGraph,
    tables: &'static FieldTables,
    m: usize,
    edge_offset: Vec<usize>,
    locals: Vec<f64>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    spectra: Vec<f64>,
    suffix: Vec<f64>,
    prefix: Vec<f64>,
    buf: Vec<f64>,
    degenerate: usize,
}

impl<'g> BeliefPropagation<'g> {
    pub fn new(graph: &'g FactorGraph) -> Self {
        let m = graph.section_size();
        let mut edge_offset = Vec::with_capacity(graph.checks().len());
        let mut total = 0;
        for c in graph.checks() {
            edge_offset.push(total);
            total += c.degree();
        }
        let max_deg = graph.checks().iter().map(|c| c.degree()).max().unwrap_or(0);
        BeliefPropagation {
            graph,
            tables: gf::tables(graph.section_bits()).expect("validated width"),
            m,
            edge_offset,
            locals: vec![0.0; graph.num_sections() * m],
            v2c: vec![0.0; total * m],
            c2v: vec![1.0; total * m],
            spectra: vec![0.0; max_deg * m],
            suffix: vec![0.0; max_deg * m],
            prefix: vec![0.0; m],
            buf: vec![0.0; m],
            degenerate: 0,
        }
    }

    pub fn graph(&self) -> &FactorGraph {
        self.graph
    }

    /// Loads flattened local evidence (`L * 2^v` entries) and clears messages.
    pub fn reset(&mut self, locals: &[f64]) {
        assert_eq!(locals.len(), self.locals.len());
        for (d, &s) in self.locals.iter_mut().zip(locals) {
            *d = s.max(WEIGHT_FLOOR);
        }
        self.c2v.fill(1.0);
        self.degenerate = 0;
    }

    /// Replaces the local evidence of one section; messages are kept.
    pub fn set_local(&mut self, l: usize, weights: &[f64]) {
        let m = self.m;
        for (d, &s) in self.locals[l * m..(l + 1) * m].iter_mut().zip(weights) {
            *d = s.max(WEIGHT_FLOOR);
        }
    }

    /// Number of variable-to-check messages that collapsed to zero mass and
    /// were replaced by uniform ones since the last reset.
    pub fn degenerate_messages(&self) -> usize {
        self.degenerate
    }

    fn edge(&self, check: usize, pos: usize) -> usize {
        self.edge_offset[check] + pos
    }

    /// One flooding round: all variable-to-check, then all check-to-variable.
    pub fn round(&mut self) {
        self.update_variables();
        self.update_checks();
    }

    fn update_variables(&mut self) {
        let m = self.m;
        for l in 0..self.graph.num_sections() {
            let adj = self.graph.adjacency(l);
            for (i, &(a, p)) in adj.iter().enumerate() {
                let e = self.edge(a, p);
                let out = &mut self.buf;
                out.copy_from_slice(&self.locals[l * m..(l + 1) * m]);
                for (j, &(b, q)) in adj.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let f = self.edge_offset[b] + q;
                    for (o, &w) in out.iter_mut().zip(&self.c2v[f * m..(f + 1) * m]) {
                        *o *= w.max(WEIGHT_FLOOR);
                    }
                }
                if !normalize_in_place(out) {
                    out.fill(1.0 / m as f64);
                    self.degenerate += 1;
                }
                self.v2c[e * m..(e + 1) * m].copy_from_slice(out);
            }
        }
    }

    fn update_checks(&mut self) {
        let m = self.m;
        for (a, check) in self.graph.checks().iter().enumerate() {
            let d = check.degree();
            let base = self.edge_offset[a];
            for p in 0..d {
                let e = base + p;
                let spec = &mut self.spectra[p * m..(p + 1) * m];
                scatter_by_coefficient(
                    self.tables,
                    check.coefficients[p].value(),
                    &self.v2c[e * m..(e + 1) * m],
                    spec,
                );
                fwht(spec);
            }
            // suffix[p] = prod_{q > p} spectra[q]
            self.suffix[(d - 1) * m..d * m].fill(1.0);
            for p in (0..d - 1).rev() {
                let (head, tail) = self.suffix.split_at_mut((p + 1) * m);
                let dst = &mut head[p * m..];
                let next = &tail[..m];
                let spec = &self.spectra[(p + 1) * m..(p + 2) * m];
                for ((o, &x), &y) in dst.iter_mut().zip(next).zip(spec) {
                    *o = x * y;
                }
            }
            self.prefix.fill(1.0);
            for p in 0..d {
                let conv = &mut self.buf;
                for ((o, &x), &y) in conv
                    .iter_mut()
                    .zip(&self.prefix)
                    .zip(&self.suffix[p * m..(p + 1) * m])
                {
                    *o = x * y;
                }
                ifwht(conv);
                let e = base + p;
                let dst = &mut self.c2v[e * m..(e + 1) * m];
                gather_by_coefficient(self.tables, check.coefficients[p].value(), conv, dst);
                normalize_in_place(dst);
                for (o, &y) in self
                    .prefix
                    .iter_mut()
                    .zip(&self.spectra[p * m..(p + 1) * m])
                {
                    *o *= y;
                }
            }
        }
    }

    /// Unnormalized product of the check messages into section `l`.
    pub fn belief_into(&self, l: usize, out: &mut [f64]) {
        let m = self.m;
        out.fill(1.0);
        for &(a, p) in self.graph.adjacency(l) {
            let e = self.edge(a, p);
            for (o, &w) in out.iter_mut().zip(&self.c2v[e * m..(e + 1) * m]) {
                *o *= w;
            }
        }
    }

    /// Normalized product of the (floored) local evidence and all incoming
    /// check messages.
    pub fn posterior_into(&self, l: usize, out: &mut [f64]) {
        let m = self.m;
        self.belief_into(l, out);
        for (o, &w) in out.iter_mut().zip(&self.locals[l * m..(l + 1) * m]) {
            *o *= w;
        }
        if !normalize_in_place(out) {
            out.fill(1.0 / m as f64);
        }
    }

    /// Message currently sent from `check` to its `pos`-th neighbor.
    pub fn check_message(&self, check: usize, pos: usize) -> &[f64] {
        let e = self.edge(check, pos);
        &self.c2v[e * self.m..(e + 1) * self.m]
    }
}
