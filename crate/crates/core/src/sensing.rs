//! Sensing operators `A_g` and the amplitude-scaled stacked operator.
//!
//! Two flavours share one interface:
//!
//! * `Gaussian`: a dense column-major matrix with i.i.d. `N(0, 1/n)` entries.
//! * `Hadamard`: per section, `n` distinct rows (never the all-ones row) and
//!   `2^v` distinct columns (never the all-ones column) of an `N x N`
//!   Sylvester–Hadamard matrix, scaled by `1/sqrt(n)`. Forward and adjoint use
//!   one fast transform of length `N` per section; the matrix is never
//!   stored. `N` is the smallest power of two with `N >= 2^(v+1)` and
//!   `N > n`, so both selections always exist.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sectioned::SectionedVector;
use crate::wht::{fwht, hadamard_sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensingKind {
    Gaussian,
    Hadamard,
}

/// Everything needed to regenerate an operator bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensingSpec {
    pub kind: SensingKind,
    pub n: usize,
    pub v: u32,
    #[serde(rename = "L")]
    pub sections: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
enum Inner {
    Gaussian {
        // column-major, n x (L * 2^v)
        data: Vec<f64>,
    },
    Hadamard {
        size: usize,
        rows: Vec<Vec<u32>>,
        cols: Vec<Vec<u32>>,
    },
}

#[derive(Debug, Clone)]
pub struct SensingOperator {
    spec: SensingSpec,
    inner: Inner,
}

impl SensingOperator {
    pub fn new(spec: SensingSpec) -> Result<Self> {
        if spec.n == 0 || spec.sections == 0 {
            return Err(Error::InvalidParameter(
                "operator needs n > 0 and at least one section".into(),
            ));
        }
        if !(crate::gf::MIN_BITS..=crate::gf::MAX_BITS).contains(&spec.v) {
            return Err(Error::InvalidParameter(format!(
                "section width {} out of range",
                spec.v
            )));
        }
        let m = 1usize << spec.v;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let inner = match spec.kind {
            SensingKind::Gaussian => {
                let cols = spec.sections * m;
                let bytes = spec.n as u128 * cols as u128 * 8;
                if bytes > 2 << 30 {
                    return Err(Error::InvalidParameter(format!(
                        "dense {}x{} operator too large; use the hadamard kind",
                        spec.n, cols
                    )));
                }
                let scale = 1.0 / (spec.n as f64).sqrt();
                let data = (0..spec.n * cols)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        g * scale
                    })
                    .collect();
                Inner::Gaussian { data }
            }
            SensingKind::Hadamard => {
                let size = hadamard_size(spec.n, spec.v);
                let mut rows = Vec::with_capacity(spec.sections);
                let mut cols = Vec::with_capacity(spec.sections);
                for _ in 0..spec.sections {
                    rows.push(draw_nonzero(&mut rng, size, spec.n));
                    cols.push(draw_nonzero(&mut rng, size, m));
                }
                Inner::Hadamard { size, rows, cols }
            }
        };
        Ok(SensingOperator { spec, inner })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::new(serde_json::from_str(s)?)
    }

    pub fn spec(&self) -> &SensingSpec {
        &self.spec
    }

    pub fn kind(&self) -> SensingKind {
        self.spec.kind
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn bits(&self) -> u32 {
        self.spec.v
    }

    pub fn sections(&self) -> usize {
        self.spec.sections
    }

    pub fn section_size(&self) -> usize {
        1 << self.spec.v
    }

    pub fn num_columns(&self) -> usize {
        self.spec.sections << self.spec.v
    }

    /// Transform length of the Hadamard flavour (`None` for Gaussian).
    pub fn transform_size(&self) -> Option<usize> {
        match &self.inner {
            Inner::Hadamard { size, .. } => Some(*size),
            Inner::Gaussian { .. } => None,
        }
    }

    /// Selected Hadamard row indices of section `l`.
    pub fn selected_rows(&self, l: usize) -> Option<&[u32]> {
        match &self.inner {
            Inner::Hadamard { rows, .. } => Some(&rows[l]),
            Inner::Gaussian { .. } => None,
        }
    }

    /// Selected Hadamard column indices of section `l`.
    pub fn selected_columns(&self, l: usize) -> Option<&[u32]> {
        match &self.inner {
            Inner::Hadamard { cols, .. } => Some(&cols[l]),
            Inner::Gaussian { .. } => None,
        }
    }

    fn scale(&self) -> f64 {
        1.0 / (self.spec.n as f64).sqrt()
    }

    fn check_state(&self, x: &SectionedVector) -> Result<()> {
        if x.sections() != self.spec.sections || x.bits() != self.spec.v {
            return Err(Error::DimensionMismatch {
                expected: self.num_columns(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn check_channel(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.spec.n {
            return Err(Error::DimensionMismatch {
                expected: self.spec.n,
                actual: z.len(),
            });
        }
        Ok(())
    }

    /// `A m`.
    pub fn forward(&self, m: &SectionedVector) -> Result<Vec<f64>> {
        self.check_state(m)?;
        let mut out = vec![0.0; self.spec.n];
        self.forward_add(m.as_slice(), 1.0, &mut out, &mut Vec::new());
        Ok(out)
    }

    /// `A^T z`.
    pub fn adjoint(&self, z: &[f64]) -> Result<SectionedVector> {
        self.check_channel(z)?;
        let mut out = SectionedVector::zeros(self.spec.sections, self.spec.v);
        self.adjoint_into(z, out.as_mut_slice(), &mut Vec::new());
        Ok(out)
    }

    /// `out += alpha * A x` on raw slices; `scratch` is resized as needed.
    pub fn forward_add(&self, x: &[f64], alpha: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
        let n = self.spec.n;
        let m = self.section_size();
        debug_assert_eq!(x.len(), self.num_columns());
        debug_assert_eq!(out.len(), n);
        match &self.inner {
            Inner::Gaussian { data } => {
                for (j, &xj) in x.iter().enumerate() {
                    if xj != 0.0 {
                        let a = alpha * xj;
                        for (o, &c) in out.iter_mut().zip(&data[j * n..(j + 1) * n]) {
                            *o += a * c;
                        }
                    }
                }
            }
            Inner::Hadamard { size, rows, cols } => {
                let a = alpha * self.scale();
                scratch.resize(*size, 0.0);
                for l in 0..self.spec.sections {
                    let xs = &x[l * m..(l + 1) * m];
                    let nnz = xs.iter().filter(|&&v| v != 0.0).count();
                    if nnz == 0 {
                        continue;
                    }
                    // Direct column sums are cheaper than a transform for
                    // very sparse sections.
                    if nnz * n < *size * size.trailing_zeros() as usize {
                        for (k, &xk) in xs.iter().enumerate() {
                            if xk != 0.0 {
                                let c = cols[l][k] as usize;
                                for (o, &r) in out.iter_mut().zip(&rows[l]) {
                                    *o += a * xk * hadamard_sign(r as usize, c);
                                }
                            }
                        }
                        continue;
                    }
                    scratch.fill(0.0);
                    for (&c, &xk) in cols[l].iter().zip(xs) {
                        scratch[c as usize] = xk;
                    }
                    fwht(scratch);
                    for (o, &r) in out.iter_mut().zip(&rows[l]) {
                        *o += a * scratch[r as usize];
                    }
                }
            }
        }
    }

    /// `out = A^T z` on raw slices; `scratch` is resized as needed.
    pub fn adjoint_into(&self, z: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        let n = self.spec.n;
        let m = self.section_size();
        debug_assert_eq!(z.len(), n);
        debug_assert_eq!(out.len(), self.num_columns());
        match &self.inner {
            Inner::Gaussian { data } => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = data[j * n..(j + 1) * n]
                        .iter()
                        .zip(z)
                        .map(|(a, b)| a * b)
                        .sum();
                }
            }
            Inner::Hadamard { size, rows, cols } => {
                let a = self.scale();
                scratch.resize(*size, 0.0);
                for l in 0..self.spec.sections {
                    scratch.fill(0.0);
                    for (&r, &zi) in rows[l].iter().zip(z) {
                        scratch[r as usize] = zi;
                    }
                    fwht(scratch);
                    for (o, &c) in out[l * m..(l + 1) * m].iter_mut().zip(&cols[l]) {
                        *o = a * scratch[c as usize];
                    }
                }
            }
        }
    }

    /// Column `(l, k)` as a dense vector.
    pub fn column(&self, l: usize, k: usize) -> Vec<f64> {
        let n = self.spec.n;
        match &self.inner {
            Inner::Gaussian { data } => {
                let j = (l << self.spec.v) + k;
                data[j * n..(j + 1) * n].to_vec()
            }
            Inner::Hadamard { rows, cols, .. } => {
                let c = cols[l][k] as usize;
                let a = self.scale();
                rows[l]
                    .iter()
                    .map(|&r| a * hadamard_sign(r as usize, c))
                    .collect()
            }
        }
    }

    /// Explicit `n x (L 2^v)` matrix, row-major. Intended for tests and
    /// small diagnostics only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let cols: Vec<Vec<f64>> = (0..self.spec.sections)
            .flat_map(|l| (0..self.section_size()).map(move |k| (l, k)))
            .map(|(l, k)| self.column(l, k))
            .collect();
        (0..self.spec.n)
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect()
    }
}

fn hadamard_size(n: usize, v: u32) -> usize {
    (n + 1).next_power_of_two().max(1 << (v + 1))
}

// `count` distinct values from 1..size, in draw order.
fn draw_nonzero(rng: &mut ChaCha8Rng, size: usize, count: usize) -> Vec<u32> {
    sample(rng, size - 1, count)
        .into_iter()
        .map(|i| (i + 1) as u32)
        .collect()
}

/// Several operators sharing one channel, each scaled by its amplitude `d_g`.
#[derive(Debug, Clone)]
pub struct StackedOperator {
    groups: Vec<(Arc<SensingOperator>, f64)>,
}

impl StackedOperator {
    /// Accepts owned operators or shared `Arc`s.
    pub fn new<T: Into<Arc<SensingOperator>>>(groups: Vec<(T, f64)>) -> Result<Self> {
        let groups: Vec<(Arc<SensingOperator>, f64)> =
            groups.into_iter().map(|(op, d)| (op.into(), d)).collect();
        let Some(first) = groups.first() else {
            return Err(Error::InvalidParameter("no groups".into()));
        };
        let n = first.0.n();
        if let Some((op, _)) = groups.iter().find(|(op, _)| op.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: op.n(),
            });
        }
        Ok(StackedOperator { groups })
    }

    pub fn n(&self) -> usize {
        self.groups[0].0.n()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn operator(&self, g: usize) -> &SensingOperator {
        &self.groups[g].0
    }

    pub fn amplitude(&self, g: usize) -> f64 {
        self.groups[g].1
    }

    pub fn groups(&self) -> &[(Arc<SensingOperator>, f64)] {
        &self.groups
    }

    /// `sum_g d_g A_g s_g`.
    pub fn stacked_forward(&self, states: &[SectionedVector]) -> Result<Vec<f64>> {
        if states.len() != self.groups.len() {
            return Err(Error::LengthMismatch {
                expected: self.groups.len(),
                actual: states.len(),
            });
        }
        let mut out = vec![0.0; self.n()];
        let mut scratch = Vec::new();
        for ((op, d), s) in self.groups.iter().zip(states) {
            op.check_state(s)?;
            op.forward_add(s.as_slice(), *d, &mut out, &mut scratch);
        }
        Ok(out)
    }

    /// `A_g^T z` for every group; amplitudes are not applied.
    pub fn stacked_adjoint(&self, z: &[f64]) -> Result<Vec<SectionedVector>> {
        self.groups.iter().map(|(op, _)| op.adjoint(z)).collect()
    }
}
