//! Multi-group AMP with a BP-informed posterior-mean denoiser.
//!
//! Each iteration forms the effective observation `r_g = A_g^T z + d_g s_g`,
//! denoises it section by section using priors obtained from one round of
//! BP on the group's outer graph, and refreshes the residual with the
//! closed-form Onsager correction `(||D^2 eta||_1 - ||D eta||^2) / tau^2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::outer_code::{BeliefPropagation, FactorGraph};
use crate::sectioned::SectionedVector;
use crate::sensing::StackedOperator;

/// Lower bound on the noise level estimate.
pub const TAU_FLOOR: f64 = 1e-12;
/// Priors produced from BP beliefs are clamped to `[PRIOR_CLAMP, 1 - PRIOR_CLAMP]`.
pub const PRIOR_CLAMP: f64 = 1e-12;
/// Consecutive increases of the noise level (above its initial value) that
/// mark a run as diverged.
pub const DIVERGENCE_RUN: usize = 3;

/// Posterior mean of a Bernoulli(`q`) entry scaled by `d` observed in
/// Gaussian noise of standard deviation `tau`.
pub fn pme(q: f64, r: f64, d: f64, tau: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    // log-likelihood ratio of "absent" versus "present"
    let e = (d * d - 2.0 * r * d) / (2.0 * tau * tau);
    if e > 0.0 {
        let a = q * (-e).exp();
        a / (a + (1.0 - q))
    } else {
        q / (q + (1.0 - q) * e.exp())
    }
}

/// Partial derivative of [`pme`] with respect to `r`.
pub fn pme_derivative(q: f64, r: f64, d: f64, tau: f64) -> f64 {
    let s = pme(q, r, d, tau);
    d / (tau * tau) * s * (1.0 - s)
}

/// Probability that at least one of `users` uniformly chosen indices hits a
/// given entry of a section with `2^bits` entries.
pub fn uninformative_prior(bits: u32, users: usize) -> f64 {
    occupancy_probability(1.0 / (1u64 << bits) as f64, users)
}

// 1 - (1 - p)^K, accurate for small p
fn occupancy_probability(p: f64, users: usize) -> f64 {
    if p >= 1.0 {
        return if users > 0 { 1.0 } else { 0.0 };
    }
    -(users as f64 * (-p).ln_1p()).exp_m1()
}

/// Closed-form divergence of the stacked denoiser `D eta`.
pub fn onsager_divergence(states: &[SectionedVector], amplitudes: &[f64], tau: f64) -> f64 {
    states
        .iter()
        .zip(amplitudes)
        .map(|(s, &d)| group_divergence(s.as_slice(), d, tau))
        .sum()
}

fn group_divergence(eta: &[f64], d: f64, tau: f64) -> f64 {
    let d2 = d * d;
    let l1: f64 = eta.iter().map(|x| d2 * x.abs()).sum();
    let sq: f64 = eta.iter().map(|x| d2 * x * x).sum();
    (l1 - sq) / (tau * tau)
}

/// Output of one denoiser call.
#[derive(Debug, Clone)]
pub struct Denoised {
    pub state: SectionedVector,
    pub priors: SectionedVector,
    /// Sections whose BP belief vanished and fell back to the uninformative prior.
    pub degenerate_sections: usize,
}

/// Reusable denoiser workspace for one group.
pub struct DynamicDenoiser<'g> {
    graph: &'g FactorGraph,
    bp: BeliefPropagation<'g>,
    locals: Vec<f64>,
    belief: Vec<f64>,
    use_bp: bool,
}

impl<'g> DynamicDenoiser<'g> {
    pub fn new(graph: &'g FactorGraph, use_bp: bool) -> Self {
        let len = graph.num_sections() * graph.section_size();
        DynamicDenoiser {
            graph,
            bp: BeliefPropagation::new(graph),
            locals: vec![0.0; len],
            belief: vec![0.0; graph.section_size()],
            use_bp,
        }
    }

    /// Writes `eta(r)` into `state` and the priors used into `priors`;
    /// returns the number of degenerate sections.
    pub fn denoise(
        &mut self,
        r: &[f64],
        d: f64,
        users: usize,
        tau: f64,
        state: &mut [f64],
        priors: &mut [f64],
    ) -> usize {
        let g = self.graph;
        let m = g.section_size();
        let q_unif = uninformative_prior(g.section_bits(), users);
        if users == 0 {
            state.fill(0.0);
            priors.fill(0.0);
            return 0;
        }
        if !self.use_bp {
            priors.fill(q_unif);
            for (s, &x) in state.iter_mut().zip(r) {
                *s = pme(q_unif, x, d, tau);
            }
            return 0;
        }
        for (l, &x) in self.locals.iter_mut().zip(r) {
            *l = pme(q_unif, x, d, tau);
        }
        self.bp.reset(&self.locals);
        self.bp.round();
        let mut degenerate = 0;
        for l in 0..g.num_sections() {
            let q = &mut priors[l * m..(l + 1) * m];
            if g.adjacency(l).is_empty() {
                q.fill(q_unif);
            } else {
                self.bp.belief_into(l, &mut self.belief);
                let total: f64 = self.belief.iter().sum();
                if total > 0.0 && total.is_finite() {
                    let inv = 1.0 / total;
                    for (qk, &b) in q.iter_mut().zip(&self.belief) {
                        *qk = occupancy_probability(b * inv, users)
                            .clamp(PRIOR_CLAMP, 1.0 - PRIOR_CLAMP);
                    }
                } else {
                    q.fill(q_unif);
                    degenerate += 1;
                }
            }
            let s = &mut state[l * m..(l + 1) * m];
            for ((sk, &qk), &x) in s.iter_mut().zip(q.iter()).zip(&r[l * m..(l + 1) * m]) {
                *sk = pme(qk, x, d, tau);
            }
        }
        degenerate
    }
}

/// One-shot form of [`DynamicDenoiser::denoise`] with BP enabled.
pub fn dynamic_denoise(
    graph: &FactorGraph,
    r: &SectionedVector,
    amplitude: f64,
    users: usize,
    tau: f64,
) -> Result<Denoised> {
    if r.sections() != graph.num_sections() || r.bits() != graph.section_bits() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_sections() * graph.section_size(),
            actual: r.len(),
        });
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let mut state = SectionedVector::zeros(r.sections(), r.bits());
    let mut priors = state.clone();
    let degenerate_sections = DynamicDenoiser::new(graph, true).denoise(
        r.as_slice(),
        amplitude,
        users,
        tau,
        state.as_mut_slice(),
        priors.as_mut_slice(),
    );
    Ok(Denoised {
        state,
        priors,
        degenerate_sections,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AmpConfig {
    pub iterations: usize,
    /// Use BP-informed priors; `false` gives the plain separable PME.
    pub use_bp: bool,
}

impl Default for AmpConfig {
    fn default() -> Self {
        AmpConfig {
            iterations: 15,
            use_bp: true,
        }
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub tau: f64,
    pub residual_norm: f64,
    pub divergence: f64,
    pub degenerate_sections: usize,
}

#[derive(Debug, Clone)]
pub struct AmpOutput {
    pub states: Vec<SectionedVector>,
    pub priors: Vec<SectionedVector>,
    /// `tau_0, tau_1, ...`; `tau_0` comes from the received vector itself.
    pub tau_trace: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub diverged: bool,
}

impl AmpOutput {
    /// Diagnostics as JSON lines, one object per iteration.
    pub fn trace_json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain record") + "\n")
            .collect()
    }
}

fn noise_level(z: &[f64]) -> f64 {
    (z.iter().map(|x| x * x).sum::<f64>() / z.len() as f64)
        .sqrt()
        .max(TAU_FLOOR)
}

/// Runs `cfg.iterations` AMP iterations on `y`.
///
/// `users[g]` is the number of active users assumed for group `g` (an
/// estimate in practice).
pub fn amp_decode(
    y: &[f64],
    op: &StackedOperator,
    graphs: &[&FactorGraph],
    users: &[usize],
    cfg: &AmpConfig,
) -> Result<AmpOutput> {
    let groups = op.num_groups();
    if graphs.len() != groups || users.len() != groups {
        return Err(Error::LengthMismatch {
            expected: groups,
            actual: graphs.len().min(users.len()),
        });
    }
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter("at least one AMP iteration".into()));
    }
    let n = op.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    for (g, graph) in graphs.iter().enumerate() {
        let a = op.operator(g);
        if a.sections() != graph.num_sections() || a.bits() != graph.section_bits() {
            return Err(Error::DimensionMismatch {
                expected: a.num_columns(),
                actual: graph.num_sections() * graph.section_size(),
            });
        }
    }

    let mut denoisers: Vec<DynamicDenoiser> = graphs
        .iter()
        .map(|g| DynamicDenoiser::new(g, cfg.use_bp))
        .collect();
    let mut states: Vec<SectionedVector> = graphs
        .iter()
        .map(|g| SectionedVector::zeros(g.num_sections(), g.section_bits()))
        .collect();
    let mut priors = states.clone();
    let mut r: Vec<Vec<f64>> = states.iter().map(|s| vec![0.0; s.len()]).collect();
    let mut z = y.to_vec();
    let mut scratch = Vec::new();

    let tau0 = noise_level(&z);
    let mut tau = tau0;
    let mut tau_trace = vec![tau0];
    let mut records = Vec::with_capacity(cfg.iterations);
    let mut rising = 0;
    let mut diverged = false;

    for t in 1..=cfg.iterations {
        let mut degenerate = 0;
        for g in 0..groups {
            let (a, d) = (op.operator(g), op.amplitude(g));
            a.adjoint_into(&z, &mut r[g], &mut scratch);
            for (x, &s) in r[g].iter_mut().zip(states[g].as_slice()) {
                *x += d * s;
            }
            degenerate += denoisers[g].denoise(
                &r[g],
                d,
                users[g],
                tau,
                states[g].as_mut_slice(),
                priors[g].as_mut_slice(),
            );
        }
        let amplitudes: Vec<f64> = (0..groups).map(|g| op.amplitude(g)).collect();
        let div = onsager_divergence(&states, &amplitudes, tau);
        let onsager = div / n as f64;
        let mut next: Vec<f64> = y.iter().zip(&z).map(|(yi, zi)| yi + onsager * zi).collect();
        for (g, state) in states.iter().enumerate() {
            op.operator(g)
                .forward_add(state.as_slice(), -op.amplitude(g), &mut next, &mut scratch);
        }
        z = next;
        let new_tau = noise_level(&z);
        records.push(IterationRecord {
            iteration: t,
            tau: new_tau,
            residual_norm: new_tau * (n as f64).sqrt(),
            divergence: div,
            degenerate_sections: degenerate,
        });
        tau_trace.push(new_tau);
        if new_tau > tau && new_tau > tau0 {
            rising += 1;
        } else {
            rising = 0;
        }
        tau = new_tau;
        if rising >= DIVERGENCE_RUN {
            diverged = true;
            break;
        }
    }

    Ok(AmpOutput {
        states,
        priors,
        tau_trace,
        records,
        diverged,
    })
}
