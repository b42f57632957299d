use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{self, FieldElement};

/// Largest check degree produced by [`build_graph`].
pub const MAX_CHECK_DEGREE: usize = 4;

const BUILD_ATTEMPTS: usize = 256;

/// A code rate `num/den`, written `"1/2"` in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rate {
    pub num: u32,
    pub den: u32,
}

impl Rate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 || num == 0 || num >= den {
            return Err(Error::InvalidParameter(format!(
                "rate {num}/{den} must lie strictly between 0 and 1"
            )));
        }
        Ok(Rate { num, den })
    }

    /// Number of information sections out of `sections`.
    pub fn info_sections(&self, sections: usize) -> Result<usize> {
        let scaled = sections * self.num as usize;
        if !scaled.is_multiple_of(self.den as usize) {
            return Err(Error::InvalidParameter(format!(
                "{sections} sections at rate {self} is not an integer number of info sections"
            )));
        }
        Ok(scaled / self.den as usize)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidParameter(format!("rate '{s}' is not of the form a/b")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidParameter(format!("bad rate component '{x}'")))
        };
        Rate::new(parse(a)?, parse(b)?)
    }
}

impl TryFrom<String> for Rate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Rate> for String {
    fn from(r: Rate) -> String {
        r.to_string()
    }
}

/// A parity check `sum_j c_j x_j = 0` over GF(2^v).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckNode {
    pub sections: Vec<usize>,
    pub coefficients: Vec<FieldElement>,
}

impl CheckNode {
    pub fn degree(&self) -> usize {
        self.sections.len()
    }

    pub fn has_unit_coefficients(&self) -> bool {
        self.coefficients.iter().all(|c| c.value() == 1)
    }

    /// Evaluates the check on a full codeword of symbols.
    pub fn is_satisfied(&self, symbols: &[u32]) -> bool {
        let t = gf::tables(self.coefficients[0].bits()).expect("validated width");
        let acc = self
            .sections
            .iter()
            .zip(&self.coefficients)
            .fold(0u32, |acc, (&s, c)| acc ^ t.mul(c.value(), symbols[s]));
        acc == 0
    }
}

/// Outer LDPC factor graph over GF(2^v).
///
/// Check `encoding_order[i]` determines exactly one section that no earlier
/// check (and no information section) fixes, so encoding is a single
/// sequential pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    num_sections: usize,
    section_bits: u32,
    rate: Rate,
    seed: u64,
    info_sections: usize,
    checks: Vec<CheckNode>,
    // (check index, position within that check) for every section
    variable_adjacency: Vec<Vec<(usize, usize)>>,
    encoding_order: Vec<usize>,
    // parity section solved by each check, indexed by check
    parity_of_check: Vec<usize>,
    girth: Option<usize>,
}

impl FactorGraph {
    /// Validates a hand-specified graph.
    pub fn from_checks(
        num_sections: usize,
        section_bits: u32,
        rate: Rate,
        seed: u64,
        checks: Vec<CheckNode>,
        encoding_order: Vec<usize>,
    ) -> Result<Self> {
        gf::tables(section_bits)?;
        let info_sections = rate.info_sections(num_sections)?;
        if checks.len() != encoding_order.len() {
            return Err(Error::InvalidParameter(
                "encoding order must list every check exactly once".into(),
            ));
        }
        let mut variable_adjacency = vec![Vec::new(); num_sections];
        for (a, check) in checks.iter().enumerate() {
            if check.degree() < 2 {
                return Err(Error::InvalidParameter(format!("check {a} has degree < 2")));
            }
            if check.coefficients.len() != check.degree() {
                return Err(Error::InvalidParameter(format!(
                    "check {a} has {} coefficients for {} sections",
                    check.coefficients.len(),
                    check.degree()
                )));
            }
            let mut seen = HashSet::new();
            for (p, (&s, c)) in check.sections.iter().zip(&check.coefficients).enumerate() {
                if s >= num_sections {
                    return Err(Error::InvalidParameter(format!(
                        "check {a} references section {s} of {num_sections}"
                    )));
                }
                if !seen.insert(s) {
                    return Err(Error::InvalidParameter(format!(
                        "check {a} lists section {s} twice"
                    )));
                }
                if c.is_zero() || c.bits() != section_bits {
                    return Err(Error::InvalidParameter(format!(
                        "check {a} has an invalid coefficient {c:?}"
                    )));
                }
                variable_adjacency[s].push((a, p));
            }
        }

        let mut determined = vec![false; num_sections];
        determined[..info_sections].fill(true);
        let mut parity_of_check = vec![usize::MAX; checks.len()];
        let mut used = vec![false; checks.len()];
        for &a in &encoding_order {
            if a >= checks.len() || used[a] {
                return Err(Error::InvalidParameter(
                    "encoding order is not a permutation of the checks".into(),
                ));
            }
            used[a] = true;
            let open: Vec<usize> = checks[a]
                .sections
                .iter()
                .copied()
                .filter(|&s| !determined[s])
                .collect();
            if open.len() != 1 {
                return Err(Error::InvalidParameter(format!(
                    "check {a} has {} undetermined sections when reached in encoding order",
                    open.len()
                )));
            }
            determined[open[0]] = true;
            parity_of_check[a] = open[0];
        }
        if let Some(s) = determined.iter().position(|d| !d) {
            return Err(Error::InvalidParameter(format!(
                "section {s} is not determined by the encoding order"
            )));
        }

        let girth = compute_girth(num_sections, &checks);
        Ok(FactorGraph {
            num_sections,
            section_bits,
            rate,
            seed,
            info_sections,
            checks,
            variable_adjacency,
            encoding_order,
            parity_of_check,
            girth,
        })
    }

    pub fn num_sections(&self) -> usize {
        self.num_sections
    }

    pub fn section_bits(&self) -> u32 {
        self.section_bits
    }

    pub fn section_size(&self) -> usize {
        1 << self.section_bits
    }

    pub fn rate(&self) -> Rate {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn info_sections(&self) -> usize {
        self.info_sections
    }

    pub fn parity_sections(&self) -> usize {
        self.num_sections - self.info_sections
    }

    /// Information bits carried by one codeword.
    pub fn info_bits(&self) -> usize {
        self.info_sections * self.section_bits as usize
    }

    pub fn checks(&self) -> &[CheckNode] {
        &self.checks
    }

    pub fn encoding_order(&self) -> &[usize] {
        &self.encoding_order
    }

    /// Checks incident to section `l`, with the section's position in each.
    pub fn adjacency(&self, l: usize) -> &[(usize, usize)] {
        &self.variable_adjacency[l]
    }

    pub fn parity_section_of(&self, check: usize) -> usize {
        self.parity_of_check[check]
    }

    /// Shortest cycle length, `None` when the graph is a forest.
    pub fn girth(&self) -> Option<usize> {
        self.girth
    }

    /// Girth with forests mapped to `usize::MAX`.
    pub fn girth_or_max(&self) -> usize {
        self.girth.unwrap_or(usize::MAX)
    }

    pub fn num_edges(&self) -> usize {
        self.checks.iter().map(|c| c.degree()).sum()
    }

    /// Copy of the graph with independent uniformly random nonzero coefficients.
    pub fn with_random_coefficients(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = (1u32 << self.section_bits) - 1;
        let checks = self
            .checks
            .iter()
            .map(|c| CheckNode {
                sections: c.sections.clone(),
                coefficients: c
                    .sections
                    .iter()
                    .map(|_| {
                        let v = rand::Rng::random_range(&mut rng, 1..=top);
                        FieldElement::new(v, self.section_bits).expect("in range")
                    })
                    .collect(),
            })
            .collect();
        FactorGraph {
            checks,
            ..self.clone()
        }
    }

    /// True when every check holds for `symbols`.
    pub fn is_codeword(&self, symbols: &[u32]) -> bool {
        symbols.len() == self.num_sections && self.checks.iter().all(|c| c.is_satisfied(symbols))
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            sections: self.num_sections,
            bits: self.section_bits,
            rate: self.rate,
            seed: self.seed,
            checks: self
                .checks
                .iter()
                .map(|c| CheckSpec {
                    sections: c.sections.clone(),
                    coeffs: c.coefficients.iter().map(|x| x.value()).collect(),
                })
                .collect(),
            encoding_order: self.encoding_order.clone(),
        }
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let checks = spec
            .checks
            .iter()
            .map(|c| {
                Ok(CheckNode {
                    sections: c.sections.clone(),
                    coefficients: c
                        .coeffs
                        .iter()
                        .map(|&v| FieldElement::new(v, spec.bits))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FactorGraph::from_checks(
            spec.sections,
            spec.bits,
            spec.rate,
            spec.seed,
            checks,
            spec.encoding_order.clone(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(s)?;
        FactorGraph::from_spec(&spec)
    }
}

/// JSON form of a factor graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(rename = "L")]
    pub sections: usize,
    #[serde(rename = "v")]
    pub bits: u32,
    pub rate: Rate,
    pub seed: u64,
    pub checks: Vec<CheckSpec>,
    pub encoding_order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub sections: Vec<usize>,
    pub coeffs: Vec<u32>,
}

/// Builds a sparse, sequentially encodable graph with unit coefficients.
///
/// Check `i` solves parity section `kappa + i` from up to three information
/// sections, picked among the least-connected ones. Information sections
/// therefore sit in several checks while every parity section is a leaf, so
/// once a check's information sections are known its parity is fixed.
/// Section pairs shared by two checks (4-cycles) are avoided where possible,
/// but never at the price of a check on a single information section;
/// attempts are repeated until every section is covered and the girth is at
/// least 6, otherwise the best covered candidate is returned.
pub fn build_graph(num_sections: usize, bits: u32, rate: Rate, seed: u64) -> Result<FactorGraph> {
    gf::tables(bits)?;
    if num_sections < 2 {
        return Err(Error::InvalidParameter("need at least two sections".into()));
    }
    let kappa = rate.info_sections(num_sections)?;
    if kappa == 0 || kappa == num_sections {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} with {num_sections} sections leaves no information or no parity"
        )));
    }
    let one = FieldElement::one(bits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fallback: Option<FactorGraph> = None;

    for _ in 0..BUILD_ATTEMPTS {
        let checks = random_checks(num_sections, kappa, &mut rng, one);
        let order: Vec<usize> = (0..checks.len()).collect();
        let covered = {
            let mut deg = vec![0usize; num_sections];
            for c in &checks {
                for &s in &c.sections {
                    deg[s] += 1;
                }
            }
            deg.iter().all(|&d| d > 0)
        };
        if !covered {
            continue;
        }
        let graph = FactorGraph::from_checks(num_sections, bits, rate, seed, checks, order)?;
        match graph.girth() {
            None => return Ok(graph),
            Some(g) if g >= 6 => return Ok(graph),
            Some(_) => {
                if fallback.is_none() {
                    fallback = Some(graph);
                }
            }
        }
    }
    fallback.ok_or_else(|| Error::GraphConstruction {
        attempts: BUILD_ATTEMPTS,
        reason: format!(
            "could not cover all {num_sections} sections with checks of degree <= {MAX_CHECK_DEGREE}"
        ),
    })
}

fn random_checks(
    num_sections: usize,
    kappa: usize,
    rng: &mut ChaCha8Rng,
    one: FieldElement,
) -> Vec<CheckNode> {
    let mut degree = vec![0usize; num_sections];
    let mut pairs: HashSet<(usize, usize)> = HashSet::new();
    let mut subsets: HashSet<Vec<usize>> = HashSet::new();
    let mut checks = Vec::with_capacity(num_sections - kappa);
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    for i in 0..num_sections - kappa {
        let parity = kappa + i;
        let mut members = vec![parity];
        let mut candidates: Vec<usize> = (0..kappa).collect();
        candidates.shuffle(rng);
        // least-connected sections first, random among equals
        candidates.sort_by_key(|&s| degree[s]);
        let want = (MAX_CHECK_DEGREE - 1).min(candidates.len());
        for &c in &candidates {
            if members.len() > want {
                break;
            }
            if members.iter().all(|&m| !pairs.contains(&key(m, c))) {
                members.push(c);
            }
        }
        if members.len() < 3 && kappa >= 2 {
            // Avoiding repeated pairs left a bare repetition check, which
            // does nothing against mixtures of users. Take instead the
            // fresh information subset with the fewest repeated pairs.
            members = vec![parity];
            members.extend(fallback_subset(
                &candidates,
                want,
                &pairs,
                &subsets,
                &degree,
            ));
        }
        if members.len() == 1 {
            members.push(candidates[0]);
        }
        let mut info: Vec<usize> = members[1..].to_vec();
        info.sort_unstable();
        subsets.insert(info);
        for x in 0..members.len() {
            degree[members[x]] += 1;
            for y in x + 1..members.len() {
                pairs.insert(key(members[x], members[y]));
            }
        }
        // parity last reads naturally in dumps
        members.rotate_left(1);
        checks.push(CheckNode {
            coefficients: vec![one; members.len()],
            sections: members,
        });
    }
    checks
}

/// Information sections for a check when no pair-free choice of two or more
/// exists. `candidates` is already ordered least-connected first.
fn fallback_subset(
    candidates: &[usize],
    want: usize,
    pairs: &HashSet<(usize, usize)>,
    subsets: &HashSet<Vec<usize>>,
    degree: &[usize],
) -> Vec<usize> {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    // (already used, repeated pairs, missing members, degree sum)
    type Rank = (bool, usize, usize, usize);
    let mut best: Option<(Rank, Vec<usize>)> = None;
    let mut consider = |set: Vec<usize>| {
        let mut sorted = set.clone();
        sorted.sort_unstable();
        let mut repeats = 0;
        for x in 0..set.len() {
            for y in x + 1..set.len() {
                repeats += pairs.contains(&key(set[x], set[y])) as usize;
            }
        }
        let rank = (
            subsets.contains(&sorted),
            repeats,
            want - set.len(),
            set.iter().map(|&s| degree[s]).sum::<usize>(),
        );
        if best.as_ref().is_none_or(|(r, _)| rank < *r) {
            best = Some((rank, set));
        }
    };
    let n = candidates.len();
    for a in 0..n {
        for b in a + 1..n {
            consider(vec![candidates[a], candidates[b]]);
            if want >= 3 {
                for c in b + 1..n {
                    consider(vec![candidates[a], candidates[b], candidates[c]]);
                }
            }
        }
    }
    best.map(|(_, set)| set).unwrap_or_default()
}

/// Shortest cycle in the bipartite section/check graph, in edges.
fn compute_girth(num_sections: usize, checks: &[CheckNode]) -> Option<usize> {
    // nodes: sections 0..L, checks L..L+M
    let n = num_sections + checks.len();
    let mut adj = vec![Vec::new(); n];
    for (a, c) in checks.iter().enumerate() {
        for &s in &c.sections {
            adj[s].push(num_sections + a);
            adj[num_sections + a].push(s);
        }
    }
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        dist.fill(usize::MAX);
        parent.fill(usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    best = Some(best.map_or(len, |b: usize| b.min(len)));
                }
            }
        }
    }
    best
}
