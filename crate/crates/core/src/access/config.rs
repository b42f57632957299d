//! Scenario description and per-group parameters.

use serde::{Deserialize, Serialize};

use crate::amp::AmpConfig;
use crate::error::{Error, Result};
use crate::extraction::ExtractionConfig;
use crate::outer_code::Rate;
use crate::sensing::SensingKind;

/// Fraction of the per-user energy spent on the bin identification sequence.
pub const DEFAULT_BINID_FRACTION: f64 = 0.002;

/// One class of users: shared message length, code and sensing seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConfig {
    /// Active users in this class.
    pub users: usize,
    /// Section width `v`.
    pub section_bits: u32,
    /// Number of sections `L`.
    pub sections: usize,
    pub rate: Rate,
    /// Optional consistency check: must equal `rate * L * v` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_bits: Option<usize>,
    #[serde(default)]
    pub sensing_seed: u64,
    #[serde(default)]
    pub graph_seed: u64,
}

impl ClassConfig {
    /// Message length `w` (bin-select bits included).
    pub fn message_bits(&self) -> Result<usize> {
        Ok(self.rate.info_sections(self.sections)? * self.section_bits as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupancyEstimator {
    /// Joint linear MMSE estimate given the total `K`.
    Lmmse,
    /// Per-bin rounding; does not need `K`.
    Round,
    /// Genie-aided true counts.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinningConfig {
    /// Number of bins `G` (a power of two).
    pub bins: usize,
    pub binid_power_fraction: f64,
    pub occupancy_estimator: OccupancyEstimator,
}

impl Default for BinningConfig {
    fn default() -> Self {
        BinningConfig {
            bins: 1,
            binid_power_fraction: DEFAULT_BINID_FRACTION,
            occupancy_estimator: OccupancyEstimator::Lmmse,
        }
    }
}

impl BinningConfig {
    /// Bin-select bits `w0 = log2 G`.
    pub fn select_bits(&self) -> usize {
        self.bins.trailing_zeros() as usize
    }

    /// Whether a bin identification sequence is transmitted at all.
    pub fn sends_binid(&self) -> bool {
        self.bins > 1
    }

    /// Share of the energy left for the payload.
    pub fn payload_fraction(&self) -> f64 {
        if self.sends_binid() {
            1.0 - self.binid_power_fraction
        } else {
            1.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || !self.bins.is_power_of_two() {
            return Err(Error::Config(format!(
                "bin count {} is not a power of two",
                self.bins
            )));
        }
        if !(0.0..=0.05).contains(&self.binid_power_fraction) {
            return Err(Error::Config(format!(
                "bin-ID power fraction {} outside [0, 0.05]",
                self.binid_power_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverMode {
    CodedDemixing,
    Tin,
    Sic,
}

impl ReceiverMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReceiverMode::CodedDemixing => "coded_demixing",
            ReceiverMode::Tin => "tin",
            ReceiverMode::Sic => "sic",
        }
    }
}

/// A complete simulation scenario, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Channel uses carrying the payload.
    pub n: usize,
    pub classes: Vec<ClassConfig>,
    #[serde(default)]
    pub binning: BinningConfig,
    #[serde(default = "default_mode")]
    pub mode: ReceiverMode,
    /// One outer SIC pass after the first decode (coded demixing only).
    #[serde(default)]
    pub sic_outer: bool,
    pub ebno_db: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sensing")]
    pub sensing: SensingKind,
    /// Add unit-variance channel noise.
    #[serde(default = "default_true")]
    pub noise: bool,
    /// Whether the receiver knows the total number of active users.
    #[serde(default = "default_true")]
    pub known_k: bool,
    #[serde(default)]
    pub amp: AmpConfig,
    #[serde(default)]
    pub extraction: ExtractionConfig,
}

fn default_mode() -> ReceiverMode {
    ReceiverMode::CodedDemixing
}

fn default_trials() -> usize {
    100
}

fn default_sensing() -> SensingKind {
    SensingKind::Hadamard
}

fn default_true() -> bool {
    true
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn total_users(&self) -> usize {
        self.classes.iter().map(|c| c.users).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.classes.is_empty() {
            return Err(Error::Config("at least one class is required".into()));
        }
        self.binning.validate()?;
        for (c, class) in self.classes.iter().enumerate() {
            let w = class.message_bits()?;
            if let Some(given) = class.message_bits {
                if given != w {
                    return Err(Error::Config(format!(
                        "class {c}: message_bits {given} but rate*L*v = {w}"
                    )));
                }
            }
            if w < self.binning.select_bits() {
                return Err(Error::Config(format!(
                    "class {c}: {w} message bits cannot carry the bin index"
                )));
            }
            // message bits are drawn as u64 words; at most 2^w distinct messages
            if w < 64 && class.users as u128 > (1u128 << w) {
                return Err(Error::Config(format!(
                    "class {c}: more users than distinct messages"
                )));
            }
        }
        if self.binning.bins > 1 && self.classes.len() > 1 {
            return Err(Error::Config(
                "stochastic binning is supported for a single class only".into(),
            ));
        }
        if self.mode == ReceiverMode::Sic && (self.classes.len() != 2 || self.binning.bins != 1) {
            return Err(Error::Config(
                "the sic baseline needs exactly two classes and no binning".into(),
            ));
        }
        if self.mode != ReceiverMode::CodedDemixing && self.sic_outer {
            return Err(Error::Config(
                "sic_outer applies to coded_demixing only".into(),
            ));
        }
        if !self.known_k && self.binning.occupancy_estimator != OccupancyEstimator::Round {
            return Err(Error::Config(
                "unknown K requires the round occupancy estimator".into(),
            ));
        }
        if !self.known_k && !self.binning.sends_binid() {
            return Err(Error::Config(
                "unknown K requires a bin identification sequence (bins > 1)".into(),
            ));
        }
        if self.amp.iterations == 0 {
            return Err(Error::Config("amp.iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Flattened per-group parameters: one entry per (class, bin) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub id: usize,
    pub class: usize,
    pub bin: usize,
    /// Payload amplitude `d_g`.
    pub amplitude: f64,
    /// Full message length `w_g` including bin-select bits.
    pub message_bits: usize,
    pub section_bits: u32,
    pub sections: usize,
    pub rate: Rate,
    pub sensing_seed: u64,
    pub graph_seed: u64,
}

/// Energy per channel use `P` such that `Eb/N0 = n P / (2 w)`.
pub fn power_from_ebno(ebno_db: f64, n: usize, message_bits: usize) -> f64 {
    2.0 * message_bits as f64 * 10f64.powf(ebno_db / 10.0) / n as f64
}

/// Payload amplitude `d` giving expected codeword energy `fraction * n P`
/// over `sections` unit-norm columns.
pub fn amplitude_from_ebno(
    ebno_db: f64,
    n: usize,
    message_bits: usize,
    sections: usize,
    power_fraction: f64,
) -> f64 {
    let p = power_from_ebno(ebno_db, n, message_bits);
    (power_fraction * n as f64 * p / sections as f64).sqrt()
}

impl Scenario {
    /// Per-group parameters at the scenario's `ebno_db`.
    pub fn groups(&self) -> Result<Vec<GroupConfig>> {
        self.validate()?;
        let mut out = Vec::new();
        for (c, class) in self.classes.iter().enumerate() {
            let w = class.message_bits()?;
            let d = amplitude_from_ebno(
                self.ebno_db,
                self.n,
                w,
                class.sections,
                self.binning.payload_fraction(),
            );
            for bin in 0..self.binning.bins {
                out.push(GroupConfig {
                    id: out.len(),
                    class: c,
                    bin,
                    amplitude: d,
                    message_bits: w,
                    section_bits: class.section_bits,
                    sections: class.sections,
                    rate: class.rate,
                    sensing_seed: class.sensing_seed.wrapping_add(bin as u64),
                    graph_seed: class.graph_seed.wrapping_add(bin as u64),
                });
            }
        }
        Ok(out)
    }

    /// Amplitude of the bin identification symbol (`None` without binning).
    pub fn binid_amplitude(&self) -> Option<f64> {
        if !self.binning.sends_binid() {
            return None;
        }
        let w = self.classes[0].message_bits().ok()?;
        let p = power_from_ebno(self.ebno_db, self.n, w);
        Some((self.binning.binid_power_fraction * self.n as f64 * p).sqrt())
    }
}
