//! Access protocol: scenario and group configuration, user encoding with
//! optional stochastic binning, occupancy estimation and the receivers.

pub mod config;
pub mod occupancy;
pub mod receiver;
pub mod transmit;

pub use config::{
    amplitude_from_ebno, power_from_ebno, BinningConfig, ClassConfig, GroupConfig,
    OccupancyEstimator, ReceiverMode, Scenario, DEFAULT_BINID_FRACTION,
};
pub use occupancy::{estimate_occupancy, OccupancyEstimate};
pub use receiver::{run_receiver, AmpRun, Received, ReceiverOutput, SIC_KEEP_FRACTION};
pub use transmit::{encode_user, System, TransmitFrame};
