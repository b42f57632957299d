//! Coded demixing for unsourced random access.
//!
//! Users from several groups share one channel. Each group has its own outer
//! non-binary LDPC code and sensing operator; the receiver runs one AMP
//! decoder over the stacked operator with a belief-propagation denoiser and
//! then extracts candidate messages by root-initialized BP on each outer
//! graph.

pub mod access;
pub mod amp;
pub mod error;
pub mod extraction;
pub mod gf;
pub mod harness;
pub mod outer_code;
pub mod sectioned;
pub mod sensing;
pub mod wht;

pub use error::{Error, Result};
pub use sectioned::SectionedVector;
