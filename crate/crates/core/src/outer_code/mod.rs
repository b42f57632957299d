//! Outer non-binary LDPC code: graph construction, systematic encoding and
//! belief propagation.

pub mod bp;
pub mod encode;
pub mod graph;

pub use bp::{
    check_to_variable, section_beliefs, variable_to_check, BeliefPropagation, SectionPmf,
    WEIGHT_FLOOR,
};
pub use encode::{bits_to_symbols, encode, encode_symbols, info_bits_of, symbols_to_bits};
pub use graph::{build_graph, CheckNode, CheckSpec, FactorGraph, GraphSpec, Rate};
