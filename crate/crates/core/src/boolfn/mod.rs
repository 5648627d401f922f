//! Boolean functions over small state registers.
//!
//! The pipeline used by the sequence-based generators is
//! [`TruthTable`] → [`quine_mccluskey`] → [`to_gate_network`] (or
//! [`xor_rewrite`]) → [`cse`] → [`count_gates`].

mod cube;
mod network;
mod qm;
mod truth_table;
mod xor;

pub use cube::{Cover, Implicant, Literal};
pub use network::{cse, count_gates, to_gate_network, Gate, GateCounts, GateKind, GateNetwork, NetworkBuilder, Signal};
pub use qm::quine_mccluskey;
pub use truth_table::{TruthTable, TruthValue};
pub use xor::xor_rewrite;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoolFnError {
    #[error("bit width {0} is outside 1..={max}", max = crate::MAX_WIDTH)]
    WidthOutOfRange(u8),
    #[error("minterm {minterm} does not fit in {width} bits")]
    MintermOutOfRange { minterm: u32, width: u8 },
    #[error("minterm {0} is in both the on-set and the don't-care set")]
    Overlap(u32),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("input width mismatch: network has {expected} inputs, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("networks disagree on leaf count ({0} vs {1})")]
    LeafMismatch(u16, u16),
    #[error("gate {gate} references {operand:?}, which is not defined before it")]
    DanglingOperand { gate: usize, operand: Signal },
    #[error("network has {0} outputs, more than fit in a 32-bit word")]
    TooManyOutputs(usize),
}

pub(crate) fn check_width(width: u8) -> Result<(), BoolFnError> {
    if width == 0 || width > crate::MAX_WIDTH {
        Err(BoolFnError::WidthOutOfRange(width))
    } else {
        Ok(())
    }
}
