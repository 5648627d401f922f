//! Opaque-predicate generators.
//!
//! Two strategies are supported. Encoding an existing FSM
//! ([`encode_states`], [`plan_wiring`]) picks state codes so that some
//! register bits never change while the FSM walks a given subset of states.
//! Adding a dedicated FSM ([`qm_generate`], [`qmx_generate`],
//! [`rnd_generate`]) synthesizes a small register that settles in a known
//! fixpoint a known number of cycles after reset.

mod encoding;
mod rnd;
mod sequence;

pub use encoding::{encode_states, plan_wiring, EncodingAssignment, EncodingProblem, Tap, WiringPlan};
pub use rnd::{rnd_generate, rnd_generate_with, RndBit, RndOptions, DEFAULT_ATTEMPT_BUDGET};
pub use sequence::{
    gen_sequence, predicate_from_sequence, qm_generate, qm_generate_with, qmx_generate, qmx_generate_with,
    DelayTarget, StateSequence,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolfn::{BoolFnError, GateCounts};
use crate::fsm::{FsmError, TransitionSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpGenError {
    #[error("register width {0} is outside the supported range")]
    WidthOutOfRange(u8),
    #[error("state {state:#x} does not fit in {width} bits")]
    StateOutOfRange { state: u32, width: u8 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no acceptable transition function within {attempts} attempts")]
    BudgetExhausted { attempts: u64 },
    #[error("gave up after {attempts} attempts: time limit reached")]
    Timeout { attempts: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("constant needs a bit value {0} that no fixed position holds")]
    UnmatchedBitValue(bool),
    #[error(transparent)]
    BoolFn(#[from] BoolFnError),
    #[error(transparent)]
    Fsm(#[from] FsmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    #[serde(rename = "QM")]
    Qm,
    #[serde(rename = "QMX")]
    Qmx,
    #[serde(rename = "RND")]
    Rnd,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Qm, Generator::Qmx, Generator::Rnd];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Qm => "QM",
            Generator::Qmx => "QMX",
            Generator::Rnd => "RND",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = OpGenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qm" => Ok(Generator::Qm),
            "qmx" => Ok(Generator::Qmx),
            "rnd" => Ok(Generator::Rnd),
            other => Err(OpGenError::InvalidArgument(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// A generated register together with its verified settling behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpaquePredicate {
    pub system: TransitionSystem,
    pub stable_state: u32,
    pub delay: u32,
    pub generator: Generator,
    pub counts: GateCounts,
    /// The state sequence the QM/QMX network was synthesized from.
    pub sequence: Option<StateSequence>,
    /// Per-bit draws of the RND generator, indexed by state bit.
    pub rnd_bits: Option<Vec<RndBit>>,
    /// Candidate functions drawn; always 1 for QM and QMX.
    pub attempts: u64,
}

impl OpaquePredicate {
    pub fn width(&self) -> u8 {
        self.system.width()
    }

    pub fn reset_state(&self) -> u32 {
        self.system.reset_state()
    }

    /// Wraps a register read back from a file, checking that it settles.
    pub fn from_system(system: TransitionSystem, generator: Generator) -> Result<Self, OpGenError> {
        let (stable_state, delay) = system
            .simulate_until_stable(None)
            .fixpoint()
            .ok_or_else(|| OpGenError::Infeasible("the register never settles in a fixpoint after reset".into()))?;
        let counts = crate::boolfn::count_gates(system.network());
        Ok(Self { system, stable_state, delay, generator, counts, sequence: None, rnd_bits: None, attempts: 1 })
    }

    /// Bit `i` of the stable state.
    pub fn stable_bit(&self, i: u8) -> bool {
        self.stable_state >> i & 1 == 1
    }
}

pub(crate) fn check_width(width: u8) -> Result<(), OpGenError> {
    if width == 0 || width > crate::MAX_WIDTH {
        Err(OpGenError::WidthOutOfRange(width))
    } else {
        Ok(())
    }
}

pub(crate) fn check_state(width: u8, state: u32) -> Result<(), OpGenError> {
    if state >> width != 0 {
        Err(OpGenError::StateOutOfRange { state, width })
    } else {
        Ok(())
    }
}
