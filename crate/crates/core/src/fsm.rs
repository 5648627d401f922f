//! Autonomous state registers with a synchronous reset.
//!
//! One clock cycle maps the register `x` to `s` when reset is asserted and
//! to `f(x)` otherwise. The interesting property of a generated predicate is
//! the trajectory from `s`: it must settle in a fixpoint `z = f(z)` after a
//! known number of cycles.

use std::collections::HashMap;

use thiserror::Error;

use crate::boolfn::{BoolFnError, GateNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FsmError {
    #[error("register width {0} is outside 1..={max}", max = crate::MAX_WIDTH)]
    WidthOutOfRange(u8),
    #[error("transition network has {inputs} inputs and {outputs} outputs, expected {width} of each")]
    ShapeMismatch { width: u8, inputs: u16, outputs: usize },
    #[error("state {state:#x} does not fit in {width} bits")]
    StateOutOfRange { state: u32, width: u8 },
    #[error(transparent)]
    Network(#[from] BoolFnError),
}

/// Register width, next-state network `f` and reset value `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionSystem {
    width: u8,
    f: GateNetwork,
    reset_state: u32,
}

impl TransitionSystem {
    pub fn new(width: u8, f: GateNetwork, reset_state: u32) -> Result<Self, FsmError> {
        if width == 0 || width > crate::MAX_WIDTH {
            return Err(FsmError::WidthOutOfRange(width));
        }
        if f.num_inputs() != width as u16 || f.outputs().len() != width as usize {
            return Err(FsmError::ShapeMismatch { width, inputs: f.num_inputs(), outputs: f.outputs().len() });
        }
        check_state(width, reset_state)?;
        Ok(Self { width, f, reset_state })
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn network(&self) -> &GateNetwork {
        &self.f
    }

    pub fn reset_state(&self) -> u32 {
        self.reset_state
    }

    /// Number of distinct register values.
    pub fn state_count(&self) -> u64 {
        1u64 << self.width
    }

    /// `f(x)` without reset.
    pub fn next(&self, x: u32) -> Result<u32, FsmError> {
        check_state(self.width, x)?;
        Ok(self.f.evaluate_word(x)?)
    }

    /// One clock edge.
    pub fn step(&self, x: u32, rst: bool) -> Result<u32, FsmError> {
        check_state(self.width, x)?;
        if rst {
            Ok(self.reset_state)
        } else {
            self.next(x)
        }
    }

    /// Iterates `f` from the reset state for at most `max_cycles` evaluations
    /// (default `2^n`, which always classifies the trajectory).
    pub fn simulate_until_stable(&self, max_cycles: Option<u64>) -> Trajectory {
        let limit = max_cycles.unwrap_or(self.state_count()).max(1);
        let mut states = vec![self.reset_state];
        let mut seen: HashMap<u32, usize> = HashMap::from([(self.reset_state, 0)]);
        let mut x = self.reset_state;
        for cycle in 0..limit {
            let y = self.f.evaluate_word(x).expect("states stay within the register width");
            if y == x {
                return Trajectory { states, terminal: Terminal::Fixpoint { state: x, delay: cycle as u32 } };
            }
            if let Some(&first) = seen.get(&y) {
                let period = states.len() - first;
                return Trajectory { states, terminal: Terminal::LimitCycle { period: period as u32 } };
            }
            seen.insert(y, states.len());
            states.push(y);
            x = y;
        }
        Trajectory { states, terminal: Terminal::Truncated }
    }

    /// Cycles from reset until the fixpoint is reached, or `None` when the
    /// trajectory ends in a limit cycle.
    pub fn stabilization_delay(&self) -> Option<u32> {
        match self.simulate_until_stable(None).terminal {
            Terminal::Fixpoint { delay, .. } => Some(delay),
            _ => None,
        }
    }
}

fn check_state(width: u8, x: u32) -> Result<(), FsmError> {
    if width < 32 && x >> width != 0 {
        Err(FsmError::StateOutOfRange { state: x, width })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Terminal {
    /// `f(state) = state`, first reached after `delay` cycles.
    Fixpoint { state: u32, delay: u32 },
    /// A non-fixpoint state recurred `period` cycles after its first visit.
    LimitCycle { period: u32 },
    Truncated,
}

/// Visited states starting at the reset value, each the image of the one
/// before. For a fixpoint the last entry is `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<u32>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn fixpoint(&self) -> Option<(u32, u32)> {
        match self.terminal {
            Terminal::Fixpoint { state, delay } => Some((state, delay)),
            _ => None,
        }
    }
}
