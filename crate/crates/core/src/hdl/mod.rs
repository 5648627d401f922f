//! Structural HDL and netlist-file output for generated predicates, and
//! parsers for both so that emitted artifacts can be checked by re-simulation.
//!
//! Verilog output uses gate primitives and one flip-flop cell per state bit
//! (`OP_DFFR`, see [`cell_library`]). The netlist file is a versioned
//! line-oriented format:
//!
//! ```text
//! opnet 1
//! width 3
//! reset 0x0
//! gate g0 not i0
//! gate g1 and g0 i1
//! output 0 g1
//! output 1 i0
//! output 2 0
//! wire 0 2
//! wire 1 ~0
//! end
//! ```

mod netfile;
mod verilog;

pub use netfile::{emit_netlist, emit_netlist_file, parse_netlist, parse_netlist_file};
pub use verilog::{cell_library, emit_verilog, parse_verilog, ParsedModule, DFF_CELL};

use std::collections::{BinaryHeap, HashMap};
use std::cmp::Reverse;

use thiserror::Error;

use crate::boolfn::{BoolFnError, Gate, GateKind, Signal};
use crate::fsm::FsmError;

#[derive(Debug, Error)]
pub enum HdlError {
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("input ends before `{0}`")]
    Truncated(&'static str),
    #[error("unsupported format version {0}")]
    VersionMismatch(String),
    #[error("`{0}` is used but never driven")]
    Dangling(String),
    #[error("combinational loop through `{0}`")]
    Cyclic(String),
    #[error("constant bit {bit} is wired to flip-flop {flip_flop}, which does not exist")]
    WiringOutOfRange { bit: usize, flip_flop: u8 },
    #[error(transparent)]
    Network(#[from] BoolFnError),
    #[error(transparent)]
    Fsm(#[from] FsmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const KEYWORDS: &[&str] = &[
    "always", "and", "assign", "begin", "buf", "case", "else", "end", "endcase", "endmodule", "for", "if", "initial",
    "inout", "input", "integer", "module", "nand", "nor", "not", "or", "output", "parameter", "posedge", "reg", "wire",
    "xnor", "xor",
];

/// Plain Verilog identifier that is not a reserved word.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !KEYWORDS.contains(&name)
}

/// A gate operand before names are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Operand {
    Const(bool),
    Input(u16),
    Named(String),
}

/// Named gates in file order; resolved into a topologically ordered gate list.
#[derive(Debug, Default)]
struct Draft {
    gates: Vec<(String, GateKind, Vec<Operand>)>,
    index: HashMap<String, usize>,
}

impl Draft {
    fn add(&mut self, name: String, kind: GateKind, operands: Vec<Operand>, line: usize) -> Result<(), HdlError> {
        let arity = if kind == GateKind::Not { 1 } else { 2 };
        if operands.len() != arity {
            return Err(HdlError::Malformed {
                line,
                message: format!("{} takes {arity} operand(s), got {}", kind.name(), operands.len()),
            });
        }
        if self.index.insert(name.clone(), self.gates.len()).is_some() {
            return Err(HdlError::Malformed { line, message: format!("`{name}` is driven twice") });
        }
        self.gates.push((name, kind, operands));
        Ok(())
    }

    /// Orders gates so that operands come first, keeping file order where
    /// it already is topological.
    fn resolve(self) -> Result<Resolved, HdlError> {
        let n = self.gates.len();
        let mut deps = vec![Vec::new(); n];
        let mut users = vec![Vec::new(); n];
        for (g, (_, _, ops)) in self.gates.iter().enumerate() {
            for op in ops {
                if let Operand::Named(name) = op {
                    let &d = self.index.get(name).ok_or_else(|| HdlError::Dangling(name.clone()))?;
                    deps[g].push(d);
                    users[d].push(g);
                }
            }
        }
        let mut pending: Vec<usize> = deps.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&g| pending[g] == 0).map(Reverse).collect();
        let mut position = vec![None; n];
        let mut gates = Vec::with_capacity(n);
        while let Some(Reverse(g)) = ready.pop() {
            let (_, kind, ops) = &self.gates[g];
            let sig = |op: &Operand| match op {
                Operand::Const(b) => Signal::Const(*b),
                Operand::Input(i) => Signal::Input(*i),
                Operand::Named(name) => Signal::Gate(position[self.index[name]].expect("dependency placed first")),
            };
            gates.push(match kind {
                GateKind::Not => Gate::Not(sig(&ops[0])),
                k => Gate::binary(*k, sig(&ops[0]), sig(&ops[1])),
            });
            position[g] = Some(gates.len() as u32 - 1);
            for &u in &users[g] {
                pending[u] -= 1;
                if pending[u] == 0 {
                    ready.push(Reverse(u));
                }
            }
        }
        if let Some(stuck) = (0..n).find(|&g| position[g].is_none()) {
            return Err(HdlError::Cyclic(self.gates[stuck].0.clone()));
        }
        let names = self.index.into_iter().map(|(name, g)| (name, position[g].expect("placed"))).collect();
        Ok(Resolved { gates, names })
    }
}

struct Resolved {
    gates: Vec<Gate>,
    names: HashMap<String, u32>,
}

impl Resolved {
    fn signal(&self, op: &Operand) -> Result<Signal, HdlError> {
        Ok(match op {
            Operand::Const(b) => Signal::Const(*b),
            Operand::Input(i) => Signal::Input(*i),
            Operand::Named(name) => Signal::Gate(*self.names.get(name).ok_or_else(|| HdlError::Dangling(name.clone()))?),
        })
    }
}
