use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{BoolFnError, Cover, Literal};

/// A wire in a [`GateNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    Const(bool),
    /// State bit `i`.
    Input(u16),
    /// Output of the gate at this index.
    Gate(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Not,
    And,
    Or,
    Xor,
}

impl GateKind {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::Not => !a,
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Xor => a ^ b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "not",
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Xor => "xor",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "not" => GateKind::Not,
            "and" => GateKind::And,
            "or" => GateKind::Or,
            "xor" => GateKind::Xor,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    Not(Signal),
    And(Signal, Signal),
    Or(Signal, Signal),
    Xor(Signal, Signal),
}

impl Gate {
    pub fn binary(kind: GateKind, a: Signal, b: Signal) -> Self {
        match kind {
            GateKind::Not => panic!("NOT takes one operand"),
            GateKind::And => Gate::And(a, b),
            GateKind::Or => Gate::Or(a, b),
            GateKind::Xor => Gate::Xor(a, b),
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Not(_) => GateKind::Not,
            Gate::And(..) => GateKind::And,
            Gate::Or(..) => GateKind::Or,
            Gate::Xor(..) => GateKind::Xor,
        }
    }

    pub fn operands(&self) -> Vec<Signal> {
        match *self {
            Gate::Not(a) => vec![a],
            Gate::And(a, b) | Gate::Or(a, b) | Gate::Xor(a, b) => vec![a, b],
        }
    }

    fn map(self, mut f: impl FnMut(Signal) -> Signal) -> Self {
        match self {
            Gate::Not(a) => Gate::Not(f(a)),
            Gate::And(a, b) => Gate::And(f(a), f(b)),
            Gate::Or(a, b) => Gate::Or(f(a), f(b)),
            Gate::Xor(a, b) => Gate::Xor(f(a), f(b)),
        }
    }

    /// Commutative operands in ascending order.
    fn canonical(self) -> Self {
        match self {
            Gate::And(a, b) if b < a => Gate::And(b, a),
            Gate::Or(a, b) if b < a => Gate::Or(b, a),
            Gate::Xor(a, b) if b < a => Gate::Xor(b, a),
            g => g,
        }
    }
}

/// Combinational network of NOT and 2-input AND/OR/XOR gates over the
/// state bits `0..inputs`. Gates are stored in topological order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateNetwork {
    inputs: u16,
    gates: Vec<Gate>,
    outputs: Vec<Signal>,
}

impl GateNetwork {
    /// Validates that every operand is a constant, an existing input, or an
    /// earlier gate.
    pub fn new(inputs: u16, gates: Vec<Gate>, outputs: Vec<Signal>) -> Result<Self, BoolFnError> {
        let ok = |s: Signal, limit: usize| match s {
            Signal::Const(_) => true,
            Signal::Input(i) => i < inputs,
            Signal::Gate(g) => (g as usize) < limit,
        };
        for (idx, gate) in gates.iter().enumerate() {
            if let Some(bad) = gate.operands().into_iter().find(|s| !ok(*s, idx)) {
                return Err(BoolFnError::DanglingOperand { gate: idx, operand: bad });
            }
        }
        if let Some(bad) = outputs.iter().find(|s| !ok(**s, gates.len())) {
            return Err(BoolFnError::DanglingOperand { gate: gates.len(), operand: *bad });
        }
        Ok(Self { inputs, gates, outputs })
    }

    /// Output `i` is wired straight to input `i`.
    pub fn identity(width: u16) -> Self {
        Self { inputs: width, gates: Vec::new(), outputs: (0..width).map(Signal::Input).collect() }
    }

    pub fn num_inputs(&self) -> u16 {
        self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[Signal] {
        &self.outputs
    }

    pub fn evaluate(&self, input: &[bool]) -> Result<Vec<bool>, BoolFnError> {
        if input.len() != self.inputs as usize {
            return Err(BoolFnError::WidthMismatch { expected: self.inputs as usize, got: input.len() });
        }
        let mut values = Vec::with_capacity(self.gates.len());
        let read = |s: Signal, values: &[bool]| match s {
            Signal::Const(b) => b,
            Signal::Input(i) => input[i as usize],
            Signal::Gate(g) => values[g as usize],
        };
        for gate in &self.gates {
            let v = match *gate {
                Gate::Not(a) => !read(a, &values),
                Gate::And(a, b) => read(a, &values) & read(b, &values),
                Gate::Or(a, b) => read(a, &values) | read(b, &values),
                Gate::Xor(a, b) => read(a, &values) ^ read(b, &values),
            };
            values.push(v);
        }
        Ok(self.outputs.iter().map(|&s| read(s, &values)).collect())
    }

    /// Evaluates with bit `i` of `input` feeding state bit `i`; output `j`
    /// lands in bit `j` of the result.
    pub fn evaluate_word(&self, input: u32) -> Result<u32, BoolFnError> {
        if self.outputs.len() > 32 {
            return Err(BoolFnError::TooManyOutputs(self.outputs.len()));
        }
        if self.inputs < 32 && input >> self.inputs != 0 {
            return Err(BoolFnError::WidthMismatch {
                expected: self.inputs as usize,
                got: 32 - input.leading_zeros() as usize,
            });
        }
        let bits: Vec<bool> = (0..self.inputs).map(|i| input >> i & 1 == 1).collect();
        Ok(self
            .evaluate(&bits)?
            .into_iter()
            .enumerate()
            .fold(0, |acc, (j, b)| acc | (b as u32) << j))
    }

    /// Indices of gates reachable from the outputs.
    pub fn reachable(&self) -> Vec<bool> {
        let mut live = vec![false; self.gates.len()];
        for s in &self.outputs {
            if let Signal::Gate(g) = s {
                live[*g as usize] = true;
            }
        }
        for idx in (0..self.gates.len()).rev() {
            if live[idx] {
                for s in self.gates[idx].operands() {
                    if let Signal::Gate(g) = s {
                        live[g as usize] = true;
                    }
                }
            }
        }
        live
    }
}

/// Number of gates of each kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateCounts {
    pub not_count: u32,
    pub and_count: u32,
    pub or_count: u32,
    pub xor_count: u32,
}

impl GateCounts {
    pub fn total(&self) -> u32 {
        self.not_count + self.and_count + self.or_count + self.xor_count
    }

    pub fn two_input_total(&self) -> u32 {
        self.and_count + self.or_count + self.xor_count
    }

    pub fn get(&self, kind: GateKind) -> u32 {
        match kind {
            GateKind::Not => self.not_count,
            GateKind::And => self.and_count,
            GateKind::Or => self.or_count,
            GateKind::Xor => self.xor_count,
        }
    }
}

/// Counts gate nodes per kind. Leaves and constant roots are free.
pub fn count_gates(network: &GateNetwork) -> GateCounts {
    let mut c = GateCounts::default();
    for gate in &network.gates {
        match gate.kind() {
            GateKind::Not => c.not_count += 1,
            GateKind::And => c.and_count += 1,
            GateKind::Or => c.or_count += 1,
            GateKind::Xor => c.xor_count += 1,
        }
    }
    c
}

/// Incremental network construction.
///
/// Inverters on state bits are always shared. With [`NetworkBuilder::hashed`]
/// every structurally identical gate is shared as well.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    inputs: u16,
    gates: Vec<Gate>,
    hash_all: bool,
    table: HashMap<Gate, Signal>,
}

impl NetworkBuilder {
    pub fn new(inputs: u16) -> Self {
        Self { inputs, gates: Vec::new(), hash_all: false, table: HashMap::new() }
    }

    pub fn hashed(inputs: u16) -> Self {
        Self { hash_all: true, ..Self::new(inputs) }
    }

    pub fn add(&mut self, gate: Gate) -> Signal {
        let gate = gate.canonical();
        let shared = self.hash_all || matches!(gate, Gate::Not(Signal::Input(_)));
        if shared {
            if let Some(&s) = self.table.get(&gate) {
                return s;
            }
        }
        let s = Signal::Gate(self.gates.len() as u32);
        self.gates.push(gate);
        if shared {
            self.table.insert(gate, s);
        }
        s
    }

    pub fn not(&mut self, a: Signal) -> Signal {
        self.add(Gate::Not(a))
    }

    pub fn literal(&mut self, bit: u16, positive: bool) -> Signal {
        if positive {
            Signal::Input(bit)
        } else {
            self.not(Signal::Input(bit))
        }
    }

    /// Left-leaning chain `((s0 op s1) op s2) ...`; `None` for an empty slice.
    pub fn chain(&mut self, kind: GateKind, signals: &[Signal]) -> Option<Signal> {
        let (&first, rest) = signals.split_first()?;
        Some(rest.iter().fold(first, |acc, &s| self.add(Gate::binary(kind, acc, s))))
    }

    pub fn finish(self, outputs: Vec<Signal>) -> GateNetwork {
        GateNetwork { inputs: self.inputs, gates: self.gates, outputs }
    }
}

/// Realizes a DNF cover: one AND chain per product, one OR chain joining
/// them, one shared inverter per negated state bit.
pub fn to_gate_network(cover: &Cover) -> GateNetwork {
    let mut b = NetworkBuilder::new(cover.width() as u16);
    let out = dnf_signal(&mut b, cover);
    b.finish(vec![out])
}

pub(crate) fn dnf_signal(b: &mut NetworkBuilder, cover: &Cover) -> Signal {
    if cover.implicants().iter().any(|i| i.is_universal()) {
        return Signal::Const(true);
    }
    let products: Vec<Signal> = cover
        .implicants()
        .iter()
        .map(|imp| {
            let lits: Vec<Signal> = (0..cover.width())
                .filter_map(|bit| match imp.literal(bit) {
                    Literal::Absent => None,
                    Literal::Positive => Some(b.literal(bit as u16, true)),
                    Literal::Negative => Some(b.literal(bit as u16, false)),
                })
                .collect();
            b.chain(GateKind::And, &lits).expect("non-universal product has a literal")
        })
        .collect();
    b.chain(GateKind::Or, &products).unwrap_or(Signal::Const(false))
}

/// Merges several single- or multi-output networks over the same state bits
/// into one network, sharing every structurally identical subtree.
/// Unreachable gates are dropped.
pub fn cse(networks: &[GateNetwork]) -> Result<GateNetwork, BoolFnError> {
    let inputs = networks.first().map_or(0, |n| n.inputs);
    if let Some(bad) = networks.iter().find(|n| n.inputs != inputs) {
        return Err(BoolFnError::LeafMismatch(inputs, bad.inputs));
    }
    let mut b = NetworkBuilder::hashed(inputs);
    let mut outputs = Vec::new();
    for net in networks {
        let live = net.reachable();
        let mut map: Vec<Signal> = Vec::with_capacity(net.gates.len());
        let remap = |s: Signal, map: &[Signal]| match s {
            Signal::Gate(g) => map[g as usize],
            other => other,
        };
        for (idx, gate) in net.gates.iter().enumerate() {
            let s = if live[idx] {
                b.add(gate.map(|s| remap(s, &map)))
            } else {
                Signal::Const(false)
            };
            map.push(s);
        }
        outputs.extend(net.outputs.iter().map(|&s| remap(s, &map)));
    }
    Ok(b.finish(outputs))
}
