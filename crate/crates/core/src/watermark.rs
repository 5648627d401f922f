//! LUT-configuration watermarks.
//!
//! Tying inputs of a LUT low makes every configuration row with one of
//! those inputs set unreachable. Those rows (W bits) can carry a payload
//! without changing what the LUT computes. Tracing GND to LUT inputs finds
//! such cells at once, so [`harden`] drives the tied inputs from register
//! bits of an opaque predicate that settle at 0 instead.
//!
//! Netlist text format:
//!
//! ```text
//! lutnet 1
//! input a
//! buf a2 a
//! ff q0 d0 0
//! lut L0 o0 a a2 GND q0 0x8001
//! end
//! ```
//!
//! `lut <id> <output> <inputs I0..> <config>` lists inputs from `I0` up; the
//! config is hex with row `r` in bit `r`, row `r` being the input pattern
//! whose bit `i` is `I_i`. `GND` and `VCC` are built in.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolfn::{Gate, Signal};
use crate::opgen::{OpaquePredicate, WiringPlan};

pub const GND: &str = "GND";
pub const VCC: &str = "VCC";
pub const MAX_LUT_INPUTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WatermarkError {
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("net `{0}` has more than one driver")]
    DuplicateNet(String),
    #[error("cell `{0}` is declared twice")]
    DuplicateCell(String),
    #[error("cell `{cell}`: {message}")]
    BadCell { cell: String, message: String },
    #[error("payload of {len} bits exceeds the capacity of {capacity}")]
    CapacityOverflow { len: usize, capacity: usize },
    #[error("spec does not match the netlist: {0}")]
    SpecMismatch(String),
    #[error("combinational loop through `{0}`")]
    CombinationalLoop(String),
    #[error("no wired constant bit settles at 0")]
    NoZeroBit,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A `k`-input lookup table; `config[r]` is the output for input row `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutCell {
    pub id: String,
    pub output: String,
    pub inputs: Vec<String>,
    pub config: Vec<bool>,
}

impl LutCell {
    pub fn k(&self) -> usize {
        self.inputs.len()
    }

    pub fn eval(&self, values: impl Fn(&str) -> bool) -> bool {
        let row = self.inputs.iter().enumerate().fold(0usize, |r, (i, n)| r | (values(n) as usize) << i);
        self.config[row]
    }
}

/// What drives a net other than a LUT output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Input,
    Buffer(String),
    FlipFlop { d: String, init: bool },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutNetlist {
    /// Nets not driven by a cell, by name. `GND` and `VCC` are implicit.
    pub sources: BTreeMap<String, Source>,
    pub cells: Vec<LutCell>,
}

/// Driver of a net as seen by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Driver<'a> {
    Const(bool),
    Source(&'a Source),
    Cell(&'a LutCell),
}

impl LutNetlist {
    pub fn cell(&self, id: &str) -> Option<&LutCell> {
        self.cells.iter().find(|c| c.id == id)
    }

    fn cell_mut(&mut self, id: &str) -> Result<&mut LutCell, WatermarkError> {
        self.cells.iter_mut().find(|c| c.id == id).ok_or_else(|| WatermarkError::UnknownCell(id.to_string()))
    }

    fn drivers(&self) -> Result<HashMap<&str, Driver<'_>>, WatermarkError> {
        let mut d: HashMap<&str, Driver<'_>> = HashMap::from([(GND, Driver::Const(false)), (VCC, Driver::Const(true))]);
        for (name, src) in &self.sources {
            if d.insert(name, Driver::Source(src)).is_some() {
                return Err(WatermarkError::DuplicateNet(name.clone()));
            }
        }
        let mut ids = HashSet::new();
        for c in &self.cells {
            if !ids.insert(c.id.as_str()) {
                return Err(WatermarkError::DuplicateCell(c.id.clone()));
            }
            if d.insert(&c.output, Driver::Cell(c)).is_some() {
                return Err(WatermarkError::DuplicateNet(c.output.clone()));
            }
        }
        Ok(d)
    }

    /// Checks references, driver uniqueness, LUT shapes and that every loop
    /// passes through a flip-flop.
    pub fn validate(&self) -> Result<(), WatermarkError> {
        self.combinational_order().map(|_| ())
    }

    /// Combinationally driven nets, operands first.
    fn combinational_order(&self) -> Result<Vec<&str>, WatermarkError> {
        let drivers = self.drivers()?;
        for c in &self.cells {
            if c.k() > MAX_LUT_INPUTS || c.config.len() != 1 << c.k() {
                return Err(WatermarkError::BadCell {
                    cell: c.id.clone(),
                    message: format!("{} inputs with {} config bits", c.k(), c.config.len()),
                });
            }
        }
        let fanin = |net: &str| -> Vec<&str> {
            match drivers[net] {
                Driver::Cell(c) => c.inputs.iter().map(String::as_str).collect(),
                Driver::Source(Source::Buffer(src)) => vec![src.as_str()],
                _ => Vec::new(),
            }
        };
        for (&net, drv) in &drivers {
            let refs: Vec<&str> = match drv {
                Driver::Source(Source::FlipFlop { d, .. }) => vec![d.as_str()],
                _ => fanin(net),
            };
            if let Some(bad) = refs.into_iter().find(|r| !drivers.contains_key(r)) {
                return Err(WatermarkError::UnknownNet(bad.to_string()));
            }
        }
        // iterative DFS over sorted names for a deterministic order
        let mut names: Vec<&str> = drivers.keys().copied().collect();
        names.sort_unstable();
        let mut state: HashMap<&str, u8> = HashMap::new();
        let mut order = Vec::new();
        for &root in &names {
            if state.contains_key(root) {
                continue;
            }
            let mut stack = vec![(root, false)];
            while let Some((net, done)) = stack.pop() {
                if done {
                    state.insert(net, 2);
                    order.push(net);
                    continue;
                }
                match state.get(net) {
                    Some(2) => continue,
                    Some(_) => return Err(WatermarkError::CombinationalLoop(net.to_string())),
                    None => {}
                }
                state.insert(net, 1);
                stack.push((net, true));
                for src in fanin(net) {
                    match state.get(src) {
                        Some(1) => return Err(WatermarkError::CombinationalLoop(src.to_string())),
                        Some(_) => {}
                        None => stack.push((src, false)),
                    }
                }
            }
        }
        Ok(order)
    }

    /// Configuration bits of every cell, the view a bitstream gives.
    pub fn config_dump(&self) -> BTreeMap<String, Vec<bool>> {
        self.cells.iter().map(|c| (c.id.clone(), c.config.clone())).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("lutnet 1\n");
        for (name, src) in &self.sources {
            match src {
                Source::Input => writeln!(out, "input {name}"),
                Source::Buffer(s) => writeln!(out, "buf {name} {s}"),
                Source::FlipFlop { d, init } => writeln!(out, "ff {name} {d} {}", *init as u8),
            }
            .unwrap();
        }
        for c in &self.cells {
            writeln!(out, "lut {} {} {} {}", c.id, c.output, c.inputs.join(" "), config_hex(&c.config)).unwrap();
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self, WatermarkError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, message: String| WatermarkError::Parse { line, message };
        match lines.next() {
            Some((_, "lutnet 1")) => {}
            Some((line, l)) => return Err(bad(line, format!("expected `lutnet 1`, found `{l}`"))),
            None => return Err(bad(0, "empty input".into())),
        }
        let mut net = Self::default();
        let mut ended = false;
        let add_source = |net: &mut Self, name: &str, src: Source, line: usize| {
            if name == GND || name == VCC || net.sources.insert(name.to_string(), src).is_some() {
                return Err(bad(line, format!("net `{name}` is declared twice")));
            }
            Ok(())
        };
        for (line, l) in lines.by_ref() {
            let toks: Vec<&str> = l.split_whitespace().collect();
            match toks.as_slice() {
                ["input", name] => add_source(&mut net, name, Source::Input, line)?,
                ["buf", name, src] => add_source(&mut net, name, Source::Buffer(src.to_string()), line)?,
                ["ff", name, d, init @ ("0" | "1")] => {
                    add_source(&mut net, name, Source::FlipFlop { d: d.to_string(), init: *init == "1" }, line)?
                }
                ["lut", id, output, inputs @ .., hex] => {
                    let config = parse_config(hex, inputs.len()).ok_or_else(|| bad(line, format!("bad config `{hex}`")))?;
                    net.cells.push(LutCell {
                        id: id.to_string(),
                        output: output.to_string(),
                        inputs: inputs.iter().map(|s| s.to_string()).collect(),
                        config,
                    });
                }
                ["end"] => {
                    ended = true;
                    break;
                }
                _ => return Err(bad(line, format!("unrecognized line `{l}`"))),
            }
        }
        if !ended {
            return Err(bad(0, "missing `end`".into()));
        }
        if let Some((line, l)) = lines.next() {
            return Err(bad(line, format!("content after `end`: `{l}`")));
        }
        net.validate()?;
        Ok(net)
    }

    /// Cycle-accurate simulation starting with every flip-flop at its init value.
    pub fn simulator(&self) -> Result<Simulator<'_>, WatermarkError> {
        let order = self.combinational_order()?;
        let drivers = self.drivers()?;
        let ff: BTreeMap<&str, bool> = self
            .sources
            .iter()
            .filter_map(|(n, s)| match s {
                Source::FlipFlop { init, .. } => Some((n.as_str(), *init)),
                _ => None,
            })
            .collect();
        Ok(Simulator { netlist: self, order, drivers, ff })
    }
}

pub struct Simulator<'a> {
    netlist: &'a LutNetlist,
    order: Vec<&'a str>,
    drivers: HashMap<&'a str, Driver<'a>>,
    ff: BTreeMap<&'a str, bool>,
}

impl<'a> Simulator<'a> {
    /// Every net's value for the current register contents; primary inputs
    /// missing from `inputs` read 0.
    pub fn values(&self, inputs: &HashMap<String, bool>) -> HashMap<&'a str, bool> {
        let mut v: HashMap<&'a str, bool> = HashMap::with_capacity(self.order.len());
        for &net in &self.order {
            let x = match self.drivers[net] {
                Driver::Const(b) => b,
                Driver::Source(Source::Input) => inputs.get(net).copied().unwrap_or(false),
                Driver::Source(Source::Buffer(src)) => v[src.as_str()],
                Driver::Source(Source::FlipFlop { .. }) => self.ff[net],
                Driver::Cell(c) => c.eval(|n| v[n]),
            };
            v.insert(net, x);
        }
        v
    }

    /// One clock edge.
    pub fn step(&mut self, inputs: &HashMap<String, bool>) {
        let v = self.values(inputs);
        for (name, src) in &self.netlist.sources {
            if let Source::FlipFlop { d, .. } = src {
                self.ff.insert(name.as_str(), v[d.as_str()]);
            }
        }
    }

    pub fn flip_flops(&self) -> &BTreeMap<&'a str, bool> {
        &self.ff
    }
}

fn config_hex(config: &[bool]) -> String {
    let digits = config.len().div_ceil(4).max(1);
    let mut s = String::from("0x");
    for d in (0..digits).rev() {
        let nib = (0..4).filter(|b| config.get(d * 4 + b).copied().unwrap_or(false)).fold(0u32, |a, b| a | 1 << b);
        s.push(char::from_digit(nib, 16).expect("nibble"));
    }
    s
}

fn parse_config(hex: &str, k: usize) -> Option<Vec<bool>> {
    let digits = hex.strip_prefix("0x")?;
    let rows = 1usize << k;
    if k > MAX_LUT_INPUTS || digits.len() != rows.div_ceil(4).max(1) {
        return None;
    }
    let mut config = vec![false; rows];
    for (d, ch) in digits.chars().rev().enumerate() {
        let nib = ch.to_digit(16)?;
        for b in 0..4 {
            let bit = nib >> b & 1 == 1;
            match config.get_mut(d * 4 + b) {
                Some(slot) => *slot = bit,
                None if bit => return None,
                None => {}
            }
        }
    }
    Some(config)
}

/// One watermarked cell and which of its inputs are tied low.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mark {
    pub cell: String,
    pub fixed: BTreeSet<usize>,
}

/// Marked cells in ascending id order and the payload they carry.
///
/// The payload may be shorter than the capacity; trailing W bits are then
/// left as they were. Extraction reads `payload.len()` bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatermarkSpec {
    pub marks: Vec<Mark>,
    pub payload: Vec<bool>,
}

impl WatermarkSpec {
    pub fn new(mut marks: Vec<Mark>, payload: Vec<bool>) -> Self {
        marks.sort_by(|a, b| a.cell.cmp(&b.cell));
        Self { marks, payload }
    }

    /// Total number of W positions.
    pub fn capacity(&self, netlist: &LutNetlist) -> Result<usize, WatermarkError> {
        let mut total = 0;
        for m in &self.marks {
            total += w_rows(netlist, m)?.len();
        }
        Ok(total)
    }
}

/// Rows with at least one fixed input set, ascending.
fn w_rows_for(k: usize, fixed: &BTreeSet<usize>) -> Vec<usize> {
    let mask = fixed.iter().fold(0usize, |m, &i| m | 1 << i);
    (0..1usize << k).filter(|r| r & mask != 0).collect()
}

fn w_rows(netlist: &LutNetlist, mark: &Mark) -> Result<Vec<usize>, WatermarkError> {
    let cell = netlist.cell(&mark.cell).ok_or_else(|| WatermarkError::UnknownCell(mark.cell.clone()))?;
    check_fixed(cell.k(), mark)?;
    Ok(w_rows_for(cell.k(), &mark.fixed))
}

fn check_fixed(k: usize, mark: &Mark) -> Result<(), WatermarkError> {
    if let Some(&bad) = mark.fixed.iter().find(|&&i| i >= k) {
        return Err(WatermarkError::SpecMismatch(format!("cell `{}` has no input {bad}", mark.cell)));
    }
    Ok(())
}

/// Ties the fixed inputs to `driver_net` and writes the payload into the
/// W rows, cell by cell in ascending id order, rows ascending.
pub fn embed(netlist: &LutNetlist, spec: &WatermarkSpec, driver_net: &str) -> Result<LutNetlist, WatermarkError> {
    let capacity = spec.capacity(netlist)?;
    if spec.payload.len() > capacity {
        return Err(WatermarkError::CapacityOverflow { len: spec.payload.len(), capacity });
    }
    let mut out = netlist.clone();
    let mut bits = spec.payload.iter().copied();
    for mark in ordered(spec) {
        let rows = w_rows(netlist, mark)?;
        let cell = out.cell_mut(&mark.cell)?;
        for &i in &mark.fixed {
            cell.inputs[i] = driver_net.to_string();
        }
        for (r, b) in rows.into_iter().zip(bits.by_ref()) {
            cell.config[r] = b;
        }
    }
    out.validate()?;
    Ok(out)
}

fn ordered(spec: &WatermarkSpec) -> Vec<&Mark> {
    let mut marks: Vec<&Mark> = spec.marks.iter().collect();
    marks.sort_by(|a, b| a.cell.cmp(&b.cell));
    marks
}

pub fn extract(netlist: &LutNetlist, spec: &WatermarkSpec) -> Result<Vec<bool>, WatermarkError> {
    extract_from_dump(&netlist.config_dump(), spec)
}

/// Reads the payload from configuration bits alone.
pub fn extract_from_dump(dump: &BTreeMap<String, Vec<bool>>, spec: &WatermarkSpec) -> Result<Vec<bool>, WatermarkError> {
    let mut bits = Vec::with_capacity(spec.payload.len());
    for mark in ordered(spec) {
        let config = dump.get(&mark.cell).ok_or_else(|| WatermarkError::UnknownCell(mark.cell.clone()))?;
        if !config.len().is_power_of_two() {
            return Err(WatermarkError::SpecMismatch(format!("cell `{}` has {} config bits", mark.cell, config.len())));
        }
        check_fixed(config.len().trailing_zeros() as usize, mark)?;
        for r in w_rows_for(config.len().trailing_zeros() as usize, &mark.fixed) {
            if bits.len() == spec.payload.len() {
                return Ok(bits);
            }
            bits.push(config[r]);
        }
    }
    if bits.len() < spec.payload.len() {
        return Err(WatermarkError::CapacityOverflow { len: spec.payload.len(), capacity: bits.len() });
    }
    Ok(bits)
}

fn crc8(bits: &[bool]) -> u8 {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|ch| ch.iter().enumerate().fold(0u8, |b, (i, &x)| b | (x as u8) << (7 - i)))
        .collect();
    let algo = crc::Crc::<u8>::new(&crc::CRC_8_SMBUS);
    let mut digest = algo.digest();
    digest.update(&(bits.len() as u32).to_be_bytes());
    digest.update(&bytes);
    digest.finalize()
}

/// Prefixes the message with its CRC-8, most significant bit first.
pub fn with_crc8(message: &[bool]) -> Vec<bool> {
    let c = crc8(message);
    (0..8).rev().map(|i| c >> i & 1 == 1).chain(message.iter().copied()).collect()
}

/// The message if the CRC-8 prefix matches.
pub fn check_crc8(payload: &[bool]) -> Option<Vec<bool>> {
    if payload.len() < 8 {
        return None;
    }
    let (head, msg) = payload.split_at(8);
    let c = head.iter().fold(0u8, |a, &b| a << 1 | b as u8);
    (c == crc8(msg)).then(|| msg.to_vec())
}

/// Cells with an input that is GND or reaches GND through buffers only.
pub fn gnd_trace_attack(netlist: &LutNetlist) -> Vec<String> {
    let resolve = |net: &str| {
        let mut net = net;
        let mut seen = HashSet::new();
        while let Some(Source::Buffer(src)) = netlist.sources.get(net) {
            if !seen.insert(net) {
                break;
            }
            net = src;
        }
        net == GND
    };
    netlist.cells.iter().filter(|c| c.inputs.iter().any(|i| resolve(i))).map(|c| c.id.clone()).collect()
}

/// Net names used for a predicate instantiated with [`instantiate_predicate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateNets {
    /// Register bit `i`.
    pub state: Vec<String>,
    /// Constant bit `C_j` after the wiring plan, with the value it settles at.
    pub constant: Vec<(String, bool)>,
}

/// Adds the predicate's register as flip-flops and its gates as LUTs, all
/// names starting with `prefix`. Inverted taps get a 1-input LUT.
pub fn instantiate_predicate(
    netlist: &LutNetlist,
    op: &OpaquePredicate,
    wiring: &WiringPlan,
    prefix: &str,
) -> Result<(LutNetlist, PredicateNets), WatermarkError> {
    let mut out = netlist.clone();
    let f = op.system.network();
    let n = op.width() as usize;
    let state: Vec<String> = (0..n).map(|i| format!("{prefix}q{i}")).collect();
    let mut gate_nets: Vec<String> = Vec::with_capacity(f.gates().len());
    let net_of = |s: Signal, gate_nets: &[String]| -> String {
        match s {
            Signal::Const(false) => GND.to_string(),
            Signal::Const(true) => VCC.to_string(),
            Signal::Input(i) => state[i as usize].clone(),
            Signal::Gate(g) => gate_nets[g as usize].clone(),
        }
    };
    for (idx, gate) in f.gates().iter().enumerate() {
        // constants are folded into the table so no LUT reads GND or VCC
        let ops = gate.operands();
        let live: Vec<usize> = (0..ops.len()).filter(|&i| !matches!(ops[i], Signal::Const(_))).collect();
        let config: Vec<bool> = (0..1usize << live.len())
            .map(|row| {
                let val = |i: usize| match ops[i] {
                    Signal::Const(b) => b,
                    _ => row >> live.iter().position(|&l| l == i).expect("live") & 1 == 1,
                };
                match gate {
                    Gate::Not(_) => !val(0),
                    g => g.kind().apply(val(0), val(1)),
                }
            })
            .collect();
        let net = if live.is_empty() {
            (if config[0] { VCC } else { GND }).to_string()
        } else {
            let net = format!("{prefix}g{idx}");
            out.cells.push(LutCell {
                id: format!("{prefix}lut{idx}"),
                output: net.clone(),
                inputs: live.iter().map(|&i| net_of(ops[i], &gate_nets)).collect(),
                config,
            });
            net
        };
        gate_nets.push(net);
    }
    for (i, &d) in f.outputs().iter().enumerate() {
        let init = op.reset_state() >> i & 1 == 1;
        out.sources.insert(state[i].clone(), Source::FlipFlop { d: net_of(d, &gate_nets), init });
    }
    let mut constant = Vec::with_capacity(wiring.len());
    for (j, tap) in wiring.taps.iter().enumerate() {
        let ff = tap.flip_flop as usize;
        if ff >= n {
            return Err(WatermarkError::SpecMismatch(format!("constant bit {j} reads missing flip-flop {ff}")));
        }
        let value = op.stable_bit(tap.flip_flop) ^ tap.inverted;
        if tap.inverted {
            let net = format!("{prefix}c{j}");
            out.cells.push(LutCell {
                id: format!("{prefix}inv{j}"),
                output: net.clone(),
                inputs: vec![state[ff].clone()],
                config: vec![true, false],
            });
            constant.push((net, value));
        } else {
            constant.push((state[ff].clone(), value));
        }
    }
    out.validate()?;
    Ok((out, PredicateNets { state, constant }))
}

/// Re-drives every fixed input of the marked cells from a predicate bit that
/// settles at 0, rotating over all such bits. Configurations are untouched.
pub fn harden(
    netlist: &LutNetlist,
    spec: &WatermarkSpec,
    op: &OpaquePredicate,
    wiring: &WiringPlan,
) -> Result<LutNetlist, WatermarkError> {
    let (mut out, nets) = instantiate_predicate(netlist, op, wiring, "op_")?;
    let zeros: Vec<&String> = nets.constant.iter().filter(|(_, v)| !v).map(|(n, _)| n).collect();
    if zeros.is_empty() {
        return Err(WatermarkError::NoZeroBit);
    }
    let mut next = zeros.iter().cycle();
    for mark in ordered(spec) {
        let cell = out.cell_mut(&mark.cell)?;
        check_fixed(cell.k(), mark)?;
        for &i in &mark.fixed {
            cell.inputs[i] = next.next().expect("cycle").to_string();
        }
    }
    out.validate()?;
    Ok(out)
}

/// A cell's outputs over all patterns of its free inputs, with the fixed
/// inputs at the values the simulator currently gives their nets.
pub fn cell_behavior(
    sim: &Simulator<'_>,
    netlist: &LutNetlist,
    mark: &Mark,
    inputs: &HashMap<String, bool>,
) -> Result<Vec<bool>, WatermarkError> {
    let cell = netlist.cell(&mark.cell).ok_or_else(|| WatermarkError::UnknownCell(mark.cell.clone()))?;
    check_fixed(cell.k(), mark)?;
    let values = sim.values(inputs);
    let free: Vec<usize> = (0..cell.k()).filter(|i| !mark.fixed.contains(i)).collect();
    Ok((0..1usize << free.len())
        .map(|pattern| {
            let row = (0..cell.k()).fold(0usize, |r, i| {
                let bit = match free.iter().position(|&f| f == i) {
                    Some(p) => pattern >> p & 1 == 1,
                    None => values[cell.inputs[i].as_str()],
                };
                r | (bit as usize) << i
            });
            cell.config[row]
        })
        .collect())
}

/// A cell's outputs over its free inputs with the fixed inputs at 0.
pub fn reachable_function(netlist: &LutNetlist, mark: &Mark) -> Result<Vec<bool>, WatermarkError> {
    let cell = netlist.cell(&mark.cell).ok_or_else(|| WatermarkError::UnknownCell(mark.cell.clone()))?;
    check_fixed(cell.k(), mark)?;
    let free: Vec<usize> = (0..cell.k()).filter(|i| !mark.fixed.contains(i)).collect();
    Ok((0..1usize << free.len())
        .map(|pattern| {
            let row = free.iter().enumerate().fold(0usize, |r, (p, &i)| r | (pattern >> p & 1) << i);
            cell.config[row]
        })
        .collect())
}

/// A synthetic design: `cells` random 4-input LUTs over 8 primary inputs
/// and earlier LUT outputs, with a sprinkling of buffers. `marked` of them,
/// spread evenly, are marked with inputs I3 and I2 fixed (12 W bits each).
pub fn fixture<R: Rng + ?Sized>(cells: usize, marked: usize, rng: &mut R) -> (LutNetlist, WatermarkSpec) {
    assert!(marked <= cells, "cannot mark more cells than exist");
    let mut net = LutNetlist::default();
    let mut pool: Vec<String> = (0..8).map(|i| format!("in{i}")).collect();
    for p in &pool {
        net.sources.insert(p.clone(), Source::Input);
    }
    for c in 0..cells {
        let inputs: Vec<String> = index::sample(rng, pool.len(), 4).into_iter().map(|i| pool[i].clone()).collect();
        let config: Vec<bool> = (0..16).map(|_| rng.gen()).collect();
        let output = format!("n{c}");
        net.cells.push(LutCell { id: format!("L{c:02}"), output: output.clone(), inputs, config });
        pool.push(output.clone());
        if c % 7 == 3 {
            let b = format!("b{c}");
            net.sources.insert(b.clone(), Source::Buffer(output));
            pool.push(b);
        }
    }
    let marks = (0..marked)
        .map(|m| Mark { cell: format!("L{:02}", m * cells / marked.max(1)), fixed: BTreeSet::from([2, 3]) })
        .collect();
    (net, WatermarkSpec::new(marks, Vec::new()))
}
