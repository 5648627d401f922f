use std::fmt::Write as _;
use std::path::Path;

use super::{Draft, HdlError, Operand};
use crate::boolfn::{GateKind, GateNetwork, Signal};
use crate::fsm::TransitionSystem;
use crate::opgen::{Tap, WiringPlan};

const MAGIC: &str = "opnet";
const VERSION: &str = "1";

fn operand_text(s: Signal) -> String {
    match s {
        Signal::Const(b) => (b as u8).to_string(),
        Signal::Input(i) => format!("i{i}"),
        Signal::Gate(g) => format!("g{g}"),
    }
}

/// Serializes the register and an optional wiring plan. Equal inputs give
/// byte-identical text.
pub fn emit_netlist(system: &TransitionSystem, wiring: Option<&WiringPlan>) -> String {
    let f = system.network();
    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    writeln!(out, "width {}", system.width()).unwrap();
    writeln!(out, "reset {:#x}", system.reset_state()).unwrap();
    for (idx, gate) in f.gates().iter().enumerate() {
        let ops: Vec<String> = gate.operands().into_iter().map(operand_text).collect();
        writeln!(out, "gate g{idx} {} {}", gate.kind().name(), ops.join(" ")).unwrap();
    }
    for (j, &s) in f.outputs().iter().enumerate() {
        writeln!(out, "output {j} {}", operand_text(s)).unwrap();
    }
    for (j, tap) in wiring.map(|w| w.taps.as_slice()).unwrap_or_default().iter().enumerate() {
        let inv = if tap.inverted { "~" } else { "" };
        writeln!(out, "wire {j} {inv}{}", tap.flip_flop).unwrap();
    }
    out.push_str("end\n");
    out
}

pub fn emit_netlist_file(
    system: &TransitionSystem,
    wiring: Option<&WiringPlan>,
    path: impl AsRef<Path>,
) -> Result<(), HdlError> {
    std::fs::write(path, emit_netlist(system, wiring))?;
    Ok(())
}

pub fn parse_netlist_file(path: impl AsRef<Path>) -> Result<(TransitionSystem, WiringPlan), HdlError> {
    parse_netlist(&std::fs::read_to_string(path)?)
}

/// Inverse of [`emit_netlist`]. Gate lines may come in any order as long
/// as the gates form a DAG; `#` starts a comment.
pub fn parse_netlist(text: &str) -> Result<(TransitionSystem, WiringPlan), HdlError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let bad = |line: usize, message: String| HdlError::Malformed { line, message };

    let mut header = |key: &'static str| -> Result<(usize, String), HdlError> {
        let (line, l) = lines.next().ok_or(HdlError::Truncated(key))?;
        match l.split_whitespace().collect::<Vec<_>>().as_slice() {
            [k, v] if *k == key => Ok((line, v.to_string())),
            _ => Err(bad(line, format!("expected `{key} <value>`"))),
        }
    };
    let (_, version) = header(MAGIC)?;
    if version != VERSION {
        return Err(HdlError::VersionMismatch(version));
    }
    let (line, width) = header("width")?;
    let width: u8 = width.parse().map_err(|_| bad(line, format!("bad width `{width}`")))?;
    if width == 0 || width > crate::MAX_WIDTH {
        return Err(bad(line, format!("width {width} is outside 1..={}", crate::MAX_WIDTH)));
    }
    let (line, reset) = header("reset")?;
    let reset = reset
        .strip_prefix("0x")
        .and_then(|h| u32::from_str_radix(h, 16).ok())
        .ok_or_else(|| bad(line, format!("bad reset value `{reset}`")))?;

    let operand = |tok: &str, line: usize| -> Result<Operand, HdlError> {
        match tok {
            "0" => Ok(Operand::Const(false)),
            "1" => Ok(Operand::Const(true)),
            _ => {
                if let Some(i) = tok.strip_prefix('i').and_then(|i| i.parse::<u16>().ok()) {
                    if i < width as u16 {
                        return Ok(Operand::Input(i));
                    }
                    return Err(bad(line, format!("state bit `{tok}` is out of range")));
                }
                if tok.strip_prefix('g').is_some_and(|g| g.parse::<u32>().is_ok()) {
                    return Ok(Operand::Named(tok.to_string()));
                }
                Err(bad(line, format!("bad operand `{tok}`")))
            }
        }
    };

    let mut draft = Draft::default();
    let mut outputs: Vec<Option<Operand>> = vec![None; width as usize];
    let mut wires: Vec<(usize, Tap)> = Vec::new();
    let mut ended = false;
    for (line, l) in lines.by_ref() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["gate", name, kind, ops @ ..] => {
                if operand(name, line)? != Operand::Named(name.to_string()) {
                    return Err(bad(line, format!("gate id `{name}` must look like g<number>")));
                }
                let kind = GateKind::from_name(kind).ok_or_else(|| bad(line, format!("unknown gate kind `{kind}`")))?;
                let ops = ops.iter().map(|t| operand(t, line)).collect::<Result<Vec<_>, _>>()?;
                draft.add(name.to_string(), kind, ops, line)?;
            }
            ["output", j, sig] => {
                let j: usize = j.parse().map_err(|_| bad(line, format!("bad output index `{j}`")))?;
                let slot = outputs.get_mut(j).ok_or_else(|| bad(line, format!("output {j} is out of range")))?;
                if slot.replace(operand(sig, line)?).is_some() {
                    return Err(bad(line, format!("output {j} is driven twice")));
                }
            }
            ["wire", j, ff] => {
                let j: usize = j.parse().map_err(|_| bad(line, format!("bad wire index `{j}`")))?;
                let (inverted, ff) = match ff.strip_prefix('~') {
                    Some(rest) => (true, rest),
                    None => (false, *ff),
                };
                let flip_flop: u8 = ff.parse().map_err(|_| bad(line, format!("bad flip-flop `{ff}`")))?;
                if flip_flop >= width {
                    return Err(HdlError::WiringOutOfRange { bit: j, flip_flop });
                }
                wires.push((j, Tap { flip_flop, inverted }));
            }
            ["end"] => {
                ended = true;
                break;
            }
            _ => return Err(bad(line, format!("unrecognized line `{l}`"))),
        }
    }
    if !ended {
        return Err(HdlError::Truncated("end"));
    }
    if let Some((line, l)) = lines.next() {
        return Err(bad(line, format!("content after `end`: `{l}`")));
    }

    let resolved = draft.resolve()?;
    let outputs = outputs
        .iter()
        .enumerate()
        .map(|(j, o)| match o {
            Some(op) => resolved.signal(op),
            None => Err(HdlError::Dangling(format!("output {j}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let network = GateNetwork::new(width as u16, resolved.gates, outputs)?;
    let system = TransitionSystem::new(width, network, reset)?;

    wires.sort_by_key(|(j, _)| *j);
    for (pos, (j, _)) in wires.iter().enumerate() {
        if *j != pos {
            return Err(HdlError::Dangling(format!("constant bit {pos}")));
        }
    }
    Ok((system, WiringPlan { taps: wires.into_iter().map(|(_, t)| t).collect() }))
}
