use std::fmt::Write as _;

use super::{is_identifier, Draft, HdlError, Operand};
use crate::boolfn::{GateCounts, GateKind, GateNetwork, Signal};
use crate::fsm::TransitionSystem;
use crate::opgen::{OpaquePredicate, Tap, WiringPlan};

/// Name of the flip-flop cell instantiated for every state bit.
pub const DFF_CELL: &str = "OP_DFFR";

/// Behavioral model of [`DFF_CELL`], to be compiled next to emitted modules.
pub fn cell_library() -> String {
    format!(
        "// D flip-flop, synchronous active-high reset to INIT\n\
         module {DFF_CELL} #(parameter INIT = 1'b0) (input clk, input rst, input d, output reg q);\n\
         \x20 always @(posedge clk)\n\
         \x20   if (rst) q <= INIT;\n\
         \x20   else q <= d;\n\
         endmodule\n"
    )
}

fn signal_text(s: Signal) -> String {
    match s {
        Signal::Const(b) => format!("1'b{}", b as u8),
        Signal::Input(i) => format!("x[{i}]"),
        Signal::Gate(g) => format!("g{g}"),
    }
}

/// Structural module with ports `clk`, `rst`, `state` (the register) and,
/// when `wiring` is given, `c` carrying the constant bits.
pub fn emit_verilog(op: &OpaquePredicate, wiring: Option<&WiringPlan>, module_name: &str) -> Result<String, HdlError> {
    if !is_identifier(module_name) || module_name == DFF_CELL {
        return Err(HdlError::InvalidIdentifier(module_name.to_string()));
    }
    let sys = &op.system;
    let n = sys.width();
    let f = sys.network();
    let wiring = wiring.filter(|w| !w.is_empty());
    if let Some(w) = wiring {
        if let Some((bit, t)) = w.taps.iter().enumerate().find(|(_, t)| t.flip_flop >= n) {
            return Err(HdlError::WiringOutOfRange { bit, flip_flop: t.flip_flop });
        }
    }

    let mut v = String::new();
    writeln!(
        v,
        "// {} opaque predicate: n={n}, reset {n}'h{:x}, stable {n}'h{:x} after {} cycles",
        op.generator,
        sys.reset_state(),
        op.stable_state,
        op.delay
    )
    .unwrap();
    let ports = if wiring.is_some() { "clk, rst, state, c" } else { "clk, rst, state" };
    writeln!(v, "module {module_name} ({ports});").unwrap();
    writeln!(v, "  input clk;\n  input rst;\n  output [{}:0] state;", n - 1).unwrap();
    if let Some(w) = wiring {
        writeln!(v, "  output [{}:0] c;", w.len() - 1).unwrap();
    }
    writeln!(v, "  wire [{}:0] x;", n - 1).unwrap();
    if !f.gates().is_empty() {
        let names: Vec<String> = (0..f.gates().len()).map(|g| format!("g{g}")).collect();
        writeln!(v, "  wire {};", names.join(", ")).unwrap();
    }
    v.push('\n');
    for (idx, gate) in f.gates().iter().enumerate() {
        let ops: Vec<String> = gate.operands().into_iter().map(signal_text).collect();
        writeln!(v, "  {} u{idx} (g{idx}, {});", gate.kind().name(), ops.join(", ")).unwrap();
    }
    if !f.gates().is_empty() {
        v.push('\n');
    }
    for (i, &d) in f.outputs().iter().enumerate() {
        let init = sys.reset_state() >> i & 1;
        writeln!(
            v,
            "  {DFF_CELL} #(.INIT(1'b{init})) ff{i} (.clk(clk), .rst(rst), .d({}), .q(x[{i}]));",
            signal_text(d)
        )
        .unwrap();
    }
    v.push('\n');
    writeln!(v, "  assign state = x;").unwrap();
    if let Some(w) = wiring {
        for (j, t) in w.taps.iter().enumerate() {
            let inv = if t.inverted { "~" } else { "" };
            writeln!(v, "  assign c[{j}] = {inv}x[{}];", t.flip_flop).unwrap();
        }
    }
    v.push_str("endmodule\n");
    Ok(v)
}

/// What [`parse_verilog`] recovers from an emitted module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedModule {
    pub name: String,
    pub system: TransitionSystem,
    pub wiring: Option<WiringPlan>,
    /// Primitive instances per kind, as written in the text.
    pub gate_instances: GateCounts,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, HdlError> {
    let mut toks = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let code = line.split("//").next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                    i += 1;
                }
                toks.push((line_no, Tok::Ident(chars[start..i].iter().collect())));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '\'') {
                    i += 1;
                }
                toks.push((line_no, Tok::Number(chars[start..i].iter().collect())));
            } else if "()[]{},;:.#=~".contains(c) {
                toks.push((line_no, Tok::Punct(c)));
                i += 1;
            } else {
                return Err(HdlError::Malformed { line: line_no, message: format!("unexpected character `{c}`") });
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.0)
    }

    fn err(&self, message: impl Into<String>) -> HdlError {
        HdlError::Malformed { line: self.line(), message: message.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn next(&mut self, what: &'static str) -> Result<Tok, HdlError> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone()).ok_or(HdlError::Truncated(what))?;
        self.pos += 1;
        Ok(t)
    }

    fn punct(&mut self, c: char) -> Result<(), HdlError> {
        match self.next("punctuation")? {
            Tok::Punct(p) if p == c => Ok(()),
            other => Err(self.err(format!("expected `{c}`, found {other:?}"))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, HdlError> {
        match self.next("identifier")? {
            Tok::Ident(s) => Ok(s),
            other => Err(self.err(format!("expected identifier, found {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<u32, HdlError> {
        match self.next("number")? {
            Tok::Number(s) => s.parse().map_err(|_| self.err(format!("bad number `{s}`"))),
            other => Err(self.err(format!("expected number, found {other:?}"))),
        }
    }

    /// `[hi:lo]` with `lo = 0`; returns the width.
    fn range(&mut self) -> Result<Option<u32>, HdlError> {
        if !self.eat('[') {
            return Ok(None);
        }
        let hi = self.number()?;
        self.punct(':')?;
        if self.number()? != 0 {
            return Err(self.err("ranges must end at 0"));
        }
        self.punct(']')?;
        Ok(Some(hi + 1))
    }

    /// `name`, `name[i]` or a one-bit literal.
    fn reference(&mut self) -> Result<Ref, HdlError> {
        match self.next("signal")? {
            Tok::Number(s) => match s.as_str() {
                "1'b0" => Ok(Ref::Const(false)),
                "1'b1" => Ok(Ref::Const(true)),
                _ => Err(self.err(format!("unsupported literal `{s}`"))),
            },
            Tok::Ident(name) => {
                if self.eat('[') {
                    let i = self.number()?;
                    self.punct(']')?;
                    Ok(Ref::Bit(name, i))
                } else {
                    Ok(Ref::Name(name))
                }
            }
            other => Err(self.err(format!("expected signal, found {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ref {
    Const(bool),
    Name(String),
    Bit(String, u32),
}

/// Reads back the subset of structural Verilog written by [`emit_verilog`]:
/// gate primitives in any order, [`DFF_CELL`] instances and `assign`s of
/// the state and constant ports.
pub fn parse_verilog(text: &str) -> Result<ParsedModule, HdlError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    if p.ident()? != "module" {
        return Err(p.err("expected `module`"));
    }
    let name = p.ident()?;
    p.punct('(')?;
    let mut ports = vec![p.ident()?];
    while p.eat(',') {
        ports.push(p.ident()?);
    }
    p.punct(')')?;
    p.punct(';')?;

    let mut width: Option<u32> = None;
    let mut c_width: Option<u32> = None;
    let mut draft = Draft::default();
    let mut counts = GateCounts::default();
    let mut flops: Vec<Option<(bool, Ref)>> = Vec::new();
    let mut taps: Vec<Option<Tap>> = Vec::new();
    let mut state_assigned = false;

    let operand = |p: &Parser, r: Ref, width: Option<u32>| -> Result<Operand, HdlError> {
        match r {
            Ref::Const(b) => Ok(Operand::Const(b)),
            Ref::Bit(v, i) if v == "x" => match width {
                Some(w) if i < w => Ok(Operand::Input(i as u16)),
                _ => Err(p.err(format!("x[{i}] is outside the register"))),
            },
            Ref::Name(n) => Ok(Operand::Named(n)),
            Ref::Bit(v, i) => Err(p.err(format!("unsupported reference {v}[{i}]"))),
        }
    };

    loop {
        let kw = p.ident()?;
        match kw.as_str() {
            "endmodule" => break,
            "input" | "output" | "wire" => {
                let w = p.range()?;
                let mut names = vec![p.ident()?];
                while p.eat(',') {
                    names.push(p.ident()?);
                }
                p.punct(';')?;
                for n in names {
                    if kw != "wire" && !ports.contains(&n) {
                        return Err(p.err(format!("`{n}` is not a port")));
                    }
                    match (n.as_str(), w) {
                        ("x", Some(w)) => {
                            if w == 0 || w > crate::MAX_WIDTH as u32 {
                                return Err(p.err(format!("register width {w} is unsupported")));
                            }
                            width = Some(w);
                            flops = vec![None; w as usize];
                        }
                        ("c", Some(w)) => {
                            c_width = Some(w);
                            taps = vec![None; w as usize];
                        }
                        _ => {}
                    }
                }
            }
            "assign" => {
                let lhs = p.reference()?;
                p.punct('=')?;
                let inverted = p.eat('~');
                let rhs = p.reference()?;
                p.punct(';')?;
                match (lhs, rhs) {
                    (Ref::Name(l), Ref::Name(r)) if l == "state" && r == "x" && !inverted => state_assigned = true,
                    (Ref::Bit(l, j), Ref::Bit(r, k)) if l == "c" && r == "x" => {
                        let w = width.ok_or_else(|| p.err("`x` must be declared before use"))?;
                        if k >= w {
                            return Err(HdlError::WiringOutOfRange { bit: j as usize, flip_flop: k as u8 });
                        }
                        let slot = taps.get_mut(j as usize).ok_or_else(|| p.err(format!("c[{j}] is not declared")))?;
                        if slot.replace(Tap { flip_flop: k as u8, inverted }).is_some() {
                            return Err(p.err(format!("c[{j}] is assigned twice")));
                        }
                    }
                    _ => return Err(p.err("unsupported assign")),
                }
            }
            cell if cell == DFF_CELL => {
                p.punct('#')?;
                p.punct('(')?;
                p.punct('.')?;
                if p.ident()? != "INIT" {
                    return Err(p.err("expected INIT parameter"));
                }
                p.punct('(')?;
                let init = match p.reference()? {
                    Ref::Const(b) => b,
                    _ => return Err(p.err("INIT must be 1'b0 or 1'b1")),
                };
                p.punct(')')?;
                p.punct(')')?;
                p.ident()?;
                p.punct('(')?;
                let (mut d, mut q) = (None, None);
                loop {
                    p.punct('.')?;
                    let pin = p.ident()?;
                    p.punct('(')?;
                    let r = p.reference()?;
                    p.punct(')')?;
                    match (pin.as_str(), &r) {
                        ("clk", Ref::Name(n)) if n == "clk" => {}
                        ("rst", Ref::Name(n)) if n == "rst" => {}
                        ("d", _) => d = Some(r),
                        ("q", Ref::Bit(v, i)) if v == "x" => q = Some(*i),
                        _ => return Err(p.err(format!("unexpected connection .{pin}"))),
                    }
                    if !p.eat(',') {
                        break;
                    }
                }
                p.punct(')')?;
                p.punct(';')?;
                let (d, q) = d.zip(q).ok_or_else(|| p.err("flip-flop needs .d and .q"))?;
                let slot = flops.get_mut(q as usize).ok_or_else(|| p.err(format!("x[{q}] is outside the register")))?;
                if slot.replace((init, d)).is_some() {
                    return Err(p.err(format!("x[{q}] has two flip-flops")));
                }
            }
            prim => {
                let kind = GateKind::from_name(prim).ok_or_else(|| p.err(format!("unsupported statement `{prim}`")))?;
                p.ident()?;
                p.punct('(')?;
                let out = match p.reference()? {
                    Ref::Name(n) => n,
                    _ => return Err(p.err("gate outputs must be plain nets")),
                };
                let mut ops = Vec::new();
                while p.eat(',') {
                    let r = p.reference()?;
                    ops.push(operand(&p, r, width)?);
                }
                p.punct(')')?;
                p.punct(';')?;
                let line = p.line();
                draft.add(out, kind, ops, line)?;
                match kind {
                    GateKind::Not => counts.not_count += 1,
                    GateKind::And => counts.and_count += 1,
                    GateKind::Or => counts.or_count += 1,
                    GateKind::Xor => counts.xor_count += 1,
                }
            }
        }
    }
    if p.peek().is_some() {
        return Err(p.err("content after `endmodule`"));
    }

    let width = width.ok_or(HdlError::Dangling("x".into()))?;
    if !state_assigned {
        return Err(HdlError::Dangling("state".into()));
    }
    let resolved = draft.resolve()?;
    let mut reset = 0u32;
    let mut outputs = Vec::with_capacity(width as usize);
    for (i, ff) in flops.into_iter().enumerate() {
        let (init, d) = ff.ok_or_else(|| HdlError::Dangling(format!("x[{i}]")))?;
        reset |= (init as u32) << i;
        outputs.push(resolved.signal(&operand(&p, d, Some(width))?)?);
    }
    let network = GateNetwork::new(width as u16, resolved.gates, outputs)?;
    let system = TransitionSystem::new(width as u8, network, reset)?;
    let wiring = match c_width {
        None => None,
        Some(_) => Some(WiringPlan {
            taps: taps
                .into_iter()
                .enumerate()
                .map(|(j, t)| t.ok_or_else(|| HdlError::Dangling(format!("c[{j}]"))))
                .collect::<Result<_, _>>()?,
        }),
    };
    Ok(ParsedModule { name, system, wiring, gate_instances: counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::count_gates;
    use crate::opgen::{plan_wiring, predicate_from_sequence, Generator, StateSequence};

    fn identity_predicate(n: u8, s: u32) -> OpaquePredicate {
        let system = TransitionSystem::new(n, GateNetwork::identity(n as u16), s).unwrap();
        OpaquePredicate {
            system,
            stable_state: s,
            delay: 0,
            generator: Generator::Qm,
            counts: GateCounts::default(),
            sequence: None,
            rnd_bits: None,
            attempts: 1,
        }
    }

    #[test]
    fn identity_has_flops_and_no_gates() {
        let v = emit_verilog(&identity_predicate(3, 5), None, "idp").unwrap();
        assert_eq!(v.matches(DFF_CELL).count(), 3);
        assert!(!v.lines().any(|l| ["not ", "and ", "or ", "xor "].iter().any(|k| l.trim_start().starts_with(k))));
        assert!(v.contains(".INIT(1'b1)) ff0") && v.contains(".INIT(1'b0)) ff1") && v.contains(".INIT(1'b1)) ff2"));
        let parsed = parse_verilog(&v).unwrap();
        assert_eq!(parsed.name, "idp");
        assert_eq!(parsed.system.reset_state(), 5);
        assert_eq!(parsed.wiring, None);
    }

    #[test]
    fn wiring_fans_out_from_three_flops() {
        let constant = [false, false, false, true, false, true, true];
        let wiring = plan_wiring(&[(4, true), (1, false), (0, false)], &constant, false).unwrap();
        let v = emit_verilog(&identity_predicate(5, 0b10100), Some(&wiring), "fanout").unwrap();
        let sources: std::collections::BTreeSet<&str> = v
            .lines()
            .filter_map(|l| l.trim().strip_prefix("assign c["))
            .map(|l| l.split("= ").nth(1).unwrap().trim_end_matches(';'))
            .collect();
        assert_eq!(v.matches("assign c[").count(), 7);
        assert_eq!(sources, ["x[0]", "x[1]", "x[4]"].into_iter().collect());
        assert!(v.contains("output [6:0] c;"));
        assert_eq!(parse_verilog(&v).unwrap().wiring, Some(wiring));
    }

    #[test]
    fn round_trip_of_synthesized_predicate() {
        let seq = StateSequence::new(3, vec![0, 6, 3, 5, 5]).unwrap();
        for g in [Generator::Qm, Generator::Qmx] {
            let op = predicate_from_sequence(&seq, g).unwrap();
            let v = emit_verilog(&op, None, "p").unwrap();
            assert_eq!(v, emit_verilog(&op, None, "p").unwrap());
            let parsed = parse_verilog(&v).unwrap();
            assert_eq!(parsed.gate_instances, count_gates(op.system.network()));
            assert_eq!(parsed.system, op.system);
        }
    }

    #[test]
    fn inverted_taps_and_constant_inputs() {
        let f = GateNetwork::new(
            2,
            vec![crate::boolfn::Gate::And(Signal::Input(0), Signal::Const(true))],
            vec![Signal::Gate(0), Signal::Const(false)],
        )
        .unwrap();
        let mut op = identity_predicate(2, 1);
        op.system = TransitionSystem::new(2, f, 1).unwrap();
        let wiring = WiringPlan { taps: vec![Tap { flip_flop: 1, inverted: true }] };
        let v = emit_verilog(&op, Some(&wiring), "k").unwrap();
        assert!(v.contains("assign c[0] = ~x[1];"));
        assert!(v.contains(".d(1'b0)"));
        let parsed = parse_verilog(&v).unwrap();
        assert_eq!(parsed.system, op.system);
        assert_eq!(parsed.wiring, Some(wiring));
    }

    #[test]
    fn invalid_names_and_inputs() {
        let op = identity_predicate(2, 0);
        for bad in ["", "2fast", "my-mod", "module", DFF_CELL] {
            assert!(matches!(emit_verilog(&op, None, bad), Err(HdlError::InvalidIdentifier(_))));
        }
        let wiring = WiringPlan { taps: vec![Tap { flip_flop: 2, inverted: false }] };
        assert!(matches!(emit_verilog(&op, Some(&wiring), "m"), Err(HdlError::WiringOutOfRange { .. })));

        let v = emit_verilog(&op, None, "m").unwrap();
        assert!(matches!(parse_verilog(&v[..v.len() / 2]), Err(HdlError::Truncated(_) | HdlError::Malformed { .. })));
        assert!(matches!(parse_verilog(&v.replace("OP_DFFR", "DFF")), Err(HdlError::Malformed { .. })));
    }

    #[test]
    fn library_defines_the_cell() {
        let lib = cell_library();
        assert!(lib.contains(&format!("module {DFF_CELL}")));
        assert!(lib.contains("posedge clk"));
    }
}
