use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use opred_core::hdl::{emit_netlist, parse_netlist_file};
use opred_core::opgen::{Generator, OpaquePredicate, Tap, WiringPlan, DEFAULT_ATTEMPT_BUDGET};
use opred_core::watermark::{
    check_crc8, embed, extract, fixture, gnd_trace_attack, harden, with_crc8, LutNetlist, Mark, WatermarkSpec, GND,
};

use crate::error::CliError;
use crate::gen::{generate, predicate_text, Algo, PredicateArgs};
use crate::{read_file, rng, write_file, Report, SeedArg};

#[derive(Debug, Subcommand)]
pub enum WmCommand {
    /// Write a synthetic LUT netlist and a spec marking some of its cells.
    Fixture(FixtureArgs),
    /// Tie the fixed inputs low and write the payload into the W bits.
    Embed(EmbedArgs),
    /// Read the payload back.
    Extract(ExtractArgs),
    /// List cells with an input traced to GND.
    Attack(AttackArgs),
    /// Drive the fixed inputs from an opaque predicate instead of GND.
    Harden(HardenArgs),
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub spec_out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub cells: usize,
    #[arg(long, default_value_t = 8)]
    pub marked: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    /// Payload bits in embedding order; random bits filling the capacity when absent.
    #[arg(long)]
    pub payload: Option<String>,
    /// Prefix the payload with a CRC-8.
    #[arg(long)]
    pub crc: bool,
    /// Net the fixed inputs are tied to.
    #[arg(long, default_value = GND)]
    pub driver: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Spec including the embedded payload, for verification.
    #[arg(long)]
    pub spec_out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    /// The payload carries a CRC-8 prefix; check and strip it.
    #[arg(long)]
    pub crc: bool,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub netlist: PathBuf,
}

#[derive(Debug, Args)]
pub struct HardenArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Predicate netlist file (`gen --emit netlist`); generated when absent.
    #[arg(long)]
    pub predicate: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rnd")]
    pub algo: Algo,
    #[arg(long, default_value_t = 5)]
    pub n: u8,
    #[arg(long, default_value_t = 10)]
    pub t: u32,
    /// Save the predicate used, with its wiring, as a netlist file.
    #[arg(long)]
    pub predicate_out: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

/// On-disk spec with the payload as a bit string.
#[derive(Debug, Serialize, Deserialize)]
struct SpecFile {
    marks: Vec<Mark>,
    #[serde(default)]
    payload: String,
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn string_to_bits(s: &str) -> Result<Vec<bool>, CliError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::Usage(format!("payload `{s}` is not a bit string"))),
        })
        .collect()
}

fn load_netlist(path: &PathBuf) -> Result<LutNetlist, CliError> {
    Ok(LutNetlist::from_text(&read_file(path)?)?)
}

fn load_spec(path: &PathBuf) -> Result<WatermarkSpec, CliError> {
    let f: SpecFile =
        serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Usage(format!("bad spec file: {e}")))?;
    Ok(WatermarkSpec::new(f.marks, string_to_bits(&f.payload)?))
}

fn save_spec(path: &PathBuf, spec: &WatermarkSpec) -> Result<(), CliError> {
    let f = SpecFile { marks: spec.marks.clone(), payload: bits_to_string(&spec.payload) };
    write_file(path, &(serde_json::to_string_pretty(&f).expect("spec serializes") + "\n"))
}

pub fn run(cmd: WmCommand) -> Result<Report, CliError> {
    match cmd {
        WmCommand::Fixture(a) => {
            let seed = a.seed.resolve();
            if a.marked > a.cells {
                return Err(CliError::Usage("cannot mark more cells than the fixture has".into()));
            }
            let (net, spec) = fixture(a.cells, a.marked, &mut rng(seed));
            write_file(&a.out, &net.to_text())?;
            save_spec(&a.spec_out, &spec)?;
            let capacity = spec.capacity(&net)?;
            let text = format!(
                "seed: {seed}\n{} cells, {} marked, capacity {capacity} bits\nwrote {} and {}\n",
                net.cells.len(),
                spec.marks.len(),
                a.out.display(),
                a.spec_out.display()
            );
            Ok(Report { text, json: json!({ "seed": seed, "cells": net.cells.len(), "marked": spec.marks.len(), "capacity": capacity }) })
        }
        WmCommand::Embed(a) => {
            let seed = a.seed.resolve();
            let net = load_netlist(&a.netlist)?;
            let mut spec = load_spec(&a.spec)?;
            let capacity = spec.capacity(&net)?;
            let mut message = match &a.payload {
                Some(p) => string_to_bits(p)?,
                None => {
                    let len = capacity.saturating_sub(if a.crc { 8 } else { 0 });
                    let mut r = rng(seed);
                    (0..len).map(|_| r.gen()).collect()
                }
            };
            if a.crc {
                message = with_crc8(&message);
            }
            spec.payload = message;
            let marked = embed(&net, &spec, &a.driver)?;
            write_file(&a.out, &marked.to_text())?;
            save_spec(&a.spec_out, &spec)?;
            let text = format!(
                "seed: {seed}\nembedded {} of {capacity} bits\npayload: {}\nwrote {} and {}\n",
                spec.payload.len(),
                bits_to_string(&spec.payload),
                a.out.display(),
                a.spec_out.display()
            );
            Ok(Report {
                text,
                json: json!({ "seed": seed, "payload": bits_to_string(&spec.payload), "capacity": capacity }),
            })
        }
        WmCommand::Extract(a) => {
            let net = load_netlist(&a.netlist)?;
            let spec = load_spec(&a.spec)?;
            let bits = extract(&net, &spec)?;
            let matches = bits == spec.payload;
            let mut text = format!("payload: {}\nmatches spec: {matches}\n", bits_to_string(&bits));
            let mut json = json!({ "payload": bits_to_string(&bits), "matches_spec": matches });
            if a.crc {
                let checked = check_crc8(&bits);
                match &checked {
                    Some(msg) => writeln!(text, "crc: ok\nmessage: {}", bits_to_string(msg)).unwrap(),
                    None => writeln!(text, "crc: mismatch").unwrap(),
                }
                json["crc_ok"] = json!(checked.is_some());
                json["message"] = json!(checked.map(|m| bits_to_string(&m)));
            }
            Ok(Report { text, json })
        }
        WmCommand::Attack(a) => {
            let net = load_netlist(&a.netlist)?;
            let suspects = gnd_trace_attack(&net);
            let mut text = format!("{} suspect cell(s)\n", suspects.len());
            for s in &suspects {
                writeln!(text, "  {s}").unwrap();
            }
            Ok(Report { text, json: json!({ "suspects": suspects }) })
        }
        WmCommand::Harden(a) => harden_cmd(a),
    }
}

/// Taps every register bit that settles at 0.
fn zero_wiring(op: &OpaquePredicate) -> Result<WiringPlan, CliError> {
    let taps: Vec<Tap> =
        (0..op.width()).filter(|&i| !op.stable_bit(i)).map(|flip_flop| Tap { flip_flop, inverted: false }).collect();
    if taps.is_empty() {
        // all ones: read one of them inverted
        return Ok(WiringPlan { taps: vec![Tap { flip_flop: 0, inverted: true }] });
    }
    Ok(WiringPlan { taps })
}

fn harden_cmd(a: HardenArgs) -> Result<Report, CliError> {
    let seed = a.seed.resolve();
    let net = load_netlist(&a.netlist)?;
    let spec = load_spec(&a.spec)?;
    let (op, wiring) = match &a.predicate {
        Some(path) => {
            let (system, wiring) = parse_netlist_file(path)?;
            let op = OpaquePredicate::from_system(system, Generator::Rnd)?;
            let wiring = if wiring.is_empty() { zero_wiring(&op)? } else { wiring };
            (op, wiring)
        }
        None => {
            let p = PredicateArgs {
                algo: a.algo,
                n: a.n,
                t: a.t,
                s: "0".into(),
                lower_bound: false,
                budget: DEFAULT_ATTEMPT_BUDGET,
                timeout: None,
            };
            let op = generate(&p, seed)?;
            let wiring = zero_wiring(&op)?;
            (op, wiring)
        }
    };
    let hardened = harden(&net, &spec, &op, &wiring)?;
    write_file(&a.out, &hardened.to_text())?;
    if let Some(path) = &a.predicate_out {
        write_file(path, &emit_netlist(&op.system, Some(&wiring)))?;
    }
    let marked: BTreeSet<&str> = spec.marks.iter().map(|m| m.cell.as_str()).collect();
    let still_flagged = gnd_trace_attack(&hardened).into_iter().filter(|c| marked.contains(c.as_str())).count();
    let text = format!(
        "{}hardened {} marked cell(s); {still_flagged} still traced to GND\nwrote {}\n",
        if a.predicate.is_some() { String::new() } else { format!("seed: {seed}\n{}", predicate_text(&op)) },
        spec.marks.len(),
        a.out.display()
    );
    Ok(Report {
        text,
        json: json!({
            "seed": seed,
            "stable": format!("{:#x}", op.stable_state),
            "delay": op.delay,
            "marked": spec.marks.len(),
            "still_flagged": still_flagged,
        }),
    })
}
