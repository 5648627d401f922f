use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use opred_core::experiments::{render_report, run_table, ExperimentConfig, ReportFormat};
use opred_core::hdl::{emit_netlist, emit_verilog};
use opred_core::opgen::{
    encode_states, qm_generate_with, qmx_generate_with, rnd_generate_with, DelayTarget, EncodingProblem, Generator,
    OpaquePredicate, RndOptions, WiringPlan, DEFAULT_ATTEMPT_BUDGET,
};

use crate::error::CliError;
use crate::{read_file, rng, write_file, Report, SeedArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Qm,
    Qmx,
    Rnd,
}

impl From<Algo> for Generator {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Qm => Generator::Qm,
            Algo::Qmx => Generator::Qmx,
            Algo::Rnd => Generator::Rnd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Verilog,
    Netlist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Args)]
pub struct PredicateArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Register width.
    #[arg(long)]
    pub n: u8,
    /// Stabilization delay; a lower bound for RND.
    #[arg(long)]
    pub t: u32,
    /// Reset state in hex.
    #[arg(long, default_value = "0")]
    pub s: String,
    /// Read t as a lower bound for QM/QMX too.
    #[arg(long)]
    pub lower_bound: bool,
    /// Candidate draws RND may make.
    #[arg(long, default_value_t = DEFAULT_ATTEMPT_BUDGET)]
    pub budget: u64,
    /// Wall-clock limit for RND in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub predicate: PredicateArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Also produce HDL or a netlist file.
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
    /// Where to write the emitted artifact; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "opaque_predicate")]
    pub module: String,
}

pub fn parse_hex(s: &str) -> Result<u32, CliError> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u32::from_str_radix(digits, 16).map_err(|_| CliError::Usage(format!("`{s}` is not a hex number")))
}

pub fn generate(p: &PredicateArgs, seed: u64) -> Result<OpaquePredicate, CliError> {
    let s = parse_hex(&p.s)?;
    let mut r = rng(seed);
    let delay = if p.lower_bound { DelayTarget::AtLeast(p.t) } else { DelayTarget::Exact(p.t) };
    let op = match p.algo {
        Algo::Qm => qm_generate_with(p.n, s, delay, &mut r)?,
        Algo::Qmx => qmx_generate_with(p.n, s, delay, &mut r)?,
        Algo::Rnd => rnd_generate_with(
            p.n,
            s,
            p.t,
            &mut r,
            RndOptions { attempt_budget: p.budget, time_limit: p.timeout.map(Duration::from_secs) },
        )?,
    };
    Ok(op)
}

pub fn predicate_json(op: &OpaquePredicate) -> Value {
    let c = op.counts;
    json!({
        "algorithm": op.generator.name(),
        "n": op.width(),
        "reset": format!("{:#x}", op.reset_state()),
        "stable": format!("{:#x}", op.stable_state),
        "delay": op.delay,
        "gates": { "not": c.not_count, "and": c.and_count, "or": c.or_count, "xor": c.xor_count, "total": c.total() },
        "attempts": op.attempts,
        "sequence": op.sequence.as_ref().map(|s| s.states().iter().map(|x| format!("{x:#x}")).collect::<Vec<_>>()),
    })
}

pub fn predicate_text(op: &OpaquePredicate) -> String {
    let c = op.counts;
    let mut t = String::new();
    writeln!(t, "algorithm: {}", op.generator).unwrap();
    writeln!(t, "n: {}", op.width()).unwrap();
    writeln!(t, "reset: {:#x}", op.reset_state()).unwrap();
    writeln!(t, "stable state z: {:#x}", op.stable_state).unwrap();
    writeln!(t, "delay t: {}", op.delay).unwrap();
    writeln!(
        t,
        "gates: not={} and={} or={} xor={} total={}",
        c.not_count,
        c.and_count,
        c.or_count,
        c.xor_count,
        c.total()
    )
    .unwrap();
    if op.generator == Generator::Rnd {
        writeln!(t, "attempts: {}", op.attempts).unwrap();
    }
    t
}

pub fn gen(a: GenArgs) -> Result<Report, CliError> {
    let seed = a.seed.resolve();
    let op = generate(&a.predicate, seed)?;
    let mut text = format!("seed: {seed}\n{}", predicate_text(&op));
    let mut json = predicate_json(&op);
    json["seed"] = json!(seed);
    if let Some(kind) = a.emit {
        let artifact = match kind {
            Emit::Verilog => emit_verilog(&op, None, &a.module)?,
            Emit::Netlist => emit_netlist(&op.system, None),
        };
        match &a.out {
            Some(path) => {
                write_file(path, &artifact)?;
                writeln!(text, "wrote {}", path.display()).unwrap();
                json["artifact_path"] = json!(path.display().to_string());
            }
            None => {
                text.push('\n');
                text.push_str(&artifact);
                json["artifact"] = json!(artifact);
            }
        }
    }
    Ok(Report { text, json })
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// One state per line: `name` or `name <binary code>` to pin a code.
    #[arg(long)]
    pub states: PathBuf,
    /// Comma-separated states passed during the processing period.
    #[arg(long)]
    pub subset: String,
    /// Constant bits, most significant first (C_{m-1} .. C_0).
    #[arg(long)]
    pub constant: String,
    #[arg(long)]
    pub n: u8,
    /// Take a bit value no fixed position holds through an inverter.
    #[arg(long)]
    pub allow_inversion: bool,
    #[command(flatten)]
    pub seed: SeedArg,
}

pub fn parse_bits_msb_first(s: &str) -> Result<Vec<bool>, CliError> {
    s.chars()
        .rev()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::Usage(format!("`{s}` is not a bit string"))),
        })
        .collect()
}

fn parse_states(text: &str) -> Result<(Vec<String>, BTreeMap<String, u32>), CliError> {
    let mut states = Vec::new();
    let mut pinned = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            [] => {}
            [name] => states.push(name.to_string()),
            [name, code] => {
                let digits = code.strip_prefix("0b").unwrap_or(code);
                let code = u32::from_str_radix(digits, 2)
                    .map_err(|_| CliError::Usage(format!("`{code}` is not a binary code")))?;
                states.push(name.to_string());
                pinned.insert(name.to_string(), code);
            }
            _ => return Err(CliError::Usage(format!("bad state line `{line}`"))),
        }
    }
    Ok((states, pinned))
}

pub fn wiring_lines(w: &WiringPlan) -> Vec<String> {
    w.taps
        .iter()
        .enumerate()
        .map(|(j, t)| format!("C{j} <- {}FF{}", if t.inverted { "~" } else { "" }, t.flip_flop))
        .collect()
}

pub fn encode(a: EncodeArgs) -> Result<Report, CliError> {
    let seed = a.seed.resolve();
    let (states, pinned) = parse_states(&read_file(&a.states)?)?;
    let problem = EncodingProblem {
        width: a.n,
        states,
        subset: a.subset.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        constant: parse_bits_msb_first(&a.constant)?,
        pinned,
        allow_inversion: a.allow_inversion,
    };
    let (enc, wiring) = encode_states(&problem, &mut rng(seed))?;
    let n = a.n as usize;
    let mut text = format!("seed: {seed}\ncodes:\n");
    for (name, code) in &enc.codes {
        let mark = if enc.subset.contains(name) { " *" } else { "" };
        writeln!(text, "  {name} = {code:0n$b}{mark}").unwrap();
    }
    let fixed: Vec<String> = enc.fixed_positions.iter().map(|(i, v)| format!("FF{i}={}", *v as u8)).collect();
    writeln!(text, "fixed positions: {}", fixed.join(" ")).unwrap();
    writeln!(text, "wiring:").unwrap();
    for l in wiring_lines(&wiring) {
        writeln!(text, "  {l}").unwrap();
    }
    let json = json!({
        "seed": seed,
        "codes": enc.codes.iter().map(|(s, c)| (s.clone(), json!(format!("{c:0n$b}")))).collect::<serde_json::Map<_, _>>(),
        "subset": enc.subset,
        "fixed_positions": enc.fixed_positions.iter().map(|(i, v)| json!({"flip_flop": i, "value": *v as u8})).collect::<Vec<_>>(),
        "wiring": wiring.taps.iter().enumerate().map(|(j, t)| json!({"bit": j, "flip_flop": t.flip_flop, "inverted": t.inverted})).collect::<Vec<_>>(),
    });
    Ok(Report { text, json })
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub n: Vec<u8>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,10")]
    pub t: Vec<u32>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "qm,qmx,rnd")]
    pub algos: Vec<Algo>,
    /// Wall-clock limit per RND trial in seconds.
    #[arg(long, default_value_t = 10)]
    pub rnd_timeout: u64,
}

pub fn table(a: TableArgs) -> Result<Report, CliError> {
    let seed = a.seed.resolve();
    // stdout may be the CSV itself
    eprintln!("seed: {seed}");
    let cfg = ExperimentConfig {
        algorithms: a.algos.iter().map(|&x| x.into()).collect(),
        n_values: a.n,
        t_values: a.t,
        trials: a.trials,
        master_seed: seed,
        rnd_timeout: Duration::from_secs(a.rnd_timeout),
        ..ExperimentConfig::default()
    };
    let table = run_table(&cfg)?;
    let format = match a.format {
        Format::Csv => ReportFormat::Csv,
        Format::Markdown => ReportFormat::Markdown,
    };
    let report = render_report(&table, format);
    let mut json = json!({ "seed": seed, "rows": table.rows });
    let text = match &a.out {
        Some(path) => {
            write_file(path, &report)?;
            json["path"] = json!(path.display().to_string());
            format!("wrote {} rows to {}\n", table.rows.len(), path.display())
        }
        None => report,
    };
    Ok(Report { text, json })
}
