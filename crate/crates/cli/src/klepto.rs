use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Subcommand};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;

use opred_core::klepto::{
    attacker_recover, honest_keygen, subverted_keygen, verify_keypair, AdversaryKey, RsaKeyPair, DEFAULT_I_MAX,
};

use crate::error::CliError;
use crate::{read_file, rng, write_file, Report, SeedArg};

#[derive(Debug, Subcommand)]
pub enum KleptoCommand {
    /// Generate an adversary key and a victim key, then try to factor it.
    Demo(DemoArgs),
    /// Try to factor a public key with the adversary's private key.
    Recover(RecoverArgs),
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Victim modulus size in bits.
    #[arg(long, default_value_t = 256)]
    pub lambda: u32,
    /// Use honest key generation as a negative control.
    #[arg(long)]
    pub honest: bool,
    #[arg(long, default_value_t = DEFAULT_I_MAX)]
    pub i_max: u64,
    /// Save the adversary key (JSON, decimal strings).
    #[arg(long)]
    pub adv_out: Option<PathBuf>,
    /// Save N_adv and E_adv as bit strings for `encode --constant`.
    #[arg(long)]
    pub constants_out: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Victim modulus, decimal.
    #[arg(long)]
    pub n: String,
    /// Victim public exponent, decimal.
    #[arg(long)]
    pub e: String,
    /// Adversary key file written by `klepto demo --adv-out`.
    #[arg(long)]
    pub adv: PathBuf,
    #[arg(long, default_value_t = DEFAULT_I_MAX)]
    pub i_max: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct AdvFile {
    n: String,
    e: String,
    d: String,
}

fn big(s: &str, what: &str) -> Result<BigUint, CliError> {
    BigUint::from_str(s.trim()).map_err(|_| CliError::Usage(format!("{what} `{s}` is not a decimal integer")))
}

fn keypair_json(kp: &RsaKeyPair) -> serde_json::Value {
    json!({
        "n": kp.n.to_string(), "e": kp.e.to_string(), "d": kp.d.to_string(),
        "p": kp.p.to_string(), "q": kp.q.to_string(),
    })
}

pub fn run(cmd: KleptoCommand) -> Result<Report, CliError> {
    match cmd {
        KleptoCommand::Demo(a) => demo(a),
        KleptoCommand::Recover(a) => recover(a),
    }
}

fn demo(a: DemoArgs) -> Result<Report, CliError> {
    let seed = a.seed.resolve();
    let mut r = rng(seed);
    let adv = AdversaryKey::for_lambda(a.lambda, &mut r)?;
    let (kp, increments) = if a.honest {
        (honest_keygen(a.lambda, &mut r)?, None)
    } else {
        let k = subverted_keygen(a.lambda, &adv.public(), &mut r)?;
        (k.keypair, Some(k.increments))
    };
    let valid = verify_keypair(&kp);
    let recovery = attacker_recover(&kp.n, &kp.e, &adv, a.i_max);

    let mut text = format!("seed: {seed}\n");
    writeln!(text, "adversary: N_adv = {}\n           E_adv = {}", adv.n, adv.e).unwrap();
    writeln!(text, "{} key, lambda = {}:", if a.honest { "honest" } else { "subverted" }, a.lambda).unwrap();
    writeln!(text, "  n = {}\n  e = {}\n  d = {}", kp.n, kp.e, kp.d).unwrap();
    if let Some(i) = increments {
        writeln!(text, "  e was incremented {i} times").unwrap();
    }
    writeln!(text, "  keypair valid: {valid}").unwrap();
    match &recovery {
        Some(rec) => writeln!(text, "recovered at i = {}: p = {}, q = {}", rec.i, rec.p, rec.q).unwrap(),
        None => writeln!(text, "not recovered within i < {}", a.i_max).unwrap(),
    }

    if let Some(path) = &a.adv_out {
        let file = AdvFile { n: adv.n.to_string(), e: adv.e.to_string(), d: adv.d.to_string() };
        write_file(path, &serde_json::to_string_pretty(&file).expect("strings serialize"))?;
        writeln!(text, "wrote adversary key to {}", path.display()).unwrap();
    }
    if let Some(path) = &a.constants_out {
        let (n_bits, e_bits) = adv.public().constant_bits();
        write_file(path, &format!("N_adv {n_bits}\nE_adv {e_bits}\n"))?;
        writeln!(text, "wrote constants to {}", path.display()).unwrap();
    }
    let json = json!({
        "seed": seed,
        "lambda": a.lambda,
        "honest": a.honest,
        "adversary": { "n": adv.n.to_string(), "e": adv.e.to_string() },
        "keypair": keypair_json(&kp),
        "increments": increments,
        "valid": valid,
        "recovered": recovery.as_ref().map(|r| json!({ "i": r.i, "p": r.p.to_string(), "q": r.q.to_string() })),
    });
    Ok(Report { text, json })
}

fn recover(a: RecoverArgs) -> Result<Report, CliError> {
    let file: AdvFile = serde_json::from_str(&read_file(&a.adv)?)
        .map_err(|e| CliError::Usage(format!("bad adversary key file: {e}")))?;
    let adv = AdversaryKey { n: big(&file.n, "N_adv")?, e: big(&file.e, "E_adv")?, d: big(&file.d, "D_adv")? };
    let n = big(&a.n, "n")?;
    let e = big(&a.e, "e")?;
    let rec = attacker_recover(&n, &e, &adv, a.i_max);
    let text = match &rec {
        Some(r) => format!("recovered at i = {}\np = {}\nq = {}\n", r.i, r.p, r.q),
        None => format!("NotRecovered (tried i < {})\n", a.i_max),
    };
    let json = json!({
        "recovered": rec.as_ref().map(|r| json!({ "i": r.i, "p": r.p.to_string(), "q": r.q.to_string() })),
    });
    Ok(Report { text, json })
}
