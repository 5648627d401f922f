use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn opred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opred")).args(args).env_remove("OPRED_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_qm_reports_delay_and_counts() {
    let o = opred(&["gen", "--algo", "qm", "--n", "3", "--t", "2", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("seed: 7"));
    assert!(out.contains("delay t: 2"));
    assert!(out.contains("stable state z:"));
    assert!(out.contains("gates: not="));
    // same seed, same predicate
    assert_eq!(stdout(&opred(&["gen", "--algo", "qm", "--n", "3", "--t", "2", "--seed", "7"])), out);
}

#[test]
fn gen_json_matches_replay() {
    let o = opred(&["--json", "gen", "--algo", "qmx", "--n", "5", "--t", "10", "--seed", "11"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["delay"], 10);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["sequence"].as_array().unwrap().len(), 12);
    let g = &v["gates"];
    let sum: u64 = ["not", "and", "or", "xor"].iter().map(|k| g[k].as_u64().unwrap()).sum();
    assert_eq!(g["total"].as_u64().unwrap(), sum);
}

#[test]
fn gen_rnd_small_register() {
    // delay 5 on 3 bits is rare but within the default budget
    let o = opred(&["gen", "--algo", "rnd", "--n", "3", "--t", "5", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("delay t: 5"));
    let o = opred(&["gen", "--algo", "rnd", "--n", "3", "--t", "6", "--seed", "1", "--budget", "200000"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_exit_codes() {
    assert_eq!(code(&opred(&["gen", "--algo", "qm", "--n", "3", "--t", "8", "--seed", "1"])), 2);
    assert_eq!(code(&opred(&["gen", "--algo", "qm", "--n", "3", "--t", "2", "--s", "zz"])), 64);
    assert_eq!(code(&opred(&["gen", "--algo", "qm", "--n", "3", "--t", "2", "--s", "9"])), 64);
    assert_eq!(code(&opred(&["gen", "--algo", "bogus", "--n", "3", "--t", "2"])), 64);
    assert_eq!(code(&opred(&["--help"])), 0);
    let o = opred(&["--json", "gen", "--algo", "qm", "--n", "3", "--t", "8", "--seed", "1"]);
    assert_eq!(json(&o)["exit_code"], 2);
}

#[test]
fn gen_without_seed_prints_one() {
    let o = opred(&["--json", "gen", "--algo", "qm", "--n", "4", "--t", "3"]);
    let seed = json(&o)["seed"].as_u64().unwrap();
    let a = opred(&["--json", "gen", "--algo", "qm", "--n", "4", "--t", "3", "--seed", &seed.to_string()]);
    assert_eq!(json(&a), json(&o));
}

#[test]
fn seed_from_environment() {
    let run = |env: &str| {
        Command::new(env!("CARGO_BIN_EXE_opred"))
            .args(["gen", "--algo", "qm", "--n", "4", "--t", "3"])
            .env("OPRED_SEED", env)
            .output()
            .unwrap()
    };
    let o = run("99");
    assert!(stdout(&o).starts_with("seed: 99\n"));
    assert_eq!(stdout(&o), stdout(&opred(&["gen", "--algo", "qm", "--n", "4", "--t", "3", "--seed", "99"])));
}

#[test]
fn gen_emits_verilog_and_netlist() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("op.v");
    let o = opred(&["gen", "--algo", "qm", "--n", "4", "--t", "5", "--seed", "2", "--emit", "verilog", "--out", p(&v)]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&v).unwrap();
    assert!(text.contains("module opaque_predicate"));
    assert!(text.contains("OP_DFFR"));
    let o = opred(&["gen", "--algo", "rnd", "--n", "4", "--t", "3", "--seed", "2", "--emit", "netlist"]);
    assert!(stdout(&o).contains("opnet 1"));
    let bad = opred(&["gen", "--algo", "qm", "--n", "4", "--t", "5", "--emit", "verilog", "--module", "9x"]);
    assert_eq!(code(&bad), 64);
}

fn states_file(dir: &Path, body: &str) -> String {
    let f = dir.join("states.txt");
    std::fs::write(&f, body).unwrap();
    p(&f).to_string()
}

#[test]
fn encode_worked_example_wiring() {
    let dir = tempfile::tempdir().unwrap();
    let f = states_file(dir.path(), "s0 10100\ns1 11000\ns2 11100\ns3\ns4\n");
    let o = opred(&["--json", "encode", "--states", &f, "--subset", "s0,s1,s2", "--constant", "1101000", "--n", "5", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let taps: Vec<u64> = v["wiring"].as_array().unwrap().iter().map(|t| t["flip_flop"].as_u64().unwrap()).collect();
    assert_eq!(taps, [0, 1, 1, 4, 1, 4, 4]);
    assert_eq!(v["codes"]["s1"], "11000");
}

#[test]
fn encode_rejects_and_accepts() {
    let dir = tempfile::tempdir().unwrap();
    // nine states cannot fit three bits
    let nine: String = (0..9).map(|i| format!("q{i}\n")).collect();
    let f = states_file(dir.path(), &nine);
    assert_eq!(code(&opred(&["encode", "--states", &f, "--subset", "q0", "--constant", "1", "--n", "3"])), 2);
    // every state in the subset
    let f = states_file(dir.path(), "a\nb\n");
    assert_eq!(code(&opred(&["encode", "--states", &f, "--subset", "a,b", "--constant", "10", "--n", "3"])), 2);
    assert_eq!(code(&opred(&["encode", "--states", &f, "--subset", "a", "--constant", "12", "--n", "3"])), 64);

    let f = states_file(dir.path(), "a\nb\nc\nd\n");
    let o = opred(&["--json", "encode", "--states", &f, "--subset", "a,b", "--constant", "1111", "--n", "4", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    // other positions may be constant by coincidence; the wiring needs only one
    let taps: std::collections::BTreeSet<u64> =
        v["wiring"].as_array().unwrap().iter().map(|t| t["flip_flop"].as_u64().unwrap()).collect();
    assert_eq!(taps.len(), 1);
}

#[test]
fn table_matches_golden_csv() {
    let o = opred(&["table", "--trials", "10", "--n", "3,4", "--t", "2,3", "--seed", "42"]);
    assert_eq!(code(&o), 0);
    let golden = include_str!("golden/table_seed42.csv");
    assert_eq!(stdout(&o), golden);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed: 42"));
}

#[test]
fn table_shape_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = opred(&["table", "--trials", "3", "--seed", "1", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // 3 generators over the 11 (n, t) cells with t + 1 <= 2^n
    assert_eq!(rows.len(), 33);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",true")).count(), 1);
    assert!(rows.contains(&"RND,3,5,,,,,,0,true"));
    assert_eq!(code(&opred(&["table", "--trials", "0"])), 64);
    let md = opred(&["table", "--trials", "2", "--n", "3", "--t", "2", "--format", "markdown", "--seed", "1"]);
    assert!(stdout(&md).starts_with("| algorithm"));
}

#[test]
fn klepto_demo_and_recover() {
    let dir = tempfile::tempdir().unwrap();
    let adv = dir.path().join("adv.json");
    let consts = dir.path().join("consts.txt");
    let o = opred(&["--json", "klepto", "demo", "--lambda", "64", "--seed", "5", "--adv-out", p(&adv), "--constants-out", p(&consts)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["valid"], true);
    let rec = &v["recovered"];
    let kp = &v["keypair"];
    let mut got = [rec["p"].as_str().unwrap(), rec["q"].as_str().unwrap()];
    let mut want = [kp["p"].as_str().unwrap(), kp["q"].as_str().unwrap()];
    got.sort();
    want.sort();
    assert_eq!(got, want);
    let c = std::fs::read_to_string(&consts).unwrap();
    assert!(c.starts_with("N_adv ") && c.contains("\nE_adv "));

    let o = opred(&["klepto", "recover", "--n", kp["n"].as_str().unwrap(), "--e", kp["e"].as_str().unwrap(), "--adv", p(&adv)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("recovered at i = "));

    let honest = json(&opred(&["--json", "klepto", "demo", "--lambda", "64", "--honest", "--seed", "5"]));
    let hk = &honest["keypair"];
    let o = opred(&["klepto", "recover", "--n", hk["n"].as_str().unwrap(), "--e", hk["e"].as_str().unwrap(), "--adv", p(&adv)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("NotRecovered"));

    assert_eq!(code(&opred(&["klepto", "demo", "--lambda", "65"])), 64);
    assert_eq!(code(&opred(&["klepto", "recover", "--n", "x", "--e", "3", "--adv", p(&adv)])), 64);
}

#[test]
fn watermark_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let f = |name: &str| dir.path().join(name);
    let o = opred(&["wm", "fixture", "--out", p(&f("base.net")), "--spec-out", p(&f("base.json")), "--seed", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("capacity 96 bits"));

    let o = opred(&["wm", "attack", "--netlist", p(&f("base.net"))]);
    assert!(stdout(&o).starts_with("0 suspect"));

    let o = opred(&[
        "--json", "wm", "embed", "--netlist", p(&f("base.net")), "--spec", p(&f("base.json")), "--crc",
        "--payload", "1011001110001111", "--out", p(&f("wm.net")), "--spec-out", p(&f("wm.json")), "--seed", "4",
    ]);
    assert_eq!(code(&o), 0);
    let o = opred(&["--json", "wm", "extract", "--netlist", p(&f("wm.net")), "--spec", p(&f("wm.json")), "--crc"]);
    let v = json(&o);
    assert_eq!(v["matches_spec"], true);
    assert_eq!(v["message"], "1011001110001111");

    let base_spec: Value = serde_json::from_str(&std::fs::read_to_string(f("base.json")).unwrap()).unwrap();
    let mut marked: Vec<String> =
        base_spec["marks"].as_array().unwrap().iter().map(|m| m["cell"].as_str().unwrap().to_string()).collect();
    marked.sort();
    let v = json(&opred(&["--json", "wm", "attack", "--netlist", p(&f("wm.net"))]));
    let mut flagged: Vec<String> = v["suspects"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect();
    flagged.sort();
    assert_eq!(flagged, marked);

    let o = opred(&[
        "wm", "harden", "--netlist", p(&f("wm.net")), "--spec", p(&f("wm.json")), "--out", p(&f("hard.net")),
        "--algo", "qm", "--n", "4", "--t", "5", "--seed", "8", "--predicate-out", p(&f("op.opnet")),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0 still traced to GND"));
    let v = json(&opred(&["--json", "wm", "attack", "--netlist", p(&f("hard.net"))]));
    assert!(v["suspects"].as_array().unwrap().iter().all(|s| !marked.contains(&s.as_str().unwrap().to_string())));
    let v = json(&opred(&["--json", "wm", "extract", "--netlist", p(&f("hard.net")), "--spec", p(&f("wm.json")), "--crc"]));
    assert_eq!(v["crc_ok"], true);

    // reuse the saved predicate
    let o = opred(&[
        "wm", "harden", "--netlist", p(&f("wm.net")), "--spec", p(&f("wm.json")), "--out", p(&f("hard2.net")),
        "--predicate", p(&f("op.opnet")),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(f("hard.net")).unwrap(), std::fs::read_to_string(f("hard2.net")).unwrap());

    let long = "1".repeat(97);
    let o = opred(&[
        "wm", "embed", "--netlist", p(&f("base.net")), "--spec", p(&f("base.json")), "--payload", &long,
        "--out", p(&f("x.net")), "--spec-out", p(&f("x.json")),
    ]);
    assert_eq!(code(&o), 2);
}
