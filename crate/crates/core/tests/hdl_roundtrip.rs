use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opred_core::boolfn::count_gates;
use opred_core::hdl::{emit_netlist, emit_netlist_file, emit_verilog, parse_netlist, parse_netlist_file, parse_verilog};
use opred_core::opgen::{qm_generate, qmx_generate, rnd_generate, OpaquePredicate, Tap, WiringPlan};

fn predicate(kind: u8, width: u8, t: u32, seed: u64) -> OpaquePredicate {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        0 => qm_generate(width, 0, t, &mut r),
        1 => qmx_generate(width, 0, t, &mut r),
        _ => rnd_generate(width, 0, t.min(4), &mut r, 5_000_000),
    }
    .unwrap()
}

fn wiring_strategy(width: u8) -> impl Strategy<Value = WiringPlan> {
    prop::collection::vec((0..width, any::<bool>()), 0..8)
        .prop_map(|taps| WiringPlan { taps: taps.into_iter().map(|(flip_flop, inverted)| Tap { flip_flop, inverted }).collect() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verilog_round_trip(kind in 0u8..3, width in 3u8..=6, t in 1u32..8, seed: u64, wiring in wiring_strategy(3)) {
        let op = predicate(kind, width, t, seed);
        let wiring = (!wiring.is_empty()).then_some(wiring);
        let text = emit_verilog(&op, wiring.as_ref(), "dut").unwrap();
        let parsed = parse_verilog(&text).unwrap();
        prop_assert_eq!(&parsed.name, "dut");
        prop_assert_eq!(parsed.system.reset_state(), op.reset_state());
        prop_assert_eq!(parsed.gate_instances, count_gates(op.system.network()));
        prop_assert_eq!(parsed.wiring.as_ref().map(|w| &w.taps), wiring.as_ref().map(|w| &w.taps));
        for x in 0..1u32 << width {
            prop_assert_eq!(parsed.system.next(x).unwrap(), op.system.next(x).unwrap());
        }
        prop_assert_eq!(parsed.system.stabilization_delay(), Some(op.delay));
    }

    #[test]
    fn netlist_round_trip(kind in 0u8..3, width in 3u8..=6, t in 1u32..8, seed: u64, wiring in wiring_strategy(3)) {
        let op = predicate(kind, width, t, seed);
        let text = emit_netlist(&op.system, Some(&wiring));
        let (sys, back) = parse_netlist(&text).unwrap();
        prop_assert_eq!(&back, &wiring);
        prop_assert_eq!(sys.reset_state(), op.reset_state());
        for x in 0..1u32 << width {
            prop_assert_eq!(sys.next(x).unwrap(), op.system.next(x).unwrap());
        }
        // emitting again is a fixed point
        prop_assert_eq!(emit_netlist(&sys, Some(&back)), text);
    }
}

#[test]
fn files_round_trip() {
    let op = predicate(0, 4, 5, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.opnet");
    emit_netlist_file(&op.system, None, &path).unwrap();
    let (sys, wiring) = parse_netlist_file(&path).unwrap();
    assert!(wiring.is_empty());
    assert_eq!(sys.stabilization_delay(), Some(5));
    assert!(parse_netlist_file(dir.path().join("missing")).is_err());
}

#[test]
fn rejects_bad_module_names() {
    let op = predicate(0, 3, 2, 1);
    assert!(emit_verilog(&op, None, "1bad").is_err());
    assert!(emit_verilog(&op, None, "module").is_err());
    assert!(parse_verilog("module m (clk); endmodule").is_err());
}
