use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opred_core::opgen::{plan_wiring, qm_generate};
use opred_core::watermark::{
    cell_behavior, check_crc8, embed, extract, extract_from_dump, fixture, gnd_trace_attack, harden,
    reachable_function, with_crc8, LutNetlist, WatermarkSpec, GND,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embed_extract_and_attack(seed: u64, cells in 4usize..40, marked_frac in 1usize..4, bits in prop::collection::vec(any::<bool>(), 0..200)) {
        let marked = (cells / marked_frac).max(1);
        let (net, spec) = fixture(cells, marked, &mut rng(seed));
        let capacity = spec.capacity(&net).unwrap();
        prop_assert_eq!(capacity, 12 * spec.marks.len());
        let payload: Vec<bool> = bits.into_iter().take(capacity).collect();
        let spec = WatermarkSpec { payload: payload.clone(), ..spec };
        let wm = embed(&net, &spec, GND).unwrap();
        prop_assert_eq!(extract(&wm, &spec).unwrap(), payload.clone());
        prop_assert_eq!(extract_from_dump(&wm.config_dump(), &spec).unwrap(), payload);
        let mut flagged = gnd_trace_attack(&wm);
        flagged.sort();
        let mut expect: Vec<String> = spec.marks.iter().map(|m| m.cell.clone()).collect();
        expect.dedup();
        prop_assert_eq!(flagged, expect);
        for m in &spec.marks {
            prop_assert_eq!(reachable_function(&net, m).unwrap(), reachable_function(&wm, m).unwrap());
        }
        prop_assert_eq!(LutNetlist::from_text(&wm.to_text()).unwrap(), wm);
    }

    #[test]
    fn crc_round_trip(msg in prop::collection::vec(any::<bool>(), 0..64), flip in any::<prop::sample::Index>()) {
        let framed = with_crc8(&msg);
        prop_assert_eq!(framed.len(), msg.len() + 8);
        prop_assert_eq!(check_crc8(&framed), Some(msg));
        let mut bad = framed.clone();
        let i = flip.index(bad.len());
        bad[i] = !bad[i];
        prop_assert_eq!(check_crc8(&bad), None);
    }
}

#[test]
fn hardened_design_behaves_like_the_original() {
    let (net, spec) = fixture(40, 6, &mut rng(21));
    let spec = WatermarkSpec { payload: (0..72).map(|i| i % 5 == 1).collect(), ..spec };
    let wm = embed(&net, &spec, GND).unwrap();
    let op = qm_generate(5, 0, 7, &mut rng(22)).unwrap();
    let fixed: Vec<(u8, bool)> = (0..5).map(|i| (i, op.stable_bit(i))).collect();
    let wiring = plan_wiring(&fixed, &[false, false, false], true).unwrap();
    let hard = harden(&wm, &spec, &op, &wiring).unwrap();
    assert!(gnd_trace_attack(&hard).iter().all(|c| spec.marks.iter().all(|m| &m.cell != c)));
    assert_eq!(extract(&hard, &spec).unwrap(), spec.payload);

    let mut sim = hard.simulator().unwrap();
    let mut r = rng(23);
    for cycle in 0..op.delay + 4 {
        let inputs: HashMap<String, bool> = (0..8).map(|k| (format!("in{k}"), rand::Rng::gen(&mut r))).collect();
        if cycle >= op.delay {
            for m in &spec.marks {
                assert_eq!(cell_behavior(&sim, &hard, m, &inputs).unwrap(), reachable_function(&net, m).unwrap());
            }
            // the design's observable outputs match the GND-tied version too
            let mut plain = wm.simulator().unwrap();
            let (a, b) = (sim.values(&inputs), plain.values(&inputs));
            for c in &net.cells {
                assert_eq!(a[c.output.as_str()], b[c.output.as_str()], "net {}", c.output);
            }
            plain.step(&inputs);
        }
        sim.step(&inputs);
    }
}
