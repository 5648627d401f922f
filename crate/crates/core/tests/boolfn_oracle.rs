use proptest::prelude::*;

use opred_core::boolfn::{cse, quine_mccluskey, to_gate_network, xor_rewrite, Cover, Implicant, Literal};

/// (on, dc) from a ternary code per minterm: 0 off, 1 on, 2 don't care.
fn split(width: u8, codes: &[u8]) -> (Vec<u32>, Vec<u32>) {
    let pick = |v| (0..1u32 << width).filter(|&m| codes[m as usize] == v).collect();
    (pick(1), pick(2))
}

fn table(max_width: u8) -> impl Strategy<Value = (u8, Vec<u8>)> {
    (1..=max_width).prop_flat_map(|w| (Just(w), prop::collection::vec(0u8..3, 1usize << w)))
}

fn covers(imp: &Implicant, width: u8, m: u32) -> bool {
    (0..width).all(|b| match imp.literal(b) {
        Literal::Positive => m >> b & 1 == 1,
        Literal::Negative => m >> b & 1 == 0,
        Literal::Absent => true,
    })
}

/// Every product over `width` variables, as (care, value) masks.
fn all_cubes(width: u8) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for care in 0..1u32 << width {
        let mut v = 0u32;
        loop {
            out.push((care, v));
            if v == care {
                break;
            }
            v = (v.wrapping_sub(care)) & care;
        }
    }
    out
}

fn cube_covers((care, value): (u32, u32), m: u32) -> bool {
    m & care == value
}

/// Fewest products that cover `on` without touching an off minterm.
fn min_cover_size(width: u8, codes: &[u8]) -> usize {
    let on: Vec<u32> = (0..1u32 << width).filter(|&m| codes[m as usize] == 1).collect();
    if on.is_empty() {
        return 0;
    }
    let legal: Vec<u32> = all_cubes(width)
        .into_iter()
        .filter(|&c| (0..1u32 << width).all(|m| !cube_covers(c, m) || codes[m as usize] != 0))
        .map(|c| on.iter().enumerate().filter(|(_, &m)| cube_covers(c, m)).fold(0u32, |a, (i, _)| a | 1 << i))
        .filter(|&mask| mask != 0)
        .collect();
    let full = (1u32 << on.len()) - 1;
    // breadth-first over reachable covered-sets
    let mut frontier = vec![0u32];
    let mut seen = std::collections::HashSet::from([0u32]);
    for k in 1.. {
        let mut next = Vec::new();
        for &f in &frontier {
            for &c in &legal {
                let g = f | c;
                if g == full {
                    return k;
                }
                if seen.insert(g) {
                    next.push(g);
                }
            }
        }
        frontier = next;
    }
    unreachable!()
}

proptest! {
    #[test]
    fn qm_agrees_with_table((width, codes) in table(6)) {
        let (on, dc) = split(width, &codes);
        let cover = quine_mccluskey(&on, &dc, width).unwrap();
        for m in 0..1u32 << width {
            let got = cover.implicants().iter().any(|i| covers(i, width, m));
            match codes[m as usize] {
                0 => prop_assert!(!got, "off minterm {} covered", m),
                1 => prop_assert!(got, "on minterm {} missed", m),
                _ => {}
            }
        }
    }

    #[test]
    fn qm_uses_only_primes((width, codes) in table(5)) {
        let (on, dc) = split(width, &codes);
        let cover = quine_mccluskey(&on, &dc, width).unwrap();
        let allowed = |care: u32, value: u32| (0..1u32 << width).all(|m| m & care != value || codes[m as usize] != 0);
        for imp in cover.implicants() {
            let (care, value) = (imp.care_mask(), imp.value_bits());
            prop_assert!(allowed(care, value));
            for b in 0..width {
                if care >> b & 1 == 1 {
                    let bit = 1 << b;
                    prop_assert!(!allowed(care & !bit, value & !bit), "implicant could drop bit {}", b);
                }
            }
        }
    }

    #[test]
    fn qm_is_minimum_for_small_tables((width, codes) in table(4)) {
        let (on, dc) = split(width, &codes);
        let cover = quine_mccluskey(&on, &dc, width).unwrap();
        prop_assert_eq!(cover.len(), min_cover_size(width, &codes));
    }

    #[test]
    fn networks_implement_their_cover((width, codes) in table(5)) {
        let (on, dc) = split(width, &codes);
        let cover = quine_mccluskey(&on, &dc, width).unwrap();
        let and_or = to_gate_network(&cover);
        let with_xor = xor_rewrite(&cover);
        for m in 0..1u32 << width {
            let want = cover.evaluate(m) as u32;
            prop_assert_eq!(and_or.evaluate_word(m).unwrap(), want);
            prop_assert_eq!(with_xor.evaluate_word(m).unwrap(), want);
        }
    }

    #[test]
    fn cse_preserves_every_output(
        width in 2u8..=5,
        seeds in prop::collection::vec(prop::collection::vec(0u8..3, 32), 1..5),
    ) {
        let covers: Vec<Cover> = seeds
            .iter()
            .map(|codes| {
                let (on, dc) = split(width, &codes[..1 << width]);
                quine_mccluskey(&on, &dc, width).unwrap()
            })
            .collect();
        let parts: Vec<_> = covers.iter().map(to_gate_network).collect();
        let joined = cse(&parts).unwrap();
        prop_assert_eq!(joined.outputs().len(), parts.len());
        for m in 0..1u32 << width {
            let want = covers.iter().enumerate().fold(0u32, |a, (j, c)| a | (c.evaluate(m) as u32) << j);
            prop_assert_eq!(joined.evaluate_word(m).unwrap(), want);
        }
    }
}

#[test]
fn rejects_overlapping_sets() {
    assert!(quine_mccluskey(&[1, 2], &[2], 2).is_err());
    assert!(quine_mccluskey(&[4], &[], 2).is_err());
}
