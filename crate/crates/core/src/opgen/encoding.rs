//! State encoding for an existing FSM so that some register bits stay
//! constant while it walks a given subset of its states.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_width, OpGenError};

/// A constant bit read from one flip-flop, optionally through an inverter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tap {
    pub flip_flop: u8,
    pub inverted: bool,
}

/// `taps[j]` drives constant bit `C_j`. Several bits may share a flip-flop.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WiringPlan {
    pub taps: Vec<Tap>,
}

impl WiringPlan {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Constant bits as seen when the register holds `state`.
    pub fn read(&self, state: u32) -> Vec<bool> {
        self.taps
            .iter()
            .map(|t| (state >> t.flip_flop & 1 == 1) ^ t.inverted)
            .collect()
    }

    /// Constant bits driven by flip-flop `ff`.
    pub fn fanout(&self, ff: u8) -> Vec<usize> {
        self.taps.iter().enumerate().filter(|(_, t)| t.flip_flop == ff).map(|(j, _)| j).collect()
    }
}

/// Maps every constant bit to the fixed position of matching value whose
/// index is nearest to the bit's own index (lower index on a tie). With
/// `allow_inversion`, a bit value no position holds is taken inverted.
pub fn plan_wiring(fixed: &[(u8, bool)], constant: &[bool], allow_inversion: bool) -> Result<WiringPlan, OpGenError> {
    let nearest = |j: usize, value: bool| {
        fixed
            .iter()
            .filter(|(_, v)| *v == value)
            .map(|(i, _)| *i)
            .min_by_key(|&i| ((i as isize - j as isize).unsigned_abs(), i))
    };
    let taps = constant
        .iter()
        .enumerate()
        .map(|(j, &value)| match nearest(j, value) {
            Some(ff) => Ok(Tap { flip_flop: ff, inverted: false }),
            None if allow_inversion => nearest(j, !value)
                .map(|ff| Tap { flip_flop: ff, inverted: true })
                .ok_or(OpGenError::UnmatchedBitValue(value)),
            None => Err(OpGenError::UnmatchedBitValue(value)),
        })
        .collect::<Result<_, _>>()?;
    Ok(WiringPlan { taps })
}

/// Inputs to [`encode_states`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EncodingProblem {
    pub width: u8,
    pub states: Vec<String>,
    /// States passed during the processing period.
    pub subset: Vec<String>,
    /// `constant[j]` is `C_j`.
    pub constant: Vec<bool>,
    /// Codes the designer has already fixed.
    pub pinned: BTreeMap<String, u32>,
    pub allow_inversion: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingAssignment {
    pub width: u8,
    /// In the order of [`EncodingProblem::states`].
    pub codes: Vec<(String, u32)>,
    pub subset: Vec<String>,
    /// Positions constant across the subset that some other state flips.
    pub fixed_positions: Vec<(u8, bool)>,
}

impl EncodingAssignment {
    pub fn code(&self, name: &str) -> Option<u32> {
        self.codes.iter().find(|(n, _)| n == name).map(|(_, c)| *c)
    }
}

pub fn encode_states<R: Rng + ?Sized>(
    problem: &EncodingProblem,
    rng: &mut R,
) -> Result<(EncodingAssignment, WiringPlan), OpGenError> {
    let ctx = Context::new(problem)?;
    let (positions, pattern) = ctx.choose_positions()?;
    let codes = ctx.assign(positions, pattern, rng);

    let in_subset: Vec<u32> = problem.subset.iter().map(|s| codes[s]).collect();
    let outside: Vec<u32> = problem
        .states
        .iter()
        .filter(|s| !ctx.subset.contains(s.as_str()))
        .map(|s| codes[s])
        .collect();
    let fixed_positions: Vec<(u8, bool)> = (0..problem.width)
        .filter_map(|i| {
            let v = in_subset[0] >> i & 1;
            let constant_on_subset = in_subset.iter().all(|c| c >> i & 1 == v);
            let flips_elsewhere = outside.iter().any(|c| c >> i & 1 != v);
            (constant_on_subset && flips_elsewhere).then_some((i, v == 1))
        })
        .collect();
    let wiring = plan_wiring(&fixed_positions, &problem.constant, problem.allow_inversion)?;
    let assignment = EncodingAssignment {
        width: problem.width,
        codes: problem.states.iter().map(|s| (s.clone(), codes[s])).collect(),
        subset: problem.subset.clone(),
        fixed_positions,
    };
    Ok((assignment, wiring))
}

struct Context<'a> {
    p: &'a EncodingProblem,
    subset: HashSet<&'a str>,
    needed: BTreeSet<bool>,
}

impl<'a> Context<'a> {
    fn new(p: &'a EncodingProblem) -> Result<Self, OpGenError> {
        check_width(p.width)?;
        let invalid = |m: String| Err(OpGenError::InvalidArgument(m));
        let space = 1u64 << p.width;
        if p.states.is_empty() {
            return invalid("no states given".into());
        }
        let names: HashSet<&str> = p.states.iter().map(String::as_str).collect();
        if names.len() != p.states.len() {
            return invalid("duplicate state name".into());
        }
        if p.states.len() as u64 > space {
            return Err(OpGenError::Infeasible(format!(
                "{} states do not fit in a {}-bit register",
                p.states.len(),
                p.width
            )));
        }
        if p.subset.is_empty() {
            return invalid("the processing-period subset is empty".into());
        }
        if p.constant.is_empty() {
            return invalid("the constant has no bits".into());
        }
        let subset: HashSet<&str> = p.subset.iter().map(String::as_str).collect();
        if subset.len() != p.subset.len() {
            return invalid("duplicate state in subset".into());
        }
        if let Some(s) = subset.iter().find(|s| !names.contains(*s)) {
            return invalid(format!("subset state `{s}` is not a state of the FSM"));
        }
        let mut used = HashSet::new();
        for (name, &code) in &p.pinned {
            if !names.contains(name.as_str()) {
                return invalid(format!("pinned state `{name}` is not a state of the FSM"));
            }
            if code as u64 >= space {
                return Err(OpGenError::StateOutOfRange { state: code, width: p.width });
            }
            if !used.insert(code) {
                return invalid(format!("code {code:#b} is pinned twice"));
            }
        }
        if subset.len() == names.len() {
            return Err(OpGenError::Infeasible(
                "every state is in the subset, so no state can move the fixed bits".into(),
            ));
        }
        let needed = if p.allow_inversion {
            BTreeSet::from([p.constant[0]])
        } else {
            p.constant.iter().copied().collect()
        };
        Ok(Self { p, subset, needed })
    }

    fn pinned(&self, name: &str) -> Option<u32> {
        self.p.pinned.get(name).copied()
    }

    /// Smallest position set (then lowest indices, then lowest pattern) that
    /// can hold all needed bit values.
    fn choose_positions(&self) -> Result<(u32, u32), OpGenError> {
        let n = self.p.width;
        let pinned_codes: HashSet<u32> = self.p.pinned.values().copied().collect();
        let unpinned_subset = self.p.subset.iter().filter(|s| self.pinned(s).is_none()).count() as u64;
        let pinned_subset: Vec<u32> = self.p.subset.iter().filter_map(|s| self.pinned(s)).collect();
        let outside: Vec<&String> = self.p.states.iter().filter(|s| !self.subset.contains(s.as_str())).collect();
        let pinned_outside: Vec<u32> = outside.iter().filter_map(|s| self.pinned(s)).collect();
        let free_outside = outside.len() > pinned_outside.len();

        let free_codes = |positions: u32, pattern: u32, matching: bool| {
            (0..1u32 << n)
                .filter(|c| !pinned_codes.contains(c))
                .filter(|c| if matching { c & positions == pattern } else { (c ^ pattern) & positions == positions })
                .count() as u64
        };

        for k in self.needed.len() as u32..=n as u32 {
            for positions in (0..1u32 << n).filter(|m| m.count_ones() == k) {
                for pattern in submasks(positions) {
                    let values: BTreeSet<bool> = (0..n).filter(|i| positions >> i & 1 == 1).map(|i| pattern >> i & 1 == 1).collect();
                    if !self.needed.is_subset(&values) {
                        continue;
                    }
                    if pinned_subset.iter().any(|c| c & positions != pattern) {
                        continue;
                    }
                    if free_codes(positions, pattern, true) < unpinned_subset {
                        continue;
                    }
                    let anti_available = free_outside && free_codes(positions, pattern, false) > 0;
                    let every_position_moves = (0..n).filter(|i| positions >> i & 1 == 1).all(|i| {
                        anti_available || pinned_outside.iter().any(|c| (c ^ pattern) >> i & 1 == 1)
                    });
                    if every_position_moves {
                        return Ok((positions, pattern));
                    }
                }
            }
        }
        Err(OpGenError::Infeasible(format!(
            "no set of register positions can stay constant over {} of {} states while other states flip them",
            self.p.subset.len(),
            self.p.states.len()
        )))
    }

    fn assign<R: Rng + ?Sized>(&self, positions: u32, pattern: u32, rng: &mut R) -> BTreeMap<String, u32> {
        let n = self.p.width;
        let mut codes: BTreeMap<String, u32> = self.p.pinned.clone();
        let mut used: HashSet<u32> = codes.values().copied().collect();
        let take = |candidates: Vec<u32>, used: &mut HashSet<u32>, rng: &mut R| {
            let pick = *candidates.choose(rng).expect("feasibility was checked");
            used.insert(pick);
            pick
        };

        let unpinned_subset: Vec<&String> = self.p.subset.iter().filter(|s| !codes.contains_key(*s)).collect();
        for s in unpinned_subset {
            let cands: Vec<u32> = (0..1u32 << n).filter(|c| !used.contains(c) && c & positions == pattern).collect();
            let c = take(cands, &mut used, rng);
            codes.insert(s.clone(), c);
        }

        // one outside state flips every bit the subset agrees on, if a code allows
        let subset_codes: Vec<u32> = self.p.subset.iter().map(|s| codes[s]).collect();
        let agree = (0..n)
            .filter(|i| subset_codes.iter().all(|c| (c ^ subset_codes[0]) >> i & 1 == 0))
            .fold(0u32, |m, i| m | 1 << i);
        let unpinned_outside: Vec<&String> = self
            .p
            .states
            .iter()
            .filter(|s| !self.subset.contains(s.as_str()) && !codes.contains_key(*s))
            .collect();
        let mut outside = unpinned_outside.into_iter();
        if let Some(s) = outside.next() {
            let flips = |mask: u32| -> Vec<u32> {
                (0..1u32 << n)
                    .filter(|c| !used.contains(c) && (c ^ subset_codes[0]) & mask == mask)
                    .collect()
            };
            let mut cands = flips(agree);
            if cands.is_empty() {
                cands = flips(positions);
            }
            let c = take(cands, &mut used, rng);
            codes.insert(s.clone(), c);
        }
        for s in outside {
            let cands: Vec<u32> = (0..1u32 << n).filter(|c| !used.contains(c)).collect();
            let c = take(cands, &mut used, rng);
            codes.insert(s.clone(), c);
        }
        codes
    }
}

/// Submasks of `mask` in ascending order.
fn submasks(mask: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(1 << mask.count_ones());
    let mut sub = 0u32;
    loop {
        out.push(sub);
        if sub == mask {
            break;
        }
        sub = (sub.wrapping_sub(mask)) & mask;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().rev().map(|c| c == '1').collect()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn wiring_for_register_example() {
        let plan = plan_wiring(&[(4, true), (1, false), (0, false)], &bits("1101000"), false).unwrap();
        let ffs: Vec<u8> = plan.taps.iter().map(|t| t.flip_flop).collect();
        // C0..C6
        assert_eq!(ffs, vec![0, 1, 1, 4, 1, 4, 4]);
        assert!(plan.taps.iter().all(|t| !t.inverted));
        assert_eq!(plan.fanout(4), vec![3, 5, 6]);
    }

    #[test]
    fn single_zero_position_fans_out() {
        let plan = plan_wiring(&[(2, false)], &[false; 6], false).unwrap();
        assert!(plan.taps.iter().all(|t| t.flip_flop == 2));
    }

    #[test]
    fn missing_value_is_an_error() {
        assert_eq!(
            plan_wiring(&[(2, false)], &bits("10"), false).unwrap_err(),
            OpGenError::UnmatchedBitValue(true)
        );
        let plan = plan_wiring(&[(2, false)], &bits("10"), true).unwrap();
        assert_eq!(plan.taps[1], Tap { flip_flop: 2, inverted: true });
    }

    #[test]
    fn all_ones_constant_needs_one_position() {
        let problem = EncodingProblem {
            width: 3,
            states: names(&["a", "b", "c", "d"]),
            subset: names(&["a", "b"]),
            constant: vec![true; 4],
            ..Default::default()
        };
        let (enc, plan) = encode_states(&problem, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let ff = plan.taps[0].flip_flop;
        assert!(plan.taps.iter().all(|t| t.flip_flop == ff));
        assert!(enc.fixed_positions.contains(&(ff, true)));
    }

    #[test]
    fn full_subset_is_infeasible() {
        let all: Vec<String> = (0..8).map(|i| format!("s{i}")).collect();
        let mut states = all.clone();
        states.push("extra".into());
        let problem = EncodingProblem { width: 3, states, subset: all, constant: bits("1"), ..Default::default() };
        assert!(matches!(encode_states(&problem, &mut ChaCha8Rng::seed_from_u64(0)), Err(OpGenError::Infeasible(_))));
    }

    #[test]
    fn subset_without_outside_states_is_infeasible() {
        let problem = EncodingProblem {
            width: 3,
            states: names(&["a", "b"]),
            subset: names(&["a", "b"]),
            constant: bits("1"),
            ..Default::default()
        };
        assert!(matches!(encode_states(&problem, &mut ChaCha8Rng::seed_from_u64(0)), Err(OpGenError::Infeasible(_))));
    }

    #[test]
    fn input_validation() {
        let base = EncodingProblem {
            width: 3,
            states: names(&["a", "b", "c"]),
            subset: names(&["a"]),
            constant: bits("1"),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad_subset = EncodingProblem { subset: names(&["z"]), ..base.clone() };
        assert!(matches!(encode_states(&bad_subset, &mut rng), Err(OpGenError::InvalidArgument(_))));
        let empty_constant = EncodingProblem { constant: vec![], ..base.clone() };
        assert!(matches!(encode_states(&empty_constant, &mut rng), Err(OpGenError::InvalidArgument(_))));
        let pinned_twice = EncodingProblem {
            pinned: BTreeMap::from([("a".into(), 1), ("b".into(), 1)]),
            ..base.clone()
        };
        assert!(matches!(encode_states(&pinned_twice, &mut rng), Err(OpGenError::InvalidArgument(_))));
        assert!(encode_states(&base, &mut rng).is_ok());
    }
}
