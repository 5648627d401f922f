//! Randomized generation: draw a sparse transition function, keep it if it
//! settles late enough.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_state, check_width, Generator, OpGenError, OpaquePredicate};
use crate::boolfn::{count_gates, cse, GateKind, GateNetwork, NetworkBuilder, Signal};
use crate::fsm::TransitionSystem;

pub const DEFAULT_ATTEMPT_BUDGET: u64 = 1_000_000;

const COMBINERS: [GateKind; 3] = [GateKind::Or, GateKind::And, GateKind::Xor];

/// How one register bit is updated: the other bits in `inputs`, the ones in
/// `negated` inverted first, all of them joined by one `kind` of gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RndBit {
    pub inputs: u32,
    pub negated: u32,
    pub kind: GateKind,
}

impl RndBit {
    fn draw<R: Rng + ?Sized>(width: u8, bit: u8, rng: &mut R) -> Self {
        let others = ((1u32 << width) - 1) & !(1 << bit);
        let inputs = loop {
            let m = rng.gen::<u32>() & others;
            if m.count_ones() >= 2 {
                break m;
            }
        };
        let negated = rng.gen::<u32>() & inputs;
        let kind = COMBINERS[rng.gen_range(0..COMBINERS.len())];
        Self { inputs, negated, kind }
    }

    fn next(&self, x: u32) -> bool {
        let v = (x ^ self.negated) & self.inputs;
        match self.kind {
            GateKind::And => v == self.inputs,
            GateKind::Or => v != 0,
            GateKind::Xor => v.count_ones() % 2 == 1,
            GateKind::Not => unreachable!("combiner is never NOT"),
        }
    }

    fn build(&self, width: u8) -> GateNetwork {
        let mut b = NetworkBuilder::new(width as u16);
        let lits: Vec<Signal> = (0..width as u16)
            .filter(|i| self.inputs >> i & 1 == 1)
            .map(|i| b.literal(i, self.negated >> i & 1 == 0))
            .collect();
        let out = b.chain(self.kind, &lits).expect("at least two inputs");
        b.finish(vec![out])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RndOptions {
    pub attempt_budget: u64,
    pub time_limit: Option<Duration>,
}

impl Default for RndOptions {
    fn default() -> Self {
        Self { attempt_budget: DEFAULT_ATTEMPT_BUDGET, time_limit: None }
    }
}

/// Draws transition functions until one reaches a fixpoint at least `t_min`
/// cycles after reset.
pub fn rnd_generate<R: Rng + ?Sized>(
    width: u8,
    start: u32,
    t_min: u32,
    rng: &mut R,
    attempt_budget: u64,
) -> Result<OpaquePredicate, OpGenError> {
    rnd_generate_with(width, start, t_min, rng, RndOptions { attempt_budget, time_limit: None })
}

pub fn rnd_generate_with<R: Rng + ?Sized>(
    width: u8,
    start: u32,
    t_min: u32,
    rng: &mut R,
    options: RndOptions,
) -> Result<OpaquePredicate, OpGenError> {
    check_width(width)?;
    if width < 3 {
        return Err(OpGenError::InvalidArgument("RND needs at least 3 bits so every bit reads two others".into()));
    }
    check_state(width, start)?;
    if options.attempt_budget == 0 {
        return Err(OpGenError::InvalidArgument("attempt budget must be at least 1".into()));
    }
    let started = Instant::now();
    let mut bits = Vec::with_capacity(width as usize);
    for attempt in 1..=options.attempt_budget {
        bits.clear();
        bits.extend((0..width).map(|b| RndBit::draw(width, b, rng)));
        if let Some((z, t)) = settle(&bits, start, width) {
            if t >= t_min {
                return assemble(width, start, bits, z, t, attempt);
            }
        }
        if attempt % 4096 == 0 {
            if let Some(limit) = options.time_limit {
                if started.elapsed() >= limit {
                    return Err(OpGenError::Timeout { attempts: attempt });
                }
            }
        }
    }
    Err(OpGenError::BudgetExhausted { attempts: options.attempt_budget })
}

/// Fast pre-screen on the bit descriptions; `Some((z, t))` for a fixpoint.
fn settle(bits: &[RndBit], start: u32, width: u8) -> Option<(u32, u32)> {
    let step = |x: u32| bits.iter().enumerate().fold(0u32, |acc, (j, b)| acc | (b.next(x) as u32) << j);
    let mut seen = vec![false; 1 << width];
    let mut x = start;
    for t in 0u32.. {
        let y = step(x);
        if y == x {
            return Some((x, t));
        }
        seen[x as usize] = true;
        if seen[y as usize] {
            return None;
        }
        x = y;
    }
    unreachable!()
}

fn assemble(width: u8, start: u32, bits: Vec<RndBit>, z: u32, t: u32, attempts: u64) -> Result<OpaquePredicate, OpGenError> {
    let per_bit: Vec<GateNetwork> = bits.iter().map(|b| b.build(width)).collect();
    let f = cse(&per_bit)?;
    let counts = count_gates(&f);
    let system = TransitionSystem::new(width, f, start)?;
    let checked = system.simulate_until_stable(None).fixpoint();
    debug_assert_eq!(checked, Some((z, t)));
    Ok(OpaquePredicate {
        system,
        stable_state: z,
        delay: t,
        generator: Generator::Rnd,
        counts,
        sequence: None,
        rnd_bits: Some(bits),
        attempts,
    })
}
