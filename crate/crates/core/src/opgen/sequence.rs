//! Sequence-driven generation: pick a settling state sequence, then
//! synthesize the next-state logic that follows it.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use super::{check_state, check_width, Generator, OpGenError, OpaquePredicate};
use crate::boolfn::{count_gates, cse, quine_mccluskey, to_gate_network, xor_rewrite, GateNetwork};
use crate::fsm::TransitionSystem;

/// `x_0 = s, x_1, ..., x_t, x_{t+1} = x_t` with `x_0..=x_t` pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSequence {
    width: u8,
    states: Vec<u32>,
}

impl StateSequence {
    /// Checks the shape invariants of a hand-written sequence.
    pub fn new(width: u8, states: Vec<u32>) -> Result<Self, OpGenError> {
        check_width(width)?;
        if states.len() < 3 {
            return Err(OpGenError::InvalidArgument("a sequence needs at least x_0, x_1 and x_2 = x_1".into()));
        }
        for &x in &states {
            check_state(width, x)?;
        }
        let (last, body) = states.split_last().expect("nonempty");
        if body.last() != Some(last) {
            return Err(OpGenError::InvalidArgument("the final two states must be equal".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = body.iter().find(|x| !seen.insert(**x)) {
            return Err(OpGenError::InvalidArgument(format!("state {dup:#x} appears twice")));
        }
        Ok(Self { width, states })
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    /// Stabilization delay `t`.
    pub fn delay(&self) -> u32 {
        (self.states.len() - 2) as u32
    }

    pub fn start(&self) -> u32 {
        self.states[0]
    }

    pub fn stable_state(&self) -> u32 {
        self.states[self.states.len() - 1]
    }

    /// `(x_i, x_{i+1})` for every `i ≤ t`.
    pub fn transitions(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.states.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Draws `x_1..=x_t` uniformly without replacement from the states other than `s`.
pub fn gen_sequence<R: Rng + ?Sized>(width: u8, t: u32, start: u32, rng: &mut R) -> Result<StateSequence, OpGenError> {
    check_width(width)?;
    check_state(width, start)?;
    if t == 0 {
        return Err(OpGenError::InvalidArgument("stabilization delay must be at least 1".into()));
    }
    let space = 1u64 << width;
    if t as u64 + 1 > space {
        return Err(OpGenError::Infeasible(format!(
            "a delay of {t} needs {} distinct states but a {width}-bit register has {space}",
            t as u64 + 1
        )));
    }
    let mut states = Vec::with_capacity(t as usize + 2);
    states.push(start);
    for k in index::sample(rng, space as usize - 1, t as usize) {
        let k = k as u32;
        states.push(if k < start { k } else { k + 1 });
    }
    states.push(*states.last().expect("t ≥ 1"));
    Ok(StateSequence { width, states })
}

/// How the requested delay is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayTarget {
    Exact(u32),
    /// Draw `t` uniformly from `t_min..2^n`.
    AtLeast(u32),
}

impl DelayTarget {
    fn resolve<R: Rng + ?Sized>(self, width: u8, rng: &mut R) -> Result<u32, OpGenError> {
        match self {
            DelayTarget::Exact(t) => Ok(t),
            DelayTarget::AtLeast(t_min) => {
                let max = (1u64 << width) - 1;
                if (t_min as u64) > max {
                    return Err(OpGenError::Infeasible(format!("no delay ≥ {t_min} fits a {width}-bit register")));
                }
                Ok(rng.gen_range(t_min.max(1) as u64..=max) as u32)
            }
        }
    }
}

/// Quine-McCluskey generation with stabilization delay exactly `t`.
pub fn qm_generate<R: Rng + ?Sized>(width: u8, start: u32, t: u32, rng: &mut R) -> Result<OpaquePredicate, OpGenError> {
    qm_generate_with(width, start, DelayTarget::Exact(t), rng)
}

pub fn qm_generate_with<R: Rng + ?Sized>(
    width: u8,
    start: u32,
    delay: DelayTarget,
    rng: &mut R,
) -> Result<OpaquePredicate, OpGenError> {
    check_width(width)?;
    let t = delay.resolve(width, rng)?;
    let seq = gen_sequence(width, t, start, rng)?;
    predicate_from_sequence(&seq, Generator::Qm)
}

/// Like [`qm_generate`] with XOR extraction before sharing. For the same RNG
/// state both draw the same sequence.
pub fn qmx_generate<R: Rng + ?Sized>(width: u8, start: u32, t: u32, rng: &mut R) -> Result<OpaquePredicate, OpGenError> {
    qmx_generate_with(width, start, DelayTarget::Exact(t), rng)
}

pub fn qmx_generate_with<R: Rng + ?Sized>(
    width: u8,
    start: u32,
    delay: DelayTarget,
    rng: &mut R,
) -> Result<OpaquePredicate, OpGenError> {
    check_width(width)?;
    let t = delay.resolve(width, rng)?;
    let seq = gen_sequence(width, t, start, rng)?;
    predicate_from_sequence(&seq, Generator::Qmx)
}

/// Synthesizes `f` with `f(x_i) = x_{i+1}` bit by bit. Every state outside
/// the sequence is a don't-care.
pub fn predicate_from_sequence(seq: &StateSequence, generator: Generator) -> Result<OpaquePredicate, OpGenError> {
    if generator == Generator::Rnd {
        return Err(OpGenError::InvalidArgument("RND does not synthesize from a sequence".into()));
    }
    let width = seq.width();
    let visited: HashSet<u32> = seq.states().iter().copied().collect();
    let dc: Vec<u32> = (0..1u32 << width).filter(|x| !visited.contains(x)).collect();

    let per_bit = (0..width)
        .map(|bit| {
            let on: Vec<u32> = seq
                .transitions()
                .filter(|(_, next)| next >> bit & 1 == 1)
                .map(|(x, _)| x)
                .collect();
            let cover = quine_mccluskey(&on, &dc, width)?;
            Ok(match generator {
                Generator::Qmx => xor_rewrite(&cover),
                _ => to_gate_network(&cover),
            })
        })
        .collect::<Result<Vec<GateNetwork>, OpGenError>>()?;
    let f = cse(&per_bit)?;
    let counts = count_gates(&f);
    let system = TransitionSystem::new(width, f, seq.start())?;

    let (z, t) = system
        .simulate_until_stable(None)
        .fixpoint()
        .expect("synthesized network follows its sequence into the fixpoint");
    debug_assert_eq!((z, t), (seq.stable_state(), seq.delay()));

    Ok(OpaquePredicate {
        system,
        stable_state: z,
        delay: t,
        generator,
        counts,
        sequence: Some(seq.clone()),
        rnd_bits: None,
        attempts: 1,
    })
}
