//! Pairwise XOR extraction on a sum of products.
//!
//! Two products over the same variables that disagree in exactly two
//! polarities collapse into one product with an XOR (or XNOR) factor:
//! `P·a·!b + P·!a·b = P·(a^b)` and `P·a·b + P·!a·!b = P·!(a^b)`.
//! XOR factors are variables in their own right, so the rewrite repeats
//! until no pair qualifies.

use std::collections::{BTreeMap, HashMap};

use super::network::dnf_signal;
use super::{Cover, GateKind, GateNetwork, Literal, NetworkBuilder, Signal};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Factor {
    Input(u16),
    Xor(Box<Factor>, Box<Factor>),
}

/// factor → polarity (true = uncomplemented)
type Term = BTreeMap<Factor, bool>;

/// Rewrites `cover` with XOR gates where the pairwise pattern applies and
/// returns the realized single-output network. Without any qualifying pair
/// the result equals [`super::to_gate_network`].
pub fn xor_rewrite(cover: &Cover) -> GateNetwork {
    let mut b = NetworkBuilder::new(cover.width() as u16);
    let out = xor_signal(&mut b, cover);
    b.finish(vec![out])
}

fn xor_signal(b: &mut NetworkBuilder, cover: &Cover) -> Signal {
    if cover.is_empty() || cover.implicants().iter().any(|i| i.is_universal()) {
        return dnf_signal(b, cover);
    }
    let mut terms: Vec<Term> = cover
        .implicants()
        .iter()
        .map(|imp| {
            (0..cover.width())
                .filter_map(|bit| match imp.literal(bit) {
                    Literal::Absent => None,
                    Literal::Positive => Some((Factor::Input(bit as u16), true)),
                    Literal::Negative => Some((Factor::Input(bit as u16), false)),
                })
                .collect()
        })
        .collect();

    while let Some((i, j, merged)) = first_mergeable(&terms) {
        terms[i] = merged;
        terms.remove(j);
    }

    let mut cache: HashMap<Factor, Signal> = HashMap::new();
    let mut complements: HashMap<Factor, Signal> = HashMap::new();
    let products: Vec<Signal> = terms
        .iter()
        .map(|term| {
            let lits: Vec<Signal> = term
                .iter()
                .map(|(factor, &positive)| {
                    let s = build(b, factor, &mut cache);
                    match (factor, positive) {
                        (_, true) => s,
                        (Factor::Input(i), false) => b.literal(*i, false),
                        (Factor::Xor(..), false) => *complements.entry(factor.clone()).or_insert_with(|| b.not(s)),
                    }
                })
                .collect();
            b.chain(GateKind::And, &lits).unwrap_or(Signal::Const(true))
        })
        .collect();
    b.chain(GateKind::Or, &products).unwrap_or(Signal::Const(false))
}

fn build(b: &mut NetworkBuilder, factor: &Factor, cache: &mut HashMap<Factor, Signal>) -> Signal {
    match factor {
        Factor::Input(i) => Signal::Input(*i),
        Factor::Xor(l, r) => {
            if let Some(&s) = cache.get(factor) {
                return s;
            }
            let (ls, rs) = (build(b, l, cache), build(b, r, cache));
            let s = b.chain(GateKind::Xor, &[ls, rs]).expect("two operands");
            cache.insert(factor.clone(), s);
            s
        }
    }
}

/// Lowest (i, j) pair that qualifies, together with the merged term.
fn first_mergeable(terms: &[Term]) -> Option<(usize, usize, Term)> {
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            if let Some(m) = merge(&terms[i], &terms[j]) {
                return Some((i, j, m));
            }
        }
    }
    None
}

fn merge(a: &Term, b: &Term) -> Option<Term> {
    if a.len() != b.len() || !a.keys().eq(b.keys()) {
        return None;
    }
    let diff: Vec<(&Factor, bool, bool)> = a
        .iter()
        .zip(b.values())
        .filter(|((_, pa), pb)| *pa != *pb)
        .map(|((f, pa), pb)| (f, *pa, *pb))
        .collect();
    let [(u, pu, _), (v, pv, _)] = diff.as_slice() else {
        return None;
    };
    let mut merged = a.clone();
    merged.remove(*u);
    merged.remove(*v);
    // ℓu·ℓv + !ℓu·!ℓv = !(u^v) ^ (pu^pv)
    let (lo, hi) = if u <= v { (*u, *v) } else { (*v, *u) };
    merged.insert(Factor::Xor(Box::new(lo.clone()), Box::new(hi.clone())), pu != pv);
    Some(merged)
}
