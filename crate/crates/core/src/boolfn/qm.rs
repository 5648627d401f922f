//! Quine-McCluskey prime generation and cover selection.

use std::collections::HashSet;

use super::cube::mask;
use super::{BoolFnError, Cover, Implicant, TruthTable};

/// Widths up to this use an exact minimum cover; wider tables fall back to greedy.
const EXACT_COVER_MAX_WIDTH: u8 = 8;

/// Minimizes the function that is 1 on `on_set`, free on `dc_set` and 0 elsewhere.
///
/// The cover consists of prime implicants and has the fewest products
/// possible (fewest literals among those) for widths up to 8. Ties go to the
/// lowest prime in (literal count, value, care) order.
pub fn quine_mccluskey(on_set: &[u32], dc_set: &[u32], width: u8) -> Result<Cover, BoolFnError> {
    // validates width, ranges and disjointness
    let table = TruthTable::from_sets(width, on_set, dc_set)?;
    let on: Vec<u32> = table.on_set().into_iter().collect();
    if on.is_empty() {
        return Cover::new(width, Vec::new());
    }
    let mut seeds = on.clone();
    seeds.extend(table.dc_set());

    let mut primes: Vec<Implicant> = prime_implicants(width, &seeds)
        .into_iter()
        .filter(|p| on.iter().any(|&m| p.covers(m)))
        .collect();
    if let Some(u) = primes.iter().find(|p| p.is_universal()) {
        return Cover::new(width, vec![*u]);
    }
    primes.sort_by_key(|p| (p.literal_count(), p.value_bits(), p.care_mask()));

    let chart = Chart::new(&primes, &on);
    let chosen = if width <= EXACT_COVER_MAX_WIDTH {
        chart.exact_cover()
    } else {
        chart.greedy_cover()
    };
    Cover::new(width, chosen.into_iter().map(|i| primes[i]).collect())
}

/// All prime implicants of the function whose on-set is `minterms`.
pub(crate) fn prime_implicants(width: u8, minterms: &[u32]) -> Vec<Implicant> {
    let full = mask(width);
    let mut current: HashSet<(u32, u32)> = minterms.iter().map(|&m| (full, m)).collect();
    let mut primes = Vec::new();
    while !current.is_empty() {
        let mut next = HashSet::new();
        let mut merged = HashSet::new();
        for &(care, value) in &current {
            let mut free = care & !value;
            while free != 0 {
                let bit = free & free.wrapping_neg();
                free ^= bit;
                if current.contains(&(care, value | bit)) {
                    next.insert((care & !bit, value));
                    merged.insert((care, value));
                    merged.insert((care, value | bit));
                }
            }
        }
        primes.extend(
            current
                .difference(&merged)
                .map(|&(care, value)| Implicant::from_raw(width, care, value)),
        );
        current = next;
    }
    primes.sort();
    primes
}

#[derive(Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(len: usize) -> Self {
        Self(vec![0; len.div_ceil(64)])
    }

    fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn remove_all(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn intersection_len(&self, other: &BitSet) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }
}

/// Prime implicant chart: rows are on-set minterms, columns are primes.
struct Chart {
    prime_rows: Vec<BitSet>,
    row_primes: Vec<Vec<usize>>,
    literals: Vec<u32>,
    rows: usize,
}

impl Chart {
    fn new(primes: &[Implicant], on: &[u32]) -> Self {
        let rows = on.len();
        let mut prime_rows = vec![BitSet::new(rows); primes.len()];
        let mut row_primes = vec![Vec::new(); rows];
        for (p, prime) in primes.iter().enumerate() {
            for (r, &m) in on.iter().enumerate() {
                if prime.covers(m) {
                    prime_rows[p].insert(r);
                    row_primes[r].push(p);
                }
            }
        }
        let literals = primes.iter().map(Implicant::literal_count).collect();
        Self { prime_rows, row_primes, literals, rows }
    }

    fn essentials(&self) -> (Vec<usize>, BitSet) {
        let mut chosen: Vec<usize> = self
            .row_primes
            .iter()
            .filter(|ps| ps.len() == 1)
            .map(|ps| ps[0])
            .collect();
        chosen.sort_unstable();
        chosen.dedup();
        let mut uncovered = BitSet::full(self.rows);
        for &p in &chosen {
            uncovered.remove_all(&self.prime_rows[p]);
        }
        (chosen, uncovered)
    }

    fn greedy_cover(&self) -> Vec<usize> {
        let (mut chosen, mut uncovered) = self.essentials();
        while !uncovered.is_empty() {
            let best = (0..self.prime_rows.len())
                .max_by_key(|&p| (self.prime_rows[p].intersection_len(&uncovered), std::cmp::Reverse(p)))
                .expect("every on-set minterm lies in some prime");
            uncovered.remove_all(&self.prime_rows[best]);
            chosen.push(best);
        }
        chosen.sort_unstable();
        chosen
    }

    fn exact_cover(&self) -> Vec<usize> {
        let (mut chosen, uncovered) = self.essentials();
        let base_literals = chosen.iter().map(|&p| self.literals[p]).sum();
        let mut search = Search { chart: self, best: None };
        let mut picked = Vec::new();
        search.descend(&uncovered, &mut picked, base_literals);
        let (_, _, extra) = search.best.expect("a cover always exists");
        chosen.extend(extra);
        chosen.sort_unstable();
        chosen
    }
}

struct Search<'a> {
    chart: &'a Chart,
    /// (product count, literal count, picked primes)
    best: Option<(usize, u32, Vec<usize>)>,
}

impl Search<'_> {
    fn descend(&mut self, uncovered: &BitSet, picked: &mut Vec<usize>, literals: u32) {
        if uncovered.is_empty() {
            let better = match &self.best {
                None => true,
                Some((count, lits, _)) => (picked.len(), literals) < (*count, *lits),
            };
            if better {
                self.best = Some((picked.len(), literals, picked.clone()));
            }
            return;
        }
        let bound = self.independent_rows(uncovered);
        if let Some((count, lits, _)) = &self.best {
            // every further prime adds at least one product and one literal
            if (picked.len() + bound, literals + bound as u32) >= (*count, *lits) {
                return;
            }
        }
        let row = uncovered
            .iter()
            .min_by_key(|&r| (self.chart.row_primes[r].len(), r))
            .expect("nonempty");
        for &p in &self.chart.row_primes[row] {
            let mut rest = uncovered.clone();
            rest.remove_all(&self.chart.prime_rows[p]);
            picked.push(p);
            self.descend(&rest, picked, literals + self.chart.literals[p]);
            picked.pop();
        }
    }

    /// Size of a set of uncovered rows no two of which share a prime.
    fn independent_rows(&self, uncovered: &BitSet) -> usize {
        let mut blocked = vec![false; self.chart.prime_rows.len()];
        let mut count = 0;
        for r in uncovered.iter() {
            let primes = &self.chart.row_primes[r];
            if primes.iter().all(|&p| !blocked[p]) {
                count += 1;
                for &p in primes {
                    blocked[p] = true;
                }
            }
        }
        count
    }
}
