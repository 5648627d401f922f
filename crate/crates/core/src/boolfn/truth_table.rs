use std::collections::BTreeSet;

use super::{check_width, quine_mccluskey, BoolFnError, Cover};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TruthValue {
    Zero,
    One,
    DontCare,
}

/// Single-output truth table over `num_inputs` bits, indexed by minterm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    num_inputs: u8,
    entries: Vec<TruthValue>,
}

impl TruthTable {
    pub fn new(num_inputs: u8, entries: Vec<TruthValue>) -> Result<Self, BoolFnError> {
        check_width(num_inputs)?;
        let expected = 1usize << num_inputs;
        if entries.len() != expected {
            return Err(BoolFnError::LengthMismatch { expected, got: entries.len() });
        }
        Ok(Self { num_inputs, entries })
    }

    /// Builds a table from its on-set and don't-care set; every other minterm is 0.
    pub fn from_sets(num_inputs: u8, on_set: &[u32], dc_set: &[u32]) -> Result<Self, BoolFnError> {
        check_width(num_inputs)?;
        let size = 1u32 << num_inputs;
        let mut entries = vec![TruthValue::Zero; size as usize];
        for &m in on_set {
            if m >= size {
                return Err(BoolFnError::MintermOutOfRange { minterm: m, width: num_inputs });
            }
            entries[m as usize] = TruthValue::One;
        }
        for &m in dc_set {
            if m >= size {
                return Err(BoolFnError::MintermOutOfRange { minterm: m, width: num_inputs });
            }
            if entries[m as usize] == TruthValue::One {
                return Err(BoolFnError::Overlap(m));
            }
            entries[m as usize] = TruthValue::DontCare;
        }
        Ok(Self { num_inputs, entries })
    }

    pub fn num_inputs(&self) -> u8 {
        self.num_inputs
    }

    pub fn entries(&self) -> &[TruthValue] {
        &self.entries
    }

    pub fn get(&self, minterm: u32) -> TruthValue {
        self.entries[minterm as usize]
    }

    pub fn on_set(&self) -> BTreeSet<u32> {
        self.minterms_with(TruthValue::One)
    }

    pub fn dc_set(&self) -> BTreeSet<u32> {
        self.minterms_with(TruthValue::DontCare)
    }

    fn minterms_with(&self, value: TruthValue) -> BTreeSet<u32> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == value)
            .map(|(m, _)| m as u32)
            .collect()
    }

    pub fn minimize(&self) -> Result<Cover, BoolFnError> {
        let on: Vec<u32> = self.on_set().into_iter().collect();
        let dc: Vec<u32> = self.dc_set().into_iter().collect();
        quine_mccluskey(&on, &dc, self.num_inputs)
    }

    /// True when `cover` agrees with every specified (non don't-care) entry.
    pub fn is_implemented_by(&self, cover: &Cover) -> bool {
        self.entries.iter().enumerate().all(|(m, v)| match v {
            TruthValue::DontCare => true,
            TruthValue::One => cover.evaluate(m as u32),
            TruthValue::Zero => !cover.evaluate(m as u32),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_must_be_power_of_width() {
        let err = TruthTable::new(2, vec![TruthValue::Zero; 3]).unwrap_err();
        assert_eq!(err, BoolFnError::LengthMismatch { expected: 4, got: 3 });
    }

    #[test]
    fn zero_width_rejected() {
        assert_eq!(TruthTable::new(0, vec![TruthValue::One]).unwrap_err(), BoolFnError::WidthOutOfRange(0));
        assert!(TruthTable::from_sets(17, &[], &[]).is_err());
    }

    #[test]
    fn overlapping_sets_rejected() {
        assert_eq!(TruthTable::from_sets(3, &[1, 2], &[2]).unwrap_err(), BoolFnError::Overlap(2));
    }

    #[test]
    fn out_of_range_minterm() {
        assert!(matches!(
            TruthTable::from_sets(2, &[4], &[]),
            Err(BoolFnError::MintermOutOfRange { minterm: 4, width: 2 })
        ));
    }

    #[test]
    fn sets_round_trip() {
        let t = TruthTable::from_sets(3, &[5, 7], &[0]).unwrap();
        assert_eq!(t.on_set().into_iter().collect::<Vec<_>>(), vec![5, 7]);
        assert_eq!(t.dc_set().into_iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(t.get(1), TruthValue::Zero);
    }
}
