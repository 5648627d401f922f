use std::fmt;

use super::{check_width, BoolFnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    Positive,
    Negative,
    Absent,
}

/// A product term over `width` variables.
///
/// `care` has a 1 for every variable that appears in the product; `value`
/// holds the required polarity of those variables and is 0 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Implicant {
    width: u8,
    care: u32,
    value: u32,
}

impl Implicant {
    pub(crate) fn from_raw(width: u8, care: u32, value: u32) -> Self {
        debug_assert_eq!(value & !care, 0);
        Self { width, care, value }
    }

    pub fn minterm(width: u8, minterm: u32) -> Self {
        let care = mask(width);
        Self { width, care, value: minterm & care }
    }

    /// The constant-1 product.
    pub fn universal(width: u8) -> Self {
        Self { width, care: 0, value: 0 }
    }

    /// `literals[i]` is the literal for state bit `i`.
    pub fn from_literals(literals: &[Literal]) -> Result<Self, BoolFnError> {
        let width = u8::try_from(literals.len()).map_err(|_| BoolFnError::WidthOutOfRange(u8::MAX))?;
        check_width(width)?;
        let (mut care, mut value) = (0, 0);
        for (i, lit) in literals.iter().enumerate() {
            match lit {
                Literal::Positive => {
                    care |= 1 << i;
                    value |= 1 << i;
                }
                Literal::Negative => care |= 1 << i,
                Literal::Absent => {}
            }
        }
        Ok(Self { width, care, value })
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn care_mask(&self) -> u32 {
        self.care
    }

    pub fn value_bits(&self) -> u32 {
        self.value
    }

    pub fn literal(&self, bit: u8) -> Literal {
        if self.care >> bit & 1 == 0 {
            Literal::Absent
        } else if self.value >> bit & 1 == 1 {
            Literal::Positive
        } else {
            Literal::Negative
        }
    }

    pub fn literals(&self) -> Vec<Literal> {
        (0..self.width).map(|b| self.literal(b)).collect()
    }

    pub fn covers(&self, minterm: u32) -> bool {
        minterm & self.care == self.value
    }

    pub fn literal_count(&self) -> u32 {
        self.care.count_ones()
    }

    pub fn is_universal(&self) -> bool {
        self.care == 0
    }

    /// Iterates the covered minterms in ascending order.
    pub fn minterms(&self) -> impl Iterator<Item = u32> + '_ {
        (0..1u32 << self.width).filter(move |m| self.covers(*m))
    }
}

impl fmt::Display for Implicant {
    /// Highest bit first, `-` for an absent variable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in (0..self.width).rev() {
            let c = match self.literal(b) {
                Literal::Positive => '1',
                Literal::Negative => '0',
                Literal::Absent => '-',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub(crate) fn mask(width: u8) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1u32 << width) - 1
    }
}

/// A sum of products. An empty cover is the constant 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cover {
    width: u8,
    implicants: Vec<Implicant>,
}

impl Cover {
    pub fn new(width: u8, implicants: Vec<Implicant>) -> Result<Self, BoolFnError> {
        check_width(width)?;
        if let Some(bad) = implicants.iter().find(|i| i.width != width) {
            return Err(BoolFnError::WidthMismatch { expected: width as usize, got: bad.width as usize });
        }
        Ok(Self { width, implicants })
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn implicants(&self) -> &[Implicant] {
        &self.implicants
    }

    pub fn len(&self) -> usize {
        self.implicants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.implicants.is_empty()
    }

    pub fn evaluate(&self, minterm: u32) -> bool {
        self.implicants.iter().any(|i| i.covers(minterm))
    }

    pub fn literal_count(&self) -> u32 {
        self.implicants.iter().map(Implicant::literal_count).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_roundtrip() {
        let lits = [Literal::Positive, Literal::Absent, Literal::Negative];
        let imp = Implicant::from_literals(&lits).unwrap();
        assert_eq!(imp.literals(), lits);
        assert_eq!(imp.to_string(), "0-1");
        assert_eq!(imp.minterms().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn universal_covers_everything() {
        let u = Implicant::universal(3);
        assert!((0..8).all(|m| u.covers(m)));
        assert!(u.is_universal());
        assert_eq!(u.literal_count(), 0);
    }

    #[test]
    fn empty_cover_is_zero() {
        let c = Cover::new(2, vec![]).unwrap();
        assert!((0..4).all(|m| !c.evaluate(m)));
    }

    #[test]
    fn mixed_width_cover_rejected() {
        let err = Cover::new(3, vec![Implicant::universal(2)]).unwrap_err();
        assert!(matches!(err, BoolFnError::WidthMismatch { .. }));
    }
}
