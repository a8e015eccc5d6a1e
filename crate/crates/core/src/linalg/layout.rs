use serde::{Deserialize, Serialize};

use crate::error::{PctcError, Result};

/// A named block of qubits inside a [`RegisterLayout`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub width: usize,
}

/// Ordered list of named qubit registers.
///
/// The first register occupies the most significant bits of a basis index,
/// and within a register earlier qubits are more significant. Every tensor
/// index in the crate follows this convention.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new<I, S>(registers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Register> = Vec::new();
        for (name, width) in registers {
            let name = name.into();
            if width == 0 {
                return Err(PctcError::Layout(format!("register {name:?} has width 0")));
            }
            if out.iter().any(|r| r.name == name) {
                return Err(PctcError::Layout(format!("duplicate register {name:?}")));
            }
            out.push(Register { name, width });
        }
        Ok(Self { registers: out })
    }

    pub fn single(name: &str, width: usize) -> Result<Self> {
        Self::new([(name, width)])
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn total_qubits(&self) -> usize {
        self.registers.iter().map(|r| r.width).sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_qubits()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| PctcError::Layout(format!("unknown register {name:?}")))
    }

    pub fn width(&self, name: &str) -> Result<usize> {
        Ok(self.registers[self.position(name)?].width)
    }

    /// Bit offset of a register's least significant qubit.
    pub fn shift(&self, name: &str) -> Result<usize> {
        let pos = self.position(name)?;
        Ok(self.registers[pos + 1..].iter().map(|r| r.width).sum())
    }

    /// Value held by register `name` in basis state `index`.
    pub fn extract(&self, index: usize, name: &str) -> Result<usize> {
        let shift = self.shift(name)?;
        let width = self.width(name)?;
        Ok((index >> shift) & ((1 << width) - 1))
    }

    /// Basis index with the given register values (missing registers are 0).
    pub fn compose(&self, values: &[(&str, usize)]) -> Result<usize> {
        let mut index = 0usize;
        for &(name, value) in values {
            let width = self.width(name)?;
            if value >> width != 0 {
                return Err(PctcError::Layout(format!(
                    "value {value} does not fit register {name:?} of width {width}"
                )));
            }
            index |= value << self.shift(name)?;
        }
        Ok(index)
    }

    pub fn without(&self, name: &str) -> Result<Self> {
        self.position(name)?;
        Ok(Self {
            registers: self.registers.iter().filter(|r| r.name != name).cloned().collect(),
        })
    }

    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        Self::new(
            self.registers
                .iter()
                .chain(other.registers.iter())
                .map(|r| (r.name.clone(), r.width)),
        )
    }

    /// Layout with the same registers listed in `order`, plus the map taking
    /// each old basis index to its new position.
    pub fn permutation(&self, order: &[&str]) -> Result<(Self, Vec<usize>)> {
        if order.len() != self.registers.len() {
            return Err(PctcError::Layout(format!(
                "order {order:?} is not a permutation of {:?}",
                self.names().collect::<Vec<_>>()
            )));
        }
        let mut regs = Vec::with_capacity(order.len());
        for name in order {
            let pos = self.position(name)?;
            if regs.iter().any(|r: &Register| r.name == *name) {
                return Err(PctcError::Layout(format!("register {name:?} repeated in order")));
            }
            regs.push(self.registers[pos].clone());
        }
        let permuted = Self { registers: regs };

        let old_shifts: Vec<usize> = order.iter().map(|n| self.shift(n)).collect::<Result<_>>()?;
        let new_shifts: Vec<usize> =
            order.iter().map(|n| permuted.shift(n)).collect::<Result<_>>()?;
        let widths: Vec<usize> = permuted.registers.iter().map(|r| r.width).collect();
        let map = (0..self.dim())
            .map(|old| {
                let mut new = 0usize;
                for k in 0..order.len() {
                    let v = (old >> old_shifts[k]) & ((1 << widths[k]) - 1);
                    new |= v << new_shifts[k];
                }
                new
            })
            .collect();
        Ok((permuted, map))
    }

    /// Splits a basis index into (index with `name` removed, value of `name`).
    pub(crate) fn split_out(&self, index: usize, name: &str) -> Result<(usize, usize)> {
        let shift = self.shift(name)?;
        let width = self.width(name)?;
        let low = index & ((1 << shift) - 1);
        let value = (index >> shift) & ((1 << width) - 1);
        let high = index >> (shift + width);
        Ok(((high << shift) | low, value))
    }
}

/// Inserts `value` (of `width` bits) at bit offset `shift` of a reduced index.
pub(crate) fn insert_bits(reduced: usize, value: usize, shift: usize, width: usize) -> usize {
    let low = reduced & ((1 << shift) - 1);
    let high = reduced >> shift;
    (high << (shift + width)) | (value << shift) | low
}

/// Number of qubits needed to hold `n` distinct values (at least one).
pub fn qubits_for(n: usize) -> usize {
    let mut q = 1;
    while (1usize << q) < n {
        q += 1;
    }
    q
}

impl Serialize for RegisterLayout {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(&str, usize)> =
            self.registers.iter().map(|r| (r.name.as_str(), r.width)).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RegisterLayout {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(String, usize)> = Vec::deserialize(d)?;
        RegisterLayout::new(pairs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_register_is_most_significant() {
        let l = RegisterLayout::new([("A", 1), ("B", 2)]).unwrap();
        assert_eq!(l.dim(), 8);
        assert_eq!(l.shift("A").unwrap(), 2);
        assert_eq!(l.compose(&[("A", 1), ("B", 2)]).unwrap(), 0b110);
        assert_eq!(l.extract(0b110, "B").unwrap(), 2);
    }

    #[test]
    fn rejects_duplicates_and_zero_width() {
        assert!(RegisterLayout::new([("A", 1), ("A", 1)]).is_err());
        assert!(RegisterLayout::new([("A", 0)]).is_err());
    }

    #[test]
    fn permutation_rejects_non_permutations() {
        let l = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        assert!(l.permutation(&["A"]).is_err());
        assert!(l.permutation(&["A", "A"]).is_err());
        assert!(l.permutation(&["A", "C"]).is_err());
    }

    #[test]
    fn split_and_insert_round_trip() {
        let l = RegisterLayout::new([("A", 2), ("B", 1), ("C", 2)]).unwrap();
        let shift = l.shift("B").unwrap();
        for idx in 0..l.dim() {
            let (reduced, v) = l.split_out(idx, "B").unwrap();
            assert_eq!(insert_bits(reduced, v, shift, 1), idx);
        }
    }

    #[test]
    fn qubits_for_counts() {
        assert_eq!(qubits_for(1), 1);
        assert_eq!(qubits_for(2), 1);
        assert_eq!(qubits_for(3), 2);
        assert_eq!(qubits_for(4), 2);
        assert_eq!(qubits_for(5), 3);
    }
}
