use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of stored amplitudes.
pub const DEFAULT_DIM_CAP: usize = 1 << 20;

/// Which party holds a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Alice,
    Bob,
    /// Held by neither player; used for query-model registers.
    Shared,
}

impl Owner {
    pub fn other(self) -> Owner {
        match self {
            Owner::Alice => Owner::Bob,
            Owner::Bob => Owner::Alice,
            Owner::Shared => Owner::Shared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
    pub owner: Owner,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize, owner: Owner) -> Self {
        Register {
            name: name.into(),
            dim,
            owner,
        }
    }
}

/// An ordered list of named qudit registers.
///
/// Basis indices are mixed-radix with the first register most significant.
/// A register may be *pinned* to a single classical value: it then occupies
/// one slot of the amplitude vector and every gate touching it must leave the
/// value unchanged.
///
/// A *declared* layout may exceed its cap; the cap is then checked only when
/// a state is allocated, typically after pinning inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    pins: Vec<Option<usize>>,
    strides: Vec<usize>,
    total: usize,
    cap: usize,
    deferred: bool,
}

impl RegisterLayout {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        Self::with_cap(registers, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(registers: Vec<Register>, cap: usize) -> Result<Self> {
        let pins = vec![None; registers.len()];
        Self::build(registers, pins, cap, false)
    }

    /// Like [`RegisterLayout::with_cap`], but the cap is checked at allocation.
    pub fn declared(registers: Vec<Register>, cap: usize) -> Result<Self> {
        let pins = vec![None; registers.len()];
        Self::build(registers, pins, cap, true)
    }

    fn build(registers: Vec<Register>, pins: Vec<Option<usize>>, cap: usize, deferred: bool) -> Result<Self> {
        for (i, r) in registers.iter().enumerate() {
            if r.dim < 2 {
                return Err(Error::BadRegisterDim {
                    name: r.name.clone(),
                    dim: r.dim,
                });
            }
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::DuplicateRegister(r.name.clone()));
            }
        }
        let mut total: u128 = 1;
        for (r, p) in registers.iter().zip(&pins) {
            if p.is_none() {
                total = total.saturating_mul(r.dim as u128);
            }
        }
        let limit = if deferred { usize::MAX } else { cap };
        if total > limit as u128 {
            return Err(Error::CapExceeded { dim: total, cap });
        }
        let mut strides = vec![0; registers.len()];
        let mut acc = 1usize;
        for i in (0..registers.len()).rev() {
            strides[i] = acc;
            if pins[i].is_none() {
                acc *= registers[i].dim;
            }
        }
        Ok(RegisterLayout {
            registers,
            pins,
            strides,
            total: total as usize,
            cap,
            deferred,
        })
    }

    /// Fails if a state on this layout would store more than `cap` amplitudes.
    pub fn check_cap(&self) -> Result<()> {
        if self.total > self.cap {
            return Err(Error::CapExceeded {
                dim: self.total as u128,
                cap: self.cap,
            });
        }
        Ok(())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of stored amplitudes (pinned registers count as dimension 1).
    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Product of all declared register dimensions.
    pub fn full_dim(&self) -> u128 {
        self.registers
            .iter()
            .fold(1u128, |acc, r| acc.saturating_mul(r.dim as u128))
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        Ok(&self.registers[self.position(name)?])
    }

    pub fn dim(&self, name: &str) -> Result<usize> {
        Ok(self.register(name)?.dim)
    }

    pub fn owner(&self, name: &str) -> Result<Owner> {
        Ok(self.register(name)?.owner)
    }

    pub(crate) fn eff_dim(&self, pos: usize) -> usize {
        if self.pins[pos].is_some() {
            1
        } else {
            self.registers[pos].dim
        }
    }

    pub(crate) fn pin_at(&self, pos: usize) -> Option<usize> {
        self.pins[pos]
    }

    pub fn pinned(&self, name: &str) -> Result<Option<usize>> {
        Ok(self.pins[self.position(name)?])
    }

    /// Returns a copy of this layout with `name` fixed to the basis value `value`.
    pub fn pin(&self, name: &str, value: usize) -> Result<Self> {
        let pos = self.position(name)?;
        let dim = self.registers[pos].dim;
        if value >= dim {
            return Err(Error::ValueOutOfRange {
                name: name.to_string(),
                value,
                dim,
            });
        }
        let mut pins = self.pins.clone();
        pins[pos] = Some(value);
        Self::build(self.registers.clone(), pins, self.cap, self.deferred)
    }

    /// Value held by register `pos` at amplitude index `idx`.
    pub(crate) fn value_at(&self, idx: usize, pos: usize) -> usize {
        match self.pins[pos] {
            Some(v) => v,
            None => (idx / self.strides[pos]) % self.registers[pos].dim,
        }
    }

    /// Amplitude index of the basis state holding `values` (one per register).
    pub fn index_of(&self, values: &[usize]) -> Result<usize> {
        if values.len() != self.registers.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} register values, got {}",
                self.registers.len(),
                values.len()
            )));
        }
        let mut idx = 0;
        for (pos, (&v, r)) in values.iter().zip(&self.registers).enumerate() {
            if v >= r.dim {
                return Err(Error::ValueOutOfRange {
                    name: r.name.clone(),
                    value: v,
                    dim: r.dim,
                });
            }
            match self.pins[pos] {
                Some(p) if p != v => return Err(Error::PinnedRegisterModified(r.name.clone())),
                Some(_) => {}
                None => idx += v * self.strides[pos],
            }
        }
        Ok(idx)
    }

    /// Register values of amplitude index `idx`.
    pub fn values_of(&self, idx: usize) -> Vec<usize> {
        (0..self.registers.len())
            .map(|pos| self.value_at(idx, pos))
            .collect()
    }

    /// Appends registers, keeping the cap.
    pub fn extended(&self, extra: Vec<Register>) -> Result<Self> {
        let mut regs = self.registers.clone();
        let mut pins = self.pins.clone();
        pins.extend(std::iter::repeat_n(None, extra.len()));
        regs.extend(extra);
        Self::build(regs, pins, self.cap, self.deferred)
    }

    pub fn with_cap_of(&self, cap: usize) -> Result<Self> {
        Self::build(self.registers.clone(), self.pins.clone(), cap, self.deferred)
    }

    /// Same register names, dimensions and pins, in the same order.
    pub fn same_space(&self, other: &RegisterLayout) -> bool {
        self.registers.len() == other.registers.len()
            && self
                .registers
                .iter()
                .zip(&other.registers)
                .all(|(a, b)| a.name == b.name && a.dim == b.dim)
            && self.pins == other.pins
    }

    /// Effective offsets of every joint value of the listed registers,
    /// enumerated mixed-radix over their effective dimensions.
    pub(crate) fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let mut offs = vec![0usize];
        for &p in positions {
            let d = self.eff_dim(p);
            let s = self.strides[p];
            let mut next = Vec::with_capacity(offs.len() * d);
            for &o in &offs {
                for v in 0..d {
                    next.push(o + v * s);
                }
            }
            offs = next;
        }
        offs
    }

    /// Offsets of every basis index whose digits on `positions` are zero.
    pub(crate) fn complement_offsets(&self, positions: &[usize]) -> Vec<usize> {
        let rest: Vec<usize> = (0..self.registers.len())
            .filter(|p| !positions.contains(p))
            .collect();
        self.offsets(&rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> RegisterLayout {
        RegisterLayout::new(vec![
            Register::new("a", 2, Owner::Alice),
            Register::new("b", 3, Owner::Bob),
            Register::new("c", 2, Owner::Shared),
        ])
        .unwrap()
    }

    #[test]
    fn strides_are_big_endian() {
        let l = layout();
        assert_eq!(l.total_dim(), 12);
        assert_eq!(l.index_of(&[1, 2, 1]).unwrap(), 11);
        assert_eq!(l.values_of(7), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_duplicates_and_small_dims() {
        let dup = RegisterLayout::new(vec![
            Register::new("a", 2, Owner::Alice),
            Register::new("a", 2, Owner::Bob),
        ]);
        assert!(matches!(dup, Err(Error::DuplicateRegister(_))));
        let small = RegisterLayout::new(vec![Register::new("a", 1, Owner::Alice)]);
        assert!(matches!(small, Err(Error::BadRegisterDim { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let regs = vec![
            Register::new("a", 1024, Owner::Alice),
            Register::new("b", 1024, Owner::Bob),
            Register::new("c", 2, Owner::Bob),
        ];
        assert!(matches!(
            RegisterLayout::new(regs.clone()),
            Err(Error::CapExceeded { .. })
        ));
        let l = RegisterLayout::with_cap(regs.clone(), 1 << 21).unwrap();
        assert_eq!(l.total_dim(), 1 << 21);
        let d = RegisterLayout::declared(regs, 1 << 20).unwrap();
        assert!(d.check_cap().is_err());
        assert!(d.pin("a", 3).unwrap().check_cap().is_ok());
    }

    #[test]
    fn pinning_shrinks_storage() {
        let l = layout().pin("b", 2).unwrap();
        assert_eq!(l.total_dim(), 4);
        assert_eq!(l.index_of(&[1, 2, 1]).unwrap(), 3);
        assert!(l.index_of(&[1, 1, 1]).is_err());
        assert_eq!(l.values_of(3), vec![1, 2, 1]);
        assert!(!l.same_space(&layout()));
    }
}
