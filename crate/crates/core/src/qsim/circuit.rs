use super::{LocalUnitary, QState};
use crate::error::{Error, Result};

/// One step of a [`Circuit`].
#[derive(Debug, Clone)]
pub enum Op {
    Gate { label: String, unitary: LocalUnitary },
    /// Slot filled by whatever oracle the circuit is run against.
    Oracle { label: String, targets: Vec<String> },
}

impl Op {
    pub fn label(&self) -> &str {
        match self {
            Op::Gate { label, .. } | Op::Oracle { label, .. } => label,
        }
    }
}

/// Something that can stand in for an oracle call.
pub trait OracleSlot {
    fn apply_oracle(&mut self, state: QState, targets: &[String]) -> Result<QState>;
}

/// A gate sequence with oracle slots.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn gate(&mut self, label: impl Into<String>, unitary: LocalUnitary) -> &mut Self {
        self.ops.push(Op::Gate {
            label: label.into(),
            unitary,
        });
        self
    }

    pub fn oracle(&mut self, label: impl Into<String>, targets: &[&str]) -> &mut Self {
        self.ops.push(Op::Oracle {
            label: label.into(),
            targets: targets.iter().map(|t| t.to_string()).collect(),
        });
        self
    }

    pub fn append(&mut self, other: &Circuit) -> &mut Self {
        self.ops.extend(other.ops.iter().cloned());
        self
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn oracle_calls(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, Op::Oracle { .. }))
            .count()
    }

    /// Inverse of an oracle-free circuit.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut ops = Vec::with_capacity(self.ops.len());
        for op in self.ops.iter().rev() {
            match op {
                Op::Gate { label, unitary } => ops.push(Op::Gate {
                    label: format!("{label}^-1"),
                    unitary: unitary.adjoint(),
                }),
                Op::Oracle { label, .. } => {
                    return Err(Error::InvalidArgument(format!(
                        "cannot invert oracle slot `{label}`"
                    )))
                }
            }
        }
        Ok(Circuit { ops })
    }

    /// Runs the circuit; returns the final state and the number of oracle calls made.
    pub fn run(&self, state: QState, slot: &mut impl OracleSlot) -> Result<(QState, usize)> {
        self.run_observed(state, slot, |_, _| {})
    }

    /// Like [`Circuit::run`], calling `observe(label, state)` after every op.
    pub fn run_observed(
        &self,
        mut state: QState,
        slot: &mut impl OracleSlot,
        mut observe: impl FnMut(&str, &QState),
    ) -> Result<(QState, usize)> {
        let mut calls = 0;
        for op in &self.ops {
            state = match op {
                Op::Gate { unitary, .. } => state.apply(unitary)?,
                Op::Oracle { targets, .. } => {
                    calls += 1;
                    slot.apply_oracle(state, targets)?
                }
            };
            observe(op.label(), &state);
        }
        Ok((state, calls))
    }
}

/// Slot for oracle-free circuits.
pub struct NoOracle;

impl OracleSlot for NoOracle {
    fn apply_oracle(&mut self, _state: QState, _targets: &[String]) -> Result<QState> {
        Err(Error::InvalidArgument("circuit has an oracle slot but no oracle was given".into()))
    }
}
