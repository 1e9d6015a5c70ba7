//! JSON description of protocols.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CommProtocol, ProtocolKind, ProtocolParts, Round};
use crate::error::Result;
use crate::ftab::FunctionTable;
use crate::qsim::gates;
use crate::qsim::{Factor, LocalUnitary, Owner, Register, RegisterLayout};

/// A gate either by name or as sparse `(row, col, re, im)` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateSpec {
    Hadamard { target: String },
    X { target: String },
    Z { target: String },
    Cnot { control: String, target: String },
    Toffoli { controls: [String; 2], target: String },
    /// `|a⟩ -> |a + k mod dim⟩`.
    Add { target: String, k: usize },
    /// `|s⟩|d⟩ -> |s⟩|d + s mod dim(d)⟩`.
    AddInto { source: String, target: String },
    Sparse {
        targets: Vec<String>,
        entries: Vec<(usize, usize, f64, f64)>,
    },
}

impl GateSpec {
    pub fn to_unitary(&self, layout: &RegisterLayout) -> Result<LocalUnitary> {
        Ok(match self {
            GateSpec::Hadamard { target } => gates::hadamard(target),
            GateSpec::X { target } => gates::pauli_x(target),
            GateSpec::Z { target } => gates::pauli_z(target),
            GateSpec::Cnot { control, target } => gates::cnot(control, target),
            GateSpec::Toffoli { controls, target } => gates::toffoli(&controls[0], &controls[1], target),
            GateSpec::Add { target, k } => gates::adder(target, layout.dim(target)?, *k),
            GateSpec::AddInto { source, target } => {
                gates::add_into((source, layout.dim(source)?), (target, layout.dim(target)?))
            }
            GateSpec::Sparse { targets, entries } => {
                let t: Vec<(&str, usize)> = targets
                    .iter()
                    .map(|n| Ok((n.as_str(), layout.dim(n)?)))
                    .collect::<Result<_>>()?;
                let e: Vec<(usize, usize, Complex64)> = entries
                    .iter()
                    .map(|&(r, c, re, im)| (r, c, Complex64::new(re, im)))
                    .collect();
                LocalUnitary::from_entries(&t, &e)?
            }
        })
    }

    pub fn from_unitary(u: &LocalUnitary) -> Self {
        GateSpec::Sparse {
            targets: u.targets().to_vec(),
            entries: u.entries().into_iter().map(|(r, c, v)| (r, c, v.re, v.im)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SharedSpec {
    /// `(|00⟩ + |11⟩)/√2` on two qubits.
    Bell { bell: [String; 2] },
    State {
        registers: Vec<String>,
        amplitudes: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub actor: Owner,
    #[serde(default)]
    pub gates: Vec<GateSpec>,
    #[serde(default)]
    pub moves: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub name: String,
    pub registers: Vec<Register>,
    pub alice_input: String,
    #[serde(default)]
    pub bob_inputs: Vec<String>,
    pub output: String,
    #[serde(default)]
    pub shared: Vec<SharedSpec>,
    pub rounds: Vec<RoundSpec>,
    #[serde(default)]
    pub declared_error: f64,
    pub function: FunctionTable,
}

impl ProtocolSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }

    pub fn build(&self, cap: usize) -> Result<CommProtocol> {
        let layout = RegisterLayout::declared(self.registers.clone(), cap)?;
        let rounds = self
            .rounds
            .iter()
            .map(|r| {
                Ok(Round::new(
                    r.actor,
                    r.gates.iter().map(|g| g.to_unitary(&layout)).collect::<Result<_>>()?,
                    r.moves.clone(),
                ))
            })
            .collect::<Result<_>>()?;
        let shared = self
            .shared
            .iter()
            .map(|s| match s {
                SharedSpec::Bell { bell } => super::bell_factor(&bell[0], &bell[1]),
                SharedSpec::State {
                    registers,
                    amplitudes,
                } => Factor {
                    registers: registers.clone(),
                    amplitudes: amplitudes.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
                },
            })
            .collect();
        CommProtocol::new(ProtocolParts {
            name: self.name.clone(),
            layout,
            alice_input: self.alice_input.clone(),
            bob_inputs: self.bob_inputs.clone(),
            output: self.output.clone(),
            shared,
            rounds,
            declared_error: self.declared_error,
            target: Arc::new(self.function.clone()),
            kind: ProtocolKind::Plain,
        })
    }

    /// Description of `p` with every gate in sparse form.
    pub fn from_protocol(p: &CommProtocol) -> Self {
        ProtocolSpec {
            name: p.name().to_string(),
            registers: p.layout().registers().to_vec(),
            alice_input: p.alice_input().to_string(),
            bob_inputs: p.bob_inputs().to_vec(),
            output: p.output().to_string(),
            shared: p
                .shared()
                .iter()
                .map(|f| SharedSpec::State {
                    registers: f.registers.clone(),
                    amplitudes: f.amplitudes.iter().map(|a| (a.re, a.im)).collect(),
                })
                .collect(),
            rounds: p
                .rounds()
                .iter()
                .map(|r| RoundSpec {
                    actor: r.actor,
                    gates: r.gates.iter().map(GateSpec::from_unitary).collect(),
                    moves: r.moves.clone(),
                })
                .collect(),
            declared_error: p.declared_error(),
            function: (**p.target()).clone(),
        }
    }
}
