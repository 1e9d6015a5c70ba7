//! Two-party quantum communication protocols on a single global state.
//!
//! Sending a qubit is modeled by relabeling the owner of a dimension-2
//! register; the [`QubitLedger`] records how many moved in each direction.

mod build;
mod compile;
mod json;
mod noise;

pub(crate) use build::encoded_send;
pub use build::{
    bell_factor, ceil_log2, composed_protocol, local_protocol, send_input_protocol, superdense_send,
};
pub use compile::{compile_approx_clean, compile_clean, ErrorAnalysis};
pub use json::{GateSpec, ProtocolSpec};
pub use noise::{amplify, binomial_tail, inject_noise};

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ftab::FunctionTable;
use crate::qsim::{l2_distance, Factor, LocalUnitary, Owner, QState, RegisterLayout, NORM_TOL};

/// One player's turn: apply `gates` in order, then hand the `moves` qubits to the other player.
#[derive(Debug, Clone)]
pub struct Round {
    pub actor: Owner,
    pub gates: Vec<LocalUnitary>,
    pub moves: Vec<String>,
}

impl Round {
    pub fn new(actor: Owner, gates: Vec<LocalUnitary>, moves: Vec<String>) -> Self {
        Round { actor, gates, moves }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QubitLedger {
    pub a_to_b: usize,
    pub b_to_a: usize,
}

impl QubitLedger {
    pub fn total(&self) -> usize {
        self.a_to_b + self.b_to_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// Output register ends in `|a + f(x, y)⟩`, other registers arbitrary.
    Plain,
    /// Output of the clean compiler.
    Clean,
    /// Output of the approximately-clean compiler.
    ApproxClean,
    /// Output of [`amplify`].
    Amplified,
}

/// Which input registers a simulation fixes to a classical value.
///
/// Pinned registers take no room in the state vector, which keeps large
/// input alphabets within the dimension cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pinning {
    None,
    Alice,
    Inputs,
}

/// A protocol for `f: X × Y → Z`.
///
/// Alice holds `alice_input` (dim `|X|`); Bob holds `bob_inputs` (mixed-radix,
/// product `|Y|`, possibly empty when `|Y| = 1`) and `output` (dim `|Z|`).
/// Registers in `shared` start in the listed entangled state; every other
/// register starts in `|0⟩`.
#[derive(Debug, Clone)]
pub struct CommProtocol {
    name: String,
    layout: RegisterLayout,
    alice_input: String,
    bob_inputs: Vec<String>,
    output: String,
    shared: Vec<Factor>,
    rounds: Vec<Round>,
    declared_error: f64,
    target: Arc<FunctionTable>,
    kind: ProtocolKind,
}

/// Constructor arguments for [`CommProtocol::new`].
#[derive(Debug, Clone)]
pub struct ProtocolParts {
    pub name: String,
    pub layout: RegisterLayout,
    pub alice_input: String,
    pub bob_inputs: Vec<String>,
    pub output: String,
    pub shared: Vec<Factor>,
    pub rounds: Vec<Round>,
    pub declared_error: f64,
    pub target: Arc<FunctionTable>,
    pub kind: ProtocolKind,
}

impl CommProtocol {
    pub fn new(parts: ProtocolParts) -> Result<Self> {
        let p = CommProtocol {
            name: parts.name,
            layout: parts.layout,
            alice_input: parts.alice_input,
            bob_inputs: parts.bob_inputs,
            output: parts.output,
            shared: parts.shared,
            rounds: parts.rounds,
            declared_error: parts.declared_error,
            target: parts.target,
            kind: parts.kind,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let l = &self.layout;
        let t = &self.target;
        let bad = |m: String| Err(Error::InvalidProtocol(m));
        if l.owner(&self.alice_input)? != Owner::Alice || l.dim(&self.alice_input)? != t.size_x() {
            return bad(format!("`{}` must be Alice's, of dim |X| = {}", self.alice_input, t.size_x()));
        }
        let mut ydim = 1;
        for b in &self.bob_inputs {
            if l.owner(b)? != Owner::Bob {
                return bad(format!("input `{b}` must be Bob's"));
            }
            ydim *= l.dim(b)?;
        }
        if ydim != t.size_y() {
            return bad(format!("Bob's inputs span {ydim} values, |Y| = {}", t.size_y()));
        }
        if l.owner(&self.output)? != Owner::Bob || l.dim(&self.output)? != t.size_z() {
            return bad(format!("`{}` must be Bob's, of dim |Z| = {}", self.output, t.size_z()));
        }
        let io: Vec<&String> = std::iter::once(&self.alice_input)
            .chain(&self.bob_inputs)
            .chain(std::iter::once(&self.output))
            .collect();
        for f in &self.shared {
            if let Some(r) = f.registers.iter().find(|r| io.contains(r)) {
                return bad(format!("input/output register `{r}` cannot hold a shared state"));
            }
            let norm: f64 = f.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm });
            }
        }
        if !(0.0..1.0).contains(&self.declared_error) {
            return Err(Error::BadEpsilon(self.declared_error));
        }
        self.final_owners().map(|_| ())
    }

    /// Walks the rounds checking ownership; returns the owners after the last round.
    fn final_owners(&self) -> Result<HashMap<String, Owner>> {
        let mut owners: HashMap<String, Owner> = self
            .layout
            .registers()
            .iter()
            .map(|r| (r.name.clone(), r.owner))
            .collect();
        for (i, round) in self.rounds.iter().enumerate() {
            if round.actor == Owner::Shared {
                return Err(Error::InvalidProtocol(format!("round {i} has no acting player")));
            }
            for g in &round.gates {
                for t in g.targets() {
                    let owner = *owners.get(t).ok_or_else(|| Error::UnknownRegister(t.clone()))?;
                    if owner != round.actor {
                        return Err(Error::UnownedRegister {
                            round: i,
                            actor: round.actor,
                            register: t.clone(),
                            owner,
                        });
                    }
                }
            }
            for (k, m) in round.moves.iter().enumerate() {
                let reason = if round.moves[..k].contains(m) {
                    Some("moved twice in one round")
                } else if self.layout.dim(m)? != 2 {
                    Some("only qubits can be sent")
                } else if owners[m] != round.actor {
                    Some("not held by the sender")
                } else {
                    None
                };
                if let Some(reason) = reason {
                    return Err(Error::BadMove {
                        round: i,
                        register: m.clone(),
                        reason: reason.into(),
                    });
                }
                owners.insert(m.clone(), round.actor.other());
            }
        }
        Ok(owners)
    }

    pub fn owner_after(&self, register: &str) -> Result<Owner> {
        self.final_owners()?
            .get(register)
            .copied()
            .ok_or_else(|| Error::UnknownRegister(register.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn alice_input(&self) -> &str {
        &self.alice_input
    }

    pub fn bob_inputs(&self) -> &[String] {
        &self.bob_inputs
    }

    pub fn output(&self) -> &str {
        &self.output
    }

    pub fn shared(&self) -> &[Factor] {
        &self.shared
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn declared_error(&self) -> f64 {
        self.declared_error
    }

    pub fn target(&self) -> &Arc<FunctionTable> {
        &self.target
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn gates(&self) -> impl Iterator<Item = &LocalUnitary> {
        self.rounds.iter().flat_map(|r| &r.gates)
    }

    pub fn ledger(&self) -> QubitLedger {
        let mut l = QubitLedger::default();
        for r in &self.rounds {
            match r.actor {
                Owner::Alice => l.a_to_b += r.moves.len(),
                Owner::Bob => l.b_to_a += r.moves.len(),
                Owner::Shared => {}
            }
        }
        l
    }

    /// Splits a `y` index into per-register values of `bob_inputs`.
    pub fn bob_values(&self, y: usize) -> Result<Vec<(&str, usize)>> {
        if y >= self.target.size_y() {
            return Err(Error::IndexOutOfRange {
                index: y,
                size: self.target.size_y(),
            });
        }
        let mut rest = y;
        let mut out = Vec::with_capacity(self.bob_inputs.len());
        for b in self.bob_inputs.iter().rev() {
            let d = self.layout.dim(b)?;
            out.push((b.as_str(), rest % d));
            rest /= d;
        }
        out.reverse();
        Ok(out)
    }

    /// Layout with the chosen inputs pinned to `x` and `y`.
    pub fn pinned_layout(&self, x: usize, y: usize, pins: Pinning) -> Result<RegisterLayout> {
        let mut l = self.layout.clone();
        if pins != Pinning::None {
            l = l.pin(&self.alice_input, x)?;
        }
        if pins == Pinning::Inputs {
            for (b, v) in self.bob_values(y)? {
                l = l.pin(b, v)?;
            }
        }
        Ok(l)
    }

    /// `|x⟩|y⟩|φ⟩|a⟩` with every other register in `|0⟩`.
    pub fn initial_state(&self, layout: &RegisterLayout, x: usize, y: usize, a: usize) -> Result<QState> {
        if x >= self.target.size_x() {
            return Err(Error::IndexOutOfRange {
                index: x,
                size: self.target.size_x(),
            });
        }
        let mut values = vec![(self.alice_input.as_str(), x), (self.output.as_str(), a)];
        values.extend(self.bob_values(y)?);
        QState::product(layout, &self.shared, &values)
    }

    /// Applies every round's gates to `state`.
    pub fn apply_rounds(&self, state: QState) -> Result<QState> {
        state.apply_all(self.gates())
    }

    pub fn run_with(&self, x: usize, y: usize, a: usize, pins: Pinning) -> Result<QState> {
        let layout = self.pinned_layout(x, y, pins)?;
        self.apply_rounds(self.initial_state(&layout, x, y, a)?)
    }

    /// Final state on input `(x, y)` with the output register starting at `a`.
    ///
    /// Inputs are pinned when every gate leaves them unchanged.
    pub fn run(&self, x: usize, y: usize, a: usize) -> Result<QState> {
        match self.run_with(x, y, a, Pinning::Inputs) {
            Err(Error::PinnedRegisterModified(_)) => self.run_with(x, y, a, Pinning::None),
            r => r,
        }
    }

    /// `Pr[output ≠ f(x, y)]` starting from `a = 0`.
    pub fn failure(&self, x: usize, y: usize) -> Result<f64> {
        let s = self.run(x, y, 0)?;
        let d = s.measure_distribution(&[self.output.as_str()])?;
        Ok((1.0 - d.mass(self.target.get(x, y))).max(0.0))
    }

    /// Failure probability for every input, indexed `x·|Y| + y`.
    pub fn failures(&self) -> Result<Vec<f64>> {
        let ny = self.target.size_y();
        (0..self.target.size_x() * ny)
            .into_par_iter()
            .map(|i| self.failure(i / ny, i % ny))
            .collect()
    }

    pub fn worst_failure(&self) -> Result<f64> {
        Ok(self.failures()?.into_iter().fold(0.0, f64::max))
    }

    /// `‖U|x,y,φ,a⟩ - |x,y,φ,a + f(x,y)⟩‖₂`.
    pub fn clean_deviation(&self, x: usize, y: usize, a: usize) -> Result<f64> {
        let z = self.target.size_z();
        let expected_a = (a + self.target.get(x, y)) % z;
        let run = |pins| -> Result<f64> {
            let layout = self.pinned_layout(x, y, pins)?;
            let out = self.apply_rounds(self.initial_state(&layout, x, y, a)?)?;
            l2_distance(&out, &self.initial_state(&layout, x, y, expected_a)?)
        };
        match run(Pinning::Inputs) {
            Err(Error::PinnedRegisterModified(_)) => run(Pinning::None),
            r => r,
        }
    }

    /// Largest [`CommProtocol::clean_deviation`] over all basis inputs.
    pub fn max_clean_deviation(&self) -> Result<f64> {
        let (ny, nz) = (self.target.size_y(), self.target.size_z());
        let devs: Vec<f64> = (0..self.target.size_x() * ny * nz)
            .into_par_iter()
            .map(|i| self.clean_deviation(i / (ny * nz), (i / nz) % ny, i % nz))
            .collect::<Result<_>>()?;
        Ok(devs.into_iter().fold(0.0, f64::max))
    }

    /// Same protocol with a different cap on simulated state size.
    pub fn with_cap(mut self, cap: usize) -> Result<Self> {
        self.layout = self.layout.with_cap_of(cap)?;
        Ok(self)
    }

    pub(crate) fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftab::make_gt;
    use crate::qsim::gates::pauli_x;
    use crate::qsim::Register;

    fn constant_parts() -> ProtocolParts {
        let f = Arc::new(FunctionTable::new("zero", 2, 2, 2, vec![0; 4]).unwrap());
        let layout = RegisterLayout::new(vec![
            Register::new("x", 2, Owner::Alice),
            Register::new("y", 2, Owner::Bob),
            Register::new("out", 2, Owner::Bob),
            Register::new("m0", 2, Owner::Alice),
            Register::new("m1", 2, Owner::Alice),
            Register::new("m2", 2, Owner::Alice),
        ])
        .unwrap();
        ProtocolParts {
            name: "p".into(),
            layout,
            alice_input: "x".into(),
            bob_inputs: vec!["y".into()],
            output: "out".into(),
            shared: vec![],
            rounds: vec![],
            declared_error: 0.0,
            target: f,
            kind: ProtocolKind::Plain,
        }
    }

    #[test]
    fn empty_protocol_keeps_state() {
        let p = CommProtocol::new(constant_parts()).unwrap();
        let s = p.run(1, 0, 1).unwrap();
        let init = p.initial_state(s.layout(), 1, 0, 1).unwrap();
        assert!(l2_distance(&s, &init).unwrap() < 1e-15);
        assert_eq!(p.ledger(), QubitLedger::default());
        assert_eq!(p.worst_failure().unwrap(), 0.0);
    }

    #[test]
    fn moving_three_qubits() {
        let mut parts = constant_parts();
        let moves = vec!["m0".to_string(), "m1".into(), "m2".into()];
        parts.rounds = vec![Round::new(Owner::Alice, vec![], moves)];
        let p = CommProtocol::new(parts).unwrap();
        assert_eq!(p.ledger(), QubitLedger { a_to_b: 3, b_to_a: 0 });
        assert_eq!(p.owner_after("m1").unwrap(), Owner::Bob);
    }

    #[test]
    fn rejects_foreign_gates() {
        let mut parts = constant_parts();
        parts.rounds = vec![Round::new(Owner::Alice, vec![pauli_x("out")], vec![])];
        assert!(matches!(CommProtocol::new(parts), Err(Error::UnownedRegister { round: 0, .. })));
        let mut parts = constant_parts();
        parts.rounds = vec![
            Round::new(Owner::Alice, vec![], vec!["m0".into()]),
            Round::new(Owner::Alice, vec![pauli_x("m0")], vec![]),
        ];
        assert!(matches!(CommProtocol::new(parts), Err(Error::UnownedRegister { round: 1, .. })));
    }

    #[test]
    fn rejects_bad_moves() {
        let mut parts = constant_parts();
        parts.rounds = vec![Round::new(Owner::Bob, vec![], vec!["m0".into()])];
        assert!(matches!(CommProtocol::new(parts), Err(Error::BadMove { .. })));
        let mut parts = constant_parts();
        parts.target = Arc::new(make_gt(2).unwrap());
        parts.rounds = vec![Round::new(Owner::Alice, vec![], vec!["x".into()])];
        // x has dim 2 so the move is legal; the next round finds it with Bob
        parts.rounds.push(Round::new(Owner::Alice, vec![pauli_x("x")], vec![]));
        assert!(CommProtocol::new(parts).is_err());
    }

    #[test]
    fn validates_io_dims() {
        let mut parts = constant_parts();
        parts.target = Arc::new(make_gt(3).unwrap());
        assert!(matches!(CommProtocol::new(parts), Err(Error::InvalidProtocol(_))));
    }
}
