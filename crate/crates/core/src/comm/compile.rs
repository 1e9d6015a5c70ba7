//! Clean and approximately-clean compilation.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{CommProtocol, Pinning, ProtocolKind, ProtocolParts, Round};
use crate::error::{Error, Result};
use crate::qsim::gates::add_into;
use crate::qsim::{Factor, Owner, QState, Register, RegisterLayout};

/// Slack on "exact" when checking a protocol before clean compilation.
const EXACT_TOL: f64 = 1e-9;

fn rename_rounds(rounds: &[Round], map: &HashMap<String, String>) -> Vec<Round> {
    let rn = |s: &String| map.get(s).cloned().unwrap_or_else(|| s.clone());
    rounds
        .iter()
        .map(|r| Round {
            actor: r.actor,
            gates: r.gates.iter().map(|g| g.renamed(map)).collect(),
            moves: r.moves.iter().map(rn).collect(),
        })
        .collect()
}

/// Undoes `rounds`: each round's qubits go back, then its actor applies the adjoints.
fn reversed(rounds: &[Round]) -> Vec<Round> {
    let mut out = Vec::new();
    for r in rounds.iter().rev() {
        if !r.moves.is_empty() {
            out.push(Round::new(r.actor.other(), vec![], r.moves.clone()));
        }
        if !r.gates.is_empty() {
            let gates = r.gates.iter().rev().map(|g| g.adjoint()).collect();
            out.push(Round::new(r.actor, gates, vec![]));
        }
    }
    out
}

/// Wraps `p0`'s rounds as `U₀, V, U₀⁻¹` with the output redirected to a work register.
struct Wrapped {
    registers: Vec<Register>,
    rounds: Vec<Round>,
    shared: Vec<Factor>,
}

fn wrap(p0: &CommProtocol, inputs: &HashMap<String, String>) -> Result<Wrapped> {
    let out = p0.output();
    let work = format!("{out}.work");
    let nz = p0.target().size_z();
    let mut map = inputs.clone();
    map.insert(out.to_string(), work.clone());
    if p0.owner_after(out)? != Owner::Bob {
        return Err(Error::InvalidProtocol("output register does not end with Bob".into()));
    }
    let forward = rename_rounds(p0.rounds(), &map);
    let mut rounds = forward.clone();
    rounds.push(Round::new(
        Owner::Bob,
        vec![add_into((&work, nz), (out, nz))],
        vec![],
    ));
    rounds.extend(reversed(&forward));
    let registers = p0
        .layout()
        .registers()
        .iter()
        .map(|r| match map.get(&r.name) {
            Some(n) if r.name != out => Register::new(n.clone(), r.dim, r.owner),
            _ => r.clone(),
        })
        .chain(std::iter::once(Register::new(work, nz, Owner::Bob)))
        .collect();
    let shared = p0
        .shared()
        .iter()
        .map(|f| Factor {
            registers: f.registers.iter().map(|r| map.get(r).cloned().unwrap_or_else(|| r.clone())).collect(),
            amplitudes: f.amplitudes.clone(),
        })
        .collect();
    Ok(Wrapped {
        registers,
        rounds,
        shared,
    })
}

/// Compiles an exact protocol into one that computes `a -> a + f(x, y)` and
/// returns every other register to its initial state.
pub fn compile_clean(p0: &CommProtocol) -> Result<CommProtocol> {
    let failure = p0.worst_failure()?;
    if p0.declared_error() > 0.0 || failure > EXACT_TOL {
        return Err(Error::NotExact { failure });
    }
    let w = wrap(p0, &HashMap::new())?;
    let layout = RegisterLayout::declared(w.registers, p0.layout().cap())?;
    CommProtocol::new(ProtocolParts {
        name: format!("clean[{}]", p0.name()),
        layout,
        alice_input: p0.alice_input().to_string(),
        bob_inputs: p0.bob_inputs().to_vec(),
        output: p0.output().to_string(),
        shared: w.shared,
        rounds: w.rounds,
        declared_error: 0.0,
        target: p0.target().clone(),
        kind: ProtocolKind::Clean,
    })
}

/// Error vectors `U|x,y,φ,a⟩ - |x,y,φ,a + f(x,y)⟩` of an approximately-clean protocol.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorAnalysis {
    pub epsilon: f64,
    pub size_y: usize,
    pub size_z: usize,
    /// `2|Z|√ε`.
    pub bound: f64,
    /// Norms indexed `(x·|Y| + y)·|Z| + a`.
    pub norms: Vec<f64>,
    /// Gram matrix over `y` for each `(x, a)`, indexed `x·|Z| + a`, row-major `|Y| × |Y|`.
    #[serde(skip)]
    pub grams: Vec<Vec<Complex64>>,
    pub max_norm: f64,
    /// Largest `|⟨e_{x,y,a} | e_{x,y',a}⟩|` over `y ≠ y'`.
    pub max_overlap: f64,
}

/// Tolerance on the orthogonality of error vectors for distinct `y`.
pub const OVERLAP_TOL: f64 = 1e-9;

impl ErrorAnalysis {
    pub fn norm(&self, x: usize, y: usize, a: usize) -> f64 {
        self.norms[(x * self.size_y + y) * self.size_z + a]
    }

    pub fn gram(&self, x: usize, a: usize) -> &[Complex64] {
        &self.grams[x * self.size_z + a]
    }

    pub fn norms_within_bound(&self) -> bool {
        self.max_norm <= self.bound + 1e-9
    }

    pub fn orthogonal_over_y(&self) -> bool {
        self.max_overlap <= OVERLAP_TOL
    }

    pub fn certified(&self) -> bool {
        self.norms_within_bound() && self.orthogonal_over_y()
    }
}

/// Like [`compile_clean`] for a protocol with error `ε`: both players first
/// copy their inputs into fresh registers and the protocol runs on the copies.
pub fn compile_approx_clean(p0: &CommProtocol) -> Result<(CommProtocol, ErrorAnalysis)> {
    let eps = p0.declared_error();
    let measured = p0.worst_failure()?;
    if measured > eps + EXACT_TOL {
        return Err(Error::FailureExceedsDeclared {
            measured,
            declared: eps,
        });
    }
    let copy = |r: &str| format!("{r}.copy");
    let mut inputs = HashMap::new();
    inputs.insert(p0.alice_input().to_string(), copy(p0.alice_input()));
    for b in p0.bob_inputs() {
        inputs.insert(b.clone(), copy(b));
    }
    let w = wrap(p0, &inputs)?;
    let l0 = p0.layout();
    let mut registers: Vec<Register> = l0.registers().to_vec();
    registers.extend(
        w.registers
            .iter()
            .filter(|r| !l0.contains(&r.name))
            .cloned(),
    );

    let xa = p0.alice_input();
    let nx = l0.dim(xa)?;
    let copy_a = Round::new(Owner::Alice, vec![add_into((xa, nx), (&copy(xa), nx))], vec![]);
    let copy_b = Round::new(
        Owner::Bob,
        p0.bob_inputs()
            .iter()
            .map(|b| {
                let d = l0.dim(b)?;
                Ok(add_into((b, d), (&copy(b), d)))
            })
            .collect::<Result<_>>()?,
        vec![],
    );
    let mut rounds = vec![copy_a.clone()];
    if !copy_b.gates.is_empty() {
        rounds.push(copy_b.clone());
    }
    rounds.extend(w.rounds);
    if !copy_b.gates.is_empty() {
        rounds.extend(reversed(&[copy_b]));
    }
    rounds.extend(reversed(&[copy_a]));

    let p = CommProtocol::new(ProtocolParts {
        name: format!("approx_clean[{}]", p0.name()),
        layout: RegisterLayout::declared(registers, l0.cap())?,
        alice_input: xa.to_string(),
        bob_inputs: p0.bob_inputs().to_vec(),
        output: p0.output().to_string(),
        shared: w.shared,
        rounds,
        declared_error: eps,
        target: p0.target().clone(),
        kind: ProtocolKind::ApproxClean,
    })?;
    let analysis = analyze_errors(&p, eps)?;
    Ok((p, analysis))
}

/// Exact error vectors of `p`, with `x` pinned and `y` kept in the state so
/// that vectors for different `y` live in one space.
pub fn analyze_errors(p: &CommProtocol, eps: f64) -> Result<ErrorAnalysis> {
    let t = p.target();
    let (nx, ny, nz) = (t.size_x(), t.size_y(), t.size_z());
    let per_xa: Vec<(Vec<f64>, Vec<Complex64>)> = (0..nx * nz)
        .into_par_iter()
        .map(|i| {
            let (x, a) = (i / nz, i % nz);
            let layout = p.pinned_layout(x, 0, Pinning::Alice)?;
            let errs: Vec<QState> = (0..ny)
                .map(|y| {
                    let out = p.apply_rounds(p.initial_state(&layout, x, y, a)?)?;
                    let ideal = p.initial_state(&layout, x, y, (a + t.get(x, y)) % nz)?;
                    out.difference(&ideal)
                })
                .collect::<Result<_>>()?;
            let norms = errs.iter().map(QState::norm).collect();
            let mut gram = vec![Complex64::default(); ny * ny];
            for u in 0..ny {
                for v in 0..ny {
                    gram[u * ny + v] = errs[u].inner(&errs[v])?;
                }
            }
            Ok((norms, gram))
        })
        .collect::<Result<_>>()?;

    let mut norms = vec![0.0; nx * ny * nz];
    let mut grams = Vec::with_capacity(nx * nz);
    let mut max_overlap: f64 = 0.0;
    for (i, (n, g)) in per_xa.into_iter().enumerate() {
        let (x, a) = (i / nz, i % nz);
        for (y, v) in n.into_iter().enumerate() {
            norms[(x * ny + y) * nz + a] = v;
        }
        for u in 0..ny {
            for v in 0..ny {
                if u != v {
                    max_overlap = max_overlap.max(g[u * ny + v].norm());
                }
            }
        }
        grams.push(g);
    }
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    Ok(ErrorAnalysis {
        epsilon: eps,
        size_y: ny,
        size_z: nz,
        bound: 2.0 * nz as f64 * eps.sqrt(),
        norms,
        grams,
        max_norm,
        max_overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::{local_protocol, send_input_protocol};
    use crate::ftab::{make_gt, FunctionTable};
    use crate::qsim::gates::pauli_x;
    use std::sync::Arc;

    #[test]
    fn constant_function_compiles_to_adder() {
        let c = Arc::new(FunctionTable::new("c", 2, 2, 3, vec![2; 4]).unwrap());
        let p = compile_clean(&local_protocol(&c, &[("y", 2)]).unwrap()).unwrap();
        assert!(p.max_clean_deviation().unwrap() < 1e-12);
        assert_eq!(p.kind(), ProtocolKind::Clean);
    }

    #[test]
    fn gt_compiles_cleanly() {
        let gt = Arc::new(make_gt(4).unwrap());
        let p0 = send_input_protocol(&gt, &[("y", 4)]).unwrap();
        let p = compile_clean(&p0).unwrap();
        assert!(p.max_clean_deviation().unwrap() < 1e-8);
        assert_eq!(p.ledger().a_to_b, p0.ledger().a_to_b + p0.ledger().b_to_a);
        // without uncomputation the same check fails
        assert!(p0.max_clean_deviation().unwrap() > 0.5);
    }

    #[test]
    fn rejects_inexact() {
        let f = Arc::new(FunctionTable::new("f", 2, 1, 2, vec![0, 0]).unwrap());
        let mut p0 = local_protocol(&f, &[]).unwrap();
        p0.rounds.push(Round::new(Owner::Bob, vec![pauli_x("out")], vec![]));
        assert!(matches!(compile_clean(&p0), Err(Error::NotExact { .. })));
        assert!(matches!(
            compile_approx_clean(&p0),
            Err(Error::FailureExceedsDeclared { .. })
        ));
    }

    #[test]
    fn exact_protocol_has_no_error_vectors() {
        let gt = Arc::new(make_gt(3).unwrap());
        let (p, a) = compile_approx_clean(&send_input_protocol(&gt, &[("y", 3)]).unwrap()).unwrap();
        assert!(a.max_norm < 1e-9);
        assert!(a.certified());
        assert!(p.max_clean_deviation().unwrap() < 1e-8);
    }
}
