//! Query algorithms for the oracle identification problem.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::Distribution;
use crate::error::{Error, Result};
use crate::ftab::{make_oracle, ComposedFunction, FunctionTable};
use crate::qsim::gates::{adder, hadamard, pauli_x};
use crate::qsim::{Circuit, LocalUnitary, Op, Owner, QState, Register, RegisterLayout};

/// A circuit with oracle slots on `(query…, answer)`; the guess is read from `output`.
#[derive(Debug, Clone)]
pub struct QueryAlgorithm {
    layout: RegisterLayout,
    circuit: Circuit,
    query: Vec<String>,
    answer: String,
    output: String,
}

impl QueryAlgorithm {
    pub fn new(
        layout: RegisterLayout,
        circuit: Circuit,
        query: Vec<String>,
        answer: impl Into<String>,
        output: impl Into<String>,
    ) -> Result<Self> {
        let answer = answer.into();
        let output = output.into();
        for r in query.iter().chain([&answer, &output]) {
            layout.position(r)?;
        }
        let mut expected = query.clone();
        expected.push(answer.clone());
        for op in circuit.ops() {
            match op {
                Op::Oracle { targets, .. } if *targets != expected => {
                    return Err(Error::LayoutMismatch(format!(
                        "oracle slot on {targets:?}, expected {expected:?}"
                    )));
                }
                Op::Gate { unitary, .. } => {
                    for t in unitary.targets() {
                        layout.position(t)?;
                    }
                }
                _ => {}
            }
        }
        Ok(QueryAlgorithm {
            layout,
            circuit,
            query,
            answer,
            output,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn query(&self) -> &[String] {
        &self.query
    }

    pub fn answer(&self) -> &str {
        &self.answer
    }

    pub fn output(&self) -> &str {
        &self.output
    }

    /// Number of oracle slots.
    pub fn queries(&self) -> usize {
        self.circuit.oracle_calls()
    }

    /// Checks that `f` fits the query, answer and output registers.
    pub fn check_table(&self, f: &FunctionTable) -> Result<()> {
        let qdim: usize = self
            .query
            .iter()
            .map(|q| self.layout.dim(q))
            .product::<Result<usize>>()?;
        let zdim = self.layout.dim(&self.answer)?;
        let odim = self.layout.dim(&self.output)?;
        if qdim != f.size_y() || zdim != f.size_z() || odim < f.size_x() {
            return Err(Error::LayoutMismatch(format!(
                "registers span |Y| = {qdim}, |Z| = {zdim}, {odim} outputs; `{}` has sizes {} x {} x {}",
                f.name(),
                f.size_x(),
                f.size_y(),
                f.size_z()
            )));
        }
        Ok(())
    }
}

/// Output distribution of `alg` run against the oracle for row `x` of `f`,
/// and the number of oracle calls made.
pub fn run_query_algorithm(alg: &QueryAlgorithm, f: &Arc<FunctionTable>, x: usize) -> Result<(Distribution, usize)> {
    alg.check_table(f)?;
    let mut oracle = make_oracle(f, x)?;
    let (state, calls) = alg.circuit.run(QState::zero(&alg.layout), &mut oracle)?;
    Ok((state.measure_distribution(&[alg.output.as_str()])?, calls))
}

/// Exact behavior of a query algorithm on every hidden `x`.
#[derive(Debug, Clone, Serialize)]
pub struct OipReport {
    #[serde(rename = "T")]
    pub queries: usize,
    pub worst_failure: f64,
    pub dist_failure: f64,
    pub per_x: Vec<f64>,
    /// Pairs `x < x'` whose oracles coincide; no algorithm separates them.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

/// Failure probability `Pr[output ≠ x]` for every `x`, plus its `mu`-average.
pub fn evaluate_oip(alg: &QueryAlgorithm, f: &Arc<FunctionTable>, mu: &Distribution) -> Result<OipReport> {
    if mu.len() != f.size_x() {
        return Err(Error::DimensionMismatch(format!(
            "distribution over {} outcomes, |X| = {}",
            mu.len(),
            f.size_x()
        )));
    }
    alg.check_table(f)?;
    let runs: Vec<(f64, usize)> = (0..f.size_x())
        .into_par_iter()
        .map(|x| {
            let (d, calls) = run_query_algorithm(alg, f, x)?;
            Ok(((1.0 - d.mass(x)).max(0.0), calls))
        })
        .collect::<Result<_>>()?;
    let queries = alg.queries();
    if let Some(&(_, c)) = runs.iter().find(|r| r.1 != queries) {
        return Err(Error::InvalidAlgorithm(format!("made {c} oracle calls, expected {queries}")));
    }
    let per_x: Vec<f64> = runs.into_iter().map(|r| r.0).collect();
    let dist_failure = per_x.iter().zip(mu.masses()).map(|(f, m)| f * m).sum();
    Ok(OipReport {
        queries,
        worst_failure: per_x.iter().copied().fold(0.0, f64::max),
        dist_failure,
        per_x,
        degenerate_pairs: f.identical_rows(),
    })
}

/// Label of the gate after which an iteration holds `|j⟩|x_1j … x_nj⟩|1⟩`.
pub const BV_COLUMN_READY: &str = "column-ready";

/// Column-by-column Bernstein–Vazirani algorithm for the composed function.
///
/// Iteration `j` prepares `Σ (-1)^z |j⟩|y⟩|z⟩`, queries, applies Hadamards
/// to `y` and `z` (leaving `y = x_1j … x_nj`), swaps those bits into the
/// output and resets `y` and `z`. When the domain is a strict subset of
/// `{0,1}^{nq}` a final relabeling maps the `k`-th row to output value `k`.
pub fn bv_oip(f: &ComposedFunction) -> Result<QueryAlgorithm> {
    let (n, q) = (f.n(), f.q());
    let bits = n * q;
    let query = f.query_registers();
    let mut regs: Vec<Register> = query
        .iter()
        .map(|(r, d)| Register::new(r.clone(), *d, Owner::Shared))
        .collect();
    regs.push(Register::new("z", 2, Owner::Shared));
    regs.push(Register::new("out", 1 << bits, Owner::Shared));
    let layout = RegisterLayout::new(regs)?;
    let odim = 1usize << bits;

    let ys: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
    let mut targets: Vec<&str> = query.iter().map(|(r, _)| r.as_str()).collect();
    targets.push("z");
    let mut c = Circuit::new();
    for col in 0..q {
        if col > 0 {
            c.gate("next-column", adder("j", q, 1));
        }
        for y in &ys {
            c.gate("prepare", hadamard(y));
        }
        c.gate("prepare", pauli_x("z")).gate("prepare", hadamard("z"));
        c.oracle("query", &targets);
        for y in &ys {
            c.gate("hadamard", hadamard(y));
        }
        c.gate(BV_COLUMN_READY, hadamard("z"));
        for (i, y) in ys.iter().enumerate() {
            let pos = bits - 1 - (i * q + col);
            c.gate(
                "record",
                LocalUnitary::permutation(&[(y.as_str(), 2), ("out", odim)], |k| {
                    let (b, o) = (k / odim, k % odim);
                    k - o + (o ^ (b << pos))
                })?,
            );
            c.gate(
                "reset",
                LocalUnitary::permutation(&[(y.as_str(), 2), ("out", odim)], |k| {
                    let (b, o) = (k / odim, k % odim);
                    ((b ^ ((o >> pos) & 1)) * odim) + o
                })?,
            );
        }
        c.gate("reset", pauli_x("z"));
    }
    if f.rows().len() != odim {
        let mut label = vec![usize::MAX; odim];
        for (k, &r) in f.rows().iter().enumerate() {
            label[r] = k;
        }
        let unused = label.iter_mut().filter(|l| **l == usize::MAX);
        for (next, l) in (f.rows().len()..).zip(unused) {
            *l = next;
        }
        c.gate("relabel", LocalUnitary::permutation(&[("out", odim)], |v| label[v])?);
    }
    QueryAlgorithm::new(
        layout,
        c,
        query.into_iter().map(|(r, _)| r).collect(),
        "z",
        "out",
    )
}
