use std::sync::Arc;

use super::FunctionTable;
use crate::error::{Error, Result};
use crate::qsim::gates::toffoli;
use crate::qsim::{Circuit, LocalUnitary, Owner, OracleSlot, QState, Register, RegisterLayout};

/// Query access to `f_x = f(x, ·)`: `|y⟩|a⟩ -> |y⟩|a + f(x, y) mod |Z|⟩`.
#[derive(Debug, Clone)]
pub struct OracleUnitary {
    table: Arc<FunctionTable>,
    hidden_x: usize,
}

pub fn make_oracle(f: &Arc<FunctionTable>, x: usize) -> Result<OracleUnitary> {
    if x >= f.size_x() {
        return Err(Error::IndexOutOfRange {
            index: x,
            size: f.size_x(),
        });
    }
    Ok(OracleUnitary {
        table: Arc::clone(f),
        hidden_x: x,
    })
}

impl OracleUnitary {
    pub fn table(&self) -> &FunctionTable {
        &self.table
    }

    pub fn hidden_x(&self) -> usize {
        self.hidden_x
    }

    pub fn value(&self, y: usize) -> usize {
        self.table.get(self.hidden_x, y)
    }

    /// The oracle as a gate on `query` (mixed-radix, product `|Y|`) followed by `answer`.
    pub fn local_unitary(&self, query: &[(&str, usize)], answer: (&str, usize)) -> Result<LocalUnitary> {
        let qdim: usize = query.iter().map(|q| q.1).product();
        if qdim != self.table.size_y() {
            return Err(Error::DimensionMismatch(format!(
                "query registers span {qdim} values, |Y| = {}",
                self.table.size_y()
            )));
        }
        let z = self.table.size_z();
        if answer.1 != z {
            return Err(Error::DimensionMismatch(format!(
                "answer register has dim {}, |Z| = {z}",
                answer.1
            )));
        }
        let mut targets = query.to_vec();
        targets.push(answer);
        let row = self.table.row(self.hidden_x);
        LocalUnitary::permutation(&targets, |i| {
            let (y, a) = (i / z, i % z);
            y * z + (a + row[y]) % z
        })
    }

    /// The oracle on registers `y` (dim `|Y|`) and `a` (dim `|Z|`).
    pub fn unitary(&self) -> Result<LocalUnitary> {
        self.local_unitary(&[("y", self.table.size_y())], ("a", self.table.size_z()))
    }
}

impl OracleSlot for OracleUnitary {
    fn apply_oracle(&mut self, state: QState, targets: &[String]) -> Result<QState> {
        let (answer, query) = targets
            .split_last()
            .ok_or_else(|| Error::InvalidArgument("oracle slot without targets".into()))?;
        let layout = state.layout();
        let query: Vec<(&str, usize)> = query
            .iter()
            .map(|q| Ok((q.as_str(), layout.dim(q)?)))
            .collect::<Result<_>>()?;
        let u = self.local_unitary(&query, (answer.as_str(), layout.dim(answer)?))?;
        state.apply(&u)
    }
}

/// Controlled query: oracle on `(query, anc)`, Toffoli `(anc, ctrl -> ans)`, oracle again.
pub fn controlled_oracle_circuit(query: &[&str], anc: &str, ctrl: &str, ans: &str) -> Circuit {
    let mut targets = query.to_vec();
    targets.push(anc);
    let mut c = Circuit::new();
    c.oracle("U_f", &targets)
        .gate("toffoli", toffoli(anc, ctrl, ans))
        .oracle("U_f", &targets);
    c
}

/// Controlled-`U_f` for a binary `f`, on registers `y`, `anc`, `ctrl`, `ans`.
#[derive(Debug, Clone)]
pub struct ControlledOracle {
    pub layout: RegisterLayout,
    pub circuit: Circuit,
    pub oracle: OracleUnitary,
}

pub fn controlled_oracle(oracle: &OracleUnitary) -> Result<ControlledOracle> {
    let t = oracle.table();
    if t.size_z() != 2 {
        return Err(Error::InvalidArgument(format!(
            "controlled oracle needs |Z| = 2, got {}",
            t.size_z()
        )));
    }
    let layout = RegisterLayout::new(vec![
        Register::new("y", t.size_y(), Owner::Shared),
        Register::new("anc", 2, Owner::Shared),
        Register::new("ctrl", 2, Owner::Shared),
        Register::new("ans", 2, Owner::Shared),
    ])?;
    Ok(ControlledOracle {
        layout,
        circuit: controlled_oracle_circuit(&["y"], "anc", "ctrl", "ans"),
        oracle: oracle.clone(),
    })
}

impl ControlledOracle {
    /// Runs on `|y⟩|0⟩|c⟩|a⟩`; returns the final state and the oracle call count.
    pub fn run(&self, y: usize, c: usize, a: usize) -> Result<(QState, usize)> {
        let s = QState::basis(&self.layout, &[("y", y), ("anc", 0), ("ctrl", c), ("ans", a)])?;
        self.circuit.run(s, &mut self.oracle.clone())
    }
}
