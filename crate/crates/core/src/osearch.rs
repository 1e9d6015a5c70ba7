//! Ordered search: simulating a query to `GT_N` restricted to a subset with
//! two queries to `GT_{N'}`, and the query-count bound arithmetic.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ftab::{controlled_oracle_circuit, make_oracle, FunctionTable, OracleUnitary};
use crate::qsim::gates::{cnot, pauli_x};
use crate::qsim::{Circuit, LocalUnitary, Owner, QState, Register, RegisterLayout};

/// `S = {s_1 < … < s_N'} ⊆ [N]`, 1-indexed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchRestriction {
    n: usize,
    s: Vec<usize>,
}

impl SearchRestriction {
    pub fn new(n: usize, s: Vec<usize>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("restriction is empty".into()));
        }
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("restriction is not strictly increasing".into()));
        }
        if s[0] < 1 || s[s.len() - 1] > n {
            return Err(Error::InvalidArgument(format!("restriction leaves [1, {n}]")));
        }
        Ok(SearchRestriction { n, s })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, (1..=n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_prime(&self) -> usize {
        self.s.len()
    }

    pub fn elements(&self) -> &[usize] {
        &self.s
    }

    /// `s_j`, 1-indexed.
    pub fn element(&self, j: usize) -> Result<usize> {
        j.checked_sub(1)
            .and_then(|i| self.s.get(i).copied())
            .ok_or(Error::IndexOutOfRange {
                index: j,
                size: self.s.len(),
            })
    }

    fn check_y(&self, y: usize) -> Result<()> {
        if y < 1 || y > self.n {
            return Err(Error::IndexOutOfRange { index: y, size: self.n });
        }
        Ok(())
    }
}

/// `A(y) = 1` iff `s_1 ≤ y`.
pub fn a_map(r: &SearchRestriction, y: usize) -> Result<usize> {
    r.check_y(y)?;
    Ok(usize::from(r.s[0] <= y))
}

/// `B(y) = max{i : s_i ≤ y}` when `s_1 ≤ y`, else 1.
pub fn b_map(r: &SearchRestriction, y: usize) -> Result<usize> {
    r.check_y(y)?;
    Ok(r.s.partition_point(|&s| s <= y).max(1))
}

/// Register dimensions used by [`v_unitary`] and [`reduce_query`]: `y`, `B`.
fn dims(r: &SearchRestriction) -> (usize, usize) {
    (r.n.max(2), r.n_prime().max(2))
}

/// `|y⟩|a⟩|b⟩ -> |y⟩|a ⊕ A(y)⟩|b + B(y) mod N'⟩` on registers `y`, `A`, `B`.
///
/// `y` stores `y - 1` and `b` stores the 0-indexed element of `[N']`, so the
/// shift applied to `b` is `B(y) - 1`. Padding values (when `N` or `N'` is 1)
/// are left alone.
pub fn v_unitary(r: &SearchRestriction) -> Result<LocalUnitary> {
    let (ny, nb) = dims(r);
    let np = r.n_prime();
    let table: Vec<(usize, usize)> = (1..=r.n)
        .map(|y| Ok((a_map(r, y)?, b_map(r, y)? - 1)))
        .collect::<Result<_>>()?;
    LocalUnitary::permutation(&[("y", ny), ("A", 2), ("B", nb)], |i| {
        let (y, a, b) = (i / (2 * nb), (i / nb) % 2, i % nb);
        match table.get(y) {
            Some(&(av, bv)) if b < np => (y * 2 + (a ^ av)) * nb + (b + bv) % np,
            Some(&(av, _)) => (y * 2 + (a ^ av)) * nb + b,
            None => i,
        }
    })
}

/// `GT` on `[N']` in 0-indexed storage, padded to at least two columns.
pub fn padded_gt(n_prime: usize) -> Result<FunctionTable> {
    FunctionTable::from_fn(
        format!("gt'({n_prime})"),
        n_prime,
        n_prime.max(2),
        2,
        |x, y| usize::from(y < n_prime && x > y),
    )
}

/// One simulated `GT_N` query restricted to `S`, hidden element `s_j`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub restriction: SearchRestriction,
    pub j: usize,
    pub layout: RegisterLayout,
    pub circuit: Circuit,
    pub oracle: OracleUnitary,
}

/// Builds the reduction circuit on registers `y`, `A`, `B`, `anc`, `a`:
/// `V`; controlled query to `GT'_j` on `B` with control `A`; flip `a` when
/// `A = 0`; `V⁻¹`.
pub fn reduce_query(r: &SearchRestriction, j: usize) -> Result<Reduction> {
    r.element(j)?;
    let (ny, nb) = dims(r);
    let layout = RegisterLayout::new(vec![
        Register::new("y", ny, Owner::Shared),
        Register::new("A", 2, Owner::Shared),
        Register::new("B", nb, Owner::Shared),
        Register::new("anc", 2, Owner::Shared),
        Register::new("a", 2, Owner::Shared),
    ])?;
    let v = v_unitary(r)?;
    let mut circuit = Circuit::new();
    circuit.gate("V", v.clone());
    circuit.append(&controlled_oracle_circuit(&["B"], "anc", "A", "a"));
    circuit
        .gate("not-A", pauli_x("A"))
        .gate("flip", cnot("A", "a"))
        .gate("not-A", pauli_x("A"))
        .gate("V^-1", v.adjoint());
    let gt = Arc::new(padded_gt(r.n_prime())?);
    let oracle = make_oracle(&gt, j - 1)?;
    Ok(Reduction {
        restriction: r.clone(),
        j,
        layout,
        circuit,
        oracle,
    })
}

/// Result of running a [`Reduction`] on `|y⟩|0⟩|0⟩|0⟩|a⟩`.
#[derive(Debug, Clone, Serialize)]
pub struct TruthRow {
    pub y: usize,
    pub a: usize,
    /// Measured answer bit, or `None` if the answer is not a basis state.
    pub out: Option<usize>,
    pub expected: usize,
    /// Whether the final state is exactly `|y⟩|0⟩|0⟩|0⟩|a ⊕ GT(s_j, y)⟩`.
    pub exact: bool,
    pub oracle_calls: usize,
}

impl Reduction {
    pub fn run(&self, y: usize, a: usize) -> Result<(QState, usize)> {
        self.restriction.check_y(y)?;
        let s = QState::basis(&self.layout, &[("y", y - 1), ("a", a)])?;
        self.circuit.run(s, &mut self.oracle.clone())
    }

    /// Every `(y, a)` with `y ∈ [N]`, `a ∈ {0, 1}`.
    pub fn truth_table(&self) -> Result<Vec<TruthRow>> {
        let sj = self.restriction.element(self.j)?;
        let mut rows = Vec::with_capacity(2 * self.restriction.n);
        for y in 1..=self.restriction.n {
            for a in 0..2 {
                let (s, calls) = self.run(y, a)?;
                let expected = a ^ usize::from(sj > y);
                let want = QState::basis(&self.layout, &[("y", y - 1), ("a", expected)])?;
                let exact = crate::qsim::l2_distance(&s, &want)? < 1e-12;
                let d = s.measure_distribution(&["a"])?;
                let out = (0..2).find(|&v| (d.mass(v) - 1.0).abs() < 1e-12);
                rows.push(TruthRow {
                    y,
                    a,
                    out,
                    expected,
                    exact,
                    oracle_calls: calls,
                });
            }
        }
        Ok(rows)
    }
}

/// Smallest `T` with `(log log N + log T)·T ≥ c·log N`, logs base 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GtBound {
    pub n: u64,
    pub c: f64,
    pub t: u64,
    /// `(c/2)·log N / log log N`.
    pub threshold: f64,
}

fn gt_lhs(loglog: f64, t: u64) -> f64 {
    (loglog + (t as f64).log2()) * t as f64
}

pub fn gt_bound(n: u64, c: f64) -> Result<GtBound> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("N = {n} is below 4")));
    }
    if !(c > 0.0 && c < 2.0) {
        return Err(Error::InvalidArgument(format!("c = {c} outside (0, 2)")));
    }
    let log = (n as f64).log2();
    let loglog = log.log2();
    let rhs = c * log;
    let mut t = 1;
    while gt_lhs(loglog, t) < rhs - 1e-12 {
        t += 1;
    }
    Ok(GtBound {
        n,
        c,
        t,
        threshold: 0.5 * c * log / loglog,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s257() -> SearchRestriction {
        SearchRestriction::new(8, vec![2, 5, 7]).unwrap()
    }

    #[test]
    fn maps() {
        let r = s257();
        assert_eq!((a_map(&r, 1).unwrap(), b_map(&r, 1).unwrap()), (0, 1));
        assert_eq!((a_map(&r, 6).unwrap(), b_map(&r, 6).unwrap()), (1, 2));
        assert_eq!(b_map(&r, 8).unwrap(), 3);
        assert!(a_map(&r, 9).is_err());
        assert!(a_map(&r, 0).is_err());
        let full = SearchRestriction::full(5).unwrap();
        for y in 1..=5 {
            assert_eq!(a_map(&full, y).unwrap(), 1);
            assert_eq!(b_map(&full, y).unwrap(), y);
        }
    }

    #[test]
    fn restriction_validation() {
        assert!(SearchRestriction::new(5, vec![]).is_err());
        assert!(SearchRestriction::new(5, vec![3, 2]).is_err());
        assert!(SearchRestriction::new(5, vec![2, 2]).is_err());
        assert!(SearchRestriction::new(5, vec![0, 2]).is_err());
        assert!(SearchRestriction::new(5, vec![6]).is_err());
    }

    #[test]
    fn v_matches_maps() {
        let r = s257();
        let v = v_unitary(&r).unwrap();
        assert!(v.unitarity_defect() < 1e-12);
        for (row, col, _) in v.entries() {
            let (y, a, b) = (col / 6, (col / 3) % 2, col % 3);
            let want_a = a ^ a_map(&r, y + 1).unwrap();
            let want_b = (b + b_map(&r, y + 1).unwrap() - 1) % 3;
            assert_eq!(row, (y * 2 + want_a) * 3 + want_b);
        }
    }

    #[test]
    fn reduction_examples() {
        let red = reduce_query(&s257(), 2).unwrap();
        let rows = red.truth_table().unwrap();
        let at = |y: usize, a: usize| rows.iter().find(|r| r.y == y && r.a == a).unwrap().clone();
        // s_2 = 5 is not above 6
        assert_eq!(at(6, 1).out, Some(1));
        // y below s_1
        assert_eq!(at(1, 0).out, Some(1));
        assert!(rows.iter().all(|r| r.exact && r.oracle_calls == 2));
        assert!(reduce_query(&s257(), 4).is_err());
        assert!(reduce_query(&s257(), 0).is_err());
    }

    #[test]
    fn singleton_restriction() {
        let r = SearchRestriction::new(3, vec![2]).unwrap();
        let rows = reduce_query(&r, 1).unwrap().truth_table().unwrap();
        assert!(rows.iter().all(|r| r.exact && r.out == Some(r.expected)));
    }

    #[test]
    fn bound_at_two_to_sixteen() {
        // log log 2^16 = 4: (4 + log 3)·3 ≈ 16.75 ≥ 16 while (4 + 1)·2 = 10
        let b = gt_bound(1 << 16, 1.0).unwrap();
        assert_eq!(b.t, 3);
        assert_eq!(b.threshold, 2.0);
        assert!(gt_bound(3, 1.0).is_err());
        assert!(gt_bound(16, 2.0).is_err());
        assert!(gt_bound(16, 0.0).is_err());
    }
}
