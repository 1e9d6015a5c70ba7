use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unitarity tolerance on `max |U†U - I|`.
pub const UNITARY_TOL: f64 = 1e-9;

const ZERO_CUTOFF: f64 = 1e-15;

/// Column-compressed square matrix over a target subspace.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SparseOp {
    pub(crate) dim: usize,
    pub(crate) col_ptr: Vec<usize>,
    pub(crate) rows: Vec<usize>,
    pub(crate) vals: Vec<Complex64>,
}

impl SparseOp {
    fn from_columns(dim: usize, mut column: impl FnMut(usize, &mut Vec<(usize, Complex64)>)) -> Self {
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        let mut buf = Vec::new();
        col_ptr.push(0);
        for c in 0..dim {
            buf.clear();
            column(c, &mut buf);
            for &(r, v) in &buf {
                if v.norm() > ZERO_CUTOFF {
                    rows.push(r);
                    vals.push(v);
                }
            }
            col_ptr.push(rows.len());
        }
        SparseOp {
            dim,
            col_ptr,
            rows,
            vals,
        }
    }

    pub(crate) fn column(&self, c: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let (lo, hi) = (self.col_ptr[c], self.col_ptr[c + 1]);
        self.rows[lo..hi]
            .iter()
            .copied()
            .zip(self.vals[lo..hi].iter().copied())
    }

    fn adjoint(&self) -> Self {
        let mut entries: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.dim];
        for c in 0..self.dim {
            for (r, v) in self.column(c) {
                entries[r].push((c, v.conj()));
            }
        }
        SparseOp::from_columns(self.dim, |c, buf| buf.extend_from_slice(&entries[c]))
    }

    /// `max |U†U - I|` computed from column overlaps.
    fn unitarity_defect(&self) -> f64 {
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.dim];
        for c in 0..self.dim {
            for (r, v) in self.column(c) {
                by_row[r].push((c, v));
            }
        }
        let mut defect: f64 = 0.0;
        let mut gram: HashMap<usize, Complex64> = HashMap::new();
        for c in 0..self.dim {
            gram.clear();
            for (r, v) in self.column(c) {
                for &(k, w) in &by_row[r] {
                    *gram.entry(k).or_default() += v.conj() * w;
                }
            }
            let diag = gram.get(&c).copied().unwrap_or_default();
            defect = defect.max((diag - Complex64::new(1.0, 0.0)).norm());
            for (&k, &g) in &gram {
                if k != c {
                    defect = defect.max(g.norm());
                }
            }
        }
        defect
    }
}

/// A unitary acting on an ordered list of named registers, identity elsewhere.
///
/// Stored sparsely by columns; permutation and multiplexed gates over large
/// control registers never expand into dense form.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    targets: Vec<String>,
    dims: Vec<usize>,
    pub(crate) op: SparseOp,
}

fn split(targets: &[(&str, usize)]) -> (Vec<String>, Vec<usize>) {
    let names = targets.iter().map(|(n, _)| n.to_string()).collect();
    let dims = targets.iter().map(|&(_, d)| d).collect();
    (names, dims)
}

fn check_targets(names: &[String], dims: &[usize]) -> Result<usize> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::DuplicateRegister(n.clone()));
        }
    }
    if names.is_empty() {
        return Err(Error::DimensionMismatch("gate has no target registers".into()));
    }
    dims.iter().try_fold(1usize, |acc, &d| {
        if d == 0 {
            Err(Error::DimensionMismatch("zero-dimensional target".into()))
        } else {
            acc.checked_mul(d)
                .ok_or_else(|| Error::DimensionMismatch("target space too large".into()))
        }
    })
}

impl LocalUnitary {
    fn checked(names: Vec<String>, dims: Vec<usize>, op: SparseOp) -> Result<Self> {
        let defect = op.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(LocalUnitary {
            targets: names,
            dims,
            op,
        })
    }

    /// Dense matrix over the product of the target dimensions.
    pub fn from_matrix(targets: &[(&str, usize)], matrix: &Array2<Complex64>) -> Result<Self> {
        let (names, dims) = split(targets);
        let dim = check_targets(&names, &dims)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, target space has dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = SparseOp::from_columns(dim, |c, buf| {
            buf.extend((0..dim).map(|r| (r, matrix[[r, c]])));
        });
        Self::checked(names, dims, op)
    }

    /// Sparse matrix given as `(row, col, value)` triples.
    pub fn from_entries(targets: &[(&str, usize)], entries: &[(usize, usize, Complex64)]) -> Result<Self> {
        let (names, dims) = split(targets);
        let dim = check_targets(&names, &dims)?;
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside dimension {dim}"
                )));
            }
            cols[c].push((r, v));
        }
        for col in &mut cols {
            col.sort_by_key(|&(r, _)| r);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }
        let op = SparseOp::from_columns(dim, |c, buf| buf.extend_from_slice(&cols[c]));
        Self::checked(names, dims, op)
    }

    /// Basis permutation `|i⟩ -> |map(i)⟩`.
    pub fn permutation(targets: &[(&str, usize)], map: impl Fn(usize) -> usize) -> Result<Self> {
        Self::monomial(targets, |c| (map(c), Complex64::new(1.0, 0.0)))
    }

    /// Monomial unitary `|i⟩ -> phase(i) |map(i)⟩`.
    pub fn monomial(
        targets: &[(&str, usize)],
        map: impl Fn(usize) -> (usize, Complex64),
    ) -> Result<Self> {
        let (names, dims) = split(targets);
        let dim = check_targets(&names, &dims)?;
        let mut seen = vec![false; dim];
        let mut bad = None;
        let op = SparseOp::from_columns(dim, |c, buf| {
            let (r, v) = map(c);
            if r >= dim || seen[r] || (v.norm() - 1.0).abs() > UNITARY_TOL {
                bad.get_or_insert(c);
            } else {
                seen[r] = true;
            }
            buf.push((r.min(dim - 1), v));
        });
        if let Some(c) = bad {
            return Err(Error::InvalidArgument(format!(
                "monomial map is not a phased bijection (column {c})"
            )));
        }
        Ok(LocalUnitary {
            targets: names,
            dims,
            op,
        })
    }

    /// Block-diagonal unitary: `block(c)` acts on `targets` when `controls` hold `c`.
    pub fn multiplexed(
        controls: &[(&str, usize)],
        targets: &[(&str, usize)],
        block: impl Fn(usize) -> Array2<Complex64>,
    ) -> Result<Self> {
        let all: Vec<(&str, usize)> = controls.iter().chain(targets).copied().collect();
        let (names, dims) = split(&all);
        let dim = check_targets(&names, &dims)?;
        let tdim: usize = targets.iter().map(|&(_, d)| d).product();
        let cdim = dim / tdim;
        let mut bad = None;
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for ci in 0..cdim {
            let b = block(ci);
            if b.nrows() != tdim || b.ncols() != tdim {
                return Err(Error::DimensionMismatch(format!(
                    "block {ci} is {}x{}, expected {tdim}x{tdim}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            let bh = b.t().mapv(|v| v.conj());
            let defect = (bh.dot(&b) - Array2::<Complex64>::eye(tdim))
                .iter()
                .fold(0.0f64, |m, v| m.max(v.norm()));
            if defect > UNITARY_TOL {
                bad.get_or_insert(defect);
            }
            for c in 0..tdim {
                for r in 0..tdim {
                    cols[ci * tdim + c].push((ci * tdim + r, b[[r, c]]));
                }
            }
        }
        if let Some(defect) = bad {
            return Err(Error::NotUnitary { defect });
        }
        let op = SparseOp::from_columns(dim, |c, buf| buf.extend_from_slice(&cols[c]));
        Ok(LocalUnitary {
            targets: names,
            dims,
            op,
        })
    }

    pub fn identity(targets: &[(&str, usize)]) -> Result<Self> {
        Self::permutation(targets, |i| i)
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.op.dim
    }

    pub fn adjoint(&self) -> Self {
        LocalUnitary {
            targets: self.targets.clone(),
            dims: self.dims.clone(),
            op: self.op.adjoint(),
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.op.unitarity_defect()
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        (0..self.op.dim)
            .flat_map(|c| self.op.column(c).map(move |(r, v)| (r, c, v)))
            .collect()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.op.dim, self.op.dim));
        for (r, c, v) in self.entries() {
            m[[r, c]] = v;
        }
        m
    }

    /// Renames target registers through `map`; names absent from the map are kept.
    pub fn renamed(&self, map: &HashMap<String, String>) -> Self {
        let mut out = self.clone();
        for t in &mut out.targets {
            if let Some(n) = map.get(t) {
                *t = n.clone();
            }
        }
        out
    }

    /// Local digit of target `k` in a target-space index.
    pub(crate) fn digit(&self, idx: usize, k: usize) -> usize {
        let inner: usize = self.dims[k + 1..].iter().product();
        (idx / inner) % self.dims[k]
    }

    /// True when the gate never changes the basis value of register `name`.
    pub fn preserves_register(&self, name: &str) -> bool {
        let Some(k) = self.targets.iter().position(|t| t == name) else {
            return true;
        };
        (0..self.op.dim).all(|c| {
            let dc = self.digit(c, k);
            self.op.column(c).all(|(r, _)| self.digit(r, k) == dc)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gates;

    #[test]
    fn rejects_non_unitary() {
        let m = Array2::from_shape_vec(
            (2, 2),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            LocalUnitary::from_matrix(&[("q", 2)], &m),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn rejects_wrong_shape() {
        let m = Array2::<Complex64>::eye(3);
        assert!(matches!(
            LocalUnitary::from_matrix(&[("q", 2)], &m),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn permutation_must_be_bijective() {
        assert!(LocalUnitary::permutation(&[("q", 3)], |_| 0).is_err());
        assert!(LocalUnitary::permutation(&[("q", 3)], |i| (i + 1) % 3).is_ok());
    }

    #[test]
    fn adjoint_inverts() {
        let h = gates::hadamard("q");
        let prod = h.adjoint().to_dense().dot(&h.to_dense());
        let eye = Array2::<Complex64>::eye(2);
        assert!((prod - eye).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn preserves_register_detects_writes() {
        let cnot = gates::cnot("c", "t");
        assert!(cnot.preserves_register("c"));
        assert!(!cnot.preserves_register("t"));
        assert!(cnot.preserves_register("elsewhere"));
    }
}
