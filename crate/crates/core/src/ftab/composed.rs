use std::sync::Arc;

use super::oracle::make_oracle;
use super::FunctionTable;
use crate::error::{Error, Result};
use crate::qsim::{max_basis_deviation, LocalUnitary, Owner, Register, RegisterLayout, DEFAULT_DIM_CAP};

/// `g((x_1, …, x_n), (j, y)) = Σ_i y_i x_ij mod 2` on a set of rows of `{0,1}^{nq}`.
///
/// Row encoding: bit `x_ij` (1-indexed) sits at position `(i-1)q + (j-1)`
/// counted from the most significant of `nq` bits. Column encoding:
/// `(j-1)·2^n + ybits` with `y_1` the most significant of `n` bits.
#[derive(Debug, Clone)]
pub struct ComposedFunction {
    n: usize,
    q: usize,
    rows: Vec<usize>,
    table: Arc<FunctionTable>,
}

fn row_bits(n: usize, q: usize) -> Result<usize> {
    if n == 0 || q == 0 {
        return Err(Error::InvalidArgument("composed function needs n, q >= 1".into()));
    }
    let bits = n
        .checked_mul(q)
        .filter(|&b| b < usize::BITS as usize - 1)
        .ok_or(Error::CapExceeded {
            dim: u128::MAX,
            cap: DEFAULT_DIM_CAP,
        })?;
    Ok(bits)
}

fn check_cap(rows: usize, n: usize, q: usize, cap: usize) -> Result<()> {
    let cells = ((rows as u128) * (q as u128)) << n;
    if cells > cap as u128 {
        return Err(Error::CapExceeded { dim: cells, cap });
    }
    Ok(())
}

/// Full composed function on `X_0 = {0,1}^{nq}`, refused if the table exceeds `cap` cells.
pub fn make_composed(n: usize, q: usize, cap: usize) -> Result<ComposedFunction> {
    let bits = row_bits(n, q)?;
    if n >= 32 {
        return Err(Error::CapExceeded { dim: u128::MAX, cap });
    }
    check_cap(1usize << bits, n, q, cap)?;
    ComposedFunction::build(n, q, (0..1usize << bits).collect())
}

/// First `size` rows of `X_0` in lexicographic order after the required rows `(x_1, 0, …, 0)`.
pub fn lexicographic_subset(n: usize, q: usize, size: usize) -> Result<Vec<usize>> {
    let bits = row_bits(n, q)?;
    let total = 1usize << bits;
    let required = 1usize << q;
    if size < required || size > total {
        return Err(Error::InvalidArgument(format!(
            "subset size {size} outside [{required}, {total}]"
        )));
    }
    let shift = (n - 1) * q;
    let mut rows: Vec<usize> = (0..required).map(|x1| x1 << shift).collect();
    rows.extend(
        (0..total)
            .filter(|r| r & ((1 << shift) - 1) != 0)
            .take(size - required),
    );
    rows.sort_unstable();
    Ok(rows)
}

/// Restriction of `f` to `subset` (rows of `X_0`); rows are kept in ascending order.
pub fn restrict_composed(f: &ComposedFunction, subset: &[usize]) -> Result<ComposedFunction> {
    let mut rows = subset.to_vec();
    rows.sort_unstable();
    rows.dedup();
    if rows.len() != subset.len() {
        return Err(Error::InvalidArgument("subset has repeated rows".into()));
    }
    let shift = (f.n - 1) * f.q;
    for x1 in 0..1usize << f.q {
        if rows.binary_search(&(x1 << shift)).is_err() {
            return Err(Error::InvalidArgument(format!(
                "subset misses required row {:0w$b}",
                x1 << shift,
                w = f.n * f.q
            )));
        }
    }
    for &r in &rows {
        if f.rows.binary_search(&r).is_err() {
            return Err(Error::InvalidArgument(format!("row {r} not in the domain")));
        }
    }
    ComposedFunction::build(f.n, f.q, rows)
}

impl ComposedFunction {
    fn build(n: usize, q: usize, rows: Vec<usize>) -> Result<Self> {
        let size_y = q << n;
        let mut table = Vec::with_capacity(rows.len() * size_y);
        for &r in &rows {
            for y in 0..size_y {
                table.push(Self::eval(n, q, r, y));
            }
        }
        let name = format!("composed(n={n},q={q})");
        let table = FunctionTable::new(name, rows.len(), size_y, 2, table)?;
        Ok(ComposedFunction {
            n,
            q,
            rows,
            table: Arc::new(table),
        })
    }

    fn eval(n: usize, q: usize, row: usize, y: usize) -> usize {
        let j = y >> n;
        let ybits = y & ((1 << n) - 1);
        let mut acc = 0;
        for i in 0..n {
            let yi = (ybits >> (n - 1 - i)) & 1;
            let xij = (row >> (n * q - 1 - (i * q + j))) & 1;
            acc ^= yi & xij;
        }
        acc
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Rows of `X_0` in this domain, ascending; table row `k` is `rows()[k]`.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn table(&self) -> &Arc<FunctionTable> {
        &self.table
    }

    /// Table row of the `X_0` row `row`, if present.
    pub fn index_of_row(&self, row: usize) -> Option<usize> {
        self.rows.binary_search(&row).ok()
    }

    /// Bit `x_ij` of an `X_0` row, 1-indexed.
    pub fn bit(&self, row: usize, i: usize, j: usize) -> usize {
        (row >> (self.n * self.q - i * self.q + self.q - j)) & 1
    }

    /// Column of query `(j, y_1 … y_n)`, 1-indexed `j`.
    pub fn column(&self, j: usize, y: &[usize]) -> usize {
        let ybits = y.iter().fold(0, |acc, &b| (acc << 1) | (b & 1));
        ((j - 1) << self.n) | ybits
    }

    /// Query registers in encoding order: `j` (omitted when `q = 1`), then `y1 … yn`.
    pub fn query_registers(&self) -> Vec<(String, usize)> {
        let mut regs = Vec::new();
        if self.q > 1 {
            regs.push(("j".to_string(), self.q));
        }
        regs.extend((1..=self.n).map(|i| (format!("y{i}"), 2)));
        regs
    }
}

/// Row with block 1 equal to `h` and all other blocks zero, as an index into `f`.
pub fn embed_or_instance(f: &ComposedFunction, h: &[u8]) -> Result<usize> {
    if h.len() != f.q {
        return Err(Error::InvalidArgument(format!(
            "h has length {}, q = {}",
            h.len(),
            f.q
        )));
    }
    let block = h.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
    let row = block << ((f.n - 1) * f.q);
    f.index_of_row(row)
        .ok_or_else(|| Error::InvalidArgument(format!("row {row} not in the domain")))
}

/// `|j⟩|c⟩|a⟩ -> |j⟩|c⟩|a ⊕ c·h(j)⟩`, with `c` on register `y1` and `j` omitted when `q = 1`.
pub fn or_oracle(h: &[u8]) -> Result<LocalUnitary> {
    let q = h.len();
    let mut targets = Vec::new();
    if q > 1 {
        targets.push(("j", q));
    }
    targets.push(("y1", 2));
    targets.push(("ans", 2));
    LocalUnitary::permutation(&targets, |i| {
        let (j, c) = (i >> 2, (i >> 1) & 1);
        if c == 1 && h[j] & 1 == 1 {
            i ^ 1
        } else {
            i
        }
    })
}

/// Largest deviation between the oracle of the embedded row and `or_oracle(h)`, over all basis states.
pub fn verify_or_embedding(f: &ComposedFunction, h: &[u8]) -> Result<f64> {
    let x = embed_or_instance(f, h)?;
    let regs = f.query_registers();
    let mut layout_regs: Vec<Register> = regs
        .iter()
        .map(|(n, d)| Register::new(n.clone(), *d, Owner::Shared))
        .collect();
    layout_regs.push(Register::new("ans", 2, Owner::Shared));
    let layout = RegisterLayout::new(layout_regs)?;
    let query: Vec<(&str, usize)> = regs.iter().map(|(n, d)| (n.as_str(), *d)).collect();
    let fx = make_oracle(f.table(), x)?.local_unitary(&query, ("ans", 2))?;
    max_basis_deviation(&layout, &[fx], &[or_oracle(h)?])
}
