//! Finite functions `f: X × Y → Z` and their query oracles.

mod composed;
mod families;
mod oracle;

pub use composed::{
    embed_or_instance, lexicographic_subset, make_composed, or_oracle, restrict_composed,
    verify_or_embedding, ComposedFunction,
};
pub use families::{chi_value, is_odd_prime, make_chi, make_gt, make_ps, make_ps_prime};
pub use oracle::{controlled_oracle, controlled_oracle_circuit, make_oracle, ControlledOracle, OracleUnitary};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major table of `f(x, y) ∈ {0, …, |Z|-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableJson", into = "TableJson")]
pub struct FunctionTable {
    name: String,
    size_x: usize,
    size_y: usize,
    size_z: usize,
    table: Vec<usize>,
}

/// On-disk form: `{"name": str, "sizes": [|X|, |Y|, |Z|], "table": [...]}`.
#[derive(Serialize, Deserialize)]
struct TableJson {
    name: String,
    sizes: [usize; 3],
    table: Vec<usize>,
}

impl TryFrom<TableJson> for FunctionTable {
    type Error = Error;

    fn try_from(j: TableJson) -> Result<Self> {
        let [x, y, z] = j.sizes;
        FunctionTable::new(j.name, x, y, z, j.table)
    }
}

impl From<FunctionTable> for TableJson {
    fn from(t: FunctionTable) -> Self {
        TableJson {
            name: t.name,
            sizes: [t.size_x, t.size_y, t.size_z],
            table: t.table,
        }
    }
}

impl FunctionTable {
    pub fn new(
        name: impl Into<String>,
        size_x: usize,
        size_y: usize,
        size_z: usize,
        table: Vec<usize>,
    ) -> Result<Self> {
        if size_x == 0 || size_y == 0 || size_z == 0 {
            return Err(Error::InvalidTable("sizes must be positive".into()));
        }
        if table.len() != size_x * size_y {
            return Err(Error::InvalidTable(format!(
                "table has {} entries, expected {}",
                table.len(),
                size_x * size_y
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v >= size_z) {
            return Err(Error::InvalidTable(format!("entry {v} is not below |Z| = {size_z}")));
        }
        Ok(FunctionTable {
            name: name.into(),
            size_x,
            size_y,
            size_z,
            table,
        })
    }

    pub fn from_fn(
        name: impl Into<String>,
        size_x: usize,
        size_y: usize,
        size_z: usize,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let table = (0..size_x)
            .flat_map(|x| (0..size_y).map(move |y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(name, size_x, size_y, size_z, table)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size_x(&self) -> usize {
        self.size_x
    }

    pub fn size_y(&self) -> usize {
        self.size_y
    }

    pub fn size_z(&self) -> usize {
        self.size_z
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.table[x * self.size_y + y]
    }

    pub fn row(&self, x: usize) -> &[usize] {
        &self.table[x * self.size_y..(x + 1) * self.size_y]
    }

    pub fn values(&self) -> &[usize] {
        &self.table
    }

    /// Whether some column differs between two rows.
    pub fn depends_on_x(&self) -> bool {
        (1..self.size_x).any(|x| self.row(x) != self.row(0))
    }

    /// Pairs `x < x'` with `f_x ≡ f_x'`; no query algorithm can tell these apart.
    pub fn identical_rows(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.size_x {
            for b in a + 1..self.size_x {
                if self.row(a) == self.row(b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Table restricted to the listed rows, in the given order.
    pub fn restrict_rows(&self, rows: &[usize], name: impl Into<String>) -> Result<Self> {
        let mut table = Vec::with_capacity(rows.len() * self.size_y);
        for &r in rows {
            if r >= self.size_x {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    size: self.size_x,
                });
            }
            table.extend_from_slice(self.row(r));
        }
        Self::new(name, rows.len(), self.size_y, self.size_z, table)
    }
}
