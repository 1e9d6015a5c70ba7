//! Dense state-vector simulation over named qudit registers.

mod circuit;
pub mod gates;
mod layout;
mod state;
mod unitary;

pub use circuit::{Circuit, NoOracle, Op, OracleSlot};
pub use layout::{Owner, Register, RegisterLayout, DEFAULT_DIM_CAP};
pub use state::{l2_distance, Factor, QState, NORM_TOL};
pub use unitary::{LocalUnitary, UNITARY_TOL};

use crate::entropy::Distribution;
use crate::error::{Error, Result};

/// Total variation distance `½ Σ |p - q|`.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "outcome spaces of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5
        * p.masses()
            .iter()
            .zip(q.masses())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Largest ℓ₂ deviation between `a` and `b` over every basis input of `layout`.
pub fn max_basis_deviation(layout: &RegisterLayout, a: &[LocalUnitary], b: &[LocalUnitary]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for idx in 0..layout.total_dim() {
        let values = layout.values_of(idx);
        let names: Vec<(&str, usize)> = layout
            .registers()
            .iter()
            .map(|r| r.name.as_str())
            .zip(values)
            .collect();
        let s = QState::basis(layout, &names)?;
        let d = l2_distance(&s.apply_all(a)?, &s.apply_all(b)?)?;
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: &[f64]) -> Distribution {
        Distribution::new(m.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&d(&[0.5, 0.5]), &d(&[0.5, 0.5])).unwrap(), 0.0);
        assert_eq!(tv_distance(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 1.0);
        // ½(|0.5-0.8| + |0.5-0.2|)
        assert!((tv_distance(&d(&[0.5, 0.5]), &d(&[0.8, 0.2])).unwrap() - 0.3).abs() < 1e-12);
        assert!(tv_distance(&d(&[1.0]), &d(&[0.5, 0.5])).is_err());
    }
}
