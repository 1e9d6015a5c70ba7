//! Finite distributions and smooth max-entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ masses = 1`, and slack when testing `mass ≥ 1 - ε`.
pub const MASS_TOL: f64 = 1e-12;

/// Probability masses over outcomes `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct Distribution {
    masses: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    masses: Vec<f64>,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        Distribution::new(raw.masses)
    }
}

impl Distribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some(m) = masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidDistribution(format!("mass {m} is negative or not finite")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(Distribution { masses })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        Ok(Distribution {
            masses: vec![1.0 / n as f64; n],
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::IndexOutOfRange { index: at, size: n });
        }
        let mut masses = vec![0.0; n];
        masses[at] = 1.0;
        Ok(Distribution { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, outcome: usize) -> f64 {
        self.masses.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|&&m| m > 0.0).count()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::BadEpsilon(eps))
    }
}

/// Smallest outcome set carrying mass at least `1 - eps`.
///
/// Outcomes are taken greedily by descending mass, ties by ascending index, and
/// returned in that order. The stopping test is `mass ≥ 1 - eps - 1e-12`.
pub fn min_support_set(mu: &Distribution, eps: f64) -> Result<Vec<usize>> {
    check_eps(eps)?;
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| mu.masses[b].total_cmp(&mu.masses[a]).then(a.cmp(&b)));
    let target = 1.0 - eps - MASS_TOL;
    let mut acc = 0.0;
    let mut set = Vec::new();
    for i in order {
        if acc >= target {
            break;
        }
        acc += mu.masses[i];
        set.push(i);
    }
    Ok(set)
}

/// `H_max^eps(mu)` in bits: log₂ of the size of [`min_support_set`].
pub fn h_max(mu: &Distribution, eps: f64) -> Result<f64> {
    let set = min_support_set(mu, eps)?;
    Ok((set.len().max(1) as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: &[f64]) -> Distribution {
        Distribution::new(m.to_vec()).unwrap()
    }

    #[test]
    fn uniform_half_smoothing() {
        for k in 1..=6 {
            let mu = Distribution::uniform(1 << k).unwrap();
            assert_eq!(h_max(&mu, 0.5).unwrap(), (k - 1) as f64);
        }
    }

    #[test]
    fn point_mass_is_zero() {
        let mu = Distribution::point_mass(5, 3).unwrap();
        for eps in [0.0, 0.1, 0.9] {
            assert_eq!(h_max(&mu, eps).unwrap(), 0.0);
            assert_eq!(min_support_set(&mu, eps).unwrap(), vec![3]);
        }
    }

    #[test]
    fn greedy_examples() {
        // {0.5, 0.3} reaches 0.8 >= 0.6
        let mu = d(&[0.5, 0.3, 0.1, 0.1]);
        assert_eq!(min_support_set(&mu, 0.4).unwrap(), vec![0, 1]);
        assert_eq!(h_max(&mu, 0.4).unwrap(), 1.0);
        let mu = d(&[0.4, 0.4, 0.2]);
        assert_eq!(min_support_set(&mu, 0.2).unwrap(), vec![0, 1]);
        let mu = Distribution::uniform(8).unwrap();
        assert_eq!(min_support_set(&mu, 0.5).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn zero_smoothing_counts_support() {
        let mu = d(&[0.25, 0.0, 0.5, 0.25, 0.0]);
        assert_eq!(h_max(&mu, 0.0).unwrap(), 3f64.log2());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![]).is_err());
        let mu = Distribution::uniform(2).unwrap();
        assert!(matches!(h_max(&mu, 1.0), Err(Error::BadEpsilon(_))));
        assert!(matches!(h_max(&mu, -0.1), Err(Error::BadEpsilon(_))));
    }

    #[test]
    fn json_roundtrip_validates() {
        let mu: Distribution = serde_json::from_str(r#"{"masses": [0.25, 0.75]}"#).unwrap();
        assert_eq!(mu.masses(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<Distribution>(r#"{"masses": [0.25, 0.5]}"#).is_err());
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(s, r#"{"masses":[0.25,0.75]}"#);
    }
}
