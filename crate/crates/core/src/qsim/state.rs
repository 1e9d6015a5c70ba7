use std::borrow::Cow;

use num_complex::Complex64;

use super::layout::RegisterLayout;
use super::unitary::{LocalUnitary, SparseOp};
use crate::entropy::Distribution;
use crate::error::{Error, Result};

/// Tolerance on `| ‖ψ‖ - 1 |` for normalized states.
pub const NORM_TOL: f64 = 1e-9;

/// A factor of a product state: joint amplitudes over the listed registers.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub registers: Vec<String>,
    pub amplitudes: Vec<Complex64>,
}

/// Dense amplitude vector over a [`RegisterLayout`].
#[derive(Debug, Clone)]
pub struct QState {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
    normalized: bool,
}

impl QState {
    /// All registers in `|0⟩` (pinned registers at their pinned value).
    ///
    /// Panics if `layout` is a declared layout over its cap.
    pub fn zero(layout: &RegisterLayout) -> Self {
        layout.check_cap().expect("layout within cap");
        let mut amps = vec![Complex64::default(); layout.total_dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        QState {
            layout: layout.clone(),
            amps,
            normalized: true,
        }
    }

    /// Basis state with the named registers set; unnamed registers hold 0.
    pub fn basis(layout: &RegisterLayout, values: &[(&str, usize)]) -> Result<Self> {
        layout.check_cap()?;
        let mut full: Vec<usize> = (0..layout.len())
            .map(|p| layout.pin_at(p).unwrap_or(0))
            .collect();
        for &(name, v) in values {
            full[layout.position(name)?] = v;
        }
        let idx = layout.index_of(&full)?;
        let mut amps = vec![Complex64::default(); layout.total_dim()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(QState {
            layout: layout.clone(),
            amps,
            normalized: true,
        })
    }

    /// Product state: each factor fixes the joint state of its registers, the
    /// remaining registers take the basis values in `values` (default 0).
    pub fn product(layout: &RegisterLayout, factors: &[Factor], values: &[(&str, usize)]) -> Result<Self> {
        layout.check_cap()?;
        let n = layout.len();
        let mut basis: Vec<Option<usize>> = vec![Some(0); n];
        for &(name, v) in values {
            let p = layout.position(name)?;
            let dim = layout.registers()[p].dim;
            if v >= dim {
                return Err(Error::ValueOutOfRange {
                    name: name.to_string(),
                    value: v,
                    dim,
                });
            }
            basis[p] = Some(v);
        }
        let mut fpos = Vec::with_capacity(factors.len());
        for f in factors {
            let pos = f
                .registers
                .iter()
                .map(|r| layout.position(r))
                .collect::<Result<Vec<_>>>()?;
            let dim: usize = pos.iter().map(|&p| layout.registers()[p].dim).product();
            if dim != f.amplitudes.len() {
                return Err(Error::DimensionMismatch(format!(
                    "factor over {:?} has {} amplitudes, expected {dim}",
                    f.registers,
                    f.amplitudes.len()
                )));
            }
            for &p in &pos {
                if basis[p].is_none() {
                    return Err(Error::DuplicateRegister(layout.registers()[p].name.clone()));
                }
                basis[p] = None;
            }
            fpos.push(pos);
        }
        let mut amps = vec![Complex64::default(); layout.total_dim()];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let mut a = Complex64::new(1.0, 0.0);
            for (p, b) in basis.iter().enumerate() {
                if let Some(b) = b {
                    if layout.value_at(idx, p) != *b {
                        a = Complex64::default();
                        break;
                    }
                }
            }
            if a == Complex64::default() {
                continue;
            }
            for (f, pos) in factors.iter().zip(&fpos) {
                let mut local = 0;
                for &p in pos {
                    local = local * layout.registers()[p].dim + layout.value_at(idx, p);
                }
                a *= f.amplitudes[local];
            }
            *amp = a;
        }
        let state = QState {
            layout: layout.clone(),
            amps,
            normalized: true,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    pub fn from_amplitudes(layout: &RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        let state = Self::unnormalized(layout, amps)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(QState {
            normalized: true,
            ..state
        })
    }

    /// A vector exempt from the unit-norm invariant (for example an error vector).
    pub fn unnormalized(layout: &RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        layout.check_cap()?;
        if amps.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        Ok(QState {
            layout: layout.clone(),
            amps,
            normalized: false,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitude of the basis state with the given register values.
    pub fn amplitude(&self, values: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.layout.index_of(values)?])
    }

    fn check_same(&self, other: &QState) -> Result<()> {
        if self.layout.same_space(&other.layout) {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(
                "states live on different register layouts".into(),
            ))
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QState) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self - other` as an unnormalized vector.
    pub fn difference(&self, other: &QState) -> Result<QState> {
        self.check_same(other)?;
        Ok(QState {
            layout: self.layout.clone(),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect(),
            normalized: false,
        })
    }

    /// Applies `u` to its target registers, identity elsewhere.
    pub fn apply(&self, u: &LocalUnitary) -> Result<QState> {
        let layout = &self.layout;
        let mut positions = Vec::with_capacity(u.targets().len());
        for (name, &dim) in u.targets().iter().zip(u.dims()) {
            let p = layout.position(name)?;
            let have = layout.registers()[p].dim;
            if have != dim {
                return Err(Error::DimensionMismatch(format!(
                    "gate expects `{name}` of dimension {dim}, layout has {have}"
                )));
            }
            positions.push(p);
        }
        let op: Cow<SparseOp> = if positions.iter().any(|&p| layout.pin_at(p).is_some()) {
            Cow::Owned(restrict_to_pins(u, &positions, layout)?)
        } else {
            Cow::Borrowed(&u.op)
        };
        let offs = layout.offsets(&positions);
        let bases = layout.complement_offsets(&positions);
        let mut out = vec![Complex64::default(); self.amps.len()];
        for &b in &bases {
            for (c, &oc) in offs.iter().enumerate() {
                let a = self.amps[b + oc];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for (r, v) in op.column(c) {
                    out[b + offs[r]] += v * a;
                }
            }
        }
        Ok(QState {
            layout: self.layout.clone(),
            amps: out,
            normalized: self.normalized,
        })
    }

    /// Applies a sequence of gates in order.
    pub fn apply_all<'a>(&self, gates: impl IntoIterator<Item = &'a LocalUnitary>) -> Result<QState> {
        let mut s = Cow::Borrowed(self);
        for g in gates {
            s = Cow::Owned(s.apply(g)?);
        }
        Ok(s.into_owned())
    }

    /// Born-rule distribution over joint outcomes of `registers`
    /// (mixed radix, first register most significant), marginalizing the rest.
    pub fn measure_distribution(&self, registers: &[&str]) -> Result<Distribution> {
        let positions = registers
            .iter()
            .map(|r| self.layout.position(r))
            .collect::<Result<Vec<_>>>()?;
        let dims: Vec<usize> = positions
            .iter()
            .map(|&p| self.layout.registers()[p].dim)
            .collect();
        let size: usize = dims.iter().product();
        let mut masses = vec![0.0; size];
        for (idx, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut outcome = 0;
            for (&pos, &d) in positions.iter().zip(&dims) {
                outcome = outcome * d + self.layout.value_at(idx, pos);
            }
            masses[outcome] += p;
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("state has zero norm".into()));
        }
        // absorb rounding accumulated across gates
        masses.iter_mut().for_each(|m| *m /= total);
        Distribution::new(masses)
    }
}

/// Euclidean norm of the amplitude difference.
pub fn l2_distance(a: &QState, b: &QState) -> Result<f64> {
    Ok(a.difference(b)?.norm())
}

/// Restricts a gate to the slice fixed by pinned target registers.
fn restrict_to_pins(u: &LocalUnitary, positions: &[usize], layout: &RegisterLayout) -> Result<SparseOp> {
    let dims = u.dims();
    let pins: Vec<Option<usize>> = positions.iter().map(|&p| layout.pin_at(p)).collect();
    let eff_dims: Vec<usize> = dims
        .iter()
        .zip(&pins)
        .map(|(&d, p)| if p.is_some() { 1 } else { d })
        .collect();
    let eff_dim: usize = eff_dims.iter().product();
    let weights: Vec<usize> = (0..dims.len()).map(|k| dims[k + 1..].iter().product()).collect();
    let eff_weights: Vec<usize> = (0..dims.len())
        .map(|k| eff_dims[k + 1..].iter().product())
        .collect();

    let mut col_ptr = Vec::with_capacity(eff_dim + 1);
    let mut rows = Vec::new();
    let mut vals = Vec::new();
    col_ptr.push(0);
    for e in 0..eff_dim {
        let mut full = 0;
        for k in 0..dims.len() {
            let d = match pins[k] {
                Some(v) => v,
                None => (e / eff_weights[k]) % eff_dims[k],
            };
            full += d * weights[k];
        }
        for (r, v) in u.op.column(full) {
            let mut er = 0;
            for k in 0..dims.len() {
                let d = (r / weights[k]) % dims[k];
                match pins[k] {
                    Some(p) if p != d => {
                        return Err(Error::PinnedRegisterModified(u.targets()[k].clone()));
                    }
                    Some(_) => {}
                    None => er += d * eff_weights[k],
                }
            }
            rows.push(er);
            vals.push(v);
        }
        col_ptr.push(rows.len());
    }
    Ok(SparseOp {
        dim: eff_dim,
        col_ptr,
        rows,
        vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{gates, Owner, Register};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn qubit() -> RegisterLayout {
        RegisterLayout::new(vec![Register::new("q", 2, Owner::Shared)]).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn identity_leaves_amplitudes() {
        let l = RegisterLayout::new(vec![
            Register::new("a", 3, Owner::Alice),
            Register::new("b", 2, Owner::Bob),
        ])
        .unwrap();
        let amps: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 0.5)).collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let s = QState::from_amplitudes(&l, amps.iter().map(|a| a / n).collect()).unwrap();
        let id = LocalUnitary::identity(&[("a", 3)]).unwrap();
        assert!(close(s.apply(&id).unwrap().amplitudes(), s.amplitudes()));
    }

    #[test]
    fn hadamard_on_zero() {
        let s = QState::zero(&qubit()).apply(&gates::hadamard("q")).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitudes(), &[h, h]));
    }

    #[test]
    fn increment_matches_index_permutation() {
        let l = RegisterLayout::new(vec![
            Register::new("p", 2, Owner::Shared),
            Register::new("t", 3, Owner::Shared),
        ])
        .unwrap();
        let amps: Vec<Complex64> = (0..6).map(|i| Complex64::new(1.0 + i as f64, -(i as f64))).collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let s = QState::from_amplitudes(&l, amps.iter().map(|a| a / n).collect()).unwrap();
        let out = s.apply(&gates::adder("t", 3, 1)).unwrap();
        // brute force: amplitude at (p, t) moves to (p, t+1 mod 3)
        let mut expected = vec![Complex64::default(); 6];
        for p in 0..2 {
            for t in 0..3 {
                expected[p * 3 + (t + 1) % 3] = s.amplitudes()[p * 3 + t];
            }
        }
        assert!(close(out.amplitudes(), &expected));
        let two = QState::basis(&l, &[("t", 2)]).unwrap();
        let wrapped = two.apply(&gates::adder("t", 3, 1)).unwrap();
        assert_eq!(wrapped.amplitude(&[0, 0]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn apply_errors() {
        let s = QState::zero(&qubit());
        assert!(matches!(
            s.apply(&gates::hadamard("nope")),
            Err(Error::UnknownRegister(_))
        ));
        let wide = gates::adder("q", 3, 1);
        assert!(matches!(s.apply(&wide), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn measurement_examples() {
        let zero = QState::zero(&qubit());
        assert_eq!(zero.measure_distribution(&["q"]).unwrap().masses(), &[1.0, 0.0]);
        let plus = zero.apply(&gates::hadamard("q")).unwrap();
        let m = plus.measure_distribution(&["q"]).unwrap();
        assert!((m.masses()[0] - 0.5).abs() < 1e-12 && (m.masses()[1] - 0.5).abs() < 1e-12);

        let l = RegisterLayout::new(vec![
            Register::new("a", 2, Owner::Alice),
            Register::new("b", 2, Owner::Bob),
        ])
        .unwrap();
        let bell = QState::zero(&l)
            .apply(&gates::hadamard("a"))
            .unwrap()
            .apply(&gates::cnot("a", "b"))
            .unwrap();
        let m = bell.measure_distribution(&["a", "b"]).unwrap();
        // amplitudes (1/√2, 0, 0, 1/√2) squared
        let want = [0.5, 0.0, 0.0, 0.5];
        assert!(m.masses().iter().zip(want).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn distance_examples() {
        let l = qubit();
        let zero = QState::zero(&l);
        let one = QState::basis(&l, &[("q", 1)]).unwrap();
        let plus = zero.apply(&gates::hadamard("q")).unwrap();
        assert_eq!(l2_distance(&zero, &zero).unwrap(), 0.0);
        assert!((l2_distance(&zero, &one).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        // (1 - 1/√2, -1/√2): squared norm 2 - √2
        let want = (2.0 - 2f64.sqrt()).sqrt();
        assert!((l2_distance(&zero, &plus).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn distance_requires_same_layout() {
        let other = RegisterLayout::new(vec![Register::new("r", 2, Owner::Shared)]).unwrap();
        assert!(l2_distance(&QState::zero(&qubit()), &QState::zero(&other)).is_err());
    }

    #[test]
    fn pinned_register_acts_as_control() {
        let l = RegisterLayout::new(vec![
            Register::new("c", 2, Owner::Alice),
            Register::new("t", 2, Owner::Bob),
        ])
        .unwrap();
        let pinned = l.pin("c", 1).unwrap();
        let s = QState::zero(&pinned).apply(&gates::cnot("c", "t")).unwrap();
        assert_eq!(s.amplitude(&[1, 1]).unwrap(), Complex64::new(1.0, 0.0));
        let err = QState::zero(&pinned).apply(&gates::cnot("t", "c"));
        // rejected even though t = 0 here: the restriction is checked on every column
        assert!(matches!(err, Err(Error::PinnedRegisterModified(_))));
    }

    #[test]
    fn product_state_builds_bell_pair() {
        let l = RegisterLayout::new(vec![
            Register::new("x", 3, Owner::Alice),
            Register::new("a", 2, Owner::Alice),
            Register::new("b", 2, Owner::Bob),
        ])
        .unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::default();
        let bell = Factor {
            registers: vec!["a".into(), "b".into()],
            amplitudes: vec![h, z, z, h],
        };
        let s = QState::product(&l, &[bell], &[("x", 2)]).unwrap();
        assert_eq!(s.amplitude(&[2, 0, 0]).unwrap(), h);
        assert_eq!(s.amplitude(&[2, 1, 1]).unwrap(), h);
        assert_eq!(s.amplitude(&[1, 1, 1]).unwrap(), z);
    }
}
