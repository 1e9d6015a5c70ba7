//! Named gate constructors used throughout the crate.

use ndarray::array;
use num_complex::Complex64;

use super::LocalUnitary;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn hadamard(q: &str) -> LocalUnitary {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    LocalUnitary::from_matrix(&[(q, 2)], &array![[c(s), c(s)], [c(s), c(-s)]])
        .expect("hadamard is unitary")
}

pub fn pauli_x(q: &str) -> LocalUnitary {
    LocalUnitary::permutation(&[(q, 2)], |i| i ^ 1).expect("X is a permutation")
}

pub fn pauli_z(q: &str) -> LocalUnitary {
    LocalUnitary::monomial(&[(q, 2)], |i| (i, c(if i == 1 { -1.0 } else { 1.0 })))
        .expect("Z is monomial")
}

pub fn cnot(control: &str, target: &str) -> LocalUnitary {
    LocalUnitary::permutation(&[(control, 2), (target, 2)], |i| {
        if i & 2 != 0 {
            i ^ 1
        } else {
            i
        }
    })
    .expect("CNOT is a permutation")
}

pub fn toffoli(c1: &str, c2: &str, target: &str) -> LocalUnitary {
    LocalUnitary::permutation(&[(c1, 2), (c2, 2), (target, 2)], |i| {
        if i & 6 == 6 {
            i ^ 1
        } else {
            i
        }
    })
    .expect("Toffoli is a permutation")
}

/// `|a⟩ -> |a + k mod dim⟩`.
pub fn adder(reg: &str, dim: usize, k: usize) -> LocalUnitary {
    LocalUnitary::permutation(&[(reg, dim)], |a| (a + k) % dim).expect("shift is a permutation")
}

/// `|s⟩|d⟩ -> |s⟩|d + s mod ddim⟩`.
pub fn add_into(src: (&str, usize), dst: (&str, usize)) -> LocalUnitary {
    let ddim = dst.1;
    LocalUnitary::permutation(&[src, dst], |i| {
        let (s, d) = (i / ddim, i % ddim);
        s * ddim + (d + s) % ddim
    })
    .expect("controlled shift is a permutation")
}
