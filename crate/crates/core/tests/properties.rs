use std::sync::Arc;

use ndarray::{array, Array2};
use num_complex::Complex64;
use proptest::prelude::*;
use qtradeoff::entropy::{h_max, min_support_set, Distribution};
use qtradeoff::ftab::{chi_value, make_chi, make_oracle, FunctionTable};
use qtradeoff::osearch::gt_bound;
use qtradeoff::qsim::{l2_distance, tv_distance, LocalUnitary, Owner, QState, Register, RegisterLayout};

fn layout() -> RegisterLayout {
    RegisterLayout::new(vec![
        Register::new("a", 2, Owner::Shared),
        Register::new("b", 3, Owner::Shared),
        Register::new("c", 2, Owner::Shared),
    ])
    .unwrap()
}

fn amps(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_filter_map("nonzero", |v| {
        let a: Vec<Complex64> = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
        let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (n > 1e-3).then(|| a.into_iter().map(|z| z / n).collect())
    })
}

fn su2(t: f64, p: f64, q: f64) -> Array2<Complex64> {
    let a = Complex64::from_polar(t.cos(), p);
    let b = Complex64::from_polar(t.sin(), q);
    array![[a, -b.conj()], [b, a.conj()]]
}

/// Random unitary on ("b", "c"): a qubit rotation on `c` chosen by `b`, then a
/// phased cyclic shift of `b` chosen by `c`.
fn random_unitary(angles: &[f64]) -> Vec<LocalUnitary> {
    let rot = LocalUnitary::multiplexed(&[("b", 3)], &[("c", 2)], |v| {
        su2(angles[3 * v], angles[3 * v + 1], angles[3 * v + 2])
    })
    .unwrap();
    let shift = LocalUnitary::monomial(&[("c", 2), ("b", 3)], |i| {
        let (c, b) = (i / 3, i % 3);
        (c * 3 + (b + c) % 3, Complex64::from_polar(1.0, angles[9 + i]))
    })
    .unwrap();
    let mix = LocalUnitary::multiplexed(&[("c", 2)], &[("a", 2)], |v| {
        su2(angles[15 + 3 * v], angles[16 + 3 * v], angles[17 + 3 * v])
    })
    .unwrap();
    vec![rot, shift, mix]
}

fn angles() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..std::f64::consts::TAU, 21)
}

fn distribution(max: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0u32..100, 1..=max).prop_filter_map("positive total", |w| {
        let total: u32 = w.iter().sum();
        (total > 0).then(|| {
            Distribution::new(w.iter().map(|&v| v as f64 / total as f64).collect::<Vec<_>>())
                .ok()
        })?
    })
}

proptest! {
    #[test]
    fn unitaries_preserve_norm(a in amps(12), th in angles()) {
        let s = QState::from_amplitudes(&layout(), a).unwrap();
        let out = s.apply_all(&random_unitary(&th)).unwrap();
        prop_assert!((out.norm() - s.norm()).abs() <= 1e-9);
        let d = out.measure_distribution(&["a", "c"]).unwrap();
        prop_assert!(d.masses().iter().all(|&m| m >= 0.0));
        prop_assert!((d.masses().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn adjoint_undoes(a in amps(12), th in angles()) {
        let s = QState::from_amplitudes(&layout(), a).unwrap();
        let us = random_unitary(&th);
        let inv: Vec<LocalUnitary> = us.iter().rev().map(LocalUnitary::adjoint).collect();
        let back = s.apply_all(&us).unwrap().apply_all(&inv).unwrap();
        prop_assert!(l2_distance(&back, &s).unwrap() <= 1e-8);
        for u in &us {
            prop_assert!(u.unitarity_defect() <= 1e-9);
        }
    }

    #[test]
    fn measurement_distance_is_bounded(a in amps(12), b in amps(12), th in angles()) {
        let l = layout();
        let (s, t) = (QState::from_amplitudes(&l, a).unwrap(), QState::from_amplitudes(&l, b).unwrap());
        let d = l2_distance(&s, &t).unwrap();
        let basis = random_unitary(&th);
        let (s, t) = (s.apply_all(&basis).unwrap(), t.apply_all(&basis).unwrap());
        for regs in [&["a"][..], &["b", "c"], &["a", "b", "c"]] {
            let tv = tv_distance(
                &s.measure_distribution(regs).unwrap(),
                &t.measure_distribution(regs).unwrap(),
            )
            .unwrap();
            prop_assert!(tv <= 4.0 * d + 1e-12, "tv {} vs d {}", tv, d);
        }
    }

    #[test]
    fn entropy_monotone_in_eps(mu in distribution(12), e1 in 0.0f64..0.99, e2 in 0.0f64..0.99) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(h_max(&mu, lo).unwrap() >= h_max(&mu, hi).unwrap());
        prop_assert_eq!(h_max(&mu, 0.0).unwrap(), (mu.support_size() as f64).log2());
    }

    #[test]
    fn greedy_set_is_smallest(mu in distribution(10), eps in 0.0f64..0.99) {
        let k = min_support_set(&mu, eps).unwrap().len();
        let n = mu.len();
        let best = (1u32..1 << n)
            .filter(|s| {
                let m: f64 = (0..n).filter(|i| s >> i & 1 == 1).map(|i| mu.mass(i)).sum();
                m >= 1.0 - eps - 1e-12
            })
            .map(|s| s.count_ones() as usize)
            .min()
            .unwrap();
        prop_assert_eq!(k, best);
    }

    #[test]
    fn gt_bound_monotone(e1 in 2u32..40, e2 in 2u32..40, c1 in 0.05f64..1.95, c2 in 0.05f64..1.95) {
        let (n1, n2) = (1u64 << e1.min(e2), 1u64 << e1.max(e2));
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        prop_assert!(gt_bound(n1, lo).unwrap().t <= gt_bound(n2, lo).unwrap().t);
        prop_assert!(gt_bound(n1, lo).unwrap().t <= gt_bound(n1, hi).unwrap().t);
    }

    #[test]
    fn oracle_has_order_z(
        (ny, nz, table) in (2usize..6, 2usize..5)
            .prop_flat_map(|(ny, nz)| (Just(ny), Just(nz), prop::collection::vec(0..nz, 2 * ny))),
        a in amps(30),
    ) {
        let f = Arc::new(FunctionTable::new("r", 2, ny, nz, table).unwrap());
        let regs = vec![Register::new("y", ny, Owner::Shared), Register::new("a", nz, Owner::Shared)];
        let l = RegisterLayout::new(regs).unwrap();
        let v = &a[..ny * nz];
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let s = QState::from_amplitudes(&l, v.iter().map(|z| z / n).collect()).unwrap();
        for x in 0..2 {
            let u = make_oracle(&f, x).unwrap().local_unitary(&[("y", ny)], ("a", nz)).unwrap();
            prop_assert!(u.entries().iter().all(|&(_, _, v)| v == Complex64::new(1.0, 0.0)));
            let out = s.apply_all(&vec![u; nz]).unwrap();
            prop_assert!(l2_distance(&out, &s).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn character_is_multiplicative() {
    for q in [3u64, 5, 7, 11, 13] {
        let chi = make_chi(q).unwrap();
        let q = q as usize;
        for x in 0..q {
            for y in 0..q {
                assert_eq!(chi_value(chi[x]) * chi_value(chi[y]), chi_value(chi[x * y % q]), "q={q}");
            }
        }
    }
}
