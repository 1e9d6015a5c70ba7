//! Noise injection and repetition.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64;

use super::{CommProtocol, ProtocolKind, ProtocolParts, Round};
use crate::error::{Error, Result};
use crate::qsim::gates::add_into;
use crate::qsim::{Factor, LocalUnitary, Owner, Register, RegisterLayout};

/// Makes an exact protocol fail with probability exactly `eps` on every input.
///
/// Bob copies the output value `v` into a fresh register and, controlled on
/// it, rotates the output by `θ` (with `sin²θ = eps`) in the plane spanned by
/// `|v⟩` and `|v + 1 mod |Z|⟩`.
pub fn inject_noise(p: &CommProtocol, eps: f64) -> Result<CommProtocol> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::BadEpsilon(eps));
    }
    let failure = p.worst_failure()?;
    if p.declared_error() > 0.0 || failure > 1e-9 {
        return Err(Error::NotExact { failure });
    }
    if eps == 0.0 {
        return Ok(p.clone());
    }
    let out = p.output();
    let nz = p.target().size_z();
    let noise = format!("{out}.noise");
    let (s, c) = (eps.sqrt(), (1.0 - eps).sqrt());
    let rotation = LocalUnitary::multiplexed(&[(&noise, nz)], &[(out, nz)], |v| {
        let mut m = Array2::<Complex64>::eye(nz);
        let w = (v + 1) % nz;
        m[[v, v]] = Complex64::new(c, 0.0);
        m[[w, w]] = Complex64::new(c, 0.0);
        m[[w, v]] = Complex64::new(s, 0.0);
        m[[v, w]] = Complex64::new(-s, 0.0);
        m
    })?;
    let gates = vec![add_into((out, nz), (&noise, nz)), rotation];
    let mut rounds = p.rounds().to_vec();
    match rounds.last_mut() {
        Some(r) if r.actor == Owner::Bob => r.gates.extend(gates),
        _ => rounds.push(Round::new(Owner::Bob, gates, vec![])),
    }
    let layout = p.layout().extended(vec![Register::new(noise, nz, Owner::Bob)])?;
    CommProtocol::new(ProtocolParts {
        name: format!("noisy[{}; {eps}]", p.name()),
        layout,
        alice_input: p.alice_input().to_string(),
        bob_inputs: p.bob_inputs().to_vec(),
        output: out.to_string(),
        shared: p.shared().to_vec(),
        rounds,
        declared_error: eps,
        target: p.target().clone(),
        kind: ProtocolKind::Plain,
    })
}

/// `Pr[Bin(k, eps) ≥ (k+1)/2]`: the chance that a strict majority of `k` runs fail.
pub fn binomial_tail(k: usize, eps: f64) -> f64 {
    let mut total = 0.0;
    for i in k.div_ceil(2)..=k {
        let mut choose = 1.0;
        for t in 0..i {
            choose = choose * (k - t) as f64 / (t + 1) as f64;
        }
        total += choose * eps.powi(i as i32) * (1.0 - eps).powi((k - i) as i32);
    }
    total
}

/// Smallest most frequent value among `votes`.
fn plurality(votes: &[usize], nz: usize) -> usize {
    let mut counts = vec![0usize; nz];
    for &v in votes {
        counts[v] += 1;
    }
    let mut best = 0;
    for (v, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = v;
        }
    }
    best
}

/// Runs `p` on `k` disjoint copies of its work registers and adds the
/// plurality of the `k` outputs (ties to the smallest value) into the output.
pub fn amplify(p: &CommProtocol, k: usize) -> Result<CommProtocol> {
    if k.is_multiple_of(2) {
        return Err(Error::EvenRepetitions(k));
    }
    if k == 1 {
        return Ok(p.clone());
    }
    let inputs: Vec<&str> = std::iter::once(p.alice_input())
        .chain(p.bob_inputs().iter().map(String::as_str))
        .collect();
    for g in p.gates() {
        if let Some(r) = inputs.iter().find(|r| !g.preserves_register(r)) {
            return Err(Error::InvalidProtocol(format!("a gate writes to input `{r}`")));
        }
    }
    let out = p.output();
    if p.owner_after(out)? != Owner::Bob {
        return Err(Error::InvalidProtocol("output register does not end with Bob".into()));
    }
    let nz = p.target().size_z();
    let l = p.layout();
    let mut registers: Vec<Register> = l
        .registers()
        .iter()
        .filter(|r| inputs.contains(&r.name.as_str()))
        .cloned()
        .collect();
    let mut rounds = Vec::new();
    let mut shared = Vec::new();
    let mut votes = Vec::with_capacity(k);
    for b in 0..k {
        let map: HashMap<String, String> = l
            .registers()
            .iter()
            .filter(|r| !inputs.contains(&r.name.as_str()))
            .map(|r| (r.name.clone(), format!("{}#{b}", r.name)))
            .collect();
        let rn = |s: &String| map.get(s).cloned().unwrap_or_else(|| s.clone());
        registers.extend(
            l.registers()
                .iter()
                .filter(|r| map.contains_key(&r.name))
                .map(|r| Register::new(rn(&r.name), r.dim, r.owner)),
        );
        rounds.extend(p.rounds().iter().map(|r| Round {
            actor: r.actor,
            gates: r.gates.iter().map(|g| g.renamed(&map)).collect(),
            moves: r.moves.iter().map(rn).collect(),
        }));
        shared.extend(p.shared().iter().map(|f| Factor {
            registers: f.registers.iter().map(rn).collect(),
            amplitudes: f.amplitudes.clone(),
        }));
        votes.push(format!("{out}#{b}"));
    }
    registers.push(Register::new(out, nz, Owner::Bob));
    let mut targets: Vec<(&str, usize)> = votes.iter().map(|v| (v.as_str(), nz)).collect();
    targets.push((out, nz));
    let vote_gate = LocalUnitary::permutation(&targets, |i| {
        let (vs, o) = (i / nz, i % nz);
        let mut digits = Vec::with_capacity(k);
        let mut rest = vs;
        for _ in 0..k {
            digits.push(rest % nz);
            rest /= nz;
        }
        i - o + (o + plurality(&digits, nz)) % nz
    })?;
    rounds.push(Round::new(Owner::Bob, vec![vote_gate], vec![]));
    CommProtocol::new(ProtocolParts {
        name: format!("amplified[{}; k={k}]", p.name()),
        layout: RegisterLayout::declared(registers, l.cap())?,
        alice_input: p.alice_input().to_string(),
        bob_inputs: p.bob_inputs().to_vec(),
        output: out.to_string(),
        shared,
        rounds,
        declared_error: binomial_tail(k, p.declared_error()),
        target: p.target().clone(),
        kind: ProtocolKind::Amplified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::send_input_protocol;
    use crate::ftab::{make_gt, make_ps_prime};
    use std::sync::Arc;

    #[test]
    fn tail_values() {
        assert!((binomial_tail(3, 1.0 / 3.0) - 7.0 / 27.0).abs() < 1e-15);
        assert!((binomial_tail(1, 0.2) - 0.2).abs() < 1e-15);
        assert_eq!(binomial_tail(5, 0.0), 0.0);
    }

    #[test]
    fn plurality_ties_go_low() {
        assert_eq!(plurality(&[2, 1, 0], 3), 0);
        assert_eq!(plurality(&[2, 1, 2], 3), 2);
    }

    #[test]
    fn noise_is_exact() {
        let gt = Arc::new(make_gt(3).unwrap());
        let p = send_input_protocol(&gt, &[("y", 3)]).unwrap();
        assert!(inject_noise(&p, 1.0).is_err());
        assert_eq!(inject_noise(&p, 0.0).unwrap().rounds().len(), p.rounds().len());
        let noisy = inject_noise(&p, 0.25).unwrap();
        for f in noisy.failures().unwrap() {
            assert!((f - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn ternary_noise() {
        let f = Arc::new(make_ps_prime(3).unwrap());
        let p = send_input_protocol(&f, &[("y", 3)]).unwrap();
        let noisy = inject_noise(&p, 0.1).unwrap();
        for f in noisy.failures().unwrap() {
            assert!((f - 0.1).abs() < 1e-9);
        }
    }

    #[test]
    fn three_repetitions() {
        let gt = Arc::new(make_gt(2).unwrap());
        let p = inject_noise(&send_input_protocol(&gt, &[("y", 2)]).unwrap(), 1.0 / 3.0).unwrap();
        assert!(matches!(amplify(&p, 2), Err(Error::EvenRepetitions(2))));
        let a = amplify(&p, 3).unwrap();
        assert_eq!(a.ledger().a_to_b, 3 * p.ledger().a_to_b);
        for f in a.failures().unwrap() {
            assert!((f - 7.0 / 27.0).abs() < 1e-9);
        }
        assert!((a.declared_error() - 7.0 / 27.0).abs() < 1e-15);
    }
}
