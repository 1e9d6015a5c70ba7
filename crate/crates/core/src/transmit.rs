//! Transmitting `x` by running a query algorithm whose queries are answered
//! by a communication protocol, and the qubit lower-bound check.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::comm::{encoded_send, CommProtocol, ProtocolKind};
use crate::entropy::{h_max, min_support_set, Distribution};
use crate::error::{Error, Result};
use crate::ftab::{make_oracle, FunctionTable};
use crate::oip::QueryAlgorithm;
use crate::qsim::{
    l2_distance, LocalUnitary, Op, OracleSlot, Owner, QState, Register, RegisterLayout, DEFAULT_DIM_CAP,
};

/// Slack added to the drift and failure bounds.
pub const BOUND_SLACK: f64 = 1e-8;

/// Anything that moves `x ~ mu` from Alice to Bob.
pub trait Transmission {
    fn qubits_a_to_b(&self) -> usize;
    /// `mu`-average probability that Bob ends with the wrong `x`.
    fn failure(&self) -> f64;
}

#[derive(Debug, Clone, Serialize)]
pub struct TransmissionReport {
    pub protocol: String,
    #[serde(rename = "T")]
    pub queries: usize,
    pub epsilon: f64,
    pub qubits_a_to_b: usize,
    pub qubits_b_to_a: usize,
    /// `Pr[Bob's output ≠ x]` per `x` for the simulated transmission.
    pub per_x_failure: Vec<f64>,
    /// Same for the query algorithm with a perfect oracle (`γ_x`).
    pub per_x_oip_failure: Vec<f64>,
    /// `drift[x][i-1]`: ℓ₂ distance from the ideal state after `i` queries.
    pub drift: Vec<Vec<f64>>,
    pub failure: f64,
    pub oip_failure: f64,
    pub max_drift: f64,
    /// `2|Z|²√ε`, the allowed drift per query.
    pub drift_per_query: f64,
    /// `oip_failure + 8|Z|²√ε·T`.
    pub failure_bound: f64,
    pub drift_ok: bool,
    pub failure_ok: bool,
}

impl Transmission for TransmissionReport {
    fn qubits_a_to_b(&self) -> usize {
        self.qubits_a_to_b
    }

    fn failure(&self) -> f64 {
        self.failure
    }
}

/// Global register order: Alice's input, the protocol's own registers, the
/// query registers, the answer register, the algorithm's other registers,
/// and its output register.
struct Composition {
    layout: RegisterLayout,
    gates: Vec<LocalUnitary>,
}

fn compose(alg: &QueryAlgorithm, p: &CommProtocol, cap: usize) -> Result<Composition> {
    let pl = p.layout();
    let al = alg.layout();
    if p.bob_inputs().len() != alg.query().len() {
        return Err(Error::LayoutMismatch(format!(
            "protocol has {} input registers for Bob, algorithm queries {}",
            p.bob_inputs().len(),
            alg.query().len()
        )));
    }
    let mut map = HashMap::new();
    for (b, q) in p.bob_inputs().iter().zip(alg.query()) {
        if pl.dim(b)? != al.dim(q)? {
            return Err(Error::LayoutMismatch(format!("`{b}` and `{q}` differ in dimension")));
        }
        map.insert(b.clone(), q.clone());
    }
    if pl.dim(p.output())? != al.dim(alg.answer())? {
        return Err(Error::LayoutMismatch("output and answer registers differ in dimension".into()));
    }
    map.insert(p.output().to_string(), alg.answer().to_string());

    let own: Vec<Register> = pl
        .registers()
        .iter()
        .filter(|r| r.name != p.alice_input() && !map.contains_key(&r.name))
        .cloned()
        .collect();
    let mut regs = vec![pl.register(p.alice_input())?.clone()];
    regs.extend(own);
    let as_bob = |name: &str| -> Result<Register> { Ok(Register::new(name, al.dim(name)?, Owner::Bob)) };
    for q in alg.query() {
        regs.push(as_bob(q)?);
    }
    regs.push(as_bob(alg.answer())?);
    for r in al.registers() {
        let n = r.name.as_str();
        if !alg.query().iter().any(|q| q == n) && n != alg.answer() && n != alg.output() {
            regs.push(as_bob(n)?);
        }
    }
    regs.push(as_bob(alg.output())?);
    let names: Vec<&str> = regs.iter().map(|r| r.name.as_str()).collect();
    if let Some(clash) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
        return Err(Error::DuplicateRegister(clash.1.to_string()));
    }
    let layout = RegisterLayout::declared(regs, cap)?;
    let gates = p.gates().map(|g| g.renamed(&map)).collect();
    Ok(Composition { layout, gates })
}

/// Runs `alg` on Bob's side, answering each query by running the
/// (approximately) clean protocol `p`, side by side with the ideal run.
pub fn compose_transmission(alg: &QueryAlgorithm, p: &CommProtocol, mu: &Distribution) -> Result<TransmissionReport> {
    compose_transmission_with_cap(alg, p, mu, DEFAULT_DIM_CAP)
}

/// [`compose_transmission`] with an explicit cap on the global state size.
pub fn compose_transmission_with_cap(
    alg: &QueryAlgorithm,
    p: &CommProtocol,
    mu: &Distribution,
    cap: usize,
) -> Result<TransmissionReport> {
    if !matches!(p.kind(), ProtocolKind::Clean | ProtocolKind::ApproxClean) {
        return Err(Error::InvalidProtocol(format!(
            "`{}` is not a compiled protocol",
            p.name()
        )));
    }
    let f = p.target();
    alg.check_table(f)?;
    if mu.len() != f.size_x() {
        return Err(Error::DimensionMismatch(format!(
            "distribution over {} outcomes, |X| = {}",
            mu.len(),
            f.size_x()
        )));
    }
    let comp = compose(alg, p, cap)?;
    let queries = alg.queries();
    let per_x: Vec<(f64, f64, Vec<f64>)> = (0..f.size_x())
        .into_par_iter()
        .map(|x| simulate(alg, p, &comp, x))
        .collect::<Result<_>>()?;

    let eps = p.declared_error();
    let z = f.size_z() as f64;
    let drift_per_query = 2.0 * z * z * eps.sqrt();
    type PerX = (f64, f64, Vec<f64>);
    let avg = |v: &dyn Fn(&PerX) -> f64| -> f64 {
        per_x.iter().zip(mu.masses()).map(|(r, m)| v(r) * m).sum()
    };
    let failure = avg(&|r| r.0);
    let oip_failure = avg(&|r| r.1);
    let failure_bound = oip_failure + 8.0 * z * z * eps.sqrt() * queries as f64;
    let drift: Vec<Vec<f64>> = per_x.iter().map(|r| r.2.clone()).collect();
    let drift_ok = drift.iter().all(|d| {
        d.iter()
            .enumerate()
            .all(|(i, &v)| v <= drift_per_query * (i + 1) as f64 + BOUND_SLACK)
    });
    let ledger = p.ledger();
    Ok(TransmissionReport {
        protocol: p.name().to_string(),
        queries,
        epsilon: eps,
        qubits_a_to_b: ledger.a_to_b * queries,
        qubits_b_to_a: ledger.b_to_a * queries,
        per_x_failure: per_x.iter().map(|r| r.0).collect(),
        per_x_oip_failure: per_x.iter().map(|r| r.1).collect(),
        max_drift: drift.iter().flatten().copied().fold(0.0, f64::max),
        drift,
        failure,
        oip_failure,
        drift_per_query,
        failure_bound,
        drift_ok,
        failure_ok: failure <= failure_bound + BOUND_SLACK,
    })
}

/// Returns `(failure, ideal failure, drift after each query)` for hidden `x`.
fn simulate(alg: &QueryAlgorithm, p: &CommProtocol, comp: &Composition, x: usize) -> Result<(f64, f64, Vec<f64>)> {
    let layout = comp.layout.pin(p.alice_input(), x)?;
    let start = QState::product(&layout, p.shared(), &[(p.alice_input(), x)])?;
    let mut actual = start.clone();
    let mut ideal = start;
    let mut oracle = make_oracle(p.target(), x)?;
    let mut drift = Vec::new();
    for op in alg.circuit().ops() {
        match op {
            Op::Gate { unitary, .. } => {
                actual = actual.apply(unitary)?;
                ideal = ideal.apply(unitary)?;
            }
            Op::Oracle { targets, .. } => {
                actual = actual.apply_all(&comp.gates)?;
                ideal = oracle.apply_oracle(ideal, targets)?;
                drift.push(l2_distance(&actual, &ideal)?);
            }
        }
    }
    let out = [alg.output()];
    let fail = |s: &QState| -> Result<f64> {
        Ok((1.0 - s.measure_distribution(&out)?.mass(x)).max(0.0))
    };
    Ok((fail(&actual)?, fail(&ideal)?, drift))
}

/// Verdict of `qubits_a_to_b ≥ ½·H_max^ε(mu)`.
#[derive(Debug, Clone, Serialize)]
pub struct NsVerdict {
    pub qubits_a_to_b: usize,
    pub epsilon: f64,
    pub h_max: f64,
    pub bound: f64,
    pub margin: f64,
    pub passed: bool,
}

/// Checks the qubit lower bound for transmitting `x ~ mu` with failure `eps_achieved`.
pub fn check_ns_bound(report: &impl Transmission, mu: &Distribution, eps_achieved: f64) -> Result<NsVerdict> {
    if report.failure() > eps_achieved + 1e-9 {
        return Err(Error::FailureExceedsDeclared {
            measured: report.failure(),
            declared: eps_achieved,
        });
    }
    let h = h_max(mu, eps_achieved)?;
    let bound = 0.5 * h;
    let q = report.qubits_a_to_b();
    Ok(NsVerdict {
        qubits_a_to_b: q,
        epsilon: eps_achieved,
        h_max: h,
        bound,
        margin: q as f64 - bound,
        passed: q as f64 >= bound - 1e-9,
    })
}

/// A protocol whose target is `f(x, ·) = x`, viewed as a transmission.
#[derive(Debug, Clone, Serialize)]
pub struct DirectTransmission {
    pub protocol: String,
    pub qubits_a_to_b: usize,
    pub per_x_failure: Vec<f64>,
    pub failure: f64,
}

impl Transmission for DirectTransmission {
    fn qubits_a_to_b(&self) -> usize {
        self.qubits_a_to_b
    }

    fn failure(&self) -> f64 {
        self.failure
    }
}

pub fn direct_transmission(p: &CommProtocol, mu: &Distribution) -> Result<DirectTransmission> {
    let f = p.target();
    if f.size_y() != 1 || (0..f.size_x()).any(|x| f.get(x, 0) != x) {
        return Err(Error::InvalidArgument(format!("`{}` does not output Alice's input", f.name())));
    }
    if mu.len() != f.size_x() {
        return Err(Error::DimensionMismatch(format!(
            "distribution over {} outcomes, |X| = {}",
            mu.len(),
            f.size_x()
        )));
    }
    let per_x = p.failures()?;
    let failure = per_x.iter().zip(mu.masses()).map(|(f, m)| f * m).sum();
    Ok(DirectTransmission {
        protocol: p.name().to_string(),
        qubits_a_to_b: p.ledger().a_to_b,
        per_x_failure: per_x,
        failure,
    })
}

/// Superdense transmission of only the most likely outcomes.
///
/// Alice sends the rank of `x` within [`min_support_set`]`(mu, eps)`; Bob
/// fails exactly on the outcomes outside that set.
pub fn superdense_compressed_send(mu: &Distribution, eps: f64) -> Result<(CommProtocol, DirectTransmission)> {
    let set = min_support_set(mu, eps)?;
    let n = mu.len();
    let mut rank = vec![0; n];
    for (k, &x) in set.iter().enumerate() {
        rank[x] = k;
    }
    let f = std::sync::Arc::new(FunctionTable::from_fn(
        format!("identity({n})"),
        n,
        1,
        n,
        |x, _| x,
    )?);
    let p = encoded_send(&f, &[], set.len(), |x| rank[x], |m| set.get(m).copied())?;
    let report = direct_transmission(&p, mu)?;
    Ok((p, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::{compile_approx_clean, compile_clean, composed_protocol, inject_noise, superdense_send};
    use crate::ftab::make_composed;
    use crate::oip::bv_oip;

    #[test]
    fn exact_transmission() {
        let f = make_composed(2, 2, DEFAULT_DIM_CAP).unwrap();
        let p = compile_clean(&composed_protocol(&f).unwrap()).unwrap();
        let alg = bv_oip(&f).unwrap();
        let mu = Distribution::uniform(16).unwrap();
        let r = compose_transmission(&alg, &p, &mu).unwrap();
        assert!(r.max_drift < 1e-9);
        assert!(r.failure < 1e-9);
        // (⌈n/2⌉ + ⌈½ log q⌉) qubits per query, q = 2 queries
        assert_eq!(r.qubits_a_to_b, 4);
        let v = check_ns_bound(&r, &mu, r.failure).unwrap();
        assert!(v.passed);
        assert!((v.bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_transmission_respects_bounds() {
        let f = make_composed(1, 2, DEFAULT_DIM_CAP).unwrap();
        let noisy = inject_noise(&composed_protocol(&f).unwrap(), 0.01).unwrap();
        let (p, _) = compile_approx_clean(&noisy).unwrap();
        let alg = bv_oip(&f).unwrap();
        let r = compose_transmission(&alg, &p, &Distribution::uniform(4).unwrap()).unwrap();
        assert!(r.max_drift > 0.0);
        assert!(r.drift_ok && r.failure_ok);
    }

    #[test]
    fn rejects_uncompiled() {
        let f = make_composed(1, 1, DEFAULT_DIM_CAP).unwrap();
        let p = composed_protocol(&f).unwrap();
        let alg = bv_oip(&f).unwrap();
        assert!(compose_transmission(&alg, &p, &Distribution::uniform(2).unwrap()).is_err());
    }

    #[test]
    fn compressed_examples() {
        let mu = Distribution::uniform(8).unwrap();
        let (p, r) = superdense_compressed_send(&mu, 0.5).unwrap();
        assert_eq!(p.ledger().a_to_b, 1);
        assert!((r.failure - 0.5).abs() < 1e-12);
        assert!(check_ns_bound(&r, &mu, r.failure).unwrap().passed);

        let mu = Distribution::new(vec![0.5, 0.3, 0.1, 0.1]).unwrap();
        let (p, r) = superdense_compressed_send(&mu, 0.4).unwrap();
        assert_eq!(p.ledger().a_to_b, 1);
        assert!((r.failure - 0.2).abs() < 1e-12);

        let mu = Distribution::point_mass(4, 2).unwrap();
        let (p, r) = superdense_compressed_send(&mu, 0.0).unwrap();
        assert_eq!(p.ledger().a_to_b, 0);
        assert_eq!(r.failure, 0.0);
        assert!(check_ns_bound(&r, &mu, 0.0).unwrap().passed);
    }

    #[test]
    fn superdense_meets_bound() {
        for n in 1..=5 {
            let mu = Distribution::uniform(1 << n).unwrap();
            let t = direct_transmission(&superdense_send(n).unwrap(), &mu).unwrap();
            let v = check_ns_bound(&t, &mu, 0.0).unwrap();
            assert!(v.passed);
            assert_eq!(v.margin, if n % 2 == 0 { 0.0 } else { 0.5 });
        }
    }

    #[test]
    fn failure_must_not_exceed_claim() {
        let mu = Distribution::uniform(8).unwrap();
        let (_, r) = superdense_compressed_send(&mu, 0.5).unwrap();
        assert!(check_ns_bound(&r, &mu, 0.1).is_err());
    }
}
