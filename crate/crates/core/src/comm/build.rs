//! Concrete protocols built from superdense coding.

use std::sync::Arc;

use num_complex::Complex64;

use super::{CommProtocol, ProtocolKind, ProtocolParts, Round};
use crate::error::{Error, Result};
use crate::ftab::{ComposedFunction, FunctionTable};
use crate::qsim::gates::{cnot, hadamard};
use crate::qsim::{Factor, LocalUnitary, Owner, Register, RegisterLayout, DEFAULT_DIM_CAP};

/// `⌈log₂ d⌉`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(d: usize) -> usize {
    if d <= 1 {
        0
    } else {
        (usize::BITS - (d - 1).leading_zeros()) as usize
    }
}

/// `(|00⟩ + |11⟩)/√2` on two qubits.
pub fn bell_factor(a: &str, b: &str) -> Factor {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::default();
    Factor {
        registers: vec![a.to_string(), b.to_string()],
        amplitudes: vec![h, z, z, h],
    }
}

/// `pairs` Bell pairs named `{prefix}{p}.a` (sender's half) and `{prefix}{p}.b`.
struct Channel {
    prefix: String,
    pairs: usize,
    sender: Owner,
}

impl Channel {
    fn for_bits(prefix: &str, bits: usize, sender: Owner) -> Self {
        Channel {
            prefix: prefix.to_string(),
            pairs: bits.div_ceil(2),
            sender,
        }
    }

    fn half(&self, p: usize, side: char) -> String {
        format!("{}{p}.{side}", self.prefix)
    }

    fn registers(&self) -> Vec<Register> {
        (0..self.pairs)
            .flat_map(|p| {
                [
                    Register::new(self.half(p, 'a'), 2, self.sender),
                    Register::new(self.half(p, 'b'), 2, self.sender.other()),
                ]
            })
            .collect()
    }

    fn factors(&self) -> Vec<Factor> {
        (0..self.pairs)
            .map(|p| bell_factor(&self.half(p, 'a'), &self.half(p, 'b')))
            .collect()
    }

    fn moves(&self) -> Vec<String> {
        (0..self.pairs).map(|p| self.half(p, 'a')).collect()
    }

    /// Encodes `message(i)` (bit `2p` as Z, bit `2p+1` as X on pair `p`), where
    /// `i` is the joint value of `src`.
    fn encode(&self, src: &[(&str, usize)], message: impl Fn(usize) -> usize) -> Result<Vec<LocalUnitary>> {
        let mut gates = Vec::with_capacity(self.pairs);
        for p in 0..self.pairs {
            let half = self.half(p, 'a');
            let mut targets = src.to_vec();
            targets.push((half.as_str(), 2));
            gates.push(LocalUnitary::monomial(&targets, |i| {
                let (s, h) = (i / 2, i % 2);
                let m = message(s);
                let (zb, xb) = ((m >> (2 * p)) & 1, (m >> (2 * p + 1)) & 1);
                let sign = if zb & h == 1 { -1.0 } else { 1.0 };
                (s * 2 + (h ^ xb), Complex64::new(sign, 0.0))
            })?);
        }
        Ok(gates)
    }

    /// Leaves bit `2p` in `.a` and bit `2p+1` in `.b`.
    fn decode(&self) -> Vec<LocalUnitary> {
        (0..self.pairs)
            .flat_map(|p| {
                let (a, b) = (self.half(p, 'a'), self.half(p, 'b'));
                [cnot(&a, &b), hadamard(&a)]
            })
            .collect()
    }

    /// Decoded bit registers, most significant bit first, for `bits` bits.
    fn bit_registers(&self, bits: usize) -> Vec<String> {
        (0..bits)
            .rev()
            .map(|k| self.half(k / 2, if k % 2 == 0 { 'a' } else { 'b' }))
            .collect()
    }
}

fn with_dims(names: &[String]) -> Vec<(&str, usize)> {
    names.iter().map(|n| (n.as_str(), 2)).collect()
}

fn bob_input_dims<'a>(bob_inputs: &'a [(&'a str, usize)], f: &FunctionTable) -> Result<usize> {
    let ydim: usize = bob_inputs.iter().map(|b| b.1).product();
    if ydim != f.size_y() {
        return Err(Error::DimensionMismatch(format!(
            "Bob's inputs span {ydim} values, |Y| = {}",
            f.size_y()
        )));
    }
    Ok(ydim)
}

/// `out += f(m, y) mod |Z|` on `(message bits…, bob inputs…, out)`; identity for `m ≥ |X|`.
fn compute_gate(
    bits: &[String],
    bob_inputs: &[(&str, usize)],
    out: &str,
    f: &FunctionTable,
    message_to_x: impl Fn(usize) -> Option<usize>,
) -> Result<LocalUnitary> {
    let (ny, nz) = (f.size_y(), f.size_z());
    let mut targets = with_dims(bits);
    targets.extend_from_slice(bob_inputs);
    targets.push((out, nz));
    LocalUnitary::permutation(&targets, |i| {
        let (m, y, o) = (i / (ny * nz), (i / nz) % ny, i % nz);
        match message_to_x(m) {
            Some(x) => i - o + (o + f.get(x, y)) % nz,
            None => i,
        }
    })
}

/// Alice sends `x` by superdense coding; Bob adds `f(x, y)` into his output.
pub fn send_input_protocol(f: &Arc<FunctionTable>, bob_inputs: &[(&str, usize)]) -> Result<CommProtocol> {
    let nx = f.size_x();
    encoded_send(f, bob_inputs, nx, |x| x, |m| (m < nx).then_some(m))
}

/// Alice superdense-codes `encode(x) ∈ [0, messages)`; Bob adds `f(decode(m), y)`.
pub(crate) fn encoded_send(
    f: &Arc<FunctionTable>,
    bob_inputs: &[(&str, usize)],
    messages: usize,
    encode: impl Fn(usize) -> usize,
    decode: impl Fn(usize) -> Option<usize>,
) -> Result<CommProtocol> {
    bob_input_dims(bob_inputs, f)?;
    let bits = ceil_log2(messages);
    let ch = Channel::for_bits("e", bits, Owner::Alice);
    let mut regs = vec![Register::new("x", f.size_x(), Owner::Alice)];
    regs.extend(bob_inputs.iter().map(|&(n, d)| Register::new(n, d, Owner::Bob)));
    regs.push(Register::new("out", f.size_z(), Owner::Bob));
    regs.extend(ch.registers());
    let layout = RegisterLayout::declared(regs, DEFAULT_DIM_CAP)?;

    let mut rounds = Vec::new();
    if bits > 0 {
        rounds.push(Round::new(
            Owner::Alice,
            ch.encode(&[("x", f.size_x())], encode)?,
            ch.moves(),
        ));
    }
    let mut bob = ch.decode();
    bob.push(compute_gate(&ch.bit_registers(bits), bob_inputs, "out", f, decode)?);
    rounds.push(Round::new(Owner::Bob, bob, vec![]));
    CommProtocol::new(ProtocolParts {
        name: format!("superdense[{}]", f.name()),
        layout,
        alice_input: "x".into(),
        bob_inputs: bob_inputs.iter().map(|b| b.0.to_string()).collect(),
        output: "out".into(),
        shared: ch.factors(),
        rounds,
        declared_error: 0.0,
        target: Arc::clone(f),
        kind: ProtocolKind::Plain,
    })
}

/// Transmits an `n`-bit string with `⌈n/2⌉` qubits; the target is the identity on `{0,1}^n`.
pub fn superdense_send(n: usize) -> Result<CommProtocol> {
    if n == 0 || n > 20 {
        return Err(Error::InvalidArgument(format!("message length {n} outside 1..=20")));
    }
    let size = 1usize << n;
    let f = Arc::new(FunctionTable::from_fn(format!("identity({n} bits)"), size, 1, size, |x, _| x)?);
    Ok(send_input_protocol(&f, &[])?.with_name(format!("superdense_send({n})")))
}

/// Zero-communication protocol for an `f` that ignores `x`.
pub fn local_protocol(f: &Arc<FunctionTable>, bob_inputs: &[(&str, usize)]) -> Result<CommProtocol> {
    bob_input_dims(bob_inputs, f)?;
    if f.depends_on_x() {
        return Err(Error::InvalidProtocol(format!("`{}` depends on Alice's input", f.name())));
    }
    let mut regs = vec![Register::new("x", f.size_x(), Owner::Alice)];
    regs.extend(bob_inputs.iter().map(|&(n, d)| Register::new(n, d, Owner::Bob)));
    regs.push(Register::new("out", f.size_z(), Owner::Bob));
    let layout = RegisterLayout::declared(regs, DEFAULT_DIM_CAP)?;
    let gate = compute_gate(&[], bob_inputs, "out", f, |_| Some(0))?;
    CommProtocol::new(ProtocolParts {
        name: format!("local[{}]", f.name()),
        layout,
        alice_input: "x".into(),
        bob_inputs: bob_inputs.iter().map(|b| b.0.to_string()).collect(),
        output: "out".into(),
        shared: vec![],
        rounds: vec![Round::new(Owner::Bob, vec![gate], vec![])],
        declared_error: 0.0,
        target: Arc::clone(f),
        kind: ProtocolKind::Plain,
    })
}

/// Two-message protocol for the composed function.
///
/// Bob sends `j` with `⌈½ log q⌉` qubits, Alice answers with the `n` bits
/// `x_1j … x_nj` using `⌈n/2⌉` qubits, and Bob adds `Σ y_i x_ij mod 2`.
pub fn composed_protocol(f: &ComposedFunction) -> Result<CommProtocol> {
    let (n, q) = (f.n(), f.q());
    let table = f.table();
    let jbits = ceil_log2(q);
    let jch = Channel::for_bits("j", jbits, Owner::Bob);
    let wch = Channel::for_bits("w", n, Owner::Alice);
    let query = f.query_registers();
    let bob_inputs: Vec<(&str, usize)> = query.iter().map(|(r, d)| (r.as_str(), *d)).collect();

    let mut regs = vec![Register::new("x", table.size_x(), Owner::Alice)];
    regs.extend(bob_inputs.iter().map(|&(r, d)| Register::new(r, d, Owner::Bob)));
    regs.push(Register::new("out", 2, Owner::Bob));
    regs.extend(jch.registers());
    regs.extend(wch.registers());
    let layout = RegisterLayout::declared(regs, DEFAULT_DIM_CAP)?;

    let mut rounds = Vec::new();
    if q > 1 {
        rounds.push(Round::new(Owner::Bob, jch.encode(&[("j", q)], |j| j)?, jch.moves()));
    }
    let mut alice = jch.decode();
    let jregs = jch.bit_registers(jbits);
    let mut src = vec![("x", table.size_x())];
    src.extend(with_dims(&jregs));
    let rows = f.rows().to_vec();
    let jspan = 1usize << jbits;
    alice.extend(wch.encode(&src, |i| {
        let (x, j) = (i / jspan, i % jspan);
        if j >= q {
            return 0;
        }
        (1..=n).fold(0, |m, row_i| m | (f.bit(rows[x], row_i, j + 1) << (row_i - 1)))
    })?);
    rounds.push(Round::new(Owner::Alice, alice, wch.moves()));

    let mut bob = wch.decode();
    let wregs = wch.bit_registers(n);
    let ybits: Vec<(&str, usize)> = bob_inputs.iter().copied().filter(|b| b.0 != "j").collect();
    let mut targets = with_dims(&wregs);
    targets.extend_from_slice(&ybits);
    targets.push(("out", 2));
    bob.push(LocalUnitary::permutation(&targets, |i| {
        let (w, y) = (i >> (n + 1), (i >> 1) & ((1 << n) - 1));
        // bit i-1 of w is x_ij; y_1 is the most significant bit of y
        let parity = (1..=n).fold(0, |acc, k| acc ^ ((w >> (k - 1)) & (y >> (n - k)) & 1));
        i ^ parity
    })?);
    rounds.push(Round::new(Owner::Bob, bob, vec![]));

    let mut shared = jch.factors();
    shared.extend(wch.factors());
    CommProtocol::new(ProtocolParts {
        name: format!("composed_protocol(n={n},q={q})"),
        layout,
        alice_input: "x".into(),
        bob_inputs: bob_inputs.iter().map(|b| b.0.to_string()).collect(),
        output: "out".into(),
        shared,
        rounds,
        declared_error: 0.0,
        target: Arc::clone(table),
        kind: ProtocolKind::Plain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftab::{make_composed, make_gt};
    use crate::qsim::DEFAULT_DIM_CAP;

    #[test]
    fn log_ceilings() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn superdense_two_bits() {
        let p = superdense_send(2).unwrap();
        assert_eq!(p.ledger().a_to_b, 1);
        assert_eq!(p.shared().len(), 1);
        for x in 0..4 {
            let d = p.run(x, 0, 0).unwrap().measure_distribution(&["out"]).unwrap();
            assert!((d.mass(x) - 1.0).abs() < 1e-12);
        }
        assert_eq!(superdense_send(1).unwrap().ledger().a_to_b, 1);
    }

    #[test]
    fn superdense_four_bits() {
        let p = superdense_send(4).unwrap();
        assert_eq!(p.ledger().a_to_b, 2);
        assert!(p.worst_failure().unwrap() < 1e-12);
    }

    #[test]
    fn gt_protocol_is_exact() {
        let gt = Arc::new(make_gt(4).unwrap());
        let p = send_input_protocol(&gt, &[("y", 4)]).unwrap();
        assert_eq!(p.ledger().a_to_b, 1);
        assert!(p.worst_failure().unwrap() < 1e-12);
    }

    #[test]
    fn composed_protocol_counts() {
        let f = make_composed(2, 2, DEFAULT_DIM_CAP).unwrap();
        let p = composed_protocol(&f).unwrap();
        assert_eq!(p.ledger().a_to_b, 1);
        assert_eq!(p.ledger().b_to_a, 1);
        assert!(p.worst_failure().unwrap() < 1e-12);
        let f = make_composed(3, 1, DEFAULT_DIM_CAP).unwrap();
        let p = composed_protocol(&f).unwrap();
        assert_eq!(p.ledger().b_to_a, 0);
        assert_eq!(p.ledger().a_to_b, 2);
        assert!(p.worst_failure().unwrap() < 1e-12);
    }

    #[test]
    fn local_needs_x_independence() {
        let gt = Arc::new(make_gt(3).unwrap());
        assert!(local_protocol(&gt, &[("y", 3)]).is_err());
        let c = Arc::new(FunctionTable::new("c", 2, 1, 3, vec![2, 2]).unwrap());
        let p = local_protocol(&c, &[]).unwrap();
        assert!(p.worst_failure().unwrap() < 1e-12);
        assert_eq!(p.ledger().total(), 0);
    }
}
