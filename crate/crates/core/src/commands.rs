//! The operations behind each CLI subcommand, returning reports.

use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::comm::{
    ceil_log2, compile_approx_clean, compile_clean, composed_protocol, inject_noise, local_protocol,
    send_input_protocol, CommProtocol,
};
use crate::entropy::{h_max, min_support_set, Distribution};
use crate::error::{Error, Result};
use crate::ftab::{make_composed, make_gt, make_ps_prime, FunctionTable};
use crate::oip::{bv_oip, evaluate_oip};
use crate::osearch::{gt_bound, reduce_query, SearchRestriction};
use crate::report::{Check, Num, VerificationReport};
use crate::transmit::{check_ns_bound, compose_transmission_with_cap, TransmissionReport};

/// Slack for "probability 1" and "exactly clean".
pub const EXACT_TOL: f64 = 1e-9;
/// Slack for ℓ₂ comparisons against exact targets.
pub const L2_TOL: f64 = 1e-8;

/// `⌈½ log₂ q⌉`.
pub fn half_log_ceil(q: usize) -> usize {
    ceil_log2(q).div_ceil(2)
}

fn add_transmission(r: &mut VerificationReport, t: &TransmissionReport, mu: &Distribution) -> Result<()> {
    r.measure("transmission_qubits_a_to_b", t.qubits_a_to_b)
        .measure("transmission_qubits_b_to_a", t.qubits_b_to_a)
        .measure_num("transmission_failure", t.failure)
        .measure_num("oip_failure", t.oip_failure)
        .measure_num("max_drift", t.max_drift);
    let worst_ratio = t
        .drift
        .iter()
        .flat_map(|d| d.iter().enumerate().map(|(i, &v)| v - t.drift_per_query * (i + 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    r.check(Check::le(
        "drift",
        "max over x, i of drift_i(x) - 2|Z|²√ε·i <= 1e-8",
        worst_ratio.max(0.0),
        L2_TOL,
    ));
    r.check(Check::le(
        "transmission_failure",
        "mu-average failure <= mu-average OIP failure + 8|Z|²√ε·T + 1e-8",
        t.failure,
        t.failure_bound + L2_TOL,
    ));
    if t.failure < 1.0 {
        let v = check_ns_bound(t, mu, t.failure)?;
        r.check(Check::ge(
            "qubit_lower_bound",
            "qubits A->B >= ½·H_max^ε(mu) - 1e-9 at the measured failure ε",
            v.qubits_a_to_b as f64,
            v.bound - 1e-9,
        ));
    }
    Ok(())
}

/// Query algorithm, communication protocol and their composition for the
/// composed function on `{0,1}^{nq}`.
pub fn cmd_verify_composed(n: usize, q: usize, cap: usize) -> Result<VerificationReport> {
    if n == 0 || q == 0 {
        return Err(Error::InvalidArgument("n and q must be at least 1".into()));
    }
    let mut r = VerificationReport::new(format!("composed(n={n},q={q})"), cap);
    r.config("n", n).config("q", q);
    let f = make_composed(n, q, cap)?;
    let size_x = f.table().size_x();
    let log_x = (n * q) as f64;
    let mu = Distribution::uniform(size_x)?;

    let alg = bv_oip(&f)?;
    let oip = evaluate_oip(&alg, f.table(), &mu)?;
    r.measure("queries", oip.queries)
        .measure_num("oip_worst_failure", oip.worst_failure);
    r.check(Check::eq("queries", "oracle calls == q", oip.queries, q));
    r.check(Check::le("oip_exact", "max_x Pr[output != x] <= 1e-9", oip.worst_failure, EXACT_TOL));

    let p0 = composed_protocol(&f)?.with_cap(cap)?;
    let ledger = p0.ledger();
    let fail = p0.worst_failure()?;
    r.measure("protocol_a_to_b", ledger.a_to_b)
        .measure("protocol_b_to_a", ledger.b_to_a)
        .measure_num("protocol_worst_failure", fail);
    r.check(Check::eq("a_to_b", "qubits A->B == ⌈n/2⌉", ledger.a_to_b, n.div_ceil(2)));
    r.check(Check::eq("b_to_a", "qubits B->A == ⌈½ log₂ q⌉", ledger.b_to_a, half_log_ceil(q)));
    r.check(Check::le("protocol_exact", "max_{x,y} Pr[output != f(x,y)] <= 1e-9", fail, EXACT_TOL));

    let product = (ledger.total() * oip.queries) as f64;
    r.measure("qcc_times_qoip", ledger.total() * oip.queries);
    r.check(Check::ge(
        "tradeoff_lower",
        "Qcc·Qoip >= ½ log₂|X| (measured upper bounds)",
        product,
        0.5 * log_x,
    ));
    let q_f = q as f64;
    r.check(Check::le(
        "tradeoff_upper",
        "Qcc·Qoip <= ½nq + q·(½ + ⌈½ log₂ q⌉)",
        product,
        0.5 * log_x + q_f * (0.5 + half_log_ceil(q) as f64),
    ));

    let composed = compile_clean(&p0).and_then(|clean| compose_transmission_with_cap(&alg, &clean, &mu, cap));
    match composed {
        Ok(t) => add_transmission(&mut r, &t, &mu)?,
        Err(Error::CapExceeded { dim, cap }) => {
            r.note(format!(
                "transmission simulation skipped: {dim} amplitudes exceed the cap of {cap}"
            ));
        }
        Err(e) => return Err(e),
    }
    Ok(r)
}

/// One point of the tradeoff curve for `log₂|X| = log_x`.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub q: usize,
    /// `⌈log_x / q⌉` blocks.
    pub n: usize,
    /// `log_x / (2q)`.
    pub curve: Num,
    /// `⌈n/2⌉ + ⌈½ log₂ q⌉`.
    pub achieved: usize,
    /// `⌈log_x / (2q)⌉`.
    pub min_integer: usize,
}

pub fn tradeoff_curve(log_x: usize, qs: RangeInclusive<usize>) -> Result<Vec<CurveRow>> {
    if log_x == 0 {
        return Err(Error::InvalidArgument("log|X| must be at least 1".into()));
    }
    if qs.is_empty() || *qs.start() == 0 {
        return Err(Error::InvalidArgument("q range must be nonempty and start at 1 or more".into()));
    }
    Ok(qs
        .map(|q| {
            let n = log_x.div_ceil(q);
            CurveRow {
                q,
                n,
                curve: Num(log_x as f64 / (2 * q) as f64),
                achieved: n.div_ceil(2) + half_log_ceil(q),
                min_integer: log_x.div_ceil(2 * q),
            }
        })
        .collect())
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from("q,n,curve,achieved,min_integer\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.q, r.n, r.curve, r.achieved, r.min_integer));
    }
    s
}

pub fn cmd_tradeoff_curve(
    log_x: usize,
    qs: RangeInclusive<usize>,
    cap: usize,
) -> Result<(VerificationReport, Vec<CurveRow>)> {
    let rows = tradeoff_curve(log_x, qs.clone())?;
    let mut r = VerificationReport::new(format!("tradeoff_curve(logX={log_x})"), cap);
    r.config("log_x", log_x).config("q_min", qs.start()).config("q_max", qs.end());
    for row in &rows {
        r.check(Check::ge(
            format!("q={}", row.q),
            "achieved >= logX/(2q)",
            row.achieved as f64,
            row.curve.0,
        ));
    }
    r.measure("points", &rows);
    Ok((r, rows))
}

/// Exact protocols shipped for quick checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `f ≡ 2` on `|X| = 2`, `|Y| = 2`, `|Z| = 3`, no communication.
    Constant,
    /// `GT` on `[4]`, Alice superdense-codes `x`.
    Gt4,
    /// Composed function with `n = 2`, `q = 2`.
    Composed22,
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Builtin::Constant),
            "gt4" => Ok(Builtin::Gt4),
            "composed22" => Ok(Builtin::Composed22),
            _ => Err(Error::InvalidArgument(format!(
                "unknown protocol `{s}` (expected constant, gt4 or composed22)"
            ))),
        }
    }
}

pub fn builtin_protocol(b: Builtin) -> Result<CommProtocol> {
    match b {
        Builtin::Constant => {
            let c = Arc::new(FunctionTable::new("constant", 2, 2, 3, vec![2; 4])?);
            local_protocol(&c, &[("y", 2)])
        }
        Builtin::Gt4 => send_input_protocol(&Arc::new(make_gt(4)?), &[("y", 4)]),
        Builtin::Composed22 => composed_protocol(&make_composed(2, 2, crate::qsim::DEFAULT_DIM_CAP)?),
    }
}

/// Compiles an exact protocol cleanly and checks it on every basis input.
pub fn cmd_verify_clean(p0: &CommProtocol, cap: usize) -> Result<VerificationReport> {
    let mut r = VerificationReport::new(format!("clean[{}]", p0.name()), cap);
    let p = compile_clean(&p0.clone().with_cap(cap)?)?;
    let dev = p.max_clean_deviation()?;
    let (l0, l) = (p0.ledger(), p.ledger());
    r.measure_num("max_clean_deviation", dev)
        .measure("p0_ledger", l0)
        .measure("compiled_ledger", l);
    r.check(Check::le(
        "clean",
        "max over x, y, a of ‖U|x,y,φ,a⟩ - |x,y,φ,a+f(x,y)⟩‖₂ <= 1e-8",
        dev,
        L2_TOL,
    ));
    r.check(Check::eq(
        "ledger",
        "compiled A->B == p0 A->B + p0 B->A",
        l.a_to_b,
        l0.a_to_b + l0.b_to_a,
    ));
    Ok(r)
}

/// Exact superdense fixture with injected noise: `GT` on `[4]` for `|Z| = 2`,
/// `PS'` over `F_3` for `|Z| = 3`.
pub fn noisy_fixture(z: usize, eps: f64) -> Result<CommProtocol> {
    let p = match z {
        2 => send_input_protocol(&Arc::new(make_gt(4)?), &[("y", 4)])?,
        3 => send_input_protocol(&Arc::new(make_ps_prime(3)?), &[("y", 3)])?,
        _ => return Err(Error::InvalidArgument(format!("no fixture with |Z| = {z}"))),
    };
    inject_noise(&p, eps)
}

pub fn cmd_verify_approx(p0: &CommProtocol, cap: usize) -> Result<VerificationReport> {
    let mut r = VerificationReport::new(format!("approx_clean[{}]", p0.name()), cap);
    let (_, a) = compile_approx_clean(&p0.clone().with_cap(cap)?)?;
    r.measure_num("epsilon", a.epsilon)
        .measure_num("max_error_norm", a.max_norm)
        .measure_num("max_cross_y_overlap", a.max_overlap);
    r.check(Check::le(
        "error_norm",
        "max ‖error_{x,y,a}‖₂ <= 2|Z|√ε + 1e-8",
        a.max_norm,
        a.bound + L2_TOL,
    ));
    r.check(Check::le(
        "orthogonality",
        "max over y != y' of |⟨error_{x,y,a}|error_{x,y',a}⟩| <= 1e-9",
        a.max_overlap,
        EXACT_TOL,
    ));
    Ok(r)
}

/// Bernstein–Vazirani transmission over an `eps`-noisy compiled protocol.
pub fn cmd_verify_transmit(n: usize, q: usize, eps: f64, cap: usize) -> Result<VerificationReport> {
    let f = make_composed(n, q, cap)?;
    let p0 = composed_protocol(&f)?.with_cap(cap)?;
    let p = if eps == 0.0 {
        compile_clean(&p0)?
    } else {
        compile_approx_clean(&inject_noise(&p0, eps)?)?.0
    };
    let mu = Distribution::uniform(f.table().size_x())?;
    let t = compose_transmission_with_cap(&bv_oip(&f)?, &p, &mu, cap)?;
    let mut r = VerificationReport::new(format!("transmit(n={n},q={q},eps={eps})"), cap);
    r.config("n", n).config("q", q).config("epsilon", Num(eps));
    add_transmission(&mut r, &t, &mu)?;
    Ok(r)
}

pub fn cmd_entropy(mu: &Distribution, eps: f64, cap: usize) -> Result<VerificationReport> {
    let mut r = VerificationReport::new("h_max", cap);
    r.config("epsilon", Num(eps));
    let set = min_support_set(mu, eps)?;
    let mass: f64 = set.iter().map(|&i| mu.mass(i)).sum();
    r.measure_num("h_max", h_max(mu, eps)?)
        .measure("support", &set)
        .measure_num("support_mass", mass);
    r.check(Check::ge(
        "coverage",
        "mass of the support set >= 1 - ε - 1e-12",
        mass,
        1.0 - eps - crate::entropy::MASS_TOL,
    ));
    Ok(r)
}

pub fn cmd_gt(n: u64, c: f64, cap: usize) -> Result<VerificationReport> {
    let b = gt_bound(n, c)?;
    let mut r = VerificationReport::new(format!("gt_bound(N={n})"), cap);
    r.config("c", Num(c));
    r.measure("T", b.t).measure_num("threshold", b.threshold);
    let log = (n as f64).log2();
    let lhs = |t: u64| (log.log2() + (t as f64).log2()) * t as f64;
    r.check(Check::ge("T_satisfies", "(log log N + log T)·T >= c·log N", lhs(b.t), c * log - 1e-12));
    if b.t > 1 {
        r.check(Check::le(
            "T_minimal",
            "(log log N + log (T-1))·(T-1) < c·log N",
            lhs(b.t - 1),
            c * log,
        ));
    }
    Ok(r)
}

/// Truth tables of the ordered-search reduction for every `j`, as a report and CSV.
pub fn cmd_reduce_dump(n: usize, s: Vec<usize>, cap: usize) -> Result<(VerificationReport, String)> {
    let restriction = SearchRestriction::new(n, s)?;
    let mut r = VerificationReport::new(format!("reduce(N={n})"), cap);
    r.config("S", restriction.elements());
    let mut csv = String::from("j,s_j,y,a,out,expected,exact,oracle_calls\n");
    let (mut wrong, mut calls_off) = (0usize, 0usize);
    for j in 1..=restriction.n_prime() {
        let red = reduce_query(&restriction, j)?;
        let sj = restriction.element(j)?;
        for row in red.truth_table()? {
            let out = row.out.map_or("mixed".to_string(), |v| v.to_string());
            csv.push_str(&format!(
                "{j},{sj},{},{},{out},{},{},{}\n",
                row.y, row.a, row.expected, row.exact, row.oracle_calls
            ));
            wrong += usize::from(!row.exact);
            calls_off += usize::from(row.oracle_calls != 2);
        }
    }
    r.check(Check::eq("exact", "rows not equal to |y,0,0,0,a ⊕ GT(s_j,y)⟩ == 0", wrong, 0));
    r.check(Check::eq("oracle_calls", "rows without exactly 2 oracle calls == 0", calls_off, 0));
    Ok((r, csv))
}
