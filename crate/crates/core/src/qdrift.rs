//! The qDRIFT randomized compiler.
//!
//! Every gate is `exp(iτ·s_j P_j)` with the same angle `τ = λt/N`; the term
//! index `j` is drawn i.i.d. with probability `h_j/λ`. The averaged channel
//! of `N` such gates is within `(2λ²t²/N)·e^{2λt/N}` of `exp(itH)` in
//! diamond distance, which fixes `N` for a target precision.
//!
//! Circuits serialize to the `qdrift-circ v1` text format:
//!
//! ```text
//! # qdrift-circ v1
//! # seed=7
//! # N=2002
//! # tau=4.9950049950049951e-4
//! # t=1.0000000000000000e0
//! # eps=1.0000000000000000e-3
//! # lambda=1.0000000000000000e0
//! # mode=exact
//! # n_qubits=2
//! ROT 0 +ZZ 4.9950049950049951e-4
//! CROT 1 -XI 4.9950049950049951e-4
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::format::sci;
use crate::hamiltonian::{Hamiltonian, PauliAxis, PauliString};
use crate::sampling::{AliasTable, SeededRng};

/// Largest gate count returned as an exact integer. Beyond `2^53` the bound
/// at `N` and `N - 1` is no longer distinguishable in `f64`.
pub const MAX_EXACT_COUNT: u64 = 1 << 53;

/// How `N` is chosen from `(λ, t, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// Smallest `N` satisfying the full bound including the exponential.
    #[default]
    Exact,
    /// `⌈2λ²t²/ε⌉`.
    Approx,
}

impl CountMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMode::Exact => "exact",
            CountMode::Approx => "approx",
        }
    }
}

impl FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CountMode::Exact),
            "approx" => Ok(CountMode::Approx),
            _ => Err(Error::domain("mode", format!("expected exact|approx, got {s:?}"))),
        }
    }
}

/// The total-error bound `(2λ²t²/N)·e^{2λt/N}` for `N` qDRIFT gates.
pub fn total_error_bound(lambda: f64, t: f64, n: f64) -> f64 {
    let x = lambda * t / n;
    2.0 * x * x * n * (2.0 * x).exp()
}

/// Natural log of [`total_error_bound`], finite for any positive inputs.
pub fn ln_total_error_bound(lambda: f64, t: f64, n: f64) -> f64 {
    let lt = lambda * t;
    std::f64::consts::LN_2 + 2.0 * lt.ln() - n.ln() + 2.0 * lt / n
}

/// Per-gate channel bound `(2λ²t²/N²)·e^{2λt/N}`.
pub fn step_error_bound(lambda: f64, t: f64, n: f64) -> f64 {
    total_error_bound(lambda, t, n) / n
}

fn check_args(lambda: f64, t: f64, eps: f64) -> Result<()> {
    require_positive("lambda", lambda)?;
    require_positive("t", t)?;
    require_positive("eps", eps)?;
    Ok(())
}

/// `⌈2λ²t²/ε⌉`, at least 1.
pub fn gate_count_approx(lambda: f64, t: f64, eps: f64) -> Result<u64> {
    check_args(lambda, t, eps)?;
    let n = (2.0 * lambda * lambda * t * t / eps).ceil();
    if n > MAX_EXACT_COUNT as f64 {
        return Err(Error::Overflow {
            limit: MAX_EXACT_COUNT,
        });
    }
    Ok((n as u64).max(1))
}

/// Smallest `N` with `(2λ²t²/N)·e^{2λt/N} ≤ ε`, by doubling then bisection.
pub fn gate_count_exact(lambda: f64, t: f64, eps: f64) -> Result<u64> {
    check_args(lambda, t, eps)?;
    let fails = |n: u64| total_error_bound(lambda, t, n as f64) > eps;
    if !fails(1) {
        return Ok(1);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while fails(hi) {
        if hi >= MAX_EXACT_COUNT {
            return Err(Error::Overflow {
                limit: MAX_EXACT_COUNT,
            });
        }
        lo = hi;
        hi = (hi * 2).min(MAX_EXACT_COUNT);
    }
    // invariant: fails(lo) && !fails(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fails(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `log10` of the real `N` solving the exact bound with equality, for
/// regimes beyond [`MAX_EXACT_COUNT`].
pub fn log10_gate_count_exact(lambda: f64, t: f64, eps: f64) -> Result<f64> {
    check_args(lambda, t, eps)?;
    let ln_eps = eps.ln();
    let excess = |ln_n: f64| ln_total_error_bound(lambda, t, ln_n.exp()) - ln_eps;
    if excess(0.0) <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Overflow { limit: u64::MAX });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi / std::f64::consts::LN_10)
}

pub fn gate_count(mode: CountMode, lambda: f64, t: f64, eps: f64) -> Result<u64> {
    match mode {
        CountMode::Exact => gate_count_exact(lambda, t, eps),
        CountMode::Approx => gate_count_approx(lambda, t, eps),
    }
}

/// Draws term indices with probability `h_j/λ` for one Hamiltonian.
pub struct TermSampler {
    table: AliasTable,
}

impl TermSampler {
    pub fn new(h: &Hamiltonian) -> Self {
        Self {
            table: AliasTable::new(&h.weights()).expect("Hamiltonian weights are positive"),
        }
    }

    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        self.table.sample(rng)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.table.probabilities()
    }
}

/// One rotation `exp(iτ·s_j P_j)`, optionally controlled on an extra qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub term: usize,
    pub angle: f64,
    pub controlled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub seed: u64,
    pub n_gates: u64,
    pub t: f64,
    pub eps: f64,
    pub lambda: f64,
    pub mode: CountMode,
    pub n_qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub gates: Vec<GateOp>,
    pub meta: CircuitMeta,
    /// Pauli strings of the source Hamiltonian, indexed by `GateOp::term`.
    pub ops: Vec<PauliString>,
}

/// Elementary-gate estimate for a controlled circuit: each controlled Pauli
/// rotation becomes two single-qubit rotations and two control-X gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryGates {
    pub rotations: u64,
    pub control_x: u64,
}

impl ElementaryGates {
    pub fn for_controlled(n_gates: u64) -> Self {
        Self {
            rotations: 2 * n_gates,
            control_x: 2 * n_gates,
        }
    }
}

impl Circuit {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn angle(&self) -> f64 {
        self.gates.first().map_or(0.0, |g| g.angle)
    }

    pub fn is_controlled(&self) -> bool {
        self.gates.first().is_some_and(|g| g.controlled)
    }

    /// Present only for controlled circuits.
    pub fn elementary_estimate(&self) -> Option<ElementaryGates> {
        self.is_controlled()
            .then(|| ElementaryGates::for_controlled(self.meta.n_gates))
    }

    /// How many times each term index occurs.
    pub fn term_histogram(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.ops.len()];
        for g in &self.gates {
            counts[g.term] += 1;
        }
        counts
    }

    /// Renders the `qdrift-circ v1` text.
    pub fn to_text(&self) -> String {
        let tau = sci(self.angle());
        let mut out = String::with_capacity(64 + self.gates.len() * (24 + self.meta.n_qubits));
        let m = &self.meta;
        out.push_str("# qdrift-circ v1\n");
        let _ = writeln!(out, "# seed={}", m.seed);
        let _ = writeln!(out, "# N={}", m.n_gates);
        let _ = writeln!(out, "# tau={tau}");
        let _ = writeln!(out, "# t={}", sci(m.t));
        let _ = writeln!(out, "# eps={}", sci(m.eps));
        let _ = writeln!(out, "# lambda={}", sci(m.lambda));
        let _ = writeln!(out, "# mode={}", m.mode.as_str());
        let _ = writeln!(out, "# n_qubits={}", m.n_qubits);
        for g in &self.gates {
            let tag = if g.controlled { "CROT" } else { "ROT" };
            let _ = writeln!(out, "{tag} {} {} {tau}", g.term, self.ops[g.term]);
        }
        out
    }

    /// Reads back a `qdrift-circ v1` document.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut gates = Vec::new();
        let mut ops: Vec<Option<PauliString>> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    header.insert(k.trim().to_string(), (v.trim().to_string(), line_no));
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [tag, j, op, tau] = fields[..] else {
                return Err(err(format!("expected 4 fields, got {line:?}")));
            };
            let controlled = match tag {
                "ROT" => false,
                "CROT" => true,
                _ => return Err(err(format!("unknown gate tag {tag:?}"))),
            };
            let term: usize = j.parse().map_err(|_| err(format!("bad term index {j:?}")))?;
            let angle: f64 = tau.parse().map_err(|_| err(format!("bad angle {tau:?}")))?;
            let (negative, word) = match op.split_at_checked(1) {
                Some(("+", w)) => (false, w),
                Some(("-", w)) => (true, w),
                _ => return Err(err(format!("Pauli operand must start with + or -: {op:?}"))),
            };
            let pauli = PauliString::from_word(word)
                .map_err(|_| err(format!("bad Pauli word {word:?}")))?
                .with_sign(negative);
            if ops.len() <= term {
                ops.resize(term + 1, None);
            }
            match &ops[term] {
                Some(existing) if *existing != pauli => {
                    return Err(err(format!("term {term} used with two different operators")))
                }
                Some(_) => {}
                None => ops[term] = Some(pauli),
            }
            gates.push(GateOp {
                term,
                angle,
                controlled,
            });
        }
        let get = |key: &str| -> Result<String> {
            header.get(key).map(|(v, _)| v.clone()).ok_or(Error::Parse {
                line: 1,
                msg: format!("missing header `{key}`"),
            })
        };
        let num = |key: &str| -> Result<f64> {
            let v = get(key)?;
            v.parse().map_err(|_| Error::Parse {
                line: header[key].1,
                msg: format!("bad `{key}` value {v:?}"),
            })
        };
        let int = |key: &str| -> Result<u64> {
            let v = get(key)?;
            v.parse().map_err(|_| Error::Parse {
                line: header[key].1,
                msg: format!("bad `{key}` value {v:?}"),
            })
        };
        let meta = CircuitMeta {
            seed: int("seed")?,
            n_gates: int("N")?,
            t: num("t")?,
            eps: num("eps")?,
            lambda: num("lambda")?,
            mode: get("mode")?.parse()?,
            n_qubits: int("n_qubits")? as usize,
        };
        if gates.len() as u64 != meta.n_gates {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("header says N={} but found {} gates", meta.n_gates, gates.len()),
            });
        }
        let ops = ops
            .into_iter()
            // terms never drawn get an identity placeholder
            .map(|op| op.unwrap_or_else(|| PauliString::new(vec![PauliAxis::I; meta.n_qubits], false)))
            .collect();
        Ok(Circuit { gates, meta, ops })
    }
}

fn compile_impl(
    h: &Hamiltonian,
    t: f64,
    eps: f64,
    seed: u64,
    mode: CountMode,
    controlled: bool,
) -> Result<Circuit> {
    let lambda = h.lambda();
    let n_gates = gate_count(mode, lambda, t, eps)?;
    let angle = lambda * t / n_gates as f64;
    let sampler = TermSampler::new(h);
    let mut rng = SeededRng::new(seed);
    let gates = (0..n_gates)
        .map(|_| GateOp {
            term: sampler.sample(&mut rng),
            angle,
            controlled,
        })
        .collect();
    Ok(Circuit {
        gates,
        meta: CircuitMeta {
            seed,
            n_gates,
            t,
            eps,
            lambda,
            mode,
            n_qubits: h.n_qubits() + usize::from(controlled),
        },
        ops: h.terms().iter().map(|term| term.op().clone()).collect(),
    })
}

/// Compiles `exp(itH)` to a seeded qDRIFT gate list.
pub fn compile(h: &Hamiltonian, t: f64, eps: f64, seed: u64, mode: CountMode) -> Result<Circuit> {
    compile_impl(h, t, eps, seed, mode, false)
}

/// Compiles controlled-`exp(itH)` through `|1⟩⟨1| ⊗ H`. `L` and `λ` are
/// unchanged, so the gate count and the sampled sequence match [`compile`].
pub fn compile_controlled(
    h: &Hamiltonian,
    t: f64,
    eps: f64,
    seed: u64,
    mode: CountMode,
) -> Result<Circuit> {
    compile_impl(h, t, eps, seed, mode, true)
}
