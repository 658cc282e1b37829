//! Weighted Pauli-sum Hamiltonians, `H = Σ_j h_j · s_j P_j` with `h_j > 0`.
//!
//! Negative input coefficients are absorbed into the sign `s_j` of the Pauli
//! string, so `p_j = h_j / λ` is always a probability distribution. Every
//! [`Hamiltonian`] caches the aggregates the cost models consume: the term
//! count `L`, the weight sum `λ` and the largest weight `Λ`.
//!
//! # Text format (`hamtxt v1`)
//!
//! ```text
//! # comment
//! 1.0   ZZ
//! -0.5  XI   # trailing comments are fine
//! ```
//!
//! One `<coefficient> <pauli word>` pair per line, words over `{I,X,Y,Z}`,
//! all of the same length. Duplicate words are merged by signed addition and
//! terms that cancel exactly are dropped. The all-identity word is rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::format::sci;

/// Relative slack allowed when checking `Λ ≤ λ ≤ Λ·L` on externally
/// supplied profiles (floating-point summation order).
const PROFILE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// A signed tensor product of single-qubit Paulis. Axis `0` is the leftmost
/// character of the word and the most significant qubit in matrix form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    axes: Vec<PauliAxis>,
    negative: bool,
}

impl PauliString {
    pub fn new(axes: Vec<PauliAxis>, negative: bool) -> Self {
        Self { axes, negative }
    }

    /// Parses an unsigned word such as `"XZI"`.
    pub fn from_word(word: &str) -> Result<Self> {
        let axes = word
            .chars()
            .map(|c| {
                PauliAxis::from_char(c).ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("invalid Pauli character {c:?} in {word:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if axes.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty Pauli word".into(),
            });
        }
        Ok(Self::new(axes, false))
    }

    pub fn axes(&self) -> &[PauliAxis] {
        &self.axes
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// `+1.0` or `-1.0`.
    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|a| *a == PauliAxis::I)
    }

    pub fn word(&self) -> String {
        self.axes.iter().map(|a| a.as_char()).collect()
    }

    pub fn with_sign(&self, negative: bool) -> Self {
        Self::new(self.axes.clone(), negative)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { '-' } else { '+' };
        write!(f, "{sign}{}", self.word())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    weight: f64,
    op: PauliString,
}

impl Term {
    /// Builds `weight · op`; `weight` must be finite and strictly positive.
    pub fn new(weight: f64, op: PauliString) -> Result<Self> {
        require_positive("weight", weight)?;
        Ok(Self { weight, op })
    }

    /// Splits a signed coefficient into `(|c|, sign)`. Returns `None` for zero.
    pub fn from_signed(coefficient: f64, word_axes: Vec<PauliAxis>) -> Option<Self> {
        if coefficient == 0.0 || !coefficient.is_finite() {
            return None;
        }
        Some(Self {
            weight: coefficient.abs(),
            op: PauliString::new(word_axes, coefficient < 0.0),
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn op(&self) -> &PauliString {
        &self.op
    }

    pub fn signed_coefficient(&self) -> f64 {
        self.op.sign() * self.weight
    }
}

/// The `(L, λ, Λ)` aggregates without the Pauli data behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    /// Number of terms.
    pub n_terms: u64,
    /// Weight sum `λ`.
    pub lambda: f64,
    /// Largest weight `Λ`.
    pub max_weight: f64,
}

impl WeightProfile {
    pub fn new(n_terms: u64, lambda: f64, max_weight: f64) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::domain("L", "must be at least 1"));
        }
        require_positive("lambda", lambda)?;
        require_positive("Lambda", max_weight)?;
        let upper = max_weight * n_terms as f64;
        if lambda < max_weight * (1.0 - PROFILE_RTOL) || lambda > upper * (1.0 + PROFILE_RTOL) {
            return Err(Error::domain(
                "lambda",
                format!("need Λ ≤ λ ≤ Λ·L, got Λ={max_weight}, λ={lambda}, L={n_terms}"),
            ));
        }
        Ok(Self {
            n_terms,
            lambda,
            max_weight,
        })
    }

    /// Profile of `L` equal weights summing to `lambda`.
    pub fn uniform(n_terms: u64, lambda: f64) -> Result<Self> {
        Self::new(n_terms, lambda, lambda / n_terms as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<Term>,
    lambda: f64,
    max_weight: f64,
}

impl Hamiltonian {
    /// Builds a Hamiltonian, merging duplicate Pauli words by signed addition.
    ///
    /// The first occurrence of a word fixes its position; merged terms that
    /// cancel to exactly zero are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        let mut merged: Vec<(Vec<PauliAxis>, f64)> = Vec::new();
        let mut n_qubits = None;
        for term in terms {
            let n = term.op.n_qubits();
            match n_qubits {
                None => n_qubits = Some(n),
                Some(m) if m != n => {
                    return Err(Error::domain(
                        "terms",
                        format!("Pauli words of different lengths ({m} and {n})"),
                    ))
                }
                _ => {}
            }
            if term.op.is_identity() {
                return Err(Error::domain("terms", "the all-identity term is not allowed"));
            }
            let coefficient = term.signed_coefficient();
            match merged.iter_mut().find(|(axes, _)| *axes == term.op.axes) {
                Some((_, c)) => *c += coefficient,
                None => merged.push((term.op.axes.clone(), coefficient)),
            }
        }
        let terms: Vec<Term> = merged
            .into_iter()
            .filter_map(|(axes, c)| Term::from_signed(c, axes))
            .collect();
        let n_qubits = n_qubits.ok_or(Error::EmptyHamiltonian)?;
        Self::from_distinct(n_qubits, terms)
    }

    fn from_distinct(n_qubits: usize, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyHamiltonian);
        }
        let lambda = terms.iter().map(|t| t.weight).sum();
        let max_weight = terms.iter().map(|t| t.weight).fold(0.0, f64::max);
        Ok(Self {
            n_qubits,
            terms,
            lambda,
            max_weight,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `L`
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// `λ = Σ_j h_j`
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Λ = max_j h_j`
    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    pub fn weights(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.weight).collect()
    }

    pub fn profile(&self) -> WeightProfile {
        WeightProfile {
            n_terms: self.terms.len() as u64,
            lambda: self.lambda,
            max_weight: self.max_weight,
        }
    }

    /// Terms sorted by descending weight, then by Pauli word.
    pub fn canonical(&self) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.op.word().cmp(&b.op.word()))
        });
        Self::from_distinct(self.n_qubits, terms).expect("non-empty by construction")
    }

    /// Removes the smallest terms whose weights add up to at most `eps`.
    ///
    /// Terms are visited in ascending weight (later input terms first among
    /// equal weights) and removal stops at the first term that would push the
    /// removed total past `eps`.
    pub fn truncate(&self, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::domain("eps", format!("must be finite and >= 0, got {eps}")));
        }
        if eps >= self.lambda {
            return Err(Error::domain(
                "eps",
                format!("truncation budget {eps} would remove the whole Hamiltonian (λ = {})", self.lambda),
            ));
        }
        let mut order: Vec<usize> = (0..self.terms.len()).collect();
        order.sort_by(|&a, &b| {
            self.terms[a]
                .weight
                .total_cmp(&self.terms[b].weight)
                .then(b.cmp(&a))
        });
        let mut removed = vec![false; self.terms.len()];
        let mut total = 0.0;
        for idx in order {
            let next = total + self.terms[idx].weight;
            if next > eps {
                break;
            }
            total = next;
            removed[idx] = true;
        }
        let kept = self
            .terms
            .iter()
            .zip(&removed)
            .filter(|(_, r)| !**r)
            .map(|(t, _)| t.clone())
            .collect();
        Self::from_distinct(self.n_qubits, kept)
    }

    /// The Hamiltonian `|1⟩⟨1| ⊗ H` used for controlled evolution.
    pub fn controlled_extension(&self) -> ControlledHamiltonian {
        ControlledHamiltonian {
            n_qubits: self.n_qubits + 1,
            terms: self
                .terms
                .iter()
                .map(|t| ControlledTerm { base: t.clone() })
                .collect(),
            profile: self.profile(),
        }
    }

    /// Parses a `hamtxt v1` document.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            let mut fields = line.split_whitespace();
            let (coef_txt, word) = match (fields.next(), fields.next(), fields.next()) {
                (Some(c), Some(w), None) => (c, w),
                _ => {
                    return Err(parse_err(format!(
                        "expected `<coefficient> <pauli word>`, got {line:?}"
                    )))
                }
            };
            let coefficient: f64 = coef_txt
                .parse()
                .map_err(|_| parse_err(format!("malformed coefficient {coef_txt:?}")))?;
            if !coefficient.is_finite() {
                return Err(parse_err(format!("non-finite coefficient {coef_txt:?}")));
            }
            let op = PauliString::from_word(word).map_err(|e| match e {
                Error::Parse { msg, .. } => parse_err(msg),
                other => other,
            })?;
            match width {
                None => width = Some(op.n_qubits()),
                Some(w) if w != op.n_qubits() => {
                    return Err(parse_err(format!(
                        "word {word:?} has length {}, expected {w}",
                        op.n_qubits()
                    )))
                }
                _ => {}
            }
            if op.is_identity() {
                return Err(parse_err("the all-identity term is not allowed".into()));
            }
            if let Some(term) = Term::from_signed(coefficient, op.axes) {
                terms.push(term);
            }
        }
        if width.is_none() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                msg: "no terms".into(),
            });
        }
        Self::from_terms(terms)
    }

    /// Canonical `hamtxt v1` text: descending weight, then Pauli word.
    pub fn serialize(&self) -> String {
        let canonical = self.canonical();
        let mut out = String::from("# hamtxt v1\n");
        for term in &canonical.terms {
            out.push_str(&sci(term.signed_coefficient()));
            out.push(' ');
            out.push_str(&term.op.word());
            out.push('\n');
        }
        out
    }
}

/// A term of `|1⟩⟨1| ⊗ H`; the control is the new most significant qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlledTerm {
    pub base: Term,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlledHamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<ControlledTerm>,
    /// Identical to the uncontrolled Hamiltonian's aggregates.
    pub profile: WeightProfile,
}
