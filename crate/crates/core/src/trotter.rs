//! Gate-count bounds for product formulas.
//!
//! For first-order Trotter with `r` segments, writing `x = Λt`:
//!
//! ```text
//! a = (L x)² / r² · e^{x/r}        b = (L x)³ / (3 r³) · e^{x/r}
//! det ≤ (r/2)·a                    random ≤ (r/2)·(a² + 2b)
//! ```
//!
//! and for the order-`2k` Suzuki formula, with `c = 2·5^{k-1}`:
//!
//! ```text
//! a = 2 (c x L)^{2k+1} / ((2k+1)! r^{2k+1}) · e^{c x/r}
//! b = (c x)^{2k+1} L^{2k} / ((2k-1)! r^{2k+1}) · e^{c x/r}
//! ```
//!
//! All bounds are evaluated in log space. A formula needs `L` gates per
//! Trotter segment and `2·5^{k-1}·L` per Suzuki segment; qDRIFT needs the
//! `N` of [`crate::qdrift::gate_count_exact`] with no `L` factor.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::format::sci;
use crate::hamiltonian::WeightProfile;
use crate::qdrift::{self, MAX_EXACT_COUNT};

pub const CSV_HEADER: &str = "method,order,variant,r,gates,bound,t,eps,L,Lambda,lambda";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Det,
    Random,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Det => "det",
            Variant::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Trotter(Variant),
    /// Order-`2k` Suzuki formula, `k ∈ {1, 2, 3}`.
    Suzuki { k: u32, variant: Variant },
    QDrift,
}

impl Method {
    pub fn order(self) -> u32 {
        match self {
            Method::Trotter(_) | Method::QDrift => 1,
            Method::Suzuki { k, .. } => 2 * k,
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::Trotter(v) | Method::Suzuki { variant: v, .. } => Some(v),
            Method::QDrift => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Trotter(_) => "trotter",
            Method::Suzuki { .. } => "suzuki",
            Method::QDrift => "qdrift",
        }
    }

    /// First-order Trotter and Suzuki `k = 1, 2, 3`, each deterministic and
    /// randomized.
    pub fn product_formulas() -> Vec<Method> {
        let mut out = Vec::with_capacity(8);
        for variant in [Variant::Det, Variant::Random] {
            out.push(Method::Trotter(variant));
        }
        for k in 1..=3 {
            for variant in [Variant::Det, Variant::Random] {
                out.push(Method::Suzuki { k, variant });
            }
        }
        out
    }

    /// qDRIFT followed by [`Method::product_formulas`].
    pub fn all() -> Vec<Method> {
        let mut out = vec![Method::QDrift];
        out.extend(Self::product_formulas());
        out
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::QDrift => write!(f, "qdrift"),
            Method::Trotter(v) => write!(f, "trotter1-{}", v.as_str()),
            Method::Suzuki { k, variant } => write!(f, "suzuki{}-{}", 2 * k, variant.as_str()),
        }
    }
}

/// Which exponential factor the first-order bound carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExponentConvention {
    /// `e^{Λt/r}`; the definitive bound.
    #[default]
    PerTerm,
    /// `e^{LΛt/r}`, the looser single-formula version kept for comparison.
    WholeHamiltonian,
}

fn ln_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn check_k(k: u32) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(Error::domain("k", format!("Suzuki order 2k needs k in 1..=3, got {k}")))
    }
}

fn check_bound_args(n_terms: u64, max_weight: f64, t: f64, r: u64) -> Result<()> {
    if r < 1 {
        return Err(Error::domain("r", "segment count must be at least 1"));
    }
    if n_terms < 1 {
        return Err(Error::domain("L", "must be at least 1"));
    }
    require_positive("Lambda", max_weight)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain("t", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `(ln a, ln b)` for first-order Trotter at a real-valued `r`.
fn ln_trotter_ab(l: f64, x: f64, r: f64, conv: ExponentConvention) -> (f64, f64) {
    let exponent = match conv {
        ExponentConvention::PerTerm => x / r,
        ExponentConvention::WholeHamiltonian => l * x / r,
    };
    let ln_lx = (l * x).ln();
    let ln_r = r.ln();
    let ln_a = 2.0 * ln_lx - 2.0 * ln_r + exponent;
    let ln_b = 3.0 * ln_lx - 3.0_f64.ln() - 3.0 * ln_r + exponent;
    (ln_a, ln_b)
}

/// `(ln a, ln b)` for order-`2k` Suzuki at a real-valued `r`.
fn ln_suzuki_ab(k: u32, l: f64, x: f64, r: f64) -> (f64, f64) {
    let c = 2.0 * 5f64.powi(k as i32 - 1);
    let p = (2 * k + 1) as f64;
    let exponent = c * x / r;
    let ln_cx = (c * x).ln();
    let ln_r = r.ln();
    let ln_a = std::f64::consts::LN_2 + p * (ln_cx + l.ln()) - ln_factorial(2 * k + 1) - p * ln_r + exponent;
    let ln_b = p * ln_cx + 2.0 * k as f64 * l.ln() - ln_factorial(2 * k - 1) - p * ln_r + exponent;
    (ln_a, ln_b)
}

fn ln_combine(ln_a: f64, ln_b: f64, r: f64, variant: Variant) -> f64 {
    let ln_half_r = (r / 2.0).ln();
    match variant {
        Variant::Det => ln_half_r + ln_a,
        Variant::Random => ln_half_r + ln_add_exp(2.0 * ln_a, std::f64::consts::LN_2 + ln_b),
    }
}

/// Natural log of a product formula's error bound at real `r`; `-∞` at `t = 0`.
fn ln_error(method: Method, n_terms: u64, max_weight: f64, t: f64, r: f64, conv: ExponentConvention) -> f64 {
    let l = n_terms as f64;
    let x = max_weight * t;
    match method {
        Method::Trotter(v) => {
            let (a, b) = ln_trotter_ab(l, x, r, conv);
            ln_combine(a, b, r, v)
        }
        Method::Suzuki { k, variant } => {
            let (a, b) = ln_suzuki_ab(k, l, x, r);
            ln_combine(a, b, r, variant)
        }
        Method::QDrift => unreachable!("qDRIFT has no segment bound"),
    }
}

fn finish(ln_value: f64) -> f64 {
    // exp overflows to +inf, which is the documented sentinel
    ln_value.exp()
}

/// `(r/2)·a` for first-order Trotter.
pub fn trotter_error_det(n_terms: u64, max_weight: f64, t: f64, r: u64) -> Result<f64> {
    trotter_error_with(Variant::Det, ExponentConvention::PerTerm, n_terms, max_weight, t, r)
}

/// `(r/2)·(a² + 2b)` for randomly ordered first-order Trotter.
pub fn trotter_error_random(n_terms: u64, max_weight: f64, t: f64, r: u64) -> Result<f64> {
    trotter_error_with(Variant::Random, ExponentConvention::PerTerm, n_terms, max_weight, t, r)
}

pub fn trotter_error_with(
    variant: Variant,
    conv: ExponentConvention,
    n_terms: u64,
    max_weight: f64,
    t: f64,
    r: u64,
) -> Result<f64> {
    check_bound_args(n_terms, max_weight, t, r)?;
    Ok(finish(ln_error(Method::Trotter(variant), n_terms, max_weight, t, r as f64, conv)))
}

/// Error bound of the order-`2k` Suzuki formula with `r` segments.
pub fn suzuki_error(k: u32, n_terms: u64, max_weight: f64, t: f64, r: u64, variant: Variant) -> Result<f64> {
    check_k(k)?;
    check_bound_args(n_terms, max_weight, t, r)?;
    Ok(finish(ln_error(
        Method::Suzuki { k, variant },
        n_terms,
        max_weight,
        t,
        r as f64,
        ExponentConvention::PerTerm,
    )))
}

/// Smallest `n` in `1..=limit` with `!fails(n)`, assuming `fails` is
/// monotone. Doubling to bracket, then bisection.
fn smallest_passing(limit: u64, fails: impl Fn(u64) -> bool) -> Option<u64> {
    if !fails(1) {
        return Some(1);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while fails(hi) {
        if hi >= limit {
            return None;
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(limit);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fails(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Smallest integer `r ≥ 1` with `error_fn(r) ≤ eps`.
///
/// `error_fn` must be non-increasing in `r`. Searches up to `2^53`; the
/// returned `r` is checked to pass while `r - 1` fails.
pub fn solve_r(error_fn: impl Fn(u64) -> f64, eps: f64) -> Result<u64> {
    require_positive("eps", eps)?;
    let fails = |r: u64| !(error_fn(r) <= eps);
    let r = smallest_passing(MAX_EXACT_COUNT, &fails).ok_or(Error::Overflow {
        limit: MAX_EXACT_COUNT,
    })?;
    if fails(r) || (r > 1 && !fails(r - 1)) {
        return Err(Error::Numerical(format!(
            "error function is not monotone around r = {r}"
        )));
    }
    Ok(r)
}

/// Solves `ln_err(r) = ln_eps` over real `r ≥ 1`; returns `ln r`.
fn solve_ln_r(ln_err: impl Fn(f64) -> f64, ln_eps: f64) -> Result<f64> {
    let excess = |ln_r: f64| ln_err(ln_r.exp()) - ln_eps;
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
    Ok(hi)
}

/// A gate or segment count, exact while it fits, otherwise as `log10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateCount {
    Exact(u64),
    Log10(f64),
}

impl GateCount {
    pub fn log10(self) -> f64 {
        match self {
            GateCount::Exact(n) => (n as f64).log10(),
            GateCount::Log10(v) => v,
        }
    }

    pub fn exact(self) -> Option<u64> {
        match self {
            GateCount::Exact(n) => Some(n),
            GateCount::Log10(_) => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            GateCount::Exact(n) => n as f64,
            GateCount::Log10(v) => 10f64.powf(v),
        }
    }

    /// Total order: exact integers compare exactly, anything else by `log10`.
    pub fn cmp_count(&self, other: &Self) -> Ordering {
        match (self, other) {
            (GateCount::Exact(a), GateCount::Exact(b)) => a.cmp(b),
            _ => self.log10().total_cmp(&other.log10()),
        }
    }

    /// CSV cell: the integer, or `log10_gates:<value>` beyond integer range.
    pub fn to_cell(self) -> String {
        match self {
            GateCount::Exact(n) => n.to_string(),
            GateCount::Log10(v) => format!("log10_gates:{}", sci(v)),
        }
    }
}

impl fmt::Display for GateCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateCount::Exact(n) => write!(f, "{n}"),
            GateCount::Log10(v) => write!(f, "10^{v:.4}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostQuery {
    pub profile: WeightProfile,
    pub t: f64,
    pub eps: f64,
    #[serde(default)]
    pub convention: ExponentConvention,
}

impl CostQuery {
    pub fn new(profile: WeightProfile, t: f64, eps: f64) -> Result<Self> {
        require_positive("t", t)?;
        require_positive("eps", eps)?;
        Ok(Self {
            profile,
            t,
            eps,
            convention: ExponentConvention::PerTerm,
        })
    }

    pub fn with_convention(mut self, convention: ExponentConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        Ok(Self::new(self.profile, t, self.eps)?.with_convention(self.convention))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub method: Method,
    /// Segment count; `None` for qDRIFT.
    pub r: Option<GateCount>,
    pub gates: GateCount,
    /// The error bound at the chosen `r` (or `N`).
    pub bound: f64,
}

impl CostReport {
    pub fn csv_row(&self, query: &CostQuery) -> String {
        let p = &query.profile;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.method.name(),
            self.method.order(),
            self.method.variant().map_or("", Variant::as_str),
            self.r.map_or(String::new(), GateCount::to_cell),
            self.gates.to_cell(),
            sci(self.bound),
            sci(query.t),
            sci(query.eps),
            p.n_terms,
            sci(p.max_weight),
            sci(p.lambda),
        )
    }
}

fn segment_gates(method: Method, n_terms: u64) -> u64 {
    match method {
        Method::Trotter(_) => n_terms,
        Method::Suzuki { k, .. } => 2 * 5u64.pow(k - 1) * n_terms,
        Method::QDrift => 1,
    }
}

/// Solves `method` for the query and reports its gate count.
pub fn gate_count(method: Method, query: &CostQuery) -> Result<CostReport> {
    let p = query.profile;
    if let Method::Suzuki { k, .. } = method {
        check_k(k)?;
    }
    if method == Method::QDrift {
        return match qdrift::gate_count_exact(p.lambda, query.t, query.eps) {
            Ok(n) => Ok(CostReport {
                method,
                r: None,
                gates: GateCount::Exact(n),
                bound: qdrift::total_error_bound(p.lambda, query.t, n as f64),
            }),
            Err(Error::Overflow { .. }) => {
                let log_n = qdrift::log10_gate_count_exact(p.lambda, query.t, query.eps)?;
                Ok(CostReport {
                    method,
                    r: None,
                    gates: GateCount::Log10(log_n),
                    bound: qdrift::total_error_bound(p.lambda, query.t, 10f64.powf(log_n)),
                })
            }
            Err(e) => Err(e),
        };
    }

    let ln_err = |r: f64| ln_error(method, p.n_terms, p.max_weight, query.t, r, query.convention);
    let ln_eps = query.eps.ln();
    let per_segment = segment_gates(method, p.n_terms);
    match smallest_passing(MAX_EXACT_COUNT, |r| !(ln_err(r as f64) <= ln_eps)) {
        Some(r) => {
            let gates = match per_segment.checked_mul(r) {
                Some(g) if g <= i64::MAX as u64 => GateCount::Exact(g),
                _ => GateCount::Log10((per_segment as f64).log10() + (r as f64).log10()),
            };
            Ok(CostReport {
                method,
                r: Some(GateCount::Exact(r)),
                gates,
                bound: ln_err(r as f64).exp(),
            })
        }
        None => {
            let ln_r = solve_ln_r(ln_err, ln_eps)?;
            let log_r = ln_r / std::f64::consts::LN_10;
            Ok(CostReport {
                method,
                r: Some(GateCount::Log10(log_r)),
                gates: GateCount::Log10((per_segment as f64).log10() + log_r),
                bound: ln_err(ln_r.exp()).exp(),
            })
        }
    }
}

/// Reports for qDRIFT and every product formula, in [`Method::all`] order.
pub fn cost_table(query: &CostQuery) -> Result<Vec<CostReport>> {
    Method::all().into_iter().map(|m| gate_count(m, query)).collect()
}

/// `B_k = (2·5^{k-1})^{2k+1} / (2k-1)!`
pub fn suzuki_b_constant(k: u32) -> Result<f64> {
    check_k(k)?;
    let c = 2.0 * 5f64.powi(k as i32 - 1);
    Ok((c.ln() * (2 * k + 1) as f64 - ln_factorial(2 * k - 1)).exp())
}

/// `C_k = 2·5^{k-1}·B_k^{1/2k}`, the prefactor of the closed-form count.
pub fn suzuki_prefactor(k: u32) -> Result<f64> {
    let b = suzuki_b_constant(k)?;
    Ok(2.0 * 5f64.powi(k as i32 - 1) * b.powf(1.0 / (2 * k) as f64))
}

/// The explicitly printed prefactors of `N_1`, `N_2`, `N_3` in the source
/// analysis. Only `k = 1` agrees with [`suzuki_prefactor`]; the verify
/// command reports the mismatch for the others.
pub fn printed_suzuki_prefactor(k: u32) -> Result<f64> {
    check_k(k)?;
    Ok(match k {
        1 => 4.0 * 2f64.sqrt(),
        2 => 500.0 * 10f64.powf(0.25) / 3.0,
        _ => 156_250.0 * 2f64.powf(1.0 / 6.0) * 5f64.cbrt() / 3.0,
    })
}

/// `N_k ≈ C_k L² (Λt)^{1+1/2k} / ε^{1/2k}`, the approximation that keeps
/// only the `b` term and drops the exponential. For intuition only.
pub fn closed_form_suzuki_count(k: u32, n_terms: u64, max_weight: f64, t: f64, eps: f64) -> Result<f64> {
    let c = suzuki_prefactor(k)?;
    require_positive("Lambda", max_weight)?;
    require_positive("t", t)?;
    require_positive("eps", eps)?;
    let l = n_terms as f64;
    let x = max_weight * t;
    let inv = 1.0 / (2 * k) as f64;
    Ok(c * l * l * x.powf(1.0 + inv) / eps.powf(inv))
}

fn rank(report: &CostReport) -> (u32, Option<Variant>) {
    (report.method.order(), report.method.variant())
}

/// The cheapest candidate; ties go to the lower order, then `Det`.
///
/// Candidates whose segment count cannot be solved are skipped.
pub fn best_method(query: &CostQuery, candidates: &[Method]) -> Result<CostReport> {
    let mut best: Option<CostReport> = None;
    let mut last_err = None;
    for &m in candidates {
        match gate_count(m, query) {
            Ok(report) => {
                let better = best.as_ref().is_none_or(|b| {
                    report
                        .gates
                        .cmp_count(&b.gates)
                        .then_with(|| rank(&report).cmp(&rank(b)))
                        == Ordering::Less
                });
                if better {
                    best = Some(report);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        last_err.unwrap_or_else(|| Error::domain("candidates", "no candidate methods given"))
    })
}

/// Best product formula over qDRIFT, both as `log10` gate counts.
fn log_speedup(query: &CostQuery) -> Result<f64> {
    let best = best_method(query, &Method::product_formulas())?;
    let qd = gate_count(Method::QDrift, query)?;
    Ok(best.gates.log10() - qd.gates.log10())
}

/// `best product-formula gates / qDRIFT gates` at time `t`.
pub fn speedup(profile: WeightProfile, eps: f64, t: f64) -> Result<f64> {
    Ok(10f64.powf(log_speedup(&CostQuery::new(profile, t, eps)?)?))
}

fn qdrift_is_cheaper(query: &CostQuery) -> Result<bool> {
    let best = best_method(query, &Method::product_formulas())?;
    let qd = gate_count(Method::QDrift, query)?;
    Ok(qd.gates.cmp_count(&best.gates) != Ordering::Greater)
}

/// Smallest `t` in `[t_lo, t_hi]` where qDRIFT needs more gates than the
/// best product formula, located by a log-spaced scan (20 points per decade)
/// and refined by bisection in `ln t` to a relative width of `1e-4`.
///
/// Returns `None` unless qDRIFT goes from cheaper to dearer inside the range.
pub fn crossover_time(profile: WeightProfile, eps: f64, t_lo: f64, t_hi: f64) -> Result<Option<f64>> {
    require_positive("t_lo", t_lo)?;
    require_positive("t_hi", t_hi)?;
    if t_hi <= t_lo {
        return Err(Error::domain("t_range", format!("need t_lo < t_hi, got [{t_lo}, {t_hi}]")));
    }
    let base = CostQuery::new(profile, t_lo, eps)?;
    let cheaper = |t: f64| base.at_time(t).and_then(|q| qdrift_is_cheaper(&q));
    let decades = (t_hi / t_lo).log10();
    let points = ((decades * 20.0).ceil() as usize).max(16);
    let (ln_lo, ln_hi) = (t_lo.ln(), t_hi.ln());
    let grid = |i: usize| {
        if i == points {
            t_hi
        } else {
            (ln_lo + (ln_hi - ln_lo) * i as f64 / points as f64).exp()
        }
    };
    let mut prev_t = t_lo;
    let mut prev = cheaper(t_lo)?;
    for i in 1..=points {
        let t = grid(i);
        let now = cheaper(t)?;
        if prev && !now {
            let (mut a, mut b) = (prev_t, t);
            while b / a > 1.0 + 1e-4 {
                let mid = (a * b).sqrt();
                if cheaper(mid)? {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(b));
        }
        prev = now;
        prev_t = t;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Direct transcriptions of the bounds, evaluated without logs.
    fn oracle_trotter(l: f64, lam: f64, t: f64, r: f64) -> (f64, f64) {
        let a = (l * lam * t).powi(2) / (r * r) * (lam * t / r).exp();
        let b = (l * lam * t).powi(3) / (3.0 * r * r * r) * (lam * t / r).exp();
        (r / 2.0 * a, r / 2.0 * (a * a + 2.0 * b))
    }

    fn fact(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    fn oracle_suzuki(k: u32, l: f64, lam: f64, t: f64, r: f64) -> (f64, f64) {
        let c = 2.0 * 5f64.powi(k as i32 - 1);
        let p = (2 * k + 1) as i32;
        let e = (c * lam * t / r).exp();
        let a = 2.0 * (c * lam * t * l).powi(p) / (fact(2 * k + 1) * r.powi(p)) * e;
        let b = (c * lam * t).powi(p) * l.powi(2 * k as i32) / (fact(2 * k - 1) * r.powi(p)) * e;
        (r / 2.0 * a, r / 2.0 * (a * a + 2.0 * b))
    }

    #[test]
    fn trotter_examples() {
        let det = trotter_error_det(2, 1.0, 1.0, 2000).unwrap();
        assert!(rel(det, 2.0 / 2000.0 * (1.0f64 / 2000.0).exp()) < 1e-13);
        assert!(rel(det, 1.0005e-3) < 1e-6);
        let (od, or) = oracle_trotter(2.0, 1.0, 1.0, 2000.0);
        assert!(rel(det, od) < 1e-13);
        let random = trotter_error_random(2, 1.0, 1.0, 2000).unwrap();
        assert!(rel(random, or) < 1e-13);
        assert_eq!(trotter_error_det(2, 1.0, 0.0, 5).unwrap(), 0.0);
        assert_eq!(trotter_error_random(2, 1.0, 0.0, 5).unwrap(), 0.0);
        assert!(trotter_error_det(2, 1.0, 1.0, 0).is_err());
        assert!(trotter_error_det(2, 1.0, 1.0, 10).unwrap() > trotter_error_det(2, 1.0, 1.0, 20).unwrap());
    }

    #[test]
    fn whole_hamiltonian_exponent() {
        let looser = trotter_error_with(Variant::Det, ExponentConvention::WholeHamiltonian, 4, 0.5, 2.0, 10).unwrap();
        let expect = 16.0 * 0.25 * 4.0 / 20.0 * (4.0f64 * 0.5 * 2.0 / 10.0).exp();
        assert!(rel(looser, expect) < 1e-13);
        assert!(looser > trotter_error_det(4, 0.5, 2.0, 10).unwrap());
    }

    #[test]
    fn suzuki_examples() {
        let (od, or) = oracle_suzuki(1, 1.0, 1.0, 1.0, 10.0);
        let a = 2.0 * 8.0 / (6.0 * 1000.0) * 0.2f64.exp();
        assert!(rel(od, 5.0 * a) < 1e-13);
        assert!(rel(suzuki_error(1, 1, 1.0, 1.0, 10, Variant::Det).unwrap(), od) < 1e-12);
        assert!(rel(suzuki_error(1, 1, 1.0, 1.0, 10, Variant::Random).unwrap(), or) < 1e-12);
        for k in 1..=3 {
            for (l, lam, t, r) in [(3.0, 0.7, 2.0, 17.0), (50.0, 0.1, 10.0, 900.0)] {
                let (od, or) = oracle_suzuki(k, l, lam, t, r);
                let d = suzuki_error(k, l as u64, lam, t, r as u64, Variant::Det).unwrap();
                let rr = suzuki_error(k, l as u64, lam, t, r as u64, Variant::Random).unwrap();
                assert!(rel(d, od) < 1e-12, "k={k}");
                assert!(rel(rr, or) < 1e-12, "k={k}");
            }
            for v in [Variant::Det, Variant::Random] {
                assert_eq!(suzuki_error(k, 3, 1.0, 0.0, 4, v).unwrap(), 0.0);
            }
            // r^{-2k} scaling once the exponential is ~1
            let e1 = suzuki_error(k, 2, 1.0, 1.0, 100_000, Variant::Det).unwrap();
            let e2 = suzuki_error(k, 2, 1.0, 1.0, 200_000, Variant::Det).unwrap();
            assert!(rel(e2 / e1, 2f64.powi(-2 * k as i32)) < 1e-3);
        }
        assert!(suzuki_error(4, 1, 1.0, 1.0, 10, Variant::Det).is_err());
    }

    #[test]
    fn overflow_sentinel() {
        let e = suzuki_error(3, 1000, 100.0, 1e6, 1, Variant::Det).unwrap();
        assert_eq!(e, f64::INFINITY);
    }

    #[test]
    fn solve_r_examples() {
        let scan = (1u64..)
            .find(|&r| 2.0 / r as f64 * (1.0 / r as f64).exp() <= 1e-3)
            .unwrap();
        assert_eq!(scan, 2001);
        let r = solve_r(|r| trotter_error_det(2, 1.0, 1.0, r).unwrap(), 1e-3).unwrap();
        assert_eq!(r, 2001);
        assert_eq!(solve_r(|r| 1.0 / r as f64, 5.0).unwrap(), 1);
        assert!(matches!(solve_r(|_| 1.0, 0.5), Err(Error::Overflow { .. })));
    }

    #[test]
    fn gate_count_examples() {
        let q = CostQuery::new(WeightProfile::new(2, 2.0, 1.0).unwrap(), 1.0, 1e-3).unwrap();
        let rep = gate_count(Method::Trotter(Variant::Det), &q).unwrap();
        assert_eq!(rep.r, Some(GateCount::Exact(2001)));
        assert_eq!(rep.gates, GateCount::Exact(4002));
        assert!(rep.bound <= 1e-3);

        let qd = CostQuery::new(WeightProfile::new(2, 1.0, 0.5).unwrap(), 1.0, 1e-3).unwrap();
        let rep = gate_count(Method::QDrift, &qd).unwrap();
        assert_eq!(rep.gates, GateCount::Exact(2002));
        assert_eq!(rep.r, None);

        let s1 = gate_count(Method::Suzuki { k: 1, variant: Variant::Det }, &q).unwrap();
        assert_eq!(s1.gates.exact().unwrap(), 2 * 2 * s1.r.unwrap().exact().unwrap());
        let s3 = gate_count(Method::Suzuki { k: 3, variant: Variant::Random }, &q).unwrap();
        assert_eq!(s3.gates.exact().unwrap(), 50 * 2 * s3.r.unwrap().exact().unwrap());
    }

    #[test]
    fn huge_times_switch_to_logs() {
        let p = WeightProfile::new(100, 10.0, 1.0).unwrap();
        let q = CostQuery::new(p, 1e10, 1e-3).unwrap();
        let qd = gate_count(Method::QDrift, &q).unwrap();
        assert!(matches!(qd.gates, GateCount::Log10(_)));
        assert!((qd.gates.log10() - (2e25f64).log10()).abs() < 1e-6);
        let t1 = gate_count(Method::Trotter(Variant::Det), &q).unwrap();
        assert!(matches!(t1.r, Some(GateCount::Log10(_))));
        assert!(rel(t1.bound, 1e-3) < 1e-6);
        assert!(t1.gates.to_cell().starts_with("log10_gates:"));
    }

    #[test]
    fn closed_form_constants() {
        assert!((suzuki_prefactor(1).unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((closed_form_suzuki_count(1, 1, 1.0, 1.0, 1.0).unwrap() - 5.656854249492381).abs() < 1e-12);
        let c2 = suzuki_prefactor(2).unwrap();
        assert!((c2 - 10.0 * (1e5f64 / 6.0).powf(0.25)).abs() < 1e-9);
        assert!((c2 - 113.6).abs() < 0.05, "{c2}");
        assert!((printed_suzuki_prefactor(1).unwrap() - suzuki_prefactor(1).unwrap()).abs() < 1e-12);
        assert!(rel(printed_suzuki_prefactor(2).unwrap(), c2) > 0.5);
        assert!(suzuki_b_constant(0).is_err());
    }

    #[test]
    fn best_method_regimes() {
        let p = WeightProfile::new(10, 5.0, 1.0).unwrap();
        for t in [0.01, 0.05, 0.2] {
            let q = CostQuery::new(p, t, 1e-2).unwrap();
            let best = best_method(&q, &Method::product_formulas()).unwrap();
            // exhaustive oracle over the candidate set
            let min = Method::product_formulas()
                .into_iter()
                .map(|m| gate_count(m, &q).unwrap().gates.exact().unwrap())
                .min()
                .unwrap();
            assert_eq!(best.gates.exact().unwrap(), min);
            assert!(best.method.order() <= 2, "t={t}: {:?}", best.method);
        }
        // the order-6 prefactor is ~19x the order-4 one and pays off only once
        // (LΛt)^{1/12} exceeds that
        let q = CostQuery::new(p, 1e7, 1e-3).unwrap();
        let best = best_method(&q, &Method::product_formulas()).unwrap();
        assert_eq!(best.method.order(), 4, "{:?}", best.method);
        let q = CostQuery::new(p, 1e20, 1e-3).unwrap();
        let best = best_method(&q, &Method::product_formulas()).unwrap();
        assert_eq!(best.method.order(), 6, "{:?}", best.method);

        let only = [Method::Trotter(Variant::Random)];
        assert_eq!(best_method(&q, &only).unwrap().method, only[0]);
        assert!(best_method(&q, &[]).is_err());
    }

    #[test]
    fn crossover_for_sqrt_l_profile() {
        let p = WeightProfile::new(100, 10.0, 1.0).unwrap();
        let t_star = crossover_time(p, 1e-3, 1.0, 1e12).unwrap().expect("crossing");
        assert!(speedup(p, 1e-3, t_star / 10.0).unwrap() > 1.0);
        assert!(speedup(p, 1e-3, t_star * 10.0).unwrap() < 1.0);
        assert_eq!(crossover_time(p, 1e-3, 1.0, t_star / 2.0).unwrap(), None);
        assert!(crossover_time(p, 1e-3, 2.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn reports_are_minimal(l in 1u64..50, lam in 0.05f64..2.0, t in 0.01f64..50.0, eps in 1e-5f64..0.1, idx in 0usize..9) {
            let method = Method::all()[idx];
            let p = WeightProfile::new(l, lam * l as f64 * 0.7f64.max(1.0 / l as f64), lam).unwrap();
            let q = CostQuery::new(p, t, eps).unwrap();
            let rep = gate_count(method, &q).unwrap();
            prop_assert!(rep.bound <= eps);
            let at = |n: u64| match method {
                Method::QDrift => qdrift::total_error_bound(p.lambda, t, n as f64),
                Method::Trotter(v) => trotter_error_with(v, ExponentConvention::PerTerm, l, lam, t, n).unwrap(),
                Method::Suzuki { k, variant } => suzuki_error(k, l, lam, t, n, variant).unwrap(),
            };
            let n = match method {
                Method::QDrift => rep.gates.exact().unwrap(),
                _ => rep.r.unwrap().exact().unwrap(),
            };
            prop_assert!(at(n) <= eps);
            if n > 1 {
                prop_assert!(at(n - 1) > eps);
            }
        }

        #[test]
        fn random_beats_det_when_b_small(l in 1u64..20, lam in 0.01f64..1.0, t in 0.01f64..5.0, r in 1u64..10_000) {
            let x = lam * t;
            let lf = l as f64;
            let a = (lf * x).powi(2) / (r as f64).powi(2) * (x / r as f64).exp();
            let b = (lf * x).powi(3) / (3.0 * (r as f64).powi(3)) * (x / r as f64).exp();
            prop_assume!(a <= 1.0 && b <= a / 2.0 * (1.0 - a));
            let det = trotter_error_det(l, lam, t, r).unwrap();
            let random = trotter_error_random(l, lam, t, r).unwrap();
            prop_assert!(random <= det * (1.0 + 1e-12));
        }

        #[test]
        fn best_is_permutation_invariant(seed in any::<u64>(), t in 0.1f64..1e4) {
            let p = WeightProfile::new(30, 8.0, 0.9).unwrap();
            let q = CostQuery::new(p, t, 1e-3).unwrap();
            let mut cands = Method::product_formulas();
            let reference = best_method(&q, &cands).unwrap();
            let mut rng = crate::sampling::SeededRng::new(seed);
            for i in (1..cands.len()).rev() {
                cands.swap(i, rng.next_index(i + 1));
            }
            prop_assert_eq!(best_method(&q, &cands).unwrap(), reference);
        }
    }
}
