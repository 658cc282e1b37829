//! Gate budgets for textbook phase estimation driven by qDRIFT or by the
//! randomized second-order Trotter formula.
//!
//! The estimated operator is `A = (H/λ + 1)/2`, so `λ_A = 1/2` and the
//! largest term of `A` is `Λ_A = Λ/(2λ)`. Energies are wanted to additive
//! error `δ_E = 2λδ`. Bit `j` (1-based, `j = 1..=m`) runs the controlled
//! evolution for `t_j = π·2^j` with simulation error `ε_j`; the run fails
//! with probability at most `P_f = p_f + 2ε_tot`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::format::sci;
use crate::hamiltonian::WeightProfile;
use crate::trotter::{self, CostQuery, Method, Variant};

pub const CSV_HEADER: &str = "method,P_f,p_f_opt,eps_tot,m,total_gates,closed_form_gates,ratio";

/// Rounded constants of the small-`P_f` closed forms.
pub const QDRIFT_CLOSED_FORM_CONSTANT: f64 = 133.0;
pub const TROTTER_CLOSED_FORM_CONSTANT: f64 = 69.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeMethod {
    QDrift,
    /// Randomized second-order Trotter.
    Trotter,
}

impl PeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PeMethod::QDrift => "qdrift",
            PeMethod::Trotter => "trotter2_random",
        }
    }

    /// Small-`P_f` optimum of the intrinsic failure share.
    pub fn closed_form_pf(self, p_total: f64) -> f64 {
        match self {
            PeMethod::QDrift => 2.0 / 3.0 * p_total,
            PeMethod::Trotter => 0.75 * p_total,
        }
    }
}

impl fmt::Display for PeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qdrift" => Ok(PeMethod::QDrift),
            "trotter" | "trotter2_random" => Ok(PeMethod::Trotter),
            _ => Err(Error::domain("method", format!("unknown phase-estimation method `{s}`"))),
        }
    }
}

/// How a Trotter bit is costed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TrotterBitModel {
    /// `8L²(2π³Λ_A³·8^j/ε_j)^{1/2}`.
    #[default]
    ClosedForm,
    /// Twice the gate count of the randomized second-order segment solver
    /// on the profile of `A`.
    ExactSolver,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PEQuery {
    pub profile: WeightProfile,
    pub delta_e: f64,
    pub p_total: f64,
}

impl PEQuery {
    pub fn new(profile: WeightProfile, delta_e: f64, p_total: f64) -> Result<Self> {
        require_positive("delta_e", delta_e)?;
        if delta_e > profile.lambda {
            return Err(Error::domain("delta_e", "must not exceed lambda"));
        }
        check_open_unit("P_f", p_total)?;
        Ok(Self {
            profile,
            delta_e,
            p_total,
        })
    }

    pub fn with_p_total(&self, p_total: f64) -> Result<Self> {
        Self::new(self.profile, self.delta_e, p_total)
    }

    /// `δ = δ_E/(2λ)`.
    pub fn delta(&self) -> f64 {
        self.delta_e / (2.0 * self.profile.lambda)
    }

    /// `Λ_A = Λ/(2λ)`.
    pub fn lambda_a(&self) -> f64 {
        self.profile.max_weight / (2.0 * self.profile.lambda)
    }
}

fn check_open_unit(name: &'static str, x: f64) -> Result<f64> {
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(Error::domain(name, format!("must lie in (0, 1), got {x}")))
    }
}

fn real_bits(delta: f64, p_f: f64) -> f64 {
    (1.0 / delta).log2() + (1.0 / p_f + 1.0).log2() - 2.0
}

/// `m = ⌈log₂(1/δ) + log₂(1/p_f + 1) − 2⌉`, at least 1.
///
/// `p_f = 1` is accepted as the no-confidence limit.
pub fn bits_m(delta: f64, p_f: f64) -> Result<u32> {
    check_open_unit("delta", delta)?;
    if !(p_f > 0.0 && p_f <= 1.0) {
        return Err(Error::domain("p_f", format!("must lie in (0, 1], got {p_f}")));
    }
    let m = real_bits(delta, p_f);
    // absorb rounding so exact powers of two do not tip over the ceiling
    let m = (m - 1e-12 * m.abs().max(1.0)).ceil();
    Ok(m.max(1.0) as u32)
}

/// `ε_j = ε_tot·2^j/(2(2^m − 1))` for `j = 1..=m`.
pub fn allocate_eps(eps_tot: f64, m: u32) -> Vec<f64> {
    let denom = 2.0 * (2f64.powi(m as i32) - 1.0);
    (1..=m).map(|j| eps_tot * 2f64.powi(j as i32) / denom).collect()
}

/// `4^j π²/ε_j`.
pub fn qdrift_bit_cost(j: u32, eps_j: f64) -> f64 {
    4f64.powi(j as i32) * PI * PI / eps_j
}

/// `8L²(2π³Λ_A³·8^j/ε_j)^{1/2}`.
pub fn trotter_bit_cost(j: u32, eps_j: f64, n_terms: u64, lambda_a: f64) -> f64 {
    let l = n_terms as f64;
    8.0 * l * l * (2.0 * PI.powi(3) * lambda_a.powi(3) * 8f64.powi(j as i32) / eps_j).sqrt()
}

/// Bit cost through the segment solver for `A`, doubled for the control.
pub fn trotter_bit_cost_solver(j: u32, eps_j: f64, n_terms: u64, lambda_a: f64) -> Result<f64> {
    let profile = WeightProfile::new(n_terms, 0.5, lambda_a)?;
    let query = CostQuery::new(profile, PI * 2f64.powi(j as i32), eps_j)?;
    let method = Method::Suzuki {
        k: 1,
        variant: Variant::Random,
    };
    Ok(2.0 * trotter::gate_count(method, &query)?.gates.as_f64())
}

/// `4π²(2^m − 1)²/ε_tot`.
pub fn qdrift_geometric_total(m: u32, eps_tot: f64) -> f64 {
    let g = 2f64.powi(m as i32) - 1.0;
    4.0 * PI * PI * g * g / eps_tot
}

/// `8L²(2π³Λ_A³/ε_tot)^{1/2}·2^{3(m+1)/2}`, the large-`m` form of the
/// Trotter per-bit sum.
pub fn trotter_geometric_total(m: u32, eps_tot: f64, n_terms: u64, lambda_a: f64) -> f64 {
    let l = n_terms as f64;
    8.0 * l * l * (2.0 * PI.powi(3) * lambda_a.powi(3) / eps_tot).sqrt() * 2f64.powf(1.5 * (m as f64 + 1.0))
}

/// Total cost as a smooth function of a real bit depth, keeping the exact
/// `2^m − 1` factors: the sum of the per-bit costs once `m` is an integer.
fn smooth_total(method: PeMethod, query: &PEQuery, m: f64, eps_tot: f64) -> f64 {
    let g = 2f64.powf(m.max(1.0)) - 1.0;
    match method {
        PeMethod::QDrift => 4.0 * PI * PI * g * g / eps_tot,
        PeMethod::Trotter => {
            let l = query.profile.n_terms as f64;
            let lambda_a = query.lambda_a();
            8.0 * l * l * (2.0 * PI.powi(3) * lambda_a.powi(3) / eps_tot).sqrt() * (2.0 * g).powf(1.5)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitRow {
    pub j: u32,
    /// `π·2^j`
    pub t_j: f64,
    pub eps_j: f64,
    pub gates: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PEPlan {
    pub method: PeMethod,
    pub p_f: f64,
    pub eps_tot: f64,
    pub m: u32,
    pub rows: Vec<BitRow>,
    pub total: f64,
}

impl PEPlan {
    /// `p_f + 2ε_tot`
    pub fn failure_probability(&self) -> f64 {
        self.p_f + 2.0 * self.eps_tot
    }
}

/// Plans a run with intrinsic failure share `p_f`, leaving
/// `ε_tot = (P_f − p_f)/2` for simulation error.
pub fn plan(method: PeMethod, query: &PEQuery, p_f: f64) -> Result<PEPlan> {
    plan_with(method, query, p_f, TrotterBitModel::ClosedForm)
}

pub fn plan_with(method: PeMethod, query: &PEQuery, p_f: f64, model: TrotterBitModel) -> Result<PEPlan> {
    if !(p_f > 0.0 && p_f < query.p_total) {
        return Err(Error::domain("p_f", format!("must lie in (0, P_f), got {p_f}")));
    }
    let eps_tot = (query.p_total - p_f) / 2.0;
    let m = bits_m(query.delta(), p_f)?;
    let rows = allocate_eps(eps_tot, m)
        .into_iter()
        .zip(1..)
        .map(|(eps_j, j)| {
            let gates = match (method, model) {
                (PeMethod::QDrift, _) => qdrift_bit_cost(j, eps_j),
                (PeMethod::Trotter, TrotterBitModel::ClosedForm) => {
                    trotter_bit_cost(j, eps_j, query.profile.n_terms, query.lambda_a())
                }
                (PeMethod::Trotter, TrotterBitModel::ExactSolver) => {
                    trotter_bit_cost_solver(j, eps_j, query.profile.n_terms, query.lambda_a())?
                }
            };
            Ok(BitRow {
                j,
                t_j: PI * 2f64.powi(j as i32),
                eps_j,
                gates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = rows.iter().map(|r| r.gates).sum();
    Ok(PEPlan {
        method,
        p_f,
        eps_tot,
        m,
        rows,
        total,
    })
}

/// `133λ²/(δ_E²P_f³)` or `69L²Λ^{3/2}/(δ_E^{3/2}P_f²)`; approximate.
pub fn closed_form_total(method: PeMethod, query: &PEQuery) -> f64 {
    let p = &query.profile;
    match method {
        PeMethod::QDrift => {
            QDRIFT_CLOSED_FORM_CONSTANT * p.lambda * p.lambda / (query.delta_e.powi(2) * query.p_total.powi(3))
        }
        PeMethod::Trotter => {
            let l = p.n_terms as f64;
            TROTTER_CLOSED_FORM_CONSTANT * l * l * p.max_weight.powf(1.5)
                / (query.delta_e.powf(1.5) * query.p_total.powi(2))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfOptimum {
    pub p_f: f64,
    pub eps_tot: f64,
    /// Minimum of the smooth objective.
    pub total: f64,
    pub closed_form_p_f: f64,
    /// Smooth objective at `closed_form_p_f`.
    pub total_at_closed_form_p_f: f64,
    pub closed_form_total: f64,
    /// Whether the coarse scan looked unimodal; otherwise a fine scan seeded
    /// the search.
    pub unimodal: bool,
}

const GOLDEN_RTOL: f64 = 1e-6;
const COARSE_POINTS: usize = 33;
const FINE_POINTS: usize = 4096;

/// Minimizes the total over `p_f ∈ (0, P_f)` with the bit depth relaxed to
/// a real number, so the objective is smooth.
pub fn optimize_pf(method: PeMethod, query: &PEQuery) -> Result<PfOptimum> {
    let p_total = query.p_total;
    let delta = query.delta();
    let objective = |u: f64| {
        let p_f = u * p_total;
        smooth_total(method, query, real_bits(delta, p_f), (p_total - p_f) / 2.0)
    };

    let coarse: Vec<(f64, f64)> = (1..=COARSE_POINTS)
        .map(|i| {
            let u = i as f64 / (COARSE_POINTS + 1) as f64;
            (u, objective(u))
        })
        .collect();
    let unimodal = is_unimodal(&coarse);
    let grid = if unimodal {
        coarse
    } else {
        (1..=FINE_POINTS)
            .map(|i| {
                let u = i as f64 / (FINE_POINTS + 1) as f64;
                (u, objective(u))
            })
            .collect()
    };
    let best = (0..grid.len())
        .min_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1))
        .ok_or_else(|| Error::Numerical("empty search grid".into()))?;
    let step = grid[1].0 - grid[0].0;
    let lo = if best == 0 { grid[0].0 / 2.0 } else { grid[best - 1].0 };
    let hi = if best + 1 == grid.len() { (grid[best].0 + 1.0) / 2.0 } else { grid[best + 1].0 };
    debug_assert!(hi - lo <= 2.0 * step + f64::EPSILON);

    let u = golden_section(&objective, lo, hi, GOLDEN_RTOL);
    let total = objective(u);
    if !total.is_finite() {
        return Err(Error::Numerical("phase-estimation objective is not finite".into()));
    }
    let p_f = u * p_total;
    let closed_form_p_f = method.closed_form_pf(p_total);
    Ok(PfOptimum {
        p_f,
        eps_tot: (p_total - p_f) / 2.0,
        total,
        closed_form_p_f,
        total_at_closed_form_p_f: objective(closed_form_p_f / p_total),
        closed_form_total: closed_form_total(method, query),
        unimodal,
    })
}

/// Decreasing then increasing.
fn is_unimodal(points: &[(f64, f64)]) -> bool {
    let mut rising = false;
    for w in points.windows(2) {
        let up = w[1].1 > w[0].1;
        if rising && !up {
            return false;
        }
        rising |= up;
    }
    true
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, rtol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > rtol * (a.abs() + b.abs()) / 2.0 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// The cheapest integer-`m` plan. For each depth `m` the best split puts
/// `p_f` at the smallest value that still yields that depth,
/// `p_f = 1/(2^{m+2}δ − 1)`, leaving the largest simulation budget.
pub fn integer_optimum(method: PeMethod, query: &PEQuery) -> Result<PEPlan> {
    let delta = query.delta();
    let m_lo = bits_m(delta, query.p_total)?;
    let mut best: Option<PEPlan> = None;
    for m in m_lo..m_lo + 64 {
        let edge = 1.0 / (2f64.powi(m as i32 + 2) * delta - 1.0);
        let p_f = edge * (1.0 + 1e-9);
        if !(p_f > 0.0 && p_f < query.p_total) {
            continue;
        }
        let candidate = plan(method, query, p_f)?;
        if best.as_ref().is_none_or(|b| candidate.total < b.total) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| Error::Numerical("no feasible bit depth below P_f".into()))
}

/// One `phase-est` output row: the integer-`m` plan at the optimized `p_f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeRow {
    pub method: PeMethod,
    pub p_total: f64,
    pub optimum: PfOptimum,
    pub plan: PEPlan,
}

impl PeRow {
    pub fn csv_row(&self, ratio: f64) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            sci(self.p_total),
            sci(self.plan.p_f),
            sci(self.plan.eps_tot),
            self.plan.m,
            sci(self.plan.total),
            sci(self.optimum.closed_form_total),
            sci(ratio),
        )
    }
}

pub fn optimized_plan(method: PeMethod, query: &PEQuery) -> Result<PeRow> {
    optimized_plan_with(method, query, TrotterBitModel::ClosedForm)
}

/// As [`optimized_plan`]; `model` only affects the integer-`m` plan, the
/// optimization itself always uses the closed-form bit costs.
pub fn optimized_plan_with(method: PeMethod, query: &PEQuery, model: TrotterBitModel) -> Result<PeRow> {
    let optimum = optimize_pf(method, query)?;
    let plan = plan_with(method, query, optimum.p_f, model)?;
    Ok(PeRow {
        method,
        p_total: query.p_total,
        optimum,
        plan,
    })
}

/// Trotter cost over qDRIFT cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeSpeedup {
    /// `(69/133)·L²Λ^{3/2}δ_E^{1/2}P_f/λ²`
    pub closed_form: f64,
    /// Ratio of the integer-`m` plans at each method's optimized `p_f`.
    pub pipeline: f64,
}

pub fn pe_speedup(query: &PEQuery) -> Result<PeSpeedup> {
    let q = optimized_plan(PeMethod::QDrift, query)?;
    let t = optimized_plan(PeMethod::Trotter, query)?;
    Ok(PeSpeedup {
        closed_form: closed_form_total(PeMethod::Trotter, query) / closed_form_total(PeMethod::QDrift, query),
        pipeline: t.plan.total / q.plan.total,
    })
}

/// The `P_f` where the closed-form speedup equals 1.
pub fn closed_form_breakeven_pf(profile: &WeightProfile, delta_e: f64) -> f64 {
    let l = profile.n_terms as f64;
    QDRIFT_CLOSED_FORM_CONSTANT * profile.lambda.powi(2)
        / (TROTTER_CLOSED_FORM_CONSTANT * l * l * profile.max_weight.powf(1.5) * delta_e.sqrt())
}

/// Scans `P_f ∈ [lo, hi]` (log-spaced, 10 points per decade) for the
/// largest `P_f` below which Trotter becomes cheaper than qDRIFT, refined
/// by bisection in `ln P_f`. `ratio` maps a query to Trotter/qDRIFT cost.
pub fn speedup_crossover_pf(
    profile: WeightProfile,
    delta_e: f64,
    lo: f64,
    hi: f64,
    ratio: impl Fn(&PEQuery) -> Result<f64>,
) -> Result<Option<f64>> {
    check_open_unit("P_f lower bound", lo)?;
    check_open_unit("P_f upper bound", hi)?;
    if lo >= hi {
        return Err(Error::domain("P_f range", "lower bound must be below upper bound"));
    }
    let at = |p: f64| -> Result<f64> { ratio(&PEQuery::new(profile, delta_e, p)?) };
    let decades = (hi / lo).log10();
    let n = ((decades * 10.0).ceil() as usize).max(2);
    let grid: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo * 10f64.powf(decades * i as f64 / n as f64) })
        .collect();
    let mut upper = (hi, at(hi)?);
    if upper.1 <= 1.0 {
        return Ok(None);
    }
    for &p in grid.iter().rev().skip(1) {
        let r = at(p)?;
        if r <= 1.0 {
            let (mut a, mut b) = (p.ln(), upper.0.ln());
            while b - a > 1e-6 {
                let mid = (a + b) / 2.0;
                if at(mid.exp())? <= 1.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(((a + b) / 2.0).exp()));
        }
        upper = (p, r);
    }
    Ok(None)
}

/// Outcome of the false-energy filter over `M` repeated runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub feasible: bool,
    /// `f − 2P_f − 1/M`; positive exactly when feasible.
    pub margin: f64,
    /// Smallest `M` with `f > 2P_f + 1/M`, `None` when `f ≤ 2P_f`.
    pub min_repetitions: Option<u64>,
}

/// Whether repeating phase estimation `M` times separates the ground energy,
/// found with probability `f` per run, from spurious outcomes: `f > 2P_f + 1/M`.
pub fn repetition_filter(f: f64, p_f: f64, m: u64) -> Result<FilterVerdict> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::domain("f", format!("must lie in (0, 1], got {f}")));
    }
    if !(p_f.is_finite() && p_f >= 0.0) {
        return Err(Error::domain("p_f", format!("must be finite and >= 0, got {p_f}")));
    }
    if m == 0 {
        return Err(Error::domain("M", "must be at least 1"));
    }
    let gap = f - 2.0 * p_f;
    let min_repetitions = (gap > 0.0).then(|| {
        let mut k = (1.0 / gap).floor().max(1.0) as u64;
        // floor(1/gap) + 1 in exact arithmetic; walk to the first strict pass
        while k > 1 && gap > 1.0 / (k - 1) as f64 {
            k -= 1;
        }
        while gap <= 1.0 / k as f64 {
            k += 1;
        }
        k
    });
    let margin = gap - 1.0 / m as f64;
    Ok(FilterVerdict {
        feasible: margin > 0.0,
        margin,
        min_repetitions,
    })
}
