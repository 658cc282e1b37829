//! Dense channel numerics for desk-scale systems.
//!
//! Superoperators use the column-stacking convention: `vec(ρ)` stacks the
//! columns of `ρ`, entry `(r, c)` lands at index `c·d + r`, and
//! `vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)`. A unitary channel `ρ ↦ UρU†` is therefore
//! `conj(U) ⊗ U`.
//!
//! Diamond distances are not computed. [`choi_distance`] returns the trace
//! distance between normalized Choi states, which is a lower bound on the
//! diamond distance; a lower bound below a proven upper bound is enough to
//! certify the upper bound empirically.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::hamiltonian::{Hamiltonian, PauliAxis, PauliString};
use crate::qdrift::{self, CountMode};
use crate::sampling::SeededRng;

pub type CMatrix = DMatrix<Complex64>;

/// Qubit cap for channel construction (`4^6 × 4^6` superoperators).
pub const MAX_CHANNEL_QUBITS: usize = 6;
/// Qubit cap for operations that take superoperator powers or average
/// many compiled circuits.
pub const MAX_POWER_QUBITS: usize = 4;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;
pub const TP_TOL: f64 = 1e-10;
pub const CP_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_qubits(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::Dimension(format!("{n} qubits exceeds the cap of {cap}")))
    } else {
        Ok(())
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A `2^n × 2^n` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() || !d.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "operator must be square with power-of-two size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n_qubits = d.trailing_zeros() as usize;
        check_qubits(n_qubits, MAX_CHANNEL_QUBITS)?;
        Ok(Self { n_qubits, matrix })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits, MAX_CHANNEL_QUBITS)?;
        Self::new(CMatrix::identity(1 << n_qubits, 1 << n_qubits))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(&self.matrix - self.matrix.adjoint())) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let d = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(d, d))) <= tol
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix.clone().singular_values().max()
    }
}

fn single_qubit(axis: PauliAxis) -> CMatrix {
    match axis {
        PauliAxis::I => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        PauliAxis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        PauliAxis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        PauliAxis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// `sign · P_0 ⊗ P_1 ⊗ …`, with axis 0 as the most significant qubit.
pub fn pauli_to_matrix(p: &PauliString) -> Result<DenseOperator> {
    check_qubits(p.n_qubits(), MAX_CHANNEL_QUBITS)?;
    let mut m = CMatrix::identity(1, 1);
    for &axis in p.axes() {
        m = m.kronecker(&single_qubit(axis));
    }
    DenseOperator::new(m * Complex64::new(p.sign(), 0.0))
}

/// `|1⟩⟨1| ⊗ sign·P` on `n + 1` qubits, the control being most significant.
pub fn controlled_pauli_matrix(p: &PauliString) -> Result<DenseOperator> {
    check_qubits(p.n_qubits() + 1, MAX_CHANNEL_QUBITS)?;
    let projector = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]);
    DenseOperator::new(projector.kronecker(pauli_to_matrix(p)?.matrix()))
}

/// `Σ_j h_j · s_j P_j` as a dense matrix.
pub fn hamiltonian_matrix(h: &Hamiltonian) -> Result<DenseOperator> {
    check_qubits(h.n_qubits(), MAX_CHANNEL_QUBITS)?;
    let d = 1 << h.n_qubits();
    let mut m = CMatrix::zeros(d, d);
    for term in h.terms() {
        m += pauli_to_matrix(term.op())?.matrix * Complex64::new(term.weight(), 0.0);
    }
    DenseOperator::new(m)
}

/// `exp(iθH)` through the eigendecomposition `H = V·diag(w)·V†`.
pub fn unitary_exp(h: &DenseOperator, theta: f64) -> Result<DenseOperator> {
    if !h.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::domain("h_matrix", "operator is not Hermitian"));
    }
    let eig = h.matrix.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&w| Complex64::from_polar(1.0, theta * w)),
    );
    let v = &eig.eigenvectors;
    let u = v * CMatrix::from_diagonal(&phases) * v.adjoint();
    let out = DenseOperator::new(u)?;
    if !out.is_unitary(UNITARY_TOL) {
        return Err(Error::Numerical("matrix exponential lost unitarity".into()));
    }
    Ok(out)
}

/// `exp(iθ·sP) = cos θ·I + i sin θ·sP`, valid because `P² = I`.
pub fn pauli_rotation(p: &PauliString, theta: f64) -> Result<DenseOperator> {
    let pm = pauli_to_matrix(p)?;
    let d = pm.dim();
    let m = CMatrix::identity(d, d) * Complex64::new(theta.cos(), 0.0) + pm.matrix * (I * theta.sin());
    DenseOperator::new(m)
}

/// A `d² × d²` superoperator acting on column-stacked `d × d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: CMatrix,
}

impl SuperOperator {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits, MAX_CHANNEL_QUBITS)?;
        let d = 1usize << n_qubits;
        Ok(Self {
            dim: d,
            matrix: CMatrix::identity(d * d, d * d),
        })
    }

    /// `ρ ↦ UρU†`, i.e. `conj(U) ⊗ U`.
    pub fn unitary(u: &DenseOperator) -> Self {
        Self {
            dim: u.dim(),
            matrix: u.matrix.conjugate().kronecker(&u.matrix),
        }
    }

    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Dimension(format!(
                "superoperator for dim {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        Ok(Self { dim, matrix })
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim;
        let v = DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        CMatrix::from_column_slice(d, d, out.as_slice())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SuperOperator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("composing channels of different size".into()));
        }
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `self^n` by repeated squaring.
    pub fn power(&self, mut n: u64) -> Self {
        let d2 = self.dim * self.dim;
        let mut result = CMatrix::identity(d2, d2);
        let mut base = self.matrix.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Self {
            dim: self.dim,
            matrix: result,
        }
    }

    /// Largest deviation of `Tr[E(|i⟩⟨j|)]` from `δ_ij`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let tr: Complex64 = (0..d).map(|a| self.matrix[(a * d + a, j * d + i)]).sum();
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((tr - target).norm());
            }
        }
        worst
    }

    /// The normalized Choi state `(E ⊗ id)(|Φ⟩⟨Φ|)`, system index first.
    pub fn choi(&self) -> ChoiState {
        let d = self.dim;
        let scale = 1.0 / d as f64;
        let mut j = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for jj in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        j[(i * d + a, jj * d + b)] = self.matrix[(b * d + a, jj * d + i)] * scale;
                    }
                }
            }
        }
        ChoiState { matrix: j }
    }

    /// Trace-preserving and completely positive within the module tolerances.
    pub fn is_channel(&self) -> bool {
        self.trace_preservation_error() <= TP_TOL && self.choi().min_eigenvalue() >= -CP_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    matrix: CMatrix,
}

impl ChoiState {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_part(&self.matrix).symmetric_eigenvalues().min()
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `‖A‖₁` for Hermitian `A`: the sum of absolute eigenvalues, which equals
/// the sum of singular values.
pub fn trace_norm_hermitian(a: &CMatrix) -> f64 {
    hermitian_part(a)
        .symmetric_eigenvalues()
        .iter()
        .map(|w| w.abs())
        .sum()
}

/// `½‖J(a) − J(b)‖₁` for normalized Choi states; a lower bound on the
/// diamond distance between the two channels.
pub fn choi_distance(a: &SuperOperator, b: &SuperOperator) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::Dimension(format!(
            "channels act on dimensions {} and {}",
            a.dim, b.dim
        )));
    }
    let diff = a.choi().matrix - b.choi().matrix;
    Ok(0.5 * trace_norm_hermitian(&diff))
}

/// The single qDRIFT step `E(ρ) = Σ_j (h_j/λ)·e^{iτH_j} ρ e^{-iτH_j}`.
pub fn qdrift_channel(h: &Hamiltonian, tau: f64) -> Result<SuperOperator> {
    check_qubits(h.n_qubits(), MAX_CHANNEL_QUBITS)?;
    let d = 1usize << h.n_qubits();
    let mut acc = CMatrix::zeros(d * d, d * d);
    for term in h.terms() {
        let p = term.weight() / h.lambda();
        let unitary = SuperOperator::unitary(&pauli_rotation(term.op(), tau)?);
        acc += unitary.matrix * Complex64::new(p, 0.0);
    }
    SuperOperator::from_matrix(d, acc)
}

/// One `N`-th of the target evolution, `ρ ↦ e^{itH/N} ρ e^{-itH/N}`.
pub fn segment_channel(h: &Hamiltonian, t: f64, n: u64) -> Result<SuperOperator> {
    if n == 0 {
        return Err(Error::domain("N", "must be at least 1"));
    }
    if let [term] = h.terms() {
        // H = λ·sP, so the Pauli identity is exact and matches the qDRIFT step
        let theta = h.lambda() * t / n as f64;
        return Ok(SuperOperator::unitary(&pauli_rotation(term.op(), theta)?));
    }
    let hm = hamiltonian_matrix(h)?;
    Ok(SuperOperator::unitary(&unitary_exp(&hm, t / n as f64)?))
}

/// The full evolution channel for time `t`.
pub fn target_channel(h: &Hamiltonian, t: f64) -> Result<SuperOperator> {
    segment_channel(h, t, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: u64,
    /// Choi-state distance between one qDRIFT step and one segment.
    pub d_lower: f64,
    /// `(2λ²t²/N²)·e^{2λt/N}`
    pub bound: f64,
}

impl BoundRow {
    pub fn ratio(&self) -> f64 {
        self.d_lower / self.bound
    }

    pub fn holds(&self) -> bool {
        self.d_lower <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    pub const CSV_HEADER: &'static str = "N,d_lower,bound,ratio";

    pub fn first_violation(&self) -> Option<&BoundRow> {
        self.rows.iter().find(|r| !r.holds())
    }

    pub fn all_hold(&self) -> bool {
        self.first_violation().is_none()
    }

    /// Least-squares slope of `ln d_lower` against `ln N`.
    pub fn loglog_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.d_lower > 0.0)
            .map(|r| ((r.n as f64).ln(), r.d_lower.ln()))
            .collect();
        least_squares_slope(&pts)
    }

    pub fn to_csv(&self) -> String {
        use crate::format::sci;
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.n, sci(r.d_lower), sci(r.bound), sci(r.ratio())));
        }
        out
    }
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Compares one qDRIFT step with one segment for every `N` in `ns`.
pub fn verify_bound(h: &Hamiltonian, t: f64, ns: &[u64]) -> Result<BoundTable> {
    verify_bound_scaled(h, t, ns, 1.0)
}

/// As [`verify_bound`] with the step angle set to `angle_scale·λt/N`.
/// Any scale other than 1 breaks first-order matching; `2.0` is the
/// negative control used by the verify suite.
pub fn verify_bound_scaled(h: &Hamiltonian, t: f64, ns: &[u64], angle_scale: f64) -> Result<BoundTable> {
    require_positive("t", t)?;
    let lambda = h.lambda();
    let rows = ns
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::domain("N", "must be at least 1"));
            }
            let tau = angle_scale * lambda * t / n as f64;
            let d_lower = choi_distance(&segment_channel(h, t, n)?, &qdrift_channel(h, tau)?)?;
            Ok(BoundRow {
                n,
                d_lower,
                bound: qdrift::step_error_bound(lambda, t, n as f64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundTable { rows })
}

fn random_state(d: usize, rng: &mut SeededRng) -> CMatrix {
    let mut psi = DVector::from_iterator(
        d,
        (0..d).map(|_| Complex64::new(rng.next_gaussian(), rng.next_gaussian())),
    );
    let norm = psi.norm();
    psi /= Complex64::new(norm, 0.0);
    &psi * psi.adjoint()
}

/// A random orthogonal projector of rank `1..d`.
fn random_projector(d: usize, rng: &mut SeededRng) -> CMatrix {
    let rank = 1 + rng.next_index(d.max(2) - 1);
    let gaussian = CMatrix::from_fn(d, rank.min(d), |_, _| {
        Complex64::new(rng.next_gaussian(), rng.next_gaussian())
    });
    let q = gaussian.qr().q();
    &q * q.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionTrial {
    /// `½‖(E^N − U)(ρ)‖₁`
    pub trace_distance: f64,
    /// `|Tr[M·(E^N − U)(ρ)]|` for a random projector `M`.
    pub expectation_error: f64,
    /// `2‖M‖·trace_distance`
    pub expectation_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub n: u64,
    /// `(2λ²t²/N)·e^{2λt/N}`
    pub bound: f64,
    pub trials: Vec<CompositionTrial>,
}

impl CompositionReport {
    pub fn max_trace_distance(&self) -> f64 {
        self.trials.iter().map(|t| t.trace_distance).fold(0.0, f64::max)
    }

    pub fn within_bound(&self) -> bool {
        self.trials.iter().all(|t| t.trace_distance <= self.bound)
    }

    pub fn expectations_within_bound(&self) -> bool {
        // the inequality is exact; allow for rounding in the two sides
        self.trials
            .iter()
            .all(|t| t.expectation_error <= t.expectation_bound + 1e-14)
    }
}

/// Applies `E^N` and the exact evolution to random pure states and random
/// projective measurements.
pub fn composition_check(h: &Hamiltonian, t: f64, n: u64, trials: usize, seed: u64) -> Result<CompositionReport> {
    check_qubits(h.n_qubits(), MAX_POWER_QUBITS)?;
    require_positive("t", t)?;
    if n == 0 {
        return Err(Error::domain("N", "must be at least 1"));
    }
    let lambda = h.lambda();
    let drift = qdrift_channel(h, lambda * t / n as f64)?.power(n);
    let target = target_channel(h, t)?;
    let d = target.dim();
    let mut rng = SeededRng::new(seed);
    let trials = (0..trials)
        .map(|_| {
            let rho = random_state(d, &mut rng);
            let delta = drift.apply(&rho) - target.apply(&rho);
            let trace_distance = 0.5 * trace_norm_hermitian(&delta);
            let m = random_projector(d, &mut rng);
            let m_norm = DenseOperator::new(m.clone()).map(|op| op.operator_norm())?;
            Ok(CompositionTrial {
                trace_distance,
                expectation_error: (m * &delta).trace().norm(),
                expectation_bound: 2.0 * m_norm * trace_distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompositionReport {
        n,
        bound: qdrift::total_error_bound(lambda, t, n as f64),
        trials,
    })
}

/// The unitary a compiled circuit implements, gates applied in list order.
pub fn circuit_unitary(h: &Hamiltonian, circuit: &crate::qdrift::Circuit) -> Result<DenseOperator> {
    check_qubits(h.n_qubits(), MAX_CHANNEL_QUBITS)?;
    let d = 1usize << h.n_qubits();
    let paulis = h
        .terms()
        .iter()
        .map(|t| pauli_to_matrix(t.op()).map(DenseOperator::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    let mut u = CMatrix::identity(d, d);
    for g in &circuit.gates {
        let (s, c) = g.angle.sin_cos();
        u = &u * Complex64::new(c, 0.0) + (&paulis[g.term] * &u) * (I * s);
    }
    DenseOperator::new(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalChannel {
    /// Average of the per-seed unitary channels.
    pub channel: SuperOperator,
    /// Choi distance of each seed's unitary to the exact evolution.
    pub per_seed_distance: Vec<f64>,
}

/// Averages the unitary channels of `compile(h, t, eps, seed)` over `seeds`.
pub fn empirical_channel(h: &Hamiltonian, t: f64, eps: f64, seeds: &[u64]) -> Result<EmpiricalChannel> {
    check_qubits(h.n_qubits(), MAX_POWER_QUBITS)?;
    if seeds.is_empty() {
        return Err(Error::domain("seeds", "need at least one seed"));
    }
    let target = target_channel(h, t)?;
    let d = target.dim();
    let mut acc = CMatrix::zeros(d * d, d * d);
    let mut per_seed_distance = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let circuit = qdrift::compile(h, t, eps, seed, CountMode::Exact)?;
        let channel = SuperOperator::unitary(&circuit_unitary(h, &circuit)?);
        per_seed_distance.push(choi_distance(&channel, &target)?);
        acc += channel.matrix;
    }
    acc /= Complex64::new(seeds.len() as f64, 0.0);
    Ok(EmpiricalChannel {
        channel: SuperOperator::from_matrix(d, acc)?,
        per_seed_distance,
    })
}
