//! Second-order Trotter–Suzuki evolution `exp(-iHt)` with two interchangeable
//! backends: fused Pauli rotations and their gate-level expansion.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::FRAC_PI_2;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubit::{Pauli, PauliString, QubitHamiltonian};
use crate::state::{Circuit, Executor, Gate, StateError, StateVector};

/// Slice-length ceiling for light systems (atomic units of time).
pub const DEFAULT_TAU_FLOOR: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("evolution time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("plan was built for a different Hamiltonian or term order")]
    BackendMismatch,
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Basis change, CNOT parity ladder and single-qubit Z rotation per term.
    Gate,
    /// One Pauli-rotation kernel per term.
    #[default]
    Fused,
}

/// How the target slice length follows `|h00|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrotterRule {
    /// `tau = min(floor, 1/|h00|)`: finer slices for deeper core levels.
    #[default]
    Inverted,
    /// `tau = max(floor, |h00|)`, read literally.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterSchedule {
    pub rule: TrotterRule,
    pub tau_floor: f64,
}

impl Default for TrotterSchedule {
    fn default() -> Self {
        Self {
            rule: TrotterRule::Inverted,
            tau_floor: DEFAULT_TAU_FLOOR,
        }
    }
}

impl TrotterSchedule {
    pub fn target_tau(&self, h00: f64) -> f64 {
        let mag = h00.abs();
        match self.rule {
            TrotterRule::Inverted if mag > 0.0 => self.tau_floor.min(1.0 / mag),
            TrotterRule::Inverted => self.tau_floor,
            TrotterRule::Literal => self.tau_floor.max(mag),
        }
    }
}

/// Number of slices `M = ceil(t / tau_target)`.
pub fn slice_count(t: f64, h00: f64, schedule: &TrotterSchedule) -> Result<usize, EvolutionError> {
    if t.is_nan() || t <= 0.0 {
        return Err(EvolutionError::NonPositiveTime(t));
    }
    let ratio = t / schedule.target_tau(h00);
    // Absorb rounding in t/tau so exact multiples do not gain a slice.
    let m = (ratio * (1.0 - 1e-12)).ceil();
    Ok((m as usize).max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub t: f64,
    pub m_slices: usize,
    pub tau: f64,
    term_order: Vec<usize>,
    fingerprint: u64,
}

fn fingerprint(h: &QubitHamiltonian) -> u64 {
    let mut hasher = DefaultHasher::new();
    h.n_qubits().hash(&mut hasher);
    for (w, s) in h.terms() {
        w.to_bits().hash(&mut hasher);
        s.hash(&mut hasher);
    }
    hasher.finish()
}

impl TrotterPlan {
    /// Plan over the canonical term order. `t = 0` gives zero slices (identity).
    pub fn new(h: &QubitHamiltonian, t: f64, m_slices: usize) -> Self {
        assert!(t.is_finite() && t >= 0.0, "evolution time must be finite and nonnegative");
        let m_slices = if t == 0.0 { 0 } else { m_slices.max(1) };
        let tau = if m_slices == 0 { 0.0 } else { t / m_slices as f64 };
        Self {
            t,
            m_slices,
            tau,
            term_order: (0..h.len()).collect(),
            fingerprint: fingerprint(h),
        }
    }

    /// Plan with `M` from [`slice_count`].
    pub fn scheduled(
        h: &QubitHamiltonian,
        t: f64,
        h00: f64,
        schedule: &TrotterSchedule,
    ) -> Result<Self, EvolutionError> {
        let m = slice_count(t, h00, schedule)?;
        Ok(Self::new(h, t, m))
    }

    pub fn term_order(&self) -> &[usize] {
        &self.term_order
    }

    pub fn matches(&self, h: &QubitHamiltonian) -> bool {
        self.term_order.len() == h.len() && self.fingerprint == fingerprint(h)
    }
}

/// Appends `exp(-i theta/2 P)` to `c` using the chosen backend.
fn emit_rotation(c: &mut Circuit, p: &PauliString, theta: f64, backend: Backend) -> Result<(), StateError> {
    if backend == Backend::Fused {
        return c.push(Gate::PauliRot { string: *p, theta });
    }
    if p.is_identity() {
        // Global phase e^{-i theta/2} on the designated qubit 0: phase |1>, flip,
        // phase the former |0>, flip back.
        let half = -0.5 * theta;
        c.push(Gate::Phase { qubit: 0, theta: half })?;
        c.push(Gate::X(0))?;
        c.push(Gate::Phase { qubit: 0, theta: half })?;
        return c.push(Gate::X(0));
    }
    let ops: Vec<(usize, Pauli)> = p.ops().collect();
    let qubits: Vec<usize> = ops.iter().map(|o| o.0).collect();
    let last = *qubits.last().expect("non-identity string");

    for &(q, op) in &ops {
        match op {
            Pauli::X => c.push(Gate::Had(q))?,
            Pauli::Y => {
                c.push(Gate::Phase { qubit: q, theta: -FRAC_PI_2 })?;
                c.push(Gate::Had(q))?;
            }
            Pauli::Z => {}
        }
    }
    for w in qubits.windows(2) {
        c.push(Gate::Cnot { control: w[0], target: w[1] })?;
    }
    c.push(Gate::PauliRot {
        string: PauliString::single(last, Pauli::Z),
        theta,
    })?;
    for w in qubits.windows(2).rev() {
        c.push(Gate::Cnot { control: w[0], target: w[1] })?;
    }
    for &(q, op) in ops.iter().rev() {
        match op {
            Pauli::X => c.push(Gate::Had(q))?,
            Pauli::Y => {
                c.push(Gate::Had(q))?;
                c.push(Gate::Phase { qubit: q, theta: FRAC_PI_2 })?;
            }
            Pauli::Z => {}
        }
    }
    Ok(())
}

fn slice_circuit(
    h: &QubitHamiltonian,
    order: &[usize],
    tau: f64,
    n_qubits: usize,
    backend: Backend,
) -> Result<Circuit, StateError> {
    let mut c = Circuit::new(n_qubits);
    let terms = h.terms();
    for &j in order.iter().chain(order.iter().rev()) {
        let (w, p) = &terms[j];
        // exp(-i w P tau/2) = PauliRot(P, w tau)
        emit_rotation(&mut c, p, w * tau, backend)?;
    }
    Ok(c)
}

/// One symmetric slice: forward sweep of half-step factors, then the reverse sweep.
pub fn build_second_order_step(h: &QubitHamiltonian, tau: f64, backend: Backend) -> Circuit {
    let order: Vec<usize> = (0..h.len()).collect();
    slice_circuit(h, &order, tau, h.n_qubits(), backend).expect("terms fit the register")
}

/// Applies `plan.m_slices` second-order slices to the low qubits of `s`.
///
/// `s` may be wider than the Hamiltonian (e.g. an ancilla above the system register).
pub fn apply_evolution(
    s: &mut StateVector,
    h: &QubitHamiltonian,
    plan: &TrotterPlan,
    backend: Backend,
    exec: &Executor,
) -> Result<(), EvolutionError> {
    if !plan.matches(h) {
        return Err(EvolutionError::BackendMismatch);
    }
    if s.n_qubits() < h.n_qubits() {
        return Err(StateError::LengthMismatch {
            expected: h.n_qubits(),
            found: s.n_qubits(),
        }
        .into());
    }
    if plan.m_slices == 0 {
        return Ok(());
    }
    let slice = slice_circuit(h, plan.term_order(), plan.tau, s.n_qubits(), backend)?;
    for _ in 0..plan.m_slices {
        exec.apply_circuit(s, &slice)?;
    }
    Ok(())
}

/// Full evolution as an explicit gate list.
pub fn evolution_circuit(
    h: &QubitHamiltonian,
    plan: &TrotterPlan,
    n_qubits: usize,
    backend: Backend,
) -> Result<Circuit, EvolutionError> {
    if !plan.matches(h) {
        return Err(EvolutionError::BackendMismatch);
    }
    let slice = slice_circuit(h, plan.term_order(), plan.tau, n_qubits, backend)?;
    let mut c = Circuit::new(n_qubits);
    for _ in 0..plan.m_slices {
        c.extend_from(&slice)?;
    }
    Ok(c)
}
