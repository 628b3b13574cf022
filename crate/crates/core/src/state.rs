//! Dense state-vector simulation.
//!
//! Basis index bit `q` holds the value of qubit `q`. Every kernel computes each output
//! amplitude from a fixed formula over the input amplitudes, and reductions are summed
//! over fixed-size blocks in index order, so results are bitwise identical for any
//! worker count.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubit::{Determinant, PauliString, MAX_QUBITS};

/// Amplitudes per parallel work item and per reduction block.
const BLOCK: usize = 1 << 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
    #[error("length mismatch: expected {expected} qubits, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("register of {0} qubits is not supported")]
    UnsupportedSize(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Had(usize),
    X(usize),
    Cnot { control: usize, target: usize },
    /// Multiplies the `|1>` amplitudes of qubit `q` by `e^{i theta}`.
    Phase { qubit: usize, theta: f64 },
    /// `exp(-i theta/2 P)`; the identity string is a global phase.
    PauliRot { string: PauliString, theta: f64 },
    /// Controlled bit flip used for the ancilla-controlled excitation.
    CtrlX { control: usize, target: usize },
}

impl Gate {
    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Phase { qubit, theta } => Gate::Phase {
                qubit: *qubit,
                theta: -theta,
            },
            Gate::PauliRot { string, theta } => Gate::PauliRot {
                string: *string,
                theta: -theta,
            },
            g => g.clone(),
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Had(q) | Gate::X(q) | Gate::Phase { qubit: q, .. } => vec![*q],
            Gate::Cnot { control, target } | Gate::CtrlX { control, target } => {
                vec![*control, *target]
            }
            Gate::PauliRot { string, .. } => string.ops().map(|(q, _)| q).collect(),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), StateError> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= n_qubits {
                return Err(StateError::IndexOutOfRange { index: q, n_qubits });
            }
            if qs[..i].contains(&q) {
                return Err(StateError::RepeatedQubit(q));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), StateError> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend_from(&mut self, other: &Circuit) -> Result<(), StateError> {
        if other.n_qubits > self.n_qubits {
            return Err(StateError::LengthMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Gates in reverse order, each inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self, StateError> {
        if n_qubits == 0 || n_qubits > 30 {
            return Err(StateError::UnsupportedSize(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Normalizes the given amplitudes; length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, StateError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::UnsupportedSize(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let mut s = Self { n_qubits, amps };
        let norm = s.norm_sqr().sqrt();
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    /// Wraps amplitudes as-is (caller guarantees normalization).
    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        debug_assert!(amps.len().is_power_of_two());
        Self {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        }
    }

    /// Seeded Haar-like random state (Gaussian amplitudes, normalized).
    pub fn random(n_qubits: usize, seed: u64) -> Result<Self, StateError> {
        if n_qubits == 0 || n_qubits > 30 {
            return Err(StateError::UnsupportedSize(n_qubits));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let normal = rand_distr::StandardNormal;
        let amps = (0..1usize << n_qubits)
            .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        block_sum(&self.amps, |_, a| a.norm_sqr())
    }

    /// Largest elementwise amplitude difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Multiplies every amplitude by `e^{i phi}`.
    pub fn apply_global_phase(&mut self, phi: f64) {
        let f = Complex64::from_polar(1.0, phi);
        self.amps.iter_mut().for_each(|a| *a *= f);
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<(), StateError> {
        Executor::sequential().apply_gate(self, g)
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<(), StateError> {
        Executor::sequential().apply_circuit(self, c)
    }
}

/// Computational basis state encoding `d` on `n_qubits` qubits.
pub fn basis_state(n_qubits: usize, d: &Determinant) -> Result<StateVector, StateError> {
    if d.len() != n_qubits {
        return Err(StateError::LengthMismatch {
            expected: n_qubits,
            found: d.len(),
        });
    }
    let mut s = StateVector::zero_state(n_qubits)?;
    s.amps[0] = Complex64::new(0.0, 0.0);
    s.amps[d.bits() as usize] = Complex64::new(1.0, 0.0);
    Ok(s)
}

/// Exact probability of reading `0` on `ancilla`.
pub fn ancilla_prob0(s: &StateVector, ancilla: usize) -> Result<f64, StateError> {
    if ancilla >= s.n_qubits {
        return Err(StateError::IndexOutOfRange {
            index: ancilla,
            n_qubits: s.n_qubits,
        });
    }
    let bit = 1usize << ancilla;
    Ok(block_sum(&s.amps, |i, a| if i & bit == 0 { a.norm_sqr() } else { 0.0 }).min(1.0))
}

/// Number of `0` outcomes in `shots` draws with probability `p`.
pub fn sample_shots<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> u64 {
    let p = if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) };
    Binomial::new(shots, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// Independent RNG stream for a `(seed, stream)` pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Registers shorter than this run inline even on a pool.
const PARALLEL_MIN_LEN: usize = 1 << 14;

/// Sum over fixed blocks in index order, independent of scheduling.
fn block_sum(amps: &[Complex64], f: impl Fn(usize, &Complex64) -> f64) -> f64 {
    amps.chunks(BLOCK)
        .enumerate()
        .map(|(b, chunk)| {
            chunk
                .iter()
                .enumerate()
                .map(|(i, a)| f(b * BLOCK + i, a))
                .sum::<f64>()
        })
        .sum()
}

/// Runs kernels either inline or on a dedicated rayon pool.
#[derive(Clone, Default)]
pub struct Executor {
    pool: Option<Arc<rayon::ThreadPool>>,
    /// Output buffer recycled across out-of-place updates.
    scratch: Arc<Mutex<Vec<Complex64>>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("workers", &self.workers())
            .finish()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Self::default()
    }

    /// `workers <= 1` yields the sequential executor.
    pub fn with_workers(workers: usize) -> Self {
        if workers <= 1 {
            return Self::sequential();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        Self {
            pool: Some(Arc::new(pool)),
            scratch: Arc::default(),
        }
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    fn pool_for(&self, len: usize) -> Option<&rayon::ThreadPool> {
        self.pool.as_deref().filter(|_| len >= PARALLEL_MIN_LEN)
    }

    /// In-place elementwise update.
    fn map_in_place(&self, amps: &mut [Complex64], f: impl Fn(usize, Complex64) -> Complex64 + Sync) {
        match self.pool_for(amps.len()) {
            None => amps.iter_mut().enumerate().for_each(|(i, a)| *a = f(i, *a)),
            Some(pool) => pool.install(|| {
                amps.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
                    for (i, a) in chunk.iter_mut().enumerate() {
                        *a = f(b * BLOCK + i, *a);
                    }
                })
            }),
        }
    }

    /// Out-of-place update: `out[i] = f(i, input)`.
    fn gather(&self, state: &mut StateVector, f: impl Fn(usize, &[Complex64]) -> Complex64 + Sync) {
        let mut scratch = self.scratch.lock().unwrap_or_else(|e| e.into_inner());
        let mut out = std::mem::take(&mut *scratch);
        let input = &state.amps;
        if out.len() != input.len() {
            out = vec![Complex64::new(0.0, 0.0); input.len()];
        }
        match self.pool_for(input.len()) {
            None => out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i, input)),
            Some(pool) => pool.install(|| {
                out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
                    for (i, o) in chunk.iter_mut().enumerate() {
                        *o = f(b * BLOCK + i, input);
                    }
                })
            }),
        }
        *scratch = std::mem::replace(&mut state.amps, out);
    }

    pub fn apply_gate(&self, s: &mut StateVector, g: &Gate) -> Result<(), StateError> {
        g.validate(s.n_qubits)?;
        match g {
            Gate::Had(q) => {
                let bit = 1usize << q;
                self.gather(s, |i, a| {
                    if i & bit == 0 {
                        (a[i] + a[i | bit]) * FRAC_1_SQRT_2
                    } else {
                        (a[i ^ bit] - a[i]) * FRAC_1_SQRT_2
                    }
                });
            }
            Gate::X(q) => {
                let bit = 1usize << q;
                self.gather(s, |i, a| a[i ^ bit]);
            }
            Gate::Cnot { control, target } | Gate::CtrlX { control, target } => {
                let c = 1usize << control;
                let t = 1usize << target;
                self.gather(s, |i, a| if i & c != 0 { a[i ^ t] } else { a[i] });
            }
            Gate::Phase { qubit, theta } => {
                let bit = 1usize << qubit;
                let f = Complex64::from_polar(1.0, *theta);
                self.map_in_place(&mut s.amps, |i, a| if i & bit != 0 { a * f } else { a });
            }
            Gate::PauliRot { string, theta } => self.pauli_rotation(s, string, *theta),
        }
        Ok(())
    }

    /// `exp(-i theta/2 P) = cos(theta/2) I - i sin(theta/2) P` over amplitude pairs.
    fn pauli_rotation(&self, s: &mut StateVector, p: &PauliString, theta: f64) {
        let (sin, cos) = (0.5 * theta).sin_cos();
        if p.is_identity() {
            let f = Complex64::new(cos, -sin);
            self.map_in_place(&mut s.amps, |_, a| a * f);
        } else if p.is_diagonal() {
            let z = p.sign_mask() as usize;
            let even = Complex64::new(cos, -sin);
            let odd = Complex64::new(cos, sin);
            self.map_in_place(&mut s.amps, |i, a| {
                if (i & z).count_ones() & 1 == 0 {
                    a * even
                } else {
                    a * odd
                }
            });
        } else {
            let flip = p.flip_mask() as usize;
            let z = p.sign_mask() as usize;
            let coupling = Complex64::new(0.0, -sin) * p.phase_on(0);
            self.gather(s, |i, a| {
                let j = i ^ flip;
                let c = if (j & z).count_ones() & 1 == 0 { coupling } else { -coupling };
                a[i] * cos + c * a[j]
            });
        }
    }

    pub fn apply_circuit(&self, s: &mut StateVector, c: &Circuit) -> Result<(), StateError> {
        if c.n_qubits > s.n_qubits {
            return Err(StateError::LengthMismatch {
                expected: s.n_qubits,
                found: c.n_qubits,
            });
        }
        for g in &c.gates {
            self.apply_gate(s, g)?;
        }
        Ok(())
    }
}

const _: () = assert!(MAX_QUBITS < usize::BITS as usize);
