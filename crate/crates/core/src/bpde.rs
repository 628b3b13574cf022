//! Bayesian phase difference estimation.
//!
//! Each iteration scans the interference probability of the ancilla over a grid of
//! trial gaps centred on the prior, fits a Gaussian on a fixed `0.5` baseline,
//! multiplies it into the prior, and stops once the posterior width drops below
//! `E_thre = thresh_coeff * M / t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{apply_evolution, evolution_circuit, Backend, EvolutionError, TrotterPlan, TrotterSchedule};
use crate::integrals::SpinOrbitalIntegrals;
use crate::qubit::{determinant_expectation, jordan_wigner, Determinant, QubitError, QubitHamiltonian, DEFAULT_PRUNE_CUTOFF};
use crate::state::{ancilla_prob0, basis_state, sample_shots, stream_rng, Circuit, Executor, Gate, StateError, StateVector};

/// Fixed baseline of the likelihood model.
pub const LIKELIHOOD_BASELINE: f64 = 0.5;

const FIT_MAX_ITERATIONS: usize = 200;
const FIT_REL_TOL: f64 = 1e-10;
const FIT_MIN_AMPLITUDE: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BpdeError {
    #[error("reference determinants are identical")]
    IdenticalReferences,
    #[error("reference determinants hold {0} and {1} particles")]
    ParticleNumberMismatch(u32, u32),
    #[error("length mismatch: expected {expected} orbitals, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("need at least 5 scan points, got {0}")]
    TooFewPoints(usize),
    #[error("likelihood fit has non-finite or non-positive parameters")]
    InvalidFit,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Qubit(#[from] QubitError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian {
    pub fn new(mean: f64, std: f64) -> Self {
        assert!(mean.is_finite() && std.is_finite() && std > 0.0, "invalid Gaussian");
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub delta_eps: f64,
    pub prob0: f64,
    /// Zero when `prob0` is exact.
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodFit {
    pub amplitude: f64,
    pub mean: f64,
    pub std: f64,
    pub baseline: f64,
    pub rms_residual: f64,
    /// `false` means the centroid fallback supplied `mean` and `std`.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Binomial shot sampling of the ancilla.
    #[default]
    Sampled,
    /// Exact ancilla probability.
    ExactProb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpdeConfig {
    pub n_scan: usize,
    pub shots: u64,
    /// `t = time_coeff / sigma`.
    pub time_coeff: f64,
    pub sigma_floor: f64,
    pub sigma_mult: f64,
    /// `E_thre = thresh_coeff * M / t`.
    pub thresh_coeff: f64,
    pub trotter: TrotterSchedule,
    /// Overrides `Re h1[0][0]` as the core integral driving the slice rule.
    pub h00: Option<f64>,
    pub max_iterations: usize,
    pub mode: SampleMode,
    pub seed: u64,
    pub backend: Backend,
    pub workers: usize,
    pub prune_cutoff: f64,
}

impl Default for BpdeConfig {
    fn default() -> Self {
        Self {
            n_scan: 21,
            shots: 5000,
            time_coeff: 1.8,
            sigma_floor: 0.1,
            sigma_mult: 10.0,
            thresh_coeff: 0.001,
            trotter: TrotterSchedule::default(),
            h00: None,
            max_iterations: 100,
            mode: SampleMode::Sampled,
            seed: 0,
            backend: Backend::Fused,
            workers: 1,
            prune_cutoff: DEFAULT_PRUNE_CUTOFF,
        }
    }
}

impl BpdeConfig {
    pub fn validate(&self) -> Result<(), BpdeError> {
        let bad = |m: &str| Err(BpdeError::InvalidConfig(m.to_string()));
        if self.n_scan < 5 || self.n_scan.is_multiple_of(2) {
            return bad("n_scan must be odd and at least 5");
        }
        if self.shots == 0 {
            return bad("shots must be positive");
        }
        let coeffs = [
            self.time_coeff,
            self.sigma_floor,
            self.sigma_mult,
            self.thresh_coeff,
            self.trotter.tau_floor,
        ];
        if coeffs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return bad("coefficients must be positive and finite");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if self.prune_cutoff.is_nan() || self.prune_cutoff < 0.0 {
            return bad("prune_cutoff must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub prior: Gaussian,
    pub t: f64,
    pub m_slices: usize,
    pub e_thre: f64,
    pub scan: Vec<ScanPoint>,
    pub fit: LikelihoodFit,
    pub posterior: Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpdeResult {
    /// Final posterior mean (Hartree).
    pub gap: f64,
    pub sigma_final: f64,
    /// Threshold of the final iteration.
    pub e_thre: f64,
    pub converged: bool,
    /// `<d1|H|d1> - <d0|H|d0>`.
    pub mu_ini: f64,
    pub total_shots: u64,
    pub n_qubits: usize,
    pub h00: f64,
    pub d0: String,
    pub d1: String,
    pub config: BpdeConfig,
    pub iterations: Vec<IterationRecord>,
}

fn check_references(h: &QubitHamiltonian, d0: &Determinant, d1: &Determinant) -> Result<(), BpdeError> {
    for d in [d0, d1] {
        if d.len() != h.n_qubits() {
            return Err(BpdeError::LengthMismatch {
                expected: h.n_qubits(),
                found: d.len(),
            });
        }
    }
    if d0 == d1 {
        return Err(BpdeError::IdenticalReferences);
    }
    Ok(())
}

/// Controlled excitation: one ancilla-controlled flip per differing orbital.
fn excitation_gates(d0: &Determinant, d1: &Determinant, ancilla: usize) -> Vec<Gate> {
    d0.difference(d1)
        .into_iter()
        .map(|q| Gate::CtrlX {
            control: ancilla,
            target: q,
        })
        .collect()
}

/// Gates after the evolution-independent prefix: phase kick and closing Hadamard.
fn readout_gates(ancilla: usize, delta_eps: f64, t: f64) -> [Gate; 2] {
    [
        Gate::Phase {
            qubit: ancilla,
            theta: delta_eps * t,
        },
        Gate::Had(ancilla),
    ]
}

/// Interference circuit on `n + 1` qubits (ancilla = qubit `n`). The system register
/// must be prepared in `d0` by the caller, see [`reference_state`].
pub fn build_bpde_circuit(
    h: &QubitHamiltonian,
    d0: &Determinant,
    d1: &Determinant,
    delta_eps: f64,
    plan: &TrotterPlan,
    backend: Backend,
) -> Result<Circuit, BpdeError> {
    check_references(h, d0, d1)?;
    let n = h.n_qubits();
    let ancilla = n;
    let excit = excitation_gates(d0, d1, ancilla);
    let mut c = Circuit::new(n + 1);
    c.push(Gate::Had(ancilla))?;
    for g in &excit {
        c.push(g.clone())?;
    }
    c.extend_from(&evolution_circuit(h, plan, n + 1, backend)?)?;
    for g in excit.iter().rev() {
        c.push(g.clone())?;
    }
    for g in readout_gates(ancilla, delta_eps, plan.t) {
        c.push(g)?;
    }
    Ok(c)
}

/// `|0>_ancilla |d0>` on `n + 1` qubits.
pub fn reference_state(d0: &Determinant) -> Result<StateVector, StateError> {
    let n = d0.len();
    let extended = Determinant::new(d0.bits(), n + 1);
    basis_state(n + 1, &extended)
}

/// State just before the phase kick; shared by every point of a scan.
fn interference_prefix(
    h: &QubitHamiltonian,
    d0: &Determinant,
    d1: &Determinant,
    plan: &TrotterPlan,
    backend: Backend,
    exec: &Executor,
) -> Result<StateVector, BpdeError> {
    let ancilla = h.n_qubits();
    let excit = excitation_gates(d0, d1, ancilla);
    let mut s = reference_state(d0)?;
    exec.apply_gate(&mut s, &Gate::Had(ancilla))?;
    for g in &excit {
        exec.apply_gate(&mut s, g)?;
    }
    apply_evolution(&mut s, h, plan, backend, exec)?;
    for g in excit.iter().rev() {
        exec.apply_gate(&mut s, g)?;
    }
    Ok(s)
}

/// Trial gaps `mu - sigma + 2 sigma i / (n - 1)`.
pub fn scan_grid(prior: &Gaussian, n_scan: usize) -> Vec<f64> {
    let denom = (n_scan - 1) as f64;
    (0..n_scan)
        .map(|i| prior.mean - prior.std + 2.0 * prior.std * i as f64 / denom)
        .collect()
}

/// Identifies the shot-noise streams of one scan. Point `i` of iteration `k` draws from
/// stream `(k << 20) | i` of the run seed, so counts do not depend on evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotStreams {
    pub seed: u64,
    pub iteration: u64,
}

/// Evaluates the interference probability across the prior window.
#[allow(clippy::too_many_arguments)]
pub fn scan_likelihood(
    h: &QubitHamiltonian,
    d0: &Determinant,
    d1: &Determinant,
    prior: &Gaussian,
    plan: &TrotterPlan,
    cfg: &BpdeConfig,
    streams: ShotStreams,
    exec: &Executor,
) -> Result<Vec<ScanPoint>, BpdeError> {
    check_references(h, d0, d1)?;
    let ancilla = h.n_qubits();
    let prefix = interference_prefix(h, d0, d1, plan, cfg.backend, exec)?;
    scan_grid(prior, cfg.n_scan)
        .into_iter()
        .enumerate()
        .map(|(i, delta_eps)| {
            let mut s = prefix.clone();
            for g in readout_gates(ancilla, delta_eps, plan.t) {
                exec.apply_gate(&mut s, &g)?;
            }
            let exact = ancilla_prob0(&s, ancilla)?;
            Ok(match cfg.mode {
                SampleMode::ExactProb => ScanPoint {
                    delta_eps,
                    prob0: exact,
                    shots: 0,
                },
                SampleMode::Sampled => {
                    let mut rng = stream_rng(streams.seed, (streams.iteration << 20) | i as u64);
                    let zeros = sample_shots(exact, cfg.shots, &mut rng);
                    ScanPoint {
                        delta_eps,
                        prob0: zeros as f64 / cfg.shots as f64,
                        shots: cfg.shots,
                    }
                }
            })
        })
        .collect()
}

#[inline]
fn model(x: f64, a: f64, m: f64, s: f64) -> f64 {
    LIKELIHOOD_BASELINE + a * (-(x - m).powi(2) / (2.0 * s * s)).exp()
}

fn sum_sq(points: &[ScanPoint], p: [f64; 3]) -> f64 {
    points
        .iter()
        .map(|pt| (pt.prob0 - model(pt.delta_eps, p[0], p[1], p[2])).powi(2))
        .sum()
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][k] = b[row];
        }
        *xk = det(m) / d;
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Levenberg–Marquardt minimisation of the squared residuals. Returns the parameters
/// and whether the relative step tolerance was met.
fn levenberg_marquardt(points: &[ScanPoint], start: [f64; 3]) -> ([f64; 3], bool) {
    let mut p = start;
    let mut cost = sum_sq(points, p);
    let mut lambda = 1e-3;
    for _ in 0..FIT_MAX_ITERATIONS {
        let (a, m, s) = (p[0], p[1], p[2]);
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for pt in points {
            let dx = pt.delta_eps - m;
            let g = (-dx * dx / (2.0 * s * s)).exp();
            let r = pt.prob0 - (LIKELIHOOD_BASELINE + a * g);
            let j = [g, a * g * dx / (s * s), a * g * dx * dx / (s * s * s)];
            for u in 0..3 {
                jtr[u] += j[u] * r;
                for v in 0..3 {
                    jtj[u][v] += j[u] * j[v];
                }
            }
        }
        loop {
            let mut damped = jtj;
            for (u, row) in damped.iter_mut().enumerate() {
                row[u] += lambda * jtj[u][u].max(1e-300);
            }
            let Some(step) = solve3(damped, jtr) else {
                lambda *= 10.0;
                if lambda > 1e16 {
                    return (p, false);
                }
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let trial_cost = sum_sq(points, trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let small = (0..3).all(|k| step[k].abs() <= FIT_REL_TOL * (trial[k].abs() + FIT_REL_TOL));
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                if small || cost == 0.0 {
                    return (p, true);
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                // No descent direction left: a stationary point.
                return (p, true);
            }
        }
    }
    (p, false)
}

/// Fits `0.5 + A exp(-(x - m)^2 / (2 s^2))` to the scan.
pub fn fit_gaussian(points: &[ScanPoint]) -> Result<LikelihoodFit, BpdeError> {
    if points.len() < 5 {
        return Err(BpdeError::TooFewPoints(points.len()));
    }
    let xmin = points.iter().map(|p| p.delta_eps).fold(f64::INFINITY, f64::min);
    let xmax = points.iter().map(|p| p.delta_eps).fold(f64::NEG_INFINITY, f64::max);
    let half_width = 0.5 * (xmax - xmin);
    let spacing = (xmax - xmin) / (points.len() - 1) as f64;
    let peak = points
        .iter()
        .copied()
        .fold(points[0], |best, p| if p.prob0 > best.prob0 { p } else { best });
    let amp0 = peak.prob0 - LIKELIHOOD_BASELINE;

    let fallback = || {
        let (wsum, xsum) = points
            .iter()
            .filter(|p| p.prob0 > LIKELIHOOD_BASELINE)
            .fold((0.0, 0.0), |(w, x), p| {
                let wi = p.prob0 - LIKELIHOOD_BASELINE;
                (w + wi, x + wi * p.delta_eps)
            });
        let mean = if wsum > 0.0 { xsum / wsum } else { 0.5 * (xmin + xmax) };
        let amplitude = amp0.max(0.0);
        let std = half_width;
        LikelihoodFit {
            amplitude,
            mean,
            std,
            baseline: LIKELIHOOD_BASELINE,
            rms_residual: (sum_sq(points, [amplitude, mean, std]) / points.len() as f64).sqrt(),
            converged: false,
        }
    };

    if amp0.is_nan() || amp0 <= FIT_MIN_AMPLITUDE || half_width.is_nan() || half_width <= 0.0 {
        return Ok(fallback());
    }
    let above = points
        .iter()
        .filter(|p| p.prob0 >= LIKELIHOOD_BASELINE + 0.5 * amp0)
        .count()
        .max(1);
    let s0 = 0.5 * spacing * above as f64;
    let (p, ok) = levenberg_marquardt(points, [amp0, peak.delta_eps, s0]);
    let (a, m, s) = (p[0], p[1], p[2].abs());
    let inside = m >= xmin - half_width && m <= xmax + half_width;
    let usable = a > FIT_MIN_AMPLITUDE && s > 0.0 && s.is_finite() && m.is_finite();
    if !ok || !inside || !usable {
        return Ok(fallback());
    }
    Ok(LikelihoodFit {
        amplitude: a,
        mean: m,
        std: s,
        baseline: LIKELIHOOD_BASELINE,
        rms_residual: (sum_sq(points, [a, m, s]) / points.len() as f64).sqrt(),
        converged: true,
    })
}

/// Product of the Gaussian prior with the Gaussian part of the likelihood.
pub fn bayes_update(prior: &Gaussian, fit: &LikelihoodFit) -> Result<Gaussian, BpdeError> {
    if !(fit.mean.is_finite() && fit.std.is_finite() && fit.std > 0.0) {
        return Err(BpdeError::InvalidFit);
    }
    let vp = prior.std * prior.std;
    let vl = fit.std * fit.std;
    let mean = (prior.mean * vl + fit.mean * vp) / (vp + vl);
    let std = prior.std * fit.std / (vp + vl).sqrt();
    if !(mean.is_finite() && std.is_finite() && std > 0.0) {
        return Err(BpdeError::InvalidFit);
    }
    Ok(Gaussian { mean, std })
}

/// Runs the estimator on a qubit Hamiltonian.
pub fn run_bpde_qubit(
    h: &QubitHamiltonian,
    h00: f64,
    d0: &Determinant,
    d1: &Determinant,
    cfg: &BpdeConfig,
) -> Result<BpdeResult, BpdeError> {
    cfg.validate()?;
    check_references(h, d0, d1)?;
    if d0.particle_count() != d1.particle_count() {
        return Err(BpdeError::ParticleNumberMismatch(d0.particle_count(), d1.particle_count()));
    }
    let exec = Executor::with_workers(cfg.workers);
    let mu_ini = determinant_expectation(h, d1)? - determinant_expectation(h, d0)?;
    let mut prior = Gaussian {
        mean: mu_ini,
        std: cfg.sigma_floor.max(cfg.sigma_mult * mu_ini.abs()),
    };
    let mut iterations = Vec::new();
    let mut converged = false;
    for k in 0..cfg.max_iterations {
        let t = cfg.time_coeff / prior.std;
        let plan = TrotterPlan::scheduled(h, t, h00, &cfg.trotter)?;
        let streams = ShotStreams {
            seed: cfg.seed,
            iteration: k as u64,
        };
        let scan = scan_likelihood(h, d0, d1, &prior, &plan, cfg, streams, &exec)?;
        let fit = fit_gaussian(&scan)?;
        let posterior = bayes_update(&prior, &fit)?;
        let e_thre = cfg.thresh_coeff * plan.m_slices as f64 / t;
        iterations.push(IterationRecord {
            prior,
            t,
            m_slices: plan.m_slices,
            e_thre,
            scan,
            fit,
            posterior,
        });
        if posterior.std < e_thre {
            converged = true;
            break;
        }
        prior = posterior;
    }
    let last = iterations.last().expect("at least one iteration");
    let total_shots = match cfg.mode {
        SampleMode::Sampled => iterations.len() as u64 * cfg.n_scan as u64 * cfg.shots,
        SampleMode::ExactProb => 0,
    };
    Ok(BpdeResult {
        gap: last.posterior.mean,
        sigma_final: last.posterior.std,
        e_thre: last.e_thre,
        converged,
        mu_ini,
        total_shots,
        n_qubits: h.n_qubits(),
        h00,
        d0: d0.to_string(),
        d1: d1.to_string(),
        config: cfg.clone(),
        iterations,
    })
}

/// Maps the integrals to qubits and runs the estimator between references `d0` and `d1`.
///
/// The slice rule uses `cfg.h00` when set, otherwise `Re h1[0][0]`.
pub fn run_bpde(
    ints: &SpinOrbitalIntegrals,
    d0: &Determinant,
    d1: &Determinant,
    cfg: &BpdeConfig,
) -> Result<BpdeResult, BpdeError> {
    cfg.validate()?;
    for d in [d0, d1] {
        if d.len() != ints.n_orb() {
            return Err(BpdeError::LengthMismatch {
                expected: ints.n_orb(),
                found: d.len(),
            });
        }
    }
    if d0 == d1 {
        return Err(BpdeError::IdenticalReferences);
    }
    let h = jordan_wigner(ints, cfg.prune_cutoff)?;
    let h00 = cfg.h00.unwrap_or_else(|| ints.h1(0, 0).re);
    run_bpde_qubit(&h, h00, d0, d1, cfg)
}
