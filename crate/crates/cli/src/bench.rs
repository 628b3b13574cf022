//! Fixed single-iteration workload timed per (size, backend, workers).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use bpde_core::bpde::{scan_likelihood, ShotStreams};
use bpde_core::integrals::synth_random_hamiltonian;
use bpde_core::{jordan_wigner, Backend, BpdeConfig, Determinant, Executor, Gaussian, QubitHamiltonian, SampleMode, TrotterPlan};

use crate::error::{from_bpde, CliError, EXIT_OK};
use crate::problem::write_atomic;
use crate::BenchArgs;

/// Largest register the simulator allocates.
const MAX_BENCH_QUBITS: usize = 29;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// System qubits; the ancilla adds one.
    pub n_qubits: usize,
    pub n_terms: usize,
    pub backend: Backend,
    pub workers: usize,
    pub reps: usize,
    pub median_seconds: f64,
    pub mean_seconds: f64,
    /// Median of the single-worker gate row of the same size over this row's median.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub slices: usize,
    pub scan: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn speedup(&self, n_qubits: usize, backend: Backend, workers: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n_qubits == n_qubits && r.backend == backend && r.workers == workers)
            .map(|r| r.speedup)
    }
}

pub struct Workload {
    pub h: QubitHamiltonian,
    pub d0: Determinant,
    pub d1: Determinant,
    pub prior: Gaussian,
}

/// Synthetic Hamiltonian on `n` qubits with half filling and a single excitation.
pub fn workload(n: usize, seed: u64) -> Result<Workload, CliError> {
    let ints = synth_random_hamiltonian(n, seed, 10.0);
    let h = jordan_wigner(&ints, bpde_core::qubit::DEFAULT_PRUNE_CUTOFF).map_err(|e| CliError::Internal(e.to_string()))?;
    let occ = (n / 2).max(1);
    let d0 = Determinant::from_occupied(&(0..occ).collect::<Vec<_>>(), n);
    let mut exc: Vec<usize> = (0..occ - 1).collect();
    exc.push(occ.min(n - 1));
    let d1 = Determinant::from_occupied(&exc, n);
    Ok(Workload {
        h,
        d0,
        d1,
        prior: Gaussian::new(0.5, 0.1),
    })
}

/// Bytes for the prefix state, one scan copy and the gather buffer.
pub fn estimated_bytes(n_system: usize) -> u64 {
    3 * 16 * (1u64 << (n_system + 1))
}

fn memory_budget() -> u64 {
    let available = std::fs::read_to_string("/proc/meminfo").ok().and_then(|s| {
        s.lines()
            .find(|l| l.starts_with("MemAvailable:"))
            .and_then(|l| l.split_whitespace().nth(1))
            .and_then(|kb| kb.parse::<u64>().ok())
            .map(|kb| kb * 1024)
    });
    available.unwrap_or(4 << 30) / 2
}

pub fn check_memory(sizes: &[usize], budget: u64) -> Result<(), CliError> {
    for &n in sizes {
        let needed = if n + 1 > MAX_BENCH_QUBITS { u64::MAX } else { estimated_bytes(n) };
        if needed > budget {
            return Err(CliError::OutOfMemory {
                n_qubits: n + 1,
                needed,
                budget,
            });
        }
    }
    Ok(())
}

fn time_once(w: &Workload, plan: &TrotterPlan, cfg: &BpdeConfig, exec: &Executor) -> Result<f64, CliError> {
    let start = Instant::now();
    let streams = ShotStreams { seed: cfg.seed, iteration: 0 };
    let scan = scan_likelihood(&w.h, &w.d0, &w.d1, &w.prior, plan, cfg, streams, exec).map_err(|e| from_bpde("bench", e))?;
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(scan);
    Ok(elapsed.max(1e-9))
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn default_workers() -> Vec<usize> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![1, n.max(2)]
}

pub fn run_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    if args.reps < 3 {
        return Err(CliError::Usage("--reps must be at least 3".into()));
    }
    if args.sizes.is_empty() || args.sizes.iter().any(|&n| n < 2) {
        return Err(CliError::Usage("--sizes must list sizes of at least 2 qubits".into()));
    }
    let mut workers = if args.workers.is_empty() { default_workers() } else { args.workers.clone() };
    if workers.contains(&0) {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    workers.push(1);
    workers.sort_unstable();
    workers.dedup();
    let backends: Vec<Backend> = args.backends.iter().map(|&b| b.into()).collect();
    check_memory(&args.sizes, memory_budget())?;
    let cfg = BpdeConfig {
        n_scan: args.scan,
        mode: SampleMode::ExactProb,
        seed: args.seed,
        ..Default::default()
    };
    cfg.validate().map_err(|e| from_bpde("bench", e))?;

    let execs: Vec<(usize, Executor)> = workers.iter().map(|&w| (w, Executor::with_workers(w))).collect();
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let w = workload(n, args.seed)?;
        let t = cfg.time_coeff / w.prior.std;
        let plan = TrotterPlan::new(&w.h, t, args.slices.max(1));
        let mut size_rows: Vec<BenchRow> = Vec::new();
        for backend in [Backend::Gate, Backend::Fused] {
            if backend != Backend::Gate && !backends.contains(&backend) {
                continue;
            }
            let cfg = BpdeConfig { backend, ..cfg.clone() };
            for (workers, exec) in &execs {
                if !backends.contains(&backend) && *workers != 1 {
                    continue;
                }
                let mut times = (0..args.reps)
                    .map(|_| time_once(&w, &plan, &cfg, exec))
                    .collect::<Result<Vec<f64>, _>>()?;
                let mean = times.iter().sum::<f64>() / times.len() as f64;
                size_rows.push(BenchRow {
                    n_qubits: n,
                    n_terms: w.h.len(),
                    backend,
                    workers: *workers,
                    reps: args.reps,
                    median_seconds: median(&mut times),
                    mean_seconds: mean,
                    speedup: 1.0,
                });
            }
        }
        let baseline = size_rows
            .iter()
            .find(|r| r.backend == Backend::Gate && r.workers == 1)
            .map(|r| r.median_seconds)
            .expect("baseline row present");
        for r in &mut size_rows {
            r.speedup = baseline / r.median_seconds;
        }
        rows.extend(size_rows);
    }
    Ok(BenchReport {
        slices: args.slices.max(1),
        scan: args.scan,
        seed: args.seed,
        rows,
    })
}

pub fn render_table(report: &BenchReport) -> String {
    let mut out = format!(
        "{:>7} {:>7} {:>7} {:>8} {:>12} {:>12} {:>9}\n",
        "qubits", "terms", "backend", "workers", "median/s", "mean/s", "speedup"
    );
    for r in &report.rows {
        let backend = match r.backend {
            Backend::Gate => "gate",
            Backend::Fused => "fused",
        };
        out.push_str(&format!(
            "{:>7} {:>7} {:>7} {:>8} {:>12.6} {:>12.6} {:>9.2}\n",
            r.n_qubits, r.n_terms, backend, r.workers, r.median_seconds, r.mean_seconds, r.speedup
        ));
    }
    out
}

pub fn cmd_bench(args: &BenchArgs) -> Result<u8, CliError> {
    let report = run_bench(args)?;
    print!("{}", render_table(&report));
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        write_atomic(path, &json)?;
    }
    Ok(EXIT_OK)
}
