//! Phase difference estimation of fermionic energy gaps on a state-vector simulator.

pub mod bpde;
pub mod evolution;
pub mod integrals;
pub mod oracle;
pub mod qubit;
pub mod state;

pub use bpde::{run_bpde, run_bpde_qubit, BpdeConfig, BpdeError, BpdeResult, Gaussian, SampleMode};
pub use evolution::{Backend, TrotterPlan, TrotterRule, TrotterSchedule};
pub use integrals::{parse_integral_file, write_integral_file, IntegralError, SpinOrbitalIntegrals};
pub use qubit::{jordan_wigner, Determinant, PauliString, QubitHamiltonian};
pub use state::{Executor, StateVector};
