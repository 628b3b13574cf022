//! Structured result document written by `run` and read back by `oracle`.

use serde::{Deserialize, Serialize};

use bpde_core::bpde::IterationRecord;
use bpde_core::{BpdeConfig, BpdeResult};

use crate::units::hartree_to_cm1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub ints: String,
    pub frozen: Vec<usize>,
    pub d0: String,
    pub d1: String,
    pub n_qubits: usize,
    pub h00: f64,
    pub config: BpdeConfig,
    pub mu_ini_hartree: f64,
    pub gap_hartree: f64,
    pub gap_cm1: f64,
    pub sigma_final: f64,
    pub e_thre: f64,
    pub iterations: Vec<IterationRecord>,
    pub total_shots: u64,
    pub converged: bool,
}

impl ResultDocument {
    pub fn new(ints: &str, frozen: &[usize], r: BpdeResult) -> Self {
        Self {
            ints: ints.to_string(),
            frozen: frozen.to_vec(),
            d0: r.d0,
            d1: r.d1,
            n_qubits: r.n_qubits,
            h00: r.h00,
            config: r.config,
            mu_ini_hartree: r.mu_ini,
            gap_hartree: r.gap,
            gap_cm1: hartree_to_cm1(r.gap),
            sigma_final: r.sigma_final,
            e_thre: r.e_thre,
            iterations: r.iterations,
            total_shots: r.total_shots,
            converged: r.converged,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        doc.validate()?;
        Ok(doc)
    }

    /// Internal consistency of a (possibly hand-edited) document.
    pub fn validate(&self) -> Result<(), String> {
        self.config.validate().map_err(|e| e.to_string())?;
        for (name, v) in [
            ("h00", self.h00),
            ("mu_ini_hartree", self.mu_ini_hartree),
            ("gap_hartree", self.gap_hartree),
            ("gap_cm1", self.gap_cm1),
            ("sigma_final", self.sigma_final),
            ("e_thre", self.e_thre),
        ] {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        if self.d0.len() != self.n_qubits || self.d1.len() != self.n_qubits {
            return Err("reference length differs from n_qubits".into());
        }
        let expected_cm1 = hartree_to_cm1(self.gap_hartree);
        if (self.gap_cm1 - expected_cm1).abs() > 1e-9 * expected_cm1.abs().max(1.0) {
            return Err("gap_cm1 disagrees with gap_hartree".into());
        }
        let last = self.iterations.last().ok_or("no iterations recorded")?;
        if last.posterior.mean != self.gap_hartree || last.posterior.std != self.sigma_final {
            return Err("final posterior disagrees with the reported gap".into());
        }
        for (k, it) in self.iterations.iter().enumerate() {
            if it.scan.len() != self.config.n_scan {
                return Err(format!("iteration {k}: {} scan points, expected {}", it.scan.len(), self.config.n_scan));
            }
            if it.scan.iter().any(|p| !(0.0..=1.0).contains(&p.prob0)) {
                return Err(format!("iteration {k}: probability outside [0, 1]"));
            }
            if !(it.posterior.std > 0.0 && it.posterior.std <= it.prior.std) {
                return Err(format!("iteration {k}: posterior wider than prior"));
            }
        }
        Ok(())
    }
}
