use serde::{Deserialize, Serialize};

use bpde_core::oracle::{diagonalize, exact_gap, fermionic_sector, ExactGap, OracleError, MAX_DENSE_ORBITALS};

use crate::error::{CliError, EXIT_OK};
use crate::problem::{load_problem, read_text, write_atomic, Problem};
use crate::report::ResultDocument;
use crate::units::hartree_to_cm1;
use crate::OracleArgs;

/// Observed range of estimated over exact gaps in reference calculations.
pub const RATIO_BAND: (f64, f64) = (0.92, 1.05);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n_qubits: usize,
    pub sector_dimension: usize,
    pub casci_gap_hartree: f64,
    pub casci_gap_cm1: f64,
    pub ground_weight: f64,
    pub excited_weight: f64,
    pub degenerate: bool,
    pub bpde_gap_hartree: Option<f64>,
    pub e_thre: Option<f64>,
    pub ratio: Option<f64>,
    pub band: (f64, f64),
    pub in_band: Option<bool>,
}

/// Exact gap within the particle-number sector of `d0`.
pub fn casci(problem: &Problem) -> Result<(ExactGap, usize), OracleError> {
    if problem.ints.n_orb() > MAX_DENSE_ORBITALS {
        return Err(OracleError::TooLarge(problem.ints.n_orb()));
    }
    let dense = fermionic_sector(&problem.ints, problem.d0.particle_count())?;
    let sys = diagonalize(&dense, &problem.d0, &problem.d1)?;
    Ok((exact_gap(&sys)?, dense.dim()))
}

/// Checks that a result document was produced for this problem.
pub fn check_compatible(problem: &Problem, doc: &ResultDocument) -> Result<(), OracleError> {
    let n = problem.ints.n_orb();
    if doc.n_qubits != n {
        return Err(OracleError::DimensionMismatch {
            expected: n,
            found: doc.n_qubits,
        });
    }
    if doc.d0 != problem.d0.to_string() || doc.d1 != problem.d1.to_string() {
        return Err(OracleError::OutsideBasis(format!(
            "result references {}/{} differ from {}/{}",
            doc.d0, doc.d1, problem.d0, problem.d1
        )));
    }
    Ok(())
}

pub fn oracle_report(problem: &Problem, doc: Option<&ResultDocument>) -> Result<OracleReport, CliError> {
    if let Some(doc) = doc {
        check_compatible(problem, doc).map_err(|e| CliError::input("--result", e))?;
    }
    let (g, dim) = casci(problem).map_err(|e| CliError::input("oracle", e))?;
    let ratio = doc.map(|d| d.gap_hartree / g.gap).filter(|r| r.is_finite());
    Ok(OracleReport {
        n_qubits: problem.ints.n_orb(),
        sector_dimension: dim,
        casci_gap_hartree: g.gap,
        casci_gap_cm1: hartree_to_cm1(g.gap),
        ground_weight: g.ground_weight,
        excited_weight: g.excited_weight,
        degenerate: g.degenerate,
        bpde_gap_hartree: doc.map(|d| d.gap_hartree),
        e_thre: doc.map(|d| d.e_thre),
        ratio,
        band: RATIO_BAND,
        in_band: ratio.map(|r| (RATIO_BAND.0..=RATIO_BAND.1).contains(&r)),
    })
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<u8, CliError> {
    let p = &args.problem;
    let problem = load_problem(&p.ints, &p.d0, &p.d1, &p.freeze)?;
    let doc = match &args.result {
        Some(path) => {
            let text = read_text(path)?;
            Some(ResultDocument::from_json(&text).map_err(|e| CliError::input(path.display().to_string(), e))?)
        }
        None => None,
    };
    let report = oracle_report(&problem, doc.as_ref())?;
    println!(
        "exact gap {:.10} Hartree ({:.3} cm-1), sector dimension {}, weights {:.4}/{:.4}{}",
        report.casci_gap_hartree,
        report.casci_gap_cm1,
        report.sector_dimension,
        report.ground_weight,
        report.excited_weight,
        if report.degenerate { ", degenerate assignment" } else { "" }
    );
    if let (Some(gap), Some(ratio)) = (report.bpde_gap_hartree, report.ratio) {
        println!(
            "estimated gap {gap:.10} Hartree, ratio {ratio:.6}, band [{}, {}]: {}",
            RATIO_BAND.0,
            RATIO_BAND.1,
            if report.in_band == Some(true) { "PASS" } else { "FAIL" }
        );
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        write_atomic(path, &json)?;
    }
    Ok(EXIT_OK)
}
