use bpde_core::integrals::{synth_random_hamiltonian, write_integral_file};
use bpde_core::run_bpde;

use crate::error::{from_bpde, CliError, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::problem::{load_problem, write_atomic};
use crate::report::ResultDocument;
use crate::units::hartree_to_cm1;
use crate::{RunArgs, SynthArgs};

pub fn cmd_run(args: &RunArgs) -> Result<u8, CliError> {
    let p = &args.problem;
    let problem = load_problem(&p.ints, &p.d0, &p.d1, &p.freeze)?;
    let cfg = args.config.to_config(problem.h00);
    let result = run_bpde(&problem.ints, &problem.d0, &problem.d1, &cfg).map_err(|e| from_bpde("run", e))?;
    let doc = ResultDocument::new(&problem.path.display().to_string(), &problem.frozen, result);
    let json = doc.to_json();
    match &args.out {
        Some(path) => write_atomic(path, &json)?,
        None => println!("{json}"),
    }
    eprintln!(
        "gap {:.8} Hartree ({:.2} cm-1), sigma {:.2e}, E_thre {:.2e}, {} iterations, {}",
        doc.gap_hartree,
        hartree_to_cm1(doc.gap_hartree),
        doc.sigma_final,
        doc.e_thre,
        doc.iterations.len(),
        if doc.converged { "converged" } else { "NOT converged" }
    );
    Ok(if doc.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_synth(args: &SynthArgs) -> Result<u8, CliError> {
    if args.n_orb == 0 || args.n_orb > bpde_core::qubit::MAX_QUBITS {
        return Err(CliError::Usage(format!(
            "--n-orb must be between 1 and {}",
            bpde_core::qubit::MAX_QUBITS
        )));
    }
    if args.diag_dominance.is_nan() || args.diag_dominance < 0.0 {
        return Err(CliError::Usage("--diag-dominance must be nonnegative".into()));
    }
    let ints = synth_random_hamiltonian(args.n_orb, args.seed, args.diag_dominance);
    write_atomic(&args.out, &write_integral_file(&ints))?;
    Ok(EXIT_OK)
}
