//! Loading an estimation problem: integrals file, optional frozen core, references.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bpde_core::integrals::{freeze_orbitals, parse_integral_file, SpinOrbitalIntegrals};
use bpde_core::Determinant;

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Problem {
    pub path: PathBuf,
    /// Active-space integrals (after freezing).
    pub ints: SpinOrbitalIntegrals,
    pub frozen: Vec<usize>,
    /// `Re h1[0][0]` of the file as read, before any freezing.
    pub h00: f64,
    pub d0: Determinant,
    pub d1: Determinant,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes via a sibling temporary file and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn parse_determinant(which: &str, bits: &str, n_orb: usize) -> Result<Determinant, CliError> {
    let d: Determinant = bits
        .parse()
        .map_err(|e| CliError::input(which, e))?;
    if d.len() != n_orb {
        return Err(CliError::input(
            which,
            format!("{bits:?} has {} orbitals, the active space has {n_orb}", d.len()),
        ));
    }
    Ok(d)
}

pub fn load_problem(path: &Path, d0: &str, d1: &str, frozen: &[usize]) -> Result<Problem, CliError> {
    let text = read_text(path)?;
    let ctx = path.display().to_string();
    let full = parse_integral_file(&text).map_err(|e| CliError::input(&ctx, e))?;
    let h00 = full.h1(0, 0).re;
    let frozen_set: BTreeSet<usize> = frozen.iter().copied().collect();
    if frozen_set.len() != frozen.len() {
        return Err(CliError::input("--freeze", "repeated orbital index"));
    }
    let ints = if frozen_set.is_empty() {
        full
    } else {
        freeze_orbitals(&full, &frozen_set).map_err(|e| CliError::input("--freeze", e))?
    };
    let n = ints.n_orb();
    Ok(Problem {
        path: path.to_path_buf(),
        d0: parse_determinant("--d0", d0, n)?,
        d1: parse_determinant("--d1", d1, n)?,
        ints,
        frozen: frozen_set.into_iter().collect(),
        h00,
    })
}
