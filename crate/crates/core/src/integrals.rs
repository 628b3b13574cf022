//! Spin-orbital integral records and the line-oriented `BPDE-INTS` text format.
//!
//! The Hamiltonian housed by a record is
//!
//! ```text
//! H = E_core + sum_pq h1[p][q] a+_p a_q + 1/2 sum_pqrs h2[p][q][r][s] a+_p a+_q a_s a_r
//! ```
//!
//! Note the annihilator order `a_s a_r` in the two-body term.
//!
//! File layout (UTF-8, `#` starts a comment, whitespace separated, 0-based indices):
//!
//! ```text
//! # convention: h2 p q r s multiplies a+_p a+_q a_s a_r
//! norb 4
//! ecore -1.0
//! label optional free text
//! h1 p q re im
//! h2 p q r s re im
//! ```
//!
//! Unlisted entries are zero. Only one member of each Hermitian pair needs to be
//! listed; the partner is filled by conjugation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

/// Tolerance used for every Hermiticity check on integral data.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: orbital index {index} out of range for norb = {n_orb}")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        n_orb: usize,
    },
    #[error("Hermiticity violated at {entry}: deviation {deviation:.3e}")]
    HermiticityViolation { entry: String, deviation: f64 },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("orbital {index} out of range for norb = {n_orb}")]
    FrozenIndexOutOfRange { index: usize, n_orb: usize },
    #[error("all {0} orbitals frozen; active space is empty")]
    EmptyActiveSpace(usize),
    #[error("invalid integral record: {0}")]
    Invalid(String),
}

/// One- and two-electron integrals over `n_orb` spin orbitals, in Hartree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOrbitalIntegrals {
    n_orb: usize,
    pub core_energy: f64,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
    pub label: String,
}

impl SpinOrbitalIntegrals {
    /// All-zero record over `n_orb` orbitals.
    pub fn zeros(n_orb: usize) -> Self {
        assert!(n_orb >= 1, "n_orb must be positive");
        Self {
            n_orb,
            core_energy: 0.0,
            h1: vec![Complex64::new(0.0, 0.0); n_orb * n_orb],
            h2: vec![Complex64::new(0.0, 0.0); n_orb.pow(4)],
            label: String::new(),
        }
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    #[inline]
    fn idx1(&self, p: usize, q: usize) -> usize {
        p * self.n_orb + q
    }

    #[inline]
    fn idx2(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n_orb + q) * self.n_orb + r) * self.n_orb + s
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> Complex64 {
        self.h1[self.idx1(p, q)]
    }

    #[inline]
    pub fn h2(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        self.h2[self.idx2(p, q, r, s)]
    }

    /// Raw setter; does not touch the Hermitian partner.
    pub fn set_h1(&mut self, p: usize, q: usize, v: Complex64) {
        let i = self.idx1(p, q);
        self.h1[i] = v;
    }

    /// Raw setter; does not touch the Hermitian partner.
    pub fn set_h2(&mut self, p: usize, q: usize, r: usize, s: usize, v: Complex64) {
        let i = self.idx2(p, q, r, s);
        self.h2[i] = v;
    }

    /// Sets `h1[p][q] = v` and `h1[q][p] = conj(v)`.
    pub fn set_h1_hermitian(&mut self, p: usize, q: usize, v: Complex64) {
        self.set_h1(p, q, v);
        self.set_h1(q, p, v.conj());
    }

    /// Sets `h2[p][q][r][s] = v` and `h2[r][s][p][q] = conj(v)`.
    pub fn set_h2_hermitian(&mut self, p: usize, q: usize, r: usize, s: usize, v: Complex64) {
        self.set_h2(p, q, r, s, v);
        self.set_h2(r, s, p, q, v.conj());
    }

    pub fn h1_entries(&self) -> &[Complex64] {
        &self.h1
    }

    pub fn h2_entries(&self) -> &[Complex64] {
        &self.h2
    }

    /// `true` when no one-body off-diagonal or two-body entry is nonzero.
    pub fn is_one_body_diagonal(&self) -> bool {
        let n = self.n_orb;
        let off = (0..n)
            .flat_map(|p| (0..n).map(move |q| (p, q)))
            .filter(|(p, q)| p != q)
            .all(|(p, q)| self.h1(p, q) == Complex64::new(0.0, 0.0));
        off && self.h2.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Checks finiteness and both Hermiticity relations.
    pub fn validate(&self) -> Result<(), IntegralError> {
        let n = self.n_orb;
        if n == 0 {
            return Err(IntegralError::Invalid("n_orb must be at least 1".into()));
        }
        if !self.core_energy.is_finite()
            || self.h1.iter().chain(self.h2.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(IntegralError::Invalid("non-finite entry".into()));
        }
        for p in 0..n {
            for q in p..n {
                let dev = (self.h1(p, q) - self.h1(q, p).conj()).norm();
                if dev > HERMITICITY_TOL {
                    return Err(IntegralError::HermiticityViolation {
                        entry: format!("h1 {p} {q}"),
                        deviation: dev,
                    });
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let dev = (self.h2(p, q, r, s) - self.h2(r, s, p, q).conj()).norm();
                        if dev > HERMITICITY_TOL {
                            return Err(IntegralError::HermiticityViolation {
                                entry: format!("h2 {p} {q} {r} {s}"),
                                deviation: dev,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_index(tok: &str, line: usize, n_orb: usize) -> Result<usize, IntegralError> {
    let index: usize = tok.parse().map_err(|_| IntegralError::MalformedLine {
        line,
        reason: format!("invalid orbital index `{tok}`"),
    })?;
    if index >= n_orb {
        return Err(IntegralError::IndexOutOfRange { line, index, n_orb });
    }
    Ok(index)
}

fn parse_float(tok: &str, line: usize) -> Result<f64, IntegralError> {
    let v: f64 = tok.parse().map_err(|_| IntegralError::MalformedLine {
        line,
        reason: format!("invalid number `{tok}`"),
    })?;
    if !v.is_finite() {
        return Err(IntegralError::MalformedLine {
            line,
            reason: format!("non-finite number `{tok}`"),
        });
    }
    Ok(v)
}

fn expect_fields(fields: &[&str], count: usize, line: usize) -> Result<(), IntegralError> {
    if fields.len() != count {
        return Err(IntegralError::MalformedLine {
            line,
            reason: format!(
                "`{}` expects {} fields, found {}",
                fields[0],
                count - 1,
                fields.len() - 1
            ),
        });
    }
    Ok(())
}

/// Parses a `BPDE-INTS` document.
pub fn parse_integral_file(text: &str) -> Result<SpinOrbitalIntegrals, IntegralError> {
    let mut n_orb: Option<usize> = None;
    let mut core: Option<f64> = None;
    let mut label = String::new();
    let mut one: BTreeMap<(usize, usize), (Complex64, usize)> = BTreeMap::new();
    let mut two: BTreeMap<[usize; 4], (Complex64, usize)> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        match fields[0] {
            "norb" => {
                expect_fields(&fields, 2, lineno)?;
                let n: usize = fields[1].parse().map_err(|_| IntegralError::MalformedLine {
                    line: lineno,
                    reason: format!("invalid norb `{}`", fields[1]),
                })?;
                if n == 0 {
                    return Err(IntegralError::MalformedLine {
                        line: lineno,
                        reason: "norb must be positive".into(),
                    });
                }
                if n_orb.replace(n).is_some() {
                    return Err(IntegralError::MalformedLine {
                        line: lineno,
                        reason: "duplicate norb header".into(),
                    });
                }
            }
            "ecore" => {
                expect_fields(&fields, 2, lineno)?;
                if core.replace(parse_float(fields[1], lineno)?).is_some() {
                    return Err(IntegralError::MalformedLine {
                        line: lineno,
                        reason: "duplicate ecore header".into(),
                    });
                }
            }
            "label" => {
                // Label keeps everything after the keyword verbatim (minus comments).
                label = content.trim_start()["label".len()..].trim().to_string();
            }
            "h1" | "h2" => {
                let n = n_orb.ok_or(IntegralError::MissingHeader("norb"))?;
                if fields[0] == "h1" {
                    expect_fields(&fields, 5, lineno)?;
                    let p = parse_index(fields[1], lineno, n)?;
                    let q = parse_index(fields[2], lineno, n)?;
                    let v = Complex64::new(
                        parse_float(fields[3], lineno)?,
                        parse_float(fields[4], lineno)?,
                    );
                    if one.insert((p, q), (v, lineno)).is_some() {
                        return Err(IntegralError::MalformedLine {
                            line: lineno,
                            reason: format!("duplicate entry h1 {p} {q}"),
                        });
                    }
                } else {
                    expect_fields(&fields, 7, lineno)?;
                    let mut idx = [0usize; 4];
                    for (k, slot) in idx.iter_mut().enumerate() {
                        *slot = parse_index(fields[1 + k], lineno, n)?;
                    }
                    let v = Complex64::new(
                        parse_float(fields[5], lineno)?,
                        parse_float(fields[6], lineno)?,
                    );
                    if two.insert(idx, (v, lineno)).is_some() {
                        return Err(IntegralError::MalformedLine {
                            line: lineno,
                            reason: format!(
                                "duplicate entry h2 {} {} {} {}",
                                idx[0], idx[1], idx[2], idx[3]
                            ),
                        });
                    }
                }
            }
            other => {
                return Err(IntegralError::MalformedLine {
                    line: lineno,
                    reason: format!("unknown record `{other}`"),
                })
            }
        }
    }

    let n = n_orb.ok_or(IntegralError::MissingHeader("norb"))?;
    let core = core.ok_or(IntegralError::MissingHeader("ecore"))?;
    let mut ints = SpinOrbitalIntegrals::zeros(n);
    ints.core_energy = core;
    ints.label = label;

    for (&(p, q), &(v, _)) in &one {
        match one.get(&(q, p)) {
            Some(&(partner, _)) => {
                let dev = (v - partner.conj()).norm();
                if dev > HERMITICITY_TOL {
                    return Err(IntegralError::HermiticityViolation {
                        entry: format!("h1 {p} {q}"),
                        deviation: dev,
                    });
                }
                ints.set_h1(p, q, v);
            }
            None => ints.set_h1_hermitian(p, q, v),
        }
    }
    for (&[p, q, r, s], &(v, _)) in &two {
        match two.get(&[r, s, p, q]) {
            Some(&(partner, _)) => {
                let dev = (v - partner.conj()).norm();
                if dev > HERMITICITY_TOL {
                    return Err(IntegralError::HermiticityViolation {
                        entry: format!("h2 {p} {q} {r} {s}"),
                        deviation: dev,
                    });
                }
                ints.set_h2(p, q, r, s, v);
            }
            None => ints.set_h2_hermitian(p, q, r, s, v),
        }
    }
    ints.validate()?;
    Ok(ints)
}

/// Serializes a record; parsing the output reproduces the record bit for bit.
///
/// Each Hermitian pair is written once unless the stored partner differs from the
/// exact conjugate, in which case both members are written.
pub fn write_integral_file(ints: &SpinOrbitalIntegrals) -> String {
    let n = ints.n_orb;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = String::new();
    out.push_str("# BPDE-INTS spin-orbital integrals (Hartree)\n");
    out.push_str("# convention: h2 p q r s multiplies a+_p a+_q a_s a_r\n");
    let _ = writeln!(out, "norb {n}");
    let _ = writeln!(out, "ecore {:.16e}", ints.core_energy);
    if !ints.label.is_empty() {
        let _ = writeln!(out, "label {}", ints.label.replace(['\n', '#'], " "));
    }
    for p in 0..n {
        for q in 0..n {
            let v = ints.h1(p, q);
            if v == zero {
                continue;
            }
            let canonical = (p, q) <= (q, p);
            if canonical || ints.h1(q, p) != v.conj() {
                let _ = writeln!(out, "h1 {p} {q} {:.16e} {:.16e}", v.re, v.im);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.h2(p, q, r, s);
                    if v == zero {
                        continue;
                    }
                    let canonical = (p, q, r, s) <= (r, s, p, q);
                    if canonical || ints.h2(r, s, p, q) != v.conj() {
                        let _ = writeln!(
                            out,
                            "h2 {p} {q} {r} {s} {:.16e} {:.16e}",
                            v.re, v.im
                        );
                    }
                }
            }
        }
    }
    out
}

/// Folds permanently occupied orbitals into the core energy and one-body term.
///
/// On determinants with every frozen orbital occupied, the returned Hamiltonian over
/// the compacted active orbitals has the same spectrum as the full one.
pub fn freeze_orbitals(
    ints: &SpinOrbitalIntegrals,
    frozen: &BTreeSet<usize>,
) -> Result<SpinOrbitalIntegrals, IntegralError> {
    let n = ints.n_orb;
    if let Some(&bad) = frozen.iter().find(|&&i| i >= n) {
        return Err(IntegralError::FrozenIndexOutOfRange { index: bad, n_orb: n });
    }
    if frozen.is_empty() {
        return Ok(ints.clone());
    }
    if frozen.len() == n {
        return Err(IntegralError::EmptyActiveSpace(n));
    }
    let active: Vec<usize> = (0..n).filter(|i| !frozen.contains(i)).collect();
    let na = active.len();

    let mut core = ints.core_energy;
    for &i in frozen {
        core += ints.h1(i, i).re;
        for &j in frozen {
            if i != j {
                core += 0.5 * (ints.h2(i, j, i, j) - ints.h2(i, j, j, i)).re;
            }
        }
    }

    let mut out = SpinOrbitalIntegrals::zeros(na);
    out.core_energy = core;
    for (a, &x) in active.iter().enumerate() {
        for (b, &y) in active.iter().enumerate() {
            let mut v = ints.h1(x, y);
            for &i in frozen {
                v += 0.5
                    * (ints.h2(i, x, i, y) - ints.h2(i, x, y, i) - ints.h2(x, i, i, y)
                        + ints.h2(x, i, y, i));
            }
            out.set_h1(a, b, v);
        }
    }
    for (a, &p) in active.iter().enumerate() {
        for (b, &q) in active.iter().enumerate() {
            for (c, &r) in active.iter().enumerate() {
                for (d, &s) in active.iter().enumerate() {
                    out.set_h2(a, b, c, d, ints.h2(p, q, r, s));
                }
            }
        }
    }

    let frozen_list: Vec<String> = frozen.iter().map(|i| i.to_string()).collect();
    let map: Vec<String> = active
        .iter()
        .enumerate()
        .map(|(new, old)| format!("{old}->{new}"))
        .collect();
    let prefix = if ints.label.is_empty() {
        String::new()
    } else {
        format!("{} | ", ints.label)
    };
    out.label = format!(
        "{prefix}frozen [{}] active [{}]",
        frozen_list.join(","),
        map.join(",")
    );
    Ok(out)
}

/// Deterministic random instance generator.
///
/// Orbital energies are well separated and ascend with the orbital index (the lowest
/// orbital plays the role of a deep core level). `diag_dominance` is the ratio of the
/// diagonal energy scale (1 Hartree) to the coupling scale: every off-diagonal one-body
/// entry and every two-body entry is drawn with magnitude up to `1 / diag_dominance`.
/// `diag_dominance = 0` (or infinity) switches couplings off entirely.
pub fn synth_random_hamiltonian(n_orb: usize, seed: u64, diag_dominance: f64) -> SpinOrbitalIntegrals {
    assert!(n_orb >= 1, "n_orb must be positive");
    assert!(diag_dominance >= 0.0, "diag_dominance must be nonnegative");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut ints = SpinOrbitalIntegrals::zeros(n_orb);
    ints.label = format!("synthetic n_orb={n_orb} seed={seed} diag_dominance={diag_dominance}");
    ints.core_energy = rng.random_range(-2.0..-1.0);

    // Gaps grow with depth so that low-lying determinants stay non-degenerate.
    let mut eps = 0.4 + rng.random_range(-0.05..0.05);
    let mut levels = vec![0.0; n_orb];
    for p in (0..n_orb).rev() {
        levels[p] = eps;
        eps -= 0.6 + 0.25 * (n_orb - 1 - p) as f64 + rng.random_range(0.0..0.2);
    }
    for (p, &e) in levels.iter().enumerate() {
        ints.set_h1(p, p, Complex64::new(e, 0.0));
    }

    let coupling = if diag_dominance > 0.0 && diag_dominance.is_finite() {
        1.0 / diag_dominance
    } else {
        0.0
    };
    if coupling == 0.0 {
        return ints;
    }

    let draw = |rng: &mut ChaCha20Rng| {
        Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)) * coupling
    };
    for p in 0..n_orb {
        for q in (p + 1)..n_orb {
            let v = draw(&mut rng);
            ints.set_h1_hermitian(p, q, v);
        }
    }

    // Raw draw, then average over the symmetry group generated by the adjoint
    // relation (pqrs) -> conj(rspq) and the particle relabelling (pqrs) -> (qpsr).
    let n = n_orb;
    let raw: Vec<Complex64> = (0..n.pow(4)).map(|_| draw(&mut rng)).collect();
    let at = |p: usize, q: usize, r: usize, s: usize| raw[((p * n + q) * n + r) * n + s];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = (at(p, q, r, s)
                        + at(r, s, p, q).conj()
                        + at(q, p, s, r)
                        + at(s, r, q, p).conj())
                        * 0.25;
                    ints.set_h2(p, q, r, s, v);
                }
            }
        }
    }
    // Self-partner entries must be real; clean rounding residue.
    for p in 0..n {
        for q in 0..n {
            let v = ints.h2(p, q, p, q);
            ints.set_h2(p, q, p, q, Complex64::new(v.re, 0.0));
        }
    }
    ints
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn minimal_file() {
        let ints = parse_integral_file("norb 2\necore 0.0\nh1 0 0 -1.25 0.0\n").unwrap();
        assert_eq!(ints.n_orb(), 2);
        assert_eq!(ints.h1(0, 0), c(-1.25, 0.0));
        assert!(ints.h1_entries().iter().skip(1).all(|v| *v == c(0.0, 0.0)));
        assert!(ints.h2_entries().iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn conflicting_conjugate_pair() {
        let text = "norb 2\necore 0.0\nh1 0 1 0.5 0.1\nh1 1 0 0.5 0.1\n";
        assert!(matches!(
            parse_integral_file(text),
            Err(IntegralError::HermiticityViolation { .. })
        ));
        let ok = "norb 2\necore 0.0\nh1 0 1 0.5 0.1\nh1 1 0 0.5 -0.1\n";
        assert_eq!(parse_integral_file(ok).unwrap().h1(1, 0), c(0.5, -0.1));
    }

    #[test]
    fn partner_filled_by_conjugation() {
        let text = "norb 3\necore 1.5\nh2 0 1 2 0 0.25 -0.5\n";
        let ints = parse_integral_file(text).unwrap();
        assert_eq!(ints.h2(2, 0, 0, 1), c(0.25, 0.5));
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            parse_integral_file("ecore 0.0\nh1 0 0 1 0\n"),
            Err(IntegralError::MissingHeader("norb"))
        );
        assert_eq!(
            parse_integral_file("norb 1\n"),
            Err(IntegralError::MissingHeader("ecore"))
        );
        assert!(matches!(
            parse_integral_file("norb 2\necore 0\nh1 0 2 1 0\n"),
            Err(IntegralError::IndexOutOfRange { line: 3, index: 2, n_orb: 2 })
        ));
        assert!(matches!(
            parse_integral_file("norb 2\necore 0\nh1 0 1 1\n"),
            Err(IntegralError::MalformedLine { line: 3, .. })
        ));
        assert!(matches!(
            parse_integral_file("norb 2\necore 0\n# note\nh1 0 1 x 0\n"),
            Err(IntegralError::MalformedLine { line: 4, .. })
        ));
        assert!(matches!(
            parse_integral_file("norb 2\necore 0\nh1 1 1 1 0.5\n"),
            Err(IntegralError::HermiticityViolation { .. })
        ));
    }

    #[test]
    fn comments_and_label() {
        let text = "# header\nnorb 1 # one orbital\necore -0.5\nlabel B+ active (2s)\n\nh1 0 0 -1 0\n";
        let ints = parse_integral_file(text).unwrap();
        assert_eq!(ints.label, "B+ active (2s)");
        assert_eq!(ints.core_energy, -0.5);
    }

    #[test]
    fn writer_round_trip() {
        let ints = synth_random_hamiltonian(3, 11, 4.0);
        let text = write_integral_file(&ints);
        assert_eq!(parse_integral_file(&text).unwrap(), ints);
    }

    #[test]
    fn freeze_nothing_is_identity() {
        let ints = synth_random_hamiltonian(3, 2, 5.0);
        assert_eq!(freeze_orbitals(&ints, &BTreeSet::new()).unwrap(), ints);
    }

    #[test]
    fn freeze_one_body_folding() {
        let mut ints = synth_random_hamiltonian(4, 3, 0.0);
        ints.core_energy = 0.75;
        let out = freeze_orbitals(&ints, &BTreeSet::from([1])).unwrap();
        assert_eq!(out.core_energy, 0.75 + ints.h1(1, 1).re);
        assert_eq!(out.h1(0, 0), ints.h1(0, 0));
        assert_eq!(out.h1(1, 1), ints.h1(2, 2));
        assert_eq!(out.h1(2, 2), ints.h1(3, 3));
        assert!(out.label.contains("frozen [1]"));
        assert!(out.label.contains("2->1"));
    }

    #[test]
    fn freeze_errors() {
        let ints = synth_random_hamiltonian(2, 0, 3.0);
        assert_eq!(
            freeze_orbitals(&ints, &BTreeSet::from([0, 1])),
            Err(IntegralError::EmptyActiveSpace(2))
        );
        assert!(matches!(
            freeze_orbitals(&ints, &BTreeSet::from([5])),
            Err(IntegralError::FrozenIndexOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn synth_is_deterministic_and_valid() {
        let a = synth_random_hamiltonian(4, 7, 10.0);
        let b = synth_random_hamiltonian(4, 7, 10.0);
        assert_eq!(a, b);
        a.validate().unwrap();
        assert_ne!(a, synth_random_hamiltonian(4, 8, 10.0));
    }

    #[test]
    fn synth_zero_dominance_is_diagonal() {
        let ints = synth_random_hamiltonian(4, 7, 0.0);
        assert!(ints.is_one_body_diagonal());
        let levels: Vec<f64> = (0..4).map(|p| ints.h1(p, p).re).collect();
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }
}
