//! Brute-force reference results: the fermionic Hamiltonian built directly from
//! creation/annihilation action on occupation bitstrings (no Jordan–Wigner), dense
//! diagonalization, exact propagation, and the closed-form interference probability.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::integrals::SpinOrbitalIntegrals;
use crate::qubit::Determinant;
use crate::state::StateVector;

/// Largest orbital count accepted by the dense builders.
pub const MAX_DENSE_ORBITALS: usize = 14;

const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{0} orbitals exceed the dense limit of {MAX_DENSE_ORBITALS}")]
    TooLarge(usize),
    #[error("eigensolver failed to converge (residual {0:.3e})")]
    ConvergenceFailure(f64),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("determinant {0} lies outside the matrix basis")]
    OutsideBasis(String),
    #[error("reference {which} has maximum eigenstate weight {weight:.4} <= 0.5")]
    AmbiguousAssignment { which: &'static str, weight: f64 },
}

/// Annihilates orbital `q`; returns the new bits and the fermionic sign.
#[inline]
fn annihilate(bits: u64, q: usize) -> Option<(u64, f64)> {
    let bit = 1u64 << q;
    if bits & bit == 0 {
        return None;
    }
    let below = (bits & (bit - 1)).count_ones();
    Some((bits ^ bit, if below & 1 == 1 { -1.0 } else { 1.0 }))
}

#[inline]
fn create(bits: u64, q: usize) -> Option<(u64, f64)> {
    let bit = 1u64 << q;
    if bits & bit != 0 {
        return None;
    }
    let below = (bits & (bit - 1)).count_ones();
    Some((bits | bit, if below & 1 == 1 { -1.0 } else { 1.0 }))
}

/// Hamiltonian matrix over an explicit list of determinants.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    pub n_orb: usize,
    /// Occupation bits of each basis vector, in matrix order.
    pub basis: Vec<u64>,
    pub matrix: DMatrix<Complex64>,
}

impl DenseHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn position(&self, d: &Determinant) -> Option<usize> {
        if d.len() != self.n_orb {
            return None;
        }
        self.basis.iter().position(|&b| b == d.bits())
    }

    /// `max |H - H^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

fn build(ints: &SpinOrbitalIntegrals, basis: Vec<u64>) -> DenseHamiltonian {
    let n = ints.n_orb();
    let dim = basis.len();
    let full = dim == 1usize << n;
    let lookup = |bits: u64| -> Option<usize> {
        if full {
            Some(bits as usize)
        } else {
            basis.binary_search(&bits).ok()
        }
    };
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (col, &ket) in basis.iter().enumerate() {
        m[(col, col)] += Complex64::new(ints.core_energy, 0.0);
        for q in 0..n {
            let Some((b1, s1)) = annihilate(ket, q) else { continue };
            for p in 0..n {
                let h = ints.h1(p, q);
                if h.norm() == 0.0 {
                    continue;
                }
                let Some((b2, s2)) = create(b1, p) else { continue };
                if let Some(row) = lookup(b2) {
                    m[(row, col)] += h * (s1 * s2);
                }
            }
        }
        // 1/2 h2[p][q][r][s] a+_p a+_q a_s a_r : a_r acts first.
        for r in 0..n {
            let Some((b1, s1)) = annihilate(ket, r) else { continue };
            for s in 0..n {
                let Some((b2, s2)) = annihilate(b1, s) else { continue };
                for q in 0..n {
                    let Some((b3, s3)) = create(b2, q) else { continue };
                    for p in 0..n {
                        let h = ints.h2(p, q, r, s);
                        if h.norm() == 0.0 {
                            continue;
                        }
                        let Some((b4, s4)) = create(b3, p) else { continue };
                        if let Some(row) = lookup(b4) {
                            m[(row, col)] += h * (0.5 * s1 * s2 * s3 * s4);
                        }
                    }
                }
            }
        }
    }
    DenseHamiltonian {
        n_orb: n,
        basis,
        matrix: m,
    }
}

/// Full Fock-space matrix, dimension `2^n_orb`, basis index = occupation bits.
pub fn fermionic_dense(ints: &SpinOrbitalIntegrals) -> Result<DenseHamiltonian, OracleError> {
    let n = ints.n_orb();
    if n > MAX_DENSE_ORBITALS {
        return Err(OracleError::TooLarge(n));
    }
    Ok(build(ints, (0..1u64 << n).collect()))
}

/// Block of fixed particle number, basis in ascending bit order.
pub fn fermionic_sector(
    ints: &SpinOrbitalIntegrals,
    n_particles: u32,
) -> Result<DenseHamiltonian, OracleError> {
    let n = ints.n_orb();
    if n > MAX_DENSE_ORBITALS {
        return Err(OracleError::TooLarge(n));
    }
    let basis = (0..1u64 << n).filter(|b| b.count_ones() == n_particles).collect();
    Ok(build(ints, basis))
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Column `j` is the eigenvector of `energies[j]`.
    pub states: DMatrix<Complex64>,
    /// `<Psi_j|Phi_0>`.
    pub overlaps0: Vec<Complex64>,
    /// `<Psi_k|Phi_1>`.
    pub overlaps1: Vec<Complex64>,
}

/// Dense Hermitian eigendecomposition (ascending energies).
pub fn eigh(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>), OracleError> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(OracleError::DimensionMismatch {
            expected: dim,
            found: m.ncols(),
        });
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or(OracleError::ConvergenceFailure(f64::INFINITY))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut states = DMatrix::<Complex64>::zeros(dim, dim);
    for (new, &old) in order.iter().enumerate() {
        states.set_column(new, &eig.eigenvectors.column(old));
    }
    let mut worst: f64 = 0.0;
    for (j, &e) in energies.iter().enumerate() {
        let v = states.column(j);
        let r = m * v - v * Complex64::new(e, 0.0);
        worst = worst.max(r.norm());
    }
    if worst > RESIDUAL_TOL || !worst.is_finite() {
        return Err(OracleError::ConvergenceFailure(worst));
    }
    Ok((energies, states))
}

/// Eigenpairs of `h` plus reference overlaps with `d0` and `d1`.
pub fn diagonalize(
    h: &DenseHamiltonian,
    d0: &Determinant,
    d1: &Determinant,
) -> Result<EigenSystem, OracleError> {
    let i0 = h
        .position(d0)
        .ok_or_else(|| OracleError::OutsideBasis(d0.to_string()))?;
    let i1 = h
        .position(d1)
        .ok_or_else(|| OracleError::OutsideBasis(d1.to_string()))?;
    let (energies, states) = eigh(&h.matrix)?;
    let overlaps0 = (0..energies.len()).map(|j| states[(i0, j)].conj()).collect();
    let overlaps1 = (0..energies.len()).map(|j| states[(i1, j)].conj()).collect();
    Ok(EigenSystem {
        energies,
        states,
        overlaps0,
        overlaps1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactGap {
    pub gap: f64,
    pub ground_index: usize,
    pub excited_index: usize,
    pub ground_weight: f64,
    pub excited_weight: f64,
    /// Both references are dominated by the same eigenstate.
    pub degenerate: bool,
}

fn dominant(overlaps: &[Complex64]) -> (usize, f64) {
    overlaps
        .iter()
        .enumerate()
        .map(|(j, c)| (j, c.norm_sqr()))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// `E_k* - E_j*` for the eigenstates with the largest weight on each reference.
pub fn exact_gap(sys: &EigenSystem) -> Result<ExactGap, OracleError> {
    let (j, wj) = dominant(&sys.overlaps0);
    let (k, wk) = dominant(&sys.overlaps1);
    if wj <= 0.5 {
        return Err(OracleError::AmbiguousAssignment { which: "d0", weight: wj });
    }
    if wk <= 0.5 {
        return Err(OracleError::AmbiguousAssignment { which: "d1", weight: wk });
    }
    let degenerate = j == k;
    Ok(ExactGap {
        gap: if degenerate { 0.0 } else { sys.energies[k] - sys.energies[j] },
        ground_index: j,
        excited_index: k,
        ground_weight: wj,
        excited_weight: wk,
        degenerate,
    })
}

/// `1/2 [1 + sum_jk |c_j|^2 |d_k|^2 cos((E_k - E_j - delta_eps) t)]`.
pub fn interference_prob0(sys: &EigenSystem, delta_eps: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for (j, cj) in sys.overlaps0.iter().enumerate() {
        let wj = cj.norm_sqr();
        if wj == 0.0 {
            continue;
        }
        for (k, dk) in sys.overlaps1.iter().enumerate() {
            let wk = dk.norm_sqr();
            if wk == 0.0 {
                continue;
            }
            acc += wj * wk * ((sys.energies[k] - sys.energies[j] - delta_eps) * t).cos();
        }
    }
    (0.5 * (1.0 + acc)).clamp(0.0, 1.0)
}

/// `sum_j e^{-i E_j t} |v_j><v_j|` applied to `s`.
pub fn exact_evolve(
    s: &StateVector,
    h: &DMatrix<Complex64>,
    t: f64,
) -> Result<StateVector, OracleError> {
    let dim = s.amplitudes().len();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(OracleError::DimensionMismatch {
            expected: dim,
            found: h.nrows(),
        });
    }
    let (energies, states) = eigh(h)?;
    let psi = nalgebra::DVector::from_column_slice(s.amplitudes());
    let coeffs = states.adjoint() * &psi;
    let phased = nalgebra::DVector::from_iterator(
        dim,
        coeffs
            .iter()
            .zip(&energies)
            .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
    );
    let out = states * phased;
    Ok(StateVector::from_raw(out.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::synth_random_hamiltonian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_orbital() {
        let mut ints = SpinOrbitalIntegrals::zeros(1);
        ints.core_energy = 0.25;
        ints.set_h1(0, 0, c(-1.5, 0.0));
        let h = fermionic_dense(&ints).unwrap();
        assert_eq!(h.matrix[(0, 0)], c(0.25, 0.0));
        assert_eq!(h.matrix[(1, 1)], c(-1.25, 0.0));
        assert_eq!(h.matrix[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn hopping_signs() {
        let mut ints = SpinOrbitalIntegrals::zeros(2);
        ints.set_h1_hermitian(0, 1, c(1.0, 0.0));
        let h = fermionic_dense(&ints).unwrap();
        // a+_0 a_1 |01> : |01> has orbital 1 occupied (index 2) -> |10> (index 1), no sign.
        assert_eq!(h.matrix[(1, 2)], c(1.0, 0.0));
        assert_eq!(h.matrix[(2, 1)], c(1.0, 0.0));
        assert_eq!(h.matrix[(0, 3)], c(0.0, 0.0));
        assert_eq!(h.matrix[(3, 3)], c(0.0, 0.0));
    }

    #[test]
    fn number_conservation() {
        let ints = synth_random_hamiltonian(4, 5, 2.0);
        let h = fermionic_dense(&ints).unwrap();
        for i in 0..16usize {
            for j in 0..16usize {
                if i.count_ones() != j.count_ones() {
                    assert_eq!(h.matrix[(i, j)], c(0.0, 0.0));
                }
            }
        }
        assert!(h.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn too_large() {
        let ints = SpinOrbitalIntegrals::zeros(15);
        assert_eq!(fermionic_dense(&ints), Err(OracleError::TooLarge(15)));
    }

    #[test]
    fn diagonal_matrix_eigensystem() {
        let mut ints = SpinOrbitalIntegrals::zeros(2);
        ints.set_h1(0, 0, c(-1.0, 0.0));
        ints.set_h1(1, 1, c(0.5, 0.0));
        let h = fermionic_dense(&ints).unwrap();
        let d0: Determinant = "10".parse().unwrap();
        let d1: Determinant = "01".parse().unwrap();
        let sys = diagonalize(&h, &d0, &d1).unwrap();
        assert_eq!(sys.energies, vec![-1.0, -0.5, 0.0, 0.5]);
        let w0: Vec<f64> = sys.overlaps0.iter().map(|c| c.norm_sqr()).collect();
        assert_eq!(w0, vec![1.0, 0.0, 0.0, 0.0]);
        let gap = exact_gap(&sys).unwrap();
        assert_eq!(gap.gap, 1.5);
        assert!(!gap.degenerate);
        assert!((interference_prob0(&sys, 1.5, 3.7) - 1.0).abs() < 1e-15);
        let t = 2.0;
        assert!(interference_prob0(&sys, 1.5 - std::f64::consts::PI / t, t).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_gap() {
        let (a, b) = (0.3, -0.45);
        let m = DMatrix::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(b, 0.0), c(a, 0.0)]);
        let (e, _) = eigh(&m).unwrap();
        assert!((e[1] - e[0] - 2.0 * b.abs()).abs() < 1e-14);
    }

    #[test]
    fn same_dominant_state_is_degenerate() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.1, 0.0), c(0.1, 0.0), c(1.0, 0.0)]);
        let h = DenseHamiltonian {
            n_orb: 1,
            basis: vec![0, 1],
            matrix: m,
        };
        let d: Determinant = "0".parse().unwrap();
        let sys = diagonalize(&h, &d, &d).unwrap();
        let g = exact_gap(&sys).unwrap();
        assert!(g.degenerate);
        assert_eq!(g.gap, 0.0);
    }

    #[test]
    fn ambiguous_assignment() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let h = DenseHamiltonian {
            n_orb: 1,
            basis: vec![0, 1],
            matrix: m,
        };
        let sys = diagonalize(&h, &"0".parse().unwrap(), &"1".parse().unwrap()).unwrap();
        assert!(matches!(exact_gap(&sys), Err(OracleError::AmbiguousAssignment { .. })));
    }

    #[test]
    fn exact_evolve_identity_and_eigenstate() {
        let ints = synth_random_hamiltonian(3, 4, 3.0);
        let h = fermionic_dense(&ints).unwrap();
        let s = StateVector::random(3, 1).unwrap();
        let same = exact_evolve(&s, &h.matrix, 0.0).unwrap();
        assert!(same.max_abs_diff(&s) < 1e-12);

        let (_, states) = eigh(&h.matrix).unwrap();
        let v = StateVector::from_amplitudes(states.column(3).iter().copied().collect()).unwrap();
        let out = exact_evolve(&v, &h.matrix, 2.3).unwrap();
        for (a, b) in out.amplitudes().iter().zip(v.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);

        let wrong = StateVector::random(2, 1).unwrap();
        assert!(matches!(
            exact_evolve(&wrong, &h.matrix, 1.0),
            Err(OracleError::DimensionMismatch { .. })
        ));
    }
}
