//! Pauli strings, qubit Hamiltonians and the Jordan–Wigner mapping.
//!
//! Conventions: qubit `q` is spin orbital `q`, `|1>` means occupied, and the parity
//! string of `a_q` runs over qubits `< q`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrals::SpinOrbitalIntegrals;

/// Largest register addressable by the bitmask representation.
pub const MAX_QUBITS: usize = 63;

/// Default magnitude below which mapped terms are dropped (Hartree).
pub const DEFAULT_PRUNE_CUTOFF: f64 = 1e-12;

const IMAG_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QubitError {
    #[error("term {string} has imaginary coefficient residue {residue:.3e}")]
    NonHermitianResult { string: String, residue: f64 },
    #[error("length mismatch: expected {expected} qubits, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid occupation string `{0}`")]
    InvalidOccupation(String),
    #[error("{0} orbitals exceed the {MAX_QUBITS}-qubit limit")]
    TooManyQubits(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, identity on unlisted qubits.
///
/// Stored in symplectic form: qubit `q` carries X if only `x` bit `q` is set,
/// Z if only `z` bit `q` is set, and Y if both are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a string from `(qubit, pauli)` pairs; each qubit may appear once.
    pub fn from_ops(ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::default();
        for &(q, p) in ops {
            assert!(q < MAX_QUBITS, "qubit {q} out of range");
            let bit = 1u64 << q;
            assert!((s.x | s.z) & bit == 0, "qubit {q} listed twice");
            match p {
                Pauli::X => s.x |= bit,
                Pauli::Y => {
                    s.x |= bit;
                    s.z |= bit;
                }
                Pauli::Z => s.z |= bit,
            }
        }
        s
    }

    pub fn single(q: usize, p: Pauli) -> Self {
        Self::from_ops(&[(q, p)])
    }

    /// Bit flips applied to a basis index (X or Y positions).
    #[inline]
    pub fn flip_mask(&self) -> u64 {
        self.x
    }

    /// Positions contributing a `(-1)^bit` sign (Y or Z positions).
    #[inline]
    pub fn sign_mask(&self) -> u64 {
        self.z
    }

    #[inline]
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    #[inline]
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn get(&self, q: usize) -> Option<Pauli> {
        let bit = 1u64 << q;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }

    /// Non-identity factors in ascending qubit order.
    pub fn ops(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        let support = self.support_mask();
        (0..64usize)
            .filter(move |q| support & (1u64 << q) != 0)
            .map(move |q| (q, self.get(q).expect("in support")))
    }

    /// Highest qubit touched, if any.
    pub fn max_qubit(&self) -> Option<usize> {
        let s = self.support_mask();
        (s != 0).then(|| 63 - s.leading_zeros() as usize)
    }

    /// Canonical ordering: by support (as an ascending qubit list), then lexically
    /// by Pauli letters.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        let a: Vec<(usize, Pauli)> = self.ops().collect();
        let b: Vec<(usize, Pauli)> = other.ops().collect();
        let qa: Vec<usize> = a.iter().map(|o| o.0).collect();
        let qb: Vec<usize> = b.iter().map(|o| o.0).collect();
        qa.len()
            .cmp(&qb.len())
            .then_with(|| qa.cmp(&qb))
            .then_with(|| {
                let la: String = a.iter().map(|o| o.1.letter()).collect();
                let lb: String = b.iter().map(|o| o.1.letter()).collect();
                la.cmp(&lb)
            })
    }

    /// Phase `c(y)` with `P|y> = c(y)|y ^ flip_mask>`.
    #[inline]
    pub fn phase_on(&self, index: u64) -> Complex64 {
        let sign = if (index & self.z).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
        match self.y_count() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }

    /// Dense matrix on `n_qubits` (basis index bit `q` = qubit `q`).
    pub fn to_dense(&self, n_qubits: usize) -> DMatrix<Complex64> {
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim as u64 {
            let row = col ^ self.x;
            m[(row as usize, col as usize)] = self.phase_on(col);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.ops() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}{q}", p.letter())?;
        }
        Ok(())
    }
}

/// Product of `X^x Z^z` monomials, tracking the sign from reordering.
#[derive(Debug, Clone, Copy)]
struct Monomial {
    x: u64,
    z: u64,
    coeff: Complex64,
}

impl Monomial {
    fn mul(self, rhs: Monomial) -> Monomial {
        // X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a^c} Z^{b^d}
        let sign = if (self.z & rhs.x).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
        Monomial {
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
            coeff: self.coeff * rhs.coeff * sign,
        }
    }

    /// Rewrites `coeff * X^x Z^z` as `coeff' * P` with `P` Hermitian (XZ = -iY).
    fn into_hermitian(self) -> (PauliString, Complex64) {
        let ny = (self.x & self.z).count_ones();
        let phase = match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        (PauliString { x: self.x, z: self.z }, self.coeff * phase)
    }
}

/// Jordan–Wigner image of `a_q` (`dagger = false`) or `a+_q`, as two monomials.
fn ladder(q: usize, dagger: bool) -> [Monomial; 2] {
    // a_q = Z_{<q} (X_q + iY_q)/2 and Y = iXZ, so iY = -XZ.
    // (X + iY)/2 = (X - XZ)/2 ; (X - iY)/2 = (X + XZ)/2.
    let tail = (1u64 << q) - 1;
    let bit = 1u64 << q;
    let s = if dagger { 0.5 } else { -0.5 };
    [
        Monomial {
            x: bit,
            z: tail,
            coeff: Complex64::new(0.5, 0.0),
        },
        // Z_tail X_q Z_q: the tail Zs sit left of X_q, so reorder Z^tail X^bit = X^bit Z^tail
        // (disjoint supports commute).
        Monomial {
            x: bit,
            z: tail | bit,
            coeff: Complex64::new(s, 0.0),
        },
    ]
}

/// Weighted sum of Pauli strings with real weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitHamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl QubitHamiltonian {
    /// Merges duplicate strings and sorts canonically. No pruning.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n_qubits), "n_qubits out of range");
        let mut merged: HashMap<PauliString, f64> = HashMap::new();
        for (w, s) in terms {
            assert!(
                s.max_qubit().is_none_or(|q| q < n_qubits),
                "string {s} exceeds {n_qubits} qubits"
            );
            *merged.entry(s).or_insert(0.0) += w;
        }
        let mut terms: Vec<(f64, PauliString)> = merged.into_iter().map(|(s, w)| (w, s)).collect();
        terms.sort_by(|a, b| a.1.canonical_cmp(&b.1));
        Self { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Weight of `s`, zero if absent.
    pub fn coefficient(&self, s: &PauliString) -> f64 {
        self.terms
            .iter()
            .find(|(_, t)| t == s)
            .map_or(0.0, |(w, _)| *w)
    }

    /// `true` when every term is built from I and Z only.
    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, s)| s.is_diagonal())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (w, s) in &self.terms {
            for col in 0..dim as u64 {
                let row = col ^ s.flip_mask();
                m[(row as usize, col as usize)] += s.phase_on(col) * *w;
            }
        }
        m
    }
}

/// Occupation bitstring; bit `q` set means spin orbital `q` is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Determinant {
    bits: u64,
    len: usize,
}

impl Determinant {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= MAX_QUBITS, "determinant too long");
        assert!(len == 64 || bits >> len == 0, "bits beyond length");
        Self { bits, len }
    }

    pub fn from_occupied(occupied: &[usize], len: usize) -> Self {
        let bits = occupied.iter().fold(0u64, |acc, &q| {
            assert!(q < len, "orbital {q} out of range");
            acc | (1u64 << q)
        });
        Self::new(bits, len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_occupied(&self, q: usize) -> bool {
        self.bits & (1u64 << q) != 0
    }

    pub fn particle_count(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Orbitals whose occupation differs between `self` and `other`.
    pub fn difference(&self, other: &Determinant) -> Vec<usize> {
        let diff = self.bits ^ other.bits;
        (0..self.len.max(other.len))
            .filter(|q| diff & (1u64 << q) != 0)
            .collect()
    }
}

impl FromStr for Determinant {
    type Err = QubitError;

    /// Character `q` of the string is the occupation of orbital `q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.len() > MAX_QUBITS {
            return Err(QubitError::InvalidOccupation(s.to_string()));
        }
        let mut bits = 0u64;
        for (q, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1u64 << q,
                '0' => {}
                _ => return Err(QubitError::InvalidOccupation(s.to_string())),
            }
        }
        Ok(Self::new(bits, s.len()))
    }
}

impl fmt::Display for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len {
            write!(f, "{}", if self.is_occupied(q) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

fn accumulate(
    acc: &mut HashMap<PauliString, Complex64>,
    coeff: Complex64,
    factors: &[[Monomial; 2]],
) {
    let mut products = vec![Monomial {
        x: 0,
        z: 0,
        coeff,
    }];
    for pair in factors {
        let mut next = Vec::with_capacity(products.len() * 2);
        for m in &products {
            next.push(m.mul(pair[0]));
            next.push(m.mul(pair[1]));
        }
        products = next;
    }
    for m in products {
        let (s, c) = m.into_hermitian();
        *acc.entry(s).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
}

/// Maps the integral Hamiltonian to qubits, one qubit per spin orbital.
///
/// Raw coefficients must be real to within `1e-10`; terms with `|w| < prune_cutoff`
/// are dropped.
pub fn jordan_wigner(
    ints: &SpinOrbitalIntegrals,
    prune_cutoff: f64,
) -> Result<QubitHamiltonian, QubitError> {
    let n = ints.n_orb();
    if n > MAX_QUBITS {
        return Err(QubitError::TooManyQubits(n));
    }
    let lad: Vec<[[Monomial; 2]; 2]> = (0..n).map(|q| [ladder(q, false), ladder(q, true)]).collect();
    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    acc.insert(PauliString::identity(), Complex64::new(ints.core_energy, 0.0));

    for p in 0..n {
        for q in 0..n {
            let h = ints.h1(p, q);
            if h.norm() == 0.0 {
                continue;
            }
            accumulate(&mut acc, h, &[lad[p][1], lad[q][0]]);
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            for r in 0..n {
                for s in 0..n {
                    if r == s {
                        continue;
                    }
                    let h = ints.h2(p, q, r, s);
                    if h.norm() == 0.0 {
                        continue;
                    }
                    accumulate(
                        &mut acc,
                        h * 0.5,
                        &[lad[p][1], lad[q][1], lad[s][0], lad[r][0]],
                    );
                }
            }
        }
    }

    let mut terms = Vec::with_capacity(acc.len());
    for (s, c) in acc {
        if c.im.abs() > IMAG_RESIDUE_TOL {
            return Err(QubitError::NonHermitianResult {
                string: s.to_string(),
                residue: c.im.abs(),
            });
        }
        if c.re.abs() >= prune_cutoff && c.re != 0.0 {
            terms.push((c.re, s));
        }
    }
    Ok(QubitHamiltonian::new(n, terms))
}

/// `<d|H|d>`: only I/Z strings contribute, with `Z|1> = -|1>`.
pub fn determinant_expectation(h: &QubitHamiltonian, d: &Determinant) -> Result<f64, QubitError> {
    if d.len() != h.n_qubits() {
        return Err(QubitError::LengthMismatch {
            expected: h.n_qubits(),
            found: d.len(),
        });
    }
    Ok(h.terms()
        .iter()
        .filter(|(_, s)| s.is_diagonal())
        .map(|(w, s)| {
            if (s.sign_mask() & d.bits()).count_ones() & 1 == 1 {
                -w
            } else {
                *w
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn single_orbital_number_operator() {
        let mut ints = SpinOrbitalIntegrals::zeros(1);
        ints.set_h1(0, 0, Complex64::new(0.8, 0.0));
        let h = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
        assert_eq!(h.len(), 2);
        assert!(close(h.coefficient(&PauliString::identity()), 0.4));
        assert!(close(h.coefficient(&PauliString::single(0, Pauli::Z)), -0.4));
    }

    #[test]
    fn hopping_maps_to_xx_plus_yy() {
        let mut ints = SpinOrbitalIntegrals::zeros(2);
        ints.set_h1_hermitian(0, 1, Complex64::new(1.0, 0.0));
        let h = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
        assert_eq!(h.len(), 2, "{:?}", h.terms());
        let xx = PauliString::from_ops(&[(0, Pauli::X), (1, Pauli::X)]);
        let yy = PauliString::from_ops(&[(0, Pauli::Y), (1, Pauli::Y)]);
        assert!(close(h.coefficient(&xx), 0.5));
        assert!(close(h.coefficient(&yy), 0.5));
    }

    #[test]
    fn constant_operator() {
        let mut ints = SpinOrbitalIntegrals::zeros(3);
        ints.core_energy = -7.25;
        let h = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
        assert_eq!(h.terms(), &[(-7.25, PauliString::identity())]);
    }

    #[test]
    fn corrupted_integrals_are_rejected() {
        let mut ints = SpinOrbitalIntegrals::zeros(2);
        ints.set_h1(0, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(
            jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF),
            Err(QubitError::NonHermitianResult { .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let h = QubitHamiltonian::new(1, [(1.0, PauliString::single(0, Pauli::Z))]);
        let occ: Determinant = "1".parse().unwrap();
        assert_eq!(determinant_expectation(&h, &occ).unwrap(), -1.0);

        let hx = QubitHamiltonian::new(1, [(0.7, PauliString::single(0, Pauli::X))]);
        assert_eq!(determinant_expectation(&hx, &occ).unwrap(), 0.0);

        let mut ints = SpinOrbitalIntegrals::zeros(3);
        for p in 0..3 {
            ints.set_h1(p, p, Complex64::new(1.0, 0.0));
        }
        let h3 = jordan_wigner(&ints, DEFAULT_PRUNE_CUTOFF).unwrap();
        let d: Determinant = "110".parse().unwrap();
        assert!(close(determinant_expectation(&h3, &d).unwrap(), 2.0));

        let short: Determinant = "11".parse().unwrap();
        assert!(matches!(
            determinant_expectation(&h3, &short),
            Err(QubitError::LengthMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn determinant_strings() {
        let d: Determinant = "10".parse().unwrap();
        assert_eq!(d.bits(), 1);
        assert_eq!(d.to_string(), "10");
        assert!("1a0".parse::<Determinant>().is_err());
        assert!("".parse::<Determinant>().is_err());
        let a: Determinant = "1100".parse().unwrap();
        let b: Determinant = "1010".parse().unwrap();
        assert_eq!(a.difference(&b), vec![1, 2]);
    }

    #[test]
    fn canonical_order_puts_identity_first() {
        let h = QubitHamiltonian::new(
            3,
            [
                (1.0, PauliString::from_ops(&[(0, Pauli::X), (2, Pauli::X)])),
                (1.0, PauliString::single(1, Pauli::Z)),
                (1.0, PauliString::identity()),
                (1.0, PauliString::single(0, Pauli::Z)),
                (1.0, PauliString::single(0, Pauli::X)),
            ],
        );
        let names: Vec<String> = h.terms().iter().map(|t| t.1.to_string()).collect();
        assert_eq!(names, ["I", "X0", "Z0", "Z1", "X0 X2"]);
    }

    #[test]
    fn pauli_dense_matches_textbook() {
        let y = PauliString::single(0, Pauli::Y).to_dense(1);
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        let z = PauliString::single(0, Pauli::Z).to_dense(1);
        assert_eq!(z[(1, 1)], Complex64::new(-1.0, 0.0));
    }
}
