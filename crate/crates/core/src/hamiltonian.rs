//! Benchmark Hamiltonians as weighted Pauli strings, the W-state preparation
//! circuit and the per-string basis rotations applied before measurement.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Circuit, Gate, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// A real coefficient times a tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    letters: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::contract("empty Pauli string"));
        }
        if !coefficient.is_finite() {
            return Err(Error::config("non-finite Pauli coefficient"));
        }
        Ok(PauliTerm {
            coefficient,
            letters,
        })
    }

    /// Parses a letter string such as `"YZY"`.
    pub fn parse(coefficient: f64, letters: &str) -> Result<Self> {
        let parsed = letters
            .chars()
            .map(|c| {
                Pauli::from_letter(c)
                    .ok_or_else(|| Error::config(format!("invalid Pauli letter `{c}` in `{letters}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliTerm::new(coefficient, parsed)
    }

    /// Builds a term on `n_qubits` from `(qubit, letter)` factors; other qubits get `I`.
    pub fn from_factors(coefficient: f64, n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_qubits];
        for &(q, p) in factors {
            if q == 0 || q > n_qubits {
                return Err(Error::contract(format!("qubit {q} outside 1..={n_qubits}")));
            }
            letters[q - 1] = p;
        }
        PauliTerm::new(coefficient, letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Letter string, one character per qubit (`"YYI"`).
    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.letter()).collect()
    }

    pub fn chars(&self) -> Vec<char> {
        self.letters.iter().map(|p| p.letter()).collect()
    }

    /// 1-based qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// Dense `2^n x 2^n` matrix of the bare Pauli string (coefficient excluded).
    pub fn string_matrix(&self) -> DMatrix<Complex64> {
        self.letters.iter().fold(
            DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
            |acc, p| acc.kronecker(&DMatrix::from_fn(2, 2, |r, c| p.matrix()[r][c])),
        )
    }
}

/// Compact subscripted form, e.g. `Y1Z2Y3`.
impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support = self.support();
        if support.is_empty() {
            return write!(f, "I");
        }
        for q in support {
            write!(f, "{}{}", self.letters[q - 1].letter(), q)?;
        }
        Ok(())
    }
}

/// Serialized `(coefficient, letter-string)` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coefficient: f64,
    pub pauli: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for t in &terms {
            if t.n_qubits() != n_qubits {
                return Err(Error::config(format!(
                    "term {} has {} letters, expected {n_qubits}",
                    t.label(),
                    t.n_qubits()
                )));
            }
            if t.support().is_empty() {
                return Err(Error::config("Hamiltonian term with empty support"));
            }
        }
        Ok(PauliHamiltonian { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Dense Hermitian matrix `sum_k c_k P_k`.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1 << self.n_qubits;
        self.terms.iter().fold(DMatrix::zeros(dim, dim), |acc, t| {
            acc + t.string_matrix() * Complex64::new(t.coefficient, 0.0)
        })
    }

    /// Exact `<psi|H|psi>` from per-term expectations.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, t| {
            Ok(acc + t.coefficient * state.expectation(&t.chars())?)
        })
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|t| TermRecord {
                coefficient: t.coefficient,
                pauli: t.label(),
            })
            .collect()
    }

    pub fn from_records(records: &[TermRecord]) -> Result<Self> {
        let terms = records
            .iter()
            .map(|r| PauliTerm::parse(r.coefficient, &r.pauli))
            .collect::<Result<Vec<_>>>()?;
        let n = terms
            .first()
            .map(PauliTerm::n_qubits)
            .ok_or_else(|| Error::config("Hamiltonian without terms"))?;
        PauliHamiltonian::new(n, terms)
    }
}

impl FromStr for PauliTerm {
    type Err = Error;

    /// Accepts `"YZY"` with an implied coefficient of 1.
    fn from_str(s: &str) -> Result<Self> {
        PauliTerm::parse(1.0, s)
    }
}

/// Hopping amplitude in units of t; every term carries `-t/2`.
const HOPPING_COEFFICIENT: f64 = -0.5;

/// Jordan-Wigner form of the spinless Fermi-Hubbard ring with `n_sites` sites
/// and no on-site interaction: the two boundary strings
/// `Y1 Z2..Z(n-1) Yn` and `X1 Z2..Z(n-1) Xn`, then `YjYj+1` and `XjXj+1`
/// for each neighbouring pair.
pub fn hubbard_ring(n_sites: usize) -> Result<PauliHamiltonian> {
    if n_sites < 3 {
        return Err(Error::config(format!(
            "a ring needs at least 3 sites, got {n_sites}"
        )));
    }
    if n_sites > crate::statevector::MAX_QUBITS {
        return Err(Error::config(format!("{n_sites} sites exceed the simulator limit")));
    }
    let mut terms = Vec::with_capacity(2 * n_sites);
    for end in [Pauli::Y, Pauli::X] {
        let mut letters = vec![Pauli::Z; n_sites];
        letters[0] = end;
        letters[n_sites - 1] = end;
        terms.push(PauliTerm::new(HOPPING_COEFFICIENT, letters)?);
    }
    for j in 1..n_sites {
        for p in [Pauli::Y, Pauli::X] {
            terms.push(PauliTerm::from_factors(
                HOPPING_COEFFICIENT,
                n_sites,
                &[(j, p), (j + 1, p)],
            )?);
        }
    }
    PauliHamiltonian::new(n_sites, terms)
}

/// The three-site ring: `-1/2 (Y1Z2Y3 + X1Z2X3 + Y1Y2 + X1X2 + Y2Y3 + X2X3)`.
pub fn fermionic_triangle() -> PauliHamiltonian {
    hubbard_ring(3).expect("three sites is a valid ring")
}

/// Rotation angle of the first gate: `cos(alpha/2) = 1/sqrt(3)`.
pub fn w_rotation_angle() -> f64 {
    2.0 * (1.0 / 3f64.sqrt()).acos()
}

/// Prepares `(|001> + |010> + |100>)/sqrt(3)` from `|000>`.
pub fn w_state_circuit() -> Circuit {
    Circuit::new(3)
        .push(Gate::RotY {
            qubit: 1,
            angle: w_rotation_angle(),
        })
        .push(Gate::ControlledHadamard {
            control: 1,
            target: 2,
        })
        .push(Gate::ControlledNot {
            control: 2,
            target: 3,
        })
        .push(Gate::ControlledNot {
            control: 1,
            target: 2,
        })
        .push(Gate::PauliX(1))
}

/// The ideal W state built directly from its amplitudes.
pub fn w_state() -> StateVector {
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let z = Complex64::new(0.0, 0.0);
    StateVector::from_amplitudes(vec![z, a, a, z, a, z, z, z]).expect("valid W amplitudes")
}

/// Basis change so that a Z-basis readout of the support measures `term`:
/// `S^dag` then `H` for Y, `H` for X, nothing for Z.
pub fn premeasurement_circuit(term: &PauliTerm) -> Circuit {
    let mut c = Circuit::new(term.n_qubits());
    for (k, p) in term.letters().iter().enumerate() {
        let q = k + 1;
        match p {
            Pauli::Y => {
                c = c.push(Gate::SDagger(q)).push(Gate::Hadamard(q));
            }
            Pauli::X => c = c.push(Gate::Hadamard(q)),
            Pauli::Z | Pauli::I => {}
        }
    }
    c.measure(term.support())
}

/// Preparation followed by the rotation for `term`.
pub fn experiment_circuit(prep: &Circuit, term: &PauliTerm) -> Result<Circuit> {
    prep.then(&premeasurement_circuit(term))
}
