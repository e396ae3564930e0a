//! Dense statevector simulation of small circuits.
//!
//! Qubits are labelled `1..=n`. Qubit 1 is the most significant bit of a basis
//! index and the leftmost character of every bit string, so basis index `i`
//! has qubit `j` in state `(i >> (n - j)) & 1`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Matrix2 = [[Complex64; 2]; 2];

/// Formats the low `width` bits of `value` with the most significant bit first.
pub fn format_bits(value: usize, width: usize) -> String {
    (0..width)
        .map(|k| if (value >> (width - 1 - k)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`format_bits`].
pub fn parse_bits(s: &str) -> Option<usize> {
    if s.is_empty() || s.len() > 63 {
        return None;
    }
    s.chars().try_fold(0usize, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

/// Number of 1-bits, which decides the sign of an outcome in a Pauli expectation.
pub fn parity_sign(outcome: usize) -> f64 {
    if outcome.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// `[[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]]`
    RotY { qubit: usize, angle: f64 },
    Hadamard(usize),
    PauliX(usize),
    PauliY(usize),
    PauliZ(usize),
    SDagger(usize),
    ControlledNot { control: usize, target: usize },
    ControlledHadamard { control: usize, target: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::RotY { qubit, .. }
            | Gate::Hadamard(qubit)
            | Gate::PauliX(qubit)
            | Gate::PauliY(qubit)
            | Gate::PauliZ(qubit)
            | Gate::SDagger(qubit) => vec![qubit],
            Gate::ControlledNot { control, target }
            | Gate::ControlledHadamard { control, target } => vec![control, target],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(
            self,
            Gate::ControlledNot { .. } | Gate::ControlledHadamard { .. }
        )
    }

    /// Single-qubit matrix acting on the target (for controlled gates, the
    /// block applied when the control is 1).
    pub fn target_matrix(&self) -> Matrix2 {
        let r = |x: f64| Complex64::new(x, 0.0);
        match *self {
            Gate::RotY { angle, .. } => {
                let (s, c) = (angle / 2.0).sin_cos();
                [[r(c), r(-s)], [r(s), r(c)]]
            }
            Gate::Hadamard(_) | Gate::ControlledHadamard { .. } => [
                [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
                [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            ],
            Gate::PauliX(_) | Gate::ControlledNot { .. } => [[ZERO, ONE], [ONE, ZERO]],
            Gate::PauliY(_) => [[ZERO, -I], [I, ZERO]],
            Gate::PauliZ(_) => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::SDagger(_) => [[ONE, ZERO], [ZERO, -I]],
        }
    }

    /// Full unitary on the gate's own qubits, ordered as [`Gate::qubits`]
    /// (first listed qubit is the most significant bit).
    pub fn unitary(&self) -> Vec<Vec<Complex64>> {
        let m = self.target_matrix();
        if !self.is_two_qubit() {
            return m.iter().map(|row| row.to_vec()).collect();
        }
        let mut u = vec![vec![ZERO; 4]; 4];
        u[0][0] = ONE;
        u[1][1] = ONE;
        for a in 0..2 {
            for b in 0..2 {
                u[2 + a][2 + b] = m[a][b];
            }
        }
        u
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::RotY { qubit, angle } => write!(f, "ry({angle:.17}) q{qubit}"),
            Gate::Hadamard(q) => write!(f, "h q{q}"),
            Gate::PauliX(q) => write!(f, "x q{q}"),
            Gate::PauliY(q) => write!(f, "y q{q}"),
            Gate::PauliZ(q) => write!(f, "z q{q}"),
            Gate::SDagger(q) => write!(f, "sdg q{q}"),
            Gate::ControlledNot { control, target } => write!(f, "cx q{control},q{target}"),
            Gate::ControlledHadamard { control, target } => {
                write!(f, "ch q{control},q{target}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub measured_qubits: Vec<usize>,
}

impl Circuit {
    /// Empty circuit measuring every qubit.
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            measured_qubits: (1..=n_qubits).collect(),
        }
    }

    pub fn push(mut self, gate: Gate) -> Self {
        self.gates.push(gate);
        self
    }

    pub fn measure(mut self, qubits: Vec<usize>) -> Self {
        self.measured_qubits = qubits;
        self
    }

    /// Gates of `self` followed by gates of `next`; measurement taken from `next`.
    pub fn then(&self, next: &Circuit) -> Result<Circuit> {
        if self.n_qubits != next.n_qubits {
            return Err(Error::contract(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                next.n_qubits, self.n_qubits
            )));
        }
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&next.gates);
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
            measured_qubits: next.measured_qubits.clone(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_register(self.n_qubits)?;
        for gate in &self.gates {
            let qs = gate.qubits();
            for &q in &qs {
                check_qubit(q, self.n_qubits)?;
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::contract(format!("gate `{gate}` uses one qubit twice")));
            }
        }
        check_measured(&self.measured_qubits, self.n_qubits)
    }

    /// Stable textual identity used for caching.
    pub fn key(&self) -> String {
        let gates: Vec<String> = self.gates.iter().map(|g| g.to_string()).collect();
        format!(
            "n={};{};m={:?}",
            self.n_qubits,
            gates.join(";"),
            self.measured_qubits
        )
    }

    pub fn count_gates(&self) -> (usize, usize) {
        let two = self.gates.iter().filter(|g| g.is_two_qubit()).count();
        (self.gates.len() - two, two)
    }
}

fn check_register(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::config(format!(
            "register size {n} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q == 0 || q > n {
        return Err(Error::contract(format!(
            "qubit index {q} outside 1..={n}"
        )));
    }
    Ok(())
}

fn check_measured(measured: &[usize], n: usize) -> Result<()> {
    if measured.is_empty() {
        return Err(Error::contract("no measured qubits"));
    }
    for (k, &q) in measured.iter().enumerate() {
        check_qubit(q, n)?;
        if measured[..k].contains(&q) {
            return Err(Error::contract(format!("qubit {q} measured twice")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Normalizes and wraps raw amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::contract(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::contract("amplitudes have zero or non-finite norm"));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - qubit)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            check_qubit(q, self.n_qubits)?;
        }
        let m = gate.target_matrix();
        match *gate {
            Gate::ControlledNot { control, target }
            | Gate::ControlledHadamard { control, target } => {
                if control == target {
                    return Err(Error::contract("control equals target"));
                }
                self.apply_single(target, &m, self.mask(control));
            }
            _ => {
                let q = gate.qubits()[0];
                self.apply_single(q, &m, 0);
            }
        }
        Ok(())
    }

    /// Applies `m` to `qubit` on the subspace where all bits of `control_mask` are set.
    fn apply_single(&mut self, qubit: usize, m: &Matrix2, control_mask: usize) {
        let bit = self.mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 || i & control_mask != control_mask {
                continue;
            }
            let j = i | bit;
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Returns a new state with `gate` applied.
    pub fn with_gate(&self, gate: &Gate) -> Result<Self> {
        let mut next = self.clone();
        next.apply(gate)?;
        Ok(next)
    }

    /// Marginal Born probabilities over `measured`, indexed by the bit string
    /// whose first character is `measured[0]`.
    pub fn probabilities(&self, measured: &[usize]) -> Result<Vec<f64>> {
        check_measured(measured, self.n_qubits)?;
        let k = measured.len();
        let mut probs = vec![0.0; 1 << k];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let outcome = self.project(i, measured);
            probs[outcome] += a.norm_sqr();
        }
        debug_assert_eq!(probs.len(), 1 << k);
        Ok(probs)
    }

    /// Measured bits of basis index `i`, packed with `measured[0]` most significant.
    pub(crate) fn project(&self, i: usize, measured: &[usize]) -> usize {
        measured
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((i >> (self.n_qubits - q)) & 1))
    }

    /// `<psi|P|psi>` for a Pauli string given as one letter per qubit.
    pub fn expectation(&self, letters: &[char]) -> Result<f64> {
        if letters.len() != self.n_qubits {
            return Err(Error::contract(format!(
                "Pauli string of length {} on a {}-qubit state",
                letters.len(),
                self.n_qubits
            )));
        }
        let mut flip = 0usize;
        let mut y_count = 0u32;
        let mut z_mask = 0usize;
        let mut y_mask = 0usize;
        for (k, &c) in letters.iter().enumerate() {
            let bit = self.mask(k + 1);
            match c {
                'I' => {}
                'X' => flip |= bit,
                'Y' => {
                    flip |= bit;
                    y_mask |= bit;
                    y_count += 1;
                }
                'Z' => z_mask |= bit,
                other => {
                    return Err(Error::contract(format!("invalid Pauli letter `{other}`")))
                }
            }
        }
        // P|i> = phase(i) |i ^ flip>, with Y|b> = i(-1)^b |1-b>.
        let global = I.powu(y_count);
        let mut acc = ZERO;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let sign_bits = (i & z_mask).count_ones() + (i & y_mask).count_ones();
            let sign = if sign_bits.is_multiple_of(2) { 1.0 } else { -1.0 };
            let image = self.amplitudes[i ^ flip];
            acc += image.conj() * global * sign * a;
        }
        Ok(acc.re)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::contract("fidelity between different register sizes"));
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }
}

/// Applies the gates of `circuit` in order to `|0...0>`.
pub fn run_circuit(circuit: &Circuit) -> Result<StateVector> {
    circuit.validate()?;
    let mut state = StateVector::zero(circuit.n_qubits)?;
    for gate in &circuit.gates {
        state.apply(gate)?;
    }
    Ok(state)
}

/// Counts over measured bit strings from one experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotHistogram {
    measured_qubits: Vec<usize>,
    counts: Vec<u64>,
    total_shots: u64,
}

impl ShotHistogram {
    pub fn empty(measured_qubits: Vec<usize>) -> Self {
        let width = measured_qubits.len();
        ShotHistogram {
            measured_qubits,
            counts: vec![0; 1 << width],
            total_shots: 0,
        }
    }

    /// Builds a histogram from `(bit string, count)` pairs.
    pub fn from_counts<'a>(
        measured_qubits: Vec<usize>,
        entries: impl IntoIterator<Item = (&'a str, u64)>,
    ) -> Result<Self> {
        let width = measured_qubits.len();
        let mut hist = ShotHistogram::empty(measured_qubits);
        for (bits, count) in entries {
            let outcome = parse_bits(bits)
                .filter(|_| bits.len() == width)
                .ok_or_else(|| {
                    Error::contract(format!("bit string `{bits}` does not have width {width}"))
                })?;
            hist.record(outcome, count);
        }
        Ok(hist)
    }

    pub fn record(&mut self, outcome: usize, count: u64) {
        self.counts[outcome] += count;
        self.total_shots += count;
    }

    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured_qubits
    }

    pub fn width(&self) -> usize {
        self.measured_qubits.len()
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    /// Dense counts indexed by outcome value.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, bits: &str) -> u64 {
        parse_bits(bits)
            .filter(|_| bits.len() == self.width())
            .map_or(0, |o| self.counts[o])
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total_shots.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Nonzero entries as `(bit string, count)` in outcome order.
    pub fn sparse(&self) -> Vec<(String, u64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(o, &c)| (format_bits(o, self.width()), c))
            .collect()
    }

    /// Parity-signed expectation `sum_b (-1)^popcount(b) freq(b)`.
    pub fn parity_expectation(&self) -> f64 {
        self.frequencies()
            .iter()
            .enumerate()
            .map(|(o, f)| parity_sign(o) * f)
            .sum()
    }
}

/// Inverse-CDF sampler over a fixed distribution.
#[derive(Debug, Clone)]
pub(crate) struct OutcomeSampler {
    cumulative: Vec<f64>,
}

impl OutcomeSampler {
    pub(crate) fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p.max(0.0);
                acc
            })
            .collect();
        OutcomeSampler { cumulative }
    }

    pub(crate) fn draw(&self, rng: &mut SimRng) -> usize {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u: f64 = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Draws `shots` i.i.d. outcomes from the marginal distribution of `measured`.
pub fn sample_shots(
    state: &StateVector,
    measured: &[usize],
    shots: u64,
    seed: u64,
) -> Result<ShotHistogram> {
    sample_shots_with(state, measured, shots, &mut rng_from_seed(seed))
}

pub fn sample_shots_with(
    state: &StateVector,
    measured: &[usize],
    shots: u64,
    rng: &mut SimRng,
) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(Error::contract("shots must be at least 1"));
    }
    let sampler = OutcomeSampler::new(&state.probabilities(measured)?);
    let mut hist = ShotHistogram::empty(measured.to_vec());
    for _ in 0..shots {
        hist.record(sampler.draw(rng), 1);
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn all_gates() -> Vec<Gate> {
        vec![
            Gate::RotY {
                qubit: 1,
                angle: 0.731,
            },
            Gate::Hadamard(1),
            Gate::PauliX(1),
            Gate::PauliY(1),
            Gate::PauliZ(1),
            Gate::SDagger(1),
            Gate::ControlledNot {
                control: 1,
                target: 2,
            },
            Gate::ControlledHadamard {
                control: 1,
                target: 2,
            },
        ]
    }

    #[test]
    fn zero_state_layout() {
        let s = StateVector::zero(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
        let s1 = StateVector::zero(1).unwrap();
        assert_eq!(s1.amplitudes(), &[ONE, ZERO]);
        assert!(matches!(StateVector::zero(0), Err(Error::Config(_))));
        assert!(matches!(StateVector::zero(13), Err(Error::Config(_))));
    }

    #[test]
    fn every_gate_is_unitary() {
        for g in all_gates() {
            let u = g.unitary();
            let d = u.len();
            for r in 0..d {
                for c in 0..d {
                    let dot: Complex64 = (0..d).map(|k| u[k][r].conj() * u[k][c]).sum();
                    let want = if r == c { ONE } else { ZERO };
                    assert!((dot - want).norm() < TOL, "{g} not unitary");
                }
            }
        }
    }

    #[test]
    fn ry_creates_w_weighting() {
        let alpha = 2.0 * (1.0 / 3f64.sqrt()).acos();
        let s = StateVector::zero(1)
            .unwrap()
            .with_gate(&Gate::RotY { qubit: 1, angle: alpha })
            .unwrap();
        assert!((s.amplitudes()[0] - Complex64::new(1.0 / 3f64.sqrt(), 0.0)).norm() < TOL);
        assert!((s.amplitudes()[1] - Complex64::new((2.0f64 / 3.0).sqrt(), 0.0)).norm() < TOL);
    }

    #[test]
    fn hadamard_is_involution() {
        let s = StateVector::from_amplitudes(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.7),
            Complex64::new(0.05, 0.0),
            Complex64::new(0.4, -0.3),
        ])
        .unwrap();
        let twice = s
            .with_gate(&Gate::Hadamard(2))
            .unwrap()
            .with_gate(&Gate::Hadamard(2))
            .unwrap();
        for (a, b) in s.amplitudes().iter().zip(twice.amplitudes()) {
            assert!((a - b).norm() < TOL);
        }
    }

    #[test]
    fn sdagger_then_hadamard_maps_plus_i_to_zero() {
        // Hand product: H S^dag (1, i)/sqrt2 = H (1, 1)/sqrt2 = (1, 0).
        let plus_i = StateVector::from_amplitudes(vec![ONE, I]).unwrap();
        let out = plus_i
            .with_gate(&Gate::SDagger(1))
            .unwrap()
            .with_gate(&Gate::Hadamard(1))
            .unwrap();
        let zero = StateVector::zero(1).unwrap();
        assert!((out.fidelity(&zero).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn bit_order_qubit_one_is_leftmost() {
        let s = run_circuit(&Circuit::new(3).push(Gate::PauliX(1))).unwrap();
        let p = s.probabilities(&[1, 2, 3]).unwrap();
        assert_eq!(parse_bits("100"), Some(4));
        assert!((p[4] - 1.0).abs() < TOL);
        assert_eq!(format_bits(4, 3), "100");
        let marg = s.probabilities(&[3, 1]).unwrap();
        assert!((marg[parse_bits("01").unwrap()] - 1.0).abs() < TOL);
    }

    #[test]
    fn out_of_range_gate_is_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply(&Gate::Hadamard(3)), Err(Error::Contract(_))));
        assert!(matches!(s.apply(&Gate::Hadamard(0)), Err(Error::Contract(_))));
        let c = Circuit::new(2).measure(vec![1, 1]);
        assert!(c.validate().is_err());
        let c = Circuit::new(2).measure(vec![]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_circuit_yields_zero_state() {
        let s = run_circuit(&Circuit::new(3)).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());
        let p = s.probabilities(&[1, 2, 3]).unwrap();
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn z_expectation_on_zero() {
        let s = StateVector::zero(3).unwrap();
        assert!((s.expectation(&['Z', 'I', 'I']).unwrap() - 1.0).abs() < TOL);
        assert!(s.expectation(&['Z', 'I']).is_err());
        assert!(s.expectation(&['Q', 'I', 'I']).is_err());
    }

    #[test]
    fn y_expectation_of_plus_i_state() {
        let s = StateVector::from_amplitudes(vec![ONE, I]).unwrap();
        assert!((s.expectation(&['Y']).unwrap() - 1.0).abs() < TOL);
        assert!(s.expectation(&['X']).unwrap().abs() < TOL);
    }

    #[test]
    fn sampling_zero_state_and_determinism() {
        let s = StateVector::zero(3).unwrap();
        let h = sample_shots(&s, &[1, 2, 3], 500, 1).unwrap();
        assert_eq!(h.count("000"), 500);
        assert_eq!(h.total_shots(), 500);
        assert!(sample_shots(&s, &[1, 2, 3], 0, 1).is_err());

        let plus = run_circuit(&Circuit::new(2).push(Gate::Hadamard(1)).push(Gate::Hadamard(2)))
            .unwrap();
        let a = sample_shots(&plus, &[1, 2], 1000, 99).unwrap();
        let b = sample_shots(&plus, &[1, 2], 1000, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts().iter().sum::<u64>(), 1000);
    }

    #[test]
    fn histogram_parity_expectation() {
        let h = ShotHistogram::from_counts(vec![2, 3], [("00", 512), ("11", 512)]).unwrap();
        assert_eq!(h.parity_expectation(), 1.0);
        assert!(ShotHistogram::from_counts(vec![2, 3], [("0", 1)]).is_err());
        assert_eq!(h.sparse(), vec![("00".to_string(), 512), ("11".to_string(), 512)]);
    }
}
