//! Detector tomography and readout-error mitigation.
//!
//! A [`CalibrationMatrix`] holds `Lambda[i][j] = P(read i | prepared j)`,
//! estimated by preparing every computational basis state. Mitigation solves
//! `Lambda x = p_exp` for the quasi-distribution `x`; negative entries are kept.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{ExecContext, ExecutionBackend, MitigationMode, Packet, TimeSeries};
use crate::rng::{derive_seed, rng_from_seed};
use crate::statevector::{format_bits, parity_sign, Circuit, Gate, ShotHistogram};

/// Largest accepted condition number before inversion is refused.
pub const DEFAULT_MAX_CONDITION: f64 = 1e6;

const COLUMN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix {
    n_qubits: usize,
    entries: DMatrix<f64>,
}

/// Dense row-major wire form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub n_qubits: usize,
    pub entries: Vec<f64>,
}

impl CalibrationMatrix {
    pub fn new(n_qubits: usize, entries: DMatrix<f64>) -> Result<Self> {
        let dim = 1usize
            .checked_shl(n_qubits as u32)
            .filter(|_| (1..=crate::statevector::MAX_QUBITS).contains(&n_qubits))
            .ok_or_else(|| Error::contract(format!("invalid calibration size {n_qubits}")))?;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::contract(format!(
                "calibration matrix is {}x{}, expected {dim}x{dim}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !(-1e-12..=1.0 + 1e-12).contains(*v)) {
            return Err(Error::contract(format!("calibration entry {bad} outside [0, 1]")));
        }
        for (j, col) in entries.column_iter().enumerate() {
            let s = col.sum();
            if (s - 1.0).abs() > COLUMN_TOLERANCE {
                return Err(Error::contract(format!("calibration column {j} sums to {s}")));
            }
        }
        Ok(CalibrationMatrix { n_qubits, entries })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        let dim = 1 << n_qubits;
        CalibrationMatrix::new(n_qubits, DMatrix::identity(dim, dim))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn entry(&self, read: usize, prepared: usize) -> f64 {
        self.entries[(read, prepared)]
    }

    pub fn mean_diagonal(&self) -> f64 {
        self.entries.diagonal().mean()
    }

    /// `Lambda p`.
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(Error::contract("distribution length does not match calibration"));
        }
        Ok((&self.entries * DVector::from_column_slice(p)).iter().copied().collect())
    }

    /// Ratio of extreme singular values.
    pub fn condition_number(&self) -> f64 {
        let sv = self.entries.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Detector matrix of the sub-register `qubits` (1-based, in readout
    /// order), averaging over unmeasured prepared bits and summing over
    /// unmeasured read bits.
    pub fn marginal(&self, qubits: &[usize]) -> Result<CalibrationMatrix> {
        let n = self.n_qubits;
        if qubits.is_empty() || qubits.iter().any(|&q| q == 0 || q > n) {
            return Err(Error::contract(format!("invalid marginal qubits {qubits:?}")));
        }
        if qubits.iter().copied().eq(1..=n) {
            return Ok(self.clone());
        }
        let k = qubits.len();
        let project = |i: usize| {
            qubits
                .iter()
                .fold(0usize, |acc, &q| (acc << 1) | ((i >> (n - q)) & 1))
        };
        let dim = 1 << k;
        let mut m = DMatrix::zeros(dim, dim);
        let weight = 1.0 / (1usize << (n - k)) as f64;
        for j in 0..self.dim() {
            let pj = project(j);
            for i in 0..self.dim() {
                m[(project(i), pj)] += weight * self.entries[(i, j)];
            }
        }
        CalibrationMatrix::new(k, m)
    }

    pub fn to_record(&self) -> CalibrationRecord {
        let dim = self.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(self.entries[(i, j)]);
            }
        }
        CalibrationRecord {
            n_qubits: self.n_qubits,
            entries,
        }
    }

    pub fn from_record(record: &CalibrationRecord) -> Result<Self> {
        let dim = 1usize << record.n_qubits.min(crate::statevector::MAX_QUBITS);
        if record.entries.len() != dim * dim {
            return Err(Error::contract(format!(
                "calibration record has {} entries, expected {}",
                record.entries.len(),
                dim * dim
            )));
        }
        CalibrationMatrix::new(
            record.n_qubits,
            DMatrix::from_row_slice(dim, dim, &record.entries),
        )
    }
}

/// Possibly negative weights over bit strings.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    width: usize,
    values: Vec<f64>,
}

impl QuasiDistribution {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, bits: &str) -> Option<f64> {
        crate::statevector::parse_bits(bits)
            .filter(|_| bits.len() == self.width)
            .map(|o| self.values[o])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn signed_sum(&self, sign: impl Fn(usize) -> f64) -> f64 {
        self.values.iter().enumerate().map(|(o, v)| sign(o) * v).sum()
    }

    pub fn labelled(&self) -> Vec<(String, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(o, &v)| (format_bits(o, self.width), v))
            .collect()
    }
}

/// Prepares each basis state with X gates on its 1-bits, measures every
/// qubit and records the outcome frequencies as the matching column.
pub fn estimate_calibration_matrix(
    backend: &dyn ExecutionBackend,
    n_qubits: usize,
    shots_per_state: u64,
    ctx: &ExecContext<'_>,
    seed: u64,
) -> Result<CalibrationMatrix> {
    if shots_per_state == 0 {
        return Err(Error::contract("shots per state must be at least 1"));
    }
    let dim = 1usize << n_qubits;
    let mut entries = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut circuit = Circuit::new(n_qubits);
        for q in 1..=n_qubits {
            if (j >> (n_qubits - q)) & 1 == 1 {
                circuit = circuit.push(Gate::PauliX(q));
            }
        }
        let mut rng = rng_from_seed(derive_seed(seed, &[j as u64]));
        let hist = backend
            .execute(&circuit, shots_per_state, ctx, &mut rng)
            .map_err(|e| e.in_context(format!("calibration state {}", format_bits(j, n_qubits))))?;
        for (i, f) in hist.frequencies().into_iter().enumerate() {
            entries[(i, j)] = f;
        }
    }
    CalibrationMatrix::new(n_qubits, entries)
}

/// Solves `Lambda x = p_exp` for a histogram over all qubits of `cal`.
pub fn mitigate_histogram(cal: &CalibrationMatrix, hist: &ShotHistogram) -> Result<QuasiDistribution> {
    mitigate_histogram_with(cal, hist, DEFAULT_MAX_CONDITION)
}

pub fn mitigate_histogram_with(
    cal: &CalibrationMatrix,
    hist: &ShotHistogram,
    max_condition: f64,
) -> Result<QuasiDistribution> {
    if cal.n_qubits() != hist.width() {
        return Err(Error::contract(format!(
            "{}-qubit calibration applied to a {}-bit histogram",
            cal.n_qubits(),
            hist.width()
        )));
    }
    if hist.total_shots() == 0 {
        return Err(Error::contract("empty histogram"));
    }
    let condition = cal.condition_number();
    if !(condition <= max_condition) {
        return Err(Error::Mitigation {
            message: "calibration matrix singular or ill-conditioned".into(),
            condition,
        });
    }
    let p_exp = DVector::from_vec(hist.frequencies());
    let x = cal
        .entries()
        .clone()
        .lu()
        .solve(&p_exp)
        .ok_or(Error::Mitigation {
            message: "linear solve failed".into(),
            condition,
        })?;
    Ok(QuasiDistribution {
        width: hist.width(),
        values: x.iter().copied().collect(),
    })
}

/// Mitigated signed sum for a histogram over any subset of the calibrated
/// register; the calibration is marginalized onto the measured qubits.
pub fn mitigated_expectation(
    cal: &CalibrationMatrix,
    hist: &ShotHistogram,
    sign: impl Fn(usize) -> f64,
) -> Result<f64> {
    let marginal = cal.marginal(hist.measured_qubits())?;
    Ok(mitigate_histogram(&marginal, hist)?.signed_sum(sign))
}

/// Parity-signed mitigated expectation of a Pauli-string histogram.
pub fn mitigated_parity_expectation(cal: &CalibrationMatrix, hist: &ShotHistogram) -> Result<f64> {
    mitigated_expectation(cal, hist, parity_sign)
}

/// Uniform bit-flip probability from the mean diagonal, `(1 - mean diag) / n`.
pub fn estimate_bitflip_p(cal: &CalibrationMatrix) -> f64 {
    (1.0 - cal.mean_diagonal()) / cal.n_qubits() as f64
}

#[derive(Debug, Clone, Copy)]
pub struct MitigationOptions {
    pub max_condition: f64,
    /// Shots per basis state when a calibration has to be measured.
    pub calibration_shots: u64,
    pub seed: u64,
}

impl Default for MitigationOptions {
    fn default() -> Self {
        MitigationOptions {
            max_condition: DEFAULT_MAX_CONDITION,
            calibration_shots: crate::harness::DEFAULT_SHOTS,
            seed: 0,
        }
    }
}

fn measure_calibration(
    backend: Option<&dyn ExecutionBackend>,
    series: &TimeSeries,
    packet: &Packet,
    time: f64,
    options: &MitigationOptions,
) -> Result<CalibrationMatrix> {
    let backend = backend.ok_or_else(|| Error::Mitigation {
        message: format!(
            "packet {} carries no calibration and no backend is available",
            packet.packet_index
        ),
        condition: f64::NAN,
    })?;
    let ctx = ExecContext {
        time,
        packet_index: packet.packet_index,
        register: &series.register,
    };
    let seed = derive_seed(options.seed, &[packet.packet_index as u64]);
    estimate_calibration_matrix(
        backend,
        series.hamiltonian.n_qubits(),
        options.calibration_shots,
        &ctx,
        seed,
    )
}

/// Re-derives every energy of `series` from mitigated expectations.
///
/// Static mode applies one matrix from the job start (the first packet's
/// stored calibration, else measured on `backend` at time 0) to all packets.
/// Dynamic mode uses each packet's own calibration, measuring it at the
/// packet timestamp when absent.
pub fn mitigate_timeseries(
    series: &TimeSeries,
    mode: MitigationMode,
    backend: Option<&dyn ExecutionBackend>,
    options: &MitigationOptions,
) -> Result<TimeSeries> {
    let first = series
        .packets
        .first()
        .ok_or_else(|| Error::contract("cannot mitigate an empty time series"))?;
    let static_cal = match mode {
        MitigationMode::None => {
            return Err(Error::contract("mitigation mode must be static or dynamic"))
        }
        MitigationMode::Static => Some(match &first.calibration {
            Some(c) => c.clone(),
            None => measure_calibration(backend, series, first, 0.0, options)?,
        }),
        MitigationMode::Dynamic => None,
    };

    let mut packets = Vec::with_capacity(series.packets.len());
    for packet in &series.packets {
        let cal = match &static_cal {
            Some(c) => c.clone(),
            None => match &packet.calibration {
                Some(c) => c.clone(),
                None => measure_calibration(backend, series, packet, packet.timestamp_min, options)?,
            },
        };
        let mut out = packet.clone();
        if mode == MitigationMode::Dynamic {
            out.calibration = Some(cal.clone());
        }
        for realization in &mut out.realizations {
            for exp in &mut realization.experiments {
                let hist = exp.histogram.as_ref().ok_or_else(|| Error::Mitigation {
                    message: format!(
                        "packet {} lacks the histogram of {}",
                        packet.packet_index, exp.pauli
                    ),
                    condition: f64::NAN,
                })?;
                let marginal = cal.marginal(hist.measured_qubits())?;
                exp.expectation = mitigate_histogram_with(&marginal, hist, options.max_condition)?
                    .signed_sum(parity_sign);
            }
            realization.energy = realization.recompute_energy(&series.hamiltonian)?;
        }
        packets.push(out);
    }
    Ok(TimeSeries {
        packets,
        mitigation_mode: mode,
        ..series.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::IdealBackend;
    use crate::noise::{true_confusion_matrix, ReadoutNoise};

    fn reg() -> [u32; 3] {
        [1, 2, 3]
    }

    #[test]
    fn ideal_backend_gives_identity() {
        let r = reg();
        let ctx = ExecContext { time: 0.0, packet_index: 0, register: &r };
        let cal = estimate_calibration_matrix(&IdealBackend::new(3), 3, 64, &ctx, 1).unwrap();
        assert_eq!(cal, CalibrationMatrix::identity(3).unwrap());
        assert_eq!(estimate_bitflip_p(&cal), 0.0);
    }

    #[test]
    fn identity_mitigation_returns_frequencies() {
        let h = ShotHistogram::from_counts(vec![1, 2], [("00", 3), ("01", 1), ("11", 4)]).unwrap();
        let q = mitigate_histogram(&CalibrationMatrix::identity(2).unwrap(), &h).unwrap();
        assert_eq!(q.values(), &h.frequencies()[..]);
        let e = mitigated_parity_expectation(&CalibrationMatrix::identity(3).unwrap(), &h).unwrap();
        assert!((e - h.parity_expectation()).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_refused() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let cal = CalibrationMatrix::new(1, m).unwrap();
        let h = ShotHistogram::from_counts(vec![1], [("0", 1)]).unwrap();
        match mitigate_histogram(&cal, &h) {
            Err(Error::Mitigation { condition, .. }) => assert!(condition > 1e6),
            other => panic!("expected mitigation error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_contract_violation() {
        let h = ShotHistogram::from_counts(vec![1, 2], [("00", 1)]).unwrap();
        let cal = CalibrationMatrix::identity(3).unwrap();
        assert!(matches!(mitigate_histogram(&cal, &h), Err(Error::Contract(_))));
    }

    #[test]
    fn marginal_of_product_is_product_of_factors() {
        let r = ReadoutNoise { flip: vec![0.01, 0.03, 0.07], flip_one_to_zero: None };
        let full = true_confusion_matrix(&r, 3).unwrap();
        let m = full.marginal(&[3, 1]).unwrap();
        let want = true_confusion_matrix(&ReadoutNoise { flip: vec![0.07, 0.01], flip_one_to_zero: None }, 2).unwrap();
        assert!((m.entries() - want.entries()).amax() < 1e-15);
    }

    #[test]
    fn bitflip_estimate_for_uniform_model() {
        let p: f64 = 0.011;
        let cal = true_confusion_matrix(&ReadoutNoise::uniform(p, 3), 3).unwrap();
        let oracle = (1.0 - (1.0 - p).powi(3)) / 3.0;
        assert!((estimate_bitflip_p(&cal) - oracle).abs() < 1e-15);
        assert!((estimate_bitflip_p(&cal) - p).abs() < 4e-4);
    }

    #[test]
    fn record_round_trip_and_validation() {
        let cal = true_confusion_matrix(&ReadoutNoise::uniform(0.02, 2), 2).unwrap();
        assert_eq!(CalibrationMatrix::from_record(&cal.to_record()).unwrap(), cal);
        let bad = CalibrationRecord { n_qubits: 1, entries: vec![0.9, 0.2, 0.2, 0.9] };
        assert!(CalibrationMatrix::from_record(&bad).is_err());
        let short = CalibrationRecord { n_qubits: 2, entries: vec![1.0; 3] };
        assert!(CalibrationMatrix::from_record(&short).is_err());
    }
}
