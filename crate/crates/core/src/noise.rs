//! Noisy-device emulation.
//!
//! Gate noise is sampled as stochastic Pauli trajectories: after each gate, with
//! the gate's error probability, a uniformly random non-identity Pauli acts on
//! its qubits. Readout noise flips each measured bit independently. A
//! [`TemporalScenario`] varies the true noise over time and may stretch or
//! freeze the device, while the [`DeviceSnapshot`] it reports stays at the
//! nominal baseline.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{Capabilities, ExecContext, ExecutionBackend};
use crate::mitigation::CalibrationMatrix;
use crate::rng::SimRng;
use crate::statevector::{run_circuit, Circuit, Gate, OutcomeSampler, ShotHistogram, StateVector};

/// Per-qubit bit-flip probabilities of the detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutNoise {
    /// Probability that a measured bit is reported flipped (0 -> 1, and 1 -> 0
    /// unless `flip_one_to_zero` is given).
    pub flip: Vec<f64>,
    /// Optional separate 1 -> 0 probabilities for asymmetric detectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip_one_to_zero: Option<Vec<f64>>,
}

impl ReadoutNoise {
    pub fn uniform(p: f64, n_qubits: usize) -> Self {
        ReadoutNoise {
            flip: vec![p; n_qubits],
            flip_one_to_zero: None,
        }
    }

    pub fn ideal(n_qubits: usize) -> Self {
        Self::uniform(0.0, n_qubits)
    }

    pub fn n_qubits(&self) -> usize {
        self.flip.len()
    }

    /// Probability that qubit `q` (1-based) reads the wrong value given the true bit.
    pub fn flip_probability(&self, q: usize, bit: usize) -> f64 {
        match (&self.flip_one_to_zero, bit) {
            (Some(down), 1) => down[q - 1],
            _ => self.flip[q - 1],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.flip.iter().all(|&p| p == 0.0)
            && self
                .flip_one_to_zero
                .as_ref()
                .is_none_or(|d| d.iter().all(|&p| p == 0.0))
    }

    fn map(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        ReadoutNoise {
            flip: self.flip.iter().enumerate().map(|(k, &p)| f(k, p)).collect(),
            flip_one_to_zero: self
                .flip_one_to_zero
                .as_ref()
                .map(|d| d.iter().enumerate().map(|(k, &p)| f(k, p)).collect()),
        }
    }

    fn validate(&self) -> Result<()> {
        let all = self.flip.iter().chain(self.flip_one_to_zero.iter().flatten());
        for &p in all {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("flip probability {p} outside [0, 1]")));
            }
        }
        if let Some(d) = &self.flip_one_to_zero {
            if d.len() != self.flip.len() {
                return Err(Error::config("flip_one_to_zero length differs from flip"));
            }
        }
        Ok(())
    }
}

/// Depolarizing error probabilities per gate class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateNoise {
    pub one_qubit: f64,
    pub two_qubit: f64,
}

impl GateNoise {
    pub const IDEAL: GateNoise = GateNoise {
        one_qubit: 0.0,
        two_qubit: 0.0,
    };

    pub fn for_gate(&self, gate: &Gate) -> f64 {
        if gate.is_two_qubit() {
            self.two_qubit
        } else {
            self.one_qubit
        }
    }

    pub fn is_zero(&self) -> bool {
        self.one_qubit == 0.0 && self.two_qubit == 0.0
    }

    fn validate(&self) -> Result<()> {
        for p in [self.one_qubit, self.two_qubit] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("gate error {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseChannel {
    Readout,
    Gate,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillation {
    pub amplitude_fraction: f64,
    pub period_minutes: f64,
    #[serde(default)]
    pub phase_radians: f64,
    pub applies_to: NoiseChannel,
}

impl Oscillation {
    /// Multiplicative factor `1 + a sin(2 pi t / T + phi)`.
    pub fn factor(&self, time: f64) -> f64 {
        1.0 + self.amplitude_fraction * (TAU * time / self.period_minutes + self.phase_radians).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutlierEvent {
    pub packet_index: usize,
    pub extra_flip: f64,
    /// Physical qubit labels hit by the event; absent means every qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayEvent {
    /// The gap after this packet is stretched.
    pub packet_index: usize,
    pub extra_delay_minutes: f64,
}

/// Error figures the device interface claims, when they differ from the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedErrors {
    pub readout: Vec<f64>,
    pub one_qubit: f64,
    pub two_qubit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub readout: ReadoutNoise,
    pub gate: GateNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalScenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub baseline: Baseline,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported: Option<ReportedErrors>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<Oscillation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outliers: Vec<OutlierEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delays: Vec<DelayEvent>,
    #[serde(default)]
    pub constant_fault: bool,
}

impl TemporalScenario {
    /// Time-independent scenario with the given baseline.
    pub fn stationary(readout: ReadoutNoise, gate: GateNoise) -> Self {
        TemporalScenario {
            name: String::new(),
            description: String::new(),
            baseline: Baseline { readout, gate },
            reported: None,
            oscillation: None,
            outliers: Vec::new(),
            delays: Vec::new(),
            constant_fault: false,
        }
    }

    pub fn ideal(n_qubits: usize) -> Self {
        Self::stationary(ReadoutNoise::ideal(n_qubits), GateNoise::IDEAL)
    }

    pub fn n_qubits(&self) -> usize {
        self.baseline.readout.n_qubits()
    }

    pub fn validate(&self) -> Result<()> {
        self.baseline.readout.validate()?;
        self.baseline.gate.validate()?;
        if let Some(osc) = &self.oscillation {
            if !(osc.period_minutes > 0.0) || !osc.period_minutes.is_finite() {
                return Err(Error::config(format!(
                    "oscillation period must be positive, got {}",
                    osc.period_minutes
                )));
            }
            if !osc.amplitude_fraction.is_finite() || !osc.phase_radians.is_finite() {
                return Err(Error::config("non-finite oscillation parameter"));
            }
        }
        for o in &self.outliers {
            if !(0.0..=1.0).contains(&o.extra_flip) {
                return Err(Error::config(format!(
                    "outlier extra flip {} outside [0, 1]",
                    o.extra_flip
                )));
            }
        }
        for d in &self.delays {
            if !(d.extra_delay_minutes >= 0.0) {
                return Err(Error::config("negative delay"));
            }
        }
        if let Some(r) = &self.reported {
            if r.readout.len() != self.n_qubits() {
                return Err(Error::config("reported readout errors do not match register size"));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: TemporalScenario =
            toml::from_str(text).map_err(|e| Error::config(format!("scenario: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// True noise at `time` for packet `packet_index`, with outliers hitting every qubit.
    pub fn effective_noise_at(&self, time: f64, packet_index: usize) -> (ReadoutNoise, GateNoise) {
        self.effective_noise_for(time, packet_index, None)
    }

    /// As [`Self::effective_noise_at`], restricting qubit-targeted outliers to
    /// the physical labels in `register`.
    pub fn effective_noise_for(
        &self,
        time: f64,
        packet_index: usize,
        register: Option<&[u32]>,
    ) -> (ReadoutNoise, GateNoise) {
        let (mut readout_scale, mut gate_scale) = (1.0, 1.0);
        if let Some(osc) = &self.oscillation {
            let f = osc.factor(time);
            match osc.applies_to {
                NoiseChannel::Readout => readout_scale = f,
                NoiseChannel::Gate => gate_scale = f,
                NoiseChannel::Both => {
                    readout_scale = f;
                    gate_scale = f;
                }
            }
        }
        let mut extra = vec![0.0; self.n_qubits()];
        for o in self.outliers.iter().filter(|o| o.packet_index == packet_index) {
            for (k, e) in extra.iter_mut().enumerate() {
                let hit = match (&o.qubits, register) {
                    (None, _) => true,
                    (Some(qs), Some(reg)) => reg.get(k).is_some_and(|label| qs.contains(label)),
                    (Some(_), None) => true,
                };
                if hit {
                    *e += o.extra_flip;
                }
            }
        }
        let readout = self
            .baseline
            .readout
            .map(|k, p| clamp_probability(p * readout_scale + extra[k], "readout flip"));
        let gate = GateNoise {
            one_qubit: clamp_probability(self.baseline.gate.one_qubit * gate_scale, "one-qubit error"),
            two_qubit: clamp_probability(self.baseline.gate.two_qubit * gate_scale, "two-qubit error"),
        };
        (readout, gate)
    }

    /// Nominal error figures at `time`; blind to oscillations and outliers.
    pub fn snapshot(&self, time: f64) -> DeviceSnapshot {
        match &self.reported {
            Some(r) => DeviceSnapshot {
                reported_readout_error: r.readout.clone(),
                reported_gate_errors: GateNoise {
                    one_qubit: r.one_qubit,
                    two_qubit: r.two_qubit,
                },
                timestamp_min: time,
            },
            None => DeviceSnapshot {
                reported_readout_error: self.baseline.readout.flip.clone(),
                reported_gate_errors: self.baseline.gate,
                timestamp_min: time,
            },
        }
    }

    /// Extra idle time inserted after packet `packet_index`.
    pub fn delay_after(&self, packet_index: usize) -> f64 {
        self.delays
            .iter()
            .filter(|d| d.packet_index == packet_index)
            .map(|d| d.extra_delay_minutes)
            .sum()
    }
}

fn clamp_probability(p: f64, what: &str) -> f64 {
    if (0.0..=1.0).contains(&p) {
        p
    } else {
        log::warn!("modulated {what} {p} clamped to [0, 1]");
        p.clamp(0.0, 1.0)
    }
}

/// Error figures reported by the device interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSnapshot {
    pub reported_readout_error: Vec<f64>,
    pub reported_gate_errors: GateNoise,
    pub timestamp_min: f64,
}

impl DeviceSnapshot {
    pub fn ideal(n_qubits: usize, time: f64) -> Self {
        DeviceSnapshot {
            reported_readout_error: vec![0.0; n_qubits],
            reported_gate_errors: GateNoise::IDEAL,
            timestamp_min: time,
        }
    }
}

/// Exact detector matrix of independent per-qubit flips:
/// `Lambda[i][j] = prod_q P(read bit i_q | prepared bit j_q)`.
pub fn true_confusion_matrix(readout: &ReadoutNoise, n_qubits: usize) -> Result<CalibrationMatrix> {
    if readout.n_qubits() < n_qubits {
        return Err(Error::contract(format!(
            "readout model covers {} qubits, {n_qubits} requested",
            readout.n_qubits()
        )));
    }
    let dim = 1 << n_qubits;
    let entries = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        (1..=n_qubits)
            .map(|q| {
                let shift = n_qubits - q;
                let (read, prepared) = ((i >> shift) & 1, (j >> shift) & 1);
                let p = readout.flip_probability(q, prepared);
                if read == prepared {
                    1.0 - p
                } else {
                    p
                }
            })
            .product()
    });
    CalibrationMatrix::new(n_qubits, entries)
}

const ONE_QUBIT_PAULIS: [fn(usize) -> Gate; 3] = [Gate::PauliX, Gate::PauliY, Gate::PauliZ];

fn pauli_gate(index: usize, qubit: usize) -> Option<Gate> {
    match index {
        0 => None,
        k => Some(ONE_QUBIT_PAULIS[k - 1](qubit)),
    }
}

/// Applies a uniformly random non-identity Pauli on the gate's qubits.
fn insert_random_pauli(state: &mut StateVector, gate: &Gate, rng: &mut SimRng) -> Result<()> {
    let qubits = gate.qubits();
    let choices = (1usize << (2 * qubits.len())) - 1;
    let mut code = rng.random_range(1..=choices);
    for &q in qubits.iter().rev() {
        if let Some(p) = pauli_gate(code & 3, q) {
            state.apply(&p)?;
        }
        code >>= 2;
    }
    Ok(())
}

/// Trajectory-sampled execution of `circuit` under fixed noise.
///
/// With zero gate noise and zero readout noise the draw sequence is identical
/// to [`crate::statevector::sample_shots_with`].
pub fn noisy_execute(
    circuit: &Circuit,
    shots: u64,
    readout: &ReadoutNoise,
    gate_noise: &GateNoise,
    rng: &mut SimRng,
) -> Result<ShotHistogram> {
    circuit.validate()?;
    if shots == 0 {
        return Err(Error::contract("shots must be at least 1"));
    }
    if readout.n_qubits() < circuit.n_qubits {
        return Err(Error::contract("readout model smaller than the circuit register"));
    }
    let measured = &circuit.measured_qubits;
    let ideal = run_circuit(circuit)?;
    let ideal_sampler = OutcomeSampler::new(&ideal.probabilities(measured)?);
    let gate_probs: Vec<f64> = circuit.gates.iter().map(|g| gate_noise.for_gate(g)).collect();
    let noisy_gates = !gate_noise.is_zero();
    let noisy_readout = !readout.is_zero();
    let width = measured.len();

    let mut hist = ShotHistogram::empty(measured.clone());
    let mut faults: Vec<usize> = Vec::new();
    for _ in 0..shots {
        let mut outcome = if noisy_gates {
            faults.clear();
            for (k, &p) in gate_probs.iter().enumerate() {
                if p > 0.0 && rng.random::<f64>() < p {
                    faults.push(k);
                }
            }
            if faults.is_empty() {
                ideal_sampler.draw(rng)
            } else {
                let mut state = StateVector::zero(circuit.n_qubits)?;
                let mut next = faults.iter().peekable();
                for (k, gate) in circuit.gates.iter().enumerate() {
                    state.apply(gate)?;
                    if next.peek() == Some(&&k) {
                        next.next();
                        insert_random_pauli(&mut state, gate, rng)?;
                    }
                }
                OutcomeSampler::new(&state.probabilities(measured)?).draw(rng)
            }
        } else {
            ideal_sampler.draw(rng)
        };
        if noisy_readout {
            for (pos, &q) in measured.iter().enumerate() {
                let bit_mask = 1 << (width - 1 - pos);
                let bit = usize::from(outcome & bit_mask != 0);
                let p = readout.flip_probability(q, bit);
                if p > 0.0 && rng.random::<f64>() < p {
                    outcome ^= bit_mask;
                }
            }
        }
        hist.record(outcome, 1);
    }
    Ok(hist)
}

/// Execution backend emulating a noisy device driven by a [`TemporalScenario`].
#[derive(Debug, Clone)]
pub struct EmulatedBackend {
    scenario: TemporalScenario,
    frozen: Arc<Mutex<HashMap<String, ShotHistogram>>>,
}

impl EmulatedBackend {
    pub fn new(scenario: TemporalScenario) -> Result<Self> {
        scenario.validate()?;
        Ok(EmulatedBackend {
            scenario,
            frozen: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn scenario(&self) -> &TemporalScenario {
        &self.scenario
    }
}

impl ExecutionBackend for EmulatedBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            n_qubits: self.scenario.n_qubits(),
            supports_time: true,
        }
    }

    fn execute(
        &self,
        circuit: &Circuit,
        shots: u64,
        ctx: &ExecContext<'_>,
        rng: &mut SimRng,
    ) -> Result<ShotHistogram> {
        if self.scenario.constant_fault {
            let key = format!("{}#{shots}", circuit.key());
            let mut frozen = self.frozen.lock().unwrap_or_else(|e| e.into_inner());
            if let Some(h) = frozen.get(&key) {
                return Ok(h.clone());
            }
            let (readout, gate) =
                self.scenario
                    .effective_noise_for(ctx.time, ctx.packet_index, Some(ctx.register));
            let h = noisy_execute(circuit, shots, &readout, &gate, rng)?;
            frozen.insert(key, h.clone());
            return Ok(h);
        }
        let (readout, gate) =
            self.scenario
                .effective_noise_for(ctx.time, ctx.packet_index, Some(ctx.register));
        noisy_execute(circuit, shots, &readout, &gate, rng)
    }

    fn snapshot(&self, time: f64) -> DeviceSnapshot {
        self.scenario.snapshot(time)
    }

    fn delay_after(&self, packet_index: usize) -> f64 {
        self.scenario.delay_after(packet_index)
    }
}
