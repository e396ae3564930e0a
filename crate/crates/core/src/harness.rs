//! Benchmark protocol, from single experiments up to whole jobs.
//!
//! One experiment estimates one Pauli string from a shot histogram, one
//! realization sums all strings of the Hamiltonian into an energy sample, a
//! packet groups consecutive realizations under one timestamp and device
//! snapshot, and a job produces one time series per qubit register against a
//! simulated clock.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{experiment_circuit, PauliHamiltonian, PauliTerm};
use crate::mitigation::{estimate_calibration_matrix, CalibrationMatrix};
use crate::noise::DeviceSnapshot;
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::statevector::{run_circuit, sample_shots_with, Circuit, ShotHistogram};

/// Default shots per experiment.
pub const DEFAULT_SHOTS: u64 = 1024;
/// Default realizations per packet.
pub const DEFAULT_PACKET_SIZE: usize = 50;
/// Simulated minutes per packet: a 7.5 h job yielding 31 packets.
pub const DEFAULT_MINUTES_PER_PACKET: f64 = 7.5 * 60.0 / 31.0;

/// Stream tag separating calibration draws from experiment draws.
const CALIBRATION_STREAM: u64 = 0xCA11_B8A7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub n_qubits: usize,
    pub supports_time: bool,
}

/// Where and when an execution happens.
#[derive(Debug, Clone, Copy)]
pub struct ExecContext<'a> {
    /// Minutes since job start.
    pub time: f64,
    pub packet_index: usize,
    /// Physical qubit labels of the register, position `k` is circuit qubit `k + 1`.
    pub register: &'a [u32],
}

pub trait ExecutionBackend: Send + Sync {
    fn capabilities(&self) -> Capabilities;

    /// Runs `circuit` for `shots` shots. Deterministic for a fixed `rng` state.
    fn execute(
        &self,
        circuit: &Circuit,
        shots: u64,
        ctx: &ExecContext<'_>,
        rng: &mut SimRng,
    ) -> Result<ShotHistogram>;

    /// Error figures the device reports at `time`.
    fn snapshot(&self, time: f64) -> DeviceSnapshot;

    /// Extra minutes of idle time after packet `packet_index`.
    fn delay_after(&self, _packet_index: usize) -> f64 {
        0.0
    }
}

/// Noise-free sampling of the exact state, the reference platform.
#[derive(Debug, Clone, Copy)]
pub struct IdealBackend {
    pub n_qubits: usize,
}

impl IdealBackend {
    pub fn new(n_qubits: usize) -> Self {
        IdealBackend { n_qubits }
    }
}

impl ExecutionBackend for IdealBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            n_qubits: self.n_qubits,
            supports_time: false,
        }
    }

    fn execute(
        &self,
        circuit: &Circuit,
        shots: u64,
        _ctx: &ExecContext<'_>,
        rng: &mut SimRng,
    ) -> Result<ShotHistogram> {
        let state = run_circuit(circuit)?;
        sample_shots_with(&state, &circuit.measured_qubits, shots, rng)
    }

    fn snapshot(&self, time: f64) -> DeviceSnapshot {
        DeviceSnapshot::ideal(self.n_qubits, time)
    }
}

/// One Pauli-string estimate inside a realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    /// Letter string of the measured term.
    pub pauli: String,
    pub expectation: f64,
    pub histogram: Option<ShotHistogram>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Energy in units of the hopping amplitude.
    pub energy: f64,
    pub timestamp_min: f64,
    /// In Hamiltonian term order.
    pub experiments: Vec<Experiment>,
}

impl Realization {
    pub fn per_term_expectations(&self) -> BTreeMap<String, f64> {
        self.experiments
            .iter()
            .map(|e| (e.pauli.clone(), e.expectation))
            .collect()
    }

    /// `sum_k c_k <P_k>` recomputed from the stored expectations.
    pub fn recompute_energy(&self, hamiltonian: &PauliHamiltonian) -> Result<f64> {
        hamiltonian.terms().iter().try_fold(0.0, |acc, term| {
            let label = term.label();
            let e = self
                .experiments
                .iter()
                .find(|e| e.pauli == label)
                .ok_or_else(|| Error::contract(format!("realization lacks term {label}")))?;
            Ok(acc + term.coefficient * e.expectation)
        })
    }

    /// Same outcome data, ignoring the timestamp.
    pub fn same_outcome(&self, other: &Realization) -> bool {
        self.energy.to_bits() == other.energy.to_bits() && self.experiments == other.experiments
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub packet_index: usize,
    pub timestamp_min: f64,
    pub snapshot: DeviceSnapshot,
    pub calibration: Option<CalibrationMatrix>,
    pub realizations: Vec<Realization>,
}

impl Packet {
    pub fn energies(&self) -> Vec<f64> {
        self.realizations.iter().map(|r| r.energy).collect()
    }

    pub fn mean_energy(&self) -> f64 {
        let n = self.realizations.len().max(1) as f64;
        self.realizations.iter().map(|r| r.energy).sum::<f64>() / n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MitigationMode {
    #[default]
    None,
    Static,
    Dynamic,
}

impl std::fmt::Display for MitigationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MitigationMode::None => "none",
            MitigationMode::Static => "static",
            MitigationMode::Dynamic => "dynamic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub job_id: String,
    /// ISO-8601 wall-clock time of the job start; packet times are relative to it.
    pub anchor: String,
    pub register: Vec<u32>,
    pub hamiltonian: PauliHamiltonian,
    pub mitigation_mode: MitigationMode,
    pub packets: Vec<Packet>,
}

impl TimeSeries {
    pub fn realizations(&self) -> impl Iterator<Item = &Realization> {
        self.packets.iter().flat_map(|p| p.realizations.iter())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.realizations().map(|r| r.energy).collect()
    }

    pub fn packet_means(&self) -> Vec<f64> {
        self.packets.iter().map(Packet::mean_energy).collect()
    }

    pub fn packet_times(&self) -> Vec<f64> {
        self.packets.iter().map(|p| p.timestamp_min).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.packets.windows(2) {
            if w[1].timestamp_min <= w[0].timestamp_min {
                return Err(Error::contract(format!(
                    "packet timestamps not strictly increasing at packet {}",
                    w[1].packet_index
                )));
            }
        }
        Ok(())
    }
}

/// Runs `prep` followed by the rotation for `term` and returns the
/// parity-signed expectation with its histogram.
pub fn run_experiment(
    backend: &dyn ExecutionBackend,
    term: &PauliTerm,
    prep: &Circuit,
    shots: u64,
    ctx: &ExecContext<'_>,
    rng: &mut SimRng,
) -> Result<(f64, ShotHistogram)> {
    if shots == 0 {
        return Err(Error::contract("shots must be at least 1"));
    }
    let circuit = experiment_circuit(prep, term)?;
    let histogram = backend
        .execute(&circuit, shots, ctx, rng)
        .map_err(|e| e.in_context(format!("experiment {term} at t={:.3} min", ctx.time)))?;
    Ok((histogram.parity_expectation(), histogram))
}

/// One energy sample: an experiment per Hamiltonian term, each on its own
/// stream derived from `seed`.
pub fn run_realization(
    backend: &dyn ExecutionBackend,
    hamiltonian: &PauliHamiltonian,
    prep: &Circuit,
    shots: u64,
    ctx: &ExecContext<'_>,
    seed: u64,
) -> Result<Realization> {
    let caps = backend.capabilities();
    if hamiltonian.n_qubits() > caps.n_qubits {
        return Err(Error::config(format!(
            "Hamiltonian on {} qubits exceeds backend capacity {}",
            hamiltonian.n_qubits(),
            caps.n_qubits
        )));
    }
    let mut energy = 0.0;
    let mut experiments = Vec::with_capacity(hamiltonian.terms().len());
    for (k, term) in hamiltonian.terms().iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(seed, &[k as u64]));
        let (expectation, histogram) = run_experiment(backend, term, prep, shots, ctx, &mut rng)?;
        energy += term.coefficient * expectation;
        experiments.push(Experiment {
            pauli: term.label(),
            expectation,
            histogram: Some(histogram),
        });
    }
    Ok(Realization {
        energy,
        timestamp_min: ctx.time,
        experiments,
    })
}

/// When detector matrices are measured during a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationSchedule {
    #[default]
    None,
    /// Once, before the first packet of each series.
    JobStart,
    /// Before every packet.
    EveryPacket,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobPlan {
    pub job_id: String,
    pub anchor: String,
    pub registers: Vec<Vec<u32>>,
    pub packets_per_register: usize,
    pub shots: u64,
    pub packet_size: usize,
    pub minutes_per_packet: f64,
    /// Interleave registers packet by packet instead of running them back to back.
    pub rotation: bool,
    pub calibration: CalibrationSchedule,
    pub calibration_shots: u64,
    pub seed: u64,
}

impl Default for JobPlan {
    fn default() -> Self {
        JobPlan {
            job_id: "job".into(),
            anchor: "1970-01-01T00:00:00Z".into(),
            registers: vec![vec![1, 2, 3]],
            packets_per_register: 31,
            shots: DEFAULT_SHOTS,
            packet_size: DEFAULT_PACKET_SIZE,
            minutes_per_packet: DEFAULT_MINUTES_PER_PACKET,
            rotation: true,
            calibration: CalibrationSchedule::None,
            calibration_shots: DEFAULT_SHOTS,
            seed: 0,
        }
    }
}

impl JobPlan {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.registers.is_empty() {
            return Err(Error::config("a job needs at least one register"));
        }
        for r in &self.registers {
            if r.len() != n_qubits {
                return Err(Error::config(format!(
                    "register {r:?} has {} qubits, the Hamiltonian needs {n_qubits}",
                    r.len()
                )));
            }
        }
        if self.shots == 0 || self.packet_size == 0 || self.calibration_shots == 0 {
            return Err(Error::config("shots, packet size and calibration shots must be positive"));
        }
        if !(self.minutes_per_packet > 0.0) {
            return Err(Error::config("minutes per packet must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscardedPacket {
    pub register: Vec<u32>,
    pub packet_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct JobOutput {
    pub series: Vec<TimeSeries>,
    pub discarded: Vec<DiscardedPacket>,
}

/// Runs a whole job against `backend` with a simulated clock.
///
/// The clock advances by `minutes_per_packet` per packet, plus the backend's
/// scheduled delays (once per round under rotation), plus the cost of any
/// calibration circuits. A failing realization discards its packet and the
/// job continues.
pub fn run_job(
    backend: &dyn ExecutionBackend,
    hamiltonian: &PauliHamiltonian,
    prep: &Circuit,
    plan: &JobPlan,
) -> Result<JobOutput> {
    run_job_streaming(backend, hamiltonian, prep, plan, &mut |_, _| Ok(()))
}

/// [`run_job`] that hands each completed packet to `sink` together with the
/// index of its register. A sink error aborts the job.
pub fn run_job_streaming(
    backend: &dyn ExecutionBackend,
    hamiltonian: &PauliHamiltonian,
    prep: &Circuit,
    plan: &JobPlan,
    sink: &mut dyn FnMut(usize, &Packet) -> Result<()>,
) -> Result<JobOutput> {
    let n = hamiltonian.n_qubits();
    plan.validate(n)?;
    if prep.n_qubits != n {
        return Err(Error::config("preparation circuit and Hamiltonian sizes differ"));
    }
    if backend.capabilities().n_qubits < n {
        return Err(Error::config("backend register too small for the Hamiltonian"));
    }

    let n_terms = hamiltonian.terms().len() as f64;
    let minutes_per_circuit = plan.minutes_per_packet / (plan.packet_size as f64 * n_terms);
    let calibration_cost = (1usize << n) as f64 * minutes_per_circuit
        * (plan.calibration_shots as f64 / plan.shots as f64);

    let mut series: Vec<TimeSeries> = plan
        .registers
        .iter()
        .map(|r| TimeSeries {
            job_id: plan.job_id.clone(),
            anchor: plan.anchor.clone(),
            register: r.clone(),
            hamiltonian: hamiltonian.clone(),
            mitigation_mode: MitigationMode::None,
            packets: Vec::new(),
        })
        .collect();
    let mut discarded = Vec::new();

    let order: Vec<(usize, usize)> = if plan.rotation {
        (0..plan.packets_per_register)
            .flat_map(|k| (0..plan.registers.len()).map(move |r| (r, k)))
            .collect()
    } else {
        (0..plan.registers.len())
            .flat_map(|r| (0..plan.packets_per_register).map(move |k| (r, k)))
            .collect()
    };

    let mut clock = 0.0;
    for (reg_idx, packet_index) in order {
        let register = &plan.registers[reg_idx];
        let calibrate = match plan.calibration {
            CalibrationSchedule::None => false,
            CalibrationSchedule::JobStart => packet_index == 0,
            CalibrationSchedule::EveryPacket => true,
        };
        let outcome = run_packet(
            backend,
            hamiltonian,
            prep,
            plan,
            PacketSlot {
                register,
                register_index: reg_idx,
                packet_index,
                start: clock,
                calibrate,
                calibration_cost,
            },
        );
        match outcome {
            Ok(packet) => {
                sink(reg_idx, &packet)?;
                series[reg_idx].packets.push(packet);
            }
            Err(e) => {
                log::warn!("discarding packet {packet_index} of register {register:?}: {e}");
                discarded.push(DiscardedPacket {
                    register: register.clone(),
                    packet_index,
                    reason: e.to_string(),
                });
            }
        }
        if calibrate {
            clock += calibration_cost;
        }
        clock += plan.minutes_per_packet;
        // Under rotation, registers sharing a packet index form one round and pause once.
        if !plan.rotation || reg_idx + 1 == plan.registers.len() {
            clock += backend.delay_after(packet_index);
        }
    }
    Ok(JobOutput { series, discarded })
}

struct PacketSlot<'a> {
    register: &'a [u32],
    register_index: usize,
    packet_index: usize,
    start: f64,
    calibrate: bool,
    calibration_cost: f64,
}

fn run_packet(
    backend: &dyn ExecutionBackend,
    hamiltonian: &PauliHamiltonian,
    prep: &Circuit,
    plan: &JobPlan,
    slot: PacketSlot<'_>,
) -> Result<Packet> {
    let n = hamiltonian.n_qubits();
    let path = [slot.register_index as u64, slot.packet_index as u64];
    let mut start = slot.start;
    let calibration = if slot.calibrate {
        let ctx = ExecContext {
            time: start,
            packet_index: slot.packet_index,
            register: slot.register,
        };
        let seed = derive_seed(plan.seed, &[path[0], path[1], CALIBRATION_STREAM]);
        let cal = estimate_calibration_matrix(backend, n, plan.calibration_shots, &ctx, seed)?;
        start += slot.calibration_cost;
        Some(cal)
    } else {
        None
    };
    let step = plan.minutes_per_packet / plan.packet_size as f64;
    let realizations = (0..plan.packet_size)
        .map(|r| {
            let ctx = ExecContext {
                time: start + r as f64 * step,
                packet_index: slot.packet_index,
                register: slot.register,
            };
            let seed = derive_seed(plan.seed, &[path[0], path[1], r as u64]);
            run_realization(backend, hamiltonian, prep, plan.shots, &ctx, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Packet {
        packet_index: slot.packet_index,
        timestamp_min: start,
        snapshot: backend.snapshot(start),
        calibration,
        realizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{fermionic_triangle, w_state_circuit};
    use crate::rng::rng_from_seed;
    use std::sync::atomic::{AtomicU64, Ordering};

    fn ctx(reg: &[u32]) -> ExecContext<'_> {
        ExecContext {
            time: 0.0,
            packet_index: 0,
            register: reg,
        }
    }

    #[test]
    fn z_on_zero_state_is_exactly_one() {
        let backend = IdealBackend::new(3);
        let term = PauliTerm::parse(1.0, "ZII").unwrap();
        for shots in [1, 7, 1024] {
            let (e, h) = run_experiment(&backend, &term, &Circuit::new(3), shots, &ctx(&[1, 2, 3]), &mut rng_from_seed(3)).unwrap();
            assert_eq!(e, 1.0);
            assert_eq!(h.total_shots(), shots);
        }
    }

    #[test]
    fn zero_shots_rejected() {
        let backend = IdealBackend::new(3);
        let term = PauliTerm::parse(1.0, "ZII").unwrap();
        assert!(run_experiment(&backend, &term, &Circuit::new(3), 0, &ctx(&[1, 2, 3]), &mut rng_from_seed(3)).is_err());
    }

    struct Counting {
        inner: IdealBackend,
        shots: AtomicU64,
        calls: AtomicU64,
    }

    impl ExecutionBackend for Counting {
        fn capabilities(&self) -> Capabilities {
            self.inner.capabilities()
        }
        fn execute(&self, c: &Circuit, shots: u64, ctx: &ExecContext<'_>, rng: &mut SimRng) -> Result<ShotHistogram> {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.shots.fetch_add(shots, Ordering::Relaxed);
            self.inner.execute(c, shots, ctx, rng)
        }
        fn snapshot(&self, time: f64) -> DeviceSnapshot {
            self.inner.snapshot(time)
        }
    }

    #[test]
    fn realization_consumes_terms_times_shots() {
        let b = Counting { inner: IdealBackend::new(3), shots: AtomicU64::new(0), calls: AtomicU64::new(0) };
        let h = fermionic_triangle();
        let r = run_realization(&b, &h, &w_state_circuit(), 1024, &ctx(&[1, 2, 3]), 9).unwrap();
        assert_eq!(b.calls.load(Ordering::Relaxed), 6);
        assert_eq!(b.shots.load(Ordering::Relaxed), 6 * 1024);
        assert!((r.recompute_energy(&h).unwrap() - r.energy).abs() < 1e-12);
        assert!(r.energy > -2.2 && r.energy < -1.8);
    }

    struct Failing;
    impl ExecutionBackend for Failing {
        fn capabilities(&self) -> Capabilities {
            Capabilities { n_qubits: 3, supports_time: true }
        }
        fn execute(&self, _: &Circuit, _: u64, ctx: &ExecContext<'_>, _: &mut SimRng) -> Result<ShotHistogram> {
            if ctx.packet_index == 1 {
                Err(Error::contract("device offline"))
            } else {
                Ok(ShotHistogram::from_counts(vec![1, 2], [("00", 4)]).unwrap())
            }
        }
        fn snapshot(&self, time: f64) -> DeviceSnapshot {
            DeviceSnapshot::ideal(3, time)
        }
    }

    #[test]
    fn failing_experiment_discards_packet_only() {
        let plan = JobPlan { packets_per_register: 3, packet_size: 2, shots: 4, ..JobPlan::default() };
        let out = run_job(&Failing, &fermionic_triangle(), &w_state_circuit(), &plan).unwrap();
        assert_eq!(out.series[0].packets.len(), 2);
        assert_eq!(out.discarded.len(), 1);
        assert_eq!(out.discarded[0].packet_index, 1);
        assert!(out.discarded[0].reason.contains("device offline"));
    }

    #[test]
    fn rotation_interleaves_timestamps() {
        let plan = JobPlan {
            registers: vec![vec![1, 2, 3], vec![4, 5, 6]],
            packets_per_register: 10,
            packet_size: 2,
            shots: 16,
            ..JobPlan::default()
        };
        let out = run_job(&IdealBackend::new(3), &fermionic_triangle(), &w_state_circuit(), &plan).unwrap();
        let (a, b) = (&out.series[0], &out.series[1]);
        for k in 0..10 {
            assert!(a.packets[k].timestamp_min < b.packets[k].timestamp_min);
            if k + 1 < 10 {
                assert!(b.packets[k].timestamp_min < a.packets[k + 1].timestamp_min);
            }
        }
        a.validate().unwrap();
        b.validate().unwrap();
    }

    #[test]
    fn rotation_pauses_once_per_round() {
        use crate::noise::{DelayEvent, EmulatedBackend, TemporalScenario};
        let mut scenario = TemporalScenario::ideal(3);
        scenario.delays.push(DelayEvent { packet_index: 1, extra_delay_minutes: 45.0 });
        let backend = EmulatedBackend::new(scenario).unwrap();
        let plan = JobPlan {
            registers: vec![vec![1, 2, 3], vec![2, 3, 4]],
            packets_per_register: 3,
            packet_size: 1,
            shots: 8,
            minutes_per_packet: 10.0,
            ..JobPlan::default()
        };
        let out = run_job(&backend, &fermionic_triangle(), &w_state_circuit(), &plan).unwrap();
        let times: Vec<f64> = out.series[0].packets.iter().map(|p| p.timestamp_min).collect();
        assert_eq!(times, [0.0, 20.0, 85.0]);
        assert_eq!(out.series[1].packets[2].timestamp_min, 95.0);
    }

    #[test]
    fn bad_plans_rejected() {
        let h = fermionic_triangle();
        let prep = w_state_circuit();
        let b = IdealBackend::new(3);
        let plan = JobPlan { registers: vec![], ..JobPlan::default() };
        assert!(matches!(run_job(&b, &h, &prep, &plan), Err(Error::Config(_))));
        let plan = JobPlan { registers: vec![vec![1, 2]], ..JobPlan::default() };
        assert!(run_job(&b, &h, &prep, &plan).is_err());
        let plan = JobPlan { shots: 0, ..JobPlan::default() };
        assert!(run_job(&b, &h, &prep, &plan).is_err());
    }
}
