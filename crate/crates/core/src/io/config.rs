//! TOML job configuration.
//!
//! ```toml
//! job_id = "ehningen-demo"
//! seed = 2022
//! anchor = "2022-09-19T22:47:16Z"
//!
//! [backend]
//! kind = "emulated"
//! scenario = "../scenarios/ehningen-like.toml"
//!
//! [protocol]
//! registers = [[1, 2, 3]]
//! packets_per_register = 31
//!
//! [mitigation]
//! mode = "dynamic"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    CalibrationSchedule, ExecutionBackend, IdealBackend, JobPlan, MitigationMode, DEFAULT_MINUTES_PER_PACKET,
    DEFAULT_PACKET_SIZE, DEFAULT_SHOTS,
};
use crate::noise::{EmulatedBackend, TemporalScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Ideal,
    Emulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    pub kind: BackendKind,
    /// Scenario file, relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PathBuf>,
    /// Register size of the ideal backend.
    #[serde(default = "default_qubits")]
    pub qubits: usize,
}

/// Jobs run the three-site triangle Hamiltonian on the W state.
pub const JOB_QUBITS: usize = 3;

fn default_qubits() -> usize {
    JOB_QUBITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default = "default_registers")]
    pub registers: Vec<Vec<u32>>,
    /// Mutually exclusive with `duration_minutes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets_per_register: Option<usize>,
    /// Wall-clock budget per register; converted to whole packets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_minutes: Option<f64>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_packet_size")]
    pub packet_size: usize,
    #[serde(default = "default_minutes")]
    pub minutes_per_packet: f64,
    #[serde(default = "default_true")]
    pub rotation: bool,
    /// Defaults to what the mitigation mode needs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSchedule>,
    #[serde(default = "default_shots")]
    pub calibration_shots: u64,
}

fn default_registers() -> Vec<Vec<u32>> {
    vec![vec![1, 2, 3]]
}
fn default_shots() -> u64 {
    DEFAULT_SHOTS
}
fn default_packet_size() -> usize {
    DEFAULT_PACKET_SIZE
}
fn default_minutes() -> f64 {
    DEFAULT_MINUTES_PER_PACKET
}
fn default_true() -> bool {
    true
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            registers: default_registers(),
            packets_per_register: None,
            duration_minutes: None,
            shots: DEFAULT_SHOTS,
            packet_size: DEFAULT_PACKET_SIZE,
            minutes_per_packet: DEFAULT_MINUTES_PER_PACKET,
            rotation: true,
            calibration: None,
            calibration_shots: DEFAULT_SHOTS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationSection {
    #[serde(default)]
    pub mode: MitigationMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub job_id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_anchor")]
    pub anchor: String,
    /// Output directory, relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub backend: BackendSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub mitigation: MitigationSection,
    /// Directory the configuration was loaded from.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_anchor() -> String {
    "1970-01-01T00:00:00Z".into()
}

/// A backend built from configuration.
pub enum BackendChoice {
    Ideal(IdealBackend),
    Emulated(Box<EmulatedBackend>),
}

impl BackendChoice {
    pub fn as_dyn(&self) -> &dyn ExecutionBackend {
        match self {
            BackendChoice::Ideal(b) => b,
            BackendChoice::Emulated(b) => b.as_ref(),
        }
    }
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: JobConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.job_id.is_empty() || self.job_id.contains(['/', '\\']) {
            return Err(Error::config("job_id must be a non-empty file-name-safe string"));
        }
        chrono::DateTime::parse_from_rfc3339(&self.anchor)
            .map_err(|e| Error::config(format!("anchor {:?} is not RFC 3339: {e}", self.anchor)))?;
        let p = &self.protocol;
        match (p.packets_per_register, p.duration_minutes) {
            (Some(_), Some(_)) => {
                return Err(Error::config("give packets_per_register or duration_minutes, not both"))
            }
            (None, Some(d)) if !(d > 0.0) => return Err(Error::config("duration_minutes must be positive")),
            (Some(0), None) => return Err(Error::config("packets_per_register must be positive")),
            _ => {}
        }
        if self.backend.kind == BackendKind::Emulated && self.backend.scenario.is_none() {
            return Err(Error::config("an emulated backend needs a scenario file"));
        }
        if self.mitigation.mode != MitigationMode::None && p.calibration == Some(CalibrationSchedule::None) {
            return Err(Error::config(format!(
                "{} mitigation needs calibration circuits",
                self.mitigation.mode
            )));
        }
        self.plan().validate(JOB_QUBITS)
    }

    pub fn resolve(&self, relative: &Path) -> PathBuf {
        if relative.is_absolute() {
            relative.to_path_buf()
        } else {
            self.base_dir.join(relative)
        }
    }

    pub fn packets_per_register(&self) -> usize {
        let p = &self.protocol;
        match (p.packets_per_register, p.duration_minutes) {
            (Some(k), _) => k,
            (None, Some(d)) => ((d / p.minutes_per_packet).floor() as usize).max(1),
            (None, None) => 31,
        }
    }

    pub fn calibration_schedule(&self) -> CalibrationSchedule {
        self.protocol.calibration.unwrap_or(match self.mitigation.mode {
            MitigationMode::None => CalibrationSchedule::None,
            MitigationMode::Static => CalibrationSchedule::JobStart,
            MitigationMode::Dynamic => CalibrationSchedule::EveryPacket,
        })
    }

    pub fn plan(&self) -> JobPlan {
        let p = &self.protocol;
        JobPlan {
            job_id: self.job_id.clone(),
            anchor: self.anchor.clone(),
            registers: p.registers.clone(),
            packets_per_register: self.packets_per_register(),
            shots: p.shots,
            packet_size: p.packet_size,
            minutes_per_packet: p.minutes_per_packet,
            rotation: p.rotation,
            calibration: self.calibration_schedule(),
            calibration_shots: p.calibration_shots,
            seed: self.seed,
        }
    }

    pub fn scenario(&self) -> Result<Option<TemporalScenario>> {
        self.backend
            .scenario
            .as_ref()
            .map(|rel| TemporalScenario::load(&self.resolve(rel)))
            .transpose()
    }

    pub fn build_backend(&self) -> Result<BackendChoice> {
        match self.backend.kind {
            BackendKind::Ideal => Ok(BackendChoice::Ideal(IdealBackend::new(self.backend.qubits))),
            BackendKind::Emulated => {
                let scenario = self.scenario()?.expect("validated: emulated backends have a scenario");
                Ok(BackendChoice::Emulated(Box::new(EmulatedBackend::new(scenario)?)))
            }
        }
    }
}
