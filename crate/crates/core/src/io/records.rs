//! Line-delimited JSON time-series files.
//!
//! A file holds one time series: a header line (`"record": "header"`)
//! followed by one packet per line (`"record": "packet"`). Every line carries
//! `schema_version`. Fields this version does not know are kept and written
//! back unchanged. A trailing line without a newline is treated as an
//! in-progress append and skipped.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hamiltonian::{PauliHamiltonian, PauliTerm, TermRecord};
use crate::harness::{Experiment, MitigationMode, Packet, Realization, TimeSeries};
use crate::mitigation::{CalibrationMatrix, CalibrationRecord};
use crate::noise::DeviceSnapshot;
use crate::statevector::ShotHistogram;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Header,
    Packet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderRecord {
    pub record: RecordKind,
    pub schema_version: u32,
    pub job_id: String,
    /// Absolute start of the job; all `*_min` fields count minutes from here.
    pub anchor: String,
    pub register: Vec<u32>,
    pub mitigation_mode: MitigationMode,
    pub hamiltonian: Vec<TermRecord>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub record: RecordKind,
    pub schema_version: u32,
    pub job_id: String,
    pub register: Vec<u32>,
    pub packet_index: usize,
    pub packet_timestamp_min: f64,
    pub snapshot: DeviceSnapshot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationRecord>,
    pub realizations: Vec<RealizationRecord>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub energy: f64,
    pub timestamp_min: f64,
    /// Pauli letter string -> expectation.
    pub expectations: BTreeMap<String, f64>,
    /// Pauli letter string -> sparse histogram over the measured (support) qubits.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub histograms: BTreeMap<String, BTreeMap<String, u64>>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl HeaderRecord {
    pub fn from_series(series: &TimeSeries) -> Self {
        HeaderRecord {
            record: RecordKind::Header,
            schema_version: SCHEMA_VERSION,
            job_id: series.job_id.clone(),
            anchor: series.anchor.clone(),
            register: series.register.clone(),
            mitigation_mode: series.mitigation_mode,
            hamiltonian: series.hamiltonian.to_records(),
            extra: BTreeMap::new(),
        }
    }
}

impl RealizationRecord {
    pub fn from_realization(r: &Realization) -> Self {
        RealizationRecord {
            energy: r.energy,
            timestamp_min: r.timestamp_min,
            expectations: r.per_term_expectations(),
            histograms: r
                .experiments
                .iter()
                .filter_map(|e| {
                    let h = e.histogram.as_ref()?;
                    Some((e.pauli.clone(), h.sparse().into_iter().collect()))
                })
                .collect(),
            extra: BTreeMap::new(),
        }
    }

    fn to_realization(&self, hamiltonian: &PauliHamiltonian) -> Result<Realization> {
        let experiments = hamiltonian
            .terms()
            .iter()
            .map(|term: &PauliTerm| {
                let label = term.label();
                let expectation = *self.expectations.get(&label).ok_or_else(|| {
                    Error::contract(format!("realization lacks expectation of {label}"))
                })?;
                let histogram = self
                    .histograms
                    .get(&label)
                    .map(|counts| {
                        ShotHistogram::from_counts(
                            term.support(),
                            counts.iter().map(|(k, &v)| (k.as_str(), v)),
                        )
                    })
                    .transpose()?;
                Ok(Experiment {
                    pauli: label,
                    expectation,
                    histogram,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Realization {
            energy: self.energy,
            timestamp_min: self.timestamp_min,
            experiments,
        })
    }
}

impl PacketRecord {
    pub fn from_packet(series: &TimeSeries, packet: &Packet) -> Self {
        PacketRecord {
            record: RecordKind::Packet,
            schema_version: SCHEMA_VERSION,
            job_id: series.job_id.clone(),
            register: series.register.clone(),
            packet_index: packet.packet_index,
            packet_timestamp_min: packet.timestamp_min,
            snapshot: packet.snapshot.clone(),
            calibration: packet.calibration.as_ref().map(CalibrationMatrix::to_record),
            realizations: packet
                .realizations
                .iter()
                .map(RealizationRecord::from_realization)
                .collect(),
            extra: BTreeMap::new(),
        }
    }

    pub fn to_packet(&self, hamiltonian: &PauliHamiltonian) -> Result<Packet> {
        Ok(Packet {
            packet_index: self.packet_index,
            timestamp_min: self.packet_timestamp_min,
            snapshot: self.snapshot.clone(),
            calibration: self
                .calibration
                .as_ref()
                .map(CalibrationMatrix::from_record)
                .transpose()?,
            realizations: self
                .realizations
                .iter()
                .map(|r| r.to_realization(hamiltonian))
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

pub(crate) fn packet_line(record: &PacketRecord) -> String {
    serde_json::to_string(record).expect("packet records serialize")
}

pub(crate) fn header_line(record: &HeaderRecord) -> String {
    serde_json::to_string(record).expect("header records serialize")
}

/// Parses one line into a record of the given kind, checking the schema version.
fn parse_line<T: for<'de> Deserialize<'de>>(line: &str, line_no: usize, kind: RecordKind) -> Result<T> {
    let parse_err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let value: Value = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("missing schema_version".into()))?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(Error::Incompatible {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    let found: RecordKind = value
        .get("record")
        .cloned()
        .map(serde_json::from_value)
        .transpose()
        .map_err(|e| parse_err(format!("record kind: {e}")))?
        .ok_or_else(|| parse_err("missing record kind".into()))?;
    if found != kind {
        return Err(parse_err(format!("expected a {kind:?} record, found {found:?}")));
    }
    serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))
}

/// Raw records of a series file: header plus packets.
pub fn parse_records(text: &str) -> Result<(HeaderRecord, Vec<PacketRecord>)> {
    let complete = match text.rfind('\n') {
        Some(end) => &text[..=end],
        None => "",
    };
    if complete.len() < text.len() {
        log::debug!("ignoring incomplete trailing line");
    }
    let mut header = None;
    let mut packets = Vec::new();
    for (idx, line) in complete.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(parse_line::<HeaderRecord>(line, line_no, RecordKind::Header)?);
        } else {
            packets.push(parse_line::<PacketRecord>(line, line_no, RecordKind::Packet)?);
        }
    }
    let header = header.ok_or(Error::Parse {
        line: 1,
        message: "missing header record".into(),
    })?;
    Ok((header, packets))
}

pub fn render_records(header: &HeaderRecord, packets: &[PacketRecord]) -> String {
    let mut out = header_line(header);
    out.push('\n');
    for p in packets {
        out.push_str(&packet_line(p));
        out.push('\n');
    }
    out
}

pub fn series_to_records(series: &TimeSeries) -> (HeaderRecord, Vec<PacketRecord>) {
    (
        HeaderRecord::from_series(series),
        series
            .packets
            .iter()
            .map(|p| PacketRecord::from_packet(series, p))
            .collect(),
    )
}

pub fn records_to_series(header: &HeaderRecord, packets: &[PacketRecord]) -> Result<TimeSeries> {
    let hamiltonian = PauliHamiltonian::from_records(&header.hamiltonian)?;
    let series = TimeSeries {
        job_id: header.job_id.clone(),
        anchor: header.anchor.clone(),
        register: header.register.clone(),
        hamiltonian: hamiltonian.clone(),
        mitigation_mode: header.mitigation_mode,
        packets: packets
            .iter()
            .map(|p| p.to_packet(&hamiltonian))
            .collect::<Result<Vec<_>>>()?,
    };
    series.validate()?;
    Ok(series)
}

pub fn write_series_string(series: &TimeSeries) -> String {
    let (header, packets) = series_to_records(series);
    render_records(&header, &packets)
}

pub fn read_series_str(text: &str) -> Result<TimeSeries> {
    let (header, packets) = parse_records(text)?;
    records_to_series(&header, &packets)
}

pub fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(write_series_string(series).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_series_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{fermionic_triangle, w_state_circuit};
    use crate::harness::{run_job, IdealBackend, JobPlan};

    fn small_series() -> TimeSeries {
        let plan = JobPlan {
            packets_per_register: 3,
            packet_size: 4,
            shots: 64,
            ..JobPlan::default()
        };
        run_job(&IdealBackend::new(3), &fermionic_triangle(), &w_state_circuit(), &plan)
            .unwrap()
            .series
            .remove(0)
    }

    #[test]
    fn series_round_trip() {
        let s = small_series();
        let text = write_series_string(&s);
        assert_eq!(text.lines().count(), 4);
        let back = read_series_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(write_series_string(&back), text);
    }

    #[test]
    fn unknown_fields_survive() {
        let (header, mut packets) = series_to_records(&small_series());
        packets[0].realizations[0].extra.insert("zz_extra".into(), Value::from(3));
        let text = render_records(&header, &packets);
        // An extra top-level field appended by a newer writer.
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[1].pop();
        lines[1].push_str(",\"operator_note\":\"fridge warm\"}");
        let edited = lines.join("\n") + "\n";
        let (h, p) = parse_records(&edited).unwrap();
        assert_eq!(p[0].extra["operator_note"], Value::from("fridge warm"));
        assert_eq!(render_records(&h, &p), edited);
    }

    #[test]
    fn truncated_line_names_its_number() {
        let text = write_series_string(&small_series());
        let mut lines: Vec<&str> = text.lines().collect();
        let cut = &lines[2][..lines[2].len() / 2];
        lines[2] = cut;
        let broken = lines.join("\n") + "\n";
        match read_series_str(&broken) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn partial_trailing_line_is_ignored() {
        let text = write_series_string(&small_series());
        let partial = format!("{text}{{\"record\":\"pac");
        assert_eq!(read_series_str(&partial).unwrap().packets.len(), 3);
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let text = write_series_string(&small_series()).replacen("\"schema_version\":1", "\"schema_version\":9", 1);
        assert!(matches!(
            read_series_str(&text),
            Err(Error::Incompatible { found: 9, expected: 1 })
        ));
    }
}
