//! Running a configured job into an output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hamiltonian::{fermionic_triangle, w_state_circuit};
use crate::harness::{run_job_streaming, DiscardedPacket, MitigationMode, TimeSeries};
use crate::io::config::JobConfig;
use crate::io::records::{header_line, packet_line, write_series, HeaderRecord, PacketRecord};
use crate::mitigation::{mitigate_timeseries, MitigationOptions};

/// Files produced by one job.
#[derive(Debug, Clone)]
pub struct RunSummary {
    /// Raw series, one per register.
    pub raw: Vec<PathBuf>,
    /// Mitigated series, present when the job requests mitigation.
    pub mitigated: Vec<PathBuf>,
    pub discarded: Vec<DiscardedPacket>,
    pub series: Vec<TimeSeries>,
}

pub fn series_file_name(job_id: &str, register: &[u32], mode: MitigationMode) -> String {
    let reg = register.iter().map(u32::to_string).collect::<Vec<_>>().join("-");
    match mode {
        MitigationMode::None => format!("{job_id}_q{reg}.jsonl"),
        m => format!("{job_id}_q{reg}.{m}.jsonl"),
    }
}

/// Runs `config` and streams each packet to its register's file as soon as
/// it completes. Output goes to `out`, else the configured output directory,
/// else the configuration's own directory.
pub fn run_to_directory(config: &JobConfig, out: Option<&Path>) -> Result<RunSummary> {
    let dir = match (out, &config.output) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(rel)) => config.resolve(rel),
        (None, None) => config.base_dir.clone(),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let backend = config.build_backend()?;
    let hamiltonian = fermionic_triangle();
    let prep = w_state_circuit();
    let plan = config.plan();

    let mut writers = Vec::with_capacity(plan.registers.len());
    let mut raw = Vec::with_capacity(plan.registers.len());
    for register in &plan.registers {
        let path = dir.join(series_file_name(&plan.job_id, register, MitigationMode::None));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let header = HeaderRecord::from_series(&TimeSeries {
            job_id: plan.job_id.clone(),
            anchor: plan.anchor.clone(),
            register: register.clone(),
            hamiltonian: hamiltonian.clone(),
            mitigation_mode: MitigationMode::None,
            packets: Vec::new(),
        });
        writeln!(w, "{}", header_line(&header)).map_err(|e| Error::io(&path, e))?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        writers.push((w, path.clone(), header));
        raw.push(path);
    }

    let output = run_job_streaming(backend.as_dyn(), &hamiltonian, &prep, &plan, &mut |reg, packet| {
        let (w, path, header) = &mut writers[reg];
        let stub = TimeSeries {
            job_id: header.job_id.clone(),
            anchor: header.anchor.clone(),
            register: header.register.clone(),
            hamiltonian: hamiltonian.clone(),
            mitigation_mode: MitigationMode::None,
            packets: Vec::new(),
        };
        let line = packet_line(&PacketRecord::from_packet(&stub, packet));
        writeln!(w, "{line}").and_then(|_| w.flush()).map_err(|e| Error::io(&*path, e))
    })?;

    let mut mitigated = Vec::new();
    let mode = config.mitigation.mode;
    if mode != MitigationMode::None {
        let options = MitigationOptions {
            calibration_shots: plan.calibration_shots,
            seed: plan.seed,
            ..MitigationOptions::default()
        };
        for series in &output.series {
            if series.packets.is_empty() {
                continue;
            }
            let m = mitigate_timeseries(series, mode, Some(backend.as_dyn()), &options)?;
            let path = dir.join(series_file_name(&plan.job_id, &series.register, mode));
            write_series(&path, &m)?;
            mitigated.push(path);
        }
    }

    Ok(RunSummary {
        raw,
        mitigated,
        discarded: output.discarded,
        series: output.series,
    })
}
