//! Comma-separated exports for plotting and plain-text reports.
//!
//! Each CSV starts with one header line; units are given in brackets, where
//! `[t]` is the hopping energy unit and `[1]` marks a dimensionless value.

use std::fmt::Write as _;

use crate::analysis::{ConstantSpan, CorrelationRow, EnergyHistogram, FitResult, OutcomeTable, OutlierReport};

fn register_label(register: &[u32]) -> String {
    register.iter().map(u32::to_string).collect::<Vec<_>>().join("-")
}

pub fn histogram_csv(h: &EnergyHistogram) -> String {
    let mut out = String::from("bin_low[t],bin_high[t],count\n");
    for (k, c) in h.counts.iter().enumerate() {
        writeln!(out, "{},{},{c}", h.bin_edges[k], h.bin_edges[k + 1]).unwrap();
    }
    out
}

/// One summary line per labelled histogram.
pub fn summary_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a [u32], &'a str, &'a EnergyHistogram)>) -> String {
    let mut out = String::from("job_id,register,mitigation,n_samples,mean[t],std[t],peak[t]\n");
    for (job, register, mode, h) in rows {
        writeln!(
            out,
            "{job},{},{mode},{},{},{},{}",
            register_label(register),
            h.n_samples,
            h.mean,
            h.std,
            h.peak_center()
        )
        .unwrap();
    }
    out
}

pub fn correlation_csv(rows: &[CorrelationRow]) -> String {
    let mut out =
        String::from("job_id,register,timestamp[min],total_readout_error[1],total_gate_error[1],energy[t]\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.job_id,
            register_label(&r.register),
            r.timestamp_min,
            r.total_readout_error,
            r.total_gate_error,
            r.energy
        )
        .unwrap();
    }
    out
}

pub fn density_csv(rows: &[(f64, f64, u64)]) -> String {
    let mut out = String::from("packet_time[min],energy_bin_center[t],count\n");
    for (t, e, c) in rows {
        writeln!(out, "{t},{e},{c}").unwrap();
    }
    out
}

pub fn bitflip_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("timestamp[min],estimated_flip[1],reported_readout_error[1]\n");
    for (t, est, rep) in rows {
        writeln!(out, "{t},{est},{rep}").unwrap();
    }
    out
}

/// Packet means with their robust z-scores and flags.
pub fn outliers_csv(times: &[f64], means: &[f64], report: &OutlierReport) -> String {
    let mut out = String::from("packet,timestamp[min],mean_energy[t],robust_z[1],flagged\n");
    for (k, ((t, m), z)) in times.iter().zip(means).zip(&report.z_scores).enumerate() {
        writeln!(out, "{k},{t},{m},{z},{}", report.flagged.contains(&k)).unwrap();
    }
    out
}

pub fn constant_report(span: Option<ConstantSpan>, times: &[f64]) -> String {
    match span {
        None => "no constant run detected\n".into(),
        Some(s) => format!(
            "constant run: packets {}..{} ({} packets, {:.1} to {:.1} min)\n",
            s.start,
            s.end - 1,
            s.end - s.start,
            times[s.start],
            times[s.end - 1]
        ),
    }
}

pub fn fit_report(fit: &FitResult) -> String {
    let mut out = String::new();
    let e = &fit.errors;
    writeln!(out, "offset[t]      {:.6} +/- {:.6}", fit.offset, e.offset).unwrap();
    writeln!(out, "amplitude[t]   {:.6} +/- {:.6}", fit.amplitude, e.amplitude).unwrap();
    writeln!(out, "period[min]    {:.3} +/- {:.3}", fit.period, e.period).unwrap();
    writeln!(out, "phase[rad]     {:.4} +/- {:.4}", fit.phase, e.phase).unwrap();
    if let (Some(s), Some(se)) = (fit.slope, e.slope) {
        writeln!(out, "slope[t/min]   {s:.3e} +/- {se:.3e}").unwrap();
    }
    writeln!(out, "residual_rms[t] {:.6}", fit.residual_rms).unwrap();
    writeln!(out, "converged      {} ({} iterations)", fit.converged, fit.iterations).unwrap();
    out
}

/// Fixed-width outcome table: one row per bit string, one column per Pauli
/// string. Cells read `mean [std]` with the exact value below in parentheses.
pub fn render_outcome_table(table: &OutcomeTable) -> String {
    const W: usize = 18;
    let mut out = String::new();
    write!(out, "{:<8}", "outcome").unwrap();
    for c in &table.columns {
        write!(out, "{:>W$}", c.pauli).unwrap();
    }
    out.push('\n');
    let dim = 1usize << table.n_qubits;
    for outcome in 0..dim {
        let mut measured = format!("{:<8}", table.row_label(outcome));
        let mut exact = format!("{:<8}", "");
        for c in &table.columns {
            match (c.cells[outcome], c.exact[outcome]) {
                (Some(s), Some(p)) => {
                    write!(measured, "{:>W$}", format!("{:.4} [{:.4}]", s.mean, s.std)).unwrap();
                    write!(exact, "{:>W$}", format!("({p:.4})")).unwrap();
                }
                _ => {
                    write!(measured, "{:>W$}", "-").unwrap();
                    write!(exact, "{:>W$}", "").unwrap();
                }
            }
        }
        out.push_str(measured.trim_end());
        out.push('\n');
        out.push_str(exact.trim_end());
        out.push('\n');
    }
    let mut expect = format!("{:<8}", "<P>");
    let mut exact = format!("{:<8}", "");
    for c in &table.columns {
        write!(expect, "{:>W$}", format!("{:.4} [{:.4}]", c.expectation.mean, c.expectation.std)).unwrap();
        write!(exact, "{:>W$}", format!("({:.4})", c.exact_expectation)).unwrap();
    }
    out.push_str(expect.trim_end());
    out.push('\n');
    out.push_str(exact.trim_end());
    out.push('\n');
    writeln!(
        out,
        "energy[t] {:.4} [{:.4}] over {} realizations in {} packets",
        table.energy.mean, table.energy.std, table.n_realizations, table.n_packets
    )
    .unwrap();
    out
}
