//! Statistics over realizations and time series.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonian::{experiment_circuit, PauliHamiltonian};
use crate::harness::TimeSeries;
use crate::mitigation::estimate_bitflip_p;
use crate::statevector::{format_bits, parity_sign, run_circuit, Circuit};

pub const DEFAULT_BIN_WIDTH: f64 = 0.01;
pub const DEFAULT_OUTLIER_K: f64 = 5.0;
/// Consistency constant turning a MAD into a normal standard deviation.
const MAD_SCALE: f64 = 1.482_602_218_505_602;
/// Packets in a row that must repeat bit for bit before data counts as frozen.
pub const CONSTANT_RUN_LENGTH: usize = 3;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: usize,
    /// Unbinned sample mean.
    pub mean: f64,
    /// Unbinned sample standard deviation.
    pub std: f64,
    pub peak_bin: usize,
}

impl EnergyHistogram {
    pub fn bin_center(&self, bin: usize) -> f64 {
        0.5 * (self.bin_edges[bin] + self.bin_edges[bin + 1])
    }

    pub fn peak_center(&self) -> f64 {
        self.bin_center(self.peak_bin)
    }
}

/// Bins aligned to multiples of `bin_width`, covering `[min, max]`.
pub fn histogram(energies: &[f64], bin_width: f64) -> Result<EnergyHistogram> {
    if energies.is_empty() {
        return Err(Error::contract("histogram of an empty sample"));
    }
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::contract(format!("bin width must be positive, got {bin_width}")));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::contract("non-finite energy"));
    }
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = (min / bin_width).floor() * bin_width;
    let n_bins = (((max - start) / bin_width).floor() as usize + 1).max(1);
    let bin_edges: Vec<f64> = (0..=n_bins).map(|k| start + k as f64 * bin_width).collect();
    let mut counts = vec![0u64; n_bins];
    for &e in energies {
        let k = (((e - start) / bin_width).floor() as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let peak_bin = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k)
        .unwrap_or(0);
    Ok(EnergyHistogram {
        bin_edges,
        counts,
        n_samples: energies.len(),
        mean: mean(energies),
        std: std_dev(energies),
        peak_bin,
    })
}

/// Parameter standard errors of a [`FitResult`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitErrors {
    pub offset: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
    pub slope: Option<f64>,
}

/// `offset + amplitude sin(2 pi t / period + phase) [+ slope t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub offset: f64,
    pub amplitude: f64,
    /// Minutes.
    pub period: f64,
    /// Radians in `[0, 2 pi)`.
    pub phase: f64,
    pub slope: Option<f64>,
    pub errors: FitErrors,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.offset
            + self.amplitude * (TAU * t / self.period + self.phase).sin()
            + self.slope.unwrap_or(0.0) * t
    }
}

const FIT_MIN_POINTS: usize = 8;
const FIT_MAX_ITER: usize = 200;

/// Model parameters in solver order: offset, amplitude, angular frequency,
/// phase, then optionally slope.
struct SineModel<'a> {
    times: &'a [f64],
    values: &'a [f64],
    with_slope: bool,
}

impl SineModel<'_> {
    fn n_params(&self) -> usize {
        if self.with_slope {
            5
        } else {
            4
        }
    }

    fn predict(&self, p: &[f64], t: f64) -> f64 {
        let base = p[0] + p[1] * (p[2] * t + p[3]).sin();
        if self.with_slope {
            base + p[4] * t
        } else {
            base
        }
    }

    fn residuals(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.times.len(),
            self.times
                .iter()
                .zip(self.values)
                .map(|(&t, &y)| y - self.predict(p, t)),
        )
    }

    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.times.len(), self.n_params());
        for (r, &t) in self.times.iter().enumerate() {
            let (s, c) = (p[2] * t + p[3]).sin_cos();
            j[(r, 0)] = 1.0;
            j[(r, 1)] = s;
            j[(r, 2)] = p[1] * t * c;
            j[(r, 3)] = p[1] * c;
            if self.with_slope {
                j[(r, 4)] = t;
            }
        }
        j
    }

    fn rss(&self, p: &[f64]) -> f64 {
        self.residuals(p).norm_squared()
    }

    /// Linear least squares for offset, sin/cos weights (and slope) at fixed `omega`.
    fn linear_start(&self, omega: f64) -> Option<(Vec<f64>, f64)> {
        let cols = if self.with_slope { 4 } else { 3 };
        let n = self.times.len();
        let mut a = DMatrix::zeros(n, cols);
        for (r, &t) in self.times.iter().enumerate() {
            let (s, c) = (omega * t).sin_cos();
            a[(r, 0)] = 1.0;
            a[(r, 1)] = s;
            a[(r, 2)] = c;
            if self.with_slope {
                a[(r, 3)] = t;
            }
        }
        let y = DVector::from_column_slice(self.values);
        let x = a.clone().svd(true, true).solve(&y, 1e-12).ok()?;
        let rss = (&y - &a * &x).norm_squared();
        // b sin + c cos = A sin(wt + phi) with A = hypot(b, c), phi = atan2(c, b)
        let mut p = vec![x[0], x[1].hypot(x[2]), omega, x[2].atan2(x[1])];
        if self.with_slope {
            p.push(x[3]);
        }
        Some((p, rss))
    }

    /// Levenberg-Marquardt refinement; returns parameters, iterations, convergence.
    fn refine(&self, start: Vec<f64>) -> (Vec<f64>, usize, bool) {
        let mut p = start;
        let mut rss = self.rss(&p);
        let mut lambda = 1e-3;
        for iter in 1..=FIT_MAX_ITER {
            let j = self.jacobian(&p);
            let r = self.residuals(&p);
            let jtj = j.transpose() * &j;
            let jtr = j.transpose() * r;
            let mut improved = false;
            for _ in 0..30 {
                let mut damped = jtj.clone();
                for d in 0..damped.nrows() {
                    damped[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
                }
                let Some(step) = damped.lu().solve(&jtr) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                let trial_rss = self.rss(&trial);
                if trial_rss.is_finite() && trial_rss <= rss {
                    let rel_step = step
                        .iter()
                        .zip(&p)
                        .map(|(s, v)| s.abs() / (v.abs() + 1e-12))
                        .fold(0.0, f64::max);
                    let drop = (rss - trial_rss) / rss.max(1e-300);
                    p = trial;
                    rss = trial_rss;
                    lambda = (lambda / 10.0).max(1e-15);
                    improved = true;
                    if drop < 1e-14 || rel_step < 1e-12 {
                        return (p, iter, true);
                    }
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                // No downhill step at any damping: stationary point.
                return (p, iter, lambda > 1e10);
            }
        }
        (p, FIT_MAX_ITER, false)
    }
}

/// Angular frequency of the strongest peak in the least-squares periodogram
/// of the detrended data, over frequencies between one cycle per span and
/// the mean Nyquist rate.
fn dominant_frequency(times: &[f64], residual: &[f64]) -> f64 {
    let span = times[times.len() - 1] - times[0];
    let oversample = 10.0;
    let f_min = 1.0 / span;
    let f_max = 0.5 * (times.len() as f64 - 1.0) / span;
    let df = 1.0 / (span * oversample);
    let mut best = (f_min, f64::NEG_INFINITY);
    let mut f = f_min;
    while f <= f_max {
        let w = TAU * f;
        let (mut ss, mut cc, mut sc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in times.iter().zip(residual) {
            let (s, c) = (w * t).sin_cos();
            ss += s * s;
            cc += c * c;
            sc += s * c;
            ys += y * s;
            yc += y * c;
        }
        let det = ss * cc - sc * sc;
        if det.abs() > 1e-12 {
            let a = (ys * cc - yc * sc) / det;
            let b = (yc * ss - ys * sc) / det;
            let power = a * ys + b * yc;
            if power > best.1 {
                best = (f, power);
            }
        }
        f += df;
    }
    TAU * best.0
}

/// Nonlinear least-squares fit of a sinusoid (optionally with a linear
/// trend) to packet means.
pub fn fit_sinusoid(times: &[f64], values: &[f64], with_slope: bool) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(Error::contract("times and values differ in length"));
    }
    if times.len() < FIT_MIN_POINTS {
        return Err(Error::contract(format!(
            "a sinusoid fit needs at least {FIT_MIN_POINTS} points, got {}",
            times.len()
        )));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::contract("non-finite fit input"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::contract("fit times must be strictly increasing"));
    }
    let scale = std_dev(values);
    if scale <= 1e-13 * (1.0 + mean(values).abs()) {
        return Err(Error::Fit("constant input: amplitude indistinguishable from zero".into()));
    }

    let model = SineModel {
        times,
        values,
        with_slope,
    };
    let n = times.len();
    let span = times[n - 1] - times[0];

    let trend = linear_trend(times, values);
    let detrended: Vec<f64> = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| y - trend.0 - trend.1 * t)
        .collect();

    let mut starts = vec![dominant_frequency(times, &detrended)];
    let mut best: Option<(Vec<f64>, usize, bool, f64)> = None;
    let mut attempt = 0;
    while attempt < starts.len() {
        let omega = starts[attempt];
        attempt += 1;
        let Some((p0, _)) = model.linear_start(omega) else {
            continue;
        };
        let (p, iters, converged) = model.refine(p0);
        let rss = model.rss(&p);
        let better = best.as_ref().is_none_or(|b| (converged && !b.2) || (converged == b.2 && rss < b.3));
        if better {
            best = Some((p, iters, converged, rss));
        }
        if attempt == 1 && !best.as_ref().is_some_and(|b| b.2) {
            // Fallback: periods log-spaced between the sampling limit and the span.
            let t_lo = 2.0 * span / (n as f64 - 1.0);
            for k in 0..5 {
                let t = t_lo * (span / t_lo).powf(k as f64 / 4.0);
                starts.push(TAU / t);
            }
        }
    }
    let (mut p, iterations, converged, rss) =
        best.ok_or_else(|| Error::Fit("no usable starting point".into()))?;
    if !converged {
        return Err(Error::Fit(format!(
            "no convergence after {FIT_MAX_ITER} iterations (rss {rss:.3e})"
        )));
    }

    // Canonical form: omega > 0, amplitude >= 0, phase in [0, 2 pi).
    if p[2] < 0.0 {
        p[2] = -p[2];
        p[3] = PI - p[3];
    }
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[3] += PI;
    }
    p[3] = p[3].rem_euclid(TAU);

    let dof = n.saturating_sub(model.n_params()).max(1) as f64;
    let s2 = rss / dof;
    let j = model.jacobian(&p);
    let cov = (j.transpose() * &j)
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal matrix at the optimum".into()))?
        * s2;
    let se = |k: usize| cov[(k, k)].max(0.0).sqrt();
    let period = TAU / p[2];
    let errors = FitErrors {
        offset: se(0),
        amplitude: se(1),
        period: TAU / (p[2] * p[2]) * se(2),
        phase: se(3),
        slope: with_slope.then(|| se(4)),
    };
    if !(p[1] > 2.0 * errors.amplitude) {
        return Err(Error::Fit(format!(
            "amplitude {:.3e} indistinguishable from zero (standard error {:.3e})",
            p[1], errors.amplitude
        )));
    }
    if period > span {
        return Err(Error::Fit(format!(
            "fitted period {period:.2} exceeds the data span {span:.2}"
        )));
    }
    Ok(FitResult {
        offset: p[0],
        amplitude: p[1],
        period,
        phase: p[3],
        slope: with_slope.then(|| p[4]),
        errors,
        residual_rms: (rss / n as f64).sqrt(),
        converged,
        iterations,
    })
}

/// Ordinary least-squares intercept and slope.
fn linear_trend(times: &[f64], values: &[f64]) -> (f64, f64) {
    let tm = mean(times);
    let ym = mean(values);
    let sxx: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    let sxy: f64 = times.iter().zip(values).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ym - slope * tm, slope)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    pub flagged: Vec<usize>,
    /// One per packet, in series order.
    pub z_scores: Vec<f64>,
    pub threshold: f64,
}

/// Robust z-scores `(x - median) / (1.4826 MAD)`, falling back to the mean
/// absolute deviation when more than half the values coincide.
pub fn robust_z_scores(values: &[f64]) -> Vec<f64> {
    let med = median(values);
    let deviations: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&deviations);
    let scale = if mad > 0.0 {
        MAD_SCALE * mad
    } else {
        // sqrt(pi / 2) relates mean absolute deviation to sigma.
        mean(&deviations) * 1.253_314_137_315_500_3
    };
    values
        .iter()
        .map(|v| if scale > 0.0 { (v - med) / scale } else { 0.0 })
        .collect()
}

/// Flags packet means exceeding the robust z-threshold `k` on the high side.
pub fn detect_outliers_in(means: &[f64], k: f64) -> Result<OutlierReport> {
    if means.len() < 5 {
        return Err(Error::contract(format!(
            "outlier detection needs at least 5 packets, got {}",
            means.len()
        )));
    }
    let z_scores = robust_z_scores(means);
    let flagged = z_scores
        .iter()
        .enumerate()
        .filter(|(_, &z)| z > k)
        .map(|(i, _)| i)
        .collect();
    Ok(OutlierReport {
        flagged,
        z_scores,
        threshold: k,
    })
}

/// Outlier packets of `series`, reported by position in `series.packets`.
pub fn detect_outliers(series: &TimeSeries, k: f64) -> Result<OutlierReport> {
    detect_outliers_in(&series.packet_means(), k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantSpan {
    /// Position of the first packet of the frozen run.
    pub start: usize,
    /// One past the last packet of the run.
    pub end: usize,
}

/// First run of at least three consecutive packets whose realization lists
/// are bit-identical (timestamps aside).
pub fn detect_constant(series: &TimeSeries) -> Result<Option<ConstantSpan>> {
    Ok(constant_runs(series)?.into_iter().next())
}

fn constant_runs(series: &TimeSeries) -> Result<Vec<ConstantSpan>> {
    let packets = &series.packets;
    if packets.len() < 2 {
        return Err(Error::contract("constant detection needs at least 2 packets"));
    }
    let same = |a: usize, b: usize| {
        let (x, y) = (&packets[a].realizations, &packets[b].realizations);
        x.len() == y.len() && x.iter().zip(y).all(|(r, s)| r.same_outcome(s))
    };
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=packets.len() {
        if i < packets.len() && same(i - 1, i) {
            continue;
        }
        if i - start >= CONSTANT_RUN_LENGTH {
            runs.push(ConstantSpan { start, end: i });
        }
        start = i;
    }
    Ok(runs)
}

/// Copy of `series` without frozen runs.
pub fn exclude_constant(series: &TimeSeries) -> Result<TimeSeries> {
    let runs = constant_runs(series)?;
    let packets = series
        .packets
        .iter()
        .enumerate()
        .filter(|(i, _)| !runs.iter().any(|r| (r.start..r.end).contains(i)))
        .map(|(_, p)| p.clone())
        .collect();
    Ok(TimeSeries {
        packets,
        ..series.clone()
    })
}

/// `n_qubits * p * sqrt(n_terms)`: per-string readout error `n p` added in
/// quadrature over independent strings.
pub fn propagated_readout_error(p: f64, n_qubits: usize, n_terms: usize) -> Result<f64> {
    if !(p >= 0.0) || n_qubits == 0 || n_terms == 0 {
        return Err(Error::contract("propagated error needs p >= 0 and positive counts"));
    }
    Ok(n_qubits as f64 * p * (n_terms as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub job_id: String,
    pub register: Vec<u32>,
    pub timestamp_min: f64,
    pub total_readout_error: f64,
    pub total_gate_error: f64,
    pub energy: f64,
}

/// Gate counts `(one-qubit, two-qubit)` summed over every experiment of one realization.
pub fn realization_gate_counts(hamiltonian: &PauliHamiltonian, prep: &Circuit) -> Result<(usize, usize)> {
    hamiltonian.terms().iter().try_fold((0, 0), |(a, b), term| {
        let (one, two) = experiment_circuit(prep, term)?.count_gates();
        Ok((a + one, b + two))
    })
}

/// One row per realization pairing its energy with the device-reported total
/// readout error of the register and total gate error of all gates it used.
pub fn error_correlation_table(series: &[TimeSeries], prep: &Circuit) -> Result<Vec<CorrelationRow>> {
    let mut rows = Vec::new();
    for s in series {
        let (one, two) = realization_gate_counts(&s.hamiltonian, prep)?;
        for packet in &s.packets {
            let snap = &packet.snapshot;
            if snap.reported_readout_error.len() != s.register.len() {
                return Err(Error::contract(format!(
                    "packet {} snapshot covers {} qubits, register has {}",
                    packet.packet_index,
                    snap.reported_readout_error.len(),
                    s.register.len()
                )));
            }
            let readout: f64 = snap.reported_readout_error.iter().sum();
            let gate = one as f64 * snap.reported_gate_errors.one_qubit
                + two as f64 * snap.reported_gate_errors.two_qubit;
            for r in &packet.realizations {
                rows.push(CorrelationRow {
                    job_id: s.job_id.clone(),
                    register: s.register.clone(),
                    timestamp_min: r.timestamp_min,
                    total_readout_error: readout,
                    total_gate_error: gate,
                    energy: r.energy,
                });
            }
        }
    }
    Ok(rows)
}

/// Packet-resolved density of energies: `(packet time, bin center, count)`.
pub fn time_energy_density(series: &TimeSeries, bin_width: f64) -> Result<Vec<(f64, f64, u64)>> {
    let mut rows = Vec::new();
    for packet in &series.packets {
        let h = histogram(&packet.energies(), bin_width)?;
        for (k, &c) in h.counts.iter().enumerate() {
            if c > 0 {
                rows.push((packet.timestamp_min, h.bin_center(k), c));
            }
        }
    }
    Ok(rows)
}

/// Bit-flip estimate from each stored calibration next to the reported mean
/// readout error: `(packet time, estimated p, reported p)`.
pub fn bitflip_timeline(series: &TimeSeries) -> Vec<(f64, f64, f64)> {
    series
        .packets
        .iter()
        .filter_map(|p| {
            let cal = p.calibration.as_ref()?;
            Some((p.timestamp_min, estimate_bitflip_p(cal), mean(&p.snapshot.reported_readout_error)))
        })
        .collect()
}

/// Mean and standard deviation of one observed quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    fn of(xs: &[f64]) -> Stat {
        Stat {
            mean: mean(xs),
            std: std_dev(xs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeColumn {
    pub pauli: String,
    /// Per full-register bit string (index = outcome value); `None` when the
    /// string cannot occur because an unmeasured qubit would be 1.
    pub cells: Vec<Option<Stat>>,
    /// Exact probability per full-register bit string, `None` as above.
    pub exact: Vec<Option<f64>>,
    pub expectation: Stat,
    pub exact_expectation: f64,
}

/// Per-outcome frequency statistics across all realizations of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    pub n_qubits: usize,
    pub columns: Vec<OutcomeColumn>,
    pub energy: Stat,
    pub n_realizations: usize,
    pub n_packets: usize,
}

impl OutcomeTable {
    pub fn row_label(&self, outcome: usize) -> String {
        let sign = if parity_sign(outcome) > 0.0 { '+' } else { '-' };
        format!("{sign}{}", format_bits(outcome, self.n_qubits))
    }
}

/// Outcome statistics in the layout of a per-string frequency table, with
/// exact probabilities of the ideally prepared state for comparison.
/// Outcomes of strings measured on a subset of qubits are placed in the
/// full-register row with 0 on the unmeasured qubits.
pub fn outcome_table(series: &TimeSeries, prep: &Circuit) -> Result<OutcomeTable> {
    let n = series.hamiltonian.n_qubits();
    let realizations: Vec<_> = series.realizations().collect();
    if realizations.is_empty() {
        return Err(Error::contract("outcome table of an empty series"));
    }
    let mut columns = Vec::new();
    for term in series.hamiltonian.terms() {
        let label = term.label();
        let support = term.support();
        let circuit = experiment_circuit(prep, term)?;
        let probs = run_circuit(&circuit)?.probabilities(&support)?;
        let embed = |local: usize| {
            support.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
                let bit = (local >> (support.len() - 1 - pos)) & 1;
                acc | (bit << (n - q))
            })
        };
        let dim = 1usize << n;
        let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(realizations.len()); dim];
        let mut expectations = Vec::with_capacity(realizations.len());
        for r in &realizations {
            let exp = r
                .experiments
                .iter()
                .find(|e| e.pauli == label)
                .ok_or_else(|| Error::contract(format!("realization lacks term {label}")))?;
            expectations.push(exp.expectation);
            let hist = exp
                .histogram
                .as_ref()
                .ok_or_else(|| Error::contract(format!("missing histogram for {label}")))?;
            for (local, f) in hist.frequencies().into_iter().enumerate() {
                samples[embed(local)].push(f);
            }
        }
        let mut cells = vec![None; dim];
        let mut exact = vec![None; dim];
        for (local, &p) in probs.iter().enumerate() {
            let full = embed(local);
            cells[full] = Some(Stat::of(&samples[full]));
            exact[full] = Some(p);
        }
        let exact_expectation = probs
            .iter()
            .enumerate()
            .map(|(o, p)| parity_sign(o) * p)
            .sum();
        columns.push(OutcomeColumn {
            pauli: label,
            cells,
            exact,
            expectation: Stat::of(&expectations),
            exact_expectation,
        });
    }
    let energies: Vec<f64> = realizations.iter().map(|r| r.energy).collect();
    Ok(OutcomeTable {
        n_qubits: n,
        columns,
        energy: Stat::of(&energies),
        n_realizations: realizations.len(),
        n_packets: series.packets.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_histogram() {
        let h = histogram(&[-2.0], 0.01).unwrap();
        assert_eq!(h.counts, vec![1]);
        assert_eq!(h.std, 0.0);
        assert_eq!(h.mean, -2.0);
        assert!(histogram(&[], 0.01).is_err());
        assert!(histogram(&[1.0], 0.0).is_err());
    }

    #[test]
    fn histogram_covers_range() {
        let xs = [-2.03, -2.0, -1.951, -1.97, -2.0];
        let h = histogram(&xs, 0.01).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 5);
        assert!(h.bin_edges[0] <= -2.03 && *h.bin_edges.last().unwrap() >= -1.951);
        assert!((h.peak_center() - (-1.995)).abs() < 1e-9);
    }

    #[test]
    fn propagated_error_values() {
        assert!((propagated_readout_error(0.011, 3, 6).unwrap() - 0.080_833).abs() < 1e-4);
        assert_eq!(propagated_readout_error(0.0, 4, 9).unwrap(), 0.0);
        assert!((propagated_readout_error(0.01, 2, 4).unwrap() - 0.04).abs() < 1e-15);
        assert!(propagated_readout_error(-0.1, 2, 4).is_err());
    }

    #[test]
    fn outliers_need_five_packets() {
        assert!(detect_outliers_in(&[1.0, 2.0, 3.0, 4.0], 5.0).is_err());
        let r = detect_outliers_in(&[1.0, 1.0, 1.0, 1.0, 1.0], 5.0).unwrap();
        assert!(r.flagged.is_empty());
    }

    #[test]
    fn outlier_flagged_only_upward() {
        let mut means = vec![-1.83, -1.832, -1.829, -1.834, -1.828, -1.831, -1.833, -1.830];
        means.push(-1.2);
        means.push(-2.5);
        let r = detect_outliers_in(&means, 5.0).unwrap();
        assert_eq!(r.flagged, vec![8]);
    }

    #[test]
    fn constant_fit_input_rejected() {
        let t: Vec<f64> = (0..20).map(|k| k as f64 * 14.5).collect();
        let y = vec![-1.83; 20];
        assert!(matches!(fit_sinusoid(&t, &y, false), Err(Error::Fit(_))));
        assert!(matches!(fit_sinusoid(&t[..5], &y[..5], false), Err(Error::Contract(_))));
    }

    #[test]
    fn noiseless_sinusoid_recovered_exactly() {
        let t: Vec<f64> = (0..40).map(|k| k as f64 * 14.5).collect();
        let y: Vec<f64> = t.iter().map(|&t| -1.8 + 0.05 * (TAU * t / 121.8 + 1.0).sin()).collect();
        let f = fit_sinusoid(&t, &y, false).unwrap();
        assert!((f.period - 121.8).abs() < 1e-6);
        assert!((f.amplitude - 0.05).abs() < 1e-8);
        assert!((f.phase - 1.0).abs() < 1e-6);
        assert!((f.offset + 1.8).abs() < 1e-8);
    }
}
