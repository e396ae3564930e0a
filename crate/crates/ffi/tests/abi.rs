use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use wbench_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { wb_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn w_state_through_handles() {
    unsafe {
        let mut w = ptr::null_mut();
        let mut h = ptr::null_mut();
        assert_eq!(wb_state_w(&mut w), WbStatus::Ok);
        assert_eq!(wb_hamiltonian_triangle(&mut h), WbStatus::Ok);
        assert_eq!(wb_state_n_qubits(w), 3);
        assert_eq!(wb_hamiltonian_n_terms(h), 6);

        let mut e = 0.0;
        assert_eq!(wb_hamiltonian_expectation(h, w, &mut e), WbStatus::Ok);
        assert!((e + 2.0).abs() < 1e-12);

        let yzy = CString::new("YZY").unwrap();
        assert_eq!(wb_state_expectation(w, yzy.as_ptr(), &mut e), WbStatus::Ok);
        assert!((e - 2.0 / 3.0).abs() < 1e-12);

        let measured = [1usize, 2, 3];
        let mut probs = [0.0; 8];
        assert_eq!(wb_state_probabilities(w, measured.as_ptr(), 3, probs.as_mut_ptr(), 8), WbStatus::Ok);
        for (i, p) in probs.iter().enumerate() {
            let want = if i.count_ones() == 1 { 1.0 / 3.0 } else { 0.0 };
            assert!((p - want).abs() < 1e-12);
        }
        assert_eq!(
            wb_state_probabilities(w, measured.as_ptr(), 3, probs.as_mut_ptr(), 4),
            WbStatus::BufferTooSmall
        );

        let mut counts = [0u64; 8];
        assert_eq!(wb_state_sample(w, 1024, 3, counts.as_mut_ptr(), 8), WbStatus::Ok);
        assert_eq!(counts.iter().sum::<u64>(), 1024);

        wb_hamiltonian_free(h);
        wb_state_free(w);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(wb_hamiltonian_ring(2, &mut h), WbStatus::Config);
        assert!(h.is_null());
        assert!(last_error().contains("3"), "{}", last_error());
        assert_eq!(wb_hamiltonian_triangle(ptr::null_mut()), WbStatus::NullPointer);

        let bad = CString::new("YQY").unwrap();
        let mut w = ptr::null_mut();
        wb_state_w(&mut w);
        let mut e = 0.0;
        assert_eq!(wb_state_expectation(w, bad.as_ptr(), &mut e), WbStatus::Config);
        wb_state_free(w);

        let mut out = 0.0;
        assert_eq!(wb_propagated_readout_error(-1.0, 3, 6, &mut out), WbStatus::Contract);
        assert_eq!(wb_run_job(c"/definitely/missing.toml".as_ptr(), ptr::null()), WbStatus::Io);
        assert!(last_error().contains("/definitely/missing.toml"));
    }
}

#[test]
fn calibration_round_trip() {
    unsafe {
        let mut cal = ptr::null_mut();
        assert_eq!(wb_calibration_bitflip(0.011, 3, &mut cal), WbStatus::Ok);
        let mut p = 0.0;
        wb_calibration_estimate_p(cal, &mut p);
        assert!((p - 0.011).abs() < 5e-4);
        let mut cond = 0.0;
        wb_calibration_condition_number(cal, &mut cond);
        assert!(cond > 1.0 && cond < 1.2);

        let counts = [900u64, 20, 20, 0, 20, 0, 0, 40];
        let mut quasi = [0.0; 8];
        assert_eq!(
            wb_calibration_mitigate(cal, counts.as_ptr(), 8, 1e6, quasi.as_mut_ptr(), 8),
            WbStatus::Ok
        );
        assert!((quasi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(
            wb_calibration_mitigate(cal, counts.as_ptr(), 8, 1.0, quasi.as_mut_ptr(), 8),
            WbStatus::Mitigation
        );
        wb_calibration_free(cal);

        let not_stochastic = [0.5, 0.5, 0.5, 0.4];
        let mut bad = ptr::null_mut();
        assert_ne!(wb_calibration_from_entries(1, not_stochastic.as_ptr(), 4, &mut bad), WbStatus::Ok);
        let flip = [0.9, 0.2, 0.1, 0.8];
        assert_eq!(wb_calibration_from_entries(1, flip.as_ptr(), 4, &mut bad), WbStatus::Ok);
        wb_calibration_free(bad);
    }
}

#[test]
fn fit_and_outliers() {
    let times: Vec<f64> = (0..40).map(|k| k as f64 * 14.5).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|t| -1.83 + 0.04 * (std::f64::consts::TAU * t / 121.8 + 0.3).sin())
        .collect();
    let mut fit = WbFit::default();
    unsafe {
        assert_eq!(
            wb_fit_sinusoid(times.as_ptr(), values.as_ptr(), times.len(), false, &mut fit),
            WbStatus::Ok
        );
    }
    assert!((fit.period - 121.8).abs() < 1e-6);
    assert!(fit.converged);

    let mut means = vec![-1.83, -1.831, -1.829, -1.832, -1.828, -1.83, -1.6, -1.831];
    means.extend([-1.829, -1.830]);
    let mut flags = vec![0u8; means.len()];
    let mut n = 0usize;
    unsafe {
        assert_eq!(
            wb_detect_outliers(means.as_ptr(), means.len(), 5.0, flags.as_mut_ptr(), &mut n),
            WbStatus::Ok
        );
    }
    assert_eq!(n, 1);
    assert_eq!(flags[6], 1);
}

#[test]
fn run_job_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("job.toml");
    std::fs::write(
        &config,
        "job_id = \"ffi\"\n[backend]\nkind = \"ideal\"\n[protocol]\npackets_per_register = 2\npacket_size = 3\n",
    )
    .unwrap();
    let c = CString::new(config.to_str().unwrap()).unwrap();
    let out = CString::new(dir.path().join("out").to_str().unwrap()).unwrap();
    unsafe { assert_eq!(wb_run_job(c.as_ptr(), out.as_ptr()), WbStatus::Ok, "{}", last_error()) };
    let text = std::fs::read_to_string(dir.path().join("out/ffi_q1-2-3.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

fn target_dir() -> PathBuf {
    // tests/ binaries live in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

/// Compiles and runs the C smoke program against the generated header and
/// static library when a C compiler is available.
#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libwbench_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
