use proptest::prelude::*;

use wbench::analysis::{fit_sinusoid, histogram, robust_z_scores};
use wbench::mitigation::mitigate_histogram;
use wbench::noise::{true_confusion_matrix, ReadoutNoise};
use wbench::statevector::{format_bits, parse_bits, Gate, ShotHistogram, StateVector};

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 1..=n;
    prop_oneof![
        (q.clone(), -7.0..7.0f64).prop_map(|(qubit, angle)| Gate::RotY { qubit, angle }),
        q.clone().prop_map(Gate::Hadamard),
        q.clone().prop_map(Gate::PauliX),
        q.clone().prop_map(Gate::PauliY),
        q.clone().prop_map(Gate::SDagger),
        (q.clone(), q.clone())
            .prop_filter("distinct qubits", |(a, b)| a != b)
            .prop_map(|(control, target)| Gate::ControlledNot { control, target }),
        (q.clone(), q)
            .prop_filter("distinct qubits", |(a, b)| a != b)
            .prop_map(|(control, target)| Gate::ControlledHadamard { control, target }),
    ]
}

proptest! {
    #[test]
    fn gates_preserve_norm(gates in prop::collection::vec(gate_strategy(4), 0..40)) {
        let mut s = StateVector::zero(4).unwrap();
        for g in &gates {
            s.apply(g).unwrap();
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bit_strings_round_trip(n in 1usize..10, seed in any::<u64>()) {
        let value = (seed as usize) & ((1 << n) - 1);
        prop_assert_eq!(parse_bits(&format_bits(value, n)).unwrap(), value);
    }

    #[test]
    fn mitigation_inverts_the_channel(
        p in 0.0..0.2f64,
        counts in prop::collection::vec(0u64..500, 8),
    ) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let cal = true_confusion_matrix(&ReadoutNoise::uniform(p, 3), 3).unwrap();
        let mut hist = ShotHistogram::empty(vec![1, 2, 3]);
        for (i, &c) in counts.iter().enumerate() {
            hist.record(i, c);
        }
        let quasi = mitigate_histogram(&cal, &hist).unwrap();
        prop_assert!((quasi.sum() - 1.0).abs() < 1e-9);
        let back = cal.apply(quasi.values()).unwrap();
        for (b, f) in back.iter().zip(hist.frequencies()) {
            prop_assert!((b - f).abs() < 1e-9);
        }
    }

    #[test]
    fn z_scores_ignore_shifts(
        xs in prop::collection::vec(-3.0..3.0f64, 5..40),
        shift in -100.0..100.0f64,
    ) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        for (a, b) in robust_z_scores(&xs).iter().zip(robust_z_scores(&shifted)) {
            prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn histogram_counts_every_sample(xs in prop::collection::vec(-3.0..-1.0f64, 1..300), w in 0.005..0.2f64) {
        let h = histogram(&xs, w).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>() as usize, xs.len());
        prop_assert!(h.bin_edges[0] <= xs.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn fit_is_scale_equivariant(scale in 0.2..5.0f64, offset in -3.0..3.0f64) {
        let times: Vec<f64> = (0..36).map(|k| k as f64 * 14.5).collect();
        let base: Vec<f64> = times
            .iter()
            .enumerate()
            .map(|(k, t)| -1.8 + 0.05 * (std::f64::consts::TAU * t / 121.8 + 1.0).sin() + 0.003 * ((k * 7919 % 13) as f64 - 6.0) / 6.0)
            .collect();
        let scaled: Vec<f64> = base.iter().map(|v| scale * v + offset).collect();
        let a = fit_sinusoid(&times, &base, false).unwrap();
        let b = fit_sinusoid(&times, &scaled, false).unwrap();
        prop_assert!((b.period - a.period).abs() < 1e-5 * a.period);
        prop_assert!((b.amplitude - scale * a.amplitude).abs() < 1e-6 * scale);
        prop_assert!((b.offset - (scale * a.offset + offset)).abs() < 1e-6 * (1.0 + scale));
    }
}

mod persistence {
    use proptest::prelude::*;
    use wbench::hamiltonian::{fermionic_triangle, w_state_circuit};
    use wbench::harness::{run_job, IdealBackend, JobPlan};
    use wbench::io::{read_series_str, write_series_string};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn arbitrary_floats_round_trip(
            minutes in 1e-3..1e3f64,
            energies in prop::collection::vec(-1e3..1e3f64, 4),
            seed in any::<u64>(),
        ) {
            let plan = JobPlan {
                packets_per_register: 1,
                packet_size: 4,
                shots: 16,
                minutes_per_packet: minutes,
                seed,
                ..JobPlan::default()
            };
            let mut series = run_job(&IdealBackend::new(3), &fermionic_triangle(), &w_state_circuit(), &plan)
                .unwrap()
                .series
                .remove(0);
            for (r, e) in series.packets[0].realizations.iter_mut().zip(&energies) {
                r.energy = *e;
            }
            let text = write_series_string(&series);
            let back = read_series_str(&text).unwrap();
            prop_assert_eq!(&back, &series);
            prop_assert_eq!(write_series_string(&back), text);
        }
    }
}
