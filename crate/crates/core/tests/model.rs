use blockmv::cost::{aligned_segments, count_warp_transactions, predict_time, predicted_gflops, RoundModel};
use blockmv::device::{builtin_k20c_ecc_profile, builtin_k20c_profile, ddr_peak_bandwidth};
use blockmv::kernel::{trace_op, Coefficients, Op};
use blockmv::matrix::Layout;
use blockmv::partition::KernelConfig;
use blockmv::precision::Precision;
use blockmv::roofline::{byte_count, flop_count, intensity_asymptotic, intensity_exact, roofline_csv, sustained_peak, table, Family};
use blockmv::tuner::{enumerate_configs, sweep_csv, Constraints, Tuner, SWEEP_CSV_HEADER};
use proptest::prelude::*;

fn square(d: usize) -> Layout {
    Layout { m: d, n: d, ld: d.next_multiple_of(32), row_offset: 0, col_offset: 0 }
}

#[test]
fn k20c_bandwidth() {
    let p = builtin_k20c_profile();
    assert_eq!(p.sm_count, 13);
    assert!((ddr_peak_bandwidth(2.6, 320) - 208.0).abs() < 1e-9);
    assert!(builtin_k20c_ecc_profile().sustained_bandwidth() < p.sustained_bandwidth());
}

#[test]
fn roofline_counts() {
    assert_eq!(flop_count(Precision::D, Family::Gemv, 10), 220);
    assert_eq!(byte_count(Precision::D, Family::Gemv, 10), 8 * 130);
    assert_eq!(intensity_asymptotic(Precision::Z, Family::SymvHemv), 1.0);
    assert!(intensity_exact(Precision::S, Family::Gemv, 1 << 20) < 0.5);
    assert_eq!(table().len(), 8);
    let csv = roofline_csv(&builtin_k20c_profile(), Some(1000), true);
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn round_model_examples() {
    let r = RoundModel::new(1001, 10);
    assert_eq!((r.full_rounds, r.tb_r, r.rounds()), (100, 1, 101));
    let r = RoundModel::new(5, 13);
    assert_eq!((r.full_rounds, r.tb_r), (0, 5));
    assert!((r.utilization - 5.0 / 13.0).abs() < 1e-12);
    assert_eq!(RoundModel::new(26, 13).utilization, 1.0);
}

#[test]
fn simulated_throughput_stays_under_roofline() {
    let profile = builtin_k20c_profile();
    for p in Precision::ALL {
        for (op, fam) in [(Op::GemvN, Family::Gemv), (Op::GemvT, Family::Gemv), (Op::SymvLower, Family::SymvHemv)] {
            for cfg in [KernelConfig::new(32, 2, 1).unwrap(), KernelConfig::new(64, 8, 4).unwrap()] {
                for d in [512, 2048, 4096] {
                    let c = trace_op(op, p, square(d), Coefficients::GENERAL, &cfg, 128).unwrap();
                    let g = predicted_gflops(&c, &profile);
                    assert!(g > 0.0 && g <= sustained_peak(&profile, p, fam) * 1.001, "{p:?} {op:?} {cfg} {d}: {g}");
                }
            }
        }
    }
}

#[test]
fn tuner_search_space_and_output() {
    let configs = enumerate_configs(Precision::D, &Constraints::default());
    assert_eq!(configs.len(), 90);
    let limited = enumerate_configs(Precision::D, &Constraints { max_threads_per_tb: Some(256), ..Default::default() });
    assert!(limited.iter().all(|c| c.threads_per_tb() <= 256));
    let tuner = Tuner::new(Op::GemvN, Precision::S, builtin_k20c_profile());
    let evals = tuner.sweep(&[1024, 2048]).unwrap();
    let csv = sweep_csv(Op::GemvN, Precision::S, &evals);
    assert_eq!(csv.lines().next(), Some(SWEEP_CSV_HEADER));
    assert_eq!(csv.lines().count(), evals.len() + 1);
}

#[test]
fn dsymv_tuning_prefers_cooperation() {
    let tuner = Tuner::new(Op::SymvLower, Precision::D, builtin_k20c_profile());
    let sizes: Vec<usize> = (1..=16).map(|k| k * 512).collect();
    let coarse = tuner.coarse_tune(&sizes).unwrap();
    assert_eq!(coarse.best.nb, 32);
    let fine = tuner.fine_tune(coarse.best, &sizes).unwrap();
    assert_eq!(fine.recommendation.y_bar, 2);
}

#[test]
fn gemv_oscillation_depends_on_leftover_tbs() {
    let tuner = Tuner::new(Op::GemvN, Precision::D, builtin_k20c_profile());
    let base = KernelConfig::new(64, 8, 1).unwrap();
    let at = |d: usize, y: usize| tuner.evaluate(&KernelConfig { y_bar: y, ..base }, d).unwrap();
    assert_eq!(at(1792, 1).tb_r(), 2);
    assert!(at(1792, 4).predicted_gflops > at(1792, 1).predicted_gflops);
    assert_eq!(at(13312, 1).tb_r(), 0);
    assert!(at(13312, 1).predicted_gflops > at(13312, 4).predicted_gflops);
}

proptest! {
    #[test]
    fn warp_windows(start in 0usize..10_000, len in 0usize..600, bpow in 2u32..5) {
        let b = 1usize << bpow;
        let got = count_warp_transactions(start, len, b, 128);
        let mut set = std::collections::BTreeSet::new();
        for e in start..start + len {
            set.insert(e * b / 128);
            set.insert(((e + 1) * b - 1) / 128);
        }
        prop_assert_eq!(got, set.len() as u64);
        prop_assert!(got >= aligned_segments(len * b, 128));
        if (start * b).is_multiple_of(128) {
            prop_assert_eq!(got, aligned_segments(len * b, 128));
        }
    }

    #[test]
    fn predict_time_monotone(d in 64usize..3000, extra in 1usize..500, factor in 1.01f64..8.0) {
        let profile = builtin_k20c_profile();
        let cfg = KernelConfig::new(32, 2, 1).unwrap();
        let c = trace_op(Op::GemvT, Precision::D, square(d), Coefficients::GENERAL, &cfg, 128).unwrap();
        let c2 = trace_op(Op::GemvT, Precision::D, square(d + extra), Coefficients::GENERAL, &cfg, 128).unwrap();
        let rm = RoundModel::new(26, 13);
        prop_assert!(predict_time(&c2, &rm, &profile) > predict_time(&c, &rm, &profile));
        prop_assert!(predict_time(&c, &rm, &profile.scaled(factor)) < predict_time(&c, &rm, &profile));
        prop_assert!(predict_time(&c, &RoundModel::new(27, 13), &profile) > predict_time(&c, &rm, &profile));
    }
}
