mod common;

use blockmv::generate::Operands;
use blockmv::kernel::{
    execute, run_diag_block, run_gemv_n, run_gemv_t, run_scal, run_symv_offdiag, trace_op, Coefficients, KernelKind,
    KernelRequest, Op,
};
use blockmv::matrix::{Layout, Matrix};
use blockmv::partition::KernelConfig;
use blockmv::precision::{Precision, Scalar};
use common::{poison, scaled_error};
use num_complex::{Complex32, Complex64};
use proptest::prelude::*;

fn check<T: Scalar>(op: Op, m: usize, n: usize, cfg: KernelConfig, alpha: T, beta: T, seed: u64) {
    let mut g = Operands::new(seed);
    let mut a: Matrix<T> = g.matrix(m, n, m + 3).unwrap();
    if let Some(uplo) = op.uplo() {
        poison(&mut a, uplo);
    }
    let (xl, yl) = if op == Op::GemvN { (n, m) } else { (m, n) };
    let x = g.vector::<T>(xl);
    let y = g.vector::<T>(yl);
    let req = KernelRequest::new(op, a.view(), &x, &y, alpha, beta, cfg);
    let rep = execute(&req).unwrap();
    assert_eq!(rep.counters.guard_violations, 0);
    let err = scaled_error(op, &a.view(), &x, &y, alpha, beta, &rep.y_out);
    assert!(err < 50.0, "{op:?} {m}x{n} {cfg}: scaled error {err}");
}

fn configs() -> Vec<KernelConfig> {
    [(32, 1, 1), (32, 2, 2), (64, 4, 3), (64, 8, 1), (32, 16, 16)]
        .into_iter()
        .map(|(a, b, c)| KernelConfig::new(a, b, c).unwrap())
        .collect()
}

#[test]
fn gemv_all_modes_match_oracle() {
    for cfg in configs() {
        for (m, n) in [(1, 1), (33, 70), (128, 64), (100, 257)] {
            for op in [Op::GemvN, Op::GemvT, Op::GemvC] {
                check::<f32>(op, m, n, cfg, 1.5, -0.5, 1);
                check::<f64>(op, m, n, cfg, 1.0, 0.0, 2);
                check(op, m, n, cfg, Complex32::new(0.5, 1.0), Complex32::new(1.0, -1.0), 3);
                check(op, m, n, cfg, Complex64::new(-1.0, 0.25), Complex64::new(0.0, 0.0), 4);
            }
        }
    }
}

#[test]
fn symv_hemv_match_oracle_and_skip_unstored_triangle() {
    for cfg in configs() {
        for d in [1, 31, 64, 97, 200] {
            for op in [Op::SymvLower, Op::SymvUpper] {
                check::<f32>(op, d, d, cfg, 1.0, 1.0, 5);
                check::<f64>(op, d, d, cfg, -2.0, 0.0, 6);
            }
            for op in [Op::HemvLower, Op::HemvUpper, Op::SymvLower] {
                check(op, d, d, cfg, Complex32::new(1.0, 0.5), Complex32::new(0.5, 0.0), 7);
                check(op, d, d, cfg, Complex64::new(1.0, -1.0), Complex64::new(0.0, 0.0), 8);
            }
        }
    }
}

#[test]
fn launch_sequences() {
    let cfg = KernelConfig::new(32, 2, 2).unwrap();
    let a = Matrix::<f64>::zeros(64, 64);
    let x = vec![1.0; 64];
    let y = vec![1.0; 64];
    let run = |op, alpha, beta| execute(&KernelRequest::new(op, a.view(), &x, &y, alpha, beta, cfg)).unwrap().counters.kernels();
    assert_eq!(run(Op::GemvN, 1.0, 0.5), vec![KernelKind::Scal, KernelKind::GemvN]);
    assert_eq!(run(Op::GemvN, 1.0, 1.0), vec![KernelKind::Scal, KernelKind::GemvN]);
    assert_eq!(run(Op::GemvT, 0.0, 0.5), vec![KernelKind::Scal]);
    assert_eq!(run(Op::GemvN, 0.0, 1.0), vec![]);
    assert_eq!(run(Op::SymvUpper, 1.0, 0.5), vec![KernelKind::DiagBlock, KernelKind::SymvOffDiag]);
    assert_eq!(run(Op::SymvLower, 0.0, 2.0), vec![KernelKind::DiagBlock]);
}

#[test]
fn component_kernels_compose() {
    let cfg = KernelConfig::new(32, 4, 2).unwrap();
    let mut g = Operands::new(11);
    let a: Matrix<f64> = g.matrix(90, 90, 96).unwrap();
    let x = g.vector::<f64>(90);
    let y = g.vector::<f64>(90);
    let full = execute(&KernelRequest::new(Op::GemvN, a.view(), &x, &y, 2.0, 0.25, cfg)).unwrap();
    let scaled = run_scal(&y, 0.25).y_out;
    let acc = run_gemv_n(&KernelRequest::new(Op::GemvN, a.view(), &x, &scaled, 2.0, 0.25, cfg)).unwrap();
    assert_eq!(acc.y_out, full.y_out);
    assert!(run_gemv_t(&KernelRequest::new(Op::GemvN, a.view(), &x, &y, 1.0, 1.0, cfg)).is_err());

    let sym = execute(&KernelRequest::new(Op::SymvUpper, a.view(), &x, &y, 2.0, 0.25, cfg)).unwrap();
    let diag = run_diag_block(&KernelRequest::new(Op::SymvUpper, a.view(), &x, &y, 2.0, 0.25, cfg)).unwrap();
    let off = run_symv_offdiag(&KernelRequest::new(Op::SymvUpper, a.view(), &x, &diag.y_out, 2.0, 0.25, cfg)).unwrap();
    assert_eq!(off.y_out, sym.y_out);
}

#[test]
fn scal_zero_beta_kills_nan() {
    let rep = run_scal(&[f32::NAN, f32::INFINITY], 0.0);
    assert_eq!(rep.y_out, vec![0.0, 0.0]);
    let cfg = KernelConfig::new(32, 2, 1).unwrap();
    let a = Matrix::<f64>::from_fn(3, 3, |i, j| (i + j) as f64);
    let rep = execute(&KernelRequest::new(Op::SymvLower, a.view(), &[1.0; 3], &[f64::NAN; 3], 1.0, 0.0, cfg)).unwrap();
    assert!(rep.y_out.iter().all(|v| v.is_finite()));
}

#[test]
fn beta_one_still_writes() {
    let rep = run_scal(&[1.0f64; 10], 1.0);
    assert_eq!(rep.y_out, vec![1.0; 10]);
    assert_eq!(rep.counters.bytes_written, 80);
}

#[test]
fn invalid_requests_are_rejected() {
    let cfg = KernelConfig::new(32, 2, 1).unwrap();
    let a = Matrix::<f64>::zeros(4, 5);
    let err = execute(&KernelRequest::new(Op::GemvN, a.view(), &[0.0; 4], &[0.0; 4], 1.0, 0.0, cfg)).unwrap_err();
    assert!(err.to_string().contains("parameter 7"), "{err}");
    let err = execute(&KernelRequest::new(Op::SymvLower, a.view(), &[0.0; 4], &[0.0; 5], 1.0, 0.0, cfg)).unwrap_err();
    assert!(err.to_string().contains("square"), "{err}");
}

#[test]
fn aligned_and_misaligned_matrix_segments() {
    let cfg = KernelConfig::new(32, 2, 1).unwrap();
    let n = 16384;
    let layout = Layout { m: n, n, ld: n, row_offset: 0, col_offset: 0 };
    let c = trace_op(Op::GemvN, Precision::S, layout, Coefficients::GENERAL, &cfg, 128).unwrap();
    assert_eq!(c.ledger.matrix.segments, (n * n * 4 / 128) as u64);
    assert_eq!(c.flops, 536_903_680);
    let parent = Layout { m: n, n, ld: n, row_offset: 0, col_offset: 0 };
    let off = trace_op(Op::GemvN, Precision::S, parent.sub(1, 0, n - 1, n), Coefficients::GENERAL, &cfg, 128).unwrap();
    let ratio = off.ledger.matrix.segments as f64 / c.ledger.matrix.segments as f64;
    assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
    let spike = trace_op(Op::GemvN, Precision::S, parent.sub(5184, 0, n - 5184, n), Coefficients::GENERAL, &cfg, 128).unwrap();
    assert_eq!(spike.ledger.matrix.segments, spike.ledger.matrix.ideal_segments);
}

#[test]
fn trace_matches_execution() {
    let cfg = KernelConfig::new(64, 4, 3).unwrap();
    let mut g = Operands::new(3);
    let base: Matrix<Complex32> = g.matrix(150, 150, 160).unwrap();
    let view = base.view().submatrix(3, 5, 120, 140).unwrap();
    for op in [Op::GemvN, Op::GemvC] {
        let (xl, yl) = if op == Op::GemvN { (140, 120) } else { (120, 140) };
        let x = g.vector(xl);
        let y = g.vector(yl);
        let req = KernelRequest::new(op, view, &x, &y, Complex32::new(1.0, 1.0), Complex32::new(0.0, 0.0), cfg);
        let traced = trace_op(op, Precision::C, view.layout(), Coefficients::of(req.alpha, req.beta), &cfg, 128).unwrap();
        assert_eq!(execute(&req).unwrap().counters, traced);
    }
    let sq = base.view().submatrix(7, 7, 130, 130).unwrap();
    let x = g.vector(130);
    let y = g.vector(130);
    let req = KernelRequest::new(Op::HemvUpper, sq, &x, &y, Complex32::new(2.0, 0.0), Complex32::new(1.0, 0.0), cfg);
    let traced = trace_op(Op::HemvUpper, Precision::C, sq.layout(), Coefficients::of(req.alpha, req.beta), &cfg, 128).unwrap();
    assert_eq!(execute(&req).unwrap().counters, traced);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gemv_matches_oracle(m in 1usize..150, n in 1usize..150, ci in 0usize..5, seed in any::<u64>(), t in any::<bool>()) {
        let cfg = configs()[ci];
        let op = if t { Op::GemvT } else { Op::GemvN };
        check::<f64>(op, m, n, cfg, 0.75, -1.25, seed);
    }

    #[test]
    fn hemv_matches_oracle(d in 1usize..150, ci in 0usize..5, seed in any::<u64>(), lower in any::<bool>()) {
        let cfg = configs()[ci];
        let op = if lower { Op::HemvLower } else { Op::HemvUpper };
        check(op, d, d, cfg, Complex64::new(0.5, -0.5), Complex64::new(1.0, 1.0), seed);
    }

    #[test]
    fn every_segment_is_read_once_per_block(d in 1usize..200, nb_pow in 5u32..7, y in 1usize..5) {
        let nb = 1usize << nb_pow;
        let cfg = KernelConfig::new(nb, 1, y).unwrap();
        let layout = Layout { m: d, n: d, ld: d.next_multiple_of(32), row_offset: 0, col_offset: 0 };
        let c = trace_op(Op::GemvT, Precision::S, layout, Coefficients::GENERAL, &cfg, 128).unwrap();
        prop_assert_eq!(c.ledger.matrix.bytes, (d * d * 4) as u64);
        prop_assert_eq!(c.ledger.matrix.segments, c.ledger.matrix.ideal_segments);
    }
}
