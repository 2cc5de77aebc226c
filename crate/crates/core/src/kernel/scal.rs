use super::trace::Tracer;
use super::{KernelKind, LaunchRecord, TbRecord};
use crate::cost::VectorPhase;
use crate::precision::{Precision, Scalar};

/// Elements of `y` scaled by one SCAL TB.
pub const SCAL_TB_ELEMENTS: usize = 256;

fn scal_record(len: usize, beta_zero: bool, precision: Precision, segment_bytes: usize) -> LaunchRecord {
    let mut rec = LaunchRecord::new(KernelKind::Scal, segment_bytes);
    let mut tracer = Tracer::new(precision, segment_bytes);
    if !beta_zero {
        tracer.vector(VectorPhase::YRead, len);
        rec.flops = len as u64 * precision.flops_per_mul();
    }
    tracer.vector(VectorPhase::YWrite, len);
    for t in 0..len.div_ceil(SCAL_TB_ELEMENTS) {
        let start = t * SCAL_TB_ELEMENTS;
        rec.push_tb(TbRecord {
            x_coord: t,
            y_coord: 0,
            start,
            workload: SCAL_TB_ELEMENTS.min(len - start),
            reductions: 0,
            atomic_adds: 0,
        });
    }
    rec.ledger = tracer.finish();
    rec
}

/// `y <- beta * y`; a zero beta stores zeros without reading `y`.
pub(crate) fn launch_scal<T: Scalar>(y: &mut [T], beta: T, segment_bytes: usize) -> LaunchRecord {
    let beta_zero = beta.is_zero();
    for v in y.iter_mut() {
        *v = if beta_zero { T::zero() } else { beta * *v };
    }
    scal_record(y.len(), beta_zero, T::PRECISION, segment_bytes)
}

pub(crate) fn trace_scal(
    len: usize,
    element_bytes: usize,
    beta_zero: bool,
    precision: Precision,
    segment_bytes: usize,
) -> LaunchRecord {
    debug_assert_eq!(element_bytes, precision.element_bytes());
    scal_record(len, beta_zero, precision, segment_bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_beta_clears_nan() {
        let mut y = vec![f64::NAN, 1.0, 2.0];
        let rec = launch_scal(&mut y, 0.0, 128);
        assert_eq!(y, vec![0.0; 3]);
        assert_eq!(rec.ledger.y_read.bytes, 0);
        assert_eq!(rec.ledger.y_write.bytes, 24);
    }

    #[test]
    fn tb_count_rounds_up() {
        let mut y = vec![1.0f32; SCAL_TB_ELEMENTS + 1];
        let rec = launch_scal(&mut y, 2.0, 128);
        assert_eq!(rec.tb_count, 2);
        assert_eq!(rec.tbs[1].workload, 1);
        assert!(y.iter().all(|v| *v == 2.0));
    }
}
