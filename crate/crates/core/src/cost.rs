//! Memory-transaction counting, execution-round occupancy and predicted time.
//!
//! The round model assumes every SM runs exactly one TB at a time and TBs are
//! balanced. A launch therefore takes `ceil(tbs / sms)` rounds of equal wall
//! time, and the last round runs at `tb_r / sms` throughput. Utilization is
//! the fraction of SM-rounds doing work, `tbs / (rounds * sms)`, so the
//! predicted time of a bandwidth-bound launch is `bytes / bandwidth /
//! utilization`. This is a first-order model: it ranks configurations, it does
//! not predict wall-clock time.

use std::collections::BTreeMap;

use crate::device::DeviceProfile;
use crate::kernel::{Counters, KernelRequest, LaunchRecord};
use crate::precision::Scalar;

/// Distinct `segment_bytes`-aligned windows covering the byte range of
/// `elements` consecutive elements starting at element `start`.
pub fn count_warp_transactions(
    start: usize,
    elements: usize,
    element_bytes: usize,
    segment_bytes: usize,
) -> u64 {
    if elements == 0 {
        return 0;
    }
    let first = start * element_bytes;
    let last = (start + elements) * element_bytes - 1;
    (last / segment_bytes - first / segment_bytes + 1) as u64
}

/// Segments a request of `bytes` would need if it started on a segment boundary.
pub fn aligned_segments(bytes: usize, segment_bytes: usize) -> u64 {
    bytes.div_ceil(segment_bytes) as u64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTotals {
    pub requests: u64,
    pub bytes: u64,
    pub segments: u64,
    /// Segments the same requests would need if each were aligned.
    pub ideal_segments: u64,
}

impl PhaseTotals {
    fn add(&mut self, other: &PhaseTotals) {
        self.requests += other.requests;
        self.bytes += other.bytes;
        self.segments += other.segments;
        self.ideal_segments += other.ideal_segments;
    }

    fn record(&mut self, count: u64, bytes: u64, segments: u64, ideal: u64) {
        self.requests += count;
        self.bytes += count * bytes;
        self.segments += count * segments;
        self.ideal_segments += count * ideal;
    }
}

/// Shape of one matrix memory request: bytes asked for and segments touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RequestShape {
    pub bytes: u64,
    pub segments: u64,
}

/// Transaction accounting for one or more kernel launches.
///
/// A matrix request is the set of elements one column of a block contributes
/// to a TB's two half-block fetches. Vector traffic is counted once per launch
/// and is assumed aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionLedger {
    pub segment_bytes: usize,
    pub matrix: PhaseTotals,
    pub x_read: PhaseTotals,
    pub y_read: PhaseTotals,
    pub y_write: PhaseTotals,
    /// Histogram of matrix requests by shape.
    pub breakdown: BTreeMap<RequestShape, u64>,
}

impl TransactionLedger {
    pub fn new(segment_bytes: usize) -> Self {
        Self {
            segment_bytes,
            matrix: PhaseTotals::default(),
            x_read: PhaseTotals::default(),
            y_read: PhaseTotals::default(),
            y_write: PhaseTotals::default(),
            breakdown: BTreeMap::new(),
        }
    }

    pub(crate) fn record_matrix(&mut self, count: u64, start: usize, elements: usize, element_bytes: usize) {
        if elements == 0 || count == 0 {
            return;
        }
        let bytes = elements * element_bytes;
        let segments = count_warp_transactions(start, elements, element_bytes, self.segment_bytes);
        let ideal = aligned_segments(bytes, self.segment_bytes);
        self.matrix.record(count, bytes as u64, segments, ideal);
        *self
            .breakdown
            .entry(RequestShape {
                bytes: bytes as u64,
                segments,
            })
            .or_default() += count;
    }

    pub(crate) fn record_vector(&mut self, phase: VectorPhase, elements: usize, element_bytes: usize) {
        if elements == 0 {
            return;
        }
        let bytes = elements * element_bytes;
        let segs = aligned_segments(bytes, self.segment_bytes);
        let totals = match phase {
            VectorPhase::XRead => &mut self.x_read,
            VectorPhase::YRead => &mut self.y_read,
            VectorPhase::YWrite => &mut self.y_write,
        };
        totals.record(1, bytes as u64, segs, segs);
    }

    pub fn merge(&mut self, other: &TransactionLedger) {
        self.matrix.add(&other.matrix);
        self.x_read.add(&other.x_read);
        self.y_read.add(&other.y_read);
        self.y_write.add(&other.y_write);
        for (shape, count) in &other.breakdown {
            *self.breakdown.entry(*shape).or_default() += count;
        }
    }

    pub fn total_segments(&self) -> u64 {
        self.matrix.segments + self.x_read.segments + self.y_read.segments + self.y_write.segments
    }

    pub fn bytes_read(&self) -> u64 {
        self.matrix.bytes + self.x_read.bytes + self.y_read.bytes
    }

    pub fn bytes_written(&self) -> u64 {
        self.y_write.bytes
    }

    /// Matrix segments relative to the aligned count; 1.0 means fully coalesced.
    pub fn matrix_inflation(&self) -> f64 {
        if self.matrix.ideal_segments == 0 {
            1.0
        } else {
            self.matrix.segments as f64 / self.matrix.ideal_segments as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VectorPhase {
    XRead,
    YRead,
    YWrite,
}

/// Transaction ledger of a request, computed from the access trace alone
/// without doing any arithmetic.
pub fn ledger_for_request<T: Scalar>(req: &KernelRequest<'_, T>) -> crate::error::Result<TransactionLedger> {
    Ok(crate::kernel::trace_request(req)?.ledger)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundModel {
    pub tb_count: usize,
    pub sm_count: usize,
    pub full_rounds: usize,
    /// TBs left for the final partial round.
    pub tb_r: usize,
    pub utilization: f64,
}

impl RoundModel {
    pub fn new(tb_count: usize, sm_count: usize) -> Self {
        assert!(sm_count > 0, "sm_count must be positive");
        let full_rounds = tb_count / sm_count;
        let tb_r = tb_count % sm_count;
        let rounds = full_rounds + usize::from(tb_r > 0);
        let utilization = if rounds == 0 {
            1.0
        } else {
            tb_count as f64 / (rounds * sm_count) as f64
        };
        Self {
            tb_count,
            sm_count,
            full_rounds,
            tb_r,
            utilization,
        }
    }

    pub fn rounds(&self) -> usize {
        self.full_rounds + usize::from(self.tb_r > 0)
    }
}

pub fn round_model(tb_count: usize, profile: &DeviceProfile) -> RoundModel {
    RoundModel::new(tb_count, profile.sm_count)
}

/// Predicted seconds for the traffic in `counters` at the profile's sustained
/// bandwidth, stretched by the round model's utilization.
pub fn predict_time(counters: &Counters, model: &RoundModel, profile: &DeviceProfile) -> f64 {
    let bytes = counters.transactions as f64 * profile.segment_bytes as f64;
    bytes / (profile.sustained_bandwidth() * 1e9) / model.utilization
}

/// Round model of the launch that moves the most data.
pub fn dominant_round_model(counters: &Counters, profile: &DeviceProfile) -> RoundModel {
    let tbs = counters
        .launches
        .iter()
        .max_by_key(|l: &&LaunchRecord| l.ledger.total_segments())
        .map_or(counters.tb_count as usize, |l| l.tb_count);
    round_model(tbs, profile)
}

/// Model-predicted Gflop/s of a run.
pub fn predicted_gflops(counters: &Counters, profile: &DeviceProfile) -> f64 {
    let t = predict_time(counters, &dominant_round_model(counters, profile), profile);
    if t == 0.0 {
        0.0
    } else {
        counters.flops as f64 / t / 1e9
    }
}
