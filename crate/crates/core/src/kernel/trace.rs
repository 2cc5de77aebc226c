//! Memory-access recording for simulated launches.
//!
//! A TB fetches a block as two half blocks, both issued by the same thread
//! columns one phase apart. The lower half of a column chunk hits the same
//! segments the upper-half fetch opened whenever both fit in one segment, so
//! traffic is recorded once per block, as one request per column chunk of
//! the block.

use super::plan::BlockRect;
use crate::cost::{TransactionLedger, VectorPhase};
use crate::matrix::Layout;
use crate::precision::Precision;

pub(crate) struct Tracer {
    element_bytes: usize,
    segment_bytes: usize,
    pub ledger: TransactionLedger,
}

impl Tracer {
    pub fn new(precision: Precision, segment_bytes: usize) -> Self {
        Self {
            element_bytes: precision.element_bytes(),
            segment_bytes,
            ledger: TransactionLedger::new(segment_bytes),
        }
    }

    /// Records the column chunks of `rect`, given in `layout`'s frame.
    pub fn block(&mut self, layout: &Layout, rect: &BlockRect) {
        if rect.rows == 0 || rect.cols == 0 {
            return;
        }
        let eb = self.element_bytes;
        if (layout.ld * eb).is_multiple_of(self.segment_bytes) {
            // Every column starts at the same alignment.
            let start = layout.linear_index(rect.row0, rect.col0);
            self.ledger.record_matrix(rect.cols as u64, start, rect.rows, eb);
        } else {
            for c in rect.col0..rect.col0 + rect.cols {
                let start = layout.linear_index(rect.row0, c);
                self.ledger.record_matrix(1, start, rect.rows, eb);
            }
        }
    }

    pub fn vector(&mut self, phase: VectorPhase, elements: usize) {
        self.ledger.record_vector(phase, elements, self.element_bytes);
    }

    pub fn finish(self) -> TransactionLedger {
        self.ledger
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_path_matches_per_column_walk() {
        for (ld, ro) in [(128usize, 0usize), (128, 1), (100, 3), (96, 17)] {
            let layout = Layout { m: 64, n: 64, ld, row_offset: ro, col_offset: 2 };
            let rect = BlockRect::new(64, 64, 32, 1, 1);
            let mut fast = Tracer::new(Precision::S, 128);
            fast.block(&layout, &rect);
            let mut slow = TransactionLedger::new(128);
            for c in 32..64 {
                slow.record_matrix(1, layout.linear_index(32, c), 32, 4);
            }
            assert_eq!(fast.ledger.matrix, slow.matrix, "ld={ld} ro={ro}");
        }
    }
}
