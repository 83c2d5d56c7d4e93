//! Complex fixed-point frames passed between the digital stages, and the
//! per-stage diagnostic counters.

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::PARALLEL;

/// `P` parallel complex samples at a declared signed bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IqFrame {
    pub frame_index: u64,
    pub i: [i64; PARALLEL],
    pub q: [i64; PARALLEL],
    pub bit_width: u32,
}

impl IqFrame {
    pub fn zeroed(frame_index: u64, bit_width: u32) -> Self {
        Self {
            frame_index,
            i: [0; PARALLEL],
            q: [0; PARALLEL],
            bit_width,
        }
    }

    /// Checks every component against the declared width.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = signed_range(self.bit_width);
        if self.i.iter().chain(&self.q).any(|v| !(lo..=hi).contains(v)) {
            return Err(validation(format!(
                "frame {} has samples outside the {}-bit range",
                self.frame_index, self.bit_width
            )));
        }
        Ok(())
    }
}

/// Inclusive range of a two's-complement integer of `bits` bits.
pub const fn signed_range(bits: u32) -> (i64, i64) {
    let half = 1i64 << (bits - 1);
    (-half, half - 1)
}

/// Sign-extend the low `bits` bits of `v`.
pub const fn wrap_signed(v: i64, bits: u32) -> i64 {
    let shift = 64 - bits;
    (v << shift) >> shift
}

/// Counters accumulated by one stage over a capture.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub frames: u64,
    /// Window overflows, saturations or accumulator overflows, depending on
    /// the stage.
    pub overflow_events: u64,
    pub multiplications: u64,
    pub additions: u64,
}

impl StageDiagnostics {
    pub fn merge(&mut self, other: &StageDiagnostics) {
        self.frames += other.frames;
        self.overflow_events += other.overflow_events;
        self.multiplications += other.multiplications;
        self.additions += other.additions;
    }
}

/// Flatten frames into stream-ordered `(i, q)` pairs.
pub fn flatten(frames: &[IqFrame]) -> Vec<(i64, i64)> {
    frames
        .iter()
        .flat_map(|f| f.i.iter().copied().zip(f.q.iter().copied()))
        .collect()
}
