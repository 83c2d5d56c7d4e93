//! Complex down-conversion by exactly fs/4.
//!
//! With the IF at a quarter of the sample rate the oscillator sequences
//! collapse to `cos = {1, 0, -1, 0}` and `sin = {0, 1, 0, -1}`, so mixing by
//! `exp(-j pi n / 2)` is a rotation by a multiple of 90 degrees: a swap of
//! I and Q plus sign inversions. No multipliers are needed.

use crate::error::{validation, Result};
use crate::iq::{signed_range, IqFrame, StageDiagnostics};
use crate::PARALLEL;

/// Position in the four-sample mixing sequence. Sample `k` of a stream
/// always uses phase `k mod 4`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct DdcPhase(u8);

impl DdcPhase {
    pub fn new(index: u64) -> Self {
        Self((index % 4) as u8)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn advance(self, samples: u64) -> Self {
        Self(((self.0 as u64 + samples) % 4) as u8)
    }
}

/// Negate within a `bits` wide signed range; the most negative value
/// saturates to the most positive one.
fn negate(v: i64, bits: u32, diag: &mut StageDiagnostics) -> i64 {
    let (lo, hi) = signed_range(bits);
    if v == lo {
        diag.overflow_events += 1;
        hi
    } else {
        -v
    }
}

/// Rotate `(re, im)` by `exp(-j pi n / 2)` for phase `n`:
///
/// ```text
/// I' =  re cos(pi n/2) + im sin(pi n/2)
/// Q' = -re sin(pi n/2) + im cos(pi n/2)
/// ```
pub fn mix_sample(re: i64, im: i64, phase: DdcPhase, bits: u32, diag: &mut StageDiagnostics) -> (i64, i64) {
    match phase.0 {
        0 => (re, im),
        1 => (im, negate(re, bits, diag)),
        2 => (negate(re, bits, diag), negate(im, bits, diag)),
        _ => (negate(im, bits, diag), re),
    }
}

/// Down-convert one frame, returning the phase for the next frame.
///
/// Works at any declared width up to 36 bits; the output keeps the input
/// width (no bit growth).
pub fn ddc_frame(input: &IqFrame, phase: DdcPhase, diag: &mut StageDiagnostics) -> Result<(IqFrame, DdcPhase)> {
    if input.bit_width == 0 || input.bit_width > 36 {
        return Err(validation(format!("unsupported DDC input width {}", input.bit_width)));
    }
    let mut out = IqFrame::zeroed(input.frame_index, input.bit_width);
    let mut ph = phase;
    for p in 0..PARALLEL {
        let (i, q) = mix_sample(input.i[p], input.q[p], ph, input.bit_width, diag);
        out.i[p] = i;
        out.q[p] = q;
        ph = ph.advance(1);
    }
    diag.frames += 1;
    Ok((out, ph))
}
