//! Low-pass FIR: windowed-sinc design, coefficient quantization and an
//! exact integer direct-form filter applied identically to I and Q.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Result};
use crate::iq::{signed_range, IqFrame, StageDiagnostics};
use crate::PARALLEL;

pub const DEFAULT_TAPS: usize = 64;
pub const DEFAULT_COEFF_BITS: u32 = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignWindow {
    #[default]
    Hamming,
    Blackman,
    Rectangular,
}

impl DesignWindow {
    fn weight(self, k: usize, taps: usize) -> f64 {
        if taps == 1 {
            return 1.0;
        }
        let x = 2.0 * PI * k as f64 / (taps - 1) as f64;
        match self {
            DesignWindow::Hamming => 0.54 - 0.46 * x.cos(),
            DesignWindow::Blackman => 0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos(),
            DesignWindow::Rectangular => 1.0,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Windowed-sinc low-pass prototype with unity DC gain.
///
/// Only the first half is evaluated; the second half is its mirror image,
/// so the result is exactly symmetric.
pub fn design_lowpass(num_taps: usize, cutoff_hz: f64, fs_hz: f64, window: DesignWindow) -> Result<Vec<f64>> {
    if num_taps == 0 {
        return Err(domain("num_taps must be >= 1"));
    }
    if !(fs_hz > 0.0 && cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0) {
        return Err(domain(format!("cutoff {cutoff_hz} Hz must lie in (0, fs/2) for fs = {fs_hz} Hz")));
    }
    let fc = cutoff_hz / fs_hz;
    let center = (num_taps - 1) as f64 / 2.0;
    let mut h = vec![0.0; num_taps];
    for k in 0..num_taps.div_ceil(2) {
        let v = 2.0 * fc * sinc(2.0 * fc * (k as f64 - center)) * window.weight(k, num_taps);
        h[k] = v;
        h[num_taps - 1 - k] = v;
    }
    let dc: f64 = h.iter().sum();
    if dc == 0.0 {
        return Err(domain("designed filter has zero DC gain"));
    }
    Ok(h.into_iter().map(|v| v / dc).collect())
}

/// Largest coefficient magnitude for `bits`-bit signed coefficients.
pub fn coeff_limit(bits: u32) -> i32 {
    (1 << (bits - 1)) - 1
}

/// Scale so the largest magnitude maps to `2^(bits-1) - 1` and round half
/// away from zero. Symmetric inputs are quantized on one half and mirrored.
pub fn quantize_coeffs(coeffs: &[f64], coeff_bits: u32) -> Result<Vec<i32>> {
    if coeffs.is_empty() {
        return Err(domain("no coefficients to quantize"));
    }
    if !(2..=24).contains(&coeff_bits) {
        return Err(domain(format!("unsupported coefficient width {coeff_bits}")));
    }
    let peak = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if peak == 0.0 || !peak.is_finite() {
        return Err(domain("coefficients are all zero or not finite"));
    }
    let scale = coeff_limit(coeff_bits) as f64 / peak;
    let q = |c: f64| (c * scale).round() as i32;
    let n = coeffs.len();
    let symmetric = (0..n / 2).all(|k| coeffs[k] == coeffs[n - 1 - k]);
    if symmetric {
        let mut out = vec![0; n];
        for k in 0..n.div_ceil(2) {
            out[k] = q(coeffs[k]);
            out[n - 1 - k] = out[k];
        }
        Ok(out)
    } else {
        Ok(coeffs.iter().map(|&c| q(c)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirSpec {
    pub num_taps: usize,
    pub coeff_bits: u32,
    pub cutoff_hz: f64,
    pub design_window: DesignWindow,
    /// Unquantized coefficients on the same scale as `coeffs_q`.
    pub coeffs: Vec<f64>,
    pub coeffs_q: Vec<i32>,
}

impl FirSpec {
    /// Design and quantize a low-pass filter.
    pub fn design(num_taps: usize, coeff_bits: u32, cutoff_hz: f64, fs_hz: f64, window: DesignWindow) -> Result<Self> {
        let proto = design_lowpass(num_taps, cutoff_hz, fs_hz, window)?;
        let coeffs_q = quantize_coeffs(&proto, coeff_bits)?;
        let peak = proto.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let scale = coeff_limit(coeff_bits) as f64 / peak;
        Ok(Self {
            num_taps,
            coeff_bits,
            cutoff_hz,
            design_window: window,
            coeffs: proto.iter().map(|c| c * scale).collect(),
            coeffs_q,
        })
    }

    /// 64 taps, 10-bit, Hamming, cutoff fs/8.
    pub fn default_for(fs_hz: f64) -> Result<Self> {
        Self::design(DEFAULT_TAPS, DEFAULT_COEFF_BITS, fs_hz / 8.0, fs_hz, DesignWindow::Hamming)
    }

    /// Use an imported integer coefficient set as-is.
    pub fn from_quantized(coeffs_q: Vec<i32>, coeff_bits: u32, cutoff_hz: f64) -> Result<Self> {
        let spec = Self {
            num_taps: coeffs_q.len(),
            coeff_bits,
            cutoff_hz,
            design_window: DesignWindow::Rectangular,
            coeffs: coeffs_q.iter().map(|&c| c as f64).collect(),
            coeffs_q,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs_q.is_empty() || self.coeffs_q.len() != self.num_taps || self.coeffs.len() != self.num_taps {
            return Err(validation("coefficient count must equal num_taps (>= 1)"));
        }
        if !(2..=24).contains(&self.coeff_bits) {
            return Err(validation(format!("unsupported coefficient width {}", self.coeff_bits)));
        }
        let lim = coeff_limit(self.coeff_bits);
        if self.coeffs_q.iter().any(|c| c.abs() > lim) {
            return Err(validation(format!("coefficients must lie within +/-{lim}")));
        }
        let n = self.num_taps;
        if (0..n / 2).any(|k| self.coeffs_q[k] != self.coeffs_q[n - 1 - k]) {
            return Err(validation("coefficients must be symmetric (linear phase)"));
        }
        Ok(())
    }

    /// Bits added on top of the input width: coefficient width plus
    /// `ceil(log2(taps))` of accumulation growth.
    pub fn growth_bits(&self) -> u32 {
        self.coeff_bits + (self.num_taps as f64).log2().ceil() as u32
    }

    pub fn output_width(&self, input_width: u32) -> u32 {
        input_width + self.growth_bits()
    }

    pub fn dc_gain(&self) -> i64 {
        self.coeffs_q.iter().map(|&c| c as i64).sum()
    }
}

/// Delay lines holding the previous `num_taps - 1` inputs of I and Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirState {
    i: Vec<i64>,
    q: Vec<i64>,
}

impl FirState {
    pub fn new(spec: &FirSpec) -> Self {
        let n = spec.num_taps.saturating_sub(1);
        Self {
            i: vec![0; n],
            q: vec![0; n],
        }
    }
}

fn convolve(
    history: &mut Vec<i64>,
    input: &[i64; PARALLEL],
    coeffs: &[i32],
    limit: (i64, i64),
    diag: &mut StageDiagnostics,
) -> [i64; PARALLEL] {
    let taps = coeffs.len();
    let mut buf = Vec::with_capacity(history.len() + PARALLEL);
    buf.extend_from_slice(history);
    buf.extend_from_slice(input);
    let mut out = [0i64; PARALLEL];
    for (p, y) in out.iter_mut().enumerate() {
        let newest = taps - 1 + p;
        let mut acc = 0i64;
        for (k, &c) in coeffs.iter().enumerate() {
            acc += c as i64 * buf[newest - k];
        }
        diag.multiplications += taps as u64;
        diag.additions += taps as u64 - 1;
        if acc < limit.0 || acc > limit.1 {
            diag.overflow_events += 1;
        }
        *y = acc;
    }
    history.clear();
    history.extend_from_slice(&buf[PARALLEL..]);
    out
}

/// Filter one frame with carried state. Accumulation is exact; the output
/// width is the input width plus [`FirSpec::growth_bits`] (36 bits for a
/// 20-bit input and the default filter).
pub fn filter_frame(
    state: &mut FirState,
    input: &IqFrame,
    spec: &FirSpec,
    diag: &mut StageDiagnostics,
) -> Result<IqFrame> {
    let width = spec.output_width(input.bit_width);
    if width > 62 {
        return Err(validation(format!("FIR output width {width} exceeds 62 bits")));
    }
    if state.i.len() + 1 != spec.num_taps {
        return Err(validation("FIR state does not match the filter length"));
    }
    let limit = signed_range(width);
    let i = convolve(&mut state.i, &input.i, &spec.coeffs_q, limit, diag);
    let q = convolve(&mut state.q, &input.q, &spec.coeffs_q, limit, diag);
    diag.frames += 1;
    Ok(IqFrame {
        frame_index: input.frame_index,
        i,
        q,
        bit_width: width,
    })
}
