//! Quad-channel 12-bit ADC: front-end attenuation, quantization and
//! batching into 8-sample parallel frames.
//!
//! Full scale is normalized to 1.0, which maps to code 2048; the top code
//! is 2047, so +1.0 clips by one LSB.

use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Result};
use crate::PARALLEL;

pub const ADC_BITS: u32 = 12;
pub const CODE_MAX: i16 = 2047;
pub const CODE_MIN: i16 = -2048;
pub const DEFAULT_FS_HZ: f64 = 1.6e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdcConfig {
    pub fs_hz: f64,
    /// Analog amplitude mapped to code 2048.
    pub fullscale: f64,
    /// `(frequency_hz, attenuation_db)` points, interpolated linearly in dB.
    pub frontend_curve: Option<Vec<(f64, f64)>>,
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self {
            fs_hz: DEFAULT_FS_HZ,
            fullscale: 1.0,
            frontend_curve: None,
        }
    }
}

impl AdcConfig {
    pub fn with_fs(fs_hz: f64) -> Self {
        Self {
            fs_hz,
            ..Self::default()
        }
    }

    pub fn bits(&self) -> u32 {
        ADC_BITS
    }

    pub fn parallel_factor(&self) -> usize {
        PARALLEL
    }

    /// Frame clock, `fs / P` (200 MHz at the default rate).
    pub fn frame_clock_hz(&self) -> f64 {
        self.fs_hz / PARALLEL as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(validation("adc fs_hz must be positive"));
        }
        if !(self.fullscale.is_finite() && self.fullscale > 0.0) {
            return Err(validation("adc fullscale must be positive"));
        }
        if let Some(curve) = &self.frontend_curve {
            if curve.is_empty() {
                return Err(validation("frontend_curve must not be empty"));
            }
            if curve.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(validation("frontend_curve frequencies must be strictly increasing"));
            }
            if curve.iter().any(|(f, a)| !f.is_finite() || !a.is_finite()) {
                return Err(validation("frontend_curve entries must be finite"));
            }
        }
        Ok(())
    }

    /// Attenuation in dB at `freq_hz`; flat (0 dB) without a curve, held
    /// constant beyond the table ends.
    pub fn attenuation_db(&self, freq_hz: f64) -> f64 {
        let Some(curve) = self.frontend_curve.as_deref() else {
            return 0.0;
        };
        let first = curve[0];
        let last = curve[curve.len() - 1];
        if freq_hz <= first.0 {
            return first.1;
        }
        if freq_hz >= last.0 {
            return last.1;
        }
        let i = curve.partition_point(|p| p.0 <= freq_hz);
        let (f0, a0) = curve[i - 1];
        let (f1, a1) = curve[i];
        a0 + (a1 - a0) * (freq_hz - f0) / (f1 - f0)
    }
}

/// Mid-tread quantizer: `round(value * 2048)` clamped to the 12-bit range,
/// rounding half away from zero.
pub fn quantize(value: f64, cfg: &AdcConfig) -> Result<i16> {
    if value.is_nan() {
        return Err(domain("cannot quantize NaN"));
    }
    let scaled = (value / cfg.fullscale * 2048.0).round();
    Ok(scaled.clamp(CODE_MIN as f64, CODE_MAX as f64) as i16)
}

/// One frame clock of ADC output: `P` samples for every channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelFrame {
    pub frame_index: u64,
    /// `samples[channel][slot]`.
    pub samples: Vec<[i16; PARALLEL]>,
}

impl ChannelFrame {
    pub fn num_channels(&self) -> usize {
        self.samples.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub fs_hz: f64,
    /// Carrier of the captured signal, used for the front-end curve and for
    /// checking the fs/4 IF placement downstream.
    pub carrier_hz: f64,
    pub num_channels: usize,
    pub frames: Vec<ChannelFrame>,
    /// Zero samples appended to the tail to complete the last frame.
    pub padded_samples: usize,
}

impl Capture {
    pub fn num_samples(&self) -> usize {
        self.frames.len() * PARALLEL
    }

    /// Samples of one channel in stream order (including tail padding).
    pub fn channel(&self, ch: usize) -> Vec<i16> {
        self.frames
            .iter()
            .flat_map(|f| f.samples[ch].iter().copied())
            .collect()
    }

    /// Build a capture directly from integer codes, zero-padding the tail.
    pub fn from_codes(streams: &[Vec<i16>], fs_hz: f64, carrier_hz: f64) -> Result<Self> {
        let len = check_lengths(streams.iter().map(Vec::len))?;
        let frames_n = len.div_ceil(PARALLEL);
        let mut frames = Vec::with_capacity(frames_n);
        for f in 0..frames_n {
            let samples = streams
                .iter()
                .map(|s| {
                    let mut slot = [0i16; PARALLEL];
                    for (p, v) in slot.iter_mut().enumerate() {
                        if let Some(&c) = s.get(f * PARALLEL + p) {
                            if !(CODE_MIN..=CODE_MAX).contains(&c) {
                                return Err(validation(format!("code {c} outside 12-bit range")));
                            }
                            *v = c;
                        }
                    }
                    Ok(slot)
                })
                .collect::<Result<Vec<_>>>()?;
            frames.push(ChannelFrame {
                frame_index: f as u64,
                samples,
            });
        }
        Ok(Self {
            fs_hz,
            carrier_hz,
            num_channels: streams.len(),
            frames,
            padded_samples: frames_n * PARALLEL - len,
        })
    }
}

fn check_lengths(mut lens: impl Iterator<Item = usize>) -> Result<usize> {
    let first = lens.next().ok_or_else(|| validation("capture needs at least one channel"))?;
    if lens.any(|l| l != first) {
        return Err(validation("all channel streams must have the same length"));
    }
    if first == 0 {
        return Err(validation("channel streams must not be empty"));
    }
    Ok(first)
}

/// Attenuate, quantize and frame analog streams.
pub fn capture(streams: &[Vec<f64>], cfg: &AdcConfig, carrier_hz: f64) -> Result<Capture> {
    cfg.validate()?;
    check_lengths(streams.iter().map(Vec::len))?;
    let gain = 10f64.powf(-cfg.attenuation_db(carrier_hz) / 20.0);
    let codes = streams
        .iter()
        .map(|s| s.iter().map(|&v| quantize(v * gain, cfg)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Capture::from_codes(&codes, cfg.fs_hz, carrier_hz)
}
