//! End-to-end receiver chains over an ADC capture.
//!
//! * [`run_proposed`]: beamform, fs/4 DDC, FIR on the single combined stream.
//! * [`run_standard`]: fs/4 DDC and FIR per channel, then complex weights and
//!   channel sum.
//! * [`run_float_oracle`]: either dataflow in `f64` with unquantized weights
//!   and coefficients, on the same numeric scale as the fixed-point output.
//!
//! Both fixed-point chains emit 36-bit samples scaled by `2^-lsb_offset`
//! relative to the exact weighted, filtered sum, so they can be compared
//! sample for sample.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adc::Capture;
use crate::array::ArrayConfig;
use crate::beamformer::{beamform_frame, ComplexWeightSet, TruncationWindow};
use crate::ddc::{ddc_frame, DdcPhase};
use crate::error::{validation, Result};
use crate::fir::{filter_frame, FirSpec, FirState};
use crate::iq::{signed_range, wrap_signed, IqFrame, StageDiagnostics};
use crate::plan::nyquist_zone;
use crate::resources::Architecture;
use crate::PARALLEL;

/// ADC sample width.
const ADC_WIDTH: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Fixed,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub weights: ComplexWeightSet,
    /// Unquantized weights for the float oracle, in the same integer units
    /// as `weights` (2047 = 1.0).
    pub ideal_weights: Vec<Complex64>,
    pub window: TruncationWindow,
    pub fir: FirSpec,
}

impl ChainConfig {
    /// Explicit weights; the oracle uses them unrounded as given.
    pub fn new(weights: ComplexWeightSet, window: TruncationWindow, fir: FirSpec) -> Result<Self> {
        let ideal_weights = weights.weights.iter().map(|w| w.to_complex()).collect();
        let cfg = Self {
            weights,
            ideal_weights,
            window,
            fir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Weights steered to `theta`, MSB-aligned window, and `fir`.
    pub fn steered(array: &ArrayConfig, theta: f64, fir: FirSpec) -> Result<Self> {
        let cfg = Self {
            weights: ComplexWeightSet::steered(array, theta)?,
            ideal_weights: ComplexWeightSet::steered_ideal(array, theta)?,
            window: TruncationWindow::msb_aligned(array.num_elements),
            fir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.fir.validate()?;
        if self.ideal_weights.len() != self.weights.len() {
            return Err(validation("ideal weight count differs from quantized weight count"));
        }
        Ok(())
    }

    pub fn warmup_samples(&self) -> usize {
        self.fir.num_taps - 1
    }

    fn check_capture(&self, capture: &Capture) -> Result<()> {
        if capture.num_channels != self.weights.len() {
            return Err(validation(format!(
                "capture has {} channels but {} weights are configured",
                capture.num_channels,
                self.weights.len()
            )));
        }
        let plan = nyquist_zone(capture.carrier_hz, capture.fs_hz)?;
        let quarter = capture.fs_hz / 4.0;
        if (plan.alias_if_hz - quarter).abs() > 1e-9 * quarter {
            return Err(validation(format!(
                "fs/4 down-conversion needs the IF at {quarter} Hz, carrier aliases to {} Hz",
                plan.alias_if_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub beamformer: StageDiagnostics,
    pub ddc: StageDiagnostics,
    pub fir: StageDiagnostics,
}

impl ChainDiagnostics {
    pub fn total_overflows(&self) -> u64 {
        self.beamformer.overflow_events + self.ddc.overflow_events + self.fir.overflow_events
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub architecture: Architecture,
    pub frames: Vec<IqFrame>,
    pub bit_width: u32,
    /// Leading samples still inside the FIR transient.
    pub warmup_samples: usize,
    pub diagnostics: ChainDiagnostics,
}

impl ChainOutput {
    pub fn samples(&self) -> Vec<Complex64> {
        self.frames
            .iter()
            .flat_map(|f| f.i.iter().zip(&f.q).map(|(&i, &q)| Complex64::new(i as f64, q as f64)))
            .collect()
    }
}

pub fn run_proposed(capture: &Capture, cfg: &ChainConfig) -> Result<ChainOutput> {
    cfg.check_capture(capture)?;
    let mut diag = ChainDiagnostics::default();
    let mut phase = DdcPhase::default();
    let mut state = FirState::new(&cfg.fir);
    let mut frames = Vec::with_capacity(capture.frames.len());
    for frame in &capture.frames {
        let y = beamform_frame(frame, &cfg.weights, &cfg.window, &mut diag.beamformer)?;
        let (mixed, next) = ddc_frame(&y, phase, &mut diag.ddc)?;
        phase = next;
        frames.push(filter_frame(&mut state, &mixed, &cfg.fir, &mut diag.fir)?);
    }
    Ok(ChainOutput {
        architecture: Architecture::Proposed,
        bit_width: cfg.fir.output_width(TruncationWindow::WIDTH),
        frames,
        warmup_samples: cfg.warmup_samples(),
        diagnostics: diag,
    })
}

/// Per-channel DDC (12-bit) and FIR (28-bit), then complex weighting and
/// channel sum at full precision, shifted down by the window's `lsb_offset`
/// to the proposed chain's scale.
pub fn run_standard(capture: &Capture, cfg: &ChainConfig) -> Result<ChainOutput> {
    cfg.check_capture(capture)?;
    let n = capture.num_channels;
    let out_width = cfg.fir.output_width(TruncationWindow::WIDTH);
    let limit = signed_range(out_width);
    let mut diag = ChainDiagnostics::default();
    let mut phases = vec![DdcPhase::default(); n];
    let mut states = vec![FirState::new(&cfg.fir); n];
    let mut frames = Vec::with_capacity(capture.frames.len());
    for frame in &capture.frames {
        let mut filtered = Vec::with_capacity(n);
        for ch in 0..n {
            let mut real = IqFrame::zeroed(frame.frame_index, ADC_WIDTH);
            for (dst, &s) in real.i.iter_mut().zip(&frame.samples[ch]) {
                *dst = s as i64;
            }
            let (mixed, next) = ddc_frame(&real, phases[ch], &mut diag.ddc)?;
            phases[ch] = next;
            filtered.push(filter_frame(&mut states[ch], &mixed, &cfg.fir, &mut diag.fir)?);
        }
        let mut out = IqFrame::zeroed(frame.frame_index, out_width);
        for p in 0..PARALLEL {
            let (mut re, mut im) = (0i64, 0i64);
            for (ch, (x, w)) in filtered.iter().zip(&cfg.weights.weights).enumerate() {
                let (wr, wi) = (w.re as i64, w.im as i64);
                re += x.i[p] * wr - x.q[p] * wi;
                im += x.i[p] * wi + x.q[p] * wr;
                diag.beamformer.multiplications += 4;
                diag.beamformer.additions += 2;
                if ch > 0 {
                    diag.beamformer.additions += 2;
                }
            }
            for (acc, dst) in [(re, &mut out.i[p]), (im, &mut out.q[p])] {
                let shifted = acc >> cfg.window.lsb_offset;
                if shifted < limit.0 || shifted > limit.1 {
                    diag.beamformer.overflow_events += 1;
                }
                *dst = wrap_signed(shifted, out_width);
            }
        }
        diag.beamformer.frames += 1;
        frames.push(out);
    }
    Ok(ChainOutput {
        architecture: Architecture::Standard,
        frames,
        bit_width: out_width,
        warmup_samples: cfg.warmup_samples(),
        diagnostics: diag,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatOutput {
    pub architecture: Architecture,
    pub samples: Vec<Complex64>,
    pub warmup_samples: usize,
}

/// `exp(-j pi k / 2)`, exact.
fn fs4_rotation(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn fir_float(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    (0..x.len())
        .map(|k| {
            h.iter()
                .enumerate()
                .take(k + 1)
                .map(|(j, &c)| x[k - j] * c)
                .sum()
        })
        .collect()
}

/// Double-precision model of `arch` with unquantized weights and filter
/// coefficients, on the same scale as the fixed-point outputs.
pub fn run_float_oracle(capture: &Capture, cfg: &ChainConfig, arch: Architecture) -> Result<FloatOutput> {
    cfg.check_capture(capture)?;
    let scale = 2f64.powi(-(cfg.window.lsb_offset as i32));
    let channels: Vec<Vec<f64>> = (0..capture.num_channels)
        .map(|ch| capture.channel(ch).into_iter().map(f64::from).collect())
        .collect();
    let len = capture.num_samples();
    let samples = match arch {
        Architecture::Proposed => {
            let mixed: Vec<Complex64> = (0..len)
                .map(|k| {
                    let y: Complex64 = channels
                        .iter()
                        .zip(&cfg.ideal_weights)
                        .map(|(s, w)| w * s[k])
                        .sum();
                    y * scale * fs4_rotation(k)
                })
                .collect();
            fir_float(&mixed, &cfg.fir.coeffs)
        }
        Architecture::Standard => {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for (s, w) in channels.iter().zip(&cfg.ideal_weights) {
                let mixed: Vec<Complex64> = s
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| fs4_rotation(k) * v)
                    .collect();
                for (a, y) in acc.iter_mut().zip(fir_float(&mixed, &cfg.fir.coeffs)) {
                    *a += y * w;
                }
            }
            acc.into_iter().map(|v| v * scale).collect()
        }
    };
    Ok(FloatOutput {
        architecture: arch,
        samples,
        warmup_samples: cfg.warmup_samples(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adc::{capture, AdcConfig};
    use crate::array::{synthesize_channels, SignalKind, TestSignalSpec};
    use crate::beamformer::ComplexWeight;

    fn zero_capture(n: usize) -> Capture {
        Capture::from_codes(&vec![vec![0; 256]; n], 1.6e9, 2e9).unwrap()
    }

    fn default_cfg(n: usize) -> ChainConfig {
        let array = ArrayConfig::half_wavelength(n, 2e9).unwrap();
        ChainConfig::steered(&array, 0.0, FirSpec::default_for(1.6e9).unwrap()).unwrap()
    }

    #[test]
    fn zero_capture_gives_zero_baseband() {
        let cfg = default_cfg(4);
        for out in [
            run_proposed(&zero_capture(4), &cfg).unwrap(),
            run_standard(&zero_capture(4), &cfg).unwrap(),
        ] {
            assert!(out.frames.iter().all(|f| f.i == [0; 8] && f.q == [0; 8]));
            assert_eq!(out.bit_width, 36);
            assert_eq!(out.warmup_samples, 63);
            assert_eq!(out.diagnostics.total_overflows(), 0);
        }
    }

    #[test]
    fn channel_mismatch_and_if_placement() {
        let cfg = default_cfg(4);
        assert!(run_proposed(&zero_capture(3), &cfg).is_err());
        let off_if = Capture::from_codes(&vec![vec![0; 64]; 4], 1.6e9, 2.1e9).unwrap();
        assert!(run_standard(&off_if, &cfg).is_err());
        assert!(run_float_oracle(&off_if, &cfg, Architecture::Proposed).is_err());
    }

    #[test]
    fn single_channel_standard_is_ddc_plus_fir() {
        let fir = FirSpec::default_for(1.6e9).unwrap();
        let cfg = ChainConfig::new(
            ComplexWeightSet::new(vec![ComplexWeight { re: 1 << 7, im: 0 }]).unwrap(),
            TruncationWindow::msb_aligned(1),
            fir.clone(),
        )
        .unwrap();
        assert_eq!(cfg.window.lsb_offset, 5);
        let codes: Vec<i16> = (0..128).map(|k| ((k * 37) % 400 - 200) as i16).collect();
        let cap = Capture::from_codes(&[codes.clone()], 1.6e9, 2e9).unwrap();
        let out = run_standard(&cap, &cfg).unwrap();
        // reference: DDC + FIR of the channel, weight 128 then >> 5 = x4
        let mixed: Vec<(i64, i64)> = codes
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let r = fs4_rotation(k);
                ((s as f64 * r.re) as i64, (s as f64 * r.im) as i64)
            })
            .collect();
        for (k, got) in crate::iq::flatten(&out.frames).iter().enumerate() {
            let (mut i, mut q) = (0i64, 0i64);
            for j in 0..=k.min(63) {
                i += fir.coeffs_q[j] as i64 * mixed[k - j].0;
                q += fir.coeffs_q[j] as i64 * mixed[k - j].1;
            }
            assert_eq!(*got, (i * 4, q * 4));
        }
    }

    #[test]
    fn float_architectures_commute() {
        let array = ArrayConfig::half_wavelength(4, 3.6e9).unwrap();
        let spec = TestSignalSpec::tone(3.6e9, 10f64.to_radians(), 0.3)
            .with_kind(SignalKind::LinearFm {
                base_tone_hz: 1e6,
                deviation_hz: 1e8,
            })
            .with_noise(0.0, 11);
        let streams = synthesize_channels(&array, &spec, 1.6e9, 2048).unwrap();
        let cap = capture(&streams, &AdcConfig::default(), 3.6e9).unwrap();
        let cfg = ChainConfig::steered(&array, 10f64.to_radians(), FirSpec::default_for(1.6e9).unwrap()).unwrap();
        let a = run_float_oracle(&cap, &cfg, Architecture::Proposed).unwrap();
        let b = run_float_oracle(&cap, &cfg, Architecture::Standard).unwrap();
        let num: f64 = a.samples[63..].iter().zip(&b.samples[63..]).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = a.samples[63..].iter().map(|x| x.norm_sqr()).sum();
        assert!((num / den).sqrt() < 1e-10);
        assert_eq!(a.samples.len(), run_proposed(&cap, &cfg).unwrap().samples().len());
    }

    #[test]
    fn float_tone_at_if_settles_to_constant() {
        // codes [A, 0, -A, 0] on every channel, broadside, unit weights
        let a = 1000.0;
        let codes: Vec<i16> = (0..256).map(|k| [1000, 0, -1000, 0][k % 4]).collect();
        let cap = Capture::from_codes(&vec![codes; 4], 1.6e9, 2e9).unwrap();
        let cfg = default_cfg(4);
        let out = run_float_oracle(&cap, &cfg, Architecture::Proposed).unwrap();
        let gain: f64 = cfg.fir.coeffs.iter().sum();
        let expected = a / 2.0 * 4.0 * 2047.0 * gain * 2f64.powi(-(cfg.window.lsb_offset as i32));
        for v in &out.samples[63..] {
            assert!((v - Complex64::new(expected, 0.0)).norm() <= 1e-12 * expected);
        }
    }

    #[test]
    fn fixed_chains_agree_to_truncation_error() {
        let array = ArrayConfig::half_wavelength(4, 2e9).unwrap();
        let spec = TestSignalSpec::tone(2e9, 0.2, 0.4);
        let streams = synthesize_channels(&array, &spec, 1.6e9, 1024).unwrap();
        let cap = capture(&streams, &AdcConfig::default(), 2e9).unwrap();
        let cfg = ChainConfig::steered(&array, 0.2, FirSpec::default_for(1.6e9).unwrap()).unwrap();
        let p = run_proposed(&cap, &cfg).unwrap().samples();
        let s = run_standard(&cap, &cfg).unwrap().samples();
        // window truncation before the FIR costs at most one LSB per tap
        let bound: f64 = cfg.fir.coeffs_q.iter().map(|c| c.abs() as f64).sum::<f64>() + 1.0;
        for (x, y) in p.iter().zip(&s).skip(63) {
            assert!((x.re - y.re).abs() <= bound && (x.im - y.im).abs() <= bound);
        }
    }

    #[test]
    fn op_counters_match_model() {
        let cfg = default_cfg(4);
        let cap = zero_capture(4);
        let frames = cap.frames.len() as u64;
        let p = run_proposed(&cap, &cfg).unwrap().diagnostics;
        let model = crate::resources::estimate(Architecture::Proposed, 4, 64, 8).unwrap();
        let bf = model.stage("beamformer").unwrap();
        let fir = model.stage("fir").unwrap();
        assert_eq!(p.beamformer.multiplications, frames * bf.real_multipliers);
        assert_eq!(p.beamformer.additions, frames * bf.real_adders);
        assert_eq!(p.fir.multiplications, frames * fir.real_multipliers);
        assert_eq!(p.fir.additions, frames * fir.real_adders);
        assert_eq!(p.ddc.multiplications, 0);

        let s = run_standard(&cap, &cfg).unwrap().diagnostics;
        let model = crate::resources::estimate(Architecture::Standard, 4, 64, 8).unwrap();
        let bf = model.stage("beamformer").unwrap();
        let fir = model.stage("fir").unwrap();
        assert_eq!(s.beamformer.multiplications, frames * bf.real_multipliers);
        assert_eq!(s.beamformer.additions, frames * bf.real_adders);
        assert_eq!(s.fir.multiplications, frames * fir.real_multipliers);
        assert_eq!(s.fir.additions, frames * fir.real_adders);
    }
}
