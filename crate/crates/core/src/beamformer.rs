//! Fixed-point digital beamformer operating on real IF samples.
//!
//! Each channel's 12-bit samples are multiplied by a 12-bit complex weight
//! (Q1.11), the products are summed across channels at full precision, and
//! a configurable 20-bit window is sliced out of the accumulator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adc::ChannelFrame;
use crate::array::{steering_vector, ArrayConfig, SteeringVector};
use crate::error::{validation, Result};
use crate::iq::{wrap_signed, IqFrame, StageDiagnostics};
use crate::PARALLEL;

/// Integer weight value representing +1.0.
pub const WEIGHT_SCALE: f64 = 2047.0;
pub const WEIGHT_BITS: u32 = 12;
/// Width of the beamformer output.
pub const OUTPUT_WIDTH: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i16; 2]", into = "[i16; 2]")]
pub struct ComplexWeight {
    pub re: i16,
    pub im: i16,
}

impl From<[i16; 2]> for ComplexWeight {
    fn from([re, im]: [i16; 2]) -> Self {
        Self { re, im }
    }
}

impl From<ComplexWeight> for [i16; 2] {
    fn from(w: ComplexWeight) -> Self {
        [w.re, w.im]
    }
}

impl ComplexWeight {
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
}

/// Weights applied by the beamformer, one per channel, serialized as a
/// JSON list of `[re, im]` integer pairs.
///
/// These are the coefficients the hardware multiplies by. Steering towards
/// an angle therefore uses the conjugate steering vector, which undoes the
/// `exp(-j w_c tau_n)` phase each element sees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexWeightSet {
    pub weights: Vec<ComplexWeight>,
}

impl ComplexWeightSet {
    pub fn new(weights: Vec<ComplexWeight>) -> Result<Self> {
        let set = Self { weights };
        set.validate()?;
        Ok(set)
    }

    /// Weights that phase-align a plane wave arriving from `theta`.
    pub fn steered(cfg: &ArrayConfig, theta: f64) -> Result<Self> {
        Ok(quantize_weights(&steering_vector(cfg, theta)?.conjugate()))
    }

    /// Ideal (unquantized) counterpart of [`ComplexWeightSet::steered`], in
    /// the same integer units.
    pub fn steered_ideal(cfg: &ArrayConfig, theta: f64) -> Result<Vec<Complex64>> {
        Ok(steering_vector(cfg, theta)?
            .conjugate()
            .phasors()
            .iter()
            .map(|p| p * WEIGHT_SCALE)
            .collect())
    }

    /// `(2047, 0)` on every channel.
    pub fn unit(num_channels: usize) -> Self {
        Self {
            weights: vec![ComplexWeight { re: 2047, im: 0 }; num_channels],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(validation("weight set is empty"));
        }
        Ok(())
    }

    /// Weights as complex numbers with `2047` mapped to 1.0.
    pub fn dequantized(&self) -> Vec<Complex64> {
        self.weights
            .iter()
            .map(|w| w.to_complex() / WEIGHT_SCALE)
            .collect()
    }
}

fn round_component(v: f64) -> i16 {
    (v * WEIGHT_SCALE).round().clamp(-2048.0, 2047.0) as i16
}

/// Quantize phasors to Q1.11, keeping every weight magnitude within 2047.
pub fn quantize_weights(sv: &SteeringVector) -> ComplexWeightSet {
    let limit = (WEIGHT_SCALE * WEIGHT_SCALE) as i64;
    let weights = sv
        .phasors()
        .iter()
        .map(|p| {
            let mut w = ComplexWeight {
                re: round_component(p.re),
                im: round_component(p.im),
            };
            // Rounding both components up can leave |w| just above 2047.
            // Pull back the component that was rounded up the most.
            while (w.re as i64).pow(2) + (w.im as i64).pow(2) > limit {
                let excess_re = (w.re as f64).abs() - (p.re * WEIGHT_SCALE).abs();
                let excess_im = (w.im as f64).abs() - (p.im * WEIGHT_SCALE).abs();
                if excess_re >= excess_im {
                    w.re -= w.re.signum();
                } else {
                    w.im -= w.im.signum();
                }
            }
            w
        })
        .collect();
    ComplexWeightSet { weights }
}

/// Accumulator width needed for `num_channels` 12x12-bit products plus a
/// guard bit.
pub fn accumulator_width(num_channels: usize) -> u32 {
    let growth = (num_channels.max(1) as f64).log2().ceil() as u32;
    12 + 12 + growth + 1
}

/// Position of the 20-bit output slice inside the accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub accumulator_width: u32,
    /// Accumulator bits discarded below the window.
    pub lsb_offset: u32,
}

impl TruncationWindow {
    pub const WIDTH: u32 = OUTPUT_WIDTH;

    pub fn new(accumulator_width: u32, lsb_offset: u32) -> Result<Self> {
        if accumulator_width > 62 {
            return Err(validation("accumulator width above 62 bits is not supported"));
        }
        if lsb_offset + Self::WIDTH > accumulator_width {
            return Err(validation(format!(
                "window [{}+{}] does not fit a {accumulator_width}-bit accumulator",
                lsb_offset,
                Self::WIDTH
            )));
        }
        Ok(Self {
            accumulator_width,
            lsb_offset,
        })
    }

    /// Window covering the accumulator's most significant 20 bits.
    pub fn msb_aligned(num_channels: usize) -> Self {
        let acc = accumulator_width(num_channels);
        Self {
            accumulator_width: acc,
            lsb_offset: acc - Self::WIDTH,
        }
    }

    pub fn with_offset(num_channels: usize, lsb_offset: u32) -> Result<Self> {
        Self::new(accumulator_width(num_channels), lsb_offset)
    }

    /// Slice the window out of `acc`; the flag is set when the discarded
    /// upper bits are not a sign extension of the result.
    pub fn apply(&self, acc: i64) -> (i64, bool) {
        let shifted = acc >> self.lsb_offset;
        let out = wrap_signed(shifted, Self::WIDTH);
        (out, out != shifted)
    }
}

/// Beamform one frame: per slot, `sum_i s_i * re_i` and `sum_i s_i * im_i`
/// accumulated exactly, then windowed to 20 bits.
pub fn beamform_frame(
    frame: &ChannelFrame,
    w: &ComplexWeightSet,
    win: &TruncationWindow,
    diag: &mut StageDiagnostics,
) -> Result<IqFrame> {
    if frame.num_channels() != w.len() {
        return Err(validation(format!(
            "frame has {} channels but {} weights were given",
            frame.num_channels(),
            w.len()
        )));
    }
    let mut out = IqFrame::zeroed(frame.frame_index, OUTPUT_WIDTH);
    for p in 0..PARALLEL {
        let mut acc_re = 0i64;
        let mut acc_im = 0i64;
        for (ch, (samples, wt)) in frame.samples.iter().zip(&w.weights).enumerate() {
            let s = samples[p] as i64;
            acc_re += s * wt.re as i64;
            acc_im += s * wt.im as i64;
            diag.multiplications += 2;
            if ch > 0 {
                diag.additions += 2;
            }
        }
        let (re, ov_re) = win.apply(acc_re);
        let (im, ov_im) = win.apply(acc_im);
        diag.overflow_events += ov_re as u64 + ov_im as u64;
        out.i[p] = re;
        out.q[p] = im;
    }
    diag.frames += 1;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayConfig;
    use proptest::prelude::*;

    fn frame(n: usize, v: i16) -> ChannelFrame {
        ChannelFrame {
            frame_index: 0,
            samples: vec![[v; PARALLEL]; n],
        }
    }

    #[test]
    fn quantize_unit_phasors() {
        let cfg = ArrayConfig::half_wavelength(4, 3.6e9).unwrap();
        let sv = steering_vector(&cfg, 0.0).unwrap();
        assert_eq!(quantize_weights(&sv), ComplexWeightSet::unit(4));
        let cfg2 = ArrayConfig::half_wavelength(2, 3.6e9).unwrap();
        let sv = steering_vector(&cfg2, std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(quantize_weights(&sv).weights[1], ComplexWeight { re: -2047, im: 0 });
    }

    #[test]
    fn quantize_ten_degree_step() {
        let cfg = ArrayConfig::half_wavelength(2, 3.6e9).unwrap();
        let sv = steering_vector(&cfg, 10f64.to_radians()).unwrap();
        // high-precision oracle: 2047 cos = 1749.88, 2047 sin = -1062.13;
        // rounding gives (1750, -1062) with |w| = 2047.03 > 2047, so the
        // real part (rounded up by 0.12) is pulled back
        assert_eq!(quantize_weights(&sv).weights[1], ComplexWeight { re: 1749, im: -1062 });
    }

    #[test]
    fn zero_frame_gives_zero() {
        let mut d = StageDiagnostics::default();
        let out = beamform_frame(
            &frame(4, 0),
            &ComplexWeightSet::unit(4),
            &TruncationWindow::msb_aligned(4),
            &mut d,
        )
        .unwrap();
        assert_eq!(out, IqFrame::zeroed(0, 20));
        assert_eq!(d.overflow_events, 0);
    }

    #[test]
    fn windowed_products() {
        let win = TruncationWindow::new(26, 6).unwrap();
        let mut d = StageDiagnostics::default();
        let w = ComplexWeightSet::new(vec![ComplexWeight { re: 1024, im: 0 }; 4]).unwrap();
        let out = beamform_frame(&frame(4, 100), &w, &win, &mut d).unwrap();
        assert_eq!(out.i, [6400; 8]);
        assert_eq!(out.q, [0; 8]);
        let w = ComplexWeightSet::new(vec![ComplexWeight { re: 0, im: 1024 }; 4]).unwrap();
        let out = beamform_frame(&frame(4, 100), &w, &win, &mut d).unwrap();
        assert_eq!(out.i, [0; 8]);
        assert_eq!(out.q, [6400; 8]);
        assert_eq!(d.multiplications, 2 * 64);
        assert_eq!(d.additions, 2 * 48);
    }

    #[test]
    fn identity_weights_sum_channels() {
        let win = TruncationWindow::new(27, 0).unwrap();
        let mut d = StageDiagnostics::default();
        let mut f = frame(4, 0);
        for (ch, s) in f.samples.iter_mut().enumerate() {
            *s = [ch as i16 * 10 - 7; 8];
        }
        let out = beamform_frame(&f, &ComplexWeightSet::unit(4), &win, &mut d).unwrap();
        assert_eq!(out.i[0], (-7 + 3 + 13 + 23) * 2047);
        assert_eq!(out.q, [0; 8]);
    }

    #[test]
    fn overflow_is_counted_and_wraps() {
        let win = TruncationWindow::new(27, 0).unwrap();
        let mut d = StageDiagnostics::default();
        let out = beamform_frame(&frame(4, 2047), &ComplexWeightSet::unit(4), &win, &mut d).unwrap();
        assert_eq!(d.overflow_events, 8);
        assert_eq!(out.i[0], wrap_signed(4 * 2047 * 2047, 20));
    }

    #[test]
    fn channel_mismatch() {
        let mut d = StageDiagnostics::default();
        let r = beamform_frame(
            &frame(3, 1),
            &ComplexWeightSet::unit(4),
            &TruncationWindow::msb_aligned(4),
            &mut d,
        );
        assert!(r.is_err());
    }

    #[test]
    fn window_bounds() {
        assert_eq!(accumulator_width(4), 27);
        assert_eq!(accumulator_width(1), 25);
        assert_eq!(accumulator_width(16), 29);
        assert_eq!(TruncationWindow::msb_aligned(4).lsb_offset, 7);
        assert!(TruncationWindow::with_offset(4, 8).is_err());
        assert!(TruncationWindow::with_offset(4, 7).is_ok());
    }

    #[test]
    fn weights_json_round_trip() {
        let w = ComplexWeightSet::new(vec![
            ComplexWeight { re: 2047, im: 0 },
            ComplexWeight { re: 1749, im: -1062 },
        ])
        .unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, "[[2047,0],[1749,-1062]]");
        assert_eq!(serde_json::from_str::<ComplexWeightSet>(&s).unwrap(), w);
    }

    fn arb_small_frame() -> impl Strategy<Value = ChannelFrame> {
        proptest::collection::vec(proptest::array::uniform8(-30i16..=30), 4)
            .prop_map(|samples| ChannelFrame { frame_index: 0, samples })
    }

    proptest! {
        #[test]
        fn quantized_magnitude_bounded(theta in -1.5f64..1.5, n in 1usize..12) {
            let cfg = ArrayConfig::half_wavelength(n, 2e9).unwrap();
            let w = ComplexWeightSet::steered(&cfg, theta).unwrap();
            for wt in &w.weights {
                let m2 = (wt.re as i64).pow(2) + (wt.im as i64).pow(2);
                prop_assert!(m2 <= 2047 * 2047);
                prop_assert!(m2 >= 2045 * 2045);
            }
        }

        #[test]
        fn linear_before_truncation(
            a in arb_small_frame(),
            b in arb_small_frame(),
            w in proptest::collection::vec((-2048i16..=2047, -2048i16..=2047), 4),
        ) {
            // |s| <= 60 keeps every accumulator inside 20 bits, so the
            // lsb_offset = 0 window passes it through untouched
            let w = ComplexWeightSet::new(w.into_iter().map(|(re, im)| ComplexWeight { re, im }).collect()).unwrap();
            let win = TruncationWindow::with_offset(4, 0).unwrap();
            let sum = ChannelFrame {
                frame_index: 0,
                samples: a.samples.iter().zip(&b.samples)
                    .map(|(x, y)| std::array::from_fn(|p| x[p] + y[p]))
                    .collect(),
            };
            let mut d = StageDiagnostics::default();
            let ya = beamform_frame(&a, &w, &win, &mut d).unwrap();
            let yb = beamform_frame(&b, &w, &win, &mut d).unwrap();
            let ys = beamform_frame(&sum, &w, &win, &mut d).unwrap();
            prop_assert_eq!(d.overflow_events, 0);
            for p in 0..PARALLEL {
                prop_assert_eq!(ys.i[p], ya.i[p] + yb.i[p]);
                prop_assert_eq!(ys.q[p], ya.q[p] + yb.q[p]);
            }
        }
    }
}
