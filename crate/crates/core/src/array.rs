//! Uniform linear array geometry and plane-wave test signal synthesis.
//!
//! Element delays are applied analytically inside each waveform expression,
//! so a capture is exact for the closed-form test signals and carries no
//! fractional-delay interpolation error.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Fractional bandwidth below which the narrowband (phase-shift) model holds.
pub const NARROWBAND_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub num_elements: usize,
    pub spacing_m: f64,
    #[serde(default = "default_wave_speed")]
    pub wave_speed_mps: f64,
    pub carrier_hz: f64,
}

fn default_wave_speed() -> f64 {
    SPEED_OF_LIGHT
}

impl ArrayConfig {
    pub fn new(num_elements: usize, spacing_m: f64, carrier_hz: f64) -> Result<Self> {
        let cfg = Self {
            num_elements,
            spacing_m,
            wave_speed_mps: SPEED_OF_LIGHT,
            carrier_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Array with half-wavelength spacing at `carrier_hz`.
    pub fn half_wavelength(num_elements: usize, carrier_hz: f64) -> Result<Self> {
        Self::new(num_elements, SPEED_OF_LIGHT / carrier_hz / 2.0, carrier_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements == 0 {
            return Err(validation("num_elements must be >= 1"));
        }
        for (name, v) in [
            ("spacing_m", self.spacing_m),
            ("wave_speed_mps", self.wave_speed_mps),
            ("carrier_hz", self.carrier_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wave_speed_mps / self.carrier_hz
    }

    pub fn angular_carrier(&self) -> f64 {
        2.0 * PI * self.carrier_hz
    }

    /// True when `bandwidth_hz` is narrow enough for the phase-shift model.
    pub fn is_narrowband(&self, bandwidth_hz: f64) -> bool {
        bandwidth_hz / self.carrier_hz < NARROWBAND_FRACTION
    }

    /// Delay of element `index` (0-based) relative to element 0.
    fn delay_unchecked(&self, theta: f64, index: usize) -> f64 {
        index as f64 * self.spacing_m * theta.sin() / self.wave_speed_mps
    }
}

/// Arrival delay at element `n` (1-based) relative to the first element.
pub fn element_delay(cfg: &ArrayConfig, theta: f64, n: usize) -> Result<f64> {
    cfg.validate()?;
    if n == 0 || n > cfg.num_elements {
        return Err(Error::Index {
            index: n,
            len: cfg.num_elements,
        });
    }
    Ok(cfg.delay_unchecked(theta, n - 1))
}

/// Unit phasors `exp(-j w_c tau_n)` for a plane wave from `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    phasors: Vec<Complex64>,
}

impl SteeringVector {
    pub fn phasors(&self) -> &[Complex64] {
        &self.phasors
    }

    pub fn len(&self) -> usize {
        self.phasors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phasors.is_empty()
    }

    pub fn conjugate(&self) -> SteeringVector {
        SteeringVector {
            phasors: self.phasors.iter().map(|p| p.conj()).collect(),
        }
    }
}

pub fn steering_vector(cfg: &ArrayConfig, theta: f64) -> Result<SteeringVector> {
    cfg.validate()?;
    let wc = cfg.angular_carrier();
    let phasors = (0..cfg.num_elements)
        .map(|i| {
            if i == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, -wc * cfg.delay_unchecked(theta, i))
            }
        })
        .collect();
    Ok(SteeringVector { phasors })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalKind {
    Tone,
    /// Sinusoidal FM: instantaneous frequency `carrier + deviation * sin(2 pi base_tone t)`.
    LinearFm { base_tone_hz: f64, deviation_hz: f64 },
    /// Quadrature test signal: a cosine tone on I and another on Q.
    IqTwoTone { i_tone_hz: f64, q_tone_hz: f64 },
}

/// What `noise_power_db` is measured against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseReference {
    /// Unit variance noise next to a unit-amplitude signal, both then scaled
    /// by `amplitude` into ADC full-scale units.
    #[default]
    UnitSignal,
    /// Unit variance equals ADC full scale squared.
    FullScale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSignalSpec {
    pub kind: SignalKind,
    pub carrier_hz: f64,
    pub arrival_angle_rad: f64,
    pub amplitude: f64,
    /// `None` disables the noise source.
    pub noise_power_db: Option<f64>,
    pub noise_reference: NoiseReference,
    pub seed: u64,
}

impl TestSignalSpec {
    pub fn tone(carrier_hz: f64, arrival_angle_rad: f64, amplitude: f64) -> Self {
        Self {
            kind: SignalKind::Tone,
            carrier_hz,
            arrival_angle_rad,
            amplitude,
            noise_power_db: None,
            noise_reference: NoiseReference::UnitSignal,
            seed: 0,
        }
    }

    pub fn with_kind(mut self, kind: SignalKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_noise(mut self, noise_power_db: f64, seed: u64) -> Self {
        self.noise_power_db = Some(noise_power_db);
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(validation("signal carrier_hz must be positive"));
        }
        if !(self.arrival_angle_rad.abs() < PI / 2.0) {
            return Err(validation("arrival angle must lie strictly inside (-90, 90) degrees"));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(validation("amplitude must be in (0, 1]"));
        }
        if let Some(db) = self.noise_power_db {
            if !db.is_finite() {
                return Err(validation("noise_power_db must be finite"));
            }
        }
        match self.kind {
            SignalKind::Tone => {}
            SignalKind::LinearFm {
                base_tone_hz,
                deviation_hz,
            } => {
                if !(base_tone_hz > 0.0 && deviation_hz >= 0.0) {
                    return Err(validation("linear_fm needs base_tone_hz > 0 and deviation_hz >= 0"));
                }
            }
            SignalKind::IqTwoTone { i_tone_hz, q_tone_hz } => {
                if !(i_tone_hz >= 0.0 && q_tone_hz >= 0.0) {
                    return Err(validation("iq_two_tone tone frequencies must be >= 0"));
                }
            }
        }
        Ok(())
    }

    /// Approximate occupied bandwidth, for the narrowband check.
    pub fn bandwidth_hz(&self) -> f64 {
        match self.kind {
            SignalKind::Tone => 0.0,
            SignalKind::LinearFm {
                base_tone_hz,
                deviation_hz,
            } => 2.0 * (deviation_hz + base_tone_hz),
            SignalKind::IqTwoTone { i_tone_hz, q_tone_hz } => 2.0 * i_tone_hz.max(q_tone_hz),
        }
    }

    /// Unit-amplitude waveform at sample `k` of a stream sampled at `fs`,
    /// delayed by `tau` seconds.
    fn unit_sample(&self, fs: f64, k: u64, tau: f64) -> f64 {
        // Carrier cycles reduced modulo one before scaling by 2 pi. With
        // integer-valued fc and fs the product and remainder are exact.
        let cycles = (self.carrier_hz * k as f64).rem_euclid(fs) / fs - self.carrier_hz * tau;
        let carrier_phase = 2.0 * PI * cycles;
        let t = k as f64 / fs - tau;
        match self.kind {
            SignalKind::Tone => carrier_phase.cos(),
            SignalKind::LinearFm {
                base_tone_hz,
                deviation_hz,
            } => {
                let beta = deviation_hz / base_tone_hz;
                let fm = -beta * ((2.0 * PI * base_tone_hz * t).cos() - 1.0);
                (carrier_phase + fm).cos()
            }
            SignalKind::IqTwoTone { i_tone_hz, q_tone_hz } => {
                let i = (2.0 * PI * i_tone_hz * t).cos();
                let q = (2.0 * PI * q_tone_hz * t).cos();
                (i * carrier_phase.cos() - q * carrier_phase.sin()) / 2f64.sqrt()
            }
        }
    }
}

/// Per-element analog streams sampled at `fs`, in ADC full-scale units.
///
/// Stream `n` is the test waveform delayed by the element's arrival delay
/// plus independent Gaussian noise (one ChaCha8 stream per element).
pub fn synthesize_channels(
    cfg: &ArrayConfig,
    spec: &TestSignalSpec,
    fs: f64,
    num_samples: usize,
) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    spec.validate()?;
    if !(fs.is_finite() && fs > 0.0) {
        return Err(validation("fs must be positive"));
    }
    if num_samples == 0 {
        return Err(validation("num_samples must be > 0"));
    }
    let noise_std = spec.noise_power_db.map(|db| {
        let unit = 10f64.powf(db / 20.0);
        match spec.noise_reference {
            NoiseReference::UnitSignal => unit * spec.amplitude,
            NoiseReference::FullScale => unit,
        }
    });

    let streams = (0..cfg.num_elements)
        .map(|n| {
            let tau = cfg.delay_unchecked(spec.arrival_angle_rad, n);
            let mut out: Vec<f64> = (0..num_samples as u64)
                .map(|k| spec.amplitude * spec.unit_sample(fs, k, tau))
                .collect();
            if let Some(std) = noise_std {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(n as u64);
                let normal = Normal::new(0.0, std).expect("finite noise std");
                for v in &mut out {
                    *v += normal.sample(&mut rng);
                }
            }
            out
        })
        .collect();
    Ok(streams)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> ArrayConfig {
        ArrayConfig {
            num_elements: n,
            spacing_m: 0.075,
            wave_speed_mps: 3e8,
            carrier_hz: 2e9,
        }
    }

    #[test]
    fn broadside_has_no_delay() {
        assert_eq!(element_delay(&cfg(4), 0.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn delay_at_thirty_degrees() {
        let th = 30f64.to_radians();
        let d2 = element_delay(&cfg(4), th, 2).unwrap();
        let d4 = element_delay(&cfg(4), th, 4).unwrap();
        assert!((d2 - 1.25e-10).abs() < 1e-22);
        assert!((d4 - 3.75e-10).abs() < 1e-22);
    }

    #[test]
    fn delay_index_out_of_range() {
        assert!(matches!(element_delay(&cfg(4), 0.1, 0), Err(Error::Index { .. })));
        assert!(matches!(element_delay(&cfg(4), 0.1, 5), Err(Error::Index { .. })));
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let sv = steering_vector(&cfg(4), 0.0).unwrap();
        assert!(sv.phasors().iter().all(|p| *p == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn steering_end_fire_half_wavelength() {
        let c = ArrayConfig::half_wavelength(2, 3.6e9).unwrap();
        let sv = steering_vector(&c, PI / 2.0).unwrap();
        assert!((sv.phasors()[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_phase_step_at_ten_degrees() {
        let c = ArrayConfig::half_wavelength(4, 3.6e9).unwrap();
        let sv = steering_vector(&c, 10f64.to_radians()).unwrap();
        for n in 1..4 {
            let step = (sv.phasors()[n] / sv.phasors()[n - 1]).arg();
            assert!((step - (-0.545_53)).abs() < 1e-4, "{step}");
            // brute force: delay then phase
            let tau = element_delay(&c, 10f64.to_radians(), n + 1).unwrap();
            let oracle = Complex64::new(0.0, -2.0 * PI * 3.6e9 * tau).exp();
            assert!((oracle - sv.phasors()[n]).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(ArrayConfig::new(0, 0.1, 1e9).is_err());
        assert!(ArrayConfig::new(4, -0.1, 1e9).is_err());
        assert!(ArrayConfig::new(4, 0.1, 0.0).is_err());
    }

    #[test]
    fn narrowband_flag() {
        let c = cfg(4);
        assert!(c.is_narrowband(1e6));
        assert!(!c.is_narrowband(1e8));
    }

    #[test]
    fn broadside_tone_streams_identical() {
        let spec = TestSignalSpec::tone(2e9, 0.0, 0.5);
        let s = synthesize_channels(&cfg(4), &spec, 1.6e9, 512).unwrap();
        for n in 1..4 {
            assert_eq!(s[0], s[n]);
        }
    }

    #[test]
    fn synthesis_rejects_bad_spec() {
        let mut spec = TestSignalSpec::tone(2e9, 0.0, 0.5);
        spec.amplitude = 1.5;
        assert!(synthesize_channels(&cfg(4), &spec, 1.6e9, 16).is_err());
        spec.amplitude = 0.5;
        spec.arrival_angle_rad = PI / 2.0;
        assert!(synthesize_channels(&cfg(4), &spec, 1.6e9, 16).is_err());
        spec.arrival_angle_rad = 0.0;
        assert!(synthesize_channels(&cfg(4), &spec, 0.0, 16).is_err());
        assert!(synthesize_channels(&cfg(4), &spec, 1.6e9, 0).is_err());
    }

    #[test]
    fn noise_variance_follows_reference() {
        let mut spec = TestSignalSpec::tone(2e9, 0.0, 0.25).with_noise(0.0, 7);
        let zero = TestSignalSpec::tone(2e9, 0.0, 0.25);
        let clean = synthesize_channels(&cfg(1), &zero, 1.6e9, 200_000).unwrap();
        let noisy = synthesize_channels(&cfg(1), &spec, 1.6e9, 200_000).unwrap();
        let var = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
        };
        let v = var(&noisy[0], &clean[0]);
        assert!((v / 0.0625 - 1.0).abs() < 0.02, "{v}");

        spec.noise_reference = NoiseReference::FullScale;
        spec.noise_power_db = Some(-20.0);
        let noisy = synthesize_channels(&cfg(1), &spec, 1.6e9, 200_000).unwrap();
        let v = var(&noisy[0], &clean[0]);
        assert!((v / 0.01 - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn channel_noise_is_independent() {
        let spec = TestSignalSpec::tone(2e9, 0.0, 0.25).with_noise(0.0, 3);
        let s = synthesize_channels(&cfg(2), &spec, 1.6e9, 64).unwrap();
        assert_ne!(s[0], s[1]);
    }
}
