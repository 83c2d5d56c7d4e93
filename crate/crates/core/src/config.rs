//! JSON run configuration for the simulator.
//!
//! Angles are given in degrees and converted on resolve; every other
//! quantity is in base SI units. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adc::AdcConfig;
use crate::array::{ArrayConfig, NoiseReference, SignalKind, TestSignalSpec, SPEED_OF_LIGHT};
use crate::beamformer::{ComplexWeight, ComplexWeightSet, TruncationWindow};
use crate::chain::{Arithmetic, ChainConfig};
use crate::error::{validation, Error, Result};
use crate::fir::{DesignWindow, FirSpec, DEFAULT_COEFF_BITS, DEFAULT_TAPS};
use crate::resources::Architecture;

pub const CONFIG_VERSION: u32 = 1;

fn default_wave_speed() -> f64 {
    SPEED_OF_LIGHT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub array: ArraySection,
    pub signal: SignalSection,
    pub adc: AdcSection,
    pub weights: WeightsSection,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub fir: FirSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub num_elements: usize,
    pub spacing_m: f64,
    #[serde(default = "default_wave_speed")]
    pub wave_speed_mps: f64,
    pub carrier_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKindName {
    Tone,
    LinearFm,
    IqTwoTone,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalParameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_tone_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_tone_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_tone_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSection {
    pub kind: SignalKindName,
    #[serde(default)]
    pub parameters: SignalParameters,
    pub arrival_angle_deg: f64,
    pub amplitude: f64,
    /// Omit or set to null for a noiseless capture.
    #[serde(default)]
    pub noise_power_db: Option<f64>,
    #[serde(default)]
    pub noise_reference: NoiseReference,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdcSection {
    pub fs_hz: f64,
    #[serde(default)]
    pub frontend_curve: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Steer,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub mode: WeightMode,
    /// Defaults to the signal's arrival angle.
    #[serde(default)]
    pub steer_angle_deg: Option<f64>,
    /// `[re, im]` pairs in Q1.11 units (2047 = 1.0).
    #[serde(default)]
    pub explicit: Option<Vec<ComplexWeight>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    /// Omitted means MSB-aligned.
    #[serde(default)]
    pub lsb_offset: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirSection {
    #[serde(default)]
    pub num_taps: Option<usize>,
    #[serde(default)]
    pub coeff_bits: Option<u32>,
    /// Defaults to fs/8.
    #[serde(default)]
    pub cutoff_hz: Option<f64>,
    #[serde(default)]
    pub design_window: Option<DesignWindow>,
    /// Quantized coefficients; overrides the design when present.
    #[serde(default)]
    pub coeffs: Option<Vec<i32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureChoice {
    Proposed,
    Standard,
    Both,
}

impl ArchitectureChoice {
    pub fn architectures(self) -> Vec<Architecture> {
        match self {
            ArchitectureChoice::Proposed => vec![Architecture::Proposed],
            ArchitectureChoice::Standard => vec![Architecture::Standard],
            ArchitectureChoice::Both => vec![Architecture::Proposed, Architecture::Standard],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub architecture: ArchitectureChoice,
    pub arithmetic: Arithmetic,
    pub num_samples: usize,
    /// Relative paths resolve against the working directory.
    pub output_dir: PathBuf,
}

/// Everything the simulator needs, validated and in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub array: ArrayConfig,
    /// `None` for a zero-amplitude (silent) source.
    pub signal: Option<TestSignalSpec>,
    pub adc: AdcConfig,
    pub chain: ChainConfig,
    pub architectures: Vec<Architecture>,
    pub arithmetic: Arithmetic,
    pub num_samples: usize,
    pub output_dir: PathBuf,
}

fn require(v: Option<f64>, kind: &str, name: &str) -> Result<f64> {
    v.ok_or_else(|| validation(format!("signal.parameters.{name} is required for kind {kind}")))
}

impl SignalSection {
    fn to_kind(&self) -> Result<SignalKind> {
        let p = &self.parameters;
        let (kind, allowed): (SignalKind, [bool; 4]) = match self.kind {
            SignalKindName::Tone => (SignalKind::Tone, [false; 4]),
            SignalKindName::LinearFm => (
                SignalKind::LinearFm {
                    base_tone_hz: require(p.base_tone_hz, "linear_fm", "base_tone_hz")?,
                    deviation_hz: require(p.deviation_hz, "linear_fm", "deviation_hz")?,
                },
                [true, true, false, false],
            ),
            SignalKindName::IqTwoTone => (
                SignalKind::IqTwoTone {
                    i_tone_hz: require(p.i_tone_hz, "iq_two_tone", "i_tone_hz")?,
                    q_tone_hz: require(p.q_tone_hz, "iq_two_tone", "q_tone_hz")?,
                },
                [false, false, true, true],
            ),
        };
        let present = [
            ("base_tone_hz", p.base_tone_hz.is_some()),
            ("deviation_hz", p.deviation_hz.is_some()),
            ("i_tone_hz", p.i_tone_hz.is_some()),
            ("q_tone_hz", p.q_tone_hz.is_some()),
        ];
        for ((name, given), ok) in present.iter().zip(allowed) {
            if *given && !ok {
                return Err(validation(format!(
                    "signal.parameters.{name} does not apply to kind {:?}",
                    self.kind
                )));
            }
        }
        Ok(kind)
    }
}

impl RunConfig {
    /// Parse JSON text. Syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            return Err(validation(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let section = |name: &'static str| move |e: Error| validation(format!("{name}: {e}"));
        let a = &self.array;
        let array = ArrayConfig {
            num_elements: a.num_elements,
            spacing_m: a.spacing_m,
            wave_speed_mps: a.wave_speed_mps,
            carrier_hz: a.carrier_hz,
        };
        array.validate().map_err(section("array"))?;

        let s = &self.signal;
        let mut spec = TestSignalSpec {
            kind: s.to_kind()?,
            carrier_hz: a.carrier_hz,
            arrival_angle_rad: s.arrival_angle_deg.to_radians(),
            amplitude: s.amplitude,
            noise_power_db: s.noise_power_db,
            noise_reference: s.noise_reference,
            seed: s.seed,
        };
        let signal = if s.amplitude == 0.0 {
            // Silent source: noise referenced to the signal vanishes with
            // it, full-scale noise has nothing to ride on.
            if s.noise_power_db.is_some() && s.noise_reference == NoiseReference::FullScale {
                return Err(validation("signal: full_scale noise needs a nonzero amplitude"));
            }
            spec.amplitude = 1.0;
            spec.validate().map_err(section("signal"))?;
            None
        } else {
            spec.validate().map_err(section("signal"))?;
            Some(spec)
        };

        let adc = AdcConfig {
            fs_hz: self.adc.fs_hz,
            fullscale: 1.0,
            frontend_curve: self.adc.frontend_curve.clone(),
        };
        adc.validate().map_err(section("adc"))?;

        let fir = self.fir_spec(adc.fs_hz).map_err(section("fir"))?;
        let window = match self.window.lsb_offset {
            None => TruncationWindow::msb_aligned(array.num_elements),
            Some(off) => TruncationWindow::with_offset(array.num_elements, off).map_err(section("window"))?,
        };
        let chain = match self.weights.mode {
            WeightMode::Steer => {
                if self.weights.explicit.is_some() {
                    return Err(validation("weights: explicit is not allowed with mode steer"));
                }
                let theta = self.weights.steer_angle_deg.unwrap_or(s.arrival_angle_deg).to_radians();
                let mut c = ChainConfig::steered(&array, theta, fir).map_err(section("weights"))?;
                c.window = window;
                c
            }
            WeightMode::Explicit => {
                if self.weights.steer_angle_deg.is_some() {
                    return Err(validation("weights: steer_angle_deg is not allowed with mode explicit"));
                }
                let w = self
                    .weights
                    .explicit
                    .clone()
                    .ok_or_else(|| validation("weights: mode explicit needs an explicit list"))?;
                if w.len() != array.num_elements {
                    return Err(validation(format!(
                        "weights: {} explicit weights for {} elements",
                        w.len(),
                        array.num_elements
                    )));
                }
                let set = ComplexWeightSet::new(w).map_err(section("weights"))?;
                ChainConfig::new(set, window, fir).map_err(section("weights"))?
            }
        };

        let r = &self.run;
        if r.num_samples == 0 {
            return Err(validation("run: num_samples must be > 0"));
        }
        Ok(Resolved {
            array,
            signal,
            adc,
            chain,
            architectures: r.architecture.architectures(),
            arithmetic: r.arithmetic,
            num_samples: r.num_samples,
            output_dir: r.output_dir.clone(),
        })
    }

    fn fir_spec(&self, fs_hz: f64) -> Result<FirSpec> {
        let f = &self.fir;
        let bits = f.coeff_bits.unwrap_or(DEFAULT_COEFF_BITS);
        let cutoff = f.cutoff_hz.unwrap_or(fs_hz / 8.0);
        match &f.coeffs {
            Some(c) => {
                if f.num_taps.is_some_and(|t| t != c.len()) {
                    return Err(validation("num_taps differs from the length of coeffs"));
                }
                FirSpec::from_quantized(c.clone(), bits, cutoff)
            }
            None => FirSpec::design(
                f.num_taps.unwrap_or(DEFAULT_TAPS),
                bits,
                cutoff,
                fs_hz,
                f.design_window.unwrap_or_default(),
            ),
        }
    }
}
