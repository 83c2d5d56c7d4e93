//! End-to-end simulation run: synthesize, capture, process, analyse and
//! write every artifact. Outputs depend only on the configuration.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adc::{capture, Capture};
use crate::analysis::{
    compare, spectral_metrics, ComparisonReport, Samples, SpectralMetrics, SpectrumWindow, DEFAULT_HARMONICS,
    MIN_METRIC_LEN,
};
use crate::array::synthesize_channels;
use crate::chain::{run_float_oracle, run_proposed, run_standard, Arithmetic, ChainDiagnostics};
use crate::config::Resolved;
use crate::error::{Error, Result};
use crate::formats::{
    fixed_baseband_csv, float_baseband_csv, write_capture, write_json, BasebandMeta, FORMAT_VERSION,
};
use crate::iq::IqFrame;
use crate::resources::Architecture;

pub const CAPTURE_BIN: &str = "capture.bin";
pub const CAPTURE_HEADER: &str = "capture.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const COMPARISON_FILE: &str = "comparison.json";

pub fn baseband_csv_name(arch: Architecture) -> String {
    format!("baseband_{arch}.csv")
}

pub fn baseband_meta_name(arch: Architecture) -> String {
    format!("baseband_{arch}.json")
}

/// Outcome of one spectral measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Measurement {
    Ok(SpectralMetrics),
    NoFundamental,
    InsufficientSamples,
}

pub fn measure(
    samples: Samples<'_>,
    fs: f64,
    harmonics: usize,
    window: Option<SpectrumWindow>,
) -> Result<Measurement> {
    let len = match samples {
        Samples::Real(s) => s.len(),
        Samples::Complex(s) => s.len(),
    };
    if len < MIN_METRIC_LEN {
        return Ok(Measurement::InsufficientSamples);
    }
    match spectral_metrics(samples, fs, harmonics, window) {
        Ok(m) => Ok(Measurement::Ok(m)),
        Err(Error::NoFundamental) => Ok(Measurement::NoFundamental),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureMetrics {
    pub architecture: Architecture,
    /// Complex baseband `I + jQ`.
    pub complex: Measurement,
    /// I and Q analysed as separate real sequences.
    pub i: Measurement,
    pub q: Measurement,
    pub overflow_total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format_version: u32,
    pub arithmetic: Arithmetic,
    pub fs_hz: f64,
    /// Leading samples excluded from every measurement.
    pub warmup_samples: usize,
    pub samples_analysed: usize,
    pub results: Vec<ArchitectureMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonArtifact {
    pub format_version: u32,
    pub arithmetic: Arithmetic,
    pub reference: Architecture,
    pub candidate: Architecture,
    pub report: ComparisonReport,
}

/// Baseband of one architecture in either arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub architecture: Architecture,
    pub samples: Vec<Complex64>,
    pub fixed_frames: Option<Vec<IqFrame>>,
    pub bit_width: Option<u32>,
    pub warmup_samples: usize,
    pub diagnostics: Option<ChainDiagnostics>,
}

impl RunOutput {
    pub fn overflow_total(&self) -> u64 {
        self.diagnostics.map_or(0, |d| d.total_overflows())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub output_dir: PathBuf,
    /// File names relative to `output_dir`, in write order.
    pub files: Vec<String>,
    pub outputs: Vec<RunOutput>,
    pub metrics: MetricsReport,
    pub comparison: Option<ComparisonArtifact>,
}

/// Synthesize and quantize the configured capture.
pub fn build_capture(r: &Resolved) -> Result<Capture> {
    let streams = match &r.signal {
        Some(spec) => synthesize_channels(&r.array, spec, r.adc.fs_hz, r.num_samples)?,
        None => vec![vec![0.0; r.num_samples]; r.array.num_elements],
    };
    capture(&streams, &r.adc, r.array.carrier_hz)
}

pub fn run_architecture(c: &Capture, r: &Resolved, arch: Architecture) -> Result<RunOutput> {
    match r.arithmetic {
        Arithmetic::Fixed => {
            let out = match arch {
                Architecture::Proposed => run_proposed(c, &r.chain)?,
                Architecture::Standard => run_standard(c, &r.chain)?,
            };
            for f in &out.frames {
                f.validate().map_err(|e| Error::Invariant(format!("{arch} output: {e}")))?;
            }
            Ok(RunOutput {
                architecture: arch,
                samples: out.samples(),
                bit_width: Some(out.bit_width),
                warmup_samples: out.warmup_samples,
                diagnostics: Some(out.diagnostics),
                fixed_frames: Some(out.frames),
            })
        }
        Arithmetic::Float => {
            let out = run_float_oracle(c, &r.chain, arch)?;
            Ok(RunOutput {
                architecture: arch,
                samples: out.samples,
                fixed_frames: None,
                bit_width: None,
                warmup_samples: out.warmup_samples,
                diagnostics: None,
            })
        }
    }
}

/// Run each architecture, on up to `jobs` threads. Output order follows
/// `r.architectures` whatever the thread count.
pub fn run_all(c: &Capture, r: &Resolved, jobs: usize) -> Result<Vec<RunOutput>> {
    if jobs <= 1 || r.architectures.len() <= 1 {
        return r.architectures.iter().map(|&a| run_architecture(c, r, a)).collect();
    }
    let mut results: Vec<Option<Result<RunOutput>>> = r.architectures.iter().map(|_| None).collect();
    for (archs, slots) in r.architectures.chunks(jobs).zip(results.chunks_mut(jobs)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = archs
                .iter()
                .map(|&a| s.spawn(move || run_architecture(c, r, a)))
                .collect();
            for (slot, h) in slots.iter_mut().zip(handles) {
                *slot = Some(
                    h.join()
                        .unwrap_or_else(|_| Err(Error::Invariant("worker thread panicked".into()))),
                );
            }
        });
    }
    results.into_iter().map(|r| r.expect("every slot filled")).collect()
}

pub fn metrics_for(out: &RunOutput, fs: f64) -> Result<ArchitectureMetrics> {
    let steady = &out.samples[out.warmup_samples.min(out.samples.len())..];
    let i: Vec<f64> = steady.iter().map(|c| c.re).collect();
    let q: Vec<f64> = steady.iter().map(|c| c.im).collect();
    Ok(ArchitectureMetrics {
        architecture: out.architecture,
        complex: measure(Samples::Complex(steady), fs, DEFAULT_HARMONICS, None)?,
        i: measure(Samples::Real(&i), fs, DEFAULT_HARMONICS, None)?,
        q: measure(Samples::Real(&q), fs, DEFAULT_HARMONICS, None)?,
        overflow_total: out.overflow_total(),
    })
}

/// Full run: writes capture, baseband, metrics and (for two
/// architectures) comparison files into `output_dir`.
pub fn simulate(r: &Resolved, output_dir: &Path, jobs: usize) -> Result<SimulationSummary> {
    fs::create_dir_all(output_dir)?;
    let mut files = Vec::new();
    let cap = build_capture(r)?;
    write_capture(&cap, &output_dir.join(CAPTURE_BIN), &output_dir.join(CAPTURE_HEADER))?;
    files.extend([CAPTURE_BIN.to_string(), CAPTURE_HEADER.to_string()]);

    let outputs = run_all(&cap, r, jobs)?;
    let fs_hz = cap.fs_hz;
    for out in &outputs {
        let csv = match &out.fixed_frames {
            Some(frames) => fixed_baseband_csv(frames)?,
            None => float_baseband_csv(&out.samples)?,
        };
        let csv_name = baseband_csv_name(out.architecture);
        fs::write(output_dir.join(&csv_name), csv)?;
        let meta = BasebandMeta {
            format_version: FORMAT_VERSION,
            architecture: out.architecture,
            arithmetic: r.arithmetic,
            fs_hz,
            bit_width: out.bit_width,
            warmup_samples: out.warmup_samples,
            num_samples: out.samples.len(),
            padded_samples: cap.padded_samples,
            diagnostics: out.diagnostics,
            overflow_total: out.overflow_total(),
        };
        let meta_name = baseband_meta_name(out.architecture);
        write_json(&output_dir.join(&meta_name), &meta)?;
        files.extend([csv_name, meta_name]);
    }

    let warmup = r.chain.warmup_samples();
    let metrics = MetricsReport {
        format_version: FORMAT_VERSION,
        arithmetic: r.arithmetic,
        fs_hz,
        warmup_samples: warmup,
        samples_analysed: cap.num_samples().saturating_sub(warmup),
        results: outputs.iter().map(|o| metrics_for(o, fs_hz)).collect::<Result<_>>()?,
    };
    write_json(&output_dir.join(METRICS_FILE), &metrics)?;
    files.push(METRICS_FILE.to_string());

    let comparison = match outputs.as_slice() {
        [a, b] => {
            let report = compare(&a.samples, &b.samples, warmup)?;
            let art = ComparisonArtifact {
                format_version: FORMAT_VERSION,
                arithmetic: r.arithmetic,
                reference: a.architecture,
                candidate: b.architecture,
                report,
            };
            write_json(&output_dir.join(COMPARISON_FILE), &art)?;
            files.push(COMPARISON_FILE.to_string());
            Some(art)
        }
        _ => None,
    };

    Ok(SimulationSummary {
        output_dir: output_dir.to_path_buf(),
        files,
        outputs,
        metrics,
        comparison,
    })
}
