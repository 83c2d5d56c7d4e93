use std::fs;
use std::path::{Path, PathBuf};

use dbfrx_core::analysis::{beam_pattern, degree_grid, spectrum_rows, BeamSummary, Samples, SpectrumWindow};
use dbfrx_core::array::ArrayConfig;
use dbfrx_core::artifacts::{measure, simulate as run_simulation, Measurement};
use dbfrx_core::beamformer::ComplexWeightSet;
use dbfrx_core::config::{RunConfig, WeightMode};
use dbfrx_core::formats::{
    beam_pattern_csv, parse_baseband_csv, spectrum_csv, to_json_string, write_json, BasebandMeta, FORMAT_VERSION,
};
use dbfrx_core::plan::{nyquist_zone, undersample_range_direct, undersample_range_inverted, PlanError, RateRange};
use dbfrx_core::resources::{estimate, Architecture};
use serde::Serialize;

use crate::{ArchArg, CliError, Component, Placement, WindowArg};

type CmdResult = Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn print_json<T: Serialize>(v: &T) -> CmdResult {
    print!("{}", to_json_string(v)?);
    Ok(())
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum ZoneReport {
    Ok {
        fs_hz: f64,
        zone_index: u64,
        spectrum_orientation: dbfrx_core::plan::Orientation,
        alias_if_hz: f64,
        /// Whether both band edges sit in the carrier's zone; needs a bandwidth.
        band_fits_zone: Option<bool>,
    },
    Infeasible {
        fs_hz: f64,
        reason: String,
    },
}

#[derive(Serialize)]
struct RangeReport {
    placement: &'static str,
    n: u32,
    nyquist_zone: u64,
    range: RateRange,
}

#[derive(Serialize)]
struct PlanReport {
    format_version: u32,
    fc_hz: f64,
    bw_hz: Option<f64>,
    sampling: Option<ZoneReport>,
    ranges: Vec<RangeReport>,
    infeasible: bool,
}

fn zone_report(fc: f64, bw: Option<f64>, fs: f64) -> Result<ZoneReport, CliError> {
    match nyquist_zone(fc, fs) {
        Ok(p) => {
            let band_fits_zone = bw.map(|bw| {
                let lo = nyquist_zone(fc - bw / 2.0, fs);
                let hi = nyquist_zone(fc + bw / 2.0, fs);
                matches!((lo, hi), (Ok(a), Ok(b)) if a.zone_index == p.zone_index && b.zone_index == p.zone_index)
            });
            Ok(ZoneReport::Ok {
                fs_hz: fs,
                zone_index: p.zone_index,
                spectrum_orientation: p.spectrum_orientation,
                alias_if_hz: p.alias_if_hz,
                band_fits_zone,
            })
        }
        Err(e @ PlanError::ZoneEdge { .. }) => Ok(ZoneReport::Infeasible {
            fs_hz: fs,
            reason: e.to_string(),
        }),
        Err(e) => Err(usage(e.to_string())),
    }
}

fn fmt_range(r: &RateRange) -> String {
    match r {
        RateRange::Feasible { fs_min_hz, fs_max_hz } => match fs_max_hz {
            Some(max) => format!("[{fs_min_hz:.6e}, {max:.6e}] Hz"),
            None => format!("[{fs_min_hz:.6e}, inf) Hz"),
        },
        RateRange::Infeasible { reason } => format!("infeasible ({reason:?})"),
    }
}

pub fn plan(fc: f64, bw: Option<f64>, fs: Option<f64>, zone: Option<u32>, placement: Placement, json: bool) -> CmdResult {
    if fs.is_none() && zone.is_none() {
        return Err(usage("plan needs --fs, --zone, or both"));
    }
    let sampling = fs.map(|fs| zone_report(fc, bw, fs)).transpose()?;
    let mut ranges = Vec::new();
    if let Some(n) = zone {
        let bw = bw.ok_or_else(|| usage("--zone needs --bw"))?;
        if matches!(placement, Placement::Direct | Placement::Both) {
            ranges.push(RangeReport {
                placement: "direct",
                n,
                nyquist_zone: 2 * n as u64 + 1,
                range: undersample_range_direct(fc, bw, n)?,
            });
        }
        if matches!(placement, Placement::Inverted | Placement::Both) {
            if n == 0 {
                if placement == Placement::Inverted {
                    return Err(usage("inverted placement needs --zone >= 1"));
                }
            } else {
                ranges.push(RangeReport {
                    placement: "inverted",
                    n,
                    nyquist_zone: 2 * n as u64,
                    range: undersample_range_inverted(fc, bw, n)?,
                });
            }
        }
    }
    let infeasible = matches!(sampling, Some(ZoneReport::Infeasible { .. }))
        || ranges.iter().any(|r| !r.range.is_feasible());
    let report = PlanReport {
        format_version: FORMAT_VERSION,
        fc_hz: fc,
        bw_hz: bw,
        sampling,
        ranges,
        infeasible,
    };
    if json {
        return print_json(&report);
    }
    println!("carrier: {fc:.6e} Hz");
    if let Some(bw) = bw {
        println!("bandwidth: {bw:.6e} Hz");
    }
    match &report.sampling {
        Some(ZoneReport::Ok {
            fs_hz,
            zone_index,
            spectrum_orientation,
            alias_if_hz,
            band_fits_zone,
        }) => {
            println!("fs {fs_hz:.6e} Hz: zone {zone_index}, {spectrum_orientation:?}, alias {alias_if_hz:.6e} Hz");
            if let Some(fits) = band_fits_zone {
                println!("band within zone: {fits}");
            }
        }
        Some(ZoneReport::Infeasible { fs_hz, reason }) => println!("fs {fs_hz:.6e} Hz: infeasible: {reason}"),
        None => {}
    }
    for r in &report.ranges {
        println!("{:<9} n={} zone {}: {}", r.placement, r.n, r.nyquist_zone, fmt_range(&r.range));
    }
    Ok(())
}

pub fn simulate(config: &Path, output_dir: Option<PathBuf>, jobs: usize) -> CmdResult {
    let cfg = RunConfig::load(config).map_err(|e| usage(format!("{}: {e}", config.display())))?;
    let resolved = cfg.resolve().map_err(|e| usage(format!("{}: {e}", config.display())))?;
    let dir = output_dir.unwrap_or_else(|| resolved.output_dir.clone());
    let summary = run_simulation(&resolved, &dir, jobs.max(1))?;
    for out in &summary.outputs {
        if let Some(d) = out.diagnostics {
            if d.total_overflows() > 0 {
                eprintln!(
                    "warning: {} chain overflow events: beamformer {}, ddc {}, fir {}",
                    out.architecture, d.beamformer.overflow_events, d.ddc.overflow_events, d.fir.overflow_events
                );
            }
        }
    }
    for f in &summary.files {
        println!("{}", dir.join(f).display());
    }
    Ok(())
}

pub struct BeamArgs {
    pub config: Option<PathBuf>,
    pub elements: Option<usize>,
    pub carrier: Option<f64>,
    pub spacing: Option<f64>,
    pub steer: f64,
    pub grid: (f64, f64, f64),
    pub output_dir: Option<PathBuf>,
    pub json: bool,
}

#[derive(Serialize)]
struct BeamReport {
    format_version: u32,
    num_elements: usize,
    spacing_m: f64,
    carrier_hz: f64,
    steer_angle_deg: Option<f64>,
    start_deg: f64,
    stop_deg: f64,
    step_deg: f64,
    summary: BeamSummary,
}

pub fn beampattern(a: BeamArgs) -> CmdResult {
    let (array, weights, steer) = match &a.config {
        Some(path) => {
            let cfg = RunConfig::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let r = cfg.resolve().map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let steer = match cfg.weights.mode {
                WeightMode::Steer => Some(cfg.weights.steer_angle_deg.unwrap_or(cfg.signal.arrival_angle_deg)),
                WeightMode::Explicit => None,
            };
            (r.array, r.chain.weights, steer)
        }
        None => {
            let n = a.elements.ok_or_else(|| usage("--elements is required without --config"))?;
            let fc = a.carrier.ok_or_else(|| usage("--carrier is required without --config"))?;
            let array = match a.spacing {
                Some(d) => ArrayConfig::new(n, d, fc)?,
                None => ArrayConfig::half_wavelength(n, fc)?,
            };
            if !(a.steer.abs() < 90.0) {
                return Err(usage("--steer must lie strictly inside (-90, 90) degrees"));
            }
            let w = ComplexWeightSet::steered(&array, a.steer.to_radians())?;
            (array, w, Some(a.steer))
        }
    };
    let (start, stop, step) = a.grid;
    if start < -90.0 || stop > 90.0 {
        return Err(usage("grid must lie within [-90, 90] degrees"));
    }
    let grid = degree_grid(start, stop, step)?;
    let bp = beam_pattern(&array, &weights, &grid)?;
    let report = BeamReport {
        format_version: FORMAT_VERSION,
        num_elements: array.num_elements,
        spacing_m: array.spacing_m,
        carrier_hz: array.carrier_hz,
        steer_angle_deg: steer,
        start_deg: start,
        stop_deg: stop,
        step_deg: step,
        summary: bp.summary(),
    };
    if let Some(dir) = &a.output_dir {
        fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        let rows: Vec<(f64, f64)> = bp
            .angles_rad
            .iter()
            .zip(&bp.gains_db)
            .map(|(t, g)| (t.to_degrees(), *g))
            .collect();
        fs::write(dir.join("beam_pattern.csv"), beam_pattern_csv(&rows)?)
            .map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        write_json(&dir.join("beam_pattern.json"), &report)?;
    }
    if a.json {
        return print_json(&report);
    }
    let s = &report.summary;
    let null = |v: Option<f64>| v.map_or("none".to_string(), |d| format!("{d:.2} deg"));
    println!("peak: {:.4} dB at {:.2} deg", s.peak_gain_db, s.peak_angle_deg);
    println!(
        "first nulls: {} / {}",
        null(s.first_null_left_deg),
        null(s.first_null_right_deg)
    );
    Ok(())
}

pub fn resources(arch: ArchArg, channels: u64, taps: u64, parallel: u64, json: bool) -> CmdResult {
    let arch = match arch {
        ArchArg::Proposed => Architecture::Proposed,
        ArchArg::Standard => Architecture::Standard,
    };
    let report = estimate(arch, channels, taps, parallel)?;
    if json {
        return print_json(&report);
    }
    print!("{}", report.to_table());
    Ok(())
}

pub struct MetricsArgs {
    pub csv: PathBuf,
    pub fs: Option<f64>,
    pub warmup: Option<usize>,
    pub harmonics: usize,
    pub window: WindowArg,
    pub component: Component,
    pub spectrum: Option<PathBuf>,
    pub json: bool,
}

#[derive(Serialize)]
struct MetricsCliReport {
    format_version: u32,
    fs_hz: f64,
    warmup_samples: usize,
    samples_analysed: usize,
    harmonics: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    complex: Option<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i: Option<Measurement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Measurement>,
}

fn describe(name: &str, m: &Measurement) {
    match m {
        Measurement::Ok(m) => println!(
            "{name:<8} f0 {:.6e} Hz  power {:.2} dB  snr {:.2}  sndr {:.2}  sfdr {:.2}  thd {:.2} dB  ({:?}, {} pt)",
            m.fundamental_hz, m.fundamental_power_db, m.snr_db, m.sndr_db, m.sfdr_db, m.thd_db, m.window, m.fft_size
        ),
        Measurement::NoFundamental => println!("{name:<8} no-fundamental"),
        Measurement::InsufficientSamples => println!("{name:<8} insufficient samples"),
    }
}

pub fn metrics(a: MetricsArgs) -> CmdResult {
    let text = fs::read_to_string(&a.csv).map_err(|e| usage(format!("{}: {e}", a.csv.display())))?;
    let samples = parse_baseband_csv(&text).map_err(|e| usage(format!("{}: {e}", a.csv.display())))?;
    let meta_path = a.csv.with_extension("json");
    let meta: Option<BasebandMeta> = if meta_path.is_file() {
        let t = fs::read_to_string(&meta_path).map_err(|e| usage(format!("{}: {e}", meta_path.display())))?;
        Some(serde_json::from_str(&t).map_err(|e| usage(format!("{}: {e}", meta_path.display())))?)
    } else {
        None
    };
    let fs = a
        .fs
        .or(meta.as_ref().map(|m| m.fs_hz))
        .ok_or_else(|| usage("no --fs given and no metadata file next to the CSV"))?;
    let warmup = a.warmup.or(meta.as_ref().map(|m| m.warmup_samples)).unwrap_or(0);
    let steady = &samples[warmup.min(samples.len())..];
    let window = match a.window {
        WindowArg::Auto => None,
        WindowArg::Rectangular => Some(SpectrumWindow::Rectangular),
        WindowArg::BlackmanHarris => Some(SpectrumWindow::BlackmanHarris),
    };
    let want = |c: Component| a.component == c || a.component == Component::All;
    let i: Vec<f64> = steady.iter().map(|c| c.re).collect();
    let q: Vec<f64> = steady.iter().map(|c| c.im).collect();
    let report = MetricsCliReport {
        format_version: FORMAT_VERSION,
        fs_hz: fs,
        warmup_samples: warmup,
        samples_analysed: steady.len(),
        harmonics: a.harmonics,
        complex: want(Component::Complex)
            .then(|| measure(Samples::Complex(steady), fs, a.harmonics, window))
            .transpose()?,
        i: want(Component::I)
            .then(|| measure(Samples::Real(&i), fs, a.harmonics, window))
            .transpose()?,
        q: want(Component::Q)
            .then(|| measure(Samples::Real(&q), fs, a.harmonics, window))
            .transpose()?,
    };
    if let Some(path) = &a.spectrum {
        let rows = spectrum_rows(
            Samples::Complex(steady),
            fs,
            window.unwrap_or(SpectrumWindow::BlackmanHarris),
        );
        fs::write(path, spectrum_csv(&rows)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    if a.json {
        return print_json(&report);
    }
    println!("fs {fs:.6e} Hz, {} samples after {warmup} warm-up", steady.len());
    for (name, m) in [("complex", &report.complex), ("i", &report.i), ("q", &report.q)] {
        if let Some(m) = m {
            describe(name, m);
        }
    }
    Ok(())
}
