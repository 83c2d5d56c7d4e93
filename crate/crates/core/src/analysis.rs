//! Spectral metrics, beam patterns and run comparisons.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::beamformer::ComplexWeightSet;
use crate::error::{validation, Error, Result};

pub const MIN_METRIC_LEN: usize = 64;
pub const DEFAULT_HARMONICS: usize = 5;
/// Gains below this are reported as this value so patterns stay finite.
pub const GAIN_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumWindow {
    Rectangular,
    BlackmanHarris,
}

impl SpectrumWindow {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            SpectrumWindow::Rectangular => vec![1.0; n],
            SpectrumWindow::BlackmanHarris => (0..n)
                .map(|k| {
                    // periodic 4-term Blackman-Harris
                    let x = 2.0 * PI * k as f64 / n as f64;
                    0.35875 - 0.48829 * x.cos() + 0.14128 * (2.0 * x).cos() - 0.01168 * (3.0 * x).cos()
                })
                .collect(),
        }
    }

    /// Half-width in bins of the main lobe attributed to a tone.
    fn lobe(self) -> usize {
        match self {
            SpectrumWindow::Rectangular => 1,
            SpectrumWindow::BlackmanHarris => 4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Samples<'a> {
    Real(&'a [f64]),
    Complex(&'a [Complex64]),
}

impl Samples<'_> {
    fn len(&self) -> usize {
        match self {
            Samples::Real(s) => s.len(),
            Samples::Complex(s) => s.len(),
        }
    }

    fn is_real(&self) -> bool {
        matches!(self, Samples::Real(_))
    }
}

/// Two-sided `|X_k|^2` of the windowed input.
pub fn power_spectrum(samples: Samples<'_>, window: SpectrumWindow) -> Vec<f64> {
    let n = samples.len();
    let w = window.coefficients(n);
    let mut buf: Vec<Complex64> = match samples {
        Samples::Real(s) => s.iter().zip(&w).map(|(x, w)| Complex64::new(x * w, 0.0)).collect(),
        Samples::Complex(s) => s.iter().zip(&w).map(|(x, w)| x * w).collect(),
    };
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMetrics {
    /// Signed for complex input.
    pub fundamental_hz: f64,
    /// Mean power of the fundamental, dB relative to 1 (input units squared).
    pub fundamental_power_db: f64,
    pub snr_db: f64,
    pub sndr_db: f64,
    pub sfdr_db: f64,
    pub thd_db: f64,
    pub fft_size: usize,
    pub window: SpectrumWindow,
}

fn ratio_db(num: f64, den: f64) -> f64 {
    10.0 * (num.max(f64::MIN_POSITIVE) / den.max(f64::MIN_POSITIVE)).log10()
}

/// Bins of the analysed half (real) or full (complex) spectrum, with the
/// circular distance used for lobe membership.
struct BinSpace {
    n: usize,
    real: bool,
}

impl BinSpace {
    fn bins(&self) -> usize {
        if self.real {
            self.n / 2 + 1
        } else {
            self.n
        }
    }

    fn distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        if self.real {
            d
        } else {
            d.min(self.n - d)
        }
    }

    /// Bin of frequency `h * k0`, folded into the analysed range.
    fn harmonic(&self, k0: usize, h: usize) -> usize {
        let m = (k0 * h) % self.n;
        if self.real && m > self.n / 2 {
            self.n - m
        } else {
            m
        }
    }

    fn frequency(&self, k: usize, fs: f64) -> f64 {
        let k = k as f64;
        let n = self.n as f64;
        if !self.real && k >= n / 2.0 {
            (k - n) * fs / n
        } else {
            k * fs / n
        }
    }
}

/// Guess the window: rectangular when the strongest tone sits on a bin
/// centre (its neighbours are 60 dB down), Blackman-Harris otherwise.
pub fn auto_window(samples: Samples<'_>) -> SpectrumWindow {
    let p = power_spectrum(samples, SpectrumWindow::Rectangular);
    let space = BinSpace {
        n: p.len(),
        real: samples.is_real(),
    };
    let nb = space.bins();
    let Some(k0) = (1..nb).max_by(|&a, &b| p[a].total_cmp(&p[b])) else {
        return SpectrumWindow::BlackmanHarris;
    };
    let neighbour = |k: isize| p[k.rem_euclid(p.len() as isize) as usize];
    let side = neighbour(k0 as isize - 1).max(neighbour(k0 as isize + 1));
    if side < 1e-6 * p[k0] {
        SpectrumWindow::Rectangular
    } else {
        SpectrumWindow::BlackmanHarris
    }
}

/// SNR, SNDR, SFDR and THD of the strongest non-DC tone.
///
/// `harmonics` counts the harmonic bins (2nd, 3rd, ...) attributed to
/// distortion; they are folded into the analysed band before attribution.
/// `window = None` picks one with [`auto_window`].
pub fn spectral_metrics(
    samples: Samples<'_>,
    fs: f64,
    harmonics: usize,
    window: Option<SpectrumWindow>,
) -> Result<SpectralMetrics> {
    let n = samples.len();
    if n < MIN_METRIC_LEN {
        return Err(validation(format!("need at least {MIN_METRIC_LEN} samples, got {n}")));
    }
    if !(fs > 0.0) {
        return Err(validation("fs must be positive"));
    }
    let window = window.unwrap_or_else(|| auto_window(samples));
    let p = power_spectrum(samples, window);
    let space = BinSpace {
        n,
        real: samples.is_real(),
    };
    let nb = space.bins();
    let lobe = window.lobe();

    let total: f64 = p[..nb].iter().sum();
    let in_dc = |k: usize| space.distance(k, 0) <= lobe;
    let k0 = (0..nb)
        .filter(|&k| !in_dc(k))
        .max_by(|&a, &b| p[a].total_cmp(&p[b]))
        .ok_or(Error::NoFundamental)?;
    let non_dc: f64 = (0..nb).filter(|&k| !in_dc(k)).map(|k| p[k]).sum();
    if p[k0] == 0.0 || non_dc <= 1e-20 * total {
        return Err(Error::NoFundamental);
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Class {
        Dc,
        Fund,
        Harm,
        Noise,
    }
    let mut class: Vec<Class> = (0..nb)
        .map(|k| {
            if in_dc(k) {
                Class::Dc
            } else if space.distance(k, k0) <= lobe {
                Class::Fund
            } else {
                Class::Noise
            }
        })
        .collect();
    for h in 2..harmonics + 2 {
        let kh = space.harmonic(k0, h);
        for (k, c) in class.iter_mut().enumerate() {
            if *c == Class::Noise && space.distance(k, kh) <= lobe {
                *c = Class::Harm;
            }
        }
    }
    let sum = |want: Class| -> f64 { (0..nb).filter(|&k| class[k] == want).map(|k| p[k]).sum() };
    let (p_fund, p_harm, p_noise) = (sum(Class::Fund), sum(Class::Harm), sum(Class::Noise));
    let spur = (0..nb)
        .filter(|&k| matches!(class[k], Class::Harm | Class::Noise))
        .map(|k| p[k])
        .fold(0.0, f64::max);

    let w = window.coefficients(n);
    let wpow: f64 = w.iter().map(|v| v * v).sum();
    let sides = if space.real { 2.0 } else { 1.0 };
    let fund_mean_power = sides * p_fund / (n as f64 * wpow);

    Ok(SpectralMetrics {
        fundamental_hz: space.frequency(k0, fs),
        fundamental_power_db: 10.0 * fund_mean_power.log10(),
        snr_db: ratio_db(p_fund, p_noise),
        sndr_db: ratio_db(p_fund, p_noise + p_harm),
        sfdr_db: ratio_db(p[k0], spur).max(0.0),
        thd_db: ratio_db(p_harm, p_fund),
        fft_size: n,
        window,
    })
}

/// `(frequency_hz, power_db)` rows, DC first; complex input is reordered
/// from -fs/2 to fs/2. Power is normalized so a unit-amplitude coherent
/// tone reads 0 dB (real) or a unit phasor reads 0 dB (complex).
pub fn spectrum_rows(samples: Samples<'_>, fs: f64, window: SpectrumWindow) -> Vec<(f64, f64)> {
    let n = samples.len();
    let p = power_spectrum(samples, window);
    let space = BinSpace {
        n,
        real: samples.is_real(),
    };
    let gain: f64 = window.coefficients(n).iter().sum();
    let norm = match samples {
        Samples::Real(_) => (gain / 2.0).powi(2),
        Samples::Complex(_) => gain * gain,
    };
    let db = |v: f64| 10.0 * (v / norm).max(1e-30).log10();
    if space.real {
        (0..space.bins()).map(|k| (space.frequency(k, fs), db(p[k]))).collect()
    } else {
        (0..n)
            .map(|i| (i + n.div_ceil(2)) % n)
            .map(|k| (space.frequency(k, fs), db(p[k])))
            .collect()
    }
}

/// Phase-difference frequency estimate, one value per sample pair.
pub fn instantaneous_frequency(samples: &[Complex64], fs: f64) -> Vec<f64> {
    samples
        .windows(2)
        .map(|w| (w[1] * w[0].conj()).arg() * fs / (2.0 * PI))
        .collect()
}

/// Fraction of total power within `|f| <= band_hz`.
pub fn power_fraction_within(samples: &[Complex64], fs: f64, band_hz: f64) -> f64 {
    let n = samples.len();
    let p = power_spectrum(Samples::Complex(samples), SpectrumWindow::BlackmanHarris);
    let space = BinSpace { n, real: false };
    let total: f64 = p.iter().sum();
    let inside: f64 = (0..n)
        .filter(|&k| space.frequency(k, fs).abs() <= band_hz)
        .map(|k| p[k])
        .sum();
    if total == 0.0 {
        0.0
    } else {
        inside / total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPattern {
    pub angles_rad: Vec<f64>,
    pub gains_db: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSummary {
    pub peak_angle_deg: f64,
    pub peak_gain_db: f64,
    /// Nearest local minima left and right of the peak.
    pub first_null_left_deg: Option<f64>,
    pub first_null_right_deg: Option<f64>,
}

impl BeamPattern {
    /// First index of the maximum gain.
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, g) in self.gains_db.iter().enumerate() {
            if *g > self.gains_db[best] {
                best = i;
            }
        }
        best
    }

    pub fn summary(&self) -> BeamSummary {
        let g = &self.gains_db;
        let pk = self.peak_index();
        let is_min = |i: usize| i > 0 && i + 1 < g.len() && g[i] < g[i - 1] && g[i] < g[i + 1];
        let left = (1..pk).rev().find(|&i| is_min(i));
        let right = (pk + 1..g.len().saturating_sub(1)).find(|&i| is_min(i));
        BeamSummary {
            peak_angle_deg: self.angles_rad[pk].to_degrees(),
            peak_gain_db: g[pk],
            first_null_left_deg: left.map(|i| self.angles_rad[i].to_degrees()),
            first_null_right_deg: right.map(|i| self.angles_rad[i].to_degrees()),
        }
    }
}

/// Array response of the dequantized weights, `|sum_n w_n exp(-j w_c tau_n)|`,
/// in dB. A perfectly matched set peaks at `20 log10(N)`.
pub fn beam_pattern(cfg: &ArrayConfig, w: &ComplexWeightSet, grid: &[f64]) -> Result<BeamPattern> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(validation("angle grid is empty"));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(validation("angle grid must be strictly increasing"));
    }
    if w.len() != cfg.num_elements {
        return Err(validation("weight count differs from element count"));
    }
    Ok(beam_pattern_ideal(cfg, &w.dequantized(), grid))
}

/// As [`beam_pattern`] but for arbitrary complex weights (1.0 = unit gain).
pub fn beam_pattern_ideal(cfg: &ArrayConfig, w: &[Complex64], grid: &[f64]) -> BeamPattern {
    let wc = cfg.angular_carrier();
    let gains_db = grid
        .iter()
        .map(|&theta| {
            let step = -wc * cfg.spacing_m * theta.sin() / cfg.wave_speed_mps;
            let sum: Complex64 = w
                .iter()
                .enumerate()
                .map(|(n, wn)| wn * Complex64::from_polar(1.0, step * n as f64))
                .sum();
            (20.0 * sum.norm().log10()).max(GAIN_FLOOR_DB)
        })
        .collect();
    BeamPattern {
        angles_rad: grid.to_vec(),
        gains_db,
    }
}

/// Uniform grid in degrees, converted to radians, inclusive of both ends.
pub fn degree_grid(start_deg: f64, stop_deg: f64, step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0) || !(stop_deg >= start_deg) {
        return Err(validation("grid needs step > 0 and stop >= start"));
    }
    let count = ((stop_deg - start_deg) / step_deg + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| (start_deg + i as f64 * step_deg).to_radians())
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub max_abs_diff: f64,
    pub rms_diff: f64,
    pub rms_reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub warmup_samples: usize,
    pub samples_compared: usize,
    /// Largest per-component absolute difference.
    pub max_abs_diff: f64,
    /// `||a - b|| / ||a||` over the compared samples (0 when both are zero).
    pub relative_rms_diff: f64,
    pub i: ComponentStats,
    pub q: ComponentStats,
}

/// Compare two baseband sequences after discarding `warmup` samples.
pub fn compare(a: &[Complex64], b: &[Complex64], warmup: usize) -> Result<ComparisonReport> {
    if a.len() != b.len() {
        return Err(validation(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    let start = warmup.min(a.len());
    let (a, b) = (&a[start..], &b[start..]);
    let m = a.len().max(1) as f64;
    let stats = |get: fn(&Complex64) -> f64| {
        let mut st = ComponentStats::default();
        let (mut d2, mut r2) = (0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            let d = get(x) - get(y);
            st.max_abs_diff = st.max_abs_diff.max(d.abs());
            d2 += d * d;
            r2 += get(x) * get(x);
        }
        st.rms_diff = (d2 / m).sqrt();
        st.rms_reference = (r2 / m).sqrt();
        (st, d2, r2)
    };
    let (i, di, ri) = stats(|c| c.re);
    let (q, dq, rq) = stats(|c| c.im);
    let relative_rms_diff = if di + dq == 0.0 { 0.0 } else { ((di + dq) / (ri + rq)).sqrt() };
    Ok(ComparisonReport {
        warmup_samples: warmup,
        samples_compared: a.len(),
        max_abs_diff: i.max_abs_diff.max(q.max_abs_diff),
        relative_rms_diff,
        i,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adc::{quantize, AdcConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const N: usize = 8192;
    const FS: f64 = 1.6e9;

    fn sine(cycles: f64, amp: f64, phase: f64) -> Vec<f64> {
        (0..N)
            .map(|k| amp * (2.0 * PI * cycles * k as f64 / N as f64 + phase).sin())
            .collect()
    }

    /// 12-bit quantized full-scale sine; the "dither" is a random start phase
    /// so the quantization error decorrelates from the signal.
    fn quantized_sine(cycles: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = rng.random::<f64>() * 2.0 * PI;
        let cfg = AdcConfig::default();
        sine(cycles, 2047.0 / 2048.0, phase)
            .into_iter()
            .map(|v| quantize(v, &cfg).unwrap() as f64)
            .collect()
    }

    #[test]
    fn pure_sine_has_no_spurs() {
        let x = sine(101.0, 1.0, 0.3);
        let m = spectral_metrics(Samples::Real(&x), FS, 5, Some(SpectrumWindow::Rectangular)).unwrap();
        assert!(m.sfdr_db > 250.0, "{}", m.sfdr_db);
        assert!((m.fundamental_hz - 101.0 * FS / N as f64).abs() < 1e-6);
        assert!((m.fundamental_power_db - 10.0 * 0.5f64.log10()).abs() < 1e-9);
        assert!(m.sndr_db <= m.snr_db);
    }

    #[test]
    fn quantized_sine_snr() {
        // 6.02 * 12 + 1.76 = 74.0 dB
        let x = quantized_sine(1021.0, 5);
        let m = spectral_metrics(Samples::Real(&x), FS, 5, None).unwrap();
        assert_eq!(m.window, SpectrumWindow::Rectangular);
        assert!((m.snr_db - 74.0).abs() <= 1.0, "{}", m.snr_db);
        assert!(m.sndr_db <= m.snr_db);
    }

    #[test]
    fn windows_agree_on_snr() {
        let x = quantized_sine(1021.0, 9);
        let rect = spectral_metrics(Samples::Real(&x), FS, 5, Some(SpectrumWindow::Rectangular)).unwrap();
        let y = quantized_sine(1021.37, 9);
        let bh = spectral_metrics(Samples::Real(&y), FS, 5, None).unwrap();
        assert_eq!(bh.window, SpectrumWindow::BlackmanHarris);
        assert!((rect.snr_db - bh.snr_db).abs() <= 1.0, "{} vs {}", rect.snr_db, bh.snr_db);
    }

    #[test]
    fn second_harmonic_sets_sfdr_and_thd() {
        let a = sine(97.0, 1.0, 0.0);
        let h = sine(194.0, 1e-3, 0.4);
        let x: Vec<f64> = a.iter().zip(&h).map(|(a, b)| a + b).collect();
        let m = spectral_metrics(Samples::Real(&x), FS, 5, Some(SpectrumWindow::Rectangular)).unwrap();
        assert!((m.sfdr_db - 60.0).abs() <= 0.5, "{}", m.sfdr_db);
        assert!((m.thd_db + 60.0).abs() <= 0.5, "{}", m.thd_db);
    }

    #[test]
    fn harmonics_fold_into_band() {
        // 3rd harmonic of bin 3000 is bin 9000, which aliases to 9000 - 8192 = 808
        let a = sine(3000.0, 1.0, 0.0);
        let folded = sine(808.0, 1e-2, 0.1);
        let x: Vec<f64> = a.iter().zip(&folded).map(|(a, b)| a + b).collect();
        let m = spectral_metrics(Samples::Real(&x), FS, 5, Some(SpectrumWindow::Rectangular)).unwrap();
        assert!((m.thd_db + 40.0).abs() < 0.1, "{}", m.thd_db);
    }

    #[test]
    fn constant_has_no_fundamental() {
        let x = vec![3.0; 256];
        assert!(matches!(
            spectral_metrics(Samples::Real(&x), FS, 5, None),
            Err(Error::NoFundamental)
        ));
        let z = vec![0.0; 256];
        assert!(matches!(
            spectral_metrics(Samples::Real(&z), FS, 5, None),
            Err(Error::NoFundamental)
        ));
        assert!(spectral_metrics(Samples::Real(&x[..32]), FS, 5, None).is_err());
    }

    #[test]
    fn complex_tone_sign() {
        let x: Vec<Complex64> = (0..1024)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * 50.0 * k as f64 / 1024.0))
            .collect();
        let m = spectral_metrics(Samples::Complex(&x), 1024.0, 5, None).unwrap();
        assert_eq!(m.fundamental_hz, -50.0);
        assert!(m.fundamental_power_db.abs() < 1e-9);
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Complex64> = (0..1000)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let p = power_spectrum(Samples::Complex(&x), SpectrumWindow::Rectangular);
        let freq: f64 = p.iter().sum::<f64>() / x.len() as f64;
        let time: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        assert!((freq - time).abs() <= 1e-9 * time);
    }

    #[test]
    fn spectrum_rows_layout() {
        let x = sine(16.0, 1.0, 0.0);
        let rows = spectrum_rows(Samples::Real(&x), FS, SpectrumWindow::Rectangular);
        assert_eq!(rows.len(), N / 2 + 1);
        assert!(rows[16].1.abs() < 1e-9);
        let z: Vec<Complex64> = (0..64).map(|k| Complex64::from_polar(1.0, 2.0 * PI * 4.0 * k as f64 / 64.0)).collect();
        let rows = spectrum_rows(Samples::Complex(&z), 64.0, SpectrumWindow::Rectangular);
        assert_eq!(rows[0].0, -32.0);
        assert!(rows.windows(2).all(|w| w[1].0 > w[0].0));
        assert!(rows.iter().find(|r| r.0 == 4.0).unwrap().1.abs() < 1e-9);
    }

    fn array4() -> ArrayConfig {
        ArrayConfig::half_wavelength(4, 3.6e9).unwrap()
    }

    #[test]
    fn broadside_pattern() {
        let cfg = array4();
        let w = ComplexWeightSet::steered(&cfg, 0.0).unwrap();
        let grid = degree_grid(-90.0, 90.0, 0.25).unwrap();
        let bp = beam_pattern(&cfg, &w, &grid).unwrap();
        let s = bp.summary();
        assert!((s.peak_gain_db - 20.0 * 4f64.log10()).abs() < 1e-9);
        assert_eq!(s.peak_angle_deg, 0.0);
        assert!((s.first_null_right_deg.unwrap() - 30.0).abs() < 1e-9);
        assert!((s.first_null_left_deg.unwrap() + 30.0).abs() < 1e-9);
        assert!(bp.gains_db.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn steered_pattern_peaks_at_steer() {
        let cfg = array4();
        let w = ComplexWeightSet::steered(&cfg, 10f64.to_radians()).unwrap();
        let grid = degree_grid(-90.0, 90.0, 0.25).unwrap();
        let s = beam_pattern(&cfg, &w, &grid).unwrap().summary();
        assert!((s.peak_angle_deg - 10.0).abs() <= 0.25);
    }

    #[test]
    fn single_element_is_flat() {
        let cfg = ArrayConfig::half_wavelength(1, 3.6e9).unwrap();
        let w = ComplexWeightSet::steered(&cfg, 0.0).unwrap();
        let bp = beam_pattern(&cfg, &w, &degree_grid(-80.0, 80.0, 1.0).unwrap()).unwrap();
        assert!(bp.gains_db.iter().all(|g| g.abs() < 1e-12));
        let s = bp.summary();
        assert_eq!(s.peak_angle_deg, -80.0);
        assert_eq!((s.first_null_left_deg, s.first_null_right_deg), (None, None));
    }

    #[test]
    fn pattern_input_errors() {
        let cfg = array4();
        let w = ComplexWeightSet::unit(4);
        assert!(beam_pattern(&cfg, &w, &[]).is_err());
        assert!(beam_pattern(&cfg, &w, &[0.1, 0.0]).is_err());
        assert!(beam_pattern(&cfg, &ComplexWeightSet::unit(3), &[0.0]).is_err());
    }

    #[test]
    fn ideal_peak_tracks_steering_on_fine_grid() {
        let cfg = array4();
        let grid = degree_grid(-89.75, 89.75, 0.25).unwrap();
        for i in 0..grid.len() {
            let theta = grid[i];
            let w: Vec<Complex64> = crate::array::steering_vector(&cfg, theta)
                .unwrap()
                .conjugate()
                .phasors()
                .to_vec();
            let bp = beam_pattern_ideal(&cfg, &w, &grid);
            let g = &bp.gains_db;
            let best = g.iter().cloned().fold(f64::MIN, f64::max);
            assert!(g[i] >= best - 1e-9, "steer {} deg", theta.to_degrees());
        }
    }

    #[test]
    fn argmax_invariant_under_weight_scaling() {
        let cfg = array4();
        let grid = degree_grid(-90.0, 90.0, 0.5).unwrap();
        let w = ComplexWeightSet::steered(&cfg, 25f64.to_radians()).unwrap();
        let half = ComplexWeightSet {
            weights: w
                .weights
                .iter()
                .map(|c| crate::beamformer::ComplexWeight { re: c.re / 2, im: c.im / 2 })
                .collect(),
        };
        let a = beam_pattern(&cfg, &w, &grid).unwrap().peak_index();
        let b = beam_pattern(&cfg, &half, &grid).unwrap().peak_index();
        assert_eq!(a, b);
    }

    #[test]
    fn compare_reports() {
        let a: Vec<Complex64> = (0..10).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        let r = compare(&a, &a, 2).unwrap();
        assert_eq!((r.max_abs_diff, r.relative_rms_diff), (0.0, 0.0));
        assert_eq!(r.samples_compared, 8);
        let mut b = a.clone();
        b[5].re += 1.0;
        let r = compare(&a, &b, 2).unwrap();
        assert_eq!(r.max_abs_diff, 1.0);
        assert_eq!(r.q.max_abs_diff, 0.0);
        assert!(compare(&a, &b[..9], 0).is_err());
    }

    #[test]
    fn instantaneous_frequency_of_tone() {
        let f = 1.25e6;
        let x: Vec<Complex64> = (0..100)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * f * k as f64 / 1e8))
            .collect();
        for v in instantaneous_frequency(&x, 1e8) {
            assert!((v - f).abs() < 1e-3);
        }
    }
}
