//! On-disk artifact formats: capture binary and sidecar, baseband CSV and
//! metadata, spectrum and beam-pattern CSVs.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adc::{Capture, ADC_BITS};
use crate::chain::{Arithmetic, ChainDiagnostics};
use crate::error::{validation, Result};
use crate::iq::IqFrame;
use crate::resources::Architecture;
use crate::PARALLEL;

pub const FORMAT_VERSION: u32 = 1;
pub const BASEBAND_HEADER: [&str; 4] = ["frame_index", "slot", "i", "q"];

/// JSON sidecar describing a capture binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureHeader {
    pub format_version: u32,
    pub fs_hz: f64,
    pub carrier_hz: f64,
    pub num_channels: usize,
    pub parallel_factor: usize,
    pub frame_count: usize,
    pub bits: u32,
    pub padded_samples: usize,
    /// Always `"i16le"`.
    pub sample_encoding: String,
}

impl CaptureHeader {
    pub fn for_capture(c: &Capture) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            fs_hz: c.fs_hz,
            carrier_hz: c.carrier_hz,
            num_channels: c.num_channels,
            parallel_factor: PARALLEL,
            frame_count: c.frames.len(),
            bits: ADC_BITS,
            padded_samples: c.padded_samples,
            sample_encoding: "i16le".to_string(),
        }
    }

    pub fn byte_len(&self) -> usize {
        self.frame_count * self.parallel_factor * self.num_channels * 2
    }
}

/// Stream order, channels interleaved per sample:
/// `s0c0 s0c1 .. s0c(N-1) s1c0 ...`, each a little-endian i16.
pub fn encode_capture(c: &Capture) -> Vec<u8> {
    let mut out = Vec::with_capacity(c.num_samples() * c.num_channels * 2);
    for f in &c.frames {
        for p in 0..PARALLEL {
            for ch in &f.samples {
                out.extend_from_slice(&ch[p].to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_capture(bytes: &[u8], h: &CaptureHeader) -> Result<Capture> {
    if h.format_version != FORMAT_VERSION {
        return Err(validation(format!("unsupported capture format version {}", h.format_version)));
    }
    if h.parallel_factor != PARALLEL || h.bits != ADC_BITS || h.sample_encoding != "i16le" {
        return Err(validation("capture header does not describe 8-parallel 12-bit i16le data"));
    }
    if h.num_channels == 0 || bytes.len() != h.byte_len() {
        return Err(validation(format!(
            "capture holds {} bytes, header implies {}",
            bytes.len(),
            h.byte_len()
        )));
    }
    let total = h.frame_count * PARALLEL;
    if h.padded_samples >= PARALLEL || h.padded_samples > total {
        return Err(validation("padded_samples inconsistent with frame count"));
    }
    let mut streams = vec![Vec::with_capacity(total); h.num_channels];
    for (k, pair) in bytes.chunks_exact(2).enumerate() {
        streams[k % h.num_channels].push(i16::from_le_bytes([pair[0], pair[1]]));
    }
    for s in &mut streams {
        s.truncate(total - h.padded_samples);
    }
    let c = Capture::from_codes(&streams, h.fs_hz, h.carrier_hz)?;
    if c.frames.len() != h.frame_count {
        return Err(validation("frame count mismatch after decoding"));
    }
    Ok(c)
}

pub fn write_capture(c: &Capture, bin_path: &Path, header_path: &Path) -> Result<()> {
    fs::write(bin_path, encode_capture(c))?;
    write_json(header_path, &CaptureHeader::for_capture(c))
}

pub fn read_capture(bin_path: &Path, header_path: &Path) -> Result<Capture> {
    let h: CaptureHeader = serde_json::from_slice(&fs::read(header_path)?)?;
    decode_capture(&fs::read(bin_path)?, &h)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Metadata written next to a baseband CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasebandMeta {
    pub format_version: u32,
    pub architecture: Architecture,
    pub arithmetic: Arithmetic,
    pub fs_hz: f64,
    /// Declared width of the integer samples; absent for float output.
    pub bit_width: Option<u32>,
    pub warmup_samples: usize,
    pub num_samples: usize,
    pub padded_samples: usize,
    pub diagnostics: Option<ChainDiagnostics>,
    pub overflow_total: u64,
}

#[derive(Serialize)]
struct FixedRow {
    frame_index: u64,
    slot: usize,
    i: i64,
    q: i64,
}

#[derive(Serialize, Deserialize)]
struct FloatRow {
    frame_index: u64,
    slot: usize,
    i: f64,
    q: f64,
}

pub fn fixed_baseband_csv(frames: &[IqFrame]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for f in frames {
        for slot in 0..PARALLEL {
            w.serialize(FixedRow {
                frame_index: f.frame_index,
                slot,
                i: f.i[slot],
                q: f.q[slot],
            })?;
        }
    }
    if frames.is_empty() {
        w.write_record(BASEBAND_HEADER)?;
    }
    finish(w)
}

pub fn float_baseband_csv(samples: &[Complex64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (k, s) in samples.iter().enumerate() {
        w.serialize(FloatRow {
            frame_index: (k / PARALLEL) as u64,
            slot: k % PARALLEL,
            i: s.re,
            q: s.im,
        })?;
    }
    if samples.is_empty() {
        w.write_record(BASEBAND_HEADER)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| validation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| validation(e.to_string()))
}

/// Parse a baseband CSV (integer or float values) into stream-ordered
/// samples. Rows must be in `(frame_index, slot)` order without gaps.
pub fn parse_baseband_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != BASEBAND_HEADER {
        return Err(validation(format!("baseband header must be {}", BASEBAND_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (k, row) in r.deserialize::<FloatRow>().enumerate() {
        let row = row?;
        if row.frame_index != (k / PARALLEL) as u64 || row.slot != k % PARALLEL {
            return Err(validation(format!(
                "row {} has frame_index {} slot {}, expected {} {}",
                k + 1,
                row.frame_index,
                row.slot,
                k / PARALLEL,
                k % PARALLEL
            )));
        }
        out.push(Complex64::new(row.i, row.q));
    }
    Ok(out)
}

pub fn spectrum_csv(rows: &[(f64, f64)]) -> Result<String> {
    pair_csv(["frequency_hz", "power_db"], rows)
}

pub fn beam_pattern_csv(rows: &[(f64, f64)]) -> Result<String> {
    pair_csv(["angle_deg", "gain_db"], rows)
}

fn pair_csv(header: [&str; 2], rows: &[(f64, f64)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_capture() -> Capture {
        let a: Vec<i16> = (0..13).map(|k| k * 100 - 600).collect();
        let b: Vec<i16> = (0..13).map(|k| -2048 + k).collect();
        Capture::from_codes(&[a, b], 1.6e9, 3.6e9).unwrap()
    }

    #[test]
    fn capture_layout_is_interleaved_le() {
        let c = small_capture();
        let bytes = encode_capture(&c);
        assert_eq!(bytes.len(), 2 * 16 * 2);
        // sample 0: channel 0 = -600, channel 1 = -2048
        assert_eq!(&bytes[0..4], &[0xa8, 0xfd, 0x00, 0xf8]);
        // the three padding samples are zero
        assert!(bytes[13 * 4..].iter().all(|&b| b == 0));
    }

    #[test]
    fn capture_round_trip_through_files() {
        let c = small_capture();
        let dir = tempfile::tempdir().unwrap();
        let (bin, hdr) = (dir.path().join("c.bin"), dir.path().join("c.json"));
        write_capture(&c, &bin, &hdr).unwrap();
        assert_eq!(read_capture(&bin, &hdr).unwrap(), c);
        let h: CaptureHeader = serde_json::from_slice(&fs::read(&hdr).unwrap()).unwrap();
        assert_eq!((h.frame_count, h.padded_samples, h.num_channels), (2, 3, 2));
    }

    #[test]
    fn decode_rejects_bad_input() {
        let c = small_capture();
        let h = CaptureHeader::for_capture(&c);
        let bytes = encode_capture(&c);
        assert!(decode_capture(&bytes[..10], &h).is_err());
        let mut bad = h.clone();
        bad.format_version = 2;
        assert!(decode_capture(&bytes, &bad).is_err());
        let mut bad = h.clone();
        bad.padded_samples = 9;
        assert!(decode_capture(&bytes, &bad).is_err());
        let mut out_of_range = bytes.clone();
        out_of_range[0..2].copy_from_slice(&4000i16.to_le_bytes());
        assert!(decode_capture(&out_of_range, &h).is_err());
        let unknown = r#"{"format_version":1,"extra":0}"#;
        assert!(serde_json::from_str::<CaptureHeader>(unknown).is_err());
    }

    #[test]
    fn fixed_csv_layout() {
        let mut f = IqFrame::zeroed(0, 36);
        f.i[1] = -5;
        f.q[7] = 1 << 34;
        let text = fixed_baseband_csv(&[f]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "frame_index,slot,i,q");
        assert_eq!(lines[2], "0,1,-5,0");
        assert_eq!(lines[8], "0,7,0,17179869184");
        let parsed = parse_baseband_csv(&text).unwrap();
        assert_eq!(parsed[7], Complex64::new(0.0, (1u64 << 34) as f64));
    }

    #[test]
    fn csv_rejects_gaps_and_headers() {
        assert!(parse_baseband_csv("frame_index,slot,i,q\n0,1,0,0\n").is_err());
        assert!(parse_baseband_csv("a,b,c,d\n").is_err());
        assert!(parse_baseband_csv("frame_index,slot,i,q\n0,0,x,0\n").is_err());
        assert_eq!(parse_baseband_csv("frame_index,slot,i,q\n").unwrap().len(), 0);
        assert_eq!(float_baseband_csv(&[]).unwrap(), "frame_index,slot,i,q\n");
    }

    #[test]
    fn pair_csvs() {
        let s = beam_pattern_csv(&[(-1.5, 12.0)]).unwrap();
        assert_eq!(s, "angle_deg,gain_db\n-1.5,12.0\n");
        assert!(spectrum_csv(&[]).unwrap().starts_with("frequency_hz,power_db"));
    }

    proptest! {
        #[test]
        fn float_csv_round_trips(v in proptest::collection::vec((-1e12f64..1e12, -1e12f64..1e12), 0..40)) {
            let s: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let text = float_baseband_csv(&s).unwrap();
            prop_assert_eq!(parse_baseband_csv(&text).unwrap(), s);
        }

        #[test]
        fn capture_bytes_round_trip(
            n in 1usize..5,
            len in 1usize..40,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let streams: Vec<Vec<i16>> = (0..n)
                .map(|_| (0..len).map(|_| rng.random_range(-2048i16..=2047)).collect())
                .collect();
            let c = Capture::from_codes(&streams, 1.6e9, 2e9).unwrap();
            let h = CaptureHeader::for_capture(&c);
            prop_assert_eq!(decode_capture(&encode_capture(&c), &h).unwrap(), c);
        }
    }
}
