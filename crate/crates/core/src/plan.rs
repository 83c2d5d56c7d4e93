//! Nyquist-zone placement and under-sampling rate ranges.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative tolerance used for feasibility and zone-edge comparisons.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Direct,
    Mirrored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    /// 1-based Nyquist zone of the carrier.
    pub zone_index: u64,
    pub spectrum_orientation: Orientation,
    /// Frequency the carrier lands on in the first Nyquist zone.
    pub alias_if_hz: f64,
    pub fs_hz: f64,
    pub fc_hz: f64,
}

/// Zone, orientation and first-zone alias of `fc` sampled at `fs`.
///
/// A carrier sitting exactly on a zone boundary is reported as
/// [`PlanError::ZoneEdge`] instead of being assigned to either zone.
pub fn nyquist_zone(fc: f64, fs: f64) -> std::result::Result<FrequencyPlan, PlanError> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(PlanError::Domain(format!("fs must be > 0, got {fs}")));
    }
    if !(fc.is_finite() && fc >= 0.0) {
        return Err(PlanError::Domain(format!("fc must be >= 0, got {fc}")));
    }
    let half = fs / 2.0;
    let ratio = fc / half;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= REL_TOL * ratio.max(1.0) {
        return Err(PlanError::ZoneEdge { fc_hz: fc, fs_hz: fs });
    }
    let zone_index = ratio.floor() as u64 + 1;
    let r = fc.rem_euclid(fs);
    let alias_if_hz = if r < half { r } else { fs - r };
    let spectrum_orientation = if zone_index % 2 == 1 {
        Orientation::Direct
    } else {
        Orientation::Mirrored
    };
    Ok(FrequencyPlan {
        zone_index,
        spectrum_orientation,
        alias_if_hz,
        fs_hz: fs,
        fc_hz: fc,
    })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("carrier {fc_hz} Hz lies exactly on a Nyquist zone edge for fs = {fs_hz} Hz")]
    ZoneEdge { fc_hz: f64, fs_hz: f64 },
}

impl From<PlanError> for Error {
    fn from(e: PlanError) -> Self {
        domain(e.to_string())
    }
}

/// Outcome of an under-sampling range query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RateRange {
    Feasible {
        fs_min_hz: f64,
        /// `None` stands for an unbounded upper limit.
        fs_max_hz: Option<f64>,
    },
    Infeasible { reason: Infeasibility },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    /// The zone index exceeds the bound for this band.
    ZoneIndexTooLarge,
    /// The computed interval is empty.
    EmptyRange,
}

impl RateRange {
    pub fn is_feasible(&self) -> bool {
        matches!(self, RateRange::Feasible { .. })
    }

    /// True when `fs` is inside the range (inclusive).
    pub fn contains(&self, fs: f64) -> bool {
        match *self {
            RateRange::Feasible {
                fs_min_hz,
                fs_max_hz,
            } => fs >= fs_min_hz && fs_max_hz.is_none_or(|m| fs <= m),
            RateRange::Infeasible { .. } => false,
        }
    }
}

fn check_band(fc: f64, bw: f64) -> Result<()> {
    if !(bw.is_finite() && bw > 0.0) {
        return Err(domain(format!("bw must be > 0, got {bw}")));
    }
    if !(fc.is_finite() && fc > bw / 2.0) {
        return Err(domain(format!("fc must exceed bw/2, got fc={fc}, bw={bw}")));
    }
    Ok(())
}

fn le_tol(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs())
}

/// Sampling-rate range placing the band upright in zone `2n + 1`.
pub fn undersample_range_direct(fc: f64, bw: f64, n: u32) -> Result<RateRange> {
    check_band(fc, bw)?;
    let n_f = n as f64;
    let bound = (fc - bw / 2.0) / (2.0 * bw);
    if !le_tol(n_f, bound) {
        return Ok(RateRange::Infeasible {
            reason: Infeasibility::ZoneIndexTooLarge,
        });
    }
    let fs_min = (2.0 * fc + bw) / (2.0 * n_f + 1.0);
    let fs_max = (n > 0).then(|| (fc - bw / 2.0) / n_f);
    if let Some(max) = fs_max {
        if !le_tol(fs_min, max) {
            return Ok(RateRange::Infeasible {
                reason: Infeasibility::EmptyRange,
            });
        }
    }
    Ok(RateRange::Feasible {
        fs_min_hz: fs_min,
        fs_max_hz: fs_max,
    })
}

/// Sampling-rate range placing the band mirrored in zone `2n`.
pub fn undersample_range_inverted(fc: f64, bw: f64, n: u32) -> Result<RateRange> {
    check_band(fc, bw)?;
    if n == 0 {
        return Err(domain("inverted placement needs n >= 1"));
    }
    let n_f = n as f64;
    let bound = (fc + bw / 2.0) / (2.0 * bw);
    if !le_tol(n_f, bound) {
        return Ok(RateRange::Infeasible {
            reason: Infeasibility::ZoneIndexTooLarge,
        });
    }
    let fs_min = (fc + bw / 2.0) / n_f;
    let fs_max = (2.0 * fc - bw) / (2.0 * n_f - 1.0);
    if !le_tol(fs_min, fs_max) {
        return Ok(RateRange::Infeasible {
            reason: Infeasibility::EmptyRange,
        });
    }
    Ok(RateRange::Feasible {
        fs_min_hz: fs_min,
        fs_max_hz: Some(fs_max),
    })
}
