//! Fixed-length overlapping windowing of a channel.
//!
//! Windows are pure index selections: length `L = round(window_s * rate)`,
//! hop `H = round((window_s - overlap_s) * rate)`, window `t` covering
//! `[t*H, t*H + L)`. Trailing samples that cannot fill a whole window are
//! dropped, so every segment is statistically comparable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window length and overlap in seconds. Defaults: 2 s windows, 1 s overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_s: f64,
    pub overlap_s: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            window_s: 2.0,
            overlap_s: 1.0,
        }
    }
}

impl WindowSpec {
    pub fn new(window_s: f64, overlap_s: f64) -> Result<Self> {
        if !(window_s > 0.0) || !(overlap_s >= 0.0) || overlap_s >= window_s {
            return Err(Error::BadWindowSpec {
                window_s,
                overlap_s,
            });
        }
        Ok(Self {
            window_s,
            overlap_s,
        })
    }

    pub fn window_len(&self, rate: f64) -> usize {
        (self.window_s * rate).round() as usize
    }

    pub fn hop(&self, rate: f64) -> usize {
        ((self.window_s - self.overlap_s) * rate).round().max(1.0) as usize
    }
}

/// One windowed channel slice with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub channel_label: String,
    pub start_index: usize,
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
}

/// Expected segment count: `floor((n - l) / h) + 1`.
pub fn segment_count(n: usize, l: usize, h: usize) -> usize {
    if n < l {
        0
    } else {
        (n - l) / h + 1
    }
}

pub fn segment_channel(
    samples: &[f64],
    rate: f64,
    spec: &WindowSpec,
    channel_label: &str,
) -> Result<Vec<Segment>> {
    let l = spec.window_len(rate);
    let h = spec.hop(rate);
    let n = samples.len();
    if n < l || l == 0 {
        return Err(Error::SignalTooShort { n, window: l });
    }
    Ok((0..segment_count(n, l, h))
        .map(|t| Segment {
            channel_label: channel_label.to_string(),
            start_index: t * h,
            samples: samples[t * h..t * h + l].to_vec(),
            sample_rate_hz: rate,
        })
        .collect())
}
