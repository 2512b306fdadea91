//! Continuous Morlet wavelet transform over a 1-3 Hz scale grid.
//!
//! The mother wavelet is the real Morlet `psi(t) = exp(-t^2/2) cos(5t)`,
//! whose carrier gives a center frequency of `5/(2*pi)` Hz. Scales map to
//! pseudo-frequencies through `F_a = F_c / (a * dt)` with `a` the
//! dimensionless scale in samples.
//!
//! The transform is a Riemann-sum quadrature of the CWT integral with step
//! `dt`, the signal treated as zero outside the segment. Kernel values
//! depend only on the sample offset `n - j`, so each scale row is computed
//! as a correlation with a precomputed kernel; this is arithmetically the
//! same sum as the direct per-entry quadrature.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::segmenter::Segment;

/// Center frequency of the real Morlet wavelet in Hz: `5 / (2*pi)`.
pub const MORLET_CENTER_FREQ_HZ: f64 = 5.0 / (2.0 * std::f64::consts::PI);

/// |psi| < 1e-8 outside |t| ~ 6, so kernels are truncated there.
const SUPPORT_HALF_WIDTH: f64 = 6.0;

/// Real Morlet mother wavelet, `exp(-t^2/2) * cos(5t)`.
pub fn morlet_psi(t: f64) -> f64 {
    (-0.5 * t * t).exp() * (5.0 * t).cos()
}

/// Dimensionless scales (in samples) with their pseudo-frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    /// Strictly increasing dimensionless scales.
    pub scales: Vec<f64>,
    /// Matching pseudo-frequencies, `F_c / (a * dt)`; strictly decreasing.
    pub pseudo_freqs_hz: Vec<f64>,
    /// Sampling period the grid was built for.
    pub sampling_period_s: f64,
}

impl ScaleGrid {
    /// Index of the scale whose pseudo-frequency is nearest `f_hz`.
    pub fn nearest_row(&self, f_hz: f64) -> usize {
        let mut best = 0;
        for (i, f) in self.pseudo_freqs_hz.iter().enumerate() {
            if (f - f_hz).abs() < (self.pseudo_freqs_hz[best] - f_hz).abs() {
                best = i;
            }
        }
        best
    }
}

/// Build a grid of `n_scales` log-spaced pseudo-frequencies on
/// `[f_min, f_max]`, each inverted to a scale via `a = F_c / (F_a * dt)`.
pub fn build_scale_grid(rate: f64, f_min: f64, f_max: f64, n_scales: usize) -> Result<ScaleGrid> {
    if !(f_min > 0.0) || f_min >= f_max || f_max >= rate / 2.0 || n_scales == 0 {
        return Err(Error::BadBand { f_min, f_max, rate });
    }
    let dt = 1.0 / rate;
    let ratio = f_max / f_min;
    // highest frequency first so scales come out increasing
    let freqs: Vec<f64> = (0..n_scales)
        .map(|i| {
            if n_scales == 1 {
                f_max
            } else {
                f_max / ratio.powf(i as f64 / (n_scales - 1) as f64)
            }
        })
        .collect();
    let scales: Vec<f64> = freqs
        .iter()
        .map(|&f| MORLET_CENTER_FREQ_HZ / (f * dt))
        .collect();
    Ok(ScaleGrid {
        scales,
        pseudo_freqs_hz: freqs,
        sampling_period_s: dt,
    })
}

/// Default grid for the SWD band: 21 log-spaced scales over 1-3 Hz.
pub fn default_scale_grid(rate: f64) -> Result<ScaleGrid> {
    build_scale_grid(rate, 1.0, 3.0, 21)
}

/// CWT coefficient matrix for one segment: rows = scales, cols = time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub matrix: Vec<Vec<f64>>,
    pub grid: ScaleGrid,
    pub channel_label: String,
    pub segment_start_index: usize,
}

impl WaveletCoefficients {
    /// All entries in row-major order.
    pub fn flatten(&self) -> Vec<f64> {
        self.matrix.iter().flatten().copied().collect()
    }

    /// Debug dump: one row per scale, first column = pseudo-frequency.
    pub fn dump_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (freq, row) in self.grid.pseudo_freqs_hz.iter().zip(&self.matrix) {
            write!(f, "{freq}")?;
            for v in row {
                write!(f, ",{v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Quadrature weight of sample offset `d = n - j` at dimensionless scale `a`:
/// `(1/sqrt(a*dt)) * psi(d/a) * dt`.
fn kernel_value(d: isize, a: f64, dt: f64) -> f64 {
    let s = a * dt;
    morlet_psi(d as f64 / a) / s.sqrt() * dt
}

/// Morlet CWT of a segment on the given grid.
pub fn cwt(seg: &Segment, grid: &ScaleGrid) -> Result<WaveletCoefficients> {
    let dt = 1.0 / seg.sample_rate_hz;
    if (grid.sampling_period_s - dt).abs() > 1e-9 * dt {
        return Err(Error::GridRateMismatch {
            grid_rate: 1.0 / grid.sampling_period_s,
            segment_rate: seg.sample_rate_hz,
        });
    }
    let x = &seg.samples;
    let len = x.len();
    let mut matrix = Vec::with_capacity(grid.scales.len());
    for &a in &grid.scales {
        let half = ((SUPPORT_HALF_WIDTH * a).ceil() as usize).min(len.saturating_sub(1));
        let kernel: Vec<f64> = (-(half as isize)..=half as isize)
            .map(|d| kernel_value(d, a, dt))
            .collect();
        let mut row = vec![0.0; len];
        for (j, out) in row.iter_mut().enumerate() {
            let lo = j.saturating_sub(half);
            let hi = (j + half).min(len - 1);
            let mut acc = 0.0;
            for n in lo..=hi {
                acc += x[n] * kernel[n + half - j];
            }
            *out = acc;
        }
        matrix.push(row);
    }
    Ok(WaveletCoefficients {
        matrix,
        grid: grid.clone(),
        channel_label: seg.channel_label.clone(),
        segment_start_index: seg.start_index,
    })
}

/// Literal per-entry quadrature of the CWT sum, no kernel caching.
/// Kept as the slow reference the fast path is checked against.
pub fn cwt_direct(seg: &Segment, grid: &ScaleGrid) -> Result<WaveletCoefficients> {
    let dt = 1.0 / seg.sample_rate_hz;
    if (grid.sampling_period_s - dt).abs() > 1e-9 * dt {
        return Err(Error::GridRateMismatch {
            grid_rate: 1.0 / grid.sampling_period_s,
            segment_rate: seg.sample_rate_hz,
        });
    }
    let x = &seg.samples;
    let matrix = grid
        .scales
        .iter()
        .map(|&a| {
            let s = a * dt;
            let support = SUPPORT_HALF_WIDTH * a;
            (0..x.len())
                .map(|j| {
                    let b = j as f64 * dt;
                    x.iter()
                        .enumerate()
                        .filter(|(n, _)| (*n as f64 - j as f64).abs() <= support.ceil())
                        .map(|(n, &v)| {
                            let t = n as f64 * dt;
                            v * morlet_psi((t - b) / s) / s.sqrt() * dt
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(WaveletCoefficients {
        matrix,
        grid: grid.clone(),
        channel_label: seg.channel_label.clone(),
        segment_start_index: seg.start_index,
    })
}
