//! Reduction of a segment's wavelet coefficients to the 3-predictor vector
//! [GGD scale, variance, median].
//!
//! All scales are pooled into one flattened sample per segment. The variance
//! is the population (1/n) variance; the median averages the two central
//! order statistics for even counts.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ggd::{fit_ggd_mle, SolverOptions};
use crate::morlet::WaveletCoefficients;
use crate::signal_model::ClassLabel;

pub const FEATURE_DIM: usize = 3;

/// The 3-predictor point, with provenance and optional class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub ggd_scale: f64,
    pub variance: f64,
    pub median: f64,
    pub channel_label: String,
    pub segment_start_index: usize,
    pub label: Option<ClassLabel>,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; FEATURE_DIM] {
        [self.ggd_scale, self.variance, self.median]
    }
}

/// Population variance about the mean.
pub fn population_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Median; mean of the two central order statistics for even counts.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Flatten the coefficient matrix and compute [scale, variance, median].
pub fn extract_features(coeffs: &WaveletCoefficients) -> Result<FeatureVector> {
    let flat = coeffs.flatten();
    let first = flat.first().copied().unwrap_or(0.0);
    if flat.iter().all(|&v| v == first) {
        return Err(Error::DegenerateCoefficients);
    }
    let fit = fit_ggd_mle(&flat, &SolverOptions::default())
        .map_err(|e| match e {
            Error::DegenerateData => Error::DegenerateCoefficients,
            other => other,
        })?;
    Ok(FeatureVector {
        ggd_scale: fit.scale,
        variance: population_variance(&flat),
        median: median(&flat),
        channel_label: coeffs.channel_label.clone(),
        segment_start_index: coeffs.segment_start_index,
        label: None,
    })
}

/// Per-class feature envelope (closed intervals).
#[derive(Debug, Clone, Copy)]
pub struct FeatureEnvelope {
    pub scale: (f64, f64),
    pub variance: (f64, f64),
    pub median: (f64, f64),
}

/// Reported training-data ranges, per class.
pub fn class_envelope(label: ClassLabel) -> FeatureEnvelope {
    match label {
        ClassLabel::NonSwd => FeatureEnvelope {
            scale: (12.0, 1300.0),
            variance: (950.0, 32e6),
            median: (-28e3, 22e3),
        },
        ClassLabel::Swd => FeatureEnvelope {
            scale: (31.0, 1800.0),
            variance: (2800.0, 43e6),
            median: (-73e3, 74e3),
        },
    }
}

/// Advisory report on whether a labeled vector sits in its class envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundsReport {
    pub scale_inside: bool,
    pub variance_inside: bool,
    pub median_inside: bool,
}

impl BoundsReport {
    pub fn all_inside(&self) -> bool {
        self.scale_inside && self.variance_inside && self.median_inside
    }
}

/// Check a labeled vector against its class envelope. Advisory only; never
/// gates classification.
pub fn check_table_bounds(fv: &FeatureVector, label: ClassLabel) -> BoundsReport {
    let env = class_envelope(label);
    let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
    BoundsReport {
        scale_inside: inside(fv.ggd_scale, env.scale),
        variance_inside: inside(fv.variance, env.variance),
        median_inside: inside(fv.median, env.median),
    }
}

/// Write features as CSV: `channel,start_index,sigma,variance,median,label`.
/// This is also the training-set on-disk format.
pub fn save_features_csv(features: &[FeatureVector], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "channel,start_index,sigma,variance,median,label")?;
    for fv in features {
        writeln!(
            f,
            "{},{},{:?},{:?},{:?},{}",
            fv.channel_label,
            fv.segment_start_index,
            fv.ggd_scale,
            fv.variance,
            fv.median,
            fv.label.map_or("", |l| l.as_str())
        )?;
    }
    Ok(())
}

pub fn load_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::EmptyFile {
        path: path.display().to_string(),
    })?;
    if header.trim() != "channel,start_index,sigma,variance,median,label" {
        return Err(Error::MalformedCsv {
            path: path.display().to_string(),
            detail: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 6 {
            return Err(Error::MalformedCsv {
                path: path.display().to_string(),
                detail: format!("row {} has {} columns, expected 6", lineno + 2, cells.len()),
            });
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::MalformedCsv {
                path: path.display().to_string(),
                detail: format!("non-numeric cell {s:?} on row {}", lineno + 2),
            })
        };
        out.push(FeatureVector {
            channel_label: cells[0].to_string(),
            segment_start_index: cells[1].parse().map_err(|_| Error::MalformedCsv {
                path: path.display().to_string(),
                detail: format!("bad start_index on row {}", lineno + 2),
            })?,
            ggd_scale: parse_f(cells[2])?,
            variance: parse_f(cells[3])?,
            median: parse_f(cells[4])?,
            label: if cells[5].is_empty() {
                None
            } else {
                Some(ClassLabel::parse(cells[5])?)
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggd::{sample_ggd, GgdParams};
    use crate::morlet::{default_scale_grid, ScaleGrid};

    fn coeffs_from(flat: Vec<f64>, cols: usize) -> WaveletCoefficients {
        let grid = ScaleGrid {
            scales: (0..flat.len() / cols).map(|i| 10.0 + i as f64).collect(),
            pseudo_freqs_hz: (0..flat.len() / cols).map(|i| 3.0 - 0.01 * i as f64).collect(),
            sampling_period_s: 1.0 / 256.0,
        };
        WaveletCoefficients {
            matrix: flat.chunks(cols).map(|c| c.to_vec()).collect(),
            grid,
            channel_label: "Cz".into(),
            segment_start_index: 0,
        }
    }

    #[test]
    fn recovers_known_sample_statistics() {
        let draws = sample_ggd(&GgdParams::new(1.0, 2.0), 100_000, 99);
        let fv = extract_features(&coeffs_from(draws, 500)).unwrap();
        assert!((fv.ggd_scale - 1.0).abs() < 0.03, "scale {}", fv.ggd_scale);
        assert!((fv.variance - 0.5).abs() < 0.015, "var {}", fv.variance);
        assert!(fv.median.abs() < 0.02, "median {}", fv.median);
    }

    #[test]
    fn sparse_spike_matrix_is_not_degenerate() {
        // two [0,0,0,10] rows: population variance 18.75, median 0
        let flat = vec![0.0, 0.0, 0.0, 10.0, 0.0, 0.0, 0.0, 10.0];
        let fv = extract_features(&coeffs_from(flat, 4)).unwrap();
        assert_eq!(fv.median, 0.0);
        assert_eq!(fv.variance, 18.75);
    }

    #[test]
    fn constant_matrix_is_degenerate() {
        assert!(matches!(
            extract_features(&coeffs_from(vec![1.0; 64], 8)),
            Err(Error::DegenerateCoefficients)
        ));
    }

    #[test]
    fn features_scale_homogeneously() {
        let draws = sample_ggd(&GgdParams::new(2.0, 1.4), 4000, 17);
        let a = extract_features(&coeffs_from(draws.clone(), 100)).unwrap();
        let scaled: Vec<f64> = draws.iter().map(|v| 5.0 * v).collect();
        let b = extract_features(&coeffs_from(scaled, 100)).unwrap();
        assert!((b.ggd_scale / a.ggd_scale - 5.0).abs() < 1e-6);
        assert!((b.variance / a.variance - 25.0).abs() < 1e-9);
        assert!((b.median / a.median - 5.0).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariant() {
        let draws = sample_ggd(&GgdParams::new(1.0, 2.0), 1000, 23);
        let mut shuffled = draws.clone();
        shuffled.reverse();
        shuffled.swap(3, 700);
        let a = extract_features(&coeffs_from(draws, 50)).unwrap();
        let b = extract_features(&coeffs_from(shuffled, 50)).unwrap();
        // summation order may differ in the last ulp
        assert!((a.variance - b.variance).abs() <= 1e-12 * a.variance);
        assert_eq!(a.median, b.median);
        assert!((a.ggd_scale - b.ggd_scale).abs() < 1e-9);
    }

    #[test]
    fn negation_flips_median_only() {
        let draws = sample_ggd(&GgdParams::new(1.0, 1.2), 2000, 31);
        let negated: Vec<f64> = draws.iter().map(|v| -v).collect();
        let a = extract_features(&coeffs_from(draws, 100)).unwrap();
        let b = extract_features(&coeffs_from(negated, 100)).unwrap();
        assert_eq!(b.median, -a.median);
        assert_eq!(b.variance, a.variance);
        assert!((b.ggd_scale - a.ggd_scale).abs() < 1e-8 * a.ggd_scale);
    }

    #[test]
    fn envelope_checks_match_reported_ranges() {
        let fv = |s, v, m| FeatureVector {
            ggd_scale: s,
            variance: v,
            median: m,
            channel_label: "Cz".into(),
            segment_start_index: 0,
            label: None,
        };
        assert!(check_table_bounds(&fv(500.0, 1e6, 0.0), ClassLabel::Swd).all_inside());
        let r = check_table_bounds(&fv(5.0, 100.0, 0.0), ClassLabel::NonSwd);
        assert!(!r.scale_inside && !r.variance_inside && r.median_inside);
        // closed interval boundary
        assert!(check_table_bounds(&fv(12.0, 1000.0, 0.0), ClassLabel::NonSwd).scale_inside);
    }

    #[test]
    fn feature_csv_round_trip() {
        let features = vec![
            FeatureVector {
                ggd_scale: 123.456,
                variance: 7.89e6,
                median: -42.5,
                channel_label: "Fp1".into(),
                segment_start_index: 256,
                label: Some(ClassLabel::Swd),
            },
            FeatureVector {
                ggd_scale: 15.0,
                variance: 1000.0,
                median: 1.0,
                channel_label: "Cz".into(),
                segment_start_index: 0,
                label: None,
            },
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        save_features_csv(&features, f.path()).unwrap();
        assert_eq!(load_features_csv(f.path()).unwrap(), features);
    }

    #[test]
    fn grid_helper_compiles_against_real_grid() {
        // keeps the test fixture honest about the grid shape
        let grid = default_scale_grid(256.0).unwrap();
        assert_eq!(grid.scales.len(), grid.pseudo_freqs_hz.len());
    }
}
