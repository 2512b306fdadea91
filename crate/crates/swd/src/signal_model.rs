//! Core domain types and file ingestion for recordings and annotations.
//!
//! Recordings travel as CSV with an explicit time column
//! (`time_s,<label1>,<label2>,...`), annotations as a JSON array of
//! `{channel, onset_s, duration_s, label}` objects. The sample rate is
//! inferred from the time column as `1/median(dt)` with a 1% jitter
//! tolerance so resampled exports still load.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class: SWD (spike-and-wave discharge, class 1) vs background (class 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    NonSwd,
    Swd,
}

impl ClassLabel {
    pub fn from_index(c: u8) -> Option<Self> {
        match c {
            0 => Some(ClassLabel::NonSwd),
            1 => Some(ClassLabel::Swd),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            ClassLabel::NonSwd => 0,
            ClassLabel::Swd => 1,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "swd" => Ok(ClassLabel::Swd),
            "non-swd" => Ok(ClassLabel::NonSwd),
            other => Err(Error::BadLabel {
                label: other.to_string(),
            }),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Swd => "swd",
            ClassLabel::NonSwd => "non-swd",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One EEG channel: label plus samples in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    pub samples: Vec<f64>,
}

/// Multichannel sampled signal. All channels share the sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct EegRecording {
    sample_rate_hz: f64,
    channels: Vec<Channel>,
}

impl EegRecording {
    pub fn new(sample_rate_hz: f64, channels: Vec<Channel>) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::InvalidRecording(format!(
                "sample rate {sample_rate_hz} Hz"
            )));
        }
        let n = match channels.first() {
            Some(c) => c.samples.len(),
            None => return Err(Error::InvalidRecording("no channels".into())),
        };
        if n == 0 {
            return Err(Error::InvalidRecording("zero-length channel".into()));
        }
        for c in &channels {
            if c.samples.len() != n {
                return Err(Error::InvalidRecording(format!(
                    "channel {:?} has {} samples, expected {n}",
                    c.label,
                    c.samples.len()
                )));
            }
        }
        for (i, a) in channels.iter().enumerate() {
            if channels[i + 1..].iter().any(|b| b.label == a.label) {
                return Err(Error::InvalidRecording(format!(
                    "duplicate channel label {:?}",
                    a.label
                )));
            }
        }
        Ok(Self {
            sample_rate_hz,
            channels,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees N >= 1
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    pub fn channel(&self, label: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.label == label)
    }
}

/// Expert-marked event on one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub channel_label: String,
    pub onset_s: f64,
    pub duration_s: f64,
    pub label: ClassLabel,
}

#[derive(Deserialize)]
struct AnnotationRow {
    channel: String,
    onset_s: f64,
    duration_s: f64,
    label: String,
}

/// Load a recording from CSV with header `time_s,<label1>,...`.
///
/// The rate is inferred as `1/median(dt)`; rows whose time step deviates
/// from the median by more than 1% fail with `InconsistentRate`.
pub fn load_recording_csv(path: impl AsRef<Path>) -> Result<EegRecording> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());

    let header = lines.next().ok_or_else(|| Error::EmptyFile {
        path: path_str.clone(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"time_s") || cols.len() < 2 {
        return Err(Error::MalformedCsv {
            path: path_str,
            detail: format!("header must be 'time_s,<label>,...', got {header:?}"),
        });
    }
    let labels: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();

    let mut times: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != labels.len() + 1 {
            return Err(Error::MalformedCsv {
                path: path_str,
                detail: format!(
                    "row {} has {} columns, expected {}",
                    lineno + 2,
                    cells.len(),
                    labels.len() + 1
                ),
            });
        }
        let mut parsed = cells.iter().map(|c| c.parse::<f64>());
        let t = parsed.next().unwrap().map_err(|_| Error::MalformedCsv {
            path: path_str.clone(),
            detail: format!("non-numeric time cell on row {}", lineno + 2),
        })?;
        times.push(t);
        for (col, v) in columns.iter_mut().zip(parsed) {
            col.push(v.map_err(|_| Error::MalformedCsv {
                path: path_str.clone(),
                detail: format!("non-numeric cell on row {}", lineno + 2),
            })?);
        }
    }

    if times.is_empty() {
        return Err(Error::EmptyFile { path: path_str });
    }
    if times.len() < 2 {
        return Err(Error::MalformedCsv {
            path: path_str,
            detail: "need at least 2 rows to infer the sample rate".into(),
        });
    }

    let mut dts: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if dts.iter().any(|&dt| !(dt > 0.0)) {
        return Err(Error::MalformedCsv {
            path: path_str,
            detail: "time column is not strictly increasing".into(),
        });
    }
    dts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_dt = dts[dts.len() / 2];
    let max_dev = dts
        .iter()
        .map(|dt| (dt - median_dt).abs())
        .fold(0.0, f64::max);
    if max_dev > 0.01 * median_dt {
        return Err(Error::InconsistentRate { path: path_str });
    }

    let channels = labels
        .into_iter()
        .zip(columns)
        .map(|(label, samples)| Channel { label, samples })
        .collect();
    EegRecording::new(1.0 / median_dt, channels)
}

/// Write a recording in the same CSV grammar `load_recording_csv` accepts.
pub fn save_recording_csv(rec: &EegRecording, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "time_s")?;
    for c in rec.channels() {
        write!(f, ",{}", c.label)?;
    }
    writeln!(f)?;
    let dt = 1.0 / rec.sample_rate_hz();
    for i in 0..rec.len() {
        write!(f, "{}", i as f64 * dt)?;
        for c in rec.channels() {
            // {:?} round-trips f64 exactly
            write!(f, ",{:?}", c.samples[i])?;
        }
        writeln!(f)?;
    }
    Ok(())
}

/// Load and validate annotations against a recording.
pub fn load_annotations_json(
    path: impl AsRef<Path>,
    rec: &EegRecording,
) -> Result<Vec<Annotation>> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<AnnotationRow> = serde_json::from_str(&text)?;
    let duration = rec.duration_s();
    rows.into_iter()
        .map(|r| {
            if rec.channel(&r.channel).is_none() {
                return Err(Error::UnknownChannel { label: r.channel });
            }
            if !(r.duration_s > 0.0) || r.onset_s < 0.0 || r.onset_s + r.duration_s > duration {
                return Err(Error::OutOfRange {
                    onset_s: r.onset_s,
                    duration_s: r.duration_s,
                    recording_s: duration,
                });
            }
            Ok(Annotation {
                channel_label: r.channel,
                onset_s: r.onset_s,
                duration_s: r.duration_s,
                label: ClassLabel::parse(&r.label)?,
            })
        })
        .collect()
}

/// Write annotations in the JSON grammar `load_annotations_json` accepts.
pub fn save_annotations_json(anns: &[Annotation], path: impl AsRef<Path>) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        channel: &'a str,
        onset_s: f64,
        duration_s: f64,
        label: &'a str,
    }
    let rows: Vec<Row> = anns
        .iter()
        .map(|a| Row {
            channel: &a.channel_label,
            onset_s: a.onset_s,
            duration_s: a.duration_s,
            label: a.label.as_str(),
        })
        .collect();
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &rows)?;
    writeln!(f)?;
    Ok(())
}
