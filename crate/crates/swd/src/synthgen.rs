//! Deterministic synthetic EEG generation.
//!
//! SWD-like channels superpose a periodic spike-and-wave complex (narrow
//! Gaussian spike followed by a half-sine slow wave, repetition rate in the
//! 1-3 Hz band) on 1/f pink background noise. Background channels are pink
//! noise plus a low-amplitude 10 Hz alpha sinusoid. Everything is a pure
//! function of (spec, seed).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::Result;
use crate::signal_model::{
    save_annotations_json, save_recording_csv, Annotation, Channel, ClassLabel, EegRecording,
};

/// Spike center as a fraction of the discharge period.
const SPIKE_PHASE: f64 = 0.1;
/// Spike Gaussian-envelope standard deviation, seconds (~30 ms width).
const SPIKE_SIGMA_S: f64 = 0.012;
/// Slow wave onset and span as fractions of the period.
const WAVE_PHASE: f64 = 0.2;
const WAVE_SPAN: f64 = 0.6;
/// Pink spectrum is flattened below this frequency.
const PINK_KNEE_HZ: f64 = 0.5;
/// Fraction of background RMS carried by the alpha sinusoid.
const ALPHA_RMS_FRACTION: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub sample_rate_hz: f64,
    /// Discharge repetition rate, must lie in the 1-3 Hz band.
    pub swd_freq_hz: f64,
    pub spike_amp_uv: f64,
    pub wave_amp_uv: f64,
    pub noise_amp_uv: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            sample_rate_hz: 256.0,
            swd_freq_hz: 3.0,
            spike_amp_uv: 300.0,
            wave_amp_uv: 150.0,
            noise_amp_uv: 40.0,
            duration_s: 2.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> bool {
        self.sample_rate_hz > 0.0
            && (1.0..=3.0).contains(&self.swd_freq_hz)
            && self.spike_amp_uv >= 0.0
            && self.wave_amp_uv >= 0.0
            && self.noise_amp_uv >= 0.0
            && self.duration_s > 0.0
    }

    fn n_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }
}

/// Noiseless spike-and-wave complex value at time `t`, periodic with period
/// `1/swd_freq_hz`.
pub fn swd_waveform_at(spec: &SynthSpec, t: f64) -> f64 {
    let period = 1.0 / spec.swd_freq_hz;
    let phase = t.rem_euclid(period) / period; // in [0, 1)
    let spike = {
        let d = (phase - SPIKE_PHASE) * period;
        spec.spike_amp_uv * (-d * d / (2.0 * SPIKE_SIGMA_S * SPIKE_SIGMA_S)).exp()
    };
    let wave = if (WAVE_PHASE..WAVE_PHASE + WAVE_SPAN).contains(&phase) {
        spec.wave_amp_uv * (std::f64::consts::PI * (phase - WAVE_PHASE) / WAVE_SPAN).sin()
    } else {
        0.0
    };
    spike + wave
}

/// Pink (1/f) noise normalized to the given RMS, flattened below the knee
/// frequency and clipped at six RMS. Deterministic per RNG state.
fn pink_noise(n: usize, rate: f64, rms: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if n == 0 || rms == 0.0 {
        return vec![0.0; n];
    }
    let mut spectrum: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n];
    for k in 1..n {
        let f = if k <= n / 2 {
            k as f64 * rate / n as f64
        } else {
            (n - k) as f64 * rate / n as f64
        };
        let w = 1.0 / f.max(PINK_KNEE_HZ).sqrt();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        spectrum[k] = Complex::new(re * w, im * w);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    let mut x: Vec<f64> = spectrum.iter().map(|c| c.re).collect();
    let actual = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let gain = rms / actual;
    for v in &mut x {
        *v = (*v * gain).clamp(-6.0 * rms, 6.0 * rms);
    }
    x
}

/// SWD-like channel: periodic spike-and-wave complexes on pink noise.
pub fn gen_swd_channel(spec: &SynthSpec) -> Vec<f64> {
    assert!(spec.validate(), "invalid synth spec {spec:?}");
    let n = spec.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = pink_noise(n, spec.sample_rate_hz, spec.noise_amp_uv, &mut rng);
    (0..n)
        .map(|i| swd_waveform_at(spec, i as f64 / spec.sample_rate_hz) + noise[i])
        .collect()
}

/// Background channel: pink noise plus a 10 Hz alpha sinusoid, combined RMS
/// equal to `noise_amp_uv`.
pub fn gen_background_channel(spec: &SynthSpec) -> Vec<f64> {
    assert!(spec.validate(), "invalid synth spec {spec:?}");
    let n = spec.n_samples();
    if spec.noise_amp_uv == 0.0 {
        return vec![0.0; n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = ALPHA_RMS_FRACTION;
    let pink_rms = spec.noise_amp_uv * (1.0 - w * w).sqrt();
    let alpha_amp = spec.noise_amp_uv * w * 2.0f64.sqrt();
    let phase: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
    let noise = pink_noise(n, spec.sample_rate_hz, pink_rms, &mut rng);
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / spec.sample_rate_hz;
            noise[i] + alpha_amp * (2.0 * std::f64::consts::PI * 10.0 * t + phase).sin()
        })
        .collect();
    // normalize the sum so the channel RMS is exact, then clip outliers
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let gain = spec.noise_amp_uv / rms;
    for v in &mut x {
        *v = (*v * gain).clamp(-6.0 * spec.noise_amp_uv, 6.0 * spec.noise_amp_uv);
    }
    x
}

/// Per-instance parameter ranges used by `gen_dataset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRanges {
    pub swd_freq_hz: (f64, f64),
    pub spike_amp_uv: (f64, f64),
    pub wave_amp_uv: (f64, f64),
    pub noise_amp_uv: (f64, f64),
    pub sample_rate_hz: f64,
    pub duration_s: f64,
}

impl Default for DatasetRanges {
    fn default() -> Self {
        Self {
            swd_freq_hz: (1.5, 2.5),
            spike_amp_uv: (150.0, 400.0),
            wave_amp_uv: (120.0, 250.0),
            noise_amp_uv: (20.0, 45.0),
            sample_rate_hz: 256.0,
            duration_s: 2.0,
        }
    }
}

/// One labeled synthetic recording.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthInstance {
    pub recording: EegRecording,
    pub annotation: Annotation,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Generate `n_swd + n_bg` labeled single-channel recordings with
/// per-instance parameters drawn from `ranges`. Deterministic per seed.
pub fn gen_dataset_with(
    ranges: &DatasetRanges,
    n_swd: usize,
    n_bg: usize,
    seed: u64,
) -> Vec<SynthInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_swd + n_bg);
    for i in 0..n_swd + n_bg {
        let is_swd = i < n_swd;
        let spec = SynthSpec {
            sample_rate_hz: ranges.sample_rate_hz,
            swd_freq_hz: uniform(&mut rng, ranges.swd_freq_hz),
            spike_amp_uv: uniform(&mut rng, ranges.spike_amp_uv),
            wave_amp_uv: uniform(&mut rng, ranges.wave_amp_uv),
            noise_amp_uv: uniform(&mut rng, ranges.noise_amp_uv),
            duration_s: ranges.duration_s,
            seed: rng.random::<u64>(),
        };
        let samples = if is_swd {
            gen_swd_channel(&spec)
        } else {
            gen_background_channel(&spec)
        };
        let recording = EegRecording::new(
            spec.sample_rate_hz,
            vec![Channel {
                label: "Cz".into(),
                samples,
            }],
        )
        .expect("generated recording is valid");
        let annotation = Annotation {
            channel_label: "Cz".into(),
            onset_s: 0.0,
            duration_s: recording.duration_s(),
            label: if is_swd {
                ClassLabel::Swd
            } else {
                ClassLabel::NonSwd
            },
        };
        out.push(SynthInstance {
            recording,
            annotation,
        });
    }
    out
}

/// Default-range dataset; the reference protocol uses 106 SWD + 106 non-SWD.
pub fn gen_dataset(n_swd: usize, n_bg: usize, seed: u64) -> Vec<SynthInstance> {
    gen_dataset_with(&DatasetRanges::default(), n_swd, n_bg, seed)
}

/// Write each instance as `rec_NNN.csv` plus `rec_NNN.json` under `dir`.
pub fn write_dataset(instances: &[SynthInstance], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for (i, inst) in instances.iter().enumerate() {
        save_recording_csv(&inst.recording, dir.join(format!("rec_{i:03}.csv")))?;
        save_annotations_json(
            std::slice::from_ref(&inst.annotation),
            dir.join(format!("rec_{i:03}.json")),
        )?;
    }
    Ok(())
}
