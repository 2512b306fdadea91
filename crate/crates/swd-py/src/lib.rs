//! Python bindings for the SWD detection pipeline.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use swd::classifier::{KnnModel, ScalingMode, TrainingSet};
use swd::features::FeatureVector;
use swd::ggd::{fit_ggd_mle, sample_ggd, GgdParams, SolverOptions};
use swd::harness::{evaluate, featurize_recording, FeaturizeOptions};
use swd::morlet::{build_scale_grid, cwt, morlet_psi};
use swd::segmenter::{Segment, WindowSpec};
use swd::signal_model::{Channel, ClassLabel, EegRecording};
use swd::synthgen::{gen_background_channel, gen_swd_channel, SynthSpec};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn feature_vector(sigma: f64, variance: f64, median: f64, label: Option<u8>) -> PyResult<FeatureVector> {
    let label = match label {
        None => None,
        Some(c) => Some(ClassLabel::from_index(c).ok_or_else(|| err("class must be 0 or 1"))?),
    };
    Ok(FeatureVector {
        ggd_scale: sigma,
        variance,
        median,
        channel_label: String::new(),
        segment_start_index: 0,
        label,
    })
}

/// Morlet mother wavelet, exp(-t^2/2) cos(5t).
#[pyfunction]
#[pyo3(name = "morlet_psi")]
fn py_morlet_psi(t: f64) -> f64 {
    morlet_psi(t)
}

/// CWT of one signal over a log-spaced 1-3 Hz grid (unless overridden).
/// Returns (matrix rows = scales, pseudo_frequencies_hz).
#[pyfunction]
#[pyo3(signature = (samples, rate_hz, f_min=1.0, f_max=3.0, n_scales=21))]
fn cwt_matrix(
    samples: Vec<f64>,
    rate_hz: f64,
    f_min: f64,
    f_max: f64,
    n_scales: usize,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let grid = build_scale_grid(rate_hz, f_min, f_max, n_scales).map_err(err)?;
    let seg = Segment {
        channel_label: String::new(),
        start_index: 0,
        samples,
        sample_rate_hz: rate_hz,
    };
    let coeffs = cwt(&seg, &grid).map_err(err)?;
    Ok((coeffs.matrix, grid.pseudo_freqs_hz))
}

/// Maximum-likelihood GGD fit. Returns (scale, shape, log_likelihood).
#[pyfunction]
fn fit_ggd(data: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let p = fit_ggd_mle(&data, &SolverOptions::default()).map_err(err)?;
    Ok((p.scale, p.shape, p.log_likelihood))
}

/// Seeded i.i.d. GGD draws.
#[pyfunction]
#[pyo3(name = "sample_ggd")]
fn py_sample_ggd(scale: f64, shape: f64, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    if !(scale > 0.0 && shape > 0.0) {
        return Err(err("scale and shape must be positive"));
    }
    Ok(sample_ggd(&GgdParams::new(scale, shape), n, seed))
}

/// Features [sigma, variance, median] of every window of a signal.
/// Returns a list of (start_index, sigma, variance, median).
#[pyfunction]
#[pyo3(signature = (samples, rate_hz, window_s=2.0, overlap_s=1.0))]
fn extract_features(
    samples: Vec<f64>,
    rate_hz: f64,
    window_s: f64,
    overlap_s: f64,
) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let rec = EegRecording::new(
        rate_hz,
        vec![Channel {
            label: "ch0".into(),
            samples,
        }],
    )
    .map_err(err)?;
    let opts = FeaturizeOptions {
        window: WindowSpec::new(window_s, overlap_s).map_err(err)?,
        ..Default::default()
    };
    let features = featurize_recording(&rec, &opts, None).map_err(err)?;
    Ok(features
        .iter()
        .map(|f| (f.segment_start_index, f.ggd_scale, f.variance, f.median))
        .collect())
}

/// Brute-force k-NN over [sigma, variance, median] points.
#[pyclass]
struct Knn {
    model: KnnModel,
}

#[pymethods]
impl Knn {
    /// points: list of (sigma, variance, median, class 0|1).
    #[new]
    #[pyo3(signature = (points, k=10, zscore=true))]
    fn new(points: Vec<(f64, f64, f64, u8)>, k: usize, zscore: bool) -> PyResult<Self> {
        let pts = points
            .into_iter()
            .map(|(s, v, m, c)| feature_vector(s, v, m, Some(c)))
            .collect::<PyResult<Vec<_>>>()?;
        let mode = if zscore {
            ScalingMode::ZScore
        } else {
            ScalingMode::Identity
        };
        let train = TrainingSet::new(pts, mode).map_err(err)?;
        Ok(Self {
            model: KnnModel::new(train, k).map_err(err)?,
        })
    }

    /// Returns (class, votes_class0, votes_class1).
    fn classify(&self, sigma: f64, variance: f64, median: f64) -> PyResult<(u8, usize, usize)> {
        let q = feature_vector(sigma, variance, median, None)?;
        let (label, votes) = self.model.classify(&q);
        Ok((label.index(), votes.0, votes.1))
    }

    /// Accuracy over labeled test points (sigma, variance, median, class).
    fn score(&self, points: Vec<(f64, f64, f64, u8)>) -> PyResult<f64> {
        let pts = points
            .into_iter()
            .map(|(s, v, m, c)| feature_vector(s, v, m, Some(c)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(evaluate(&self.model, &pts).map_err(err)?.accuracy)
    }
}

/// Synthetic SWD-like channel; see `gen_background` for the non-SWD analogue.
#[pyfunction]
#[pyo3(signature = (duration_s=2.0, swd_freq_hz=3.0, spike_amp_uv=300.0, wave_amp_uv=150.0, noise_amp_uv=40.0, rate_hz=256.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn gen_swd(
    duration_s: f64,
    swd_freq_hz: f64,
    spike_amp_uv: f64,
    wave_amp_uv: f64,
    noise_amp_uv: f64,
    rate_hz: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let spec = SynthSpec {
        sample_rate_hz: rate_hz,
        swd_freq_hz,
        spike_amp_uv,
        wave_amp_uv,
        noise_amp_uv,
        duration_s,
        seed,
    };
    if !spec.validate() {
        return Err(err(format!("invalid synth parameters: {spec:?}")));
    }
    Ok(gen_swd_channel(&spec))
}

/// Synthetic background channel: pink noise plus a 10 Hz alpha component.
#[pyfunction]
#[pyo3(signature = (duration_s=2.0, noise_amp_uv=40.0, rate_hz=256.0, seed=0))]
fn gen_background(duration_s: f64, noise_amp_uv: f64, rate_hz: f64, seed: u64) -> PyResult<Vec<f64>> {
    let spec = SynthSpec {
        sample_rate_hz: rate_hz,
        noise_amp_uv,
        duration_s,
        seed,
        ..Default::default()
    };
    if !spec.validate() {
        return Err(err(format!("invalid synth parameters: {spec:?}")));
    }
    Ok(gen_background_channel(&spec))
}

#[pymodule]
fn swd_rs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(py_morlet_psi, m)?)?;
    m.add_function(wrap_pyfunction!(cwt_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ggd, m)?)?;
    m.add_function(wrap_pyfunction!(py_sample_ggd, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(gen_swd, m)?)?;
    m.add_function(wrap_pyfunction!(gen_background, m)?)?;
    m.add_class::<Knn>()?;
    Ok(())
}
