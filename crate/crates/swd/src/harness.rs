//! Training and evaluation orchestration: off-line training on a labeled
//! feature set, optional patient-specific augmentation, per-window
//! classification of recordings, and accuracy/sensitivity/specificity
//! reporting.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{KernelBayesModel, KnnModel, ScalingMode, TrainingSet};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector};
use crate::morlet::{build_scale_grid, cwt, ScaleGrid};
use crate::segmenter::{segment_channel, segment_count, WindowSpec};
use crate::signal_model::{Annotation, ClassLabel, EegRecording};
use crate::synthgen::{gen_dataset, gen_dataset_with, DatasetRanges};

/// Diagnostic kernel bandwidth used for the reported posterior ratio.
const REPORT_BANDWIDTH_SQ: f64 = 1.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentResult {
    pub id: String,
    pub true_label: ClassLabel,
    pub predicted: ClassLabel,
    pub posterior_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub per_segment: Vec<SegmentResult>,
}

impl EvalReport {
    pub fn from_results(per_segment: Vec<SegmentResult>) -> Self {
        let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
        for r in &per_segment {
            match (r.true_label, r.predicted) {
                (ClassLabel::Swd, ClassLabel::Swd) => tp += 1,
                (ClassLabel::NonSwd, ClassLabel::NonSwd) => tn += 1,
                (ClassLabel::NonSwd, ClassLabel::Swd) => fp += 1,
                (ClassLabel::Swd, ClassLabel::NonSwd) => fn_ += 1,
            }
        }
        Self::from_counts(tp, tn, fp, fn_, per_segment)
    }

    pub fn from_counts(
        tp: usize,
        tn: usize,
        fp: usize,
        fn_: usize,
        per_segment: Vec<SegmentResult>,
    ) -> Self {
        let total = tp + tn + fp + fn_;
        let accuracy = if total > 0 {
            (tp + tn) as f64 / total as f64
        } else {
            0.0
        };
        let sensitivity = if tp + fn_ > 0 {
            Some(tp as f64 / (tp + fn_) as f64)
        } else {
            None
        };
        let specificity = if tn + fp > 0 {
            Some(tn as f64 / (tn + fp) as f64)
        } else {
            None
        };
        Self {
            tp,
            tn,
            fp,
            fn_,
            accuracy,
            sensitivity,
            specificity,
            per_segment,
        }
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }

    pub fn save_per_segment_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "id,true_label,predicted,posterior_ratio")?;
        for r in &self.per_segment {
            writeln!(
                f,
                "{},{},{},{:?}",
                r.id, r.true_label, r.predicted, r.posterior_ratio
            )?;
        }
        Ok(())
    }
}

/// Fit a k-NN model on labeled features.
pub fn train(features: Vec<FeatureVector>, k: usize, mode: ScalingMode) -> Result<KnnModel> {
    let labeled: Vec<FeatureVector> = features.into_iter().filter(|f| f.label.is_some()).collect();
    if labeled.len() < k {
        return Err(Error::TooFewPoints {
            n: labeled.len(),
            k,
        });
    }
    KnnModel::new(TrainingSet::new(labeled, mode)?, k)
}

/// Retrain with a new patient's SWD exemplars added; scaling is refit on the
/// union.
pub fn augment_patient(model: &KnnModel, new_swd: &[FeatureVector]) -> Result<KnnModel> {
    let swd: Vec<FeatureVector> = new_swd
        .iter()
        .filter(|f| f.label == Some(ClassLabel::Swd))
        .cloned()
        .collect();
    if swd.len() < 10 {
        return Err(Error::TooFewAugment(swd.len()));
    }
    let mut points = model.train.points.clone();
    points.extend(swd);
    KnnModel::new(TrainingSet::new(points, model.train.scaling_mode)?, model.k)
}

/// Classify every labeled test vector and aggregate the confusion counts.
/// The reported posterior ratio is a kernel-Bayes diagnostic at unit
/// bandwidth in the scaled space; the decision itself is k-NN.
pub fn evaluate(model: &KnnModel, test_features: &[FeatureVector]) -> Result<EvalReport> {
    let labeled: Vec<&FeatureVector> = test_features
        .iter()
        .filter(|f| f.label.is_some())
        .collect();
    if labeled.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let bayes = KernelBayesModel::new(model.train.clone(), REPORT_BANDWIDTH_SQ);
    let per_segment = labeled
        .iter()
        .map(|fv| SegmentResult {
            id: format!("{}:{}", fv.channel_label, fv.segment_start_index),
            true_label: fv.label.unwrap(),
            predicted: model.classify(fv).0,
            posterior_ratio: bayes.posterior_ratio(fv),
        })
        .collect();
    Ok(EvalReport::from_results(per_segment))
}

/// Ground-truth label for a window: SWD iff at least half of its duration
/// overlaps an SWD annotation on the same channel.
pub fn window_true_label(
    annotations: &[Annotation],
    channel: &str,
    start_index: usize,
    len: usize,
    rate: f64,
) -> ClassLabel {
    let w_start = start_index as f64 / rate;
    let w_end = (start_index + len) as f64 / rate;
    let mut overlap = 0.0;
    for a in annotations {
        if a.channel_label != channel || a.label != ClassLabel::Swd {
            continue;
        }
        let lo = w_start.max(a.onset_s);
        let hi = w_end.min(a.onset_s + a.duration_s);
        overlap += (hi - lo).max(0.0);
    }
    if overlap >= 0.5 * (w_end - w_start) {
        ClassLabel::Swd
    } else {
        ClassLabel::NonSwd
    }
}

/// Feature extraction settings shared by the CLI and the end-to-end driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturizeOptions {
    pub window: WindowSpec,
    pub f_min: f64,
    pub f_max: f64,
    pub n_scales: usize,
}

impl Default for FeaturizeOptions {
    fn default() -> Self {
        Self {
            window: WindowSpec::default(),
            f_min: 1.0,
            f_max: 3.0,
            n_scales: 21,
        }
    }
}

impl FeaturizeOptions {
    pub fn grid(&self, rate: f64) -> Result<ScaleGrid> {
        build_scale_grid(rate, self.f_min, self.f_max, self.n_scales)
    }
}

/// Segment every channel, transform, and extract features. Windows with
/// degenerate coefficients are dropped; labels come from the annotations via
/// the half-overlap rule when provided.
pub fn featurize_recording(
    rec: &EegRecording,
    opts: &FeaturizeOptions,
    annotations: Option<&[Annotation]>,
) -> Result<Vec<FeatureVector>> {
    let rate = rec.sample_rate_hz();
    let grid = opts.grid(rate)?;
    let mut out = Vec::new();
    for ch in rec.channels() {
        let segments = segment_channel(&ch.samples, rate, &opts.window, &ch.label)?;
        for seg in segments {
            let coeffs = cwt(&seg, &grid)?;
            let mut fv = match extract_features(&coeffs) {
                Ok(fv) => fv,
                Err(Error::DegenerateCoefficients) => continue,
                Err(e) => return Err(e),
            };
            if let Some(anns) = annotations {
                fv.label = Some(window_true_label(
                    anns,
                    &ch.label,
                    seg.start_index,
                    seg.samples.len(),
                    rate,
                ));
            }
            out.push(fv);
        }
    }
    Ok(out)
}

/// One window of the label stream emitted by `run_pipeline`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowLabel {
    pub channel_label: String,
    pub start_index: usize,
    /// None when the window was skipped.
    pub label: Option<ClassLabel>,
    pub skip_reason: Option<String>,
}

/// Classify every window of every channel. Output is ordered by
/// (channel order, start index); degenerate windows are reported as
/// skipped, never as detections.
pub fn run_pipeline(
    rec: &EegRecording,
    model: &KnnModel,
    opts: &FeaturizeOptions,
) -> Result<Vec<WindowLabel>> {
    let rate = rec.sample_rate_hz();
    let grid = opts.grid(rate)?;
    let mut out = Vec::new();
    for ch in rec.channels() {
        for seg in segment_channel(&ch.samples, rate, &opts.window, &ch.label)? {
            let item = match cwt(&seg, &grid).and_then(|c| extract_features(&c)) {
                Ok(fv) => WindowLabel {
                    channel_label: ch.label.clone(),
                    start_index: seg.start_index,
                    label: Some(model.classify(&fv).0),
                    skip_reason: None,
                },
                Err(Error::DegenerateCoefficients) => WindowLabel {
                    channel_label: ch.label.clone(),
                    start_index: seg.start_index,
                    label: None,
                    skip_reason: Some("degenerate coefficients".into()),
                },
                Err(e) => return Err(e),
            };
            out.push(item);
        }
    }
    Ok(out)
}

/// Expected `run_pipeline` output length for a recording.
pub fn expected_window_count(rec: &EegRecording, spec: &WindowSpec) -> usize {
    let rate = rec.sample_rate_hz();
    rec.channels().len() * segment_count(rec.len(), spec.window_len(rate), spec.hop(rate))
}

/// Featurize a generated dataset, labels from its annotations.
pub fn featurize_dataset(
    instances: &[crate::synthgen::SynthInstance],
    opts: &FeaturizeOptions,
) -> Result<Vec<FeatureVector>> {
    let mut out = Vec::new();
    for inst in instances {
        out.extend(featurize_recording(
            &inst.recording,
            opts,
            Some(std::slice::from_ref(&inst.annotation)),
        )?);
    }
    Ok(out)
}

/// Synthetic surrogate of the full protocol: generate a 106+106 training set
/// and a 69-segment test set, featurize, train k-NN, evaluate.
pub fn run_end_to_end(
    seed: u64,
    k: usize,
    mode: ScalingMode,
    n_train_swd: usize,
    n_train_bg: usize,
    n_test: usize,
) -> Result<EvalReport> {
    let opts = FeaturizeOptions::default();
    let train_set = gen_dataset(n_train_swd, n_train_bg, seed);
    let n_test_swd = n_test / 2 + n_test % 2;
    let test_set = gen_dataset_with(
        &DatasetRanges::default(),
        n_test_swd,
        n_test - n_test_swd,
        seed.wrapping_add(0x7e57),
    );
    let model = train(featurize_dataset(&train_set, &opts)?, k, mode)?;
    evaluate(&model, &featurize_dataset(&test_set, &opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ScalingMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fv(sigma: f64, var: f64, med: f64, label: Option<ClassLabel>) -> FeatureVector {
        FeatureVector {
            ggd_scale: sigma,
            variance: var,
            median: med,
            channel_label: "Cz".into(),
            segment_start_index: 0,
            label,
        }
    }

    fn toy_features(n_each: usize, seed: u64) -> Vec<FeatureVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for _ in 0..n_each {
            out.push(fv(
                100.0 + rng.random::<f64>() * 50.0,
                1e4 + rng.random::<f64>() * 1e4,
                rng.random::<f64>() * 100.0,
                Some(ClassLabel::NonSwd),
            ));
            out.push(fv(
                500.0 + rng.random::<f64>() * 200.0,
                1e6 + rng.random::<f64>() * 1e6,
                rng.random::<f64>() * 1000.0,
                Some(ClassLabel::Swd),
            ));
        }
        out
    }

    #[test]
    fn train_respects_preconditions() {
        let m = train(toy_features(106, 1), 10, ScalingMode::ZScore).unwrap();
        assert_eq!(m.train.n0(), 106);
        assert_eq!(m.train.n1(), 106);

        assert!(matches!(
            train(toy_features(2, 1), 10, ScalingMode::ZScore),
            Err(Error::TooFewPoints { n: 4, k: 10 })
        ));

        let one_class: Vec<FeatureVector> = toy_features(12, 2)
            .into_iter()
            .filter(|f| f.label == Some(ClassLabel::Swd))
            .collect();
        assert!(matches!(
            train(one_class, 10, ScalingMode::ZScore),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn augmentation_grows_class_one() {
        let m = train(toy_features(106, 3), 10, ScalingMode::ZScore).unwrap();
        let extra: Vec<FeatureVector> = (0..10)
            .map(|i| fv(600.0 + i as f64, 2e6, 500.0, Some(ClassLabel::Swd)))
            .collect();
        let m2 = augment_patient(&m, &extra).unwrap();
        assert_eq!(m2.train.n1(), 116);
        assert_eq!(m2.train.n0(), 106);

        assert!(matches!(
            augment_patient(&m, &extra[..9]),
            Err(Error::TooFewAugment(9))
        ));
    }

    #[test]
    fn augmenting_with_duplicates_still_counts() {
        let m = train(toy_features(20, 4), 5, ScalingMode::ZScore).unwrap();
        let dupes: Vec<FeatureVector> = m
            .train
            .points
            .iter()
            .filter(|p| p.label == Some(ClassLabel::Swd))
            .take(10)
            .cloned()
            .collect();
        let m2 = augment_patient(&m, &dupes).unwrap();
        assert_eq!(m2.train.len(), m.train.len() + 10);
    }

    #[test]
    fn self_evaluation_is_perfect_at_k1() {
        let feats = toy_features(30, 5);
        let m = train(feats.clone(), 1, ScalingMode::ZScore).unwrap();
        let report = evaluate(&m, &feats).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.sensitivity, Some(1.0));
        assert_eq!(report.specificity, Some(1.0));
    }

    #[test]
    fn one_sided_test_set_leaves_metric_absent() {
        let m = train(toy_features(30, 6), 5, ScalingMode::ZScore).unwrap();
        let swd_only: Vec<FeatureVector> = toy_features(10, 7)
            .into_iter()
            .filter(|f| f.label == Some(ClassLabel::Swd))
            .collect();
        let report = evaluate(&m, &swd_only).unwrap();
        assert!(report.specificity.is_none());
        assert!(report.sensitivity.is_some());

        assert!(matches!(evaluate(&m, &[]), Err(Error::EmptyTestSet)));
    }

    #[test]
    fn metric_identities_on_random_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (tp, tn, fp, fn_) = (
                rng.random_range(0..50usize),
                rng.random_range(0..50usize),
                rng.random_range(0..50usize),
                rng.random_range(0..50usize),
            );
            if tp + tn + fp + fn_ == 0 {
                continue;
            }
            let r = EvalReport::from_counts(tp, tn, fp, fn_, vec![]);
            assert!((r.accuracy - (tp + tn) as f64 / (tp + tn + fp + fn_) as f64).abs() < 1e-15);
            match r.sensitivity {
                Some(s) => assert!((s - tp as f64 / (tp + fn_) as f64).abs() < 1e-15),
                None => assert_eq!(tp + fn_, 0),
            }
            match r.specificity {
                Some(s) => assert!((s - tn as f64 / (tn + fp) as f64).abs() < 1e-15),
                None => assert_eq!(tn + fp, 0),
            }
        }
    }

    #[test]
    fn half_overlap_labeling_rule() {
        let anns = vec![Annotation {
            channel_label: "Cz".into(),
            onset_s: 10.0,
            duration_s: 2.0,
            label: ClassLabel::Swd,
        }];
        // 2 s window fully inside the annotation
        assert_eq!(
            window_true_label(&anns, "Cz", 2560, 512, 256.0),
            ClassLabel::Swd
        );
        // exactly half overlap counts as SWD
        assert_eq!(
            window_true_label(&anns, "Cz", 2304, 512, 256.0),
            ClassLabel::Swd
        );
        // under half overlap
        assert_eq!(
            window_true_label(&anns, "Cz", 2303, 512, 256.0),
            ClassLabel::NonSwd
        );
        // other channel
        assert_eq!(
            window_true_label(&anns, "Fp1", 2560, 512, 256.0),
            ClassLabel::NonSwd
        );
    }
}
