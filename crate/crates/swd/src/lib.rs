//! Spike-and-wave discharge (SWD) detection in multichannel EEG.
//!
//! Pipeline: sliding-window segmentation (2 s windows, 1 s overlap), real
//! Morlet continuous wavelet transform over the 1-3 Hz band, reduction of
//! each segment's coefficients to a 3-predictor feature vector
//! [GGD scale, variance, median], and k-NN classification (k = 10 by
//! default), with a kernel-density Bayes formulation whose zero-bandwidth
//! limit recovers 1-NN. A deterministic synthetic EEG generator makes the
//! full pipeline testable end to end.

pub mod classifier;
pub mod error;
pub mod features;
pub mod ggd;
pub mod harness;
pub mod morlet;
pub mod segmenter;
pub mod signal_model;
pub mod synthgen;

pub use classifier::{KernelBayesModel, KnnModel, Scaling, ScalingMode, TrainingSet};
pub use error::{Error, Result};
pub use features::{extract_features, FeatureVector};
pub use ggd::{fit_ggd_mle, ggd_logpdf, sample_ggd, GgdParams, SolverOptions};
pub use harness::{evaluate, run_pipeline, train, EvalReport};
pub use morlet::{build_scale_grid, cwt, morlet_psi, ScaleGrid, WaveletCoefficients};
pub use segmenter::{segment_channel, Segment, WindowSpec};
pub use signal_model::{Annotation, ClassLabel, EegRecording};
pub use synthgen::{gen_background_channel, gen_dataset, gen_swd_channel, SynthSpec};
