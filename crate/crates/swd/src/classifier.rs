//! Kernel-density Bayes classifier over 3-dimensional feature vectors and
//! its k-NN realization.
//!
//! Class-conditional densities are isotropic Gaussian-kernel mixtures over
//! the training points; Bayes' rule with ML priors `N_c / (N_0 + N_1)` gives
//! posteriors, and the posterior ratio decides the class. As the kernel
//! bandwidth shrinks to zero the decision reduces to the single nearest
//! neighbor.
//!
//! Density arithmetic is done in log space: the exponents overflow and
//! underflow doubles for realistic feature distances. Features are
//! standardized per dimension by default (the raw ranges span six orders of
//! magnitude, which would let the variance dominate Euclidean distance); a
//! raw-distance mode is available.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_DIM};
use crate::signal_model::ClassLabel;

const MODEL_SCHEMA: &str = "swd-knn-model/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ScalingMode {
    #[default]
    ZScore,
    /// Raw Euclidean distances on unscaled features.
    Identity,
}

/// Per-dimension affine transform: `scaled = (v - offset) * factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub offset: [f64; FEATURE_DIM],
    pub factor: [f64; FEATURE_DIM],
}

impl Scaling {
    pub fn identity() -> Self {
        Self {
            offset: [0.0; FEATURE_DIM],
            factor: [1.0; FEATURE_DIM],
        }
    }

    pub fn apply(&self, v: &[f64; FEATURE_DIM]) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        for i in 0..FEATURE_DIM {
            out[i] = (v[i] - self.offset[i]) * self.factor[i];
        }
        out
    }
}

/// Z-score transform fitted on the given points: offset = mean,
/// factor = 1/std (population).
pub fn fit_scaling(points: &[FeatureVector]) -> Result<Scaling> {
    let n = points.len() as f64;
    let mut offset = [0.0; FEATURE_DIM];
    let mut factor = [0.0; FEATURE_DIM];
    for dim in 0..FEATURE_DIM {
        let vals: Vec<f64> = points.iter().map(|p| p.as_array()[dim]).collect();
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if !(var > 0.0) {
            return Err(Error::ZeroSpread { dim });
        }
        offset[dim] = mean;
        factor[dim] = 1.0 / var.sqrt();
    }
    Ok(Scaling { offset, factor })
}

/// Labeled training points with their fitted feature scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub points: Vec<FeatureVector>,
    pub scaling: Scaling,
    pub scaling_mode: ScalingMode,
    /// Scaled coordinates, parallel to `points`.
    scaled: Vec<[f64; FEATURE_DIM]>,
    labels: Vec<ClassLabel>,
    n0: usize,
    n1: usize,
}

impl TrainingSet {
    pub fn new(points: Vec<FeatureVector>, scaling_mode: ScalingMode) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyModel);
        }
        let labels: Vec<ClassLabel> = points
            .iter()
            .map(|p| p.label.ok_or(Error::SingleClass))
            .collect::<Result<_>>()?;
        let n1 = labels.iter().filter(|&&l| l == ClassLabel::Swd).count();
        let n0 = labels.len() - n1;
        if n0 == 0 || n1 == 0 {
            return Err(Error::SingleClass);
        }
        let scaling = match scaling_mode {
            ScalingMode::ZScore => fit_scaling(&points)?,
            ScalingMode::Identity => Scaling::identity(),
        };
        let scaled = points.iter().map(|p| scaling.apply(&p.as_array())).collect();
        Ok(Self {
            points,
            scaling,
            scaling_mode,
            scaled,
            labels,
            n0,
            n1,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn scale_query(&self, q: &FeatureVector) -> [f64; FEATURE_DIM] {
        self.scaling.apply(&q.as_array())
    }

    fn squared_distances<'a>(
        &'a self,
        q: &'a [f64; FEATURE_DIM],
    ) -> impl Iterator<Item = (f64, ClassLabel)> + 'a {
        self.scaled.iter().zip(&self.labels).map(move |(p, &l)| {
            let mut d2 = 0.0;
            for i in 0..FEATURE_DIM {
                let d = q[i] - p[i];
                d2 += d * d;
            }
            (d2, l)
        })
    }
}

/// Gaussian-kernel mixture classifier. `bandwidth_sq` is the shared kernel
/// variance; priors are the ML class frequencies.
#[derive(Debug, Clone)]
pub struct KernelBayesModel {
    pub train: TrainingSet,
    pub bandwidth_sq: f64,
}

impl KernelBayesModel {
    pub fn new(train: TrainingSet, bandwidth_sq: f64) -> Self {
        assert!(bandwidth_sq > 0.0, "bandwidth must be positive");
        Self {
            train,
            bandwidth_sq,
        }
    }

    pub fn priors(&self) -> (f64, f64) {
        let n = self.train.len() as f64;
        (
            self.train.n0() as f64 / n,
            self.train.n1() as f64 / n,
        )
    }

    fn log_class_density(&self, q_scaled: &[f64; FEATURE_DIM], c: ClassLabel) -> f64 {
        let h2 = self.bandwidth_sq;
        let n_c = if c == ClassLabel::NonSwd {
            self.train.n0()
        } else {
            self.train.n1()
        } as f64;
        let exponents: Vec<f64> = self
            .train
            .squared_distances(q_scaled)
            .filter(|(_, l)| *l == c)
            .map(|(d2, _)| -d2 / (2.0 * h2))
            .collect();
        let norm = -(n_c.ln())
            - 0.5 * FEATURE_DIM as f64 * (2.0 * std::f64::consts::PI * h2).ln();
        norm + log_sum_exp(&exponents)
    }

    /// Class-conditional mixture density at `q`.
    pub fn class_density(&self, q: &FeatureVector, c: ClassLabel) -> f64 {
        self.log_class_density(&self.train.scale_query(q), c).exp()
    }

    /// Log of `rho(q|c=0) rho(c=0) / (rho(q|c=1) rho(c=1))`.
    pub fn log_posterior_ratio(&self, q: &FeatureVector) -> f64 {
        let qs = self.train.scale_query(q);
        let (p0, p1) = self.priors();
        (self.log_class_density(&qs, ClassLabel::NonSwd) + p0.ln())
            - (self.log_class_density(&qs, ClassLabel::Swd) + p1.ln())
    }

    /// Posterior ratio between class 0 and class 1. May overflow to
    /// infinity for extreme queries; use `log_posterior_ratio` to compare.
    pub fn posterior_ratio(&self, q: &FeatureVector) -> f64 {
        self.log_posterior_ratio(q).exp()
    }

    /// `(rho(c=0|q), rho(c=1|q))`; they sum to one.
    pub fn posteriors(&self, q: &FeatureVector) -> (f64, f64) {
        let lr = self.log_posterior_ratio(q);
        // p0 = r/(1+r), p1 = 1/(1+r) with r = exp(lr), in stable form
        let p0 = 1.0 / (1.0 + (-lr).exp());
        let p1 = 1.0 / (1.0 + lr.exp());
        (p0, p1)
    }

    /// Ratio > 1 is class 0; a ratio of exactly 1 is class 1, conservative
    /// toward detection.
    pub fn classify(&self, q: &FeatureVector) -> ClassLabel {
        if self.log_posterior_ratio(q) > 0.0 {
            ClassLabel::NonSwd
        } else {
            ClassLabel::Swd
        }
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Brute-force k-NN classifier; exact by construction at the training sizes
/// this pipeline sees (a few hundred points).
#[derive(Debug, Clone)]
pub struct KnnModel {
    pub train: TrainingSet,
    pub k: usize,
}

impl KnnModel {
    pub fn new(train: TrainingSet, k: usize) -> Result<Self> {
        if k == 0 || k > train.len() {
            return Err(Error::BadK { k, n: train.len() });
        }
        Ok(Self { train, k })
    }

    /// Majority vote among the k nearest, Euclidean distance in the scaled
    /// space. Distance ties at the k-th rank break by lower training index;
    /// vote ties break by the class of the single nearest neighbor.
    pub fn classify(&self, q: &FeatureVector) -> (ClassLabel, (usize, usize)) {
        let qs = self.train.scale_query(q);
        let mut ranked: Vec<(f64, usize, ClassLabel)> = self
            .train
            .squared_distances(&qs)
            .enumerate()
            .map(|(i, (d2, l))| (d2, i, l))
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let nearest_label = ranked[0].2;
        let mut votes = (0usize, 0usize);
        for &(_, _, l) in &ranked[..self.k] {
            match l {
                ClassLabel::NonSwd => votes.0 += 1,
                ClassLabel::Swd => votes.1 += 1,
            }
        }
        let label = match votes.0.cmp(&votes.1) {
            std::cmp::Ordering::Greater => ClassLabel::NonSwd,
            std::cmp::Ordering::Less => ClassLabel::Swd,
            std::cmp::Ordering::Equal => nearest_label,
        };
        (label, votes)
    }
}

/// Checks that the kernel-Bayes decision converges to the 1-NN decision as
/// the bandwidth shrinks. Evaluates at `h^2 = d_min^2 * 10^-p` for
/// `p = 4..=6` and requires every decision in that tail to agree with 1-NN.
pub fn knn_limit_check(train: &TrainingSet, q: &FeatureVector) -> bool {
    let qs = train.scale_query(q);
    let (mut best_d2, mut best_label) = (f64::INFINITY, ClassLabel::Swd);
    for (i, (d2, l)) in train.squared_distances(&qs).enumerate() {
        if d2 < best_d2 || (d2 == best_d2 && i == 0) {
            best_d2 = d2;
            best_label = l;
        }
    }
    let d2_ref = if best_d2 > 0.0 { best_d2 } else { 1.0 };
    let mut converged = true;
    for p in 4..=6 {
        let h2 = d2_ref * 10f64.powi(-p);
        let m = KernelBayesModel::new(train.clone(), h2);
        converged &= m.classify(q) == best_label;
    }
    converged
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    k: usize,
    scaling_mode: ScalingMode,
    scaling: Scaling,
    points: Vec<FeatureVector>,
}

pub fn save_model(model: &KnnModel, path: impl AsRef<Path>) -> Result<()> {
    let file = ModelFile {
        schema: MODEL_SCHEMA.to_string(),
        k: model.k,
        scaling_mode: model.train.scaling_mode,
        scaling: model.train.scaling.clone(),
        points: model.train.points.clone(),
    };
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &file)?;
    use std::io::Write;
    writeln!(f)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<KnnModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.schema != MODEL_SCHEMA {
        return Err(Error::BadModelFile {
            path: path.display().to_string(),
            detail: format!("schema {:?}, expected {MODEL_SCHEMA:?}", file.schema),
        });
    }
    let train = TrainingSet::new(file.points, file.scaling_mode)?;
    KnnModel::new(train, file.k)
}
