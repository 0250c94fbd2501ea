//! Three-class stance classifiers over binary feature vectors.
//!
//! * [`LinearSvm`]: one-vs-rest hinge loss with L2 regularization, trained by
//!   seeded epoch-based stochastic subgradient descent.
//! * [`RbfSvm`]: one-vs-rest kernel SVM solved in the dual with SMO.
//! * [`RandomForest`]: bootstrap-sampled Gini trees with √d features per split.
//!
//! Every model predicts the label with the highest score; ties go to the
//! first label in FAVOR, AGAINST, NONE order.

mod forest;
mod format;
mod kernel;
mod linear;
mod rbf;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::StanceLabel;
use crate::features::FeatureVector;
use crate::scalar::Real;

pub use forest::{DecisionTree, Node, RandomForest};
pub use kernel::rbf_kernel;
pub use linear::{Hyperplane, LinearSvm};
pub use rbf::{KernelExpansion, RbfSvm};

use format::Reader;

pub const MODEL_HEADER: &str = "codemix-stance model v1";

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("training data is empty")]
    EmptyTraining,
    #[error("training data contains a single class ({0}); at least two are required")]
    SingleClass(StanceLabel),
    #[error("{vectors} vectors but {labels} labels")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("vector dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model was trained on feature space {expected} but was given {got}")]
    FingerprintMismatch { expected: String, got: String },
    #[error("malformed model file at line {line}: {message}")]
    Format { line: usize, message: String },
}

pub type Result<T, E = ClassifyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    LinearSvm,
    RbfSvm,
    RandomForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::RbfSvm, ModelKind::RandomForest, ModelKind::LinearSvm];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::LinearSvm => "linear-svm",
            ModelKind::RbfSvm => "rbf-svm",
            ModelKind::RandomForest => "random-forest",
        })
    }
}

impl FromStr for ModelKind {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear-svm" => Ok(ModelKind::LinearSvm),
            "rbf-svm" => Ok(ModelKind::RbfSvm),
            "random-forest" => Ok(ModelKind::RandomForest),
            other => Err(ClassifyError::InvalidConfig(format!("unknown model kind {other:?}"))),
        }
    }
}

/// RBF width; `Auto` resolves to 1 / feature-space size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma<F> {
    Auto,
    Value(F),
}

impl<F: Real> Gamma<F> {
    pub fn resolve(self, dim: usize) -> F {
        match self {
            Gamma::Value(g) => g,
            Gamma::Auto => F::one() / F::from_count(dim.max(1) as u64),
        }
    }
}

impl<F: Real> fmt::Display for Gamma<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Auto => f.write_str("auto"),
            Gamma::Value(g) => write!(f, "{g}"),
        }
    }
}

impl<F: Real> FromStr for Gamma<F> {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Gamma::Auto);
        }
        s.parse::<F>()
            .map(Gamma::Value)
            .map_err(|_| ClassifyError::InvalidConfig(format!("invalid gamma {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig<F> {
    pub kind: ModelKind,
    /// SVM regularization.
    pub c: F,
    pub gamma: Gamma<F>,
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
    /// Linear SVM epoch budget.
    pub epochs: usize,
    /// Linear SVM stops once the epoch-to-epoch objective change drops below this.
    pub objective_tolerance: F,
    /// RBF SVM KKT violation tolerance.
    pub kkt_tolerance: F,
}

impl<F: Real> ModelConfig<F> {
    pub fn new(kind: ModelKind) -> Self {
        ModelConfig {
            kind,
            c: F::one(),
            gamma: Gamma::Auto,
            trees: 100,
            max_depth: None,
            seed: 42,
            epochs: 1000,
            objective_tolerance: F::from_f64(1e-6),
            kkt_tolerance: F::from_f64(1e-3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ClassifyError::InvalidConfig(m.to_string()));
        if !(self.c > F::zero() && self.c.is_finite()) {
            return bad("c must be positive");
        }
        if let Gamma::Value(g) = self.gamma {
            if !(g > F::zero() && g.is_finite()) {
                return bad("gamma must be positive");
            }
        }
        if self.trees == 0 {
            return bad("trees must be positive");
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.kkt_tolerance > F::zero()) || self.objective_tolerance < F::zero() {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    fn write_fields(&self, out: &mut String) {
        use std::fmt::Write;
        let depth = self.max_depth.map_or("none".to_string(), |d| d.to_string());
        let _ = write!(
            out,
            "kind={}\nc={}\ngamma={}\ntrees={}\nmax_depth={}\nseed={}\nepochs={}\nobjective_tolerance={}\nkkt_tolerance={}\n",
            self.kind,
            self.c,
            self.gamma,
            self.trees,
            depth,
            self.seed,
            self.epochs,
            self.objective_tolerance,
            self.kkt_tolerance
        );
    }

    fn read_fields(r: &mut Reader<'_>) -> Result<Self> {
        let kind = r.parse_field("kind")?;
        let c = r.parse_field("c")?;
        let gamma = r.parse_field("gamma")?;
        let trees = r.parse_field("trees")?;
        let (ln, depth) = r.field("max_depth")?;
        let max_depth = match depth {
            "none" => None,
            d => Some(d.parse().map_err(|_| r.error(ln, "bad max_depth"))?),
        };
        Ok(ModelConfig {
            kind,
            c,
            gamma,
            trees,
            max_depth,
            seed: r.parse_field("seed")?,
            epochs: r.parse_field("epochs")?,
            objective_tolerance: r.parse_field("objective_tolerance")?,
            kkt_tolerance: r.parse_field("kkt_tolerance")?,
        })
    }
}

/// Per-label scores; `None` for labels absent from training.
pub type Scores<F> = [Option<F>; 3];

/// Highest-scoring label; ties resolve to the earliest label.
pub fn argmax_label<F: PartialOrd + Copy>(scores: &Scores<F>) -> StanceLabel {
    let mut best: Option<(usize, F)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    StanceLabel::from_index(best.map_or(0, |(i, _)| i)).expect("index < 3")
}

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams<F> {
    Linear(LinearSvm<F>),
    Rbf(RbfSvm<F>),
    Forest(RandomForest<F>),
}

/// A fitted classifier bound to the feature space it was trained in.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<F> {
    pub config: ModelConfig<F>,
    pub dim: usize,
    pub feature_space_fingerprint: String,
    pub params: ModelParams<F>,
}

fn check_training(vectors: &[FeatureVector], labels: &[StanceLabel]) -> Result<usize> {
    if vectors.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let first = vectors.first().ok_or(ClassifyError::EmptyTraining)?;
    let dim = first.dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(ClassifyError::DimensionMismatch {
            expected: dim,
            got: v.dim(),
        });
    }
    if labels.iter().all(|l| *l == labels[0]) {
        return Err(ClassifyError::SingleClass(labels[0]));
    }
    Ok(dim)
}

/// Fits a model of `config.kind`. `fingerprint` identifies the feature
/// space the vectors live in.
pub fn train<F: Real>(
    config: &ModelConfig<F>,
    vectors: &[FeatureVector],
    labels: &[StanceLabel],
    fingerprint: &str,
) -> Result<TrainedModel<F>> {
    config.validate()?;
    let dim = check_training(vectors, labels)?;
    let params = match config.kind {
        ModelKind::LinearSvm => ModelParams::Linear(LinearSvm::fit(config, vectors, labels, dim)),
        ModelKind::RbfSvm => ModelParams::Rbf(RbfSvm::fit(config, vectors, labels, dim)),
        ModelKind::RandomForest => ModelParams::Forest(RandomForest::fit(config, vectors, labels, dim)),
    };
    Ok(TrainedModel {
        config: config.clone(),
        dim,
        feature_space_fingerprint: fingerprint.to_string(),
        params,
    })
}

impl<F: Real> TrainedModel<F> {
    /// Fails unless the model was trained in the space with `fingerprint`.
    pub fn check_fingerprint(&self, fingerprint: &str) -> Result<()> {
        if self.feature_space_fingerprint == fingerprint {
            Ok(())
        } else {
            Err(ClassifyError::FingerprintMismatch {
                expected: self.feature_space_fingerprint.clone(),
                got: fingerprint.to_string(),
            })
        }
    }

    /// Decision values for SVMs, vote counts for the forest.
    pub fn scores(&self, v: &FeatureVector) -> Result<Scores<F>> {
        if v.dim() != self.dim {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        Ok(match &self.params {
            ModelParams::Linear(m) => m.decision_values(v),
            ModelParams::Rbf(m) => m.decision_values(v),
            ModelParams::Forest(m) => m.votes(v).map(|c| c.map(|c| F::from_count(c as u64))),
        })
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<StanceLabel> {
        Ok(argmax_label(&self.scores(v)?))
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_HEADER}");
        self.config.write_fields(&mut out);
        let _ = writeln!(out, "fingerprint={}", self.feature_space_fingerprint);
        let _ = writeln!(out, "dim={}", self.dim);
        match &self.params {
            ModelParams::Linear(m) => m.write(&mut out),
            ModelParams::Rbf(m) => m.write(&mut out),
            ModelParams::Forest(m) => m.write(&mut out),
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (ln, header) = r.line()?;
        if header != MODEL_HEADER {
            return Err(r.error(ln, &format!("unsupported header {header:?}")));
        }
        let config = ModelConfig::read_fields(&mut r)?;
        let fingerprint = r.field("fingerprint")?.1.to_string();
        let dim: usize = r.parse_field("dim")?;
        let params = match config.kind {
            ModelKind::LinearSvm => ModelParams::Linear(LinearSvm::read(&mut r, dim)?),
            ModelKind::RbfSvm => ModelParams::Rbf(RbfSvm::read(&mut r, dim)?),
            ModelKind::RandomForest => ModelParams::Forest(RandomForest::read(&mut r, dim)?),
        };
        r.finish()?;
        Ok(TrainedModel {
            config,
            dim,
            feature_space_fingerprint: fingerprint,
            params,
        })
    }
}
