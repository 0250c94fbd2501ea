//! Feature mining, selection and training composed into one fitted object.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use thiserror::Error;

use crate::classify::{self, ClassifyError, ModelConfig, TrainedModel};
use crate::corpus::StanceLabel;
use crate::features::{FeatureError, FeatureFamilies, FeatureSpace, PreparedTweet, Thresholds};
use crate::scalar::Real;
use crate::selection::{format_ranking, select_top_k, ChiSquareMode, RankedFeature, SelectionError};

pub const FEATURE_SPACE_FILE: &str = "feature_space.txt";
pub const MODEL_FILE: &str = "model.txt";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error("stopword list {got} differs from the one the model was trained with ({expected})")]
    StopwordMismatch { expected: String, got: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// True when a stored artifact does not match the inputs it is applied to.
    pub fn is_mismatch(&self) -> bool {
        matches!(
            self,
            PipelineError::StopwordMismatch { .. } | PipelineError::Classify(ClassifyError::FingerprintMismatch { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<F> {
    pub thresholds: Thresholds,
    pub families: FeatureFamilies,
    pub top_k: usize,
    pub chi_mode: ChiSquareMode,
    pub model: ModelConfig<F>,
}

impl<F: Real> PipelineConfig<F> {
    pub fn new(model: ModelConfig<F>) -> Self {
        PipelineConfig {
            thresholds: Thresholds::default(),
            families: FeatureFamilies::ALL,
            top_k: 500,
            chi_mode: ChiSquareMode::default(),
            model,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.thresholds.validate()?;
        self.model.validate()?;
        if self.top_k == 0 {
            return Err(PipelineError::InvalidConfig("top_k must be positive".into()));
        }
        if !(self.families.char || self.families.word || self.families.si) {
            return Err(PipelineError::InvalidConfig("no feature family selected".into()));
        }
        Ok(())
    }
}

/// A selected feature space and the model trained in it.
#[derive(Debug, Clone)]
pub struct FittedPipeline<F> {
    pub space: FeatureSpace,
    pub model: TrainedModel<F>,
    /// Size of the mined space before selection.
    pub mined: usize,
    pub ranking: Vec<RankedFeature>,
}

/// Labels of prepared tweets; every tweet must carry one.
pub fn stance_labels(tweets: &[PreparedTweet]) -> Result<Vec<StanceLabel>, FeatureError> {
    tweets
        .iter()
        .map(|t| t.stance.ok_or_else(|| FeatureError::MissingStance(t.id.clone())))
        .collect()
}

/// Mines features from `train` only, keeps the top-k by chi-square and
/// trains the configured model.
pub fn fit_pipeline<F: Real>(
    train: &[PreparedTweet],
    config: &PipelineConfig<F>,
    stopword_hash: &str,
) -> Result<FittedPipeline<F>, PipelineError> {
    config.validate()?;
    let labels = stance_labels(train)?;
    let mined = FeatureSpace::fit(train, &config.thresholds, config.families, stopword_hash)?;
    let vectors: Vec<_> = train.iter().map(|t| mined.vectorize(t)).collect();
    let selection = select_top_k(&vectors, &labels, &mined, config.top_k, config.chi_mode)?;
    let reduced: Vec<_> = vectors.iter().map(|v| selection.apply(v)).collect();
    let fingerprint = selection.space.fingerprint();
    let model = classify::train(&config.model, &reduced, &labels, &fingerprint)?;
    Ok(FittedPipeline {
        space: selection.space,
        model,
        mined: mined.len(),
        ranking: selection.ranking,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl<F: Real> FittedPipeline<F> {
    pub fn predict(&self, tweet: &PreparedTweet) -> Result<StanceLabel, ClassifyError> {
        self.model.predict(&self.space.vectorize(tweet))
    }

    /// Kept features with their chi-square statistics; empty after [`load`](Self::load).
    pub fn selection_report(&self) -> String {
        format_ranking(&self.space, &self.ranking)
    }

    /// Fails unless tweets were prepared with the stopword list the space was fitted with.
    pub fn check_stopwords(&self, stopword_hash: &str) -> Result<(), PipelineError> {
        if self.space.stopword_hash() == stopword_hash {
            Ok(())
        } else {
            Err(PipelineError::StopwordMismatch {
                expected: self.space.stopword_hash().to_string(),
                got: stopword_hash.to_string(),
            })
        }
    }

    /// Writes the feature space and model into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), PipelineError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let fs_path = dir.join(FEATURE_SPACE_FILE);
        fs::write(&fs_path, self.space.to_text()).map_err(io_err(&fs_path))?;
        let model_path = dir.join(MODEL_FILE);
        fs::write(&model_path, self.model.to_text()).map_err(io_err(&model_path))?;
        Ok(())
    }

    /// Reads a saved pipeline, checking that the model belongs to the space.
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let fs_path = dir.join(FEATURE_SPACE_FILE);
        let file = fs::File::open(&fs_path).map_err(io_err(&fs_path))?;
        let space = FeatureSpace::read_from(BufReader::new(file))?;
        let model_path = dir.join(MODEL_FILE);
        let text = fs::read_to_string(&model_path).map_err(io_err(&model_path))?;
        let model = TrainedModel::from_text(&text)?;
        model.check_fingerprint(&space.fingerprint())?;
        let mined = space.len();
        Ok(FittedPipeline {
            space,
            model,
            mined,
            ranking: Vec::new(),
        })
    }
}
