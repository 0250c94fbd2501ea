//! Stance detection for English-Hindi code-mixed tweets.
//!
//! The crate covers the whole pipeline: reading and writing the three-file
//! corpus format, tokenization and rule/dictionary based language tagging,
//! character n-gram, word n-gram and stance-indicative-token features,
//! chi-square feature selection, three classifiers (linear SVM, RBF SVM,
//! random forest) and a cross-validation harness.
//!
//! Numerical code is generic over the scalar type. The aliases below fix the
//! types used by the end-to-end pipeline.

pub mod classify;
pub mod corpus;
pub mod evaluate;
pub mod features;
pub mod langid;
pub mod pipeline;
pub mod preprocess;
pub mod scalar;
pub mod selection;

pub use corpus::{Corpus, LanguageTag, StanceLabel, TokenAnnotation, Tweet};
pub use features::{FeatureDescriptor, FeatureSpace, FeatureVector, PreparedTweet, Thresholds};
pub use scalar::{Real, Scalar};

/// Floating-point type used by the pipeline's classifiers.
pub type Float = f64;

/// Exact rational used where ties or threshold comparisons must be exact.
pub type Exact = num_rational::Ratio<i128>;

/// Score type of stance-indicative tokens (a fraction of two counts).
pub type Score = num_rational::Ratio<u64>;

pub type ModelConfig = classify::ModelConfig<Float>;
pub type TrainedModel = classify::TrainedModel<Float>;
pub type LinearSvm = classify::LinearSvm<Float>;
pub type RbfSvm = classify::RbfSvm<Float>;
pub type RandomForest = classify::RandomForest<Float>;
