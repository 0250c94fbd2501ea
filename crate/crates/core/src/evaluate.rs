//! Cross-validation, accuracy and inter-annotator agreement.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::classify::{ClassifyError, ModelKind};
use crate::corpus::StanceLabel;
use crate::features::{format_score, CorpusFingerprint, FeatureError, FeatureFamilies, PreparedTweet};
use crate::pipeline::{fit_pipeline, stance_labels, PipelineConfig, PipelineError};
use crate::scalar::{Real, Scalar};

pub const REPORT_HEADER: &str = "codemix-stance crossval v1";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid fold count {k} for {n} examples (need 2 <= k <= n)")]
    InvalidFolds { k: usize, n: usize },
    #[error("sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("cannot score empty sequences")]
    Empty,
    #[error("kappa is undefined: each annotator uses a single label, and the labels differ")]
    UndefinedKappa,
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: PipelineError,
    },
}

impl EvalError {
    /// True when the failure happened while training a fold's model.
    pub fn is_training_failure(&self) -> bool {
        matches!(self, EvalError::Fold { .. })
    }
}

/// Which fold each example is held out in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn from_assignment(k: usize, fold_of: Vec<usize>) -> Result<Self, EvalError> {
        if k < 2 || k > fold_of.len() || fold_of.iter().any(|&f| f >= k) {
            return Err(EvalError::InvalidFolds { k, n: fold_of.len() });
        }
        Ok(FoldAssignment { k, fold_of })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn folds(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &f) in self.fold_of.iter().enumerate() {
            out[f].push(i);
        }
        out
    }
}

fn check_k(k: usize, n: usize) -> Result<(), EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::InvalidFolds { k, n });
    }
    Ok(())
}

/// Shuffles each class with `seed` and deals its members round-robin; the
/// dealing position carries over between classes so totals stay balanced.
pub fn stratified_folds(labels: &[StanceLabel], k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    check_k(k, labels.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for class in StanceLabel::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

/// Plain shuffled folds ignoring labels.
pub fn shuffled_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    check_k(k, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; n];
    for (pos, i) in order.into_iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment { k, fold_of })
}

/// Fraction of positions where `predictions` and `gold` agree.
pub fn accuracy<T: Scalar, L: PartialEq>(predictions: &[L], gold: &[L]) -> Result<T, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch(predictions.len(), gold.len()));
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = predictions.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(T::from_count(correct as u64) / T::from_count(gold.len() as u64))
}

/// Cohen's kappa, computed as `(n·agree − Σ a_l b_l) / (n² − Σ a_l b_l)`
/// from label counts, which equals `(p_o − p_e) / (1 − p_e)`.
///
/// When both annotators use a single label throughout, agreement carries no
/// information: identical sequences score 1 and differing ones are an error.
pub fn cohens_kappa<T: Scalar, L: Ord + Clone>(a: &[L], b: &[L]) -> Result<T, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = a.len() as u64;
    let mut margins: BTreeMap<&L, (u64, u64)> = BTreeMap::new();
    let mut agree = 0u64;
    for (x, y) in a.iter().zip(b) {
        margins.entry(x).or_default().0 += 1;
        margins.entry(y).or_default().1 += 1;
        if x == y {
            agree += 1;
        }
    }
    let constant = |s: &[L]| s.iter().all(|x| *x == s[0]);
    if constant(a) && constant(b) {
        return if a[0] == b[0] {
            Ok(T::one())
        } else {
            Err(EvalError::UndefinedKappa)
        };
    }
    // At least one annotator varies, so chance agreement is below n².
    let chance: u64 = margins.values().map(|(p, q)| p * q).sum();
    let num = T::from_count(n * agree) - T::from_count(chance);
    let den = T::from_count(n * n) - T::from_count(chance);
    Ok(num / den)
}

/// `m[x][y]` counts items labelled `x` by the first annotator and `y` by the second.
pub fn agreement_matrix(a: &[StanceLabel], b: &[StanceLabel]) -> Result<[[u64; 3]; 3], EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    let mut m = [[0u64; 3]; 3];
    for (x, y) in a.iter().zip(b) {
        m[x.index()][y.index()] += 1;
    }
    Ok(m)
}

/// Rows are gold labels, columns predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix(pub [[u64; 3]; 3]);

impl ConfusionMatrix {
    pub fn add(&mut self, gold: StanceLabel, predicted: StanceLabel) {
        self.0[gold.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..3).map(|i| self.0[i][i]).sum()
    }

    pub fn precision<T: Scalar>(&self, class: StanceLabel) -> Option<T> {
        let c = class.index();
        let predicted: u64 = (0..3).map(|g| self.0[g][c]).sum();
        (predicted > 0).then(|| T::from_count(self.0[c][c]) / T::from_count(predicted))
    }

    pub fn recall<T: Scalar>(&self, class: StanceLabel) -> Option<T> {
        let c = class.index();
        let gold: u64 = self.0[c].iter().sum();
        (gold > 0).then(|| T::from_count(self.0[c][c]) / T::from_count(gold))
    }

    pub fn f1<T: Scalar>(&self, class: StanceLabel) -> Option<T> {
        let p: T = self.precision(class)?;
        let r: T = self.recall(class)?;
        let s = p.clone() + r.clone();
        (s != T::zero()).then(|| T::from_count(2) * p * r / s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValConfig<F> {
    pub pipeline: PipelineConfig<F>,
    pub folds: usize,
    pub stratify: bool,
    /// Seeds the fold assignment; the model has its own seed in `pipeline.model`.
    pub seed: u64,
}

/// What one fold trained on and how it scored.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldRecord {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub correct: usize,
    pub mined_features: usize,
    pub selected_features: usize,
    pub space_fingerprint: String,
    /// Tweets the fold's feature space was mined from.
    pub fitted_on: CorpusFingerprint,
    pub test_ids: Vec<String>,
}

impl FoldRecord {
    /// No held-out tweet contributed to the fold's feature space.
    pub fn is_leak_free(&self) -> bool {
        self.test_ids.iter().all(|id| !self.fitted_on.contains(id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<F> {
    pub config: CrossValConfig<F>,
    pub stopword_hash: String,
    pub per_fold_accuracy: Vec<F>,
    pub mean_accuracy: F,
    pub confusion: ConfusionMatrix,
    pub folds: FoldAssignment,
    pub records: Vec<FoldRecord>,
}

/// Runs k-fold cross-validation. Each fold mines and selects features from
/// its own training split only.
pub fn cross_validate<F: Real>(
    tweets: &[PreparedTweet],
    config: &CrossValConfig<F>,
    stopword_hash: &str,
) -> Result<EvalReport<F>, EvalError> {
    let labels = stance_labels(tweets)?;
    let folds = if config.stratify {
        stratified_folds(&labels, config.folds, config.seed)?
    } else {
        shuffled_folds(labels.len(), config.folds, config.seed)?
    };
    let outcomes: Vec<Result<(FoldRecord, Vec<(StanceLabel, StanceLabel)>), EvalError>> = (0..folds.k())
        .into_par_iter()
        .map(|fold| {
            let train: Vec<PreparedTweet> = folds.train_indices(fold).iter().map(|&i| tweets[i].clone()).collect();
            let test = folds.test_indices(fold);
            let wrap = |source: PipelineError| EvalError::Fold { fold, source };
            let fitted = fit_pipeline(&train, &config.pipeline, stopword_hash).map_err(wrap)?;
            let mut pairs = Vec::with_capacity(test.len());
            for &i in &test {
                let p = fitted.predict(&tweets[i]).map_err(|e: ClassifyError| wrap(e.into()))?;
                pairs.push((labels[i], p));
            }
            let correct = pairs.iter().filter(|(g, p)| g == p).count();
            let record = FoldRecord {
                fold,
                train_size: train.len(),
                test_size: test.len(),
                correct,
                mined_features: fitted.mined,
                selected_features: fitted.space.len(),
                space_fingerprint: fitted.space.fingerprint(),
                fitted_on: fitted.space.fitted_on().clone(),
                test_ids: test.iter().map(|&i| tweets[i].id.clone()).collect(),
            };
            Ok((record, pairs))
        })
        .collect();

    let mut records = Vec::with_capacity(folds.k());
    let mut confusion = ConfusionMatrix::default();
    let mut per_fold_accuracy = Vec::with_capacity(folds.k());
    for outcome in outcomes {
        let (record, pairs) = outcome?;
        for (g, p) in pairs {
            confusion.add(g, p);
        }
        per_fold_accuracy.push(F::from_count(record.correct as u64) / F::from_count(record.test_size as u64));
        records.push(record);
    }
    let mean_accuracy =
        per_fold_accuracy.iter().fold(F::zero(), |a, &b| a + b) / F::from_count(per_fold_accuracy.len() as u64);
    Ok(EvalReport {
        config: config.clone(),
        stopword_hash: stopword_hash.to_string(),
        per_fold_accuracy,
        mean_accuracy,
        confusion,
        folds,
        records,
    })
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or("none".to_string(), |v| v.to_string())
}

impl<F: Real> EvalReport<F> {
    /// Machine-readable `key=value` block.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let p = &self.config.pipeline;
        let m = &p.model;
        let t = &p.thresholds;
        let _ = writeln!(out, "{REPORT_HEADER}");
        let _ = writeln!(out, "model={}", m.kind);
        let _ = writeln!(out, "features={}", p.families);
        let _ = writeln!(out, "c={}", m.c);
        let _ = writeln!(out, "gamma={}", m.gamma);
        let _ = writeln!(out, "trees={}", m.trees);
        let _ = writeln!(out, "max_depth={}", opt(m.max_depth));
        let _ = writeln!(out, "epochs={}", m.epochs);
        let _ = writeln!(out, "model_seed={}", m.seed);
        let _ = writeln!(out, "char_n={}-{}", t.char_n.start(), t.char_n.end());
        let _ = writeln!(out, "char_min={}", t.char_min);
        let _ = writeln!(out, "word_n={}-{}", t.word_n.start(), t.word_n.end());
        let _ = writeln!(out, "word_min={}", t.word_min);
        let _ = writeln!(out, "si_min_count={}", t.si_min_count);
        let _ = writeln!(out, "si_min_score={}", format_score(&t.si_min_score));
        let _ = writeln!(out, "count_mode={}", t.count_mode);
        let _ = writeln!(out, "top_k={}", p.top_k);
        let _ = writeln!(out, "chi_mode={}", p.chi_mode);
        let _ = writeln!(out, "stopwords={}", self.stopword_hash);
        let _ = writeln!(out, "folds={}", self.config.folds);
        let _ = writeln!(out, "stratified={}", self.config.stratify);
        let _ = writeln!(out, "fold_seed={}", self.config.seed);
        for (r, acc) in self.records.iter().zip(&self.per_fold_accuracy) {
            let _ = writeln!(
                out,
                "fold.{}=accuracy:{} correct:{} test:{} train:{} mined:{} selected:{} space:{}",
                r.fold,
                acc,
                r.correct,
                r.test_size,
                r.train_size,
                r.mined_features,
                r.selected_features,
                r.space_fingerprint
            );
        }
        let _ = writeln!(out, "mean_accuracy={}", self.mean_accuracy);
        for g in StanceLabel::ALL {
            let row = self.confusion.0[g.index()];
            let _ = writeln!(out, "confusion.{g}={} {} {}", row[0], row[1], row[2]);
        }
        for c in StanceLabel::ALL {
            let _ = writeln!(
                out,
                "class.{c}=precision:{} recall:{} f1:{}",
                opt(self.confusion.precision::<F>(c)),
                opt(self.confusion.recall::<F>(c)),
                opt(self.confusion.f1::<F>(c))
            );
        }
        let assignment: Vec<String> = self.folds.fold_of().iter().map(|f| f.to_string()).collect();
        let _ = writeln!(out, "assignment={}", assignment.join(" "));
        out
    }
}

/// Row label for a feature-family combination.
pub fn family_label(f: FeatureFamilies) -> String {
    match (f.char, f.word, f.si) {
        (true, false, false) => "Character n-grams".into(),
        (false, true, false) => "Word n-grams".into(),
        (false, false, true) => "Stance-indicative tokens".into(),
        (true, true, true) => "All features".into(),
        _ => f.to_string(),
    }
}

/// Mean accuracies (in percent, one decimal) laid out with feature subsets
/// as rows and classifiers as columns. Missing cells print as `-`.
pub fn format_grid<F: Real>(reports: &[EvalReport<F>]) -> String {
    let mut rows: Vec<FeatureFamilies> = Vec::new();
    let order = |f: &FeatureFamilies| match (f.char, f.word, f.si) {
        (true, false, false) => 0,
        (false, true, false) => 1,
        (false, false, true) => 2,
        (true, true, true) => 4,
        _ => 3,
    };
    for r in reports {
        let f = r.config.pipeline.families;
        if !rows.contains(&f) {
            rows.push(f);
        }
    }
    rows.sort_by_key(|f| (order(f), f.to_string()));
    let cols: Vec<ModelKind> = ModelKind::ALL
        .into_iter()
        .filter(|k| reports.iter().any(|r| r.config.pipeline.model.kind == *k))
        .collect();

    let width = rows
        .iter()
        .map(|f| family_label(*f).len())
        .max()
        .unwrap_or(0)
        .max("Features".len());
    let mut out = format!("{:<width$}", "Features");
    for k in &cols {
        let _ = write!(out, "  {:>13}", k.to_string());
    }
    out.push('\n');
    for f in &rows {
        let _ = write!(out, "{:<width$}", family_label(*f));
        for k in &cols {
            let cell = reports
                .iter()
                .find(|r| r.config.pipeline.families == *f && r.config.pipeline.model.kind == *k)
                .map_or("-".to_string(), |r| {
                    format!("{:.1}", r.mean_accuracy.to_f64_lossy() * 100.0)
                });
            let _ = write!(out, "  {cell:>13}");
        }
        out.push('\n');
    }
    out
}
