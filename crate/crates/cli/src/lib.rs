//! Command-line front end for the code-mixed stance toolkit.
//!
//! Every subcommand writes its payload to the given writer and echoes the
//! resolved configuration to stderr. Errors carry the process exit code.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use codemix_stance::classify::{ClassifyError, Gamma, ModelKind};
use codemix_stance::corpus::{
    self, corpus_stats, format_lang_records, format_stance_records, join_records, parse_lang_file, parse_stance_file,
    parse_text_file, Corpus, CorpusError, TokenCheck, Tweet,
};
use codemix_stance::evaluate::{
    agreement_matrix, cohens_kappa, cross_validate, format_grid, CrossValConfig, EvalError, EvalReport,
};
use codemix_stance::features::{parse_score, prepare_corpus, CountMode, FeatureError, FeatureFamilies, Thresholds};
use codemix_stance::langid::{HashtagPolicy, LangIdError, LexiconSet, Tagger};
use codemix_stance::pipeline::{fit_pipeline, FittedPipeline, PipelineConfig, PipelineError};
use codemix_stance::preprocess::{tokenize, PreprocessError, StopwordList};
use codemix_stance::selection::ChiSquareMode;
use codemix_stance::{Float, LanguageTag, ModelConfig, StanceLabel};

pub const LEXICON_DIR_ENV: &str = "STANCE_LEXICON_DIR";
pub const SELECTION_FILE: &str = "selection.tsv";
pub const GRID_FILE: &str = "grid.txt";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input files or configuration.
    #[error("{0}")]
    Input(String),
    /// A model could not be trained.
    #[error("training failed: {0}")]
    Training(String),
    /// A stored model does not match the inputs it was applied to.
    #[error("model mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Training(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LangIdError> for CliError {
    fn from(e: LangIdError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PreprocessError> for CliError {
    fn from(e: PreprocessError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            e if e.is_mismatch() => CliError::Mismatch(e.to_string()),
            PipelineError::Classify(c) => classify_error(c),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        if e.is_training_failure() {
            CliError::Training(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn classify_error(e: ClassifyError) -> CliError {
    match e {
        ClassifyError::FingerprintMismatch { .. } | ClassifyError::DimensionMismatch { .. } => {
            CliError::Mismatch(e.to_string())
        }
        ClassifyError::InvalidConfig(_) | ClassifyError::Format { .. } => CliError::Input(e.to_string()),
        _ => CliError::Training(e.to_string()),
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Parser)]
#[command(
    name = "stance",
    version,
    about = "Stance detection for English-Hindi code-mixed tweets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print label counts and per-tweet token averages
    Stats(StatsArgs),
    /// Tokenize and language-tag a text file
    Langid(LangidArgs),
    /// Cross-validate one or more feature/classifier combinations
    Crossval(CrossvalArgs),
    /// Fit features, selection and a model on a corpus and save them
    Train(TrainArgs),
    /// Label tweets with a saved model
    Predict(PredictArgs),
    /// Cohen's kappa between two stance files
    Kappa(KappaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TokenCheckArg {
    Off,
    Characters,
    Exact,
}

impl From<TokenCheckArg> for TokenCheck {
    fn from(a: TokenCheckArg) -> Self {
        match a {
            TokenCheckArg::Off => TokenCheck::Off,
            TokenCheckArg::Characters => TokenCheck::Characters,
            TokenCheckArg::Exact => TokenCheck::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureSet {
    Char,
    Word,
    Si,
    All,
}

impl FeatureSet {
    pub const ROWS: [FeatureSet; 4] = [FeatureSet::Char, FeatureSet::Word, FeatureSet::Si, FeatureSet::All];

    pub fn families(self) -> FeatureFamilies {
        match self {
            FeatureSet::Char => FeatureFamilies {
                char: true,
                word: false,
                si: false,
            },
            FeatureSet::Word => FeatureFamilies {
                char: false,
                word: true,
                si: false,
            },
            FeatureSet::Si => FeatureFamilies {
                char: false,
                word: false,
                si: true,
            },
            FeatureSet::All => FeatureFamilies::ALL,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FeatureSet::Char => "char",
            FeatureSet::Word => "word",
            FeatureSet::Si => "si",
            FeatureSet::All => "all",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Directory containing text.txt, lang.txt and stance.txt
    pub dir: Option<PathBuf>,
    /// Tweet text file (overrides DIR/text.txt)
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// Language annotation file (overrides DIR/lang.txt)
    #[arg(long)]
    pub lang: Option<PathBuf>,
    /// Stance annotation file (overrides DIR/stance.txt)
    #[arg(long)]
    pub stance: Option<PathBuf>,
    /// How strictly annotated tokens must match the tweet text
    #[arg(long, value_enum, default_value = "off")]
    pub check_tokens: TokenCheckArg,
}

struct CorpusPaths {
    text: PathBuf,
    lang: Option<PathBuf>,
    stance: Option<PathBuf>,
}

impl CorpusArgs {
    fn resolve(&self) -> Result<CorpusPaths> {
        let in_dir = |name: &str| self.dir.as_ref().map(|d| d.join(name));
        let text = self
            .text
            .clone()
            .or_else(|| in_dir(corpus::TEXT_FILE))
            .ok_or_else(|| CliError::Input("no corpus given: pass a directory or --text".into()))?;
        let optional =
            |flag: &Option<PathBuf>, name: &str| flag.clone().or_else(|| in_dir(name).filter(|p| p.exists()));
        Ok(CorpusPaths {
            text,
            lang: optional(&self.lang, corpus::LANG_FILE),
            stance: optional(&self.stance, corpus::STANCE_FILE),
        })
    }

    fn describe(&self, p: &CorpusPaths) -> String {
        let show = |o: &Option<PathBuf>| o.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        let check = match self.check_tokens {
            TokenCheckArg::Off => "off",
            TokenCheckArg::Characters => "characters",
            TokenCheckArg::Exact => "exact",
        };
        format!(
            "text={}\nlang={}\nstance={}\ncheck_tokens={check}\n",
            p.text.display(),
            show(&p.lang),
            show(&p.stance),
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct LexiconArgs {
    /// Directory with english.txt, hindi.txt and named_entities.txt (bundled lists if unset)
    #[arg(long, env = LEXICON_DIR_ENV)]
    pub lexicon_dir: Option<PathBuf>,
    /// Tag hashtags as rest, or by the words they decompose into
    #[arg(long, default_value = "rest")]
    pub hashtag_policy: HashtagPolicy,
}

impl LexiconArgs {
    fn load(&self) -> Result<LexiconSet> {
        Ok(match &self.lexicon_dir {
            Some(dir) => LexiconSet::load_dir(dir)?,
            None => LexiconSet::bundled(),
        })
    }

    fn describe(&self) -> String {
        format!(
            "lexicons={}\nhashtag_policy={}\n",
            self.lexicon_dir
                .as_ref()
                .map_or("bundled".to_string(), |d| d.display().to_string()),
            self.hashtag_policy
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct StopwordArgs {
    /// Stopword files, one word per line (bundled lists if none given)
    #[arg(long = "stopwords", value_name = "FILE")]
    pub files: Vec<PathBuf>,
    /// Keep every token
    #[arg(long, conflicts_with = "files")]
    pub no_stopwords: bool,
}

impl StopwordArgs {
    fn load(&self) -> Result<StopwordList> {
        Ok(if self.no_stopwords {
            StopwordList::none()
        } else if self.files.is_empty() {
            StopwordList::bundled()
        } else {
            StopwordList::load(&self.files)?
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    /// Minimum frequency of a character n-gram
    #[arg(long, default_value_t = 8)]
    pub char_min: u64,
    /// Minimum frequency of a word n-gram
    #[arg(long, default_value_t = 10)]
    pub word_min: u64,
    /// Minimum frequency of a stance-indicative token
    #[arg(long, default_value_t = 5)]
    pub si_min_count: u64,
    /// Minimum score of a stance-indicative token (decimal or fraction)
    #[arg(long, default_value = "0.6")]
    pub si_min_score: String,
    /// Count every occurrence or each tweet once
    #[arg(long, default_value = "occurrence")]
    pub count_mode: CountMode,
    /// Features kept after chi-square ranking
    #[arg(long, default_value_t = 500)]
    pub top_k: usize,
    /// Chi-square variant used for ranking
    #[arg(long, default_value = "multiclass")]
    pub chi_mode: ChiSquareMode,
}

impl FeatureArgs {
    fn thresholds(&self) -> Result<Thresholds> {
        let t = Thresholds {
            char_min: self.char_min,
            word_min: self.word_min,
            si_min_count: self.si_min_count,
            si_min_score: parse_score(&self.si_min_score)?,
            count_mode: self.count_mode,
            ..Thresholds::default()
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Classifier
    #[arg(long, default_value = "rbf-svm")]
    pub model: ModelKind,
    /// SVM regularization
    #[arg(long, default_value_t = 1.0)]
    pub c: Float,
    /// RBF width, or `auto` for 1/dimension
    #[arg(long, default_value = "auto")]
    pub gamma: Gamma<Float>,
    /// Trees in the random forest
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Depth limit for forest trees
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Linear SVM epoch budget
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    /// Seed for folds, bootstrap samples and SGD order
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

impl ModelArgs {
    fn config(&self, kind: ModelKind) -> ModelConfig {
        let mut c = ModelConfig::new(kind);
        c.c = self.c;
        c.gamma = self.gamma;
        c.trees = self.trees;
        c.max_depth = self.max_depth;
        c.epochs = self.epochs;
        c.seed = self.seed;
        c
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
}

#[derive(Debug, Args)]
pub struct LangidArgs {
    /// Tweet text file
    pub text: PathBuf,
    /// Write the annotation here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Feature subset; all four rows when omitted
    #[arg(long, value_enum)]
    pub features: Option<FeatureSet>,
    /// Run every classifier, not just --model
    #[arg(long)]
    pub all_models: bool,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Plain shuffled folds instead of stratified ones
    #[arg(long)]
    pub no_stratify: bool,
    /// Directory for report files
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub feature: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub stopwords: StopwordArgs,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Directory to write the model into
    #[arg(long)]
    pub model_dir: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub features: FeatureSet,
    #[command(flatten)]
    pub feature: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub stopwords: StopwordArgs,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Directory written by `train`
    #[arg(long)]
    pub model_dir: PathBuf,
    /// Tweet text file
    pub text: PathBuf,
    /// Language annotation for the tweets (tagged automatically if absent)
    #[arg(long)]
    pub lang: Option<PathBuf>,
    /// Write labels here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub stopwords: StopwordArgs,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    pub first: PathBuf,
    pub second: PathBuf,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Langid(a) => cmd_langid(&a, out),
        Command::Crossval(a) => cmd_crossval(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Kappa(a) => cmd_kappa(&a, out),
    }
}

fn echo_config(command: &str, body: &str) {
    eprint!("# {command}\n{body}");
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn load(args: &CorpusArgs, paths: &CorpusPaths) -> Result<Corpus> {
    Ok(corpus::load_corpus_checked(
        &paths.text,
        paths.lang.as_deref(),
        paths.stance.as_deref(),
        args.check_tokens.into(),
    )?)
}

/// Tags tweets that carry no language annotation.
fn ensure_tagged(corpus: Corpus, lexicons: &LexiconArgs) -> Result<Corpus> {
    if corpus.tweets().iter().all(|t| !t.tokens.is_empty()) {
        return Ok(corpus);
    }
    let lex = lexicons.load()?;
    let tagger = Tagger::new(&lex, lexicons.hashtag_policy)?;
    let provenance = corpus.provenance().to_vec();
    let tweets = corpus
        .into_tweets()
        .into_iter()
        .map(|mut t| {
            if t.tokens.is_empty() {
                t.tokens = tagger.tag(&tokenize(&t.raw_text));
            }
            t
        })
        .collect();
    Ok(Corpus::with_provenance(tweets, provenance)?)
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let paths = args.corpus.resolve()?;
    echo_config("stats", &args.corpus.describe(&paths));
    if paths.lang.is_none() {
        return Err(CliError::Input(
            "stats needs a language annotation file (lang.txt or --lang)".into(),
        ));
    }
    if paths.stance.is_none() {
        return Err(CliError::Input(
            "stats needs a stance file (stance.txt or --stance)".into(),
        ));
    }
    let corpus = load(&args.corpus, &paths)?;
    let stats = corpus_stats(&corpus)?;
    writeln!(out, "{stats}\n")?;
    write!(out, "{}", stats.key_values())?;
    Ok(())
}

pub fn cmd_langid(args: &LangidArgs, out: &mut dyn Write) -> Result<()> {
    echo_config(
        "langid",
        &format!("text={}\n{}", args.text.display(), args.lexicons.describe()),
    );
    let lex = args.lexicons.load()?;
    let tagger = Tagger::new(&lex, args.lexicons.hashtag_policy)?;
    let records = parse_text_file(&args.text)?;
    let mut counts = [0usize; 3];
    let mut tweets = Vec::with_capacity(records.len());
    for (id, text) in records {
        let mut t = Tweet::new(id, text);
        t.tokens = tagger.tag(&tokenize(&t.raw_text));
        for tok in &t.tokens {
            counts[LanguageTag::ALL.iter().position(|g| *g == tok.tag).expect("known tag")] += 1;
        }
        tweets.push(t);
    }
    let annotated = format_lang_records(&Corpus::new(tweets)?)?;
    let summary: String = LanguageTag::ALL
        .iter()
        .zip(counts)
        .map(|(g, c)| format!("{g}={c}\n"))
        .collect();
    match &args.output {
        Some(path) => {
            write_file(path, &annotated)?;
            write!(out, "{summary}")?;
        }
        None => {
            write!(out, "{annotated}")?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn pipeline_config(
    feature: &FeatureArgs,
    model: &ModelArgs,
    set: FeatureSet,
    kind: ModelKind,
) -> Result<PipelineConfig<Float>> {
    let mut p = PipelineConfig::new(model.config(kind));
    p.thresholds = feature.thresholds()?;
    p.families = set.families();
    p.top_k = feature.top_k;
    p.chi_mode = feature.chi_mode;
    p.validate()?;
    Ok(p)
}

pub fn cmd_crossval(args: &CrossvalArgs, out: &mut dyn Write) -> Result<()> {
    let paths = args.corpus.resolve()?;
    let rows: Vec<FeatureSet> = args.features.map_or(FeatureSet::ROWS.to_vec(), |f| vec![f]);
    let kinds: Vec<ModelKind> = if args.all_models {
        ModelKind::ALL.to_vec()
    } else {
        vec![args.model.model]
    };
    let stopwords = args.stopwords.load()?;
    let mut echo = args.corpus.describe(&paths);
    echo.push_str(&args.lexicons.describe());
    let _ = writeln!(echo, "folds={}\nstratified={}", args.folds, !args.no_stratify);
    echo_config("crossval", &echo);

    if paths.stance.is_none() {
        return Err(CliError::Input(
            "cross-validation needs a stance file (stance.txt or --stance)".into(),
        ));
    }
    let corpus = ensure_tagged(load(&args.corpus, &paths)?, &args.lexicons)?;
    let prepared = prepare_corpus(&corpus, &stopwords);
    let hash = stopwords.hash();
    if let Some(dir) = &args.output {
        fs::create_dir_all(dir)?;
    }

    let mut reports: Vec<EvalReport<Float>> = Vec::new();
    for &kind in &kinds {
        for &set in &rows {
            let config = CrossValConfig {
                pipeline: pipeline_config(&args.feature, &args.model, set, kind)?,
                folds: args.folds,
                stratify: !args.no_stratify,
                seed: args.model.seed,
            };
            let report = cross_validate(&prepared, &config, &hash)?;
            writeln!(
                out,
                "features={} model={} mean_accuracy={:.4}",
                set.name(),
                kind,
                report.mean_accuracy
            )?;
            if let Some(dir) = &args.output {
                write_file(
                    &dir.join(format!("report-{}-{}.txt", set.name(), kind)),
                    &report.to_key_values(),
                )?;
            }
            reports.push(report);
        }
    }
    let grid = format_grid(&reports);
    writeln!(out)?;
    write!(out, "{grid}")?;
    if let Some(dir) = &args.output {
        write_file(&dir.join(GRID_FILE), &grid)?;
    }
    Ok(())
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let paths = args.corpus.resolve()?;
    let stopwords = args.stopwords.load()?;
    let config = pipeline_config(&args.feature, &args.model, args.features, args.model.model)?;
    let mut echo = args.corpus.describe(&paths);
    echo.push_str(&args.lexicons.describe());
    let _ = writeln!(
        echo,
        "model_dir={}\nmodel={}\nfeatures={}",
        args.model_dir.display(),
        config.model.kind,
        config.families
    );
    echo_config("train", &echo);

    if paths.stance.is_none() {
        return Err(CliError::Input(
            "training needs a stance file (stance.txt or --stance)".into(),
        ));
    }
    let corpus = ensure_tagged(load(&args.corpus, &paths)?, &args.lexicons)?;
    let prepared = prepare_corpus(&corpus, &stopwords);
    let fitted = fit_pipeline(&prepared, &config, &stopwords.hash())?;
    fitted.save(&args.model_dir)?;
    write_file(&args.model_dir.join(SELECTION_FILE), &fitted.selection_report())?;

    let correct = prepared.iter().filter(|t| fitted.predict(t).ok() == t.stance).count();
    writeln!(out, "tweets={}", prepared.len())?;
    writeln!(out, "mined_features={}", fitted.mined)?;
    writeln!(out, "selected_features={}", fitted.space.len())?;
    writeln!(out, "training_accuracy={:.4}", correct as f64 / prepared.len() as f64)?;
    writeln!(out, "fingerprint={}", fitted.space.fingerprint())?;
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let mut echo = format!(
        "model_dir={}\ntext={}\nlang={}\n",
        args.model_dir.display(),
        args.text.display(),
        args.lang.as_ref().map_or("-".to_string(), |p| p.display().to_string())
    );
    echo.push_str(&args.lexicons.describe());
    echo_config("predict", &echo);

    let fitted = FittedPipeline::<Float>::load(&args.model_dir)?;
    let stopwords = args.stopwords.load()?;
    fitted.check_stopwords(&stopwords.hash())?;

    let text = parse_text_file(&args.text)?;
    let text_name = args.text.display().to_string();
    let lang_name = args.lang.as_ref().map(|p| p.display().to_string());
    let lang = args.lang.as_deref().map(parse_lang_file).transpose()?;
    let tweets = join_records(
        text,
        &text_name,
        lang.map(|r| (r, lang_name.as_deref().unwrap_or_default())),
        None,
        TokenCheck::Off,
    )?;
    let corpus = ensure_tagged(Corpus::new(tweets)?, &args.lexicons)?;
    let prepared = prepare_corpus(&corpus, &stopwords);

    let mut labelled = Vec::with_capacity(prepared.len());
    for (tweet, p) in corpus.tweets().iter().zip(&prepared) {
        let mut t = tweet.clone();
        t.stance = Some(fitted.predict(p).map_err(classify_error)?);
        labelled.push(t);
    }
    let records = format_stance_records(&Corpus::new(labelled)?)?;
    match &args.output {
        Some(path) => write_file(path, &records)?,
        None => write!(out, "{records}")?,
    }
    Ok(())
}

pub fn cmd_kappa(args: &KappaArgs, out: &mut dyn Write) -> Result<()> {
    echo_config(
        "kappa",
        &format!("first={}\nsecond={}\n", args.first.display(), args.second.display()),
    );
    let a = parse_stance_file(&args.first)?;
    let b = parse_stance_file(&args.second)?;
    let b_by_id: std::collections::HashMap<&str, StanceLabel> = b.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    if a.len() != b.len() || a.iter().any(|(id, _)| !b_by_id.contains_key(id.as_str())) {
        return Err(CliError::Input(format!(
            "{} and {} do not annotate the same tweet ids",
            args.first.display(),
            args.second.display()
        )));
    }
    let first: Vec<StanceLabel> = a.iter().map(|(_, l)| *l).collect();
    let second: Vec<StanceLabel> = a.iter().map(|(id, _)| b_by_id[id.as_str()]).collect();
    let kappa: Float = cohens_kappa(&first, &second)?;
    let m = agreement_matrix(&first, &second)?;
    writeln!(out, "kappa={kappa:.4}")?;
    writeln!(out, "items={}", first.len())?;
    write!(out, "{:<8}", "")?;
    for l in StanceLabel::ALL {
        write!(out, "{:>8}", l.as_str())?;
    }
    writeln!(out)?;
    for l in StanceLabel::ALL {
        write!(out, "{:<8}", l.as_str())?;
        for c in m[l.index()] {
            write!(out, "{c:>8}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
