use codemix_stance::classify::{Gamma, ModelKind};
use codemix_stance::corpus::{corpus_stats, load_corpus_dir, write_corpus};
use codemix_stance::evaluate::{cross_validate, CrossValConfig};
use codemix_stance::features::prepare_corpus;
use codemix_stance::langid::{HashtagPolicy, LexiconSet, Tagger};
use codemix_stance::pipeline::{fit_pipeline, FittedPipeline, PipelineConfig};
use codemix_stance::preprocess::{tokenize, StopwordList};
use codemix_stance::{Corpus, ModelConfig, StanceLabel, Tweet};

const FAVOR: [&str; 4] = ["great step", "support karo", "bahut achha kadam", "kala dhan khatam"];
const AGAINST: [&str; 4] = ["bura faisla", "line mein pareshan", "galat policy", "garib log dukhi"];
const NEUTRAL: [&str; 4] = ["news update", "bank aaj band", "kal meeting hai", "report padho"];

fn corpus() -> Corpus {
    let lex = LexiconSet::bundled();
    let tagger = Tagger::new(&lex, HashtagPolicy::Rest).unwrap();
    let mut tweets = Vec::new();
    for i in 0..36 {
        let (phrases, label) = match i % 3 {
            0 => (FAVOR, StanceLabel::Favor),
            1 => (AGAINST, StanceLabel::Against),
            _ => (NEUTRAL, StanceLabel::None),
        };
        let text = format!("{} #notebandi modi {}", phrases[i % 4], phrases[(i / 3) % 4]);
        let mut t = Tweet::new(format!("{}", 1000 + i), text);
        t.tokens = tagger.tag(&tokenize(&t.raw_text));
        t.stance = Some(label);
        tweets.push(t);
    }
    Corpus::new(tweets).unwrap()
}

fn pipeline(kind: ModelKind) -> PipelineConfig<f64> {
    let mut model = ModelConfig::new(kind);
    model.c = 10.0;
    model.gamma = Gamma::Value(0.05);
    let mut p = PipelineConfig::new(model);
    p.thresholds.char_min = 3;
    p.thresholds.word_min = 2;
    p.thresholds.si_min_count = 2;
    p.top_k = 150;
    p
}

#[test]
fn corpus_survives_a_disk_round_trip() {
    let c = corpus();
    let dir = tempfile::tempdir().unwrap();
    write_corpus(&c, dir.path()).unwrap();
    let back = load_corpus_dir(dir.path()).unwrap();
    assert_eq!(back.tweets(), c.tweets());
    let stats = corpus_stats(&back).unwrap();
    assert!(stats
        .key_values()
        .starts_with("total=36\nfavor=12\nagainst=12\nnone=12\n"));
}

#[test]
fn learnable_corpus_cross_validates_well_with_every_model() {
    let stop = StopwordList::none();
    let prepared = prepare_corpus(&corpus(), &stop);
    for kind in ModelKind::ALL {
        let cfg = CrossValConfig {
            pipeline: pipeline(kind),
            folds: 4,
            stratify: true,
            seed: 9,
        };
        let report = cross_validate(&prepared, &cfg, &stop.hash()).unwrap();
        assert!(report.mean_accuracy >= 0.9, "{kind}: {}", report.mean_accuracy);
        assert!(report.records.iter().all(|r| r.is_leak_free()));
        assert_eq!(report.confusion.total(), 36);
    }
}

#[test]
fn saved_pipeline_predicts_like_the_fitted_one() {
    let stop = StopwordList::bundled();
    let prepared = prepare_corpus(&corpus(), &stop);
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let fitted = fit_pipeline(&prepared, &pipeline(kind), &stop.hash()).unwrap();
        fitted.save(dir.path()).unwrap();
        let loaded = FittedPipeline::<f64>::load(dir.path()).unwrap();
        loaded.check_stopwords(&stop.hash()).unwrap();
        for t in &prepared {
            assert_eq!(
                loaded.predict(t).unwrap(),
                fitted.predict(t).unwrap(),
                "{kind} on {}",
                t.id
            );
        }
    }
}
