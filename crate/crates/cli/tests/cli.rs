use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn stance() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stance"));
    c.env_remove("STANCE_LEXICON_DIR");
    c
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic50")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_thresholds(c: &mut Command) -> &mut Command {
    c.args([
        "--char-min",
        "3",
        "--word-min",
        "2",
        "--si-min-count",
        "2",
        "--top-k",
        "200",
    ])
}

#[test]
fn stats_echoes_resolved_config() {
    let o = stance().arg("stats").arg(fixture()).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("total=50\n"));
    let err = stderr(&o);
    assert!(err.starts_with("# stats\n"), "{err}");
    assert!(err.contains("check_tokens=off"));
}

#[test]
fn missing_stance_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["text.txt", "lang.txt"] {
        fs::copy(fixture().join(f), dir.path().join(f)).unwrap();
    }
    let o = stance().arg("stats").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("error: "));
}

#[test]
fn exact_token_check_passes_on_fixture() {
    let o = stance()
        .args(["stats", "--check-tokens", "exact"])
        .arg(fixture())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn kappa_of_a_file_with_itself_is_one() {
    let s = fixture().join("stance.txt");
    let o = stance().arg("kappa").arg(&s).arg(&s).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("kappa=1.0000\nitems=50\n"), "{out}");
}

#[test]
fn kappa_rejects_differing_constant_annotations() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "1\nFAVOR\n\n2\nFAVOR\n\n").unwrap();
    fs::write(&b, "1\nNONE\n\n2\nNONE\n\n").unwrap();
    let o = stance().arg("kappa").arg(&a).arg(&b).output().unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error: "));
}

#[test]
fn kappa_rejects_different_ids() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "1\nFAVOR\n\n2\nNONE\n\n").unwrap();
    fs::write(&b, "1\nFAVOR\n\n3\nNONE\n\n").unwrap();
    let o = stance().arg("kappa").arg(&a).arg(&b).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn langid_on_empty_input_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("text.txt");
    fs::write(&text, "").unwrap();
    let o = stance().arg("langid").arg(&text).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "");
}

#[test]
fn langid_tags_a_code_mixed_tweet() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("text.txt");
    let lang = dir.path().join("lang.txt");
    fs::write(&text, "1\nye policy bahut achhi hai #notebandi\n\n").unwrap();
    let o = stance().arg("langid").arg(&text).arg("-o").arg(&lang).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let annotated = fs::read_to_string(&lang).unwrap();
    assert!(annotated.contains("policy\ten\n"), "{annotated}");
    assert!(annotated.contains("hai\thi\n"), "{annotated}");
    assert!(annotated.contains("#notebandi\trest\n"), "{annotated}");
    let summary = stdout(&o);
    assert!(summary.starts_with("en="), "{summary}");
}

#[test]
fn missing_lexicon_dir_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("text.txt");
    fs::write(&text, "1\nhello\n\n").unwrap();
    let o = stance()
        .arg("langid")
        .arg(&text)
        .env("STANCE_LEXICON_DIR", dir.path().join("nope"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn train_then_predict_reproduces_training_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model");
    let o = small_thresholds(stance().arg("train").arg(fixture()).arg("--model-dir").arg(&model))
        .args(["--model", "linear-svm"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = stdout(&o);
    assert!(summary.contains("tweets=50\n"), "{summary}");
    for f in ["feature_space.txt", "model.txt", "selection.tsv"] {
        assert!(model.join(f).exists(), "{f}");
    }

    let run = |out: &Path| {
        let o = stance()
            .arg("predict")
            .arg("--model-dir")
            .arg(&model)
            .arg(fixture().join("text.txt"))
            .arg("--lang")
            .arg(fixture().join("lang.txt"))
            .arg("-o")
            .arg(out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    let first = run(&dir.path().join("a.txt"));
    let second = run(&dir.path().join("b.txt"));
    assert_eq!(first, second);
    assert_eq!(first.matches("\n\n").count(), 50);

    // training accuracy printed by train agrees with the saved model's predictions
    let gold = fs::read_to_string(fixture().join("stance.txt")).unwrap();
    let pairs = |s: &str| -> Vec<(String, String)> {
        s.split("\n\n")
            .filter(|b| !b.trim().is_empty())
            .map(|b| {
                let mut l = b.lines();
                (l.next().unwrap().to_string(), l.next().unwrap().to_string())
            })
            .collect()
    };
    let got = pairs(&first);
    let want = pairs(&gold);
    let correct = got.iter().zip(&want).filter(|(a, b)| a == b).count();
    let reported = format!("training_accuracy={:.4}\n", correct as f64 / 50.0);
    assert!(summary.contains(&reported), "{summary} vs {reported}");
}

#[test]
fn predict_tags_untagged_text() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model");
    let o = small_thresholds(stance().arg("train").arg(fixture()).arg("--model-dir").arg(&model))
        .args(["--model", "random-forest", "--trees", "10"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let o = stance()
        .arg("predict")
        .arg("--model-dir")
        .arg(&model)
        .arg(fixture().join("text.txt"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("\n\n").count(), 50);
}

#[test]
fn predict_rejects_foreign_model_and_stopwords() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (m, k) in [(&a, "200"), (&b, "20")] {
        let o = stance()
            .arg("train")
            .arg(fixture())
            .arg("--model-dir")
            .arg(m)
            .args([
                "--model",
                "linear-svm",
                "--char-min",
                "3",
                "--word-min",
                "2",
                "--si-min-count",
                "2",
                "--top-k",
                k,
            ])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    fs::copy(b.join("model.txt"), a.join("model.txt")).unwrap();
    let predict = |extra: &[&str], model: &Path| {
        stance()
            .arg("predict")
            .arg("--model-dir")
            .arg(model)
            .arg(fixture().join("text.txt"))
            .args(extra)
            .output()
            .unwrap()
    };
    let o = predict(&[], &a);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = predict(&["--no-stopwords"], &b);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn single_class_training_is_a_training_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    let mut st = String::new();
    for i in 0..6 {
        text.push_str(&format!("{i}\nsame words here {i}\n\n"));
        st.push_str(&format!("{i}\nFAVOR\n\n"));
    }
    fs::write(dir.path().join("text.txt"), text).unwrap();
    fs::write(dir.path().join("stance.txt"), st).unwrap();
    let o = stance()
        .arg("train")
        .arg(dir.path())
        .arg("--model-dir")
        .arg(dir.path().join("m"))
        .args([
            "--model",
            "linear-svm",
            "--char-min",
            "1",
            "--word-min",
            "1",
            "--si-min-count",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn crossval_writes_reports_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = small_thresholds(stance().arg("crossval").arg(fixture()))
        .args([
            "--features",
            "word",
            "--model",
            "random-forest",
            "--trees",
            "10",
            "--folds",
            "5",
            "-o",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("features=word model=random-forest mean_accuracy="));
    let report = fs::read_to_string(out.join("report-word-random-forest.txt")).unwrap();
    assert!(report.contains("mean_accuracy="));
    assert!(out.join("grid.txt").exists());
}

#[test]
fn crossval_with_too_many_folds_fails() {
    let o = stance()
        .arg("crossval")
        .arg(fixture())
        .args(["--features", "si", "--model", "linear-svm", "--folds", "51"])
        .output()
        .unwrap();
    assert!(!o.status.success());
}
