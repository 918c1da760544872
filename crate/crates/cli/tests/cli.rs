use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scirec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scirec"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn synth_run_judge_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&scirec(
        &[
            "synth", "--out", "fx", "--users", "3", "--items-per-user", "20", "--documents", "80", "--concepts", "40",
            "--background", "200",
        ],
        dir,
    ));
    let validated = ok(&scirec(&["validate", "--config", "fx/scirec.toml"], dir));
    assert!(validated.contains("ok"));

    let out = ok(&scirec(
        &[
            "run",
            "--config",
            "fx/scirec.toml",
            "--strategies",
            "CFIDF-SLIDING_WINDOW-ALL,HCFIDF-EXPONENTIAL-TITLE",
            "--k",
            "3",
            "--out",
            "run",
        ],
        dir,
    ));
    assert!(out.contains("3 users x 2 strategies"), "{out}");
    let recs = fs::read_to_string(dir.join("run/recommendations.jsonl")).unwrap();
    assert_eq!(recs.lines().count(), 3 * 2 * 3);
    assert!(dir.join("run/manifest.json").is_file());

    ok(&scirec(
        &["judge", "--truth", "fx/truth.json", "--recommendations", "run/recommendations.jsonl", "--out", "judgments.csv"],
        dir,
    ));
    let table = ok(&scirec(
        &[
            "evaluate",
            "--recommendations",
            "run/recommendations.jsonl",
            "--judgments",
            "judgments.csv",
            "--k",
            "3",
            "--out",
            "eval",
        ],
        dir,
    ));
    assert!(table.starts_with("strategy,metric,mean,sd,n_users"));
    assert_eq!(fs::read_to_string(dir.join("eval/metrics.csv")).unwrap().lines().count(), 1 + 2 * 5);
}

#[test]
fn bad_strategy_lists_valid_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&scirec(
        &["synth", "--out", "fx", "--users", "1", "--items-per-user", "5", "--documents", "10", "--concepts", "20", "--background", "30"],
        dir,
    ));
    let out = scirec(&["run", "--config", "fx/scirec.toml", "--strategies", "CFIDF-SLIDING-ALL"], dir);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("CFIDF-SLIDING-ALL") && err.contains("LDA-EXPONENTIAL-TITLE"), "{err}");
}

#[test]
fn train_lda_writes_both_models() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&scirec(
        &["synth", "--out", "fx", "--users", "1", "--items-per-user", "5", "--documents", "40", "--concepts", "20", "--background", "30"],
        dir,
    ));
    let out = ok(&scirec(
        &["train-lda", "--config", "fx/scirec.toml", "--topics", "3", "--iterations", "5", "--min-df", "2", "--out", "models"],
        dir,
    ));
    assert!(out.contains("ALL: 3 topics") && out.contains("TITLE: 3 topics"), "{out}");
    assert!(dir.join("models/lda_all.json").is_file());
    assert!(dir.join("models/lda_title.json").is_file());
}
