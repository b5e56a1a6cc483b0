//! End-to-end checks of the command-line interface: exit-code taxonomy and
//! the lexicon → extraction → training pipeline on a tiny corpus.

use std::fs;
use std::process::Command;

fn shine() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shine"))
}

#[test]
fn usage_errors_exit_1() {
    let out = shine().arg("train").output().unwrap(); // missing required flags
    assert_eq!(out.status.code(), Some(1));
    let out = shine().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = shine()
        .args(["--threads", "0", "gen-synth", "--out-dir", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a\tb\t+1\nc\tc\t-1\n").unwrap(); // self-loop on line 2
    let out = shine()
        .args(["train", "--sentiment", bad.to_str().unwrap(), "--out"])
        .arg(dir.path().join("m.bin"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("self-loop"), "stderr: {stderr}");
    assert!(stderr.contains(":2:"), "stderr: {stderr}");
}

#[test]
fn help_exits_0() {
    let out = shine().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["gen-synth", "train", "predict", "recommend", "evaluate", "build-lexicon"] {
        assert!(text.contains(cmd), "--help does not mention {cmd}");
    }
}

#[test]
fn sentiment_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    // users alice/bob each mention "acme"; dependency chains put the opinion
    // word adjacent to the mention. The extra tweets keep the emoticons at
    // the lexicon extremes so "good" and "bad" score strictly inside (−1, 1);
    // a word at exactly ±1 maps to the circle's x-axis and contributes no
    // sentiment.
    fs::write(
        &corpus,
        concat!(
            r#"{"id":"t1","user":"alice","tokens":["good","acme",":)"],"mentions":[[1,"acme"]],"deps":[[0,1]]}"#, "\n",
            r#"{"id":"t2","user":"alice","tokens":["good","day",":)"],"mentions":[],"deps":[[0,1]]}"#, "\n",
            r#"{"id":"t3","user":"bob","tokens":["bad","acme",":("],"mentions":[[1,"acme"]],"deps":[[0,1]]}"#, "\n",
            r#"{"id":"t4","user":"carol","tokens":["horrid","thing",":("],"mentions":[],"deps":[[0,1]]}"#, "\n",
            r#"{"id":"t5","user":"carol","tokens":["horrid","stuff",":("],"mentions":[],"deps":[[0,1]]}"#, "\n",
            r#"{"id":"t6","user":"dave","tokens":["great","fun",":)"],"mentions":[],"deps":[[0,1]]}"#, "\n",
            r#"{"id":"t7","user":"dave","tokens":["great","times",":)"],"mentions":[],"deps":[[0,1]]}"#, "\n",
        ),
    )
    .unwrap();
    let emoticons = dir.path().join("emoticons.tsv");
    fs::write(&emoticons, ":)\tpos\n:(\tneg\n").unwrap();

    let lexicon = dir.path().join("lexicon.tsv");
    let out = shine()
        .args(["build-lexicon", "--corpus", corpus.to_str().unwrap()])
        .args(["--emoticons", emoticons.to_str().unwrap()])
        .args(["--out", lexicon.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let edges = dir.path().join("edges.tsv");
    let out = shine()
        .args(["extract-sentiment", "--corpus", corpus.to_str().unwrap()])
        .args(["--lexicon", lexicon.to_str().unwrap()])
        .args(["--threshold", "0.1", "--out", edges.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&edges).unwrap();
    assert!(text.contains("alice\tacme\t+1"), "edges: {text}");
    assert!(text.contains("bob\tacme\t-1"), "edges: {text}");

    // the emitted edges are a valid sentiment network for training
    let model = dir.path().join("m.bin");
    let out = shine()
        .args(["train", "--sentiment", edges.to_str().unwrap()])
        .args(["--hidden-dim", "4", "--embedding-dim", "2", "--max-epochs", "2"])
        .args(["--out", model.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(model.exists());
    assert!(dir.path().join("m.bin.losses.tsv").exists());
    assert!(dir.path().join("m.bin.nodes.tsv").exists());
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("\"command\":\"train\""), "summary: {summary}");
    assert!(summary.contains("\"seed\""), "summary: {summary}");
}

#[test]
fn predict_rejects_mismatched_node_table() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = dir.path().join("s1.tsv");
    let s2 = dir.path().join("s2.tsv");
    fs::write(&s1, "a\tb\t+1\nb\tc\t-1\n").unwrap();
    fs::write(&s2, "x\ty\t+1\ny\tz\t-1\n").unwrap();
    let model = dir.path().join("m.bin");
    let out = shine()
        .args(["train", "--sentiment", s1.to_str().unwrap()])
        .args(["--hidden-dim", "4", "--embedding-dim", "2", "--max-epochs", "1"])
        .args(["--out", model.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let pairs = dir.path().join("pairs.tsv");
    fs::write(&pairs, "x\ty\n").unwrap();
    let out = shine()
        .args(["predict", "--model", model.to_str().unwrap()])
        .args(["--sentiment", s2.to_str().unwrap()])
        .args(["--pairs", pairs.to_str().unwrap()])
        .args(["--out"])
        .arg(dir.path().join("pred.tsv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("node table"), "stderr: {stderr}");
}
