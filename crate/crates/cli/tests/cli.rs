use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pokerlm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pokerlm")).args(args).output().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn parse_empty_directory_yields_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    let out = dir.path().join("hands.jsonl");
    let o = pokerlm(&["parse", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("0 hands, 0 diagnostics"), "{}", stdout(&o));
    assert_eq!(std::fs::read_to_string(out).unwrap(), "");
}

#[test]
fn parse_single_hand_and_analyze_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hands.jsonl");
    let fig4 = fixtures().join("showdown_two_pair.txt");
    let o = pokerlm(&["parse", s(&fig4), "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1);

    let report = dir.path().join("stats.json");
    let o = pokerlm(&["analyze", "--hands", s(&out), "--min-hands", "1", "--out", s(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("phalves77"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(json.to_string().contains("gefahrensucher"));
}

#[test]
fn effective_config_goes_to_stderr() {
    let o = pokerlm(&["simulate", "--players", "2", "--hands", "20", "--seed", "5", "--policy", "call"]);
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("# effective config: {"), "{err}");
    assert!(err.contains("\"seed\":5"));
}

#[test]
fn too_many_players_is_a_usage_error() {
    let o = pokerlm(&["simulate", "--players", "16", "--hands", "10", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(pokerlm(&["parse", "--bogus"]).status.code(), Some(2));
}

#[test]
fn simulate_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = pokerlm(&["simulate", "--players", "3", "--hands", "50", "--seed", "99", "--policy", "random", "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
        for p in v["match"]["policies"].as_array_mut().unwrap() {
            p.as_object_mut().unwrap().retain(|k, _| !k.starts_with("mean_response") && !k.starts_with("response_"));
        }
        v
    };
    assert_eq!(run("a.json"), run("b.json"));
}

fn write(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, lines.join("\n") + "\n").unwrap();
    p
}

#[test]
fn evaluate_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let lines = [
        r#"{"label_action":"check","label_amount":0}"#,
        r#"{"label_action":"call","label_amount":0}"#,
        r#"{"label_action":"fold","label_amount":0}"#,
        r#"{"label_action":"bet","label_amount":0.3}"#,
        r#"{"response":"You should raise to 0.5."}"#,
    ];
    let p = write(dir.path(), "p.jsonl", &lines);
    let out = dir.path().join("report.json");
    let o = pokerlm(&["evaluate", "--predictions", s(&p), "--truth", s(&p), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["macro_f1"], 1.0);
    assert_eq!(v["amount_mse_bb"], 0.0);
    assert_eq!(v["amount_pairs"], 2);
}

#[test]
fn evaluate_rejects_length_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.jsonl", &[r#"{"label_action":"check"}"#]);
    let t = write(dir.path(), "t.jsonl", &[r#"{"label_action":"check"}"#, r#"{"label_action":"fold"}"#]);
    let o = pokerlm(&["evaluate", "--predictions", s(&p), "--truth", s(&t)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1 predictions for 2 truth"));
}

#[test]
fn raw_dataset_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus");
    let build = |name: &str| {
        let out = dir.path().join(name);
        let o = pokerlm(&["build-dataset", "--raw", "--seed", "3", "--hands", s(&corpus), "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (build("a"), build("b"));
    for f in ["sft_train.jsonl", "sft_test.jsonl", "reward.jsonl", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn empty_band_fails() {
    let dir = tempfile::tempdir().unwrap();
    let fig4 = fixtures().join("showdown_two_pair.txt");
    let out = dir.path().join("ds");
    let o = pokerlm(&["build-dataset", "--min-winrate", "1e9", "--hands", s(&fig4), "--out", s(&out), "--min-hands", "1"]);
    assert!(!o.status.success());
}

/// 4776 labelled decisions with the class counts of a 1000-game test set and
/// a hand-made confusion matrix; macro-F1 is recomputed here from the matrix.
#[test]
fn evaluate_class_count_fixture_matches_oracle() {
    let names = ["check", "call", "fold", "bet", "raise"];
    let matrix: [[usize; 5]; 5] = [
        [1200, 150, 180, 40, 6],
        [100, 1700, 250, 50, 30],
        [20, 60, 450, 20, 8],
        [30, 20, 40, 220, 19],
        [5, 30, 25, 23, 100],
    ];
    let row_sums: Vec<usize> = matrix.iter().map(|r| r.iter().sum()).collect();
    assert_eq!(row_sums, vec![1576, 2130, 558, 329, 183]);

    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for (t, row) in matrix.iter().enumerate() {
        for (p, n) in row.iter().enumerate() {
            for _ in 0..*n {
                truth.push(format!(r#"{{"label_action":"{}"}}"#, names[t]));
                pred.push(format!(r#"{{"label_action":"{}"}}"#, names[p]));
            }
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let pp = dir.path().join("pred.jsonl");
    let tp = dir.path().join("truth.jsonl");
    std::fs::write(&pp, pred.join("\n")).unwrap();
    std::fs::write(&tp, truth.join("\n")).unwrap();
    let out = dir.path().join("report.json");
    let o = pokerlm(&["evaluate", "--predictions", s(&pp), "--truth", s(&tp), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();

    let mut f1_sum = 0.0;
    for k in 0..5 {
        let tp = matrix[k][k] as f64;
        let precision = tp / (0..5).map(|r| matrix[r][k]).sum::<usize>() as f64;
        let recall = tp / row_sums[k] as f64;
        f1_sum += 2.0 * precision * recall / (precision + recall);
    }
    let oracle = f1_sum / 5.0;
    assert!((v["macro_f1"].as_f64().unwrap() - oracle).abs() < 1e-12, "{} vs {oracle}", v["macro_f1"]);
    assert_eq!(v["samples"], 4776);
    assert_eq!(v["confusion"], serde_json::json!(matrix));
}
