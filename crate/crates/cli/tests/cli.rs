use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn isect(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_isect"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

const PAIR: &str = r#"{
  "coordinates": [
    {"name": "x1", "values": [0, 1], "probs": "uniform"},
    {"name": "x2", "values": [0, 1], "probs": "uniform"}
  ],
  "events": [
    {"name": "A1", "predicate": "x[1] == 1"},
    {"name": "A2", "predicate": "x[1] == 1 and x[2] == 1"}
  ]
}"#;

const INDEPENDENT: &str = r#"{
  "coordinates": [
    {"name": "x1", "values": [0, 1], "probs": ["1/2", "1/2"]},
    {"name": "x2", "values": [0, 1], "probs": ["3/4", "1/4"]}
  ],
  "events": [
    {"name": "A1", "vars": [1], "tuples": [[1]]},
    {"name": "A2", "vars": [2], "tuples": [[1]]}
  ]
}"#;

const SINGLE: &str = r#"{
  "coordinates": [{"name": "x1", "values": [0, 1], "probs": ["3/4", "1/4"]}],
  "events": [{"name": "A1", "predicate": "x[1] == 1"}]
}"#;

const EMPTY: &str =
    r#"{"coordinates": [{"name": "x1", "values": [0, 1], "probs": "uniform"}], "events": []}"#;

fn star() -> String {
    let coords: Vec<String> = (1..=10)
        .map(|j| format!(r#"{{"name": "x{j}", "values": [0, 1], "probs": "uniform"}}"#))
        .collect();
    let mut events = vec![
        r#"{"name": "hub", "predicate": "x[1] + x[2] + x[3] + x[4] + x[5] == 5"}"#.to_string(),
    ];
    for i in 1..=5 {
        events.push(format!(
            r#"{{"name": "leaf{i}", "predicate": "x[{i}] + x[{}] == 2"}}"#,
            i + 5
        ));
    }
    format!(
        r#"{{"coordinates": [{}], "events": [{}]}}"#,
        coords.join(","),
        events.join(",")
    )
}

#[test]
fn estimate_without_events_is_one() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "empty.json", EMPTY);
    let run = isect(&["estimate", arg(&path), "--format", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v = json(&run);
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["guarantee"], "certified-by-assumption");
}

#[test]
fn estimate_reports_violated_conditions() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "pair.json", PAIR);
    let run = isect(&[
        "estimate",
        arg(&path),
        "--format",
        "json",
        "--epsilon",
        "0.001",
    ]);
    assert_eq!(run.code, 2);
    let v = json(&run);
    assert_eq!(v["guarantee"], "conditions-violated");
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    for key in ["log_value", "epsilon", "K_used", "conditions", "plan"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["plan"]["delta_exact"], "1/30");
    let text = isect(&["estimate", arg(&path)]);
    assert_eq!(text.code, 2);
    assert!(text.stdout.contains("guarantee  conditions-violated"));
}

#[test]
fn exact_fractions() {
    let dir = TempDir::new().unwrap();
    let run = isect(&["exact", arg(&write(&dir, "ind.json", INDEPENDENT))]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout.lines().next(), Some("3/8"));
    let run = isect(&[
        "exact",
        arg(&write(&dir, "pair.json", PAIR)),
        "--format",
        "json",
    ]);
    assert_eq!(json(&run)["probability"], "1/2");
}

#[test]
fn exact_over_budget_names_the_component() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "star.json", &star());
    let run = isect(&["exact", arg(&path), "--budget", "100"]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("[0, 1, 2, 3, 4, 5]"), "{}", run.stderr);
    let run = isect(&["estimate", arg(&path), "--budget", "10"]);
    assert_eq!(run.code, 3);
}

#[test]
fn check_star_and_empty() {
    let dir = TempDir::new().unwrap();
    let run = isect(&[
        "check",
        arg(&write(&dir, "star.json", &star())),
        "--format",
        "json",
    ]);
    assert_eq!(run.code, 0);
    let v = json(&run);
    let small = &v["smallness"];
    assert_eq!(small["max_degree"], 5);
    assert_eq!(small["events"][0]["mu"], 5);
    assert_eq!(
        small["events"][0]["threshold"],
        format!("1/{}", 15u128.pow(15))
    );
    assert_eq!(small["events"][1]["degree"], 1);
    assert_eq!(
        small["events"][1]["threshold"],
        format!("1/{}", 15u128.pow(6))
    );
    assert!(v["lll"]["lower_bound"].is_string());

    let run = isect(&[
        "check",
        arg(&write(&dir, "empty.json", EMPTY)),
        "--format",
        "json",
    ]);
    let v = json(&run);
    assert_eq!(v["smallness"]["max_degree"], 5);
    assert_eq!(v["smallness"]["passes"], true);

    let run = isect(&["check", arg(&write(&dir, "single.json", SINGLE))]);
    assert!(run.stdout.contains("Delta = 5"));
    assert!(run.stdout.contains("1/3375"));
}

#[test]
fn roots_examples() {
    let dir = TempDir::new().unwrap();
    let single = r#"{
      "coordinates": [{"name": "x1", "values": [0, 1, 2, 3], "probs": "uniform"}],
      "events": [{"name": "A1", "predicate": "x[1] == 3"}]
    }"#;
    let v = json(&isect(&[
        "roots",
        arg(&write(&dir, "s.json", single)),
        "--format",
        "json",
    ]));
    assert!((v["roots"][0][0].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!((v["min_dist"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(v["zero_free"], true);
    let v = json(&isect(&[
        "roots",
        arg(&write(&dir, "p.json", PAIR)),
        "--format",
        "json",
    ]));
    assert_eq!(v["roots"].as_array().unwrap().len(), 2);
    assert!((v["min_dist"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-12);
}

#[test]
fn roots_batch_summary() {
    let dir = TempDir::new().unwrap();
    let archive = dir.path().join("archive");
    let run = isect(&[
        "roots",
        "--random",
        "25",
        "--seed",
        "9",
        "--format",
        "json",
        "--archive",
        arg(&archive),
    ]);
    assert_eq!(run.code, 0, "{}", run.stdout);
    let v = json(&run);
    assert_eq!(v["instances"], 25);
    assert_eq!(v["zero_free"], 25);
    assert!(!archive.exists());
}

#[test]
fn count_integer_points_examples() {
    let dir = TempDir::new().unwrap();
    let none = write(&dir, "none.txt", "# nothing\n");
    let v = json(&isect(&[
        "count-integer-points",
        arg(&none),
        "--cube-side",
        "2",
        "--dim",
        "3",
        "--format",
        "json",
    ]));
    assert_eq!(v["exact"], "27");
    assert_eq!(v["estimate"], 27.0);
    let square = write(&dir, "square.txt", "x[1] + x[2] <= 3\n");
    let run = isect(&[
        "count-integer-points",
        arg(&square),
        "--cube-side",
        "2",
        "--dim",
        "2",
        "--format",
        "json",
    ]);
    let v = json(&run);
    assert_eq!(v["exact"], "8");
    assert_eq!(run.code, 2);
    let text = isect(&[
        "count-integer-points",
        arg(&square),
        "--cube-side",
        "2",
        "--dim",
        "2",
    ]);
    assert!(text.stdout.contains("exact |S| = 8"));
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &PAIR.replace("x[1] == 1\"", "x[1] ==\""));
    let run = isect(&["estimate", arg(&bad)]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("column"), "{}", run.stderr);
    assert_eq!(
        isect(&["estimate", arg(&dir.path().join("missing.json"))]).code,
        1
    );
    let certain = write(
        &dir,
        "certain.json",
        &SINGLE.replace("x[1] == 1", "x[1] >= 0"),
    );
    assert_eq!(isect(&["estimate", arg(&certain)]).code, 5);
    let run = isect(&[
        "estimate",
        arg(&write(&dir, "s.json", SINGLE)),
        "--epsilon",
        "2",
    ]);
    assert_eq!(run.code, 1);
}

#[test]
fn generated_instance_agrees_with_exact() {
    let dir = TempDir::new().unwrap();
    for seed in ["1", "2", "3"] {
        let run = isect(&["generate", "--kind", "small", "--seed", seed]);
        let path = write(&dir, &format!("g{seed}.json"), &run.stdout);
        let est = json(&isect(&[
            "estimate",
            arg(&path),
            "--epsilon",
            "0.0001",
            "--format",
            "json",
        ]));
        let exact = json(&isect(&["exact", arg(&path), "--format", "json"]));
        let (e, x) = (
            est["value"].as_f64().unwrap(),
            exact["value"].as_f64().unwrap(),
        );
        assert!((e - x).abs() <= 1e-4 * x);
        assert_eq!(est["guarantee"], "certified-by-assumption");
    }
}

#[test]
fn output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = isect(&["generate", "--kind", "moderate", "--seed", "42"]).stdout;
    let b = isect(&["generate", "--kind", "moderate", "--seed", "42"]).stdout;
    assert_eq!(a, b);
    let path = write(&dir, "m.json", &a);
    let r1 = isect(&["estimate", arg(&path), "--format", "json"]).stdout;
    let r2 = isect(&["estimate", arg(&path), "--format", "json"]).stdout;
    assert_eq!(r1, r2);
}

#[test]
fn shipped_plan_loads() {
    let run = isect(&["plan", "--shipped"]);
    assert_eq!(run.code, 0);
    let v = json(&run);
    assert_eq!(v["delta_exact"], "1/30");
    assert_eq!(v["map"], "disk");
}

#[test]
fn precision_flag() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "s.json", SINGLE);
    let d = json(&isect(&[
        "estimate",
        arg(&path),
        "--precision",
        "double",
        "--format",
        "json",
    ]));
    let x = json(&isect(&[
        "estimate",
        arg(&path),
        "--precision",
        "extended",
        "--format",
        "json",
    ]));
    assert_eq!(d["precision"], "double");
    assert_eq!(x["precision"], "extended");
    let (d, x) = (
        d["log_value"].as_f64().unwrap(),
        x["log_value"].as_f64().unwrap(),
    );
    assert!((d - x).abs() < 1e-9);
    assert!((x - 0.75f64.ln()).abs() < 0.01);
}
