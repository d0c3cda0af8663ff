use std::path::Path;
use std::process::{Command, Output};

fn inccount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inccount"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

#[test]
fn generate_star() {
    let o = inccount(&["generate", "--family", "star", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{\"n\":4,\"leader\":0,\"edges\":[[0,1],[0,2],[0,3]]}\n");
}

#[test]
fn generate_path_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let o = inccount(&[
        "generate",
        "--family",
        "path",
        "--n",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "{\"n\":3,\"leader\":0,\"edges\":[[0,1],[1,2]]}\n"
    );
}

#[test]
fn generate_is_deterministic() {
    let args = [
        "generate", "--family", "tree", "--n", "5", "--delta", "2", "--seed", "7",
    ];
    let a = inccount(&args);
    let b = inccount(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let value: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(value["edges"].as_array().unwrap().len(), 4);
}

#[test]
fn generate_rejects_infeasible_degree_bound() {
    let o = inccount(&["generate", "--family", "tree", "--delta", "1", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("infeasible degree bound"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two_without_output() {
    for args in [
        vec!["generate", "--family", "star"],
        vec!["run", "--family", "path", "--n", "4", "--bogus"],
        vec!["run", "--family", "cube", "--n", "4"],
        vec!["run", "--family", "gnp", "--n", "6", "--p", "0.3", "--T", "inf"],
        vec!["sweep"],
    ] {
        let o = inccount(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn run_two_node_path() {
    // verification at k = 2 is 1 + ceil(2 / (1 - 2^-1.01)) = 5 rounds
    let o = inccount(&["run", "--family", "path", "--n", "2", "--delta", "1", "--T", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "estimate"), "2");
    assert_eq!(field(&text, "rounds_collection"), "2");
    assert_eq!(field(&text, "rounds_verification"), "5");
    assert_eq!(field(&text, "rounds_notification"), "2");
    assert_eq!(field(&text, "rounds_total"), "9");
    assert!(text.contains("outside the proven regime"));
}

#[test]
fn run_five_node_path() {
    let o = inccount(&["run", "--family", "path", "--n", "5", "--delta", "2", "--T", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "estimate"), "5");
    assert_eq!(field(&stdout(&o), "rounds_total"), "188");
}

#[test]
fn run_gnp_enables_tolerance() {
    let o = inccount(&[
        "run", "--family", "gnp", "--n", "10", "--p", "0.3", "--T", "10", "--seed", "1", "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec["estimate"], 10);
    assert_eq!(rec["config"]["disconnection_tolerant"], true);
    assert_eq!(rec["schedule"]["p"], 0.3);
}

#[test]
fn run_round_limit_prints_partial_record() {
    let o = inccount(&[
        "run",
        "--family",
        "path",
        "--n",
        "6",
        "--delta",
        "2",
        "--max-rounds",
        "40",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert_eq!(field(&text, "status"), "round_limit");
    assert_eq!(field(&text, "estimate"), "none");
    assert_eq!(field(&text, "rounds_total"), "40");
}

#[test]
fn run_with_trace_and_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let o = inccount(&[
        "run",
        "--family",
        "tree",
        "--n",
        "8",
        "--delta",
        "3",
        "--T",
        "5",
        "--seed",
        "3",
        "--check-invariants",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains(" 0 violations"), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.len() > 1);
    assert_eq!(lines[0]["round"], 1);
    assert_eq!(lines[1]["round"], 6);
    assert_eq!(lines[0]["topology"]["n"], 8);
}

fn write_spec(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const TINY: &str = r#"{"families":["path"],"n_range":[6,6],"delta_rule":{"values":[2]},
    "T":["inf"],"repetitions":2,"master_seed":3}"#;

const WIDER: &str = r#"{"families":["random-tree","gnp","star"],"n_range":[3,8],"delta_rule":"powers_of_two",
    "T":[1,4,"inf"],"gnp_T":[2],"p":[0.3],"repetitions":3,"master_seed":9}"#;

#[test]
fn sweep_tiny_spec_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), TINY);
    let o = inccount(&["sweep", "--spec", &spec]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("family,n,delta,T,p,mode,c,seed,rep,estimate,rounds_total"));
    assert!(lines[1].starts_with("path,6,2,inf,,experimental,1.01,"));
}

#[test]
fn sweep_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), WIDER);
    let one = dir.path().join("one.csv");
    let four = dir.path().join("four.csv");
    let json = dir.path().join("four.json");
    let a = inccount(&[
        "sweep",
        "--spec",
        &spec,
        "--workers",
        "1",
        "--out-csv",
        one.to_str().unwrap(),
    ]);
    let b = inccount(&[
        "sweep",
        "--spec",
        &spec,
        "--workers",
        "4",
        "--out-csv",
        four.to_str().unwrap(),
        "--out-json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert!(a.stdout.is_empty());
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&four).unwrap());

    let o = inccount(&["check-bound", "--input", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("index,family,n,delta,T,p,rounds_mean,bound,within\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn sweep_rejects_static_gnp() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"{"families":["gnp"],"n_range":[5,5],"delta_rule":"max","T":["inf"],"p":[0.3],
            "repetitions":1,"master_seed":0}"#,
    );
    let o = inccount(&["sweep", "--spec", &spec]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn sweep_rejects_malformed_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "{\"families\": 3}");
    let o = inccount(&["sweep", "--spec", &spec]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_tables_passes() {
    let o = inccount(&["check-tables", "--n-max", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("recurrence: 1,1,2,4,9,20,48,115\n"));
    assert!(text.contains("enumerated: 1,1,2,4,9,20,48,115\n"));
    assert!(text.ends_with("PASS\n"));

    let o = inccount(&["check-tables", "--n-max", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("PASS\n"));
}

#[test]
fn check_tables_reports_corruption() {
    let o = inccount(&["check-tables", "--n-max", "8", "--corrupt-index", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL: first mismatch at size 5"), "{}", stdout(&o));
}
