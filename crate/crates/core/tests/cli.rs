use std::process::Command;

use extremal_walks::experiments::output::{read_csv, read_json, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_extremal-walks"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn csv_output_has_header_and_parses() {
    let (code, out, _) = run(&[
        "estimate-p",
        "--n",
        "2",
        "--alpha",
        "5,20",
        "--trials",
        "2000",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), CSV_HEADER);
    let rows = read_csv(out.as_bytes()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].estimate > rows[1].estimate);
    assert!(rows
        .iter()
        .all(|r| r.trials == 2000 && r.seed == 3 && r.ci_low <= r.estimate && r.estimate <= r.ci_high));
}

#[test]
fn json_and_csv_carry_the_same_rows() {
    let args = [
        "estimate-discrete",
        "--n",
        "2",
        "--steps",
        "4,16",
        "--trials",
        "1000",
        "--omit-timing",
    ];
    let (_, csv, _) = run(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let (code, json, _) = run(&json_args);
    assert_eq!(code, 0);
    assert_eq!(read_csv(csv.as_bytes()).unwrap(), read_json(json.as_bytes()).unwrap());
}

#[test]
fn output_is_identical_across_worker_counts() {
    let base = [
        "estimate-p",
        "--n",
        "3",
        "--alpha",
        "30",
        "--trials",
        "3000",
        "--seed",
        "11",
        "--omit-timing",
    ];
    let outputs: Vec<String> = ["1", "2", "4"]
        .iter()
        .map(|w| {
            let mut args = base.to_vec();
            args.extend(["--workers", w]);
            run(&args).1
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("extremal-walks-cli-{}.json", std::process::id()));
    let (code, out, _) = run(&[
        "wendel-table",
        "--n",
        "3",
        "--steps",
        "5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let rows = read_json(std::fs::File::open(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[7].estimate, 0.75);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["estimate-p", "--n", "2"]).0, 2);
    assert_eq!(run(&["intermediate", "--n", "2", "--steps", "10", "--j", "10"]).0, 2);
    assert_eq!(run(&["estimate-p", "--n", "2", "--alpha", "-1"]).0, 2);
    assert_eq!(run(&["validate", "--suite", "nonsense"]).0, 2);
    let (code, _, err) = run(&["find-alpha", "--n", "2", "--trials", "300", "--max-probes", "1"]);
    assert_eq!(code, 3);
    assert!(err.contains("incomplete"));
}

#[test]
fn validate_selector_runs_only_that_suite() {
    let (code, out, _) = run(&["validate", "--suite", "closedform", "--seed", "4"]);
    assert_eq!(code, 0, "{out}");
    let checks: Vec<&str> = out.lines().filter(|l| l.contains('/')).collect();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|l| l.contains(" closedform/")), "{out}");
}

#[test]
fn closed_forms_table() {
    let (code, out, _) = run(&["closed-forms", "--alpha", "1,100"]);
    assert_eq!(code, 0);
    let rows = read_csv(out.as_bytes()).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(run(&["closed-forms", "--alpha", "0"]).0, 2);
    assert!((rows[3].estimate - 0.056_561_626_647_454).abs() < 1e-12);
}
