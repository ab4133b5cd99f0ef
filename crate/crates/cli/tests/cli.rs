use std::path::Path;
use std::process::{Command, Output};

fn rigidity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidity")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

#[test]
fn seq_prints_report() {
    let o = rigidity(&["seq", "--sequence", r#"{"kind":"powers","base":3}"#, "--horizon", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    let rows = &r["entries"]["01-growth"]["tables"]["terms"]["rows"];
    assert_eq!(rows[4], serde_json::json!(["5", "243"]));
}

#[test]
fn obstruct_finds_shifted_powers_form() {
    let o = rigidity(&["obstruct", "--sequence", r#"{"kind":"shifted","base":{"kind":"powers","base":2},"offset":1}"#]);
    assert!(o.status.success());
    let r = stdout_json(&o);
    let w = &r["entries"]["01-obstruct"]["result"]["linear_form"];
    assert_eq!(w["d"], "1");
}

#[test]
fn exit_codes() {
    assert_eq!(rigidity(&["run"]).status.code(), Some(1));
    assert_eq!(rigidity(&["rankone", "--tower", "not json"]).status.code(), Some(1));
    assert_eq!(rigidity(&["seq", "--format", "svg"]).status.code(), Some(1));
    assert_eq!(rigidity(&["--help"]).status.code(), Some(0));
    // config error from the library
    assert_eq!(rigidity(&["seq", "--horizon", "0", "--sequence", r#"{"kind":"factorial"}"#]).status.code(), Some(1));
    // infeasible construction is a budget/resource failure
    let o = rigidity(&[
        "rankone",
        "--sequence",
        r#"{"kind":"powers","base":2}"#,
        "--tower",
        r#"{"preset":"infrankone","stages":5}"#,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "metadata.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn run_is_deterministic_in_every_format() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "sequence": {"kind": "powers", "base": 2},
            "budgets": {"horizon": 10},
            "seed": 7,
            "analyses": [
                {"analysis": "obstruct", "weyl_samples": 8},
                {"analysis": "measure", "measure": {"kind": "atomic", "atoms": [{"angle": "1/4", "mass": "1"}]}},
                {"analysis": "rotation", "alpha": "golden", "convergents": 20, "syndetic_eps": "1/3"}
            ]
        }"#,
    )
    .unwrap();
    for format in ["json", "csv", "plot-csv"] {
        let a = tmp.path().join(format!("{format}-a"));
        let b = tmp.path().join(format!("{format}-b"));
        for d in [&a, &b] {
            let o =
                rigidity(&["run", "--config", cfg.to_str().unwrap(), "--format", format, "--out", d.to_str().unwrap()]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            assert!(d.join("metadata.json").exists());
        }
        let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "format {format}");
    }
    assert!(tmp.path().join("plot-csv-a/02-measure.gaps.plot.csv").exists());
}

#[test]
fn csv_without_out_is_a_config_error() {
    let o = rigidity(&["seq", "--sequence", r#"{"kind":"factorial"}"#, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
}
