use std::process::{Command, Output};

use vrd_cli::CSV_COLUMNS;

fn vrd(args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vrd"))
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

#[test]
fn json_rows_have_schema_fields() {
    let out = vrd("entangle --xi 0.6,1");
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 10);
    for row in &rows {
        let obj = row.as_object().unwrap();
        for key in CSV_COLUMNS {
            assert!(obj.contains_key(key), "{key}");
        }
        assert_eq!(obj["schema_version"], 1);
        assert_eq!(obj["mode"], "exact");
    }
    let cost = rows.iter().find(|r| r["metric"] == "cost" && r["xi"] == 0.6).unwrap();
    assert!((cost["estimate"].as_f64().unwrap() - 5.2 / 2.8).abs() < 1e-12);
}

#[test]
fn csv_rows_match_header_width() {
    let out = vrd("teleport --format csv");
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    let records: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 12);
    assert!(records.iter().all(|r| r.len() == CSV_COLUMNS.len()));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("vrd-cli-test-{}.json", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_vrd"))
        .args(["qfi", "--xi", "0.5", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(rows.len(), 3);
}

#[test]
fn invalid_arguments_exit_two() {
    for args in ["entangle --xi 2", "qfi --xi 0", "coherence --shots 0", "bogus", "entangle --mode maybe"] {
        let out = vrd(args);
        assert_eq!(out.status.code(), Some(2), "{args}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn seeds_change_sampled_output() {
    let a = vrd("entangle --xi 0.6 --mode sampled --shots 500 --seed 1").stdout;
    let b = vrd("entangle --xi 0.6 --mode sampled --shots 500 --seed 2").stdout;
    assert_ne!(a, b);
}
