//! End-to-end tests of the command-line binary: output shapes, seeded
//! reproducibility, CSV/JSON payload agreement, and the exit-code contract
//! (0 ok, 1 flagged result, 2 usage/domain error, 3 I/O error).

use std::process::{Command, Output};

use serde_json::Value;

fn patmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patmat"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be UTF-8")
}

fn json_results(output: &Output) -> Value {
    let record: Value = serde_json::from_str(&stdout(output)).expect("stdout should be JSON");
    assert!(record.get("config").is_some(), "record should echo its config");
    assert!(record.get("version").is_some(), "record should carry a version");
    record.get("results").expect("record should have results").clone()
}

/// Header and first data row of a CSV body, with quoting handled.
fn csv_first_row(body: &str) -> (Vec<String>, Vec<String>) {
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().unwrap().iter().map(str::to_owned).collect();
    let row = reader
        .records()
        .next()
        .expect("csv should have a data row")
        .unwrap()
        .iter()
        .map(str::to_owned)
        .collect();
    (header, row)
}

#[test]
fn words_lists_the_three_four_letter_words() {
    let output = patmat(&["words", "--k", "4"]);
    assert!(output.status.success());
    let lines: Vec<String> = stdout(&output).lines().map(str::to_owned).collect();
    assert_eq!(lines, ["aabb", "abab", "abba"]);

    let csv = patmat(&["words", "--k", "4", "--format", "csv"]);
    let body = stdout(&csv);
    let mut rows = body.lines();
    assert_eq!(rows.next(), Some("word,catalan,symmetric"));
    assert_eq!(rows.next(), Some("aabb,true,true"));
    assert_eq!(rows.next(), Some("abab,false,false"));
    assert_eq!(rows.next(), Some("abba,true,true"));
}

#[test]
fn pofw_reports_closed_forms_exactly() {
    let output = patmat(&["pofw", "--pattern", "wigner", "--word", "abba"]);
    assert!(output.status.success());
    let results = json_results(&output);
    assert_eq!(results["value"], 1.0);
    assert_eq!(results["exact"], "1");
    assert_eq!(results["method"], "closed_form");
    assert_eq!(results["flagged"], false);
}

#[test]
fn json_runs_are_reproducible_up_to_the_timestamp() {
    let args = [
        "pofw", "--pattern", "toeplitz", "--word", "abab", "--method", "mc", "--samples",
        "20000", "--seed", "7",
    ];
    let mut records: Vec<Value> = [patmat(&args), patmat(&args)]
        .iter()
        .map(|o| serde_json::from_str(&stdout(o)).unwrap())
        .collect();
    for record in &mut records {
        record.as_object_mut().unwrap().remove("timestamp");
    }
    assert_eq!(records[0], records[1]);
}

#[test]
fn csv_runs_are_byte_reproducible() {
    let args = [
        "simulate", "--pattern", "hankel", "--monomial", "1,2,1,2", "--n", "40", "--reps",
        "10", "--seed", "3", "--format", "csv",
    ];
    assert_eq!(stdout(&patmat(&args)), stdout(&patmat(&args)));
}

#[test]
fn csv_and_json_encode_the_same_moment() {
    let base = ["moment", "--pattern", "reverse_circulant", "--monomial", "1,2,2,1"];
    let json = json_results(&patmat(&base));

    let mut csv_args = base.to_vec();
    csv_args.extend(["--format", "csv"]);
    let (header, row) = csv_first_row(&stdout(&patmat(&csv_args)));
    let field = |name: &str| row[header.iter().position(|h| h == name).unwrap()].as_str();

    assert_eq!(field("pattern"), json["pattern"].as_str().unwrap());
    assert_eq!(field("method"), json["method"].as_str().unwrap());
    assert_eq!(
        field("value").parse::<f64>().unwrap(),
        json["value"].as_f64().unwrap()
    );
    assert_eq!(field("exact"), json["exact"].as_str().unwrap());
    assert_eq!(
        field("std_error").parse::<f64>().unwrap(),
        json["std_error"].as_f64().unwrap()
    );
    assert_eq!(field("flagged").parse::<bool>().unwrap(), json["flagged"].as_bool().unwrap());
    assert_eq!(
        field("words").parse::<u64>().unwrap(),
        json["words"].as_u64().unwrap()
    );
}

#[test]
fn csv_and_json_encode_the_same_simulation() {
    let base = [
        "simulate", "--pattern", "wigner", "--monomial", "1,1,1,1", "--n", "50", "--reps",
        "20", "--seed", "5",
    ];
    let json = json_results(&patmat(&base));

    let mut csv_args = base.to_vec();
    csv_args.extend(["--format", "csv"]);
    let (header, row) = csv_first_row(&stdout(&patmat(&csv_args)));
    let field = |name: &str| row[header.iter().position(|h| h == name).unwrap()].as_str();

    for name in ["mean", "std_error", "limit", "abs_error"] {
        assert_eq!(
            field(name).parse::<f64>().unwrap(),
            json[name].as_f64().unwrap(),
            "{name}"
        );
    }
    assert_eq!(field("n").parse::<u64>().unwrap(), json["n"].as_u64().unwrap());
    assert_eq!(field("reps").parse::<u64>().unwrap(), json["reps"].as_u64().unwrap());
}

#[test]
fn classify_emits_one_row_per_battery_monomial() {
    let output = patmat(&[
        "classify", "--pattern", "reverse_circulant", "--format", "csv",
    ]);
    assert!(output.status.success());
    let body = stdout(&output);
    let mut lines = body.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("pattern,monomial,ensemble"));
    assert_eq!(lines.count(), 6, "default battery has six monomials");

    let json = json_results(&patmat(&["classify", "--pattern", "reverse_circulant"]));
    assert_eq!(json["free"]["verdict"], "refuted");
    assert_eq!(json["classical"]["verdict"], "refuted");
    assert_eq!(json["half_independent"]["verdict"], "consistent");
}

#[test]
fn exit_codes_follow_the_contract() {
    // 0: clean run.
    assert_eq!(patmat(&["words", "--k", "2"]).status.code(), Some(0));

    // 1: result carries a quality flag (an extrapolation from a tiny,
    // non-asymptotic grid has a visibly bad residual).
    let flagged = patmat(&[
        "pofw", "--pattern", "toeplitz", "--word", "abab", "--method", "extrapolate",
        "--n-grid", "2,3,4",
    ]);
    assert_eq!(flagged.status.code(), Some(1));

    // 2: domain and usage errors.
    assert_eq!(
        patmat(&["pofw", "--pattern", "hilbert", "--word", "abab"]).status.code(),
        Some(2),
        "unknown pattern"
    );
    assert_eq!(
        patmat(&["pofw", "--pattern", "wigner", "--word", "aba"]).status.code(),
        Some(2),
        "word that is not pair-matched"
    );
    assert_eq!(
        patmat(&["moment", "--pattern", "wigner", "--monomial", "1,0,1"]).status.code(),
        Some(2),
        "colors must be positive"
    );
    assert_eq!(
        patmat(&["moment", "--pattern", "wigner", "--monomial", "1,1", "--format", "text"])
            .status
            .code(),
        Some(2),
        "text format only renders word lists"
    );
    assert_eq!(
        patmat(&["pofw", "--pattern", "wigner", "--word", "abab", "--method", "mc"])
            .status
            .code(),
        Some(2),
        "volume estimation is Toeplitz/Hankel only"
    );

    // 3: output file cannot be written.
    let unwritable = patmat(&[
        "words", "--k", "2", "--out", "/nonexistent-dir/words.txt",
    ]);
    assert_eq!(unwritable.status.code(), Some(3));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = std::env::temp_dir().join("patmat-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.json");
    let _ = std::fs::remove_file(&path);
    let output = patmat(&[
        "pofw", "--pattern", "wigner", "--word", "aabb", "--out", path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let contents = std::fs::read_to_string(&path).unwrap();
    let record: Value = serde_json::from_str(&contents).unwrap();
    assert_eq!(record["results"]["value"], 1.0);
    std::fs::remove_file(&path).unwrap();
}
