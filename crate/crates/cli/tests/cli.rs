use std::process::{Command, Output};

fn qdk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdk"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("QDK_FORMAT")
        .env_remove("QDK_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Parse a single-row CSV report into (header, value) pairs.
fn csv_fields(text: &str) -> Vec<(String, String)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let values: Vec<&str> = lines.next().unwrap().split(',').collect();
    header
        .into_iter()
        .map(String::from)
        .zip(values.into_iter().map(String::from))
        .collect()
}

fn field(fields: &[(String, String)], name: &str) -> String {
    fields
        .iter()
        .find(|(k, _)| k == name)
        .unwrap_or_else(|| panic!("no field {name}"))
        .1
        .clone()
}

fn num(fields: &[(String, String)], name: &str) -> f64 {
    field(fields, name).parse().unwrap()
}

/// Rows of a multi-row CSV as header-keyed maps.
fn csv_rows(text: &str) -> Vec<Vec<(String, f64)>> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(l.split(',').map(|v| v.parse::<f64>().unwrap()))
                .collect()
        })
        .collect()
}

fn col(row: &[(String, f64)], name: &str) -> f64 {
    row.iter().find(|(k, _)| k == name).unwrap().1
}

#[test]
fn compute_bell() {
    let o = qdk(&["compute", "--state", "bell-phi-plus", "--format", "csv"]);
    assert!(o.status.success());
    let f = csv_fields(&stdout(&o));
    assert_eq!(field(&f, "iq"), "2.000000");
    assert_eq!(field(&f, "discord"), "1.000000");
    assert_eq!(field(&f, "naive_conditional_on_b"), "-1.000000");
    assert!((num(&f, "rel_ent_of_entanglement") - 1.0).abs() < 5e-3);
    assert_eq!(field(&f, "zero_discord"), "false");
}

#[test]
fn compute_werner_zero_is_uncorrelated() {
    let o = qdk(&[
        "compute", "--state", "werner", "--param", "p=0", "--format", "csv",
    ]);
    assert!(o.status.success());
    let f = csv_fields(&stdout(&o));
    for m in [
        "iq",
        "classical",
        "discord",
        "rel_ent_of_entanglement",
        "rel_ent_of_discord",
    ] {
        assert_eq!(num(&f, m), 0.0, "{m}");
    }
}

#[test]
fn compute_from_file() {
    let o = qdk(&[
        "compute",
        "--file",
        "examples/cc_mixture.json",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = csv_fields(&stdout(&o));
    assert_eq!(field(&f, "discord"), "0.000000");
    assert_eq!(field(&f, "zero_discord"), "true");
}

#[test]
fn compute_json_report() {
    let o = qdk(&[
        "compute",
        "--state",
        "lo-output",
        "--format",
        "json",
        "--measure",
        "discord",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = v["discord"].as_f64().unwrap();
    let c = v["classical"].as_f64().unwrap();
    let iq = v["iq"].as_f64().unwrap();
    assert!(d > 0.01);
    assert!((d - (iq - c)).abs() < 1e-9);
}

#[test]
fn table_format_is_default() {
    let o = qdk(&["compute", "--state", "bell", "--measure", "iq"]);
    let out = stdout(&o);
    assert!(out
        .lines()
        .any(|l| l.starts_with("iq") && l.trim_end().ends_with("2.000000")));
}

#[test]
fn input_errors_exit_1() {
    for args in [
        vec!["compute", "--state", "nope"],
        vec!["compute", "--state", "werner"],
        vec!["compute", "--state", "werner", "--param", "p=2"],
        vec!["compute", "--file", "does/not/exist.json"],
        vec!["compute"],
        vec!["scan", "werner", "--step", "0"],
        vec!["demo", "nope"],
        vec!["property", "nope"],
        vec!["--restarts", "0", "compute", "--state", "bell"],
    ] {
        let o = qdk(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn malformed_state_file_exits_1() {
    let dir = std::env::temp_dir().join(format!("qdk-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"dimA": 2, "dimB": 2, "matrix": [[[1.0, 0.0]]]}"#).unwrap();
    let o = qdk(&["compute", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(
        &path,
        r#"{"dimA": 2.0, "dimB": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}"#,
    )
    .unwrap();
    assert_eq!(
        qdk(&["compute", "--file", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn strict_surfaces_non_convergence() {
    let args = [
        "--max-iter",
        "1",
        "compute",
        "--state",
        "lo-output",
        "--measure",
        "discord",
    ];
    assert_eq!(qdk(&args).status.code(), Some(0));
    let strict: Vec<&str> = ["--strict"].into_iter().chain(args).collect();
    assert_eq!(qdk(&strict).status.code(), Some(3));
}

#[test]
fn demos_pass() {
    let o = qdk(&["demo", "discord-from-LO"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let after = out.lines().find(|l| l.starts_with("after,")).unwrap();
    let d: f64 = after.split(',').nth(2).unwrap().parse().unwrap();
    assert!(d > 0.01);

    let o = qdk(&["demo", "negative-conditional"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("bell-phi-plus,0.000000,1.000000,-1.000000"));

    let o = qdk(&["demo", "pure-state-identities"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).lines().filter(|l| l.ends_with(",true")).count(),
        20
    );
}

#[test]
fn correlation_gap_demo() {
    let o = qdk(&["demo", "correlation-gap"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let start = out.find("p,iq").unwrap();
    let block: String = out[start..]
        .lines()
        .take_while(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    let rows = csv_rows(&block);
    assert_eq!(rows.len(), 21);
    for r in &rows {
        assert!(col(r, "gap") >= -5e-3);
    }
    assert!(col(&rows[0], "gap").abs() <= 5e-3);
    assert!(col(&rows[20], "gap").abs() <= 5e-3);
}

#[test]
fn scan_werner_discord() {
    let o = qdk(&[
        "scan",
        "werner",
        "--from",
        "0",
        "--to",
        "1",
        "--step",
        "0.05",
        "--measure",
        "discord",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 21);
    assert_eq!(col(&rows[0], "discord"), 0.0);
    let mut prev = -1.0;
    for r in &rows {
        let (p, d) = (col(r, "p"), col(r, "discord"));
        assert!(p > prev);
        assert!(d >= 0.0);
        prev = p;
    }
    assert!((col(&rows[20], "discord") - 1.0).abs() < 1e-5);
}

#[test]
fn scan_pure_classical_equals_discord() {
    let o = qdk(&[
        "scan",
        "pure",
        "--step",
        "0.1",
        "--measure",
        "c",
        "--measure",
        "discord",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!((col(r, "classical") - col(r, "discord")).abs() < 1e-4);
    }
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let args = [
        "--seed",
        "11",
        "random",
        "--measure",
        "discord",
        "--measure",
        "rel-ent-of-discord",
        "--format",
        "csv",
    ];
    let a = qdk(&args);
    let b = qdk(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'));
}

#[test]
fn property_suites() {
    for (suite, n) in [
        ("lo-monotonicity-mutual-info", "200"),
        ("discord-nonnegative", "500"),
        ("relent-data-processing", "200"),
    ] {
        let o = qdk(&["property", suite, n, "--seed", "7", "--format", "csv"]);
        assert!(o.status.success(), "{suite}");
        assert_eq!(
            stdout(&o),
            format!("suite,samples,seed,violations\n{suite},{n},7,0\n")
        );
    }
}

#[test]
fn environment_defaults_yield_to_flags() {
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_qdk"))
            .args(["compute", "--state", "bell", "--measure", "iq"])
            .args(extra)
            .env("QDK_FORMAT", "csv")
            .output()
            .unwrap()
    };
    assert!(stdout(&run(&[])).starts_with("state,"));
    let json = run(&["--format", "json"]);
    assert!(serde_json::from_slice::<serde_json::Value>(&json.stdout).is_ok());
}

#[test]
fn random_prints_state_and_report() {
    let o = qdk(&[
        "--seed",
        "4",
        "random",
        "--pure",
        "--measure",
        "discord",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["state"]["dimA"], 2);
    let r = &v["report"];
    let s_a = r["s_a"].as_f64().unwrap();
    assert!((r["discord"].as_f64().unwrap() - s_a).abs() < 1e-4);
}

#[test]
fn orientation_flag() {
    let o = qdk(&[
        "--orientation",
        "A",
        "compute",
        "--state",
        "lo-output",
        "--measure",
        "discord",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let f = csv_fields(&stdout(&o));
    assert_eq!(field(&f, "orientation"), "A");
    // Measuring A, whose states are orthogonal, leaves no discord.
    assert_eq!(field(&f, "discord"), "0.000000");
}
