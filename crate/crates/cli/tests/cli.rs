use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;

const T1: &str = "\
[mesh]
dimension = 1
x = 0, 1
nodes = 201

[params]
p = 2
q = 1.5
r = 3
s = 3
lambda = 0.1
mu = 0.1
f = constant(1)
g = constant(1)
h = constant(1)
";

fn nehari(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nehari"));
    cmd.args(args).arg("--config").arg(config);
    if let Some(out) = out {
        cmd.arg("--out").arg(out);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path
}

fn summary_value(dir: &Path, section: &str, key: &str) -> Option<String> {
    let text = fs::read_to_string(dir.join("summary.txt")).ok()?;
    let mut current = "";
    for line in text.lines() {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name;
        } else if current == section {
            if let Some(v) = line.strip_prefix(&format!("{key} = ")) {
                return Some(v.to_string());
            }
        }
    }
    None
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = nehari(&["solve"], &dir.path().join("absent.ini"), Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.ini"));
}

#[test]
fn invalid_config_exits_2_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &T1.replace("q = 1.5", "q = 2.5"));
    let out = nehari(&["solve"], &config, Some(&dir.path().join("out")));
    assert_eq!(out.status.code(), Some(2));
    let error = summary_value(&dir.path().join("out"), "run", "error").unwrap();
    assert!(error.contains("q") && error.contains("requires q < p"), "{error}");
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "not a directory").unwrap();
    let out = nehari(&["thresholds"], &config, Some(&blocker.join("out")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_command_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    assert_eq!(nehari(&["bogus"], &config, None).status.code(), Some(2));
}

#[test]
fn solve_writes_fields_and_histories() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    let out = dir.path().join("out");
    assert_eq!(nehari(&["solve"], &config, Some(&out)).status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "energy_history_minus.csv",
            "energy_history_plus.csv",
            "summary.txt",
            "u_minus.csv",
            "u_plus.csv",
            "v_minus.csv",
            "v_plus.csv"
        ]
    );
    let history = fs::read_to_string(out.join("energy_history_plus.csv")).unwrap();
    assert!(history.starts_with("iteration,energy,norm_p\n"));
    assert_eq!(summary_value(&out, "solution", "success").as_deref(), Some("true"));
    assert!(summary_value(&out, "plus", "energy").unwrap().parse::<f64>().unwrap() < 0.0);
}

#[test]
fn fields_round_trip_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    let out = dir.path().join("out");
    assert_eq!(nehari(&["solve"], &config, Some(&out)).status.code(), Some(0));
    let solved: Vec<f64> = ["plus", "minus"]
        .iter()
        .map(|b| summary_value(&out, b, "residual_max").unwrap().parse().unwrap())
        .collect();
    let check = nehari(&["verify"], &config, Some(&out));
    assert_eq!(
        check.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&check.stdout)
    );
    for (b, r) in ["plus", "minus"].iter().zip(solved) {
        let section = format!("verify.{b}");
        let again: f64 = summary_value(&out, &section, "residual_max").unwrap().parse().unwrap();
        assert!((again - r).abs() <= 1e-12 * r.max(1e-300), "{b}: {again} vs {r}");
        assert_eq!(summary_value(&out, &section, "passed").as_deref(), Some("true"));
    }
}

#[test]
fn corrupted_field_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    let out = dir.path().join("out");
    assert_eq!(nehari(&["solve"], &config, Some(&out)).status.code(), Some(0));
    let path = out.join("u_minus.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let (x, _) = lines[100].split_once(',').unwrap();
    lines[100] = format!("{x},1.5");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert_eq!(nehari(&["verify"], &config, Some(&out)).status.code(), Some(1));
    assert_eq!(summary_value(&out, "verify.minus", "passed").as_deref(), Some("false"));
    assert_eq!(summary_value(&out, "verify.plus", "passed").as_deref(), Some("true"));
}

#[test]
fn verify_without_fields_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    assert_eq!(
        nehari(&["verify"], &config, Some(&dir.path().join("empty")))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn malformed_field_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("u.csv"), "x,value\n0,zero\n").unwrap();
    let text = format!("{T1}\n[verify]\nu = u.csv\nv = u.csv\n");
    let config = write_config(dir.path(), &text);
    assert_eq!(nehari(&["verify"], &config, Some(dir.path())).status.code(), Some(2));
}

#[test]
fn thresholds_certify_t1() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    assert_eq!(nehari(&["thresholds"], &config, None).status.code(), Some(0));
    // without --out the report lands beside the configuration
    assert_eq!(
        summary_value(dir.path(), "certificate", "certified").as_deref(),
        Some("true")
    );
}

#[test]
fn fibering_table_has_requested_samples() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &format!("{T1}\n[fibering]\nsamples = 50\nspan = 10\n"));
    assert_eq!(nehari(&["fibering"], &config, None).status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("fibering.csv")).unwrap();
    assert_eq!(table.lines().count(), 51);
    assert_eq!(
        summary_value(dir.path(), "analysis", "root_count").as_deref(),
        Some("2")
    );
}

#[test]
fn summary_echo_reloads_to_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), T1);
    let first = dir.path().join("first");
    assert_eq!(nehari(&["sobolev"], &config, Some(&first)).status.code(), Some(0));
    let summary = fs::read_to_string(first.join("summary.txt")).unwrap();
    let echo = summary.split_once("# configuration\n").unwrap().1;
    let echoed = dir.path().join("echo.ini");
    fs::write(&echoed, echo).unwrap();
    let second = dir.path().join("second");
    assert_eq!(nehari(&["sobolev"], &echoed, Some(&second)).status.code(), Some(0));
    for name in ["summary.txt", "minimizer_q.csv", "minimizer_rs.csv", "minimizer_p.csv"] {
        assert_eq!(
            fs::read(first.join(name)).unwrap(),
            fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // corrupting any single line yields success or a clean config error
    #[test]
    fn corrupted_configs_never_crash(line in 0usize..15, junk in "[a-z=, ()0-9.\\-\\[\\]]{0,12}") {
        let dir = tempfile::tempdir().unwrap();
        let mut lines: Vec<&str> = T1.lines().collect();
        lines[line] = &junk;
        let config = write_config(dir.path(), &lines.join("\n"));
        let code = nehari(&["thresholds"], &config, Some(&dir.path().join("out"))).status.code();
        prop_assert!(matches!(code, Some(0) | Some(1) | Some(2)), "{:?} for {:?}", code, junk);
        if code == Some(2) {
            prop_assert!(summary_value(&dir.path().join("out"), "run", "error").is_some());
        }
    }
}
