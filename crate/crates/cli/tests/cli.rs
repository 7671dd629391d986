use std::path::Path;
use std::process::Command;

use clap::Parser;
use vanishing_cli::{run, Cli, CliError, Outcome};

fn invoke(args: &[&str], env_cache: Option<&Path>) -> Result<Outcome, CliError> {
    let mut argv = vec!["vanishing"];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(argv).expect("arguments parse");
    run(cli, env_cache.map(|p| p.display().to_string()))
}

fn bin(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vanishing"))
        .args(args)
        .current_dir(cwd)
        .env_remove("VANISHING_CACHE_DIR")
        .output()
        .unwrap()
}

#[test]
fn ext_summary_and_cache_hit() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().display().to_string();
    let first = invoke(&["--cache-dir", &cache, "ext", "--prime", "2", "--smax", "6", "--tmax", "16"], None).unwrap();
    assert!(first.stdout.contains("(1,2): Z/2\n"));
    assert!(first.stderr.starts_with("computed"));
    let path = dir.path().join("ext-p2-s6-t16.json");
    let bytes = std::fs::read(&path).unwrap();
    let second = invoke(&["--cache-dir", &cache, "ext", "--prime", "2", "--smax", "6", "--tmax", "16"], None).unwrap();
    assert!(second.stderr.starts_with("cache hit"));
    assert_eq!(second.stdout, first.stdout);
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
}

#[test]
fn ext_at_five_is_zero_above_the_first_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = invoke(&["--cache-dir", &dir.path().display().to_string(), "ext", "--prime", "5", "--smax", "4", "--tmax", "14"], None)
        .unwrap();
    let rows: Vec<&str> = out.stdout.lines().skip(1).collect();
    assert_eq!(rows, vec!["(0,0): Z", "(1,8): Z/5"]);
}

#[test]
fn ext_rejects_composites() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["ext", "--prime", "4", "--smax", "2", "--tmax", "4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a prime"));
}

#[test]
fn slice_chart_needs_caches_then_draws_alpha_one() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().display().to_string();
    let chart = ["--cache-dir", &cache, "chart", "--kind", "slice-e1", "--m-min", "0", "--m-max", "8", "--n-min", "0", "--n-max", "16"];
    match invoke(&chart, None) {
        Err(e @ CliError::MissingCache { prime: 2, .. }) => assert!(e.to_string().contains("vanishing ext --prime 2")),
        other => panic!("expected a missing-cache error, got {other:?}"),
    }
    for (p, s, t) in [("2", "8", "16"), ("3", "4", "16"), ("5", "2", "16"), ("7", "1", "16")] {
        invoke(&["--cache-dir", &cache, "ext", "--prime", p, "--smax", s, "--tmax", t], None).unwrap();
    }
    let out = invoke(&chart, None).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let alpha1 = v["cells"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["m"] == 0 && c["n"] == 1)
        .expect("cell (0,1)");
    assert_eq!(alpha1["summands"][0]["group"], "Z/2");
    assert_eq!(v["coverage"]["slice_t_max"], 8);
    assert!(out.stderr.contains("outside the computed Ext window"));
}

#[test]
fn region_chart_json_then_svg() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("c.json");
    let svg_path = dir.path().join("c.svg");
    let args = ["chart", "--kind", "region-e2", "--m-min", "0", "--m-max", "20", "--n-min", "0", "--n-max", "50"];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", json_path.to_str().unwrap()]);
    invoke(&with_out, None).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    for c in v["cells"].as_array().unwrap() {
        let m = c["m"].as_i64().unwrap();
        assert!(m % 4 == 0 || m % 4 == 3, "cell in column {m}");
    }
    invoke(&["chart", "--from", json_path.to_str().unwrap(), "--format", "svg", "--out", svg_path.to_str().unwrap()], None)
        .unwrap();
    let mut direct = args.to_vec();
    direct.extend(["--format", "svg"]);
    let svg = invoke(&direct, None).unwrap().stdout;
    assert_eq!(std::fs::read_to_string(&svg_path).unwrap(), svg);
    assert!(svg.contains("am-curve") && svg.contains(r#"data-prime="3""#));
}

#[test]
fn vanish_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let yes = bin(&["vanish", "--m", "18", "--n", "37", "--field", "formally-real"], dir.path());
    assert_eq!(yes.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&yes.stdout).unwrap();
    assert_eq!(v["status"], "Vanishes");

    let unknown = bin(&["vanish", "--m", "18", "--n", "36", "--field", "formally-real"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));

    let eta = bin(&["vanish", "--m", "-5", "--n", "0", "--field", "unspecified", "--variant", "eta-complete"], dir.path());
    assert_eq!(eta.status.code(), Some(0));

    let bad = bin(&["vanish", "--m", "1", "--n", "9", "--field", "nonreal", "--prime", "2"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let bad = bin(&["vanish", "--m", "1", "--n", "9", "--field", "positive-char", "--q", "3", "--prime", "3"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let usage = bin(&["vanish", "--m", "1"], dir.path());
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn vanish_contractions_and_custom_stems() {
    let out = invoke(&["vanish", "--m", "18", "--n", "37", "--field", "formally-real", "--contractions", "2"], None).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let facts = v["contractions"].as_array().unwrap();
    assert_eq!(facts.len(), 2);
    assert_eq!(facts[1]["n"], 35);

    let dir = tempfile::tempdir().unwrap();
    let stems = dir.path().join("stems.json");
    std::fs::write(&stems, r#"[{"m": 0, "factors": "Z", "citation": "c"}, {"m": 18, "factors": [[3, 1]], "citation": "hypothetical"}]"#)
        .unwrap();
    let out = invoke(&["vanish", "--m", "18", "--n", "37", "--field", "formally-real", "--stems", stems.to_str().unwrap()], None)
        .unwrap();
    assert_eq!(out.code, 2);
    assert!(out.stdout.contains("coverage: m ∈ {0, 18}"));
}

#[test]
fn verify_suites_report_and_fail_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let out = invoke(&["--cache-dir", &dir.path().display().to_string(), "verify", "--suite", "region-columns"], None).unwrap();
    assert_eq!(out.code, 0);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let unknown = bin(&["verify", "--suite", "everything"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn cache_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("vanishing.conf");
    std::fs::write(&config, "cache_dir = from-file\nwindow.3 = 2, 8\n").unwrap();
    let conf = config.to_str().unwrap();

    invoke(&["--config", conf, "ext", "--prime", "3"], None).unwrap();
    assert!(dir.path().join("from-file/ext-p3-s2-t8.json").is_file());

    let env_dir = dir.path().join("from-env");
    invoke(&["--config", conf, "ext", "--prime", "3"], Some(&env_dir)).unwrap();
    assert!(env_dir.join("ext-p3-s2-t8.json").is_file());

    let flag_dir = dir.path().join("from-flag");
    invoke(&["--config", conf, "--cache-dir", flag_dir.to_str().unwrap(), "ext", "--prime", "3"], Some(&env_dir)).unwrap();
    assert!(flag_dir.join("ext-p3-s2-t8.json").is_file());
}
