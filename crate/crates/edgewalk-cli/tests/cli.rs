use std::path::PathBuf;
use std::process::Command as Process;

use edgewalk_cli::{execute, parse_config, parse_key_values, CliError, Command, Format, WalkExperiment};
use serde_json::Value;

fn parse(args: &[&str]) -> Result<(edgewalk_cli::CommandSpec, edgewalk::walk_core::SimConfig), CliError> {
    parse_config(std::iter::once("edgewalk").chain(args.iter().copied()))
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("edgewalk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn usage_key(e: CliError) -> String {
    match e {
        CliError::Usage { key, .. } => key,
        other => panic!("expected a usage error, got {other:?}"),
    }
}

fn sorted_keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().expect("object").keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn defaults_apply_without_flags() {
    let (spec, cfg) = parse(&["walk"]).unwrap();
    assert_eq!(spec.command, Command::Walk(WalkExperiment::Trajectory));
    assert_eq!((cfg.big_n, cfg.n), (2000, 158));
    assert_eq!((cfg.eps, cfg.theta, spec.seed), (0.25, 1.0, 1));
    assert_eq!(spec.format, Format::Json);
    assert_eq!(spec.eps_tilde, edgewalk::meso::eps_tilde_bound(0.25) / 2.0);
}

#[test]
fn flags_override_file_and_file_overrides_defaults() {
    let p = temp_file("prec.cfg", "# run settings\nseed = 5\nreps = 10\neps = 0.3\nformat = csv\n");
    let (spec, cfg) = parse(&["chains", "--config", p.to_str().unwrap(), "--seed", "7"]).unwrap();
    assert_eq!(spec.seed, 7);
    assert_eq!(cfg.seed, 7);
    assert_eq!(spec.overrides.reps, Some(10));
    assert_eq!(cfg.eps, 0.3);
    assert_eq!(cfg.theta, 1.0);
    assert_eq!(spec.format, Format::Csv);
}

#[test]
fn unknown_config_key_is_named() {
    assert_eq!(usage_key(parse_key_values("seed = 1\nbogus = 2\n").unwrap_err()), "bogus");
    assert_eq!(usage_key(parse_key_values("seed = 1\nseed = 2\n").unwrap_err()), "seed");
    let p = temp_file("bad.cfg", "eps = quarter\n");
    assert_eq!(usage_key(parse(&["walk", "--config", p.to_str().unwrap()]).unwrap_err()), "eps");
}

#[test]
fn unknown_flag_is_named() {
    assert_eq!(usage_key(parse(&["walk", "--bogus", "3"]).unwrap_err()), "--bogus");
}

#[test]
fn inadmissible_eps_tilde_names_the_bound() {
    match parse(&["meso", "--eps-tilde", "0.01"]).unwrap_err() {
        CliError::Usage { key, message } => {
            assert_eq!(key, "eps_tilde");
            assert!(message.contains("2^15"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    parse(&["meso", "--eps-tilde", "1e-8"]).unwrap();
}

#[test]
fn scale_and_positivity_are_validated() {
    assert_eq!(usage_key(parse(&["walk", "--N", "1000", "--n", "101"]).unwrap_err()), "n");
    parse(&["walk", "--N", "1000", "--n", "100"]).unwrap();
    let (_, cfg) = parse(&["walk", "--n", "100"]).unwrap();
    assert!(cfg.big_n >= 1000);
    assert_eq!(usage_key(parse(&["walk", "--theta=-1"]).unwrap_err()), "theta");
    assert_eq!(usage_key(parse(&["walk", "--reps", "0"]).unwrap_err()), "reps");
    assert_eq!(usage_key(parse(&["walk", "--threads", "0"]).unwrap_err()), "threads");
    assert_eq!(usage_key(parse(&["walk", "--N", "0"]).unwrap_err()), "N");
}

#[test]
fn empty_argv_prints_help() {
    assert!(matches!(parse(&[]).unwrap_err(), CliError::Help(_)));
    assert!(matches!(parse(&["--help"]).unwrap_err(), CliError::Help(_)));
}

#[test]
fn report_matches_golden_schema() {
    let golden: Value =
        serde_json::from_str(include_str!("golden/report_schema.json")).expect("golden file parses");
    let keys = |k: &str| -> Vec<String> {
        golden[k].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect()
    };
    let (spec, cfg) = parse(&["reflect", "--barrier", "zero", "--reps", "200"]).unwrap();
    let art = execute(&spec, &cfg).unwrap();
    let json: Value = serde_json::from_str(&art.render(Format::Json)).unwrap();
    assert_eq!(sorted_keys(&json), keys("report"));
    assert_eq!(json["schema_version"], golden["schema_version"]);
    for c in json["criteria"].as_array().unwrap() {
        assert_eq!(sorted_keys(c), keys("criterion"));
    }
    for m in json["summary"].as_object().unwrap().values() {
        assert_eq!(sorted_keys(m), keys("measured"));
    }
    let csv = art.render(Format::Csv);
    assert_eq!(csv.lines().next().unwrap(), golden["csv_header"].as_str().unwrap());
}

#[test]
fn reports_are_reproducible_across_runs_and_thread_counts() {
    let args = ["reflect", "--barrier", "quartic-root", "--reps", "300", "--seed", "42"];
    let (spec, cfg) = parse(&args).unwrap();
    let a = execute(&spec, &cfg).unwrap().render(Format::Json);
    let b = execute(&spec, &cfg).unwrap().render(Format::Json);
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let (spec1, cfg1) = parse(&one).unwrap();
    let c = execute(&spec1, &cfg1).unwrap().render(Format::Json);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let (spec2, cfg2) = parse(&["reflect", "--barrier", "quartic-root", "--reps", "300", "--seed", "43"]).unwrap();
    assert_ne!(a, execute(&spec2, &cfg2).unwrap().render(Format::Json));
}

#[test]
fn trajectory_dump_has_the_documented_columns() {
    let (spec, cfg) = parse(&["walk", "--N", "300", "--K", "3", "--format", "csv"]).unwrap();
    let out = execute(&spec, &cfg).unwrap().render(spec.format);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,T_k,X_T_k,Z_k");
    assert_eq!(lines.len(), 5);
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_edgewalk"))
}

#[test]
fn binary_exit_codes() {
    assert_eq!(binary().output().unwrap().status.code(), Some(0));
    assert_eq!(binary().args(["walk", "--nope"]).output().unwrap().status.code(), Some(2));
    let out = binary().args(["meso", "--eps-tilde", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps_tilde"));
    let out = binary().args(["chains", "--experiment", "rho"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["experiment"], "rho_structure");
}

#[test]
fn binary_writes_the_out_file() {
    let dir = std::env::temp_dir().join(format!("edgewalk-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("laws.csv");
    let status = binary()
        .args(["chains", "--experiment", "laws", "--format", "csv", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("law,value,mass\n"));
    assert!(text.contains("zero,"));
}
