use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use skewalk::{emit_plotdata, run, CliError, Overrides, RunConfig, Task};
use skewalk_core::verify::VerificationReport;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Writes a small config next to the fixtures' pmf file.
fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        r#"{{
  "model": {{ "kind": "x", "xi": {{ "file": "{lazy}" }}, "restart": {{ "-1": 0.5, "2": 0.5 }} }},
  "seed": 5,
  "chunk_size": 700,
  "grids": {{ "x": [1, 2], "n": [256, 512], "y": [1] }},
  "simulate": {{ "n": 300, "paths": 2000, "save_paths": 2 }},
  "verify": {{ "n": 512, "paths": 10000, "bins": 4, "tightness_n": [64, 256], "tightness_paths": 1000 }}
  {extra}
}}"#,
        lazy = fixture("lazy.pmf").display()
    );
    let p = dir.join("small.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn run_with(cfg: &Path, out: &Path, threads: usize) -> skewalk::Manifest {
    let o = Overrides { threads: Some(threads), out: Some(out.into()), ..Default::default() };
    run(&RunConfig::from_file(cfg, &o).unwrap()).unwrap()
}

#[test]
fn pipeline_is_deterministic_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ma = run_with(&cfg, &a, 1);
    let mb = run_with(&cfg, &b, 4);
    assert_eq!(outputs(&a), outputs(&b));
    assert_eq!(ma.config_hash, mb.config_hash);
    let sums = |m: &skewalk::Manifest| {
        m.tasks.values().flatten().map(|f| (f.path.clone(), f.sha256.clone())).collect::<Vec<_>>()
    };
    assert_eq!(sums(&ma), sums(&mb));
    assert!(outputs(&a).contains_key("verify.json"));
}

#[test]
fn constants_report_alpha_and_convention() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Overrides { out: Some(tmp.path().join("c")), tasks: vec![Task::Constants], ..Default::default() };
    run(&RunConfig::from_file(&fixture("lazy-x-skew.cfg"), &o).unwrap()).unwrap();
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("c/constants.json")).unwrap()).unwrap();
    let alpha = v["alpha"].as_f64().unwrap();
    assert!((alpha - 2.0 / 3.0).abs() < 2e-3, "alpha {alpha}");
    // Without x = 0 in the grid, on_negative:0 and on_nonpositive:1 describe
    // the same killed walk; both carry over to the same chain convention.
    let walk = (v["walk_convention"]["kill_rule"].as_str().unwrap(), v["walk_convention"]["h_shift"].as_u64().unwrap());
    assert!(matches!(walk, ("on_negative", 0) | ("on_nonpositive", 1)), "{walk:?}");
    assert_eq!(v["chain_convention"]["kill_rule"], "on_nonpositive");
    assert_eq!(v["chain_convention"]["h_shift"], 1);
    assert!(v["calibration"]["candidates"].as_array().unwrap().len() == 4);
}

#[test]
fn fixed_convention_skips_calibration() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let o = Overrides {
        out: Some(tmp.path().join("c")),
        tasks: vec![Task::Constants],
        convention: Some("fixed:on_nonpositive:0".into()),
        ..Default::default()
    };
    run(&RunConfig::from_file(&cfg, &o).unwrap()).unwrap();
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("c/constants.json")).unwrap()).unwrap();
    assert!(v["calibration"].is_null());
    // The literal pairing applied to the chain.
    assert!((v["alpha"].as_f64().unwrap() - 0.6).abs() < 2e-3);
}

#[test]
fn missing_seed_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("noseed.cfg");
    std::fs::write(&p, r#"{"model": {"kind": "y", "xi": {"-1": 0.25, "0": 0.5, "1": 0.25}, "restart": {"1": 1}}, "tasks": ["simulate"]}"#)
        .unwrap();
    let err = RunConfig::from_file(&p, &Overrides::default()).unwrap_err();
    assert!(matches!(err, CliError::ConfigInvalid(_)));
    assert_eq!(err.exit_code(), 2);
    // Constants alone need no seed.
    let o = Overrides { tasks: vec![Task::Constants], ..Default::default() };
    assert!(RunConfig::from_file(&p, &o).is_ok());

    let status = Command::new(env!("CARGO_BIN_EXE_skewalk"))
        .args(["--config"])
        .arg(&p)
        .args(["--out"])
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("seed"));
}

#[test]
fn invalid_models_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"model": {"kind": "y", "xi": {"-1": 0.5, "2": 0.5}, "restart": {"1": 1}}}"#,
        r#"{"model": {"kind": "y", "xi": {"-1": 0.5, "1": 0.5}, "restart": {"-1": 1}}}"#,
        r#"{"model": {"kind": "x", "xi": {"-1": 0.5, "1": 0.5}, "restart": {"0": 1}}}"#,
        r#"{"model": {"kind": "x", "xi": {"-2": "1/3", "1": "2/3"}, "restart": {"1": 1}}}"#,
        r#"{"model": {"kind": "y", "xi": {"-1": 0.5, "1": 0.5}, "restart": {"1": 1}}, "bogus": 1}"#,
        r#"{"model": {"kind": "y", "xi": {"-1": 0.5, "1": 0.5}, "restart": {"1": 1}}, "convention": "fixed:x:0"}"#,
    ];
    for (i, c) in cases.iter().enumerate() {
        let p = tmp.path().join(format!("bad{i}.cfg"));
        std::fs::write(&p, c).unwrap();
        let o = Overrides { seed: Some(1), ..Default::default() };
        assert!(matches!(RunConfig::from_file(&p, &o), Err(CliError::ConfigInvalid(_))), "case {i}");
    }
    // The periodic law is accepted once opted in.
    let p = tmp.path().join("periodic.cfg");
    std::fs::write(
        &p,
        r#"{"model": {"kind": "x", "xi": {"-2": "1/3", "1": "2/3"}, "restart": {"1": 1}, "allow_periodic_steps": true}}"#,
    )
    .unwrap();
    assert!(RunConfig::from_file(&p, &Overrides { seed: Some(1), ..Default::default() }).is_ok());
}

#[test]
fn config_hash_tracks_results_not_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let base = RunConfig::from_file(&cfg, &Overrides::default()).unwrap().hash();
    let threads = Overrides { threads: Some(3), out: Some("elsewhere".into()), ..Default::default() };
    assert_eq!(RunConfig::from_file(&cfg, &threads).unwrap().hash(), base);
    let seed = Overrides { seed: Some(6), ..Default::default() };
    assert_ne!(RunConfig::from_file(&cfg, &seed).unwrap().hash(), base);
    let cfg2 = small_config(tmp.path(), r#", "convention": "fixed:on_negative:0""#);
    assert_ne!(RunConfig::from_file(&cfg2, &Overrides::default()).unwrap().hash(), base);
}

#[test]
fn plot_data_and_unknown_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let o = Overrides { out: Some(tmp.path().join("v")), tasks: vec![Task::Verify], ..Default::default() };
    run(&RunConfig::from_file(&cfg, &o).unwrap()).unwrap();
    let report: VerificationReport =
        serde_json::from_slice(&std::fs::read(tmp.path().join("v/verify.json")).unwrap()).unwrap();
    let tail = emit_plotdata(&report, "tail x=1").unwrap();
    assert!(tail.starts_with("n,ratio\n256,"));
    let marginal = emit_plotdata(&report, "marginal t=0.5").unwrap();
    assert!(marginal.starts_with("u,empirical_density,reference_density\n"));
    let joint = emit_plotdata(&report, "joint s=0.25 t=0.75").unwrap();
    assert_eq!(joint.lines().count(), 1 + 16);
    assert!(matches!(emit_plotdata(&report, "no such curve"), Err(CliError::UnknownCurve(_))));

    let bin = |curve: &str| {
        Command::new(env!("CARGO_BIN_EXE_skewalk"))
            .args(["plot", "--report"])
            .arg(tmp.path().join("v/verify.json"))
            .args(["--curve", curve])
            .output()
            .unwrap()
    };
    let ok = bin("tail x=1");
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), tail);
    assert_eq!(bin("nope").status.code(), Some(4));
}

#[test]
fn fixtures_parse() {
    for f in ["reflected-lazy.cfg", "lazy-x-symmetric.cfg", "lazy-x-skew.cfg"] {
        let cfg = RunConfig::from_file(&fixture(f), &Overrides::default()).unwrap();
        assert_eq!(cfg.tasks, vec![Task::Constants, Task::Dp, Task::Simulate, Task::Verify]);
    }
}
