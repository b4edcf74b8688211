use std::process::Command;

use nvmag_cli::config::{builtin, Scenario, ScenarioConfig};
use nvmag_cli::error::{CliError, EXIT_CONFIG, EXIT_OK};
use nvmag_cli::scenario::TrialSource;
use nvmag_cli::{
    analyze, run_checks, run_scenario, template_from_trace, trace_io, write_bundle, Windows,
};

/// Worm scenario cut down to a few trials.
fn small(name: &str, n_avg: usize, template_traces: usize) -> Scenario {
    let mut cfg = builtin(name).unwrap();
    cfg.n_avg = n_avg;
    cfg.analysis.template_traces = template_traces;
    Scenario::from_config(&cfg).unwrap()
}

#[test]
fn runs_are_seed_reproducible() {
    let s = small("worm_excised", 12, 0);
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&s).unwrap();
    assert_eq!(a, b);

    let mut other = s.clone();
    other.seed += 1;
    let c = run_scenario(&other).unwrap();
    assert_ne!(a.averaged, c.averaged);
    assert_eq!(a.true_field, c.true_field);
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let s = small("worm_whole", 40, 0);
    let parallel = run_scenario(&s).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let serial = pool.install(|| run_scenario(&s)).unwrap();
    assert_eq!(parallel, serial);
}

#[test]
fn jittered_trials_are_realigned() {
    let mut s = small("worm_whole", 4, 0);
    s.chain = s.chain.without_noise();
    let src = TrialSource::new(&s).unwrap();
    let (f0, _) = src.source(0).unwrap();
    let (f1, _) = src.source(1).unwrap();
    assert_ne!(f0, f1, "jitter should move the AP between trials");
    let a = src.trial(0).unwrap().unwrap();
    let b = src.trial(1).unwrap().unwrap();
    let peak = |t: &nvmag::Trace| {
        (0..t.len())
            .max_by(|&i, &j| t.samples()[i].total_cmp(&t.samples()[j]))
            .unwrap()
    };
    assert!((peak(&a) as i64 - peak(&b) as i64).abs() <= 1);
}

#[test]
fn emitted_traces_reload_to_the_same_report() {
    let s = small("worm_excised", 10, 40);
    let bundle = run_scenario(&s).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_bundle(dir.path(), &bundle).unwrap();

    let (name, filtered) = trace_io::read_trace(&dir.path().join("filtered.csv")).unwrap();
    assert_eq!(name, "filtered");
    assert_eq!(filtered, bundle.filtered);
    let (_, template) = trace_io::read_trace(&dir.path().join("template.csv")).unwrap();
    let template = template_from_trace(&template).unwrap();
    assert_eq!(
        template.samples(),
        bundle.template.as_ref().unwrap().template.samples()
    );

    let w = Windows::of(&s);
    let original = analyze(
        &bundle.filtered,
        Some(&bundle.template.as_ref().unwrap().template),
        &w,
    )
    .unwrap();
    let reloaded = analyze(&filtered, Some(&template), &w).unwrap();
    assert_eq!(original, reloaded);
}

#[test]
fn config_errors_carry_positions() {
    let mut text = builtin("squid_excised").unwrap().to_toml();
    let line = text.lines().count() + 2;
    text.push_str("\n[noise]\n");
    match ScenarioConfig::from_toml(&text, "dup.toml") {
        Err(CliError::Parse {
            line: l,
            source_name,
            ..
        }) => {
            assert_eq!(source_name, "dup.toml");
            assert!(l >= line - 1, "{l} vs {line}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn checks_pass() {
    assert!(run_checks().unwrap().iter().all(|r| r.passed));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_nvmag");
    let ok = Command::new(bin)
        .args(["dump-builtin", "worm_excised"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert_eq!(
        ScenarioConfig::from_toml(&text, "stdout").unwrap(),
        builtin("worm_excised").unwrap()
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, text.replace("n_avg = 150", "n_avg = \"many\"")).unwrap();
    let out = Command::new(bin)
        .arg("simulate")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bad.toml:"), "{stderr}");

    let unknown = Command::new(bin)
        .args(["simulate", "zebrafish"])
        .output()
        .unwrap();
    assert_eq!(unknown.status.code(), Some(EXIT_CONFIG));

    let checks = Command::new(bin)
        .args(["--format", "json", "checks"])
        .output()
        .unwrap();
    assert_eq!(checks.status.code(), Some(EXIT_OK));
    let v: serde_json::Value = serde_json::from_slice(&checks.stdout).unwrap();
    assert_eq!(v["passed"], serde_json::Value::Bool(true));
}

#[test]
fn reference_numbers_are_within_bounds() {
    for r in nvmag_cli::reproduction::reproduction_table().unwrap() {
        assert!(
            r.within(),
            "{} = {:e} outside {:?}",
            r.quantity,
            r.value,
            r.bounds
        );
    }
}
