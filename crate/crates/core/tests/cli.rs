//! Command-line behaviour: outputs, determinism and exit codes.

use std::path::PathBuf;

use pweyl::cli::{
    run_with, CheckSummary, EXIT_DEGENERATE, EXIT_PASS, EXIT_UNSUPPORTED, EXIT_VIOLATION,
};
use pweyl::packing::Packing;
use pweyl::spectrum::{Exactness, Spectrum};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let full = std::iter::once("pweyl").chain(args.iter().copied());
    let code = run_with(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn spectrum_of_the_unit_interval() {
    let dom = data("unit-interval.json");
    let (code, out, _) = run(&[
        "spectrum",
        "--domain",
        &dom,
        "--p",
        "3",
        "--lambda-max",
        "1000",
    ]);
    assert_eq!(code, EXIT_PASS);
    let s = Spectrum::from_json(&out).unwrap();
    assert_eq!(s.exactness, Exactness::Exact);
    assert!(s.eigenvalues.iter().all(|&(v, m)| v < 1000.0 && m == 1));
    assert!(!s.is_empty());
}

#[test]
fn sweeps_are_deterministic_for_a_seed() {
    let args = ["check", "cutoff", "--sweep", "40", "--seed", "9"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (EXIT_PASS, EXIT_PASS));
    assert_eq!(a, b);
    let other = run(&["check", "cutoff", "--sweep", "40", "--seed", "10"]).1;
    assert_ne!(a, other);
    let summary: CheckSummary = serde_json::from_str(&a).unwrap();
    assert!(summary.passed);
    assert_eq!(summary.sweeps[0].instances, 40);
}

#[test]
fn non_quadratic_spectrum_needs_first_eigenvalue_flag() {
    let dom = data("lshape.json");
    let (code, _, err) = run(&[
        "spectrum",
        "--domain",
        &dom,
        "--p",
        "3",
        "--lambda-max",
        "100",
    ]);
    assert_eq!(code, EXIT_UNSUPPORTED);
    assert!(err.contains("--first-eigenvalue"), "{err}");
    let (code, out, _) = run(&[
        "spectrum",
        "--domain",
        &dom,
        "--p",
        "3",
        "--first-eigenvalue",
        "--h",
        "0.25",
    ]);
    assert_eq!(code, EXIT_PASS);
    let s = Spectrum::from_json(&out).unwrap();
    assert_eq!(s.exactness, Exactness::Discrete);
    assert_eq!(s.eigenvalues.len(), 1);
}

#[test]
fn short_lambda_range_is_degenerate() {
    let dom = data("unit-square.json");
    let (code, _, err) = run(&[
        "weyl",
        "--domain",
        &dom,
        "--lambda-min",
        "1",
        "--lambda-max",
        "2",
    ]);
    assert_eq!(code, EXIT_DEGENERATE, "{err}");
}

#[test]
fn failed_comparison_exits_with_violation() {
    let dom = data("unit-square.json");
    let (code, out, _) = run(&[
        "check",
        "constant-equality",
        "--domain",
        &dom,
        "--lambda-max",
        "1e4",
        "--tol",
        "1e-9",
    ]);
    assert_eq!(code, EXIT_VIOLATION);
    let summary: CheckSummary = serde_json::from_str(&out).unwrap();
    assert!(!summary.passed);
}

#[test]
fn invalid_arguments_exit_with_two() {
    assert_eq!(run(&["spectrum"]).0, EXIT_UNSUPPORTED);
    assert_eq!(run(&["check", "no-such-statement"]).0, EXIT_UNSUPPORTED);
    let dom = data("torus2.json");
    assert_eq!(
        run(&["sandwich", "--domain", &dom, "--lambda-max", "1e4"]).0,
        EXIT_UNSUPPORTED
    );
    let dom = data("unit-interval.json");
    assert_eq!(
        run(&[
            "spectrum",
            "--domain",
            &dom,
            "--p",
            "0.5",
            "--lambda-max",
            "10"
        ])
        .0,
        EXIT_UNSUPPORTED
    );
}

#[test]
fn pack_writes_a_valid_packing_file() {
    let dir = std::env::temp_dir().join(format!("pweyl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("cover.json");
    let dom = data("lshape.json");
    let (code, out, err) = run(&[
        "pack",
        "--domain",
        &dom,
        "--k",
        "2",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_PASS, "{err}");
    assert!(out.is_empty());
    let pk = Packing::from_json(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(pk.items.len(), 12);

    // a cover of the unit square feeds back into the Neumann check
    let sq = data("unit-square.json");
    let target = dir.join("square.json");
    let t = target.to_str().unwrap();
    assert_eq!(
        run(&["pack", "--domain", &sq, "--k", "3", "--out", t]).0,
        EXIT_PASS
    );
    let (code, out, _) = run(&["check", "ndm", "--packing", t, "--lambda-max", "1e3"]);
    assert_eq!(code, EXIT_PASS);
    let summary: CheckSummary = serde_json::from_str(&out).unwrap();
    assert!(summary.reports[0].passed());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = std::env::temp_dir().join(format!("pweyl-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    let dom = data("unit-interval.json");
    std::fs::write(
        &cfg,
        serde_json::json!({"domain": dom, "p": 2.0, "lambda_max": 100.0}).to_string(),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = Spectrum::from_json(&run(&["--config", c, "spectrum"]).1).unwrap();
    assert_eq!(from_file.p, 2.0);
    let overridden = Spectrum::from_json(&run(&["--config", c, "spectrum", "--p", "4"]).1).unwrap();
    assert_eq!(overridden.p, 4.0);

    std::fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(run(&["--config", c, "spectrum"]).0, EXIT_UNSUPPORTED);
    std::fs::remove_dir_all(&dir).unwrap();
}

/// Parses an output and re-emits it in the CLI's own format.
fn reemit<T: serde::Serialize + serde::de::DeserializeOwned>(out: &str) -> String {
    let v: T = serde_json::from_str(out).unwrap();
    serde_json::to_string_pretty(&v).unwrap() + "\n"
}

#[test]
fn outputs_round_trip_byte_for_byte() {
    let dom = data("unit-square.json");
    let (_, out, _) = run(&["spectrum", "--domain", &dom, "--lambda-max", "2000"]);
    assert_eq!(reemit::<Spectrum>(&out), out);
    let (_, out, _) = run(&["check", "ddm", "--sweep", "5", "--seed", "3"]);
    assert_eq!(reemit::<CheckSummary>(&out), out);
    let (_, out, _) = run(&["check", "friedlander", "--domain", &dom]);
    assert_eq!(reemit::<CheckSummary>(&out), out);
    let (_, out, _) = run(&[
        "sandwich",
        "--domain",
        &data("lshape.json"),
        "--lambda-max",
        "1e4",
    ]);
    assert_eq!(reemit::<pweyl::weyl::Sandwich>(&out), out);
    let (_, out, _) = run(&["pack", "--domain", &dom, "--eps", "0.01"]);
    assert_eq!(
        Packing::from_json(&out).unwrap().to_json().unwrap() + "\n",
        out
    );
}
