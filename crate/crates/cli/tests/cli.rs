//! End-to-end tests of the qchaos binary: every documented command line is
//! executed here, plus the failure modes behind each exit code.

use std::f64::consts::LN_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qchaos_core::make_initial_rho0;
use serde_json::Value;

fn qchaos(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchaos"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).expect("file exists")).expect("valid JSON")
}

#[test]
fn no_arguments_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(dir.path(), &[]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("Usage"), "usage text expected, got: {text}");
}

#[test]
fn help_exits_zero_and_shows_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(dir.path(), &["julia", "--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for expected in [
        "[default: 1e-6]",
        "[default: 500]",
        "[default: 0]",
        "[default: 2]",
        "[default: 400x400]",
    ] {
        assert!(text.contains(expected), "missing {expected} in:\n{text}");
    }
    assert_eq!(code(&qchaos(dir.path(), &["--help"])), 0);
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["julia", "--p", "0.293pi", "--out", "x.pgm"][..],
        &["julia", "--p", "1", "--size", "400", "--out", "x.pgm"],
        &["julia", "--p", "1", "--size", "0x4", "--out", "x.pgm"],
        &["orbit", "--p", "1", "--z0", "1+i", "--n", "1"],
        &["orbit", "--p", "inf", "--z0", "0", "--n", "1"],
        &["purify", "--x1", "quarter", "--phi1", "0", "--x2", "0", "--phi2", "0", "--steps", "1", "--out", "t.csv"],
    ] {
        let out = qchaos(dir.path(), args);
        assert_eq!(code(&out), 1, "args {args:?} should be a usage error");
    }
}

#[test]
fn julia_default_render_writes_pgm_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &["julia", "--p", "1", "--size", "400x400", "--out", "j.pgm"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let pgm = fs::read(dir.path().join("j.pgm")).expect("image written");
    let header = b"P5\n400 400\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(pgm.len(), header.len() + 400 * 400);

    let sidecar = read_json(&dir.path().join("j.pgm.json"));
    assert_eq!(sidecar["command"], "julia");
    assert_eq!(sidecar["p"], serde_json::json!([1.0, 0.0]));
    assert_eq!(sidecar["center"], serde_json::json!([0.0, 0.0]));
    assert_eq!(sidecar["half_width"], 2.0);
    assert_eq!(sidecar["eps"], 1e-6);
    assert_eq!(sidecar["max_iter"], 500);
    assert_eq!(sidecar["gamma"], 1.0);
    assert_eq!(sidecar["size"], serde_json::json!([400, 400]));
}

#[test]
fn julia_three_pixel_strip_has_exact_bytes() {
    // Pixel centers land exactly on -1 (on the cycle, 0 steps), 0 (2 steps),
    // and 1 (1 step); shading rounds 254 * steps / 500.
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &[
            "julia", "--p", "1", "--size", "3x1", "--half-width", "1.5", "--out", "strip.pgm",
        ],
    );
    assert_eq!(code(&out), 0);
    let pgm = fs::read(dir.path().join("strip.pgm")).expect("image written");
    let mut expected = b"P5\n3 1\n255\n".to_vec();
    expected.extend_from_slice(&[0, 1, 1]);
    assert_eq!(pgm, expected);
}

#[test]
fn julia_output_bytes_ignore_thread_count_and_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let base = &["julia", "--p", "1+0.5i", "--size", "64x64", "--max-iter", "600"];
    for (threads, name) in [("1", "a.pgm"), ("7", "b.pgm"), ("7", "c.pgm")] {
        let mut args = base.to_vec();
        args.extend_from_slice(&["--threads", threads, "--out", name]);
        assert_eq!(code(&qchaos(dir.path(), &args)), 0);
    }
    let a = fs::read(dir.path().join("a.pgm")).unwrap();
    let b = fs::read(dir.path().join("b.pgm")).unwrap();
    let c = fs::read(dir.path().join("c.pgm")).unwrap();
    assert_eq!(a, b, "1 vs 7 workers changed the image");
    assert_eq!(b, c, "re-run changed the image");
    // Sidecars differ only in the output name, never in the worker count.
    let mut sa = read_json(&dir.path().join("a.pgm.json"));
    let sb = read_json(&dir.path().join("b.pgm.json"));
    sa["out"] = sb["out"].clone();
    assert_eq!(sa, sb);
}

#[test]
fn julia_dump_grid_emits_per_pixel_steps() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &[
            "julia", "--p", "1", "--size", "8x8", "--out", "j.pgm", "--dump-grid", "grid.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let grid = read_json(&dir.path().join("grid.json"));
    assert_eq!(grid["width_px"], 8);
    assert_eq!(grid["height_px"], 8);
    let steps = grid["steps"].as_array().expect("steps array");
    assert_eq!(steps.len(), 64);
    assert!(steps.iter().all(|s| s.is_null() || s.is_u64()));
    assert!(steps.iter().any(|s| s.is_u64()), "render cannot be all-divergent");
    assert!(dir.path().join("grid.json.json").is_file(), "dump sidecar");
}

#[test]
fn orbit_zero_to_infinity_in_two_steps() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(dir.path(), &["orbit", "--p", "1", "--z0", "0", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let record = stdout_json(&out);
    assert_eq!(
        record["points"],
        serde_json::json!([[0.0, 0.0], [1.0, 0.0], "inf"])
    );
    assert_eq!(record["escaped_to_cycle"], 0);
    assert_eq!(record["steps_to_converge"], 2);
}

#[test]
fn orbit_accepts_the_infinite_start() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(dir.path(), &["orbit", "--p", "1", "--z0", "inf", "--n", "1"]);
    assert_eq!(code(&out), 0);
    let record = stdout_json(&out);
    let points = record["points"].as_array().unwrap();
    assert_eq!(points[0], "inf");
    assert_eq!(points[1][0].as_f64().unwrap(), -1.0);
    assert_eq!(points[1][1].as_f64().unwrap(), 0.0);
    assert_eq!(record["steps_to_converge"], 0, "starts on the cycle");
}

#[test]
fn cycles_for_the_two_reference_parameters() {
    let dir = tempfile::tempdir().unwrap();

    let out = qchaos(dir.path(), &["cycles", "--p", "1"]);
    assert_eq!(code(&out), 0);
    let cycles = stdout_json(&out);
    let list = cycles.as_array().expect("array of cycles");
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["period"], 2);
    assert_eq!(list[0]["multiplier_magnitude"], 0.0);
    assert_eq!(list[0]["points"][0][0].as_f64().unwrap(), -1.0);
    assert_eq!(list[0]["points"][1], "inf");

    let out = qchaos(dir.path(), &["cycles", "--p", "0.5"]);
    assert_eq!(code(&out), 0);
    let cycles = stdout_json(&out);
    let list = cycles.as_array().expect("array of cycles");
    assert_eq!(list.len(), 1, "one attracting cycle");
    assert_eq!(list[0]["period"], 1, "of length 1");
    let z = list[0]["points"][0][0].as_f64().unwrap();
    assert!((z - -2.8311772072083388).abs() < 1e-9, "fixed point at {z}");
    assert!(list[0]["multiplier_magnitude"].as_f64().unwrap() < 1.0);
}

#[test]
fn cycles_exit_three_when_the_budget_is_too_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(dir.path(), &["cycles", "--p", "1", "--max-iter", "1"]);
    assert_eq!(code(&out), 3);
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("no attracting cycle"), "stderr: {text}");
}

#[test]
fn lyapunov_on_the_doubling_circle_gives_ln_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &["lyapunov", "--p", "0", "--circle-theta0", "1", "--n", "100000"],
    );
    assert_eq!(code(&out), 0);
    let est = stdout_json(&out);
    let lambda = est["lambda"].as_f64().unwrap();
    assert!((lambda - LN_2).abs() <= 0.01, "lambda = {lambda}");
    assert_eq!(est["clamped"], false);
}

#[test]
fn lyapunov_inside_a_basin_is_negative_and_clamped() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &["lyapunov", "--p", "1", "--z0", "2", "--n", "200"],
    );
    assert_eq!(code(&out), 0);
    let est = stdout_json(&out);
    assert!(est["lambda"].as_f64().unwrap() < 0.0);
    assert_eq!(est["clamped"], true, "orbit hits a critical point exactly");
}

#[test]
fn lyapunov_start_flags_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let wrong_p = qchaos(dir.path(), &["lyapunov", "--p", "1", "--circle-theta0", "1"]);
    assert_eq!(code(&wrong_p), 1, "circle orbit demands p = 0");
    let neither = qchaos(dir.path(), &["lyapunov", "--p", "0"]);
    assert_eq!(code(&neither), 1);
    let both = qchaos(
        dir.path(),
        &["lyapunov", "--p", "0", "--z0", "1", "--circle-theta0", "1"],
    );
    assert_eq!(code(&both), 1);
}

#[test]
fn purify_reference_run_purifies_even_steps() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &[
            "purify", "--x1", "0.25pi", "--x2", "0.25pi", "--phi1", "0.5pi", "--phi2", "0.5pi",
            "--rho0", "paper", "--steps", "40", "--out", "t.csv",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.path().join("t.csv")).expect("trajectory written");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,fidelity,purity,success_probability");
    assert_eq!(lines.len(), 42, "header plus steps 0..=40");
    assert_eq!(lines[1], "0,0.895,0.81105,1");
    assert!(!csv.contains('\r'), "LF line endings only");

    let fidelity_of = |line: &str| -> f64 { line.split(',').nth(1).unwrap().parse().unwrap() };
    assert!(fidelity_of(lines[41]) > 1.0 - 1e-6, "step 40 near the target");
    for step in (1..=39).step_by(2) {
        let f = fidelity_of(lines[1 + step]);
        assert!(f < 0.1, "odd step {step} has fidelity {f}");
    }

    let sidecar = read_json(&dir.path().join("t.csv.json"));
    assert_eq!(sidecar["command"], "purify");
    assert_eq!(sidecar["x1"], std::f64::consts::FRAC_PI_4);
    assert_eq!(sidecar["phi1"], std::f64::consts::FRAC_PI_2);
    assert_eq!(sidecar["rho0"], "paper");
    assert_eq!(sidecar["target"], "bell");
    assert_eq!(sidecar["steps"], 40);
}

#[test]
fn purify_chaotic_angles_complete_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &[
            "purify", "--x1", "0.293pi", "--x2", "0.293pi", "--phi1", "0.5pi", "--phi2", "0.5pi",
            "--steps", "200", "--out", "chaos.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("chaos.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 202);
    for line in &lines[1..] {
        let f: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((-1e-12..=1.0 + 1e-12).contains(&f), "fidelity {f} out of range");
    }
}

#[test]
fn purify_loads_a_density_matrix_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho0.json");
    fs::write(
        &path,
        serde_json::to_string(&make_initial_rho0()).expect("serializable"),
    )
    .unwrap();
    let common = [
        "--x1", "0.25pi", "--x2", "0.25pi", "--phi1", "0.5pi", "--phi2", "0.5pi", "--steps", "12",
    ];

    let mut from_file = vec!["purify", "--rho0", "rho0.json"];
    from_file.extend_from_slice(&common);
    from_file.extend_from_slice(&["--out", "file.csv"]);
    assert_eq!(code(&qchaos(dir.path(), &from_file)), 0);

    let mut builtin = vec!["purify", "--rho0", "paper"];
    builtin.extend_from_slice(&common);
    builtin.extend_from_slice(&["--out", "builtin.csv"]);
    assert_eq!(code(&qchaos(dir.path(), &builtin)), 0);

    let a = fs::read(dir.path().join("file.csv")).unwrap();
    let b = fs::read(dir.path().join("builtin.csv")).unwrap();
    assert_eq!(a, b, "the JSON round trip must not change the trajectory");
}

#[test]
fn purify_rejects_bad_initial_states() {
    let dir = tempfile::tempdir().unwrap();
    let run = |rho0: &str| {
        code(&qchaos(
            dir.path(),
            &[
                "purify", "--x1", "0", "--phi1", "0", "--x2", "0", "--phi2", "0", "--rho0", rho0,
                "--steps", "1", "--out", "t.csv",
            ],
        ))
    };

    assert_eq!(run("missing.json"), 1, "absent file");

    fs::write(dir.path().join("broken.json"), "{\"dim\": 4").unwrap();
    assert_eq!(run("broken.json"), 1, "malformed JSON");

    // Trace 2: a well-formed payload that fails state validation.
    fs::write(
        dir.path().join("trace.json"),
        r#"{"dim":2,"entries":[[2,0],[0,0],[0,0],[0,0]]}"#,
    )
    .unwrap();
    assert_eq!(run("trace.json"), 1, "invalid state");

    // A valid single-qubit state: wrong dimension for the 2-qubit protocol.
    fs::write(
        dir.path().join("qubit.json"),
        r#"{"dim":2,"entries":[[1,0],[0,0],[0,0],[0,0]]}"#,
    )
    .unwrap();
    assert_eq!(run("qubit.json"), 1, "dimension mismatch");

    assert_eq!(run("paper"), 0, "control: the builtin state works");
}

#[test]
fn purify_rejects_unknown_targets() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchaos(
        dir.path(),
        &[
            "purify", "--x1", "0", "--phi1", "0", "--x2", "0", "--phi2", "0", "--target", "ghz",
            "--steps", "1", "--out", "t.csv",
        ],
    );
    assert_eq!(code(&out), 1);
}
