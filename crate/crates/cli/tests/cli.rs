//! End-to-end runs of the binary: exit codes, artifact files, and the
//! machine-readable error JSON.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specshatter"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout was not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn analyze_jordan_reports_sqrt2_kappas() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "jordan.txt", "2 2\n0 1\n0 1\n");
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["analyze", "--matrix"])
        .arg(&matrix)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = stdout_json(&out);
    let kappas = body["kappas"].as_array().unwrap();
    let sqrt2 = 2f64.sqrt();
    for k in kappas {
        assert!((k.as_f64().unwrap() - sqrt2).abs() < 1e-8);
    }
    assert!((body["kappa_v_upper"].as_f64().unwrap() - (1.0 + sqrt2)).abs() < 1e-8);
    // artifact exists and parses
    let written: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("analysis.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(written["kappas"], body["kappas"]);
}

#[test]
fn analyze_with_submatrix_flag() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "id4.txt", "4 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
    let out = bin()
        .args(["analyze", "--matrix"])
        .arg(&matrix)
        .args(["--submatrix", "2", "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let body = stdout_json(&out);
    assert!((body["submatrix"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((body["submatrix"]["bound"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn sv_tail_edelman_all_pass_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "edelman.json",
        r#"{
  "ensemble": {"n": 10, "family": "real_ginibre", "gamma": 1.0},
  "z": [0.0, 0.0], "k": 1,
  "eps_grid": [0.1, 0.0599, 0.0359, 0.0215, 0.0129, 0.0077, 0.0046, 0.0028, 0.0017, 0.001],
  "trials": 100000, "seed": 38, "bound": "real_shift_gaussian"
}"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["verify", "sv-tail", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("sv_tail.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",pass") || line.ends_with(",pass_vacuous"), "{line}");
        rows += 1;
    }
    assert_eq!(rows, 10);
    // metadata embeds seed and config hash
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("sv_tail.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["seed"].as_u64(), Some(38));
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    assert!(out_dir.join("sv_tail.svg").exists());
}

#[test]
fn malformed_config_exits_one_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{ not json");
    let out = bin()
        .args(["verify", "sv-tail", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let body = stdout_json(&out);
    assert_eq!(body["error"].as_str(), Some("parse"));
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "noseed.json",
        r#"{"ensemble": {"n": 4, "family": "real_ginibre", "gamma": 1.0},
            "z": [0.0, 0.0], "k": 1, "eps_grid": [0.1, 0.01],
            "trials": 1000, "bound": "real_shift_gaussian"}"#,
    );
    let out = bin()
        .args(["verify", "sv-tail", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env_remove("SPECSHATTER_SEED")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // the env fallback unblocks it
    let out = bin()
        .args(["verify", "sv-tail", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out2"))
        .env("SPECSHATTER_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out2").join("sv_tail.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["seed"].as_u64(), Some(99));
}

#[test]
fn falsified_bound_exits_two() {
    // shrinking C_RV makes the Assumption-1 bound impossibly small: the run
    // must report the falsification through exit code 2
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "doomed.json",
        r#"{"ensemble": {"n": 6, "family": "uniform", "gamma": 1.0},
            "z": [0.0, 0.0], "k": 1, "eps_grid": [0.2, 0.1],
            "trials": 2000, "seed": 5, "bound": "real_shift_general"}"#,
    );
    let constants = write(
        dir.path(),
        "tiny.json",
        r#"{"c_rv": 1e-9, "c_thm14": null, "c_gap": null, "note": "falsification drill"}"#,
    );
    let out = bin()
        .args(["verify", "sv-tail", "--config"])
        .arg(&cfg)
        .arg("--constants")
        .arg(&constants)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn report_loglog_emits_slope_annotation() {
    let dir = tempfile::tempdir().unwrap();
    // synthetic eps^2 data
    let mut csv = String::from("eps,empirical,band,theoretical,verdict\n");
    for &eps in &[1e-1f64, 3e-2, 1e-2, 3e-3, 1e-3] {
        csv.push_str(&format!("{},{},{},{},pass\n", eps, eps * eps, 1e-4, (2.0 * eps * eps).min(1.0)));
    }
    let input = write(dir.path(), "synthetic.csv", &csv);
    let svg_path = dir.path().join("plot.svg");
    let out = bin()
        .args(["report", "--input"])
        .arg(&input)
        .args(["--kind", "loglog", "--out-file"])
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("slope=2.00"), "svg missing slope annotation");

    // empty report errors
    let empty = write(dir.path(), "empty.csv", "eps,empirical,band,theoretical,verdict\n");
    let out = bin()
        .args(["report", "--input"])
        .arg(&empty)
        .args(["--kind", "loglog", "--out-file"])
        .arg(dir.path().join("empty.svg"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pseudospec_grid_then_grid_plot_marks_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "grid.json",
        r#"{"mode": "grid",
            "matrix": [[0.0, -1.0], [1.0, 0.0]],
            "region": {"x0": -2.0, "x1": 2.0, "y0": -2.0, "y1": 2.0},
            "nx": 40, "ny": 40, "svg": false}"#,
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["pseudospec", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // re-plot from the emitted files
    let svg_path = dir.path().join("grid.svg");
    let out = bin()
        .args(["report", "--input"])
        .arg(out_dir.join("grid.csv"))
        .args(["--kind", "grid", "--sidecar"])
        .arg(out_dir.join("grid.meta.json"))
        .arg("--out-file")
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    // two eigenvalue markers at +-i: circles at the mapped coordinates
    assert_eq!(svg.matches("<circle").count(), 2);
    // the rotation spectrum is {+i, -i}: both markers sit on the vertical
    // center line of the plot area
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("grid.meta.json")).unwrap(),
    )
    .unwrap();
    let eigs = meta["report"]["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 2);
    for e in eigs {
        assert!(e[0].as_f64().unwrap().abs() < 1e-9);
        assert!((e[1].as_f64().unwrap().abs() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn dominance_and_resolvent_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dom.json",
        r#"{"a1": [[0,0],[0,0],[0,0],[0,0]],
            "a2": [[1,0],[0,1],[0,0],[0,0]],
            "t": 1.0, "trials": 2000, "seed": 12}"#,
    );
    let out = bin()
        .args(["verify", "dominance", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("dom"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = write(
        dir.path(),
        "res.json",
        r#"{"trials": 100, "seed": 3, "n_max": 8, "k_max": 2}"#,
    );
    let out = bin()
        .args(["verify", "resolvent", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("res"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let body: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("res").join("resolvent.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(body["report"]["m11_invariant"].as_bool(), Some(true));
    assert!(body["report"]["convention"].as_str().unwrap().contains("M -> -M"));
}

#[test]
fn remaining_verify_subcommands_smoke() {
    let dir = tempfile::tempdir().unwrap();

    let gap_cfg = write(
        dir.path(),
        "gap.json",
        r#"{"ensemble": {"n": 6, "family": "real_ginibre", "gamma": 0.5},
            "s_grid": [0.1, 0.03, 0.01], "trials": 1000, "seed": 4}"#,
    );
    let out = bin()
        .args(["verify", "gap", "--config"])
        .arg(&gap_cfg)
        .arg("--out")
        .arg(dir.path().join("gap"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("gap").join("gap.csv").exists());
    assert!(dir.path().join("gap").join("im_min.csv").exists());

    let kappa_cfg = write(
        dir.path(),
        "kappa.json",
        r#"{"ensemble": {"n": 8, "family": "real_ginibre", "gamma": 0.5},
            "omega_real": [-2.0, 2.0],
            "omega_complex": {"x0": -2.0, "x1": 2.0, "y_min": 0.1, "y_max": 2.0},
            "trials": 200, "seed": 4}"#,
    );
    let out = bin()
        .args(["verify", "kappa", "--config"])
        .arg(&kappa_cfg)
        .arg("--out")
        .arg(dir.path().join("kappa"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let sb_cfg = write(
        dir.path(),
        "sb.json",
        r#"{"z": {"identity": 30}, "k": 1, "trials": 20000, "seed": 4,
            "rect": {"n": 10, "k": 1, "j": 3, "s_grid": [0.5, 0.35, 0.25], "trials": 20000}}"#,
    );
    let out = bin()
        .args(["verify", "smallball", "--config"])
        .arg(&sb_cfg)
        .arg("--out")
        .arg(dir.path().join("sb"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sb").join("rect_smallball.csv").exists());

    let mom_cfg = write(
        dir.path(),
        "mom.json",
        r#"{"ensemble": {"n": 10, "family": "real_ginibre", "gamma": 1.0},
            "p_list": [1, 4], "trials": 300, "seed": 4}"#,
    );
    let out = bin()
        .args(["verify", "moments", "--config"])
        .arg(&mom_cfg)
        .arg("--out")
        .arg(dir.path().join("mom"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let ri_cfg = write(
        dir.path(),
        "ri.json",
        r#"{"n": 2, "r_list": [2], "pairs": 5, "seed": 4,
            "region": {"x0": -1.5, "x1": 1.5, "y0": -1.5, "y1": 1.5}, "nx": 8, "ny": 8}"#,
    );
    let out = bin()
        .args(["verify", "rank-inclusion", "--config"])
        .arg(&ri_cfg)
        .arg("--out")
        .arg(dir.path().join("ri"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let body: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("ri").join("rank_inclusion.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(body["report"]["holds"].as_bool(), Some(true));
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "rep.json",
        r#"{"ensemble": {"n": 6, "family": "real_ginibre", "gamma": 1.0},
            "z": [0.0, 0.0], "k": 1, "eps_grid": [0.1, 0.03, 0.01],
            "trials": 5000, "seed": 7, "bound": "real_shift_gaussian"}"#,
    );
    let mut outputs = vec![];
    for (sub, threads) in [("a", "1"), ("b", "8")] {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .args(["verify", "sv-tail", "--config"])
            .arg(&cfg)
            .args(["--threads", threads, "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        outputs.push((
            std::fs::read(out_dir.join("sv_tail.csv")).unwrap(),
            std::fs::read(out_dir.join("sv_tail.svg")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "CSV bytes differ across thread counts");
    assert_eq!(outputs[0].1, outputs[1].1, "SVG bytes differ across thread counts");
}
