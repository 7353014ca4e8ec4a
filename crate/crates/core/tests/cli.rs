//! End-to-end tests of the command-line binary: exit-code contract,
//! output determinism, CSV round-tripping and the figure bundles.

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cmcprod"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "cmcprod-test-{tag}-{}-{}",
        std::process::id(),
        std::thread::current().name().unwrap_or("t").replace("::", "-")
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().expect("numeric field"))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn generate_sphere_csv_shape_and_height() {
    let out = run(&[
        "generate",
        "--family",
        "rot-sphere-h2",
        "--mean-curvature",
        "0.7",
        "--samples",
        "256",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["param", "base_arclength", "h", "nu", "h_num"]);
    assert_eq!(rows.len(), 256);
    // height column peaks at alpha(-1, 0.7, 0)
    let alpha = 2.273_624_819_536_433_3f64;
    let hmax = rows.iter().map(|r| r[2]).fold(f64::MIN, f64::max);
    assert!((hmax - alpha).abs() < 1e-3, "peak {hmax}");
    // mean-curvature column stays at H
    for r in &rows {
        assert!((r[4] - 0.7).abs() < 1e-6);
    }
}

#[test]
fn generate_csv_round_trips_at_17_digits() {
    let out = run(&[
        "generate",
        "--family",
        "rot-torus-s2",
        "--mean-curvature",
        "1.0",
        "--samples",
        "32",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let x: f64 = field.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), field, "field {field} not canonical");
        }
    }
}

#[test]
fn generate_parabolic_metadata_and_drift() {
    let out = run(&[
        "generate",
        "--family",
        "parabolic",
        "--mean-curvature",
        "1",
        "--samples",
        "128",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["metadata"]["is_bigraph"], serde_json::Value::Bool(false));
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 128);
    // the height column drifts: strictly lower at each successive
    // half-period boundary
    let period = 2.0 * std::f64::consts::PI / 3f64.sqrt();
    let h_at = |t: f64| -> f64 {
        samples
            .iter()
            .map(|s| {
                let p = s["param"].as_f64().unwrap();
                (p, s["h"].as_f64().unwrap())
            })
            .min_by(|a, b| {
                ((a.0 - t).abs()).partial_cmp(&(b.0 - t).abs()).unwrap()
            })
            .unwrap()
            .1
    };
    let h0 = h_at(0.0);
    let h1 = h_at(period / 2.0);
    let h2 = h_at(period);
    assert!(h0 > h1 && h1 > h2, "no monotone drift: {h0} {h1} {h2}");
}

#[test]
fn generate_rejects_invalid_mean_curvature() {
    let out = run(&[
        "generate",
        "--family",
        "rot-torus-s2",
        "--mean-curvature",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn no_solution_is_a_numerical_failure() {
    let out = run(&[
        "generate",
        "--family",
        "rot-general-s2",
        "--c0",
        "5",
        "--mean-curvature",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_cylinder_and_sphere_pass_with_expected_kappa() {
    for (family, expected) in [("hyp-cylinder", -0.5), ("rot-sphere-s2", -0.75)] {
        let out = run(&[
            "verify",
            "--family",
            family,
            "--mean-curvature",
            "1",
            "--grid",
            "20",
        ]);
        assert_eq!(out.status.code(), Some(0), "{family} failed");
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["pass"], serde_json::Value::Bool(true));
        let checks = v["checks"].as_array().unwrap();
        let kappa = checks
            .iter()
            .find(|c| c["name"] == "boundary_kappa")
            .expect("boundary_kappa check");
        assert_eq!(kappa["expected"].as_f64().unwrap(), expected);
        assert_eq!(kappa["pass"], serde_json::Value::Bool(true));
    }
}

#[test]
fn verify_unreachable_tolerance_fails_but_writes_report() {
    let dir = tmp_dir("verify-fail");
    let report_path = dir.join("report.json");
    let out = run(&[
        "verify",
        "--family",
        "euclidean-sphere",
        "--mean-curvature",
        "1",
        "--grid",
        "16",
        "--tolerance",
        "1e-20",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(false));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn verify_report_is_deterministic_outside_timings() {
    let args = [
        "verify",
        "--family",
        "euclidean-cylinder",
        "--mean-curvature",
        "0.8",
        "--grid",
        "16",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let strip = |s: &str| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let va = strip(&stdout(&a));
    let vb = strip(&stdout(&b));
    assert_eq!(
        serde_json::to_string(&va).unwrap(),
        serde_json::to_string(&vb).unwrap()
    );
}

#[test]
fn generate_is_byte_deterministic() {
    let args = [
        "generate",
        "--family",
        "hyp-cylinder",
        "--mean-curvature",
        "0.9",
        "--samples",
        "64",
        "--format",
        "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn bounds_examples() {
    let out = run(&[
        "bounds", "-c", "1", "-H", "1", "--nu0", "0", "-m", "0.5", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["kappa_lower_height"].as_f64().unwrap(), 0.5);
    assert_eq!(v["kappa_lower_general"].as_f64().unwrap(), -0.75);

    let out = run(&[
        "bounds", "-c", "0", "-H", "1", "--nu0", "0", "--height", "1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let d = v["distance_lower_bound"].as_f64().unwrap();
    assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-10);

    // standing hypothesis 4H^2 + c > 0 violated
    let out = run(&["bounds", "-c", "-4", "-H", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_human_format_rounds_to_six_digits() {
    let out = run(&["bounds", "-c", "1", "-H", "1", "--nu0", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("alpha_max            = 0.860818"), "{text}");
    assert!(text.contains("kappa_lower_general  = -0.750000"));
}

#[test]
fn figures_bundles_and_metadata() {
    let dir = tmp_dir("figures");
    let out = run(&["figures", "--output-dir", dir.to_str().unwrap(), "--samples", "128"]);
    assert_eq!(out.status.code(), Some(0));

    let load = |name: &str| -> (Vec<String>, Vec<Vec<f64>>) {
        parse_csv(&std::fs::read_to_string(dir.join(name)).unwrap())
    };
    let (h1, sph1) = load("fig1_spheres.csv");
    assert_eq!(h1, ["mean_curvature", "param", "base_arclength", "h"]);
    let (_, cyl1) = load("fig1_cylinders.csv");
    let (_, sph2) = load("fig2_spheres.csv");
    let (_, tori2) = load("fig2_tori.csv");

    let h_values = |rows: &[Vec<f64>]| -> Vec<f64> {
        let mut set: Vec<f64> = Vec::new();
        for r in rows {
            if !set.contains(&r[0]) {
                set.push(r[0]);
            }
        }
        set
    };
    assert_eq!(h_values(&sph1), vec![0.54, 0.6, 0.7, 0.8, 0.9, 1.0]);
    assert_eq!(h_values(&sph2).len(), 6);

    // cylinder peak = sphere peak / 2 for each mean curvature
    for h in [0.54, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let peak = |rows: &[Vec<f64>]| {
            rows.iter()
                .filter(|r| r[0] == h)
                .map(|r| r[3])
                .fold(f64::MIN, f64::max)
        };
        let ratio = peak(&cyl1) / peak(&sph1);
        assert!((ratio - 0.5).abs() < 1e-3, "H={h}: ratio {ratio}");
    }

    // the maximizing curve dominates the other five at their maxima
    let star = 0.331372;
    let peak_for = |rows: &[Vec<f64>], h: f64| {
        rows.iter()
            .filter(|r| r[0] == h)
            .map(|r| r[3])
            .fold(f64::MIN, f64::max)
    };
    let star_peak = peak_for(&tori2, star);
    for h in h_values(&tori2) {
        assert!(peak_for(&tori2, h) <= star_peak + 1e-12, "H={h} exceeds the maximizer");
    }

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("fig2_meta.json")).unwrap())
            .unwrap();
    let h_star = meta["h_star"].as_f64().unwrap();
    assert!((h_star - 0.331372).abs() < 1e-4);
    let torus_star = meta["torus_height_star"].as_f64().unwrap();
    let sphere_star = meta["sphere_height_star"].as_f64().unwrap();
    assert!((sphere_star - 2.0 * torus_star).abs() < 1e-12);

    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn figures_io_failure_is_exit_3() {
    let dir = tmp_dir("figures-bad");
    let blocker = dir.join("blocker");
    std::fs::write(&blocker, "not a directory").unwrap();
    let target = blocker.join("sub");
    let out = run(&["figures", "--output-dir", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tmp_dir("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        "family = rot-torus-s2\nmean-curvature = 1.0\nsamples = 10\nformat = csv\n",
    )
    .unwrap();
    let out = run(&["generate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 10);

    // flag wins over the file
    let out = bin()
        .args(["generate", "--config", cfg.to_str().unwrap(), "--samples", "7"])
        .output()
        .unwrap();
    let (_, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 7);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn out_dir_env_var_sets_default_figure_directory() {
    let dir = tmp_dir("envdir");
    let out = bin()
        .args(["figures", "--samples", "16"])
        .env("CMCPROD_OUT_DIR", dir.as_os_str())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let expected: HashSet<&str> = [
        "fig1_spheres.csv",
        "fig1_cylinders.csv",
        "fig2_spheres.csv",
        "fig2_tori.csv",
        "fig2_meta.json",
    ]
    .into();
    for name in &expected {
        assert!(dir.join(name).exists(), "{name} missing from env-dir");
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn generate_output_file_is_written_atomically_named() {
    let dir = tmp_dir("outfile");
    let path = dir.join("samples.csv");
    let out = run(&[
        "generate",
        "--family",
        "euclidean-sphere",
        "--mean-curvature",
        "1",
        "--samples",
        "16",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = parse_csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 16);
    // no stray temp files
    let leftovers: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains("tmp"))
        .collect();
    assert!(leftovers.is_empty());
    std::fs::remove_dir_all(dir).ok();
}
