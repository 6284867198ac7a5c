use std::path::Path;
use std::process::{Command, Output};

fn torus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("running torus")
}

fn ok(args: &[&str]) -> Output {
    let out = torus(args);
    assert!(
        out.status.success(),
        "torus {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: impl AsRef<Path>) -> String {
    let path = path.as_ref();
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn csv_rows(path: impl AsRef<Path>) -> Vec<Vec<String>> {
    let text = read(path);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column<'a>(rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let i = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].as_str()).collect()
}

#[test]
fn fit_writes_model_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit");
    ok(&["fit", "--output", out.to_str().unwrap(), "--set", "model.family=loop"]);
    for f in ["config.toml", "model.json", "report.json", "summary.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert!(read(out.join("config.toml")).starts_with("# schema_version = 1"));
    assert!(read(out.join("report.json")).contains("\"schema_version\": 1"));
    let rows = csv_rows(out.join("summary.csv"));
    let objective: f64 = column(&rows, "objective")[0].parse().unwrap();
    assert!(objective < 1e-4, "objective {objective}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&["fit", "--output", out.to_str().unwrap(), "--set", "solver.max_iterations=20"]);
    }
    for f in ["model.json", "report.json", "summary.csv"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f} differs");
    }
}

#[test]
fn small_isochrone_sweep_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    ok(&[
        "sweep-isochrone",
        "--output",
        out.to_str().unwrap(),
        "--set",
        "system={ name = \"isochrone\", c1 = 1.0, c2 = 0.15 }",
        "--set",
        "model.family=1d-odd",
        "--set",
        "sweep.orders=[16, 64]",
        "--set",
        "sweep.frequencies=[1.0, 2.0]",
    ]);
    let rows = csv_rows(out.join("summary.csv"));
    assert_eq!(rows.len(), 5);
    assert!(column(&rows, "converged").iter().all(|c| *c == "true"), "{rows:?}");
    assert!(read(out.join("sweep.svg")).starts_with("<!-- schema_version=1 -->"));
}

#[test]
fn sweep_rejects_a_two_dimensional_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = torus(&["sweep-isochrone", "--output", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("system.name"));
}

#[test]
fn probe_with_zero_threshold_warns_and_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("probe");
    let res = ok(&[
        "probe",
        "--output",
        out.to_str().unwrap(),
        "--set",
        "probe.threshold=0",
        "--set",
        "probe.max_iterations=3",
        "--set",
        "probe.spacing=0.65",
    ]);
    assert!(String::from_utf8_lossy(&res.stderr).contains("rejected"));
    assert!(out.join("seed.json").exists());
    let rows = csv_rows(out.join("summary.csv"));
    assert_eq!(rows.len(), 2, "only the seed index is fitted");
    assert_eq!(column(&rows, "accepted"), ["false"]);
    assert_eq!(column(&rows, "error"), [""], "the seed index is fitted, not skipped");
}

#[test]
fn small_probe_writes_tori_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("probe");
    ok(&[
        "probe",
        "--output",
        out.to_str().unwrap(),
        "--set",
        "probe.spacing=0.3",
        "--set",
        "probe.extent=0.6",
        "--set",
        "probe.max_iterations=30",
    ]);
    let rows = csv_rows(out.join("summary.csv"));
    let accepted = column(&rows, "accepted").iter().filter(|a| **a == "true").count();
    assert!(accepted >= 1, "{rows:?}");
    assert_eq!(std::fs::read_dir(out.join("tori")).unwrap().count(), rows.len() - 1);
    assert!(out.join("actions.svg").exists() && out.join("frequencies.svg").exists());
}

#[test]
fn section_compares_a_fitted_torus() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit");
    ok(&["fit", "--output", fit.to_str().unwrap(), "--set", "model.family=loop"]);
    let out = dir.path().join("section");
    ok(&[
        "section",
        "--model",
        fit.join("report.json").to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--set",
        "section.crossings=40",
    ]);
    let rows = csv_rows(out.join("section_summary.csv"));
    let hausdorff: f64 = column(&rows, "hausdorff")[0].parse().unwrap();
    let sigma: f64 = column(&rows, "energy_sigma")[0].parse().unwrap();
    assert!(hausdorff.is_finite() && hausdorff < 0.5, "hausdorff {hausdorff}");
    assert!(sigma < 1e-11, "energy sigma {sigma}");
    let sections = read(out.join("sections.csv"));
    assert!(sections.starts_with("# schema_version=1"));
    for f in ["sections.svg", "orbit.svg"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn section_needs_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = torus(&["section", "--output", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("section.model"));
}

#[test]
fn config_file_and_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[solver]\nmax_iterations = 0\n").unwrap();
    let out = torus(&["fit", "--config", cfg.to_str().unwrap(), "--output", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver"));

    std::fs::write(&cfg, "[grid]\nsize = 3\n").unwrap();
    let out = torus(&["fit", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("size"));

    let out = torus(&["fit", "--set", "objective.label=actions"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("objective.actions"));
}
