use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn slowlight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowlight"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary_value(dir: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(dir.join("summary.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("`{key}` missing from summary:\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn vacuum_preset_is_neutral() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = slowlight(&["run", "--preset", "vacuum", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary_value(dir.path(), "peak_transmission"), 1.0);
    assert_eq!(summary_value(dir.path(), "group_index"), 1.0);
    assert!(summary_value(dir.path(), "delay_ns").abs() < 1e-9);
    for file in ["spectrum.csv", "homodyne.csv", "pulse_reference.csv", "pulse_out.csv"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
    assert!(!dir.path().join("spectrum.svg").exists());
}

#[test]
fn phase_conjugate_peak_is_calibrated() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = slowlight(&["pc-spectrum", "--preset", "phase_conjugate", "--out", out, "--svg", "on"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((summary_value(dir.path(), "pc_peak") - 0.017).abs() <= 1e-6);
    assert!(dir.path().join("pc_spectrum.svg").exists());
    assert!(dir.path().join("resolved.cfg").exists());
}

#[test]
fn identical_seed_gives_identical_tables() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = slowlight(&[
            "eit-spectrum",
            "--preset",
            "eit_sweep",
            "--seed",
            "11",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for member in ["eit_sweep_0", "eit_sweep_1", "eit_sweep_2"] {
        for file in ["spectrum.csv", "lockin.csv"] {
            let x = fs::read(a.path().join(member).join(file)).unwrap();
            let y = fs::read(b.path().join(member).join(file)).unwrap();
            assert!(x == y, "{member}/{file} differs");
        }
    }
}

#[test]
fn config_errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "name = bad\nmedium.cell.length = -10 cm\n").unwrap();
    let o = slowlight(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("length"), "{err}");

    fs::write(&cfg, "name = bad\nmedium.cell.length = 10 furlong\n").unwrap();
    let o = slowlight(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));

    let o = slowlight(&["run", "--config", "/nonexistent/scenario.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_section_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = slowlight(&["gyro", "--preset", "vacuum", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gyro"));
}

#[test]
fn numeric_errors_exit_with_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("narrow.cfg");
    // Loads fine, but the default grid cannot hold the widened window.
    fs::write(
        &cfg,
        "name = narrow\nmedium.cell.length = 10 cm\nmedium.cell.temperature = 100 degC\n\
         medium.cell.beam_waist = 100 um\nmedium.pump.intensity = 2000 W/cm2\n\
         medium.probe.intensity_ratio = 0.1\n",
    )
    .unwrap();
    let o = slowlight(&["eit-spectrum", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stderr.is_empty());
}

#[test]
fn presets_are_listed() {
    let o = slowlight(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["slowlight", "eit_sweep", "gyro", "phase_conjugate", "vacuum"] {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
}
