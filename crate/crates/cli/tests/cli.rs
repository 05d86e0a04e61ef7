use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn beamspin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamspin")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data rows of a CSV written by the tool: `#` block, names, units, data.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let names = lines.next().unwrap().split(',').map(str::to_string).collect();
    lines.next().expect("units row");
    (names, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

/// Value and standard error of one parameter in `fit.csv`.
fn fit_param(path: &Path, name: &str) -> (f64, f64) {
    let (_, rows) = rows(path);
    let row = rows.iter().find(|r| r[0] == name).unwrap_or_else(|| panic!("no parameter {name}"));
    (row[1].parse().unwrap(), row[2].parse().unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const BEAM_OFF: &str = "seed = 4
[spin]
t1_ms = 5.0
t2_us = 100.0
gamma2star_MHz = 1.9
[simulate]
sequence = \"relaxometry\"
beam_on = false
time_start_us = 250.0
time_stop_us = 15000.0
time_points = 20
";

#[test]
fn beam_off_relaxometry_fits_configured_t1() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "off.toml", BEAM_OFF);
    let sim = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "--out", "sim", "simulate"]);
    assert_eq!(code(&sim), 0, "{}", stderr(&sim));
    let fit = beamspin(dir.path(), &["--out", "fit", "fit", "sim/simulate.csv"]);
    assert_eq!(code(&fit), 0, "{}", stderr(&fit));
    let (t, _) = fit_param(&dir.path().join("fit/fit.csv"), "T");
    assert!((t / 5e-3 - 1.0).abs() < 1e-8, "{t}");
    assert!(stdout(&fit).contains("T = 5.00000000"), "{}", stdout(&fit));
}

#[test]
fn shot_noise_round_trip_within_three_sigma() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "noisy.toml", &format!("{BEAM_OFF}shots = 10000\n"));
    for seed in ["1", "2", "3", "4", "5"] {
        let out = format!("s{seed}");
        let sim = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "--seed", seed, "--out", &out, "simulate"]);
        assert_eq!(code(&sim), 0, "{}", stderr(&sim));
        let input = format!("{out}/simulate.csv");
        let fit = beamspin(dir.path(), &["--out", &out, "fit", &input]);
        assert_eq!(code(&fit), 0, "{}", stderr(&fit));
        let (t, se) = fit_param(&dir.path().join(&out).join("fit.csv"), "T");
        assert!((t - 5e-3).abs() <= 3.0 * se, "seed {seed}: {t} ± {se}");
        assert!(se > 0.0 && se < 0.1 * t);
    }
}

#[test]
fn sensing_config_reports_closed_form_reduction() {
    let dir = TempDir::new().unwrap();
    let cfg = config("sensing-relaxometry.toml");
    let sim = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "--engine", "closed-form", "simulate"]);
    assert_eq!(code(&sim), 0, "{}", stderr(&sim));
    let text = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let line = text.lines().find(|l| l.starts_with("closed-form T1_beam:")).unwrap();
    let t: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((t / 1.49e-3 - 1.0).abs() < 0.05, "{t}");
    let fit = beamspin(dir.path(), &["--out", "fit", "fit", "simulate.csv", "--weighting", "unweighted"]);
    assert_eq!(code(&fit), 0, "{}", stderr(&fit));
    let (tf, _) = fit_param(&dir.path().join("fit/fit.csv"), "T");
    assert!((tf / t - 1.0).abs() < 1e-8, "{tf} vs {t}");
}

#[test]
fn report_uses_parenthesized_uncertainty() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("setting,mean_signal\ns,1\n");
    // Noise-free decay plus a fixed zero-mean pattern sized to give T = 5.7(3) ms.
    for k in 1..=20 {
        let t = k as f64 * 0.6e-3;
        let wiggle = if k % 2 == 0 { 0.012 } else { -0.012 };
        csv.push_str(&format!("{t:e},{}\n", (-t / 5.7e-3).exp() + wiggle));
    }
    let input = write(dir.path(), "decay.csv", &csv);
    let fit = beamspin(dir.path(), &["fit", input.to_str().unwrap(), "--weighting", "unweighted"]);
    assert_eq!(code(&fit), 0, "{}", stderr(&fit));
    let out = stdout(&fit);
    let line = out.lines().find(|l| l.starts_with("T = ")).unwrap();
    let rendered = line.trim_start_matches("T = ");
    let (t, se) = fit_param(&dir.path().join("fit.csv"), "T");
    assert_eq!(rendered, beamspin::fit::format_with_uncertainty(t, se, "s"));
    assert!(rendered.ends_with(" ms") && rendered.contains('(') && rendered.contains(')'), "{rendered}");
    assert!(fs::read_to_string(dir.path().join("fit.txt")).unwrap().contains(line));
}

#[test]
fn simulate_is_byte_identical_under_fixed_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "noisy.toml", &format!("{BEAM_OFF}shots = 1000\n"));
    for out in ["a", "b"] {
        let o = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "--out", out, "--seed", "9", "simulate"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a/simulate.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/simulate.csv")).unwrap());
    let c = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "--out", "c", "--seed", "10", "simulate"]);
    assert_eq!(code(&c), 0);
    assert_ne!(a, fs::read(dir.path().join("c/simulate.csv")).unwrap());
}

#[test]
fn outputs_begin_with_hash_header() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "off.toml", BEAM_OFF);
    let o = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# beamspin "));
    assert!(text.lines().take_while(|l| l.starts_with('#')).any(|l| l.starts_with("# config_hash: ")));
}

#[test]
fn unknown_config_key_exits_2_with_location() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.toml", &BEAM_OFF.replace("t2_us = 100.0", "t2_us = 100.0\nt3_us = 1.0"));
    let o = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("line 5") && e.contains("t3_us"), "{e}");
}

#[test]
fn wrongly_typed_value_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.toml", &BEAM_OFF.replace("t1_ms = 5.0", "t1_ms = \"five\""));
    let o = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn malformed_csv_exits_2_naming_the_row() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "bad.csv", "setting,mean_signal\ns,1\n1e-3,0.8\n2e-3,abc\n3e-3,0.5\n");
    let o = beamspin(dir.path(), &["fit", input.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.csv:4"), "{}", stderr(&o));
    let missing = write(dir.path(), "missing.csv", "time,value\ns,1\n1e-3,0.8\n");
    let o = beamspin(dir.path(), &["fit", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("setting"), "{}", stderr(&o));
}

#[test]
fn degenerate_fit_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "flat.csv", "setting,mean_signal\ns,1\n1e-3,0.5\n2e-3,0.5\n3e-3,0.5\n4e-3,0.5\n");
    let o = beamspin(dir.path(), &["fit", input.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

/// A fit file in the tool's own format with the given lifetime.
fn lifetime_fit(dir: &Path, name: &str, t: f64, se: f64) -> PathBuf {
    write(
        dir,
        name,
        &format!(
            "# beamspin 0.1.0\n# command: fit\n# converged: true\nparameter,value,std_error,unit\n,,,\nA,1e0,1e-3,1\nT,{t:e},{se:e},s\n"
        ),
    )
}

/// Quantity from `bound.csv`.
fn bound_value(path: &Path, name: &str) -> f64 {
    let (_, rows) = rows(path);
    rows.iter().find(|r| r[0] == name).unwrap_or_else(|| panic!("no {name}"))[1].parse().unwrap()
}

#[test]
fn bound_reports_worked_case() {
    let dir = TempDir::new().unwrap();
    // Ratio 0.9 with the reference exact; the beam error puts the 95% lower
    // end of the delta-method interval at 0.8.
    let z = 1.959_963_984_540_054;
    let (tr, tb) = (5.7e-3, 0.9 * 5.7e-3);
    let sb = tb * (0.1 / z) / 0.9;
    lifetime_fit(dir.path(), "beam.csv", tb, sb);
    lifetime_fit(dir.path(), "ref.csv", tr, 0.0);
    let cfg = write(dir.path(), "m.toml", "[spin]\nt1_ms = 5.7\nt2_us = 10.6\ngamma2star_MHz = 12.0\n");
    let args = ["--config", cfg.to_str().unwrap(), "bound", "--beam", "beam.csv", "--reference", "ref.csv"];
    let o = beamspin(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("Omega_max") && out.contains("I_res_max") && out.contains("95% interval"), "{out}");
    let csv = dir.path().join("bound.csv");
    assert!((bound_value(&csv, "ci_lower") - 0.8).abs() < 1e-9);
    assert!((bound_value(&csv, "omega_max") / 4.32e4 - 1.0).abs() < 0.01);
    assert!((bound_value(&csv, "i_res_max") / 24.6e-6 - 1.0).abs() < 0.01);
}

#[test]
fn longer_beam_lifetime_exits_4() {
    let dir = TempDir::new().unwrap();
    // Ratio 1.23 with its whole interval above unity.
    lifetime_fit(dir.path(), "beam.csv", 7.0e-3, 0.1e-3);
    lifetime_fit(dir.path(), "ref.csv", 5.7e-3, 0.1e-3);
    let o = beamspin(dir.path(), &["bound", "--beam", "beam.csv", "--reference", "ref.csv"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stdout(&o).contains("not constraining"));
    assert!(fs::read_to_string(dir.path().join("bound.txt")).unwrap().contains("not constraining"));
}

#[test]
fn unconverged_fit_input_is_rejected() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        dir.path(),
        "beam.csv",
        "# converged: false\nparameter,value,std_error,unit\n,,,\nT,5e-3,1e-4,s\n",
    );
    lifetime_fit(dir.path(), "ref.csv", 5.7e-3, 0.3e-3);
    let o = beamspin(dir.path(), &["bound", "--beam", bad.to_str().unwrap(), "--reference", "ref.csv"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn charge_series_decomposes_in_order() {
    let dir = TempDir::new().unwrap();
    let cfg = config("charge-series.toml");
    let sim = beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "--out", "ch", "simulate"]);
    assert_eq!(code(&sim), 0, "{}", stderr(&sim));
    let spectra: Vec<String> = (0..5).map(|k| format!("ch/spectrum_{k:03}.csv")).collect();
    let mut args = vec!["--out", "dec", "decompose"];
    args.extend(spectra.iter().map(String::as_str));
    args.extend(["--ref-minus", "ch/ref_minus.csv", "--ref-zero", "ch/ref_zero.csv", "--currents-uA", "0,2,4,8,16"]);
    let o = beamspin(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (names, rows) = rows(&dir.path().join("dec/weights.csv"));
    let fi = names.iter().position(|n| n == "fraction_minus").unwrap();
    let f: Vec<f64> = rows.iter().map(|r| r[fi].parse().unwrap()).collect();
    assert_eq!(f.len(), 5);
    assert!(f.windows(2).all(|w| w[1] < w[0]), "{f:?}");
    for (got, want) in f.iter().zip([0.8, 0.7, 0.6, 0.45, 0.3]) {
        assert!((got - want).abs() < 0.05, "{got} vs {want}");
    }
}

#[test]
fn decompose_isolates_bad_spectrum() {
    let dir = TempDir::new().unwrap();
    let cfg = config("charge-series.toml");
    assert_eq!(code(&beamspin(dir.path(), &["--config", cfg.to_str().unwrap(), "--out", "ch", "simulate"])), 0);
    write(dir.path(), "ch/outside.csv", "wavelength_nm,intensity\nnm,a.u.\n300,1\n310,2\n");
    let args = [
        "decompose",
        "ch/spectrum_000.csv",
        "ch/outside.csv",
        "ch/spectrum_001.csv",
        "--ref-minus",
        "ch/ref_minus.csv",
        "--ref-zero",
        "ch/ref_zero.csv",
    ];
    let o = beamspin(dir.path(), &args);
    let text = fs::read_to_string(dir.path().join("weights.csv")).unwrap_or_default();
    assert!(matches!(code(&o), 0 | 2), "{}", stderr(&o));
    let (names, rows) = rows(&dir.path().join("weights.csv"));
    let si = names.iter().position(|n| n == "status").unwrap();
    assert_eq!(rows.len(), 3, "{text}");
    assert_eq!(rows[0][si], "ok");
    assert_ne!(rows[1][si], "ok");
    assert_eq!(rows[2][si], "ok");
}

#[test]
fn sweep_writes_pinned_stars_and_target_currents() {
    let dir = TempDir::new().unwrap();
    let map = beamspin(dir.path(), &["--config", config("contrast-map.toml").to_str().unwrap(), "--out", "m", "sweep"]);
    assert_eq!(code(&map), 0, "{}", stderr(&map));
    let meta = fs::read_to_string(dir.path().join("m/sweep.meta.txt")).unwrap();
    assert!(meta.contains("contrast=1.2689552610815824e-1"), "{meta}");
    assert!(meta.contains("contrast=9.457619761561264e-1"), "{meta}");
    let (_, rows_map) = rows(&dir.path().join("m/sweep.csv"));
    assert_eq!(rows_map.len(), 100 * 100);

    let curves =
        beamspin(dir.path(), &["--config", config("reduction-curves.toml").to_str().unwrap(), "--out", "c", "sweep"]);
    assert_eq!(code(&curves), 0, "{}", stderr(&curves));
    let out = stdout(&curves);
    let line = out.lines().find(|l| l.contains("on current-system:")).unwrap();
    let i: f64 = line.split_whitespace().rev().nth(1).unwrap().parse().unwrap();
    assert!((i / 2.6231259574e-5 - 1.0).abs() < 1e-8, "{i}");
}

#[test]
fn svg_timestamp_is_the_only_difference() {
    let dir = TempDir::new().unwrap();
    let cfg = config("contrast-map.toml");
    for (out, extra) in [("a", None), ("b", None), ("c", Some("--no-timestamp")), ("d", Some("--no-timestamp"))] {
        let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out, "--svg"];
        args.extend(extra);
        args.push("sweep");
        assert_eq!(code(&beamspin(dir.path(), &args)), 0);
    }
    let read = |d: &str| fs::read_to_string(dir.path().join(d).join("sweep.svg")).unwrap();
    assert_eq!(read("c"), read("d"));
    let strip = |s: String| s.lines().filter(|l| !l.contains("unix-time")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(read("a")), strip(read("c")));
    assert_eq!(
        fs::read(dir.path().join("a/sweep.csv")).unwrap(),
        fs::read(dir.path().join("c/sweep.csv")).unwrap()
    );
}
