use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use srm_core::rf::{read_touchstone, FrequencyNetwork, NetworkData};
use srm_core::srm::ErrorModel;
use srm_core::synth::KitConfig;
use tempfile::TempDir;

fn srm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srm"))
        .args(args)
        .env_remove("SRM_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = srm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn fails_with(args: &[&str], code: i32) -> String {
    let out = srm(args);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(out.status.code(), Some(code), "{args:?}: {stderr}");
    stderr
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("meas");
    let mut args = vec!["simulate", "--out", s(&out)];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

fn sorted_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    v.sort();
    v
}

fn worst_diff(a: &FrequencyNetwork, b: &FrequencyNetwork) -> f64 {
    let (NetworkData::TwoPort(x), NetworkData::TwoPort(y)) = (a.data(), b.data()) else {
        panic!("expected two-ports");
    };
    x.iter().zip(y).map(|(p, q)| p.max_abs_diff(q)).fold(0.0, f64::max)
}

#[test]
fn simulate_writes_a_readable_directory() {
    let tmp = TempDir::new().unwrap();
    let dir = simulate(tmp.path(), &[]);
    let files = sorted_files(&dir);
    for want in [
        "load_0.s2p",
        "load_1.s2p",
        "load_2.s2p",
        "network.s2p",
        "network_load_0.s1p",
        "match_left.s1p",
        "match_right.s1p",
        "match_def_left.s1p",
        "dut_raw.s2p",
        "dut_ref.s2p",
        "truth_error_model.json",
        "manifest.json",
    ] {
        assert!(files.iter().any(|f| f == want), "missing {want} in {files:?}");
    }
    for f in files.iter().filter(|f| f.ends_with(".s1p") || f.ends_with(".s2p")) {
        let net = read_touchstone(dir.join(f)).unwrap();
        assert_eq!(net.len(), 20, "{f}");
    }
    ErrorModel::load(dir.join("truth_error_model.json")).unwrap();
}

#[test]
fn fixed_seed_gives_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["--seed", "42", "--sources", "all"];
    let da = simulate(a.path(), &args);
    let db = simulate(b.path(), &args);
    for f in sorted_files(&da).iter().filter(|f| *f != "manifest.json") {
        assert_eq!(std::fs::read(da.join(f)).unwrap(), std::fs::read(db.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn invalid_topology_is_a_usage_error_naming_the_field() {
    let tmp = TempDir::new().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(KitConfig::builtin_json()).unwrap();
    v["loads"][0]["topology"] = "capacitor".into();
    let cfg = tmp.path().join("kit.json");
    std::fs::write(&cfg, v.to_string()).unwrap();
    let out = tmp.path().join("o");
    let msg = fails_with(&["simulate", "--config", s(&cfg), "--out", s(&out)], 2);
    assert!(msg.contains("loads[0].topology"), "{msg}");
}

fn calibrate_and_check(extra_sim: &[&str], tol: f64) {
    let tmp = TempDir::new().unwrap();
    let dir = simulate(tmp.path(), extra_sim);
    let model = tmp.path().join("model.json");
    let diag = tmp.path().join("diag.csv");
    ok(&["calibrate", "--input", s(&dir), "--out", s(&model), "--diagnostics", s(&diag)]);
    let got = ErrorModel::load(&model).unwrap();
    let truth = ErrorModel::load(dir.join("truth_error_model.json")).unwrap();
    let err = got.max_relative_error(&truth);
    assert!(err < tol, "{extra_sim:?}: {err:e}");
    assert_eq!(std::fs::read_to_string(&diag).unwrap().lines().count(), 21);

    let corrected = tmp.path().join("dut.s2p");
    ok(&["apply", "--model", s(&model), "--input", s(&dir.join("dut_raw.s2p")), "--out", s(&corrected)]);
    let diff = worst_diff(&read_touchstone(&corrected).unwrap(), &read_touchstone(dir.join("dut_ref.s2p")).unwrap());
    assert!(diff < tol, "{diff:e}");
}

#[test]
fn simulate_then_calibrate_recovers_truth() {
    calibrate_and_check(&[], 1e-8);
    calibrate_and_check(&["--mode", "half"], 1e-8);
}

#[test]
fn thru_mode_is_consistent() {
    calibrate_and_check(&["--mode", "thru"], 1e-9);
}

#[test]
fn calibrate_without_manifest_uses_file_names() {
    let tmp = TempDir::new().unwrap();
    let dir = simulate(tmp.path(), &[]);
    std::fs::remove_file(dir.join("manifest.json")).unwrap();
    let model = tmp.path().join("model.json");
    // the hints are gone, so supply the delays by hand
    let kit = KitConfig::builtin();
    let vp = 299_792_458.0 / kit.line.eps_eff.sqrt();
    let refl = format!("{:e}", 2.0 * kit.offset_length_m / vp);
    let trans = format!("{:e}", kit.network_length_m / vp);
    ok(&[
        "calibrate",
        "--input",
        s(&dir),
        "--reflect-delay",
        &refl,
        "--transmission-delay",
        &trans,
        "--out",
        s(&model),
    ]);
    let got = ErrorModel::load(&model).unwrap();
    let truth = ErrorModel::load(dir.join("truth_error_model.json")).unwrap();
    assert!(got.max_relative_error(&truth) < 1e-8);
}

#[test]
fn missing_network_load_names_the_role() {
    let tmp = TempDir::new().unwrap();
    let dir = simulate(tmp.path(), &[]);
    std::fs::remove_file(dir.join("manifest.json")).unwrap();
    std::fs::remove_file(dir.join("network_load_0.s1p")).unwrap();
    let model = tmp.path().join("model.json");
    let msg = fails_with(&["calibrate", "--input", s(&dir), "--out", s(&model)], 2);
    assert!(msg.contains("network_load"), "{msg}");
}

#[test]
fn apply_identity_model_passes_data_through() {
    let tmp = TempDir::new().unwrap();
    let dir = simulate(tmp.path(), &[]);
    let raw = read_touchstone(dir.join("dut_raw.s2p")).unwrap();
    let model = tmp.path().join("identity.json");
    ErrorModel::identity(raw.frequencies().to_vec()).save(&model).unwrap();
    let out = tmp.path().join("same.s2p");
    ok(&["apply", "--model", s(&model), "--input", s(&dir.join("dut_raw.s2p")), "--out", s(&out)]);
    assert!(worst_diff(&read_touchstone(&out).unwrap(), &raw) < 1e-15);
}

#[test]
fn apply_rejects_a_different_grid() {
    let tmp = TempDir::new().unwrap();
    let dir = simulate(tmp.path(), &[]);
    let model = tmp.path().join("identity.json");
    ErrorModel::identity(vec![1e9, 2e9]).save(&model).unwrap();
    let out = tmp.path().join("x.s2p");
    fails_with(&["apply", "--model", s(&model), "--input", s(&dir.join("dut_raw.s2p")), "--out", s(&out)], 3);
}

fn compare_rows(csv: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn compare_reports_floor_and_known_offsets() {
    let tmp = TempDir::new().unwrap();
    let dir = simulate(tmp.path(), &[]);
    let reference = dir.join("dut_ref.s2p");
    let out = tmp.path().join("self.csv");
    ok(&["compare", "--cal", s(&reference), "--ref", s(&reference), "--out", s(&out)]);
    for row in compare_rows(&out) {
        assert!(row[1..].iter().all(|&v| v == -300.0));
    }

    // shift every S-parameter by 1e-3: the error is exactly -60 dB
    let net = read_touchstone(&reference).unwrap();
    let shifted = FrequencyNetwork::two_port(
        "shifted",
        net.frequencies().to_vec(),
        net.two_port_data().unwrap().iter().map(|p| p.map(|z| z + 1e-3)).collect(),
    )
    .unwrap();
    let shifted_path = tmp.path().join("shifted.s2p");
    srm_core::rf::write_touchstone(&shifted, &shifted_path).unwrap();
    ok(&["compare", "--cal", s(&shifted_path), "--ref", s(&reference), "--out", s(&out)]);
    for row in compare_rows(&out) {
        assert!(row[1..].iter().all(|&v| (v + 60.0).abs() < 1e-6), "{row:?}");
    }
}

#[test]
fn mc_without_sources_has_zero_spread() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("mc");
    // an empty source list is not accepted on the command line, so use a
    // single source with zero magnitude
    let mut v: serde_json::Value = serde_json::from_str(KitConfig::builtin_json()).unwrap();
    v["perturbation"]["noise_sigma"] = 0.0.into();
    let cfg = tmp.path().join("kit.json");
    std::fs::write(&cfg, v.to_string()).unwrap();
    ok(&["mc", "--config", s(&cfg), "--runs", "20", "--sources", "noise", "--no-budget", "--out", s(&out)]);
    let text = std::fs::read_to_string(out.join("mc_stats.csv")).unwrap();
    let mut rdr = text.lines();
    let header: Vec<&str> = rdr.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "std_mag").unwrap();
    for line in rdr {
        assert_eq!(line.split(',').nth(col).unwrap().parse::<f64>().unwrap(), 0.0, "{line}");
    }
}

#[test]
fn mc_noise_campaign_writes_budget() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("mc");
    ok(&["mc", "--runs", "200", "--sources", "noise", "--out", s(&out)]);
    let budget = std::fs::read_to_string(out.join("mc_budget.csv")).unwrap();
    assert_eq!(budget.lines().count(), 1 + 20 * 4);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("mc_summary.json")).unwrap()).unwrap();
    assert!(summary.is_object());
}

#[test]
fn mc_rejects_unknown_source() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("mc");
    fails_with(&["mc", "--runs", "10", "--sources", "gremlins", "--out", s(&out)], 2);
}

#[test]
fn output_does_not_depend_on_jobs() {
    let tmp = TempDir::new().unwrap();
    let run = |jobs: &str, name: &str| {
        let out = tmp.path().join(name);
        ok(&["--jobs", jobs, "mc", "--runs", "40", "--no-budget", "--out", s(&out)]);
        std::fs::read(out.join("mc_stats.csv")).unwrap()
    };
    assert_eq!(run("1", "one"), run("4", "four"));
}
