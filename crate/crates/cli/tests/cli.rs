use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scorebayes"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn results(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("results.json")).unwrap()).unwrap()
}

fn schema_errors(doc: &Value) -> Vec<String> {
    let schema: Value = serde_json::from_str(include_str!("../schema/result_bundle.schema.json")).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    v.iter_errors(doc).map(|e| e.to_string()).collect()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn vmf_estimate_is_reproducible_and_valid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "vmf.cfg", "example = vmf\nn = 50\nkappa = 3\nseed = 7\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["estimate", "vmf", "--config", s(&cfg), "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["results.json", "data.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let doc = results(&a);
    assert!(schema_errors(&doc).is_empty(), "{:?}", schema_errors(&doc));
    assert!(doc["extra"]["kappa_tilde"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["seed"], 7);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "vmf.cfg", "example = vmf\nseed = 7\n");
    let o = run(&["estimate", "vmf", "--config", s(&cfg), "--out", s(&tmp.path().join("o")), "--seed", "8"]);
    assert_eq!(code(&o), 0);
    assert_eq!(results(&tmp.path().join("o"))["seed"], 8);
}

#[test]
fn config_errors_exit_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("bad_key", "example = vmf\nseed = 1\nkapa = 3\n"),
        ("no_equals", "example = vmf\nseed 1\n"),
        ("wrong_example", "example = eqcorr\nseed = 1\n"),
        ("no_seed", "example = vmf\n"),
        ("bad_prior", "example = vmf\nseed = 1\nprior = uniform\n"),
        ("negative_kappa", "example = vmf\nseed = 1\nkappa = -2\n"),
    ];
    for (name, text) in cases {
        let cfg = write(tmp.path(), &format!("{name}.cfg"), text);
        let out = tmp.path().join(name);
        let o = run(&["estimate", "vmf", "--config", s(&cfg), "--out", s(&out)]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists(), "{name} left outputs");
    }
    let o = run(&["estimate", "nope", "--out", s(&tmp.path().join("x")), "--seed", "1"]);
    assert_eq!(code(&o), 2);
    let o = run(&["prior-eval", "custom", "--out", s(&tmp.path().join("y")), "--seed", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn zero_length_chain_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, extra) in ["mcmc_iterations = 0", "mcmc_iterations = 1000\nmcmc_thin = 0", "mcmc_iterations = 10"].iter().enumerate() {
        let cfg = write(tmp.path(), "c.cfg", &format!("example = custom\nseed = 3\n{extra}\n"));
        let out = tmp.path().join(format!("o{i}"));
        let o = run(&["sample", "custom", "--config", s(&cfg), "--out", s(&out)]);
        assert_eq!(code(&o), 2, "{extra}");
        assert!(!out.exists());
    }
}

#[test]
fn data_errors_exit_2_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bad.csv", "x\n0.1\n0.2\nNaN\n");
    let cfg = write(tmp.path(), "c.cfg", "example = custom\nseed = 1\ndata = bad.csv\n");
    let o = run(&["estimate", "custom", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    write(tmp.path(), "empty.csv", "x\n");
    let cfg = write(tmp.path(), "c.cfg", "example = custom\nseed = 1\ndata = empty.csv\n");
    let o = run(&["estimate", "custom", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_3_and_names_the_operation() {
    let tmp = tempfile::tempdir().unwrap();
    // angles clustered opposite the assumed direction give a negative estimate of kappa
    let angles: Vec<String> = (0..8).map(|i| (3.0 + 0.05 * i as f64).to_string()).collect();
    write(tmp.path(), "a.csv", &format!("angle\n{}\n", angles.join("\n")));
    let cfg = write(tmp.path(), "c.cfg", "example = vmf\nseed = 1\ndata = a.csv\ntheta0 = 0\n");
    let out = tmp.path().join("o");
    let o = run(&["estimate", "vmf", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Hyvarinen estimation of kappa"));
    assert!(!out.exists());
}

#[test]
fn input_files_are_not_modified() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write(tmp.path(), "d.csv", "x\n0.3\n-1.2\n0.7\n2.1\n-0.4\n");
    let cfg = write(tmp.path(), "c.cfg", "example = custom\nseed = 1\ndata = d.csv\n");
    let before = (fs::read(&data).unwrap(), fs::read(&cfg).unwrap());
    let o = run(&["estimate", "custom", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(before, (fs::read(&data).unwrap(), fs::read(&cfg).unwrap()));
    let doc = results(&tmp.path().join("o"));
    let xbar = (0.3 - 1.2 + 0.7 + 2.1 - 0.4) / 5.0;
    assert!((doc["theta_tilde"][0].as_f64().unwrap() - xbar).abs() < 1e-8);
}

fn batch_se(xs: &[f64]) -> f64 {
    let k = 50;
    let b = xs.len() / k;
    let m: Vec<f64> = xs.chunks_exact(b).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let mean = m.iter().sum::<f64>() / k as f64;
    (m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / ((k - 1) * k) as f64).sqrt()
}

#[test]
fn log_score_sample_matches_conjugate_posterior() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.cfg", "example = custom\nscore = log\nmodel = normal_mean\nsigma = 2\nmu = 1\nn = 40\nseed = 11\nmcmc_iterations = 50000\n");
    let out = tmp.path().join("o");
    let o = run(&["sample", "custom", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(&out);
    assert!(schema_errors(&doc).is_empty());
    let (m, sd) = (doc["extra"]["conjugate_mean"].as_f64().unwrap(), doc["extra"]["conjugate_sd"].as_f64().unwrap());
    let (header, rows) = read_csv(&out.join("chain.csv"));
    assert_eq!(header, ["draw", "mu", "log_target"]);
    let mu: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let sq: Vec<f64> = mu.iter().map(|v| (v - m).powi(2)).collect();
    let mean = mu.iter().sum::<f64>() / mu.len() as f64;
    let var = sq.iter().sum::<f64>() / sq.len() as f64;
    let mcmc = doc["summaries"].as_array().unwrap().iter().find(|s| s["label"] == "mcmc").unwrap();
    assert!((mcmc["mean"].as_f64().unwrap() - mean).abs() < 1e-12);
    assert!((mean - m).abs() < 3.0 * batch_se(&mu), "mean {mean} vs {m}");
    // sd by the delta method on the second central moment
    let sd_se = batch_se(&sq) / (2.0 * sd);
    assert!((var.sqrt() - sd).abs() < 3.0 * sd_se, "sd {} vs {sd}", var.sqrt());
}

#[test]
fn regression_near_log_limit_matches_least_squares() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "r.cfg", "example = regression\ngamma = 1.01\nn = 2000\ncontamination = 0\nseed = 5\n");
    let out = tmp.path().join("o");
    let o = run(&["estimate", "regression", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(&out);
    assert!(schema_errors(&doc).is_empty());
    for j in 0..3 {
        let t = doc["theta_tilde"][j].as_f64().unwrap();
        let b = doc["extra"][format!("ols_beta{j}")].as_f64().unwrap();
        assert!((t - b).abs() < 1e-3, "beta{j}: {t} vs {b}");
    }
}

#[test]
fn regression_accepts_user_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("x1,x2,y\n");
    for i in 0..25 {
        let (a, b) = ((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos());
        text.push_str(&format!("{a},{b},{}\n", 1.0 + 0.5 * a - 0.5 * b + 0.3 * (i as f64 * 2.9).sin()));
    }
    write(tmp.path(), "g.csv", &text);
    let cfg = write(tmp.path(), "r.cfg", "example = regression\nseed = 1\ndata = g.csv\n");
    let out = tmp.path().join("o");
    let o = run(&["estimate", "regression", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = results(&out);
    assert_eq!(doc["parameter_names"].as_array().unwrap().len(), 4);
    assert!(doc["files"].as_array().unwrap().is_empty());
}

#[test]
fn outputs_validate_and_referenced_files_exist() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: [(&str, &str, &str); 6] = [
        ("sample", "vmf", "mcmc_iterations = 2000\n"),
        ("prior-eval", "vmf", ""),
        ("sample", "regression", "mcmc_iterations = 2000\n"),
        ("prior-eval", "regression", ""),
        ("estimate", "eqcorr", "mc_replicates = 20\nmc_n = 100\n"),
        ("sample", "custom", "score = tsallis\ngamma = 1.5\nmodel = normal\nmcmc_iterations = 2000\n"),
    ];
    for (i, (cmd, ex, extra)) in runs.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("{i}.cfg"), &format!("example = {ex}\nseed = 2\n{extra}"));
        let out = tmp.path().join(format!("o{i}"));
        let o = run(&[cmd, ex, "--config", s(&cfg), "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{cmd} {ex}: {}", String::from_utf8_lossy(&o.stderr));
        let doc = results(&out);
        assert!(schema_errors(&doc).is_empty(), "{cmd} {ex}: {:?}", schema_errors(&doc));
        for f in doc["files"].as_array().unwrap() {
            let (_, rows) = read_csv(&out.join(f["path"].as_str().unwrap()));
            assert_eq!(rows.len() as u64, f["rows"].as_u64().unwrap());
        }
    }
}

#[test]
fn vmf_reproduce_emits_twelve_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let start = std::time::Instant::now();
    let o = run(&["reproduce", "vmf", "--out", s(&out), "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(start.elapsed().as_secs() < 300);
    let doc = results(&out);
    assert!(schema_errors(&doc).is_empty());
    let expected: &[(&str, &[&str])] = &[
        ("prior_curves", &["kappa", "reference", "inverse_kappa"]),
        ("sample", &["angle"]),
        ("calibration_posteriors", &["kappa", "calibrated", "uncalibrated", "full_likelihood"]),
        ("calibration_summary", &["n", "kappa_true", "posterior", "mode", "mean", "sd", "lower", "upper"]),
        ("scenario_n10_kappa1", &["kappa", "reference", "inverse_kappa"]),
        ("scenario_n30_kappa1", &["kappa", "reference", "inverse_kappa"]),
        ("scenario_n50_kappa1", &["kappa", "reference", "inverse_kappa"]),
        ("scenario_n10_kappa5", &["kappa", "reference", "inverse_kappa"]),
        ("scenario_n30_kappa5", &["kappa", "reference", "inverse_kappa"]),
        ("scenario_n50_kappa5", &["kappa", "reference", "inverse_kappa"]),
        ("scenario_summary", &["n", "kappa_true", "prior", "mode", "mean", "sd", "lower", "upper"]),
        ("calibration_study", &["replicate", "kappa_tilde", "sd_calibrated", "sd_uncalibrated", "sd_sandwich"]),
    ];
    let csvs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")).count();
    assert_eq!(csvs, 12);
    for (name, header) in expected {
        let (h, rows) = read_csv(&out.join(format!("{name}.csv")));
        assert_eq!(&h, header, "{name}");
        assert!(!rows.is_empty());
    }
}

#[test]
fn regression_reproduce_sweep_starts_at_log_score() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&["reproduce", "regression", "--out", s(&out), "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out.join("gamma_sweep.csv"));
    assert_eq!(rows.len(), 21);
    assert_eq!(h[0], "gamma");
    let first = &rows[0];
    assert_eq!(first[0], 1.0);
    // at gamma = 1 both columns use the log score; the priors differ only in
    // sigma, so the beta modes coincide
    let p = 4;
    for j in 0..3 {
        assert!((first[1 + j] - first[1 + p + j]).abs() < 1e-4, "{h:?} {first:?}");
    }
}
