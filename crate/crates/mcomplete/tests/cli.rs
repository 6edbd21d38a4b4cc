use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mcomplete(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcomplete"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_fully_observed() {
    let dir = TempDir::new().unwrap();
    let o = mcomplete(dir.path(), &["synth", "--n", "64", "--r", "3", "--p", "0", "--methods", "two_phase", "--seeds", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("synth.csv"));
    for name in ["method", "n", "r", "p", "seed", "IT", "time_s", "Rer", "rank_hat"] {
        column(&header, name);
    }
    assert_eq!(rows.len(), 1);
    let rer: f64 = rows[0][column(&header, "Rer")].parse().unwrap();
    assert!(rer <= 1e-12, "{rer}");
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("synth_summary.json")).unwrap()).unwrap();
    assert!(summary["methods"][0]["median_rer"].as_f64().unwrap() <= 1e-12);
    assert!(dir.path().join("synth_meta.json").exists());
}

#[test]
fn synth_rows_are_methods_times_seeds() {
    let dir = TempDir::new().unwrap();
    let o = mcomplete(
        dir.path(),
        &["--threads", "2", "synth", "--n", "40", "--r", "2", "--p", "0.3", "--methods", "two_phase,frsi,svt", "--seeds", "3"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("synth.csv"));
    assert_eq!(rows.len(), 9);
    let m = column(&header, "method");
    let s = column(&header, "seed");
    let order: Vec<(String, String)> = rows.iter().map(|r| (r[m].clone(), r[s].clone())).collect();
    assert_eq!(order[0], ("two_phase".into(), "0".into()));
    assert_eq!(order[4], ("frsi".into(), "1".into()));
    assert_eq!(order[8], ("svt".into(), "2".into()));
}

#[test]
fn identical_invocations_give_identical_bodies() {
    let runs: Vec<Vec<Vec<String>>> = (0..2)
        .map(|k| {
            let dir = TempDir::new().unwrap();
            let threads = if k == 0 { "1" } else { "3" };
            let o = mcomplete(
                dir.path(),
                &["--threads", threads, "synth", "--n", "50", "--r", "2", "--p", "0.4", "--methods", "two_phase,fpc", "--seeds", "2"],
            );
            assert!(o.status.success(), "{}", stderr(&o));
            let (header, rows) = read_csv(&dir.path().join("synth.csv"));
            let t = column(&header, "time_s");
            rows.into_iter().map(|mut r| {
                r.remove(t);
                r
            }).collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn beta_sweep_single_beta() {
    let dir = TempDir::new().unwrap();
    let o = mcomplete(dir.path(), &["beta-sweep", "--n", "60", "--r", "2", "--p", "0.5", "--beta", "19", "--w", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("beta_sweep_n60_r2_p0.5.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][column(&header, "beta")], "19");
    let it: usize = rows[0][column(&header, "iterations")].parse().unwrap();
    assert!(it <= 40);
}

#[test]
fn beta_sweep_iterations_within_budget() {
    let dir = TempDir::new().unwrap();
    let o = mcomplete(dir.path(), &["beta-sweep", "--n", "50", "--r", "3", "--p", "0.6", "--beta", "2..6", "--w", "15"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("beta_sweep_n50_r3_p0.6.csv"));
    assert_eq!(rows.len(), 5);
    let c = column(&header, "iterations");
    assert!(rows.iter().all(|r| r[c].parse::<usize>().unwrap() <= 15));
}

#[test]
fn trace_budget_one_and_fejer_column() {
    let dir = TempDir::new().unwrap();
    let o = mcomplete(dir.path(), &["trace", "--method", "frsi", "--n", "40", "--r", "2", "--p", "0.3", "--it-max", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("trace_frsi.csv"));
    assert_eq!(rows.len(), 1);

    let o = mcomplete(dir.path(), &["trace", "--method", "frsi", "--n", "60", "--r", "3", "--p", "0.3", "--ground-truth"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("trace_frsi.csv"));
    let f = column(&header, "fejer_slack");
    assert!(rows.len() > 1);
    assert!(rows.iter().all(|r| r[f].parse::<f64>().unwrap() >= -1e-8));
}

#[test]
fn trace_marks_the_phase_boundary() {
    let dir = TempDir::new().unwrap();
    let o = mcomplete(dir.path(), &["trace", "--method", "two_phase", "--n", "60", "--r", "3", "--p", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("trace_two_phase.csv"));
    let ph = column(&header, "phase");
    let phases: Vec<&str> = rows.iter().map(|r| r[ph].as_str()).collect();
    assert_eq!(phases[0], "1");
    assert_eq!(phases.last().copied(), Some("2"));
    assert!(phases.windows(2).filter(|w| w[0] != w[1]).count() == 1);
}

#[test]
fn trace_from_generated_instance() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("inst.txt");
    let o = mcomplete(dir.path(), &["gen", "--n", "30", "--r", "2", "--p", "0.4", "--seed", "7", "--out", inst.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("inst.json").exists());
    let o = mcomplete(dir.path(), &["trace", "--method", "frsi", "--r", "2", "--input", inst.to_str().unwrap(), "--ground-truth"]);
    assert!(o.status.success(), "{}", stderr(&o));

    std::fs::remove_file(dir.path().join("inst.json")).unwrap();
    let o = mcomplete(dir.path(), &["trace", "--method", "frsi", "--r", "2", "--input", inst.to_str().unwrap(), "--ground-truth"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ground-truth"));
    let o = mcomplete(dir.path(), &["trace", "--method", "frsi", "--r", "2", "--input", inst.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn ground_truth_with_ratings_is_rejected() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("u.data");
    std::fs::write(&data, "1\t1\t5\t0\n2\t2\t3\t0\n1\t2\t4\t0\n").unwrap();
    let o = mcomplete(dir.path(), &["trace", "--method", "frsi", "--r", "1", "--dataset", data.to_str().unwrap(), "--ground-truth"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn movielens_toy_file() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("u.data");
    std::fs::write(&data, "1\t1\t5\t0\n2\t2\t3\t0\n1\t2\t4\t0\n").unwrap();
    let o = mcomplete(
        dir.path(),
        &["movielens", "--dataset", data.to_str().unwrap(), "--r", "1", "--observed-shape", "--holdout", "0.34", "--methods", "two_phase,frsi,svt,fpc"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("movielens.csv"));
    for name in ["method", "IT", "time_s", "RMSE_omega_hat", "RMSE_test"] {
        column(&header, name);
    }
    assert_eq!(rows.len(), 4);
    for name in ["RMSE_omega_hat", "RMSE_test"] {
        let c = column(&header, name);
        for r in &rows {
            let v: f64 = r[c].parse().unwrap();
            assert!(v.is_finite() && v >= 0.0);
        }
    }
}

#[test]
fn movielens_rank_sweep_and_canonical_shape() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("u.data");
    let mut text = String::new();
    for u in 1..=12 {
        for i in 1..=10 {
            if (u * 7 + i * 3) % 4 != 0 {
                text.push_str(&format!("{u}\t{i}\t{}\t881250949\n", 1 + (u + i) % 5));
            }
        }
    }
    std::fs::write(&data, text).unwrap();
    let o = mcomplete(dir.path(), &["movielens", "--dataset", data.to_str().unwrap(), "--r", "1,2", "--observed-shape"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("movielens.csv"));
    let r = column(&header, "r");
    assert_eq!(rows.iter().map(|row| row[r].as_str()).collect::<Vec<_>>(), ["1", "2"]);

    let o = mcomplete(dir.path(), &["movielens", "--dataset", data.to_str().unwrap(), "--r", "2", "--methods", "frsi"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("943 x 1682"));
}

#[test]
fn missing_dataset_names_path_and_format() {
    let dir = TempDir::new().unwrap();
    let o = mcomplete(dir.path(), &["movielens", "--dataset", "/nonexistent/ratings.dat", "--format", "ml1m"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("/nonexistent/ratings.dat") && err.contains("ml1m"), "{err}");
}

#[test]
fn invalid_flags_exit_with_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["synth", "--n", "30", "--r", "2", "--p", "0.3", "--methods", "frsi,frsi"][..],
        &["synth", "--n", "30", "--r", "2", "--p", "0.3", "--methods", "newton"],
        &["synth", "--n", "30", "--r", "40", "--p", "0.3"],
        &["synth", "--n", "30", "--r", "2", "--p", "1.5"],
        &["synth", "--n", "30", "--r", "2", "--p", "0.3", "--tol-bundle", "loose"],
        &["beta-sweep", "--n", "30", "--r", "2", "--beta", "0"],
        &["trace", "--method", "frsi", "--r", "2"],
    ] {
        let o = mcomplete(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn config_file_and_env_out_dir() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("solver.cfg");
    std::fs::write(&cfg, "it_max = 2\nw = 2\n").unwrap();
    let out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_mcomplete"))
        .env("MCOMPLETE_OUT_DIR", &out)
        .args(["synth", "--n", "40", "--r", "2", "--p", "0.5", "--methods", "frsi", "--seeds", "1", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("synth.csv"));
    assert_eq!(rows[0][column(&header, "IT")], "2");
    assert_eq!(rows[0][column(&header, "status")], "budget-exhausted");

    std::fs::write(&cfg, "it_max = 2\nfrobnicate = 1\n").unwrap();
    let o = mcomplete(dir.path(), &["synth", "--n", "40", "--r", "2", "--p", "0.5", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
