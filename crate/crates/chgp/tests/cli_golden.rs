//! End-to-end CLI checks: golden reproducibility of the simulate → fit →
//! predict pipeline, exact interpolation through the CLI, exit codes and
//! line-numbered input errors.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chgp")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
    )
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chgp-golden-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

const SIM_INI: &str = "\
[kernel]
family = ch
nu = 0.5
alpha = 1.0
beta = 0.2
sigma2 = 1.0

[design]
kind = lhs
bounds = 0,1,0,1
n = 40
n_candidates = 20

[simulate]
n_reps = 1
";

const FIT_INI: &str = "\
[kernel]
family = ch
nu = 0.5
alpha = 1.5
beta = 0.3

[fit]
objective = profile_ml
allow_small_alpha = true
n_starts = 2
max_iters = 60
x_tol = 1e-4
f_tol = 1e-6
seed = 5
";

#[test]
fn golden_pipeline_is_byte_reproducible() {
    let dir = workdir("pipeline");
    write(&dir.join("sim.ini"), SIM_INI);
    write(&dir.join("fit.ini"), FIT_INI);

    let sim = dir.join("sim.csv").to_string_lossy().to_string();
    let (code, _, err) = run(&[
        "simulate",
        "--config",
        dir.join("sim.ini").to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        &sim,
    ]);
    assert_eq!(code, 0, "{err}");

    // turn the realization into a data file: x1,x2,z
    let text = std::fs::read_to_string(&sim).unwrap();
    let mut data = String::from("x1,x2,z\n");
    for line in text.lines().skip(1) {
        data.push_str(line);
        data.push('\n');
    }
    write(&dir.join("data.csv"), &data);
    write(&dir.join("targets.csv"), "x1,x2\n0.5,0.5\n0.9,0.1\n");

    let fit1 = dir.join("fit1.json");
    let fit2 = dir.join("fit2.json");
    for out in [&fit1, &fit2] {
        let (code, _, err) = run(&[
            "fit",
            "--data",
            dir.join("data.csv").to_str().unwrap(),
            "--config",
            dir.join("fit.ini").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let f1 = std::fs::read(&fit1).unwrap();
    let f2 = std::fs::read(&fit2).unwrap();
    assert_eq!(f1, f2, "fit JSON must be byte-identical across reruns");

    let pred1 = dir.join("pred1.csv");
    let pred2 = dir.join("pred2.csv");
    for (fit, pred) in [(&fit1, &pred1), (&fit2, &pred2)] {
        let (code, _, err) = run(&[
            "predict",
            "--fit",
            fit.to_str().unwrap(),
            "--targets",
            dir.join("targets.csv").to_str().unwrap(),
            "--out",
            pred.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let p1 = std::fs::read(&pred1).unwrap();
    let p2 = std::fs::read(&pred2).unwrap();
    assert_eq!(p1, p2, "prediction CSV must be byte-identical");
    assert!(String::from_utf8_lossy(&p1).starts_with("x1,x2,mean,sd,lo95,hi95\n"));
}

#[test]
fn predict_at_training_point_has_zero_sd() {
    let dir = workdir("interp");
    // fixed tiny dataset, fixed-parameter "fit" via fixed bounds around the
    // template: easiest is a fit with everything fixed
    write(
        &dir.join("data.csv"),
        "x1,x2,z\n0.1,0.2,1.0\n0.7,0.3,-0.5\n0.4,0.9,0.3\n0.85,0.75,0.8\n",
    );
    write(
        &dir.join("fit.ini"),
        "[kernel]\nfamily = matern\nnu = 1.5\nphi = 0.4\n\n[fit]\nobjective = profile_ml\nfixed = phi\nn_starts = 1\nmax_iters = 5\n",
    );
    write(&dir.join("targets.csv"), "x1,x2\n0.7,0.3\n");
    let (code, _, err) = run(&[
        "fit",
        "--data",
        dir.join("data.csv").to_str().unwrap(),
        "--config",
        dir.join("fit.ini").to_str().unwrap(),
        "--out",
        dir.join("fit.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run(&[
        "predict",
        "--fit",
        dir.join("fit.json").to_str().unwrap(),
        "--targets",
        dir.join("targets.csv").to_str().unwrap(),
        "--out",
        dir.join("pred.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.join("pred.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cells[2] - (-0.5)).abs() < 1e-8, "mean {}", cells[2]);
    assert!(cells[3].abs() < 1e-8, "sd {}", cells[3]);
}

#[test]
fn spectral_precondition_exits_2() {
    let dir = workdir("spectral");
    write(
        &dir.join("kern.ini"),
        "[kernel]\nfamily = ch\nnu = 0.5\nalpha = 0.4\nbeta = 1.0\n",
    );
    let (code, _, err) = run(&[
        "spectral",
        "--config",
        dir.join("kern.ini").to_str().unwrap(),
        "--dim",
        "1",
        "--omega-max",
        "10",
        "--out",
        dir.join("s.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "stderr: {err}");
    assert!(err.contains("alpha <= d/2"), "{err}");
}

#[test]
fn malformed_inputs_exit_1_with_line_numbers() {
    let dir = workdir("badinput");
    write(&dir.join("bad.csv"), "x1,z\n0.0,1.0\n0.5,not_a_number\n");
    write(
        &dir.join("fit.ini"),
        "[kernel]\nfamily = matern\nnu = 0.5\nphi = 1.0\n\n[fit]\nn_starts = 1\nmax_iters = 5\n",
    );
    let (code, _, err) = run(&[
        "fit",
        "--data",
        dir.join("bad.csv").to_str().unwrap(),
        "--config",
        dir.join("fit.ini").to_str().unwrap(),
        "--out",
        dir.join("f.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");

    // unknown config keys are hard errors
    write(
        &dir.join("typo.ini"),
        "[kernel]\nfamily = matern\nnu = 0.5\nphi = 1.0\nrange = 2.0\n",
    );
    write(&dir.join("data.csv"), "x1,z\n0.0,1.0\n1.0,2.0\n2.0,0.5\n");
    let (code, _, err) = run(&[
        "fit",
        "--data",
        dir.join("data.csv").to_str().unwrap(),
        "--config",
        dir.join("typo.ini").to_str().unwrap(),
        "--out",
        dir.join("f.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("range") && err.contains("unknown key"), "{err}");

    // missing file
    let (code, _, _) = run(&[
        "fit",
        "--data",
        dir.join("nope.csv").to_str().unwrap(),
        "--config",
        dir.join("fit.ini").to_str().unwrap(),
        "--out",
        dir.join("f.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);

    // bad usage
    let (code, _, _) = run(&["fit"]);
    assert_eq!(code, 1);
}

#[test]
fn experiment_realizations_reproducible() {
    let dir = workdir("real1d");
    write(
        &dir.join("study.ini"),
        "[study]\nkind = realizations_1d\nn_points = 128\ndomain = 0,2000\nkernels = m1,c1\nseed = 3\n\n\
         [m1]\nfamily = matern\nnu = 0.5\nphi = 57.0\n\n\
         [c1]\nfamily = ch\nnu = 0.5\nalpha = 0.5\nbeta = 14.0\n",
    );
    for out in ["a", "b"] {
        let (code, _, err) = run(&[
            "experiment",
            "--config",
            dir.join("study.ini").to_str().unwrap(),
            "--out-dir",
            dir.join(out).to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let a = std::fs::read(dir.join("a/realizations.csv")).unwrap();
    let b = std::fs::read(dir.join("b/realizations.csv")).unwrap();
    assert_eq!(a, b);
    let header = String::from_utf8_lossy(&a)
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, "x,m1,c1");
}
