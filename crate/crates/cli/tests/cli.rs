use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const DIRICHLET_CASE_I: &str = "problem = \"dirichlet-1d\"
[dirichlet]
n = 127
mu = 1.0
[sweep]
c_min = -1e3
c_max = -1e-3
count = 16
";

fn nehari(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nehari"))
        .current_dir(dir)
        .env_remove("NEHARI_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn dirichlet_eigenvalue_is_pi_squared() {
    let dir = tempfile::tempdir().unwrap();
    let out = nehari(dir.path(), &["--problem", "dirichlet-1d", "eig"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("out/lambda1.json"));
    let value = summary["value"].as_f64().unwrap();
    assert!(
        (value - std::f64::consts::PI.powi(2)).abs() < 1e-2,
        "{value}"
    );
    let csv = std::fs::read_to_string(dir.path().join("out/eigenfunction.csv")).unwrap();
    assert!(csv.starts_with("x,u\n"));
    assert_eq!(csv.lines().count(), 512);
}

#[test]
fn outputs_are_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, threads) in ["1", "4", "4"].iter().enumerate() {
        let out_dir = format!("run{k}");
        let out = nehari(
            dir.path(),
            &[
                "--problem",
                "dirichlet-1d",
                "--threads",
                threads,
                "--output-dir",
                &out_dir,
                "eig",
            ],
        );
        assert_eq!(code(&out), 0);
        let read = |name: &str| std::fs::read(dir.path().join(&out_dir).join(name)).unwrap();
        files.push((read("lambda1.json"), read("eigenfunction.csv")));
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn seed_precedence_is_config_then_env_then_flag() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[solver]\nrng_seed = 5\n").unwrap();
    let seed_of = |out: Output| -> i64 {
        let text = String::from_utf8(out.stdout).unwrap();
        let cfg: toml::Value = toml::from_str(&text).unwrap();
        cfg["solver"]["rng_seed"].as_integer().unwrap()
    };
    assert_eq!(
        seed_of(nehari(dir.path(), &["--config", "c.toml", "print-config"])),
        5
    );
    let with_env = Command::new(env!("CARGO_BIN_EXE_nehari"))
        .current_dir(dir.path())
        .env("NEHARI_SEED", "77")
        .args(["--config", "c.toml", "print-config"])
        .output()
        .unwrap();
    assert_eq!(seed_of(with_env), 77);
    let with_flag = Command::new(env!("CARGO_BIN_EXE_nehari"))
        .current_dir(dir.path())
        .env("NEHARI_SEED", "77")
        .args(["--config", "c.toml", "--seed", "9", "print-config"])
        .output()
        .unwrap();
    assert_eq!(seed_of(with_flag), 9);
}

#[test]
fn printed_config_reloads_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), DIRICHLET_CASE_I).unwrap();
    let first = nehari(dir.path(), &["--config", "c.toml", "print-config"]);
    assert_eq!(code(&first), 0);
    std::fs::write(dir.path().join("full.toml"), &first.stdout).unwrap();
    let second = nehari(dir.path(), &["--config", "full.toml", "print-config"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad_sigma.toml"), "[sps]\nsigma = 4.0\n").unwrap();
    let out = nehari(dir.path(), &["--config", "bad_sigma.toml", "eig"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("(18/7, 3)"));

    std::fs::write(dir.path().join("broken.toml"), "[sps\nn = 3").unwrap();
    assert_eq!(
        code(&nehari(dir.path(), &["--config", "broken.toml", "eig"])),
        1
    );
    std::fs::write(dir.path().join("typo.toml"), "[solver]\nmax_iter = 10\n").unwrap();
    assert_eq!(
        code(&nehari(dir.path(), &["--config", "typo.toml", "eig"])),
        1
    );

    // Case I lives on c < 0.
    std::fs::write(
        dir.path().join("wrong_sign.toml"),
        "[sweep]\nc_min = 1.0\nc_max = 10.0\n",
    )
    .unwrap();
    assert_eq!(
        code(&nehari(
            dir.path(),
            &["--config", "wrong_sign.toml", "trace"]
        )),
        1
    );
}

#[test]
fn case_two_below_lambda_one_is_certified_nonexistent() {
    let dir = tempfile::tempdir().unwrap();
    let config = DIRICHLET_CASE_I
        .replace("mu = 1.0", "mu = -1.0")
        .replace("c_min = -1e3", "c_min = 1e-3")
        .replace("c_max = -1e-3", "c_max = 1e3");
    std::fs::write(dir.path().join("c.toml"), config).unwrap();
    let out = nehari(
        dir.path(),
        &["--config", "c.toml", "solve", "--lambda-target", "5"],
    );
    assert_eq!(code(&out), 3);
    let summary = json(&dir.path().join("out/solution.json"));
    assert_eq!(summary["status"], "nonexistence");
    assert_eq!(summary["case"], "II");
}

#[test]
fn solve_then_verify_accepts_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), DIRICHLET_CASE_I).unwrap();
    let out = nehari(
        dir.path(),
        &["--config", "c.toml", "solve", "--lambda-target", "7"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "solution.json",
        "solution.csv",
        "curve.csv",
        "curve.json",
        "curve.svg",
    ] {
        assert!(dir.path().join("out").join(name).exists(), "{name}");
    }
    let summary = json(&dir.path().join("out/solution.json"));
    assert_eq!(summary["status"], "accepted");
    let c = summary["c"].as_f64().unwrap().to_string();

    let verify = |state: &str, lambda: &str| {
        let out = nehari(
            dir.path(),
            &[
                "--config", "c.toml", "verify", "--state", state, "--lambda", lambda, "--c", &c,
            ],
        );
        let report: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
        (code(&out), report)
    };

    let (status, report) = verify("out/solution.csv", "7");
    assert_eq!(status, 0);
    assert_eq!(report["accepted"], true);
    assert!(report["weak_residual"].as_f64().unwrap() < 1e-6);

    // The same state does not solve the equation at a different λ.
    let (status, report) = verify("out/solution.csv", "7.5");
    assert_eq!(status, 2);
    assert_eq!(report["accepted"], false);

    let text = std::fs::read_to_string(dir.path().join("out/solution.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mid = lines.len() / 2;
    let (x, u) = lines[mid].split_once(',').unwrap();
    let bumped = u.parse::<f64>().unwrap() * 10.0;
    lines[mid] = format!("{x},{bumped:e}");
    std::fs::write(dir.path().join("tampered.csv"), lines.join("\n") + "\n").unwrap();
    let (status, report) = verify("tampered.csv", "7");
    assert_eq!(status, 2);
    assert_eq!(report["dominant"], "weak");

    let zeros: Vec<String> = text
        .lines()
        .skip(1)
        .map(|line| format!("{},0.0", line.split_once(',').unwrap().0))
        .collect();
    std::fs::write(
        dir.path().join("zero.csv"),
        format!("x,u\n{}\n", zeros.join("\n")),
    )
    .unwrap();
    let (status, report) = verify("zero.csv", "7");
    assert_eq!(status, 2);
    assert_eq!(report["zero_state"], true);
    assert_eq!(report["accepted"], false);

    std::fs::write(dir.path().join("short.csv"), "x,u\n0.5,1.0\n").unwrap();
    assert_eq!(verify("short.csv", "7").0, 1);
}

#[test]
fn uncrossed_target_is_a_convergence_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), DIRICHLET_CASE_I).unwrap();
    let out = nehari(
        dir.path(),
        &["--config", "c.toml", "solve", "--lambda-target", "-20"],
    );
    assert_eq!(code(&out), 2);
    assert_eq!(
        json(&dir.path().join("out/solution.json"))["status"],
        "not-crossed"
    );
}

#[test]
fn trace_writes_monotone_curve_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), DIRICHLET_CASE_I).unwrap();
    let out = nehari(dir.path(), &["--config", "c.toml", "trace"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("out/curve.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["c", "lambda", "grad_norm", "fiber_t"]
    );
    let rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[0].0, -1e3);
    assert!(rows
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 1e-4 * (1.0 + w[0].1.abs())));
    let sidecar = json(&dir.path().join("out/curve.json"));
    assert_eq!(sidecar["case"], "I");
    assert_eq!(sidecar["config"]["dirichlet"]["n"], 127);
    let svg = std::fs::read_to_string(dir.path().join("out/curve.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn dirichlet_eigenfunction_verifies_at_pi_squared() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&nehari(dir.path(), &["--problem", "dirichlet-1d", "eig"])),
        0
    );
    let pi2 = std::f64::consts::PI.powi(2).to_string();
    let out = nehari(
        dir.path(),
        &[
            "--problem",
            "dirichlet-1d",
            "verify",
            "--state",
            "out/eigenfunction.csv",
            "--lambda",
            &pi2,
            "--c",
            "0",
        ],
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(code(&out), 0, "{report}");
    assert_eq!(report["accepted"], true);
}

#[test]
fn sps_eigenvalue_is_positive_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for out_dir in ["a", "b"] {
        let out = nehari(dir.path(), &["--output-dir", out_dir, "eig"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        runs.push(std::fs::read(dir.path().join(out_dir).join("lambda1.json")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    let summary: Value = serde_json::from_slice(&runs[0]).unwrap();
    assert!(summary["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn equal_signs_match_no_case() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[sps]\ntau = 4.0\n").unwrap();
    let out = nehari(dir.path(), &["--config", "c.toml", "eig"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("six sign cases"));
}
