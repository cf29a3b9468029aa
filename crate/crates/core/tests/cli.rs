use std::path::Path;
use std::process::{Command, Output};

use superadditive::circuit::CircuitPlan;
use superadditive::hadamard::construct;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superadditive"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn sample_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/direct_ppm_l8.conf")
        .to_string_lossy()
        .into_owned()
}

#[test]
fn analytic_table() {
    let text = stdout(&run(&["analytic", "--nbar", "2e-4", "--L", "2"]));
    let row = text
        .lines()
        .find(|l| l.starts_with("hybrid_optimal,"))
        .unwrap();
    let ratio: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((ratio - 1.025).abs() < 1e-3);

    let json = stdout(&run(&[
        "analytic", "--nbar", "2e-4", "--L", "8", "--format", "json",
    ]));
    let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(rows
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["quantity"] == "direct_ppm"));
}

#[test]
fn missing_hadamard_order_fails() {
    let out = run(&["analytic", "--nbar", "2e-4", "--L", "7"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("order 7"));
    assert!(!run(&["decompose", "--L", "7"]).status.success());
}

#[test]
fn sample_config_runs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = sample_config();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let prefix = dir.path().join(name);
        let out = run(&[
            "simulate",
            "--config",
            &config,
            "--trials",
            "200000",
            "--out",
            prefix.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let json = std::fs::read_to_string(prefix.with_extension("json")).unwrap();
        let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
        outputs.push((json, csv));
    }
    assert_eq!(outputs[0], outputs[1]);
    let report: serde_json::Value = serde_json::from_str(&outputs[0].0).unwrap();
    assert_eq!(report["seed"], 1);
    assert_eq!(report["trials"], 200_000);
    let dev = (report["empirical_rate"].as_f64().unwrap()
        - report["analytic_rate"].as_f64().unwrap())
    .abs();
    assert!(dev < 3.0 * report["empirical_stderr"].as_f64().unwrap());
    assert!(outputs[0].1.starts_with("input,w0,"));
}

#[test]
fn zero_trials_is_rejected_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "nbar = 0.02\nL = 8\ntrials = 0\n").unwrap();
    let out = run(&["simulate", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn sweep_csv_round_trips_ratios() {
    let text = stdout(&run(&["sweep", "--continuous", "20"]));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let num = |name: &str| f[col(name)].parse::<f64>().unwrap();
        let exact = num("exact_rate") / num("individual_rate");
        let asym = num("asymptotic_rate") / num("individual_asymptotic");
        assert!(
            (exact - num("ratio_exact")).abs() <= 1e-12 * exact.abs().max(1.0),
            "{line}"
        );
        assert!(
            (asym - num("ratio_asymptotic")).abs() <= 1e-12 * asym.abs().max(1.0),
            "{line}"
        );
        count += 1;
    }
    assert_eq!(count, 5 * 2 * 9 + 2 * 2 * 20);

    let raw = stdout(&run(&[
        "sweep",
        "--raw",
        "--continuous",
        "0",
        "--schemes",
        "direct-ppm",
    ]));
    assert!(!raw.contains("ratio"));
    assert_eq!(raw.lines().count(), 1 + 2 * 9);
}

#[test]
fn decompose_dumps() {
    for (l, max_ops) in [(2usize, 1usize), (8, 28), (12, 66)] {
        let text = stdout(&run(&["decompose", "--L", &l.to_string()]));
        let plan = CircuitPlan::from_text(l, &text).unwrap();
        assert!(plan.num_beam_splitters() <= max_ops);
        let w = construct(l).unwrap().rescaled();
        assert!((plan.compose() - w).amax() < 1e-10);
        let reported: f64 = text
            .lines()
            .find_map(|line| line.strip_prefix("# max_reconstruction_error = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(reported < 1e-10);
        if l == 2 {
            let refl: f64 = text
                .lines()
                .find(|line| !line.starts_with('#'))
                .and_then(|line| line.split_whitespace().nth(2))
                .unwrap()
                .parse()
                .unwrap();
            assert!((refl - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn dolinar_table() {
    let text = stdout(&run(&[
        "dolinar", "--nbar", "0", "--slices", "1,10,100", "--trials", "40000",
    ]));
    for line in text.lines().skip(1) {
        let rate: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((rate - 0.5).abs() < 0.01, "{line}");
    }
    let again = stdout(&run(&[
        "dolinar", "--nbar", "0", "--slices", "1,10,100", "--trials", "40000",
    ]));
    assert_eq!(text, again);
}

#[test]
fn hadamard_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h12.txt");
    let export = run(&[
        "hadamard",
        "export",
        "--L",
        "12",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(export.status.success());
    let summary = stdout(&run(&["hadamard", "import", path.to_str().unwrap()]));
    assert!(summary.contains("order = 12"));
    assert_eq!(
        stdout(&run(&["hadamard", "validate", path.to_str().unwrap()])),
        "valid\n"
    );

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 1 1\n1 -1 1\n1 1 -1\n").unwrap();
    let out = run(&["hadamard", "validate", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "invalid\n");
    assert!(!run(&["hadamard", "import", bad.to_str().unwrap()])
        .status
        .success());
}
