//! End-to-end runs of the compiled `qcnn` binary on a synthetic fixture.

use std::path::Path;
use std::process::Command;

fn write_u32_be(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

fn synthetic_dataset(dir: &Path) {
    let mut seed = 7u64;
    let mut next = || {
        seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for (prefix, n) in [("train", 50usize), ("t10k", 20usize)] {
        let mut images = Vec::new();
        write_u32_be(&mut images, 0x0000_0803);
        write_u32_be(&mut images, n as u32);
        write_u32_be(&mut images, 28);
        write_u32_be(&mut images, 28);
        let mut labels = Vec::new();
        write_u32_be(&mut labels, 0x0000_0801);
        write_u32_be(&mut labels, n as u32);
        for i in 0..n {
            let class = (i % 2) as u8;
            for p in 0..784 {
                let bright = (class == 0) == (p < 392);
                images.push((if bright { 190.0 } else { 35.0 } + next() * 40.0) as u8);
            }
            labels.push(class);
        }
        std::fs::write(dir.join(format!("{prefix}-images-idx3-ubyte")), images).unwrap();
        std::fs::write(dir.join(format!("{prefix}-labels-idx1-ubyte")), labels).unwrap();
    }
}

fn qcnn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcnn"))
}

#[test]
fn run_verb_trains_and_emits_reports() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_dataset(dir.path());
    let out = dir.path().join("out");

    let status = qcnn()
        .args(["run", "--dataset", "mnist", "--pair", "0v1"])
        .args(["--model", "ae-amplitude", "--ansatz", "1", "--seeds", "7"])
        .args(["--iterations", "3", "--batch-size", "5"])
        .arg("--dataset-dir")
        .arg(dir.path())
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("results.csv").exists());
    assert!(out.join("summary.json").exists());
    assert!(out.join("plot_accuracy.csv").exists());
    assert!(out
        .join("mnist_0v1_ae-amplitude_ansatz1_seed7.json")
        .exists());

    // Re-aggregation from the persisted artifacts.
    let report_out = dir.path().join("reagg");
    let status = qcnn()
        .arg("report")
        .arg("--artifacts")
        .arg(&out)
        .arg("--out")
        .arg(&report_out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(report_out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3); // header, seed row, mean row
}

#[test]
fn dry_run_checks_data_without_training() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_dataset(dir.path());
    let output = qcnn()
        .args([
            "run",
            "--dataset",
            "mnist",
            "--pair",
            "0v1",
            "--model",
            "conventional",
        ])
        .args(["--ansatz", "1", "--dry-run"])
        .arg("--dataset-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("train 50 / test 20"), "stdout: {stdout}");
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_dataset(dir.path());
    let conf = dir.path().join("exp.conf");
    std::fs::write(
        &conf,
        format!(
            "dataset = mnist\npair = 0v1\nmodel = ae-amplitude\nansatz = 1\n\
             seeds = 3\niterations = 2\nbatch_size = 5\ndata_dir = {}\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let output = qcnn()
        .args(["run", "--config"])
        .arg(&conf)
        .args(["--seeds", "4"]) // flag overrides the file
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("seed   4"), "stdout: {stdout}");
    assert!(!stdout.contains("seed   3"));
}

#[test]
fn suite_verb_runs_a_filtered_grid() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_dataset(dir.path());
    let out = dir.path().join("out");
    let status = qcnn()
        .args(["suite", "--dataset", "mnist", "--pairs", "0v1"])
        .args(["--models", "ae-amplitude,conventional", "--ansatz", "1"])
        .args(["--seeds", "5", "--iterations", "2", "--batch-size", "5"])
        .arg("--dataset-dir")
        .arg(dir.path())
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    // Two cells × (one seed row + one mean row) + header.
    assert_eq!(csv.lines().count(), 5);
    let plot = std::fs::read_to_string(out.join("plot_accuracy.csv")).unwrap();
    assert_eq!(plot.lines().count(), 3);
}

#[test]
fn verify_verb_passes_without_data() {
    let output = qcnn().arg("verify").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("0 failed"), "stdout: {stdout}");
}

#[test]
fn bad_flags_fail_cleanly() {
    let output = qcnn()
        .args(["run", "--model", "transformer"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown model"), "stderr: {stderr}");
}
