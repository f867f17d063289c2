use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: [&str; 8] = ["--edge-embed", "8", "--edge-hidden", "8", "--node-embed", "8", "--node-hidden", "8"];

fn mesrnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mesrnn")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mesrnn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn train_small(dir: &Path, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--synth", "crossing:n=4,scenes=12", "--epochs", "2", "--seed", "7", "--dropout", "0", "--out", out];
    args.extend(SMALL);
    args.extend(extra);
    run_in(dir, &args)
}

#[test]
fn train_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(train_small(dir.path(), "a.ckpt", &[]).status.success());
    assert!(train_small(dir.path(), "b.ckpt", &[]).status.success());
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.ckpt"), read("b.ckpt"));
    assert_eq!(read("a.ckpt.history.csv"), read("b.ckpt.history.csv"));
    let manifest: serde_json::Value = serde_json::from_slice(&read("a.ckpt.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["config"]["lr"], 0.001);
    assert_eq!(manifest["seed"], 7);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(train_small(dir.path(), "a.ckpt", &[]).status.success());
    let o = run_in(dir.path(), &["train", "--config", "a.ckpt.manifest.json", "--out", "c.ckpt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(dir.path().join("a.ckpt")).unwrap(), fs::read(dir.path().join("c.ckpt")).unwrap());
}

#[test]
fn config_file_flags_yield_to_command_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# small run\nsynth=crossing:n=4,scenes=12\nepochs=9\nseed=7\ndropout=0\n").unwrap();
    let mut args = vec!["train", "--config", "run.cfg", "--epochs", "2", "--out", "cfg.ckpt"];
    args.extend(SMALL);
    assert!(run_in(dir.path(), &args).status.success());
    assert!(train_small(dir.path(), "flags.ckpt", &[]).status.success());
    assert_eq!(fs::read(dir.path().join("cfg.ckpt")).unwrap(), fs::read(dir.path().join("flags.ckpt")).unwrap());
}

#[test]
fn missing_out_is_a_usage_error() {
    let o = mesrnn(&["train", "--synth", "crossing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--out"));
}

#[test]
fn invalid_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(train_small(dir.path(), "x.ckpt", &["--dropout", "1.5"]).status.code(), Some(2));
    assert_eq!(mesrnn(&["train", "--synth", "crossing", "--model", "gru", "--out", "x"]).status.code(), Some(2));
    assert_eq!(mesrnn(&["verify", "--tol", "0"]).status.code(), Some(2));
}

#[test]
fn bad_synth_spec_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["train", "--synth", "crossing:n=0", "--out", "x.ckpt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn huge_learning_rate_stays_finite() {
    let dir = tempfile::tempdir().unwrap();
    let o = train_small(dir.path(), "big.ckpt", &["--lr", "1e6"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn overflowing_coordinates_exit_with_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for f in 0..20 {
        let x = if f % 2 == 0 { -1e308 } else { 1e308 };
        text.push_str(&format!("{} 1 {x:e} {}\n{} 2 {} {}\n", f * 10, f as f64 * 0.5, f * 10, f as f64 * 0.1, -0.5 * f as f64));
    }
    fs::write(dir.path().join("huge.txt"), text).unwrap();
    let mut args = vec!["train", "--data", "huge.txt", "--epochs", "2", "--val-fraction", "0", "--out", "h.ckpt"];
    args.extend(SMALL);
    let o = run_in(dir.path(), &args);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("non-finite loss at epoch 1"), "{}", stderr(&o));
}

#[test]
fn eval_writes_reports_and_checks_the_variant() {
    let dir = tempfile::tempdir().unwrap();
    assert!(train_small(dir.path(), "m.ckpt", &[]).status.success());
    let o = run_in(dir.path(), &["eval", "--checkpoint", "m.ckpt", "--synth", "crossing:n=4,scenes=12", "--out", "ev"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("ev/metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    let ade: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert!(ade.is_finite() && ade > 0.0);
    assert!(dir.path().join("ev/results.json").exists());

    let o = run_in(dir.path(), &["eval", "--checkpoint", "m.ckpt", "--model", "vlstm", "--synth", "crossing", "--out", "ev2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("expected vlstm"));
}

#[test]
fn eval_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert!(train_small(dir.path(), "m.ckpt", &[]).status.success());
    for (out, workers) in [("e1", "1"), ("e2", "1"), ("e3", "3")] {
        let o = run_in(
            dir.path(),
            &["eval", "--checkpoint", "m.ckpt", "--synth", "overtaking:n=3,scenes=9", "--workers", workers, "--out", out],
        );
        assert!(o.status.success());
    }
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("e1/metrics.csv"), read("e2/metrics.csv"));
    assert_eq!(read("e1/metrics.csv"), read("e3/metrics.csv"));
    assert_eq!(read("e1/results.json"), read("e2/results.json"));
}

#[test]
fn loo_over_two_synthetic_splits_gives_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "eval", "--loo", "--synth", "crossing:n=3,scenes=6", "--synth", "overtaking:n=3,scenes=6,seed=1",
        "--epochs", "1", "--out", "loo",
    ];
    args.extend(SMALL);
    let o = run_in(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("loo/metrics.csv")).unwrap();
    let splits: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(splits, ["crossing", "overtaking", "average"]);
}

#[test]
fn loo_over_split_directories() {
    let dir = tempfile::tempdir().unwrap();
    for (name, spec) in [("a", "crossing:n=3,scenes=4"), ("b", "parallel_group:n=3,scenes=4"), ("c", "stationary_mix:n=3,scenes=4")] {
        assert!(run_in(dir.path(), &["synth", "--spec", spec, "--out", name]).status.success());
    }
    let mut args = vec!["eval", "--loo", "--data", "a", "--data", "b", "--data", "c", "--epochs", "1", "--out", "loo"];
    args.extend(SMALL);
    let o = run_in(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("loo/metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let manifest = fs::read_to_string(dir.path().join("loo/manifest.json")).unwrap();
    assert!(manifest.contains("scene_0003.txt"));
}

fn synth_scene(dir: &Path) {
    assert!(run_in(dir, &["synth", "--spec", "crossing:n=3,scenes=2,seed=4", "--out", "syn"]).status.success());
}

#[test]
fn zero_checkpoint_freezes_positions() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path());
    assert!(run_in(dir.path(), &["init-zero", "--model", "srnn", "--out", "zero.ckpt"]).status.success());
    let o = run_in(dir.path(), &["predict", "--checkpoint", "zero.ckpt", "--scene", "syn/scene_0000.txt", "--out", "p"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("p/trajectories.csv")).unwrap();
    let mut last_observed = std::collections::HashMap::new();
    let mut predicted = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let xy: (f64, f64) = (f[4].parse().unwrap(), f[5].parse().unwrap());
        match f[3] {
            "observed" => {
                last_observed.insert(f[1].to_string(), xy);
            }
            "predicted" => {
                let (x, y) = last_observed[f[1]];
                assert!((x - xy.0).abs() < 1e-12 && (y - xy.1).abs() < 1e-12);
                predicted += 1;
            }
            _ => {}
        }
    }
    assert_eq!(predicted, 3 * 12);
}

#[test]
fn predict_svg_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path());
    assert!(train_small(dir.path(), "m.ckpt", &[]).status.success());
    let o = run_in(
        dir.path(),
        &["predict", "--checkpoint", "m.ckpt", "--scene", "syn/scene_0001.txt", "--format", "svg", "--out", "svg"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(dir.path().join("svg/scene_0000.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let opens = svg.matches("<g").count();
    let closes = svg.matches("</g>").count();
    assert_eq!(opens, closes);
    assert!(svg.contains("class=\"predicted\""));
}

#[test]
fn predict_json_lists_every_pedestrian() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path());
    assert!(run_in(dir.path(), &["init-zero", "--out", "zero.ckpt"]).status.success());
    let o = run_in(
        dir.path(),
        &["predict", "--checkpoint", "zero.ckpt", "--scene", "syn/scene_0000.txt", "--format", "json", "--out", "j"],
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("j/results.json")).unwrap()).unwrap();
    assert_eq!(v["scenes"][0]["ped_ids"].as_array().unwrap().len(), 3);
    assert_eq!(v["metrics"][0]["ade_norm"], 0.0_f64.max(v["metrics"][0]["ade_norm"].as_f64().unwrap()));
}

#[test]
fn predict_accepts_observation_only_files() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path());
    let text = fs::read_to_string(dir.path().join("syn/scene_0000.txt")).unwrap();
    let observed: String = text.lines().take(3 * 8).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("obs.txt"), observed).unwrap();
    assert!(run_in(dir.path(), &["init-zero", "--out", "zero.ckpt"]).status.success());
    let o = run_in(dir.path(), &["predict", "--checkpoint", "zero.ckpt", "--scene", "obs.txt", "--out", "p"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("p/trajectories.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",predicted,")).count(), 36);
    assert_eq!(csv.lines().filter(|l| l.contains(",truth,")).count(), 0);
}

#[test]
fn scene_shorter_than_obs_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    synth_scene(dir.path());
    let text = fs::read_to_string(dir.path().join("syn/scene_0000.txt")).unwrap();
    let short: String = text.lines().take(3 * 5).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("short.txt"), short).unwrap();
    assert!(run_in(dir.path(), &["init-zero", "--out", "zero.ckpt"]).status.success());
    let o = run_in(dir.path(), &["predict", "--checkpoint", "zero.ckpt", "--scene", "short.txt", "--out", "p"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("observed steps"));
}

#[test]
fn missing_checkpoint_is_a_data_error() {
    let o = mesrnn(&["predict", "--checkpoint", "/nonexistent/m.ckpt", "--scene", "x.txt", "--out", "/tmp/never"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_passes_and_fails_below_the_noise_floor() {
    let o = mesrnn(&["verify", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("all 35 checks passed"));
    let o = mesrnn(&["verify", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn help_lists_defaults() {
    let o = mesrnn(&["train", "--help"]);
    let help = String::from_utf8_lossy(&o.stdout);
    for needle in ["--epochs <EPOCHS>", "[default: 10]", "[default: 0.001]", "[default: 0.2]", "--loss-window", "--config"] {
        assert!(help.contains(needle), "missing {needle}");
    }
}

#[test]
fn synth_files_round_trip_through_training() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["synth", "--spec", "overtaking:n=2,scenes=5", "--out", "d"]).status.success());
    let mut args = vec!["train", "--data", "d", "--epochs", "1", "--dropout", "0", "--out", "f.ckpt"];
    args.extend(SMALL);
    assert!(run_in(dir.path(), &args).status.success());
    let mut args = vec!["train", "--synth", "overtaking:n=2,scenes=5", "--epochs", "1", "--dropout", "0", "--out", "s.ckpt"];
    args.extend(SMALL);
    assert!(run_in(dir.path(), &args).status.success());
    assert_eq!(fs::read(dir.path().join("f.ckpt")).unwrap(), fs::read(dir.path().join("s.ckpt")).unwrap());
}
