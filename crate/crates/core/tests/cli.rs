use std::path::Path;
use std::process::{Command, Output};

use stratkit::detect::{labels_from_csv, IndexedTable, PointCloud};

fn stratkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratkit")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = stratkit(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn hourglass_pipeline_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |tag: &str| {
        let (hg, feat, lab) = (format!("hg{tag}.csv"), format!("feat{tag}.csv"), format!("labels{tag}.csv"));
        ok(d, &["--quiet", "gen", "hourglass", "--n", "600", "--seed", "7", "-o", &hg]);
        ok(d, &["--quiet", "vgtdot", "-i", &hg, "-o", &feat]);
        ok(d, &["--quiet", "cluster", "-i", &feat, "--k", "3", "--seed", "7", "-o", &lab]);
        (read(d, &hg), read(d, &feat), read(d, &lab))
    };
    let first = run("1");
    assert_eq!(first, run("2"));
    let (cloud, labels) = PointCloud::from_csv_str(std::str::from_utf8(&first.0).unwrap()).unwrap();
    assert_eq!(cloud.len(), 600);
    assert_eq!(labels.unwrap()[0], "neck");
    let feats = IndexedTable::from_csv_str(std::str::from_utf8(&first.1).unwrap()).unwrap();
    assert_eq!(feats.index.len(), 600);
    assert!(feats.comment("log_radii").is_some());
    let labs = labels_from_csv(std::str::from_utf8(&first.2).unwrap()).unwrap();
    assert!(labs.iter().all(|&l| l < 3));
}

#[test]
fn stl_eval_on_the_ramp() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("ramp.csv"), "t,x1\n0,0\n1,1\n2,2\n3,3\n4,4\n").unwrap();
    assert_eq!(ok(d, &["stl", "eval", "--formula", "F[0,2] (x1 >= 3)", "--trace", "ramp.csv", "--at", "0"]).trim(), "-1");
    assert_eq!(ok(d, &["stl", "eval", "--formula", "F[0,2] (x1 >= 3)", "--trace", "ramp.csv", "--at", "1"]).trim(), "0");
    let norm = ok(d, &["stl", "eval", "--formula", "F[0,2] (x1 >= 3)", "--trace", "ramp.csv", "--normalize", "4"]);
    assert_eq!(norm.trim(), "-0.25");
    std::fs::write(d.join("f.stl"), "G[0,1] (x1 <= 10)\n").unwrap();
    assert_eq!(ok(d, &["stl", "eval", "--formula-file", "f.stl", "--trace", "ramp.csv"]).trim(), "9");
}

#[test]
fn coin_overlap_of_the_default_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = stratkit::spaces::CoinConfig::default5().to_json();
    std::fs::write(d.join("default5.json"), cfg).unwrap();
    let out = ok(d, &["--quiet", "coin", "overlap", "--config", "default5.json", "-o", "o.json", "--dot", "o.dot"]);
    assert_eq!(out.trim(), "11");
    let poset: stratkit::poset::PosetData = serde_json::from_slice(&read(d, "o.json")).unwrap();
    assert_eq!(poset.elements.len(), 11);
    assert!(String::from_utf8(read(d, "o.dot")).unwrap().starts_with("digraph"));
}

#[test]
fn exit_codes_and_error_lines() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("ramp.csv"), "t,x1\n0,0\n1,1\n").unwrap();
    let bad = stratkit(d, &["stl", "eval", "--formula", "F[0,2 (x1 >= 3)", "--trace", "ramp.csv"]);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8(bad.stderr).unwrap();
    assert!(err.starts_with("error: syntax-error: "), "{err}");
    assert_eq!(err.lines().count(), 1);
    let missing = stratkit(d, &["vgt", "-i", "nope.csv", "-o", "x.csv"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8(missing.stderr).unwrap().starts_with("error: io: "));
    assert_eq!(stratkit(d, &["vgt", "--bogus"]).status.code(), Some(2));
    assert_eq!(stratkit(d, &["stl", "eval", "--trace", "ramp.csv"]).status.code(), Some(2));
    for sub in [&["--version"][..], &["gen", "--help"], &["rl", "train", "--version"], &["plot", "lines", "--help"]] {
        assert_eq!(stratkit(d, sub).status.code(), Some(0), "{sub:?}");
    }
}

#[test]
fn grid_and_trajectory_stratification() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--quiet", "--seed", "3", "grid-stratify", "--rows", "4", "--cols", "3", "--goal", "1,2", "-o", "g.json", "--dot", "t.dot"]);
    let report: serde_json::Value = serde_json::from_slice(&read(d, "g.json")).unwrap();
    assert_eq!(report["monotone"], true);
    assert_eq!(report["tree"]["elements"].as_array().unwrap().len(), 12);
    assert_eq!(report["assignment"].as_object().unwrap().len(), 5 * 4 + 4 * 3 + 5 * 3 + 4 * 4);

    std::fs::write(d.join("a.csv"), "t,x1\n0,1\n1,1\n2,1\n").unwrap();
    std::fs::write(d.join("b.csv"), "t,x1\n0,1\n1,0\n2,1\n").unwrap();
    std::fs::write(d.join("target.json"), r#"{"kind":"box","lo":[0.5],"hi":[1.5]}"#).unwrap();
    let n = ok(d, &["--quiet", "traj-stratify", "--target", "target.json", "a.csv", "b.csv", "-o", "s.json"]);
    assert_eq!(n.trim(), "2");
}

#[test]
fn rl_train_writes_policy_curve_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("env.json"), r#"{"rows":3,"cols":3,"goal":[2,0],"horizon":8}"#).unwrap();
    std::fs::write(d.join("f.stl"), "F[2,6] (in_green >= 0.5)\n").unwrap();
    let out = ok(d, &["--quiet", "rl", "train", "--env", "env.json", "--formula-file", "f.stl", "--episodes", "3000", "--out", "run"]);
    assert_eq!(out.trim(), "9/9");
    let curve = String::from_utf8(read(d, "run/curve.csv")).unwrap();
    assert!(curve.starts_with("episode,reward\n"));
    assert_eq!(curve.lines().count(), 3001);
    let env = stratkit::rl::GridEnv::build(stratkit::rl::EnvSpec::from_json(r#"{"rows":3,"cols":3,"goal":[2,0],"horizon":8,"formula":"F[2,6] (in_green >= 0.5)"}"#).unwrap()).unwrap();
    let policy = String::from_utf8(read(d, "run/policy.json")).unwrap();
    assert!(stratkit::rl::Policy::from_json(&env, &policy).is_ok());
    let vi = ok(d, &["--quiet", "rl", "train", "--env", "env.json", "--method", "vi", "--out", "vi"]);
    assert_eq!(vi.trim(), "9/9");
    let bad = stratkit(d, &["rl", "train", "--env", "missing.json", "--out", "x"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn plots_from_pipeline_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--quiet", "gen", "room-corridor", "--n", "800", "-o", "rc.csv"]);
    ok(d, &["--quiet", "vgt", "-i", "rc.csv", "--points", "0,1,2", "-o", "vgt.csv"]);
    ok(d, &["--quiet", "plot", "lines", "-i", "vgt.csv", "--title", "VGT", "-o", "vgt.svg"]);
    let svg = String::from_utf8(read(d, "vgt.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    ok(d, &["--quiet", "gen", "half-cylinder", "--n", "300", "-o", "hc.csv"]);
    ok(d, &["--quiet", "isomap", "-i", "hc.csv", "--k", "8", "-o", "emb.csv"]);
    ok(d, &["--quiet", "cluster", "-i", "emb.csv", "--k", "2", "--method", "average", "-o", "lab.csv"]);
    ok(d, &["--quiet", "plot", "scatter", "-i", "emb.csv", "--labels", "lab.csv", "-o", "emb.svg"]);
    let svg = String::from_utf8(read(d, "emb.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 300);
    let median: f64 = ok(d, &["dim", "-i", "hc.csv", "-o", "dims.csv"]).trim().parse().unwrap();
    assert!(median > 1.0 && median < 3.0);
    std::fs::write(d.join("empty.csv"), "episode,reward\n").unwrap();
    let empty = stratkit(d, &["plot", "curve", "-i", "empty.csv", "-o", "c.svg"]);
    assert_eq!(empty.status.code(), Some(1));
    assert!(String::from_utf8(empty.stderr).unwrap().starts_with("error: empty-plot"));
}
