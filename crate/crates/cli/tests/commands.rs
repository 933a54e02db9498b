use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use splinenet::nn::OptimizerKind;
use splinenet::training::ExperimentConfig;

fn splinenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splinenet")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A configuration small enough to run every pipeline in seconds.
fn tiny_config(dir: &Path) -> std::path::PathBuf {
    let mut c = ExperimentConfig::default();
    c.out_dir = dir.join("out").display().to_string();
    c.problem.mesh = 4;
    c.sampling.n_count = 8;
    c.sampling.test_count = 2;
    c.sampling.direct_grid = 8;
    c.sampling.eval_grid = 11;
    c.coeff.hidden = vec![8];
    c.coeff.epochs = 30;
    c.direct.hidden = vec![8];
    c.direct.epochs = 3;
    c.direct.batch_size = 32;
    c.pinn.collocation.interior = 40;
    c.pinn.collocation.per_outer_edge = 8;
    c.pinn.collocation.per_inner_edge = 8;
    c.pinn.reference.mesh = 4;
    c.pinn.reference.degree = 2;
    c.pinn.train.hidden = vec![6, 6];
    c.pinn.train.epochs = 5;
    let path = dir.join("tiny.toml");
    fs::write(&path, c.to_toml().unwrap()).unwrap();
    path
}

fn without_timing(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

#[test]
fn compare_writes_every_artifact_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let run = |out: &str| {
        let o = splinenet(&["compare", "--config", config.to_str().unwrap(), "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(a.to_str().unwrap());
    run(b.to_str().unwrap());

    let table = fs::read_to_string(a.join("comparison.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("method,n,coeff_mse,pointwise_mse,train_seconds"));
    let means: Vec<&str> = table.lines().filter(|l| l.split(',').nth(1) == Some("mean")).collect();
    assert_eq!(means.len(), 3);
    assert_eq!(table.lines().count(), 1 + 3 + 3 + 2);

    for m in ["coeff", "direct", "pinn"] {
        for f in [format!("{m}_model.json"), format!("{m}_loss.csv"), format!("{m}_error.svg"), format!("{m}_report.json")] {
            assert!(a.join(&f).is_file(), "missing {f}");
        }
        let loss = format!("{m}_loss.csv");
        assert_eq!(fs::read(a.join(&loss)).unwrap(), fs::read(b.join(&loss)).unwrap(), "{loss} differs");
        let model = format!("{m}_model.json");
        assert_eq!(fs::read(a.join(&model)).unwrap(), fs::read(b.join(&model)).unwrap(), "{model} differs");
        let svg = fs::read_to_string(a.join(format!("{m}_error.svg"))).unwrap();
        assert!(svg.contains("<!-- min=") && svg.contains("max="));
    }
    let other = fs::read_to_string(b.join("comparison.csv")).unwrap();
    assert_eq!(without_timing(&table), without_timing(&other));
}

#[test]
fn dataset_train_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out = dir.path().join("run");
    let (c, o) = (config.to_str().unwrap(), out.to_str().unwrap());

    let d = splinenet(&["dataset", "--config", c, "--out", o]);
    assert!(d.status.success(), "{}", stderr(&d));
    let train = fs::read_to_string(out.join("coeff_train.csv")).unwrap();
    let header = train.lines().next().unwrap();
    assert!(header.starts_with("n,u_0,u_1,") && header.ends_with(",u_48"), "{header}");
    assert_eq!(train.lines().count(), 1 + 6);
    assert!(fs::read_to_string(out.join("direct_train.csv")).unwrap().starts_with("n,x,y,u\n"));
    let frozen = fs::read_to_string(out.join("config.toml")).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&frozen).unwrap().out_dir, o);

    let t = splinenet(&["train", "--config", c, "--out", o, "--method", "coeff", "--seed", "7"]);
    assert!(t.status.success(), "{}", stderr(&t));
    let report = fs::read_to_string(out.join("coeff_report.json")).unwrap();
    assert!(report.contains("\"seed\": 7") || report.contains("\"seed\":7"), "{report}");

    let model = out.join("coeff_model.json");
    let e = splinenet(&["eval", "--config", c, "--out", o, "--model", model.to_str().unwrap()]);
    assert!(e.status.success(), "{}", stderr(&e));
    let metrics = fs::read_to_string(out.join("coeff_metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 2 + 1);
}

#[test]
fn unknown_method_is_a_usage_error() {
    let o = splinenet(&["train", "--method", "spline"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("invalid value 'spline'"), "{}", stderr(&o));
}

#[test]
fn malformed_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "out_dir = 3\n").unwrap();
    let o = splinenet(&["dataset", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("invalid config"), "{}", stderr(&o));

    let mut c = ExperimentConfig::default();
    c.direct.optimizer = OptimizerKind::Lbfgs;
    fs::write(&path, c.to_toml().unwrap()).unwrap();
    let o = splinenet(&["dataset", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("[direct]"), "{}", stderr(&o));
}

#[test]
fn appendix_a_prints_the_mass_matrix() {
    let o = splinenet(&["appendix", "a"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("[0.200000000000000 0.100000000000000 0.033333333333333]"));
    assert!(text.contains("dataset: 50 samples"));
}

#[test]
fn shipped_config_matches_the_defaults() {
    let text = include_str!("../../../configs/default.toml");
    assert_eq!(ExperimentConfig::from_toml(text).unwrap(), ExperimentConfig::default());
}
