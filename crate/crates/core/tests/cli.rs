use std::path::Path;
use std::process::{Command, Output};

fn seqstop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqstop")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const EXP: &str = "sampler = exp\nparameter.mean = mean\nparameter.median = quantile 0.5\nrule = T1, T3\nepsilon = 0.1\nreplications = 20\nseed = 5\n";

#[test]
fn coverage_csv_to_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.conf", EXP);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = seqstop(&["coverage", "--config", &cfg, "--format", "csv", "--workers", workers, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let rows = seqstop::harness::parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].rule, "absolute");
    assert_eq!(rows[3].parameter, "median");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.conf", EXP);
    let run = |seed: &str| seqstop(&["coverage", "--config", &cfg, "--format", "json", "--seed", seed]).stdout;
    assert_eq!(run("5"), seqstop(&["coverage", "--config", &cfg, "--format", "json"]).stdout);
    assert_ne!(run("5"), run("6"));
    let v: serde_json::Value = serde_json::from_slice(&run("6")).unwrap();
    assert_eq!(v["seed"], 6);
    assert_eq!(v["rules"].as_array().unwrap().len(), 2);
}

#[test]
fn run_and_truth_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.conf", EXP);
    let o = seqstop(&["run", "--config", &cfg, "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("rule,epsilon,parameter,n_stop,capped,point,half_width,sigma_hat,lambda_hat\n"));
    assert_eq!(text.lines().count(), 5);
    let o = seqstop(&["truth", "--config", &cfg]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "mean 1\nmedian 0.693147\n");
}

#[test]
fn table_output_names_rules() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.conf", EXP);
    let o = seqstop(&["coverage", "--config", &cfg, "--replications", "5"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("T1(0.1)") && text.contains("T3(0.1)"), "{text}");
    assert!(text.contains("replications: 5"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(seqstop(&["coverage"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.conf", "sampler = exp\nrule = T9\nepsilon = 0.1\nparameter.m = mean\n");
    assert_eq!(seqstop(&["coverage", "--config", &bad]).status.code(), Some(2));
    let generic = write(
        dir.path(),
        "rw.conf",
        "sampler = random-walk\ntarget = laplace\nscales = 2\nrule = T3\nepsilon = 0.2\nparameter.m = mean\n",
    );
    assert_eq!(seqstop(&["coverage", "--config", &generic]).status.code(), Some(3));
    assert_eq!(seqstop(&["truth", "--config", &generic]).status.code(), Some(3));
    assert!(seqstop(&["run", "--config", &generic]).status.success());
    let missing = dir.path().join("nope.conf");
    assert_eq!(seqstop(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(4));
    let cfg = write(dir.path(), "exp.conf", EXP);
    let unwritable = dir.path().join("no").join("out.csv");
    assert_eq!(
        seqstop(&["run", "--config", &cfg, "--out", unwritable.to_str().unwrap()]).status.code(),
        Some(4)
    );
    assert_eq!(seqstop(&["run", "--config", &cfg, "--format", "xml"]).status.code(), Some(2));
}
