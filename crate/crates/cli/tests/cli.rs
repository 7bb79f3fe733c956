use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn smoke_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml")
}

fn pardiff(args: &[&str], config: &Path, stages: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pardiff"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--stage-dir")
        .arg(stages)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

/// Every file under the stage root except wall-clock measurements.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                if p.file_name().unwrap() != "measurements" {
                    stack.push(p);
                }
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn stage_dir(root: &Path, stage: &str) -> PathBuf {
    std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with(&format!("{stage}-")))
        .unwrap_or_else(|| panic!("no {stage} directory"))
}

#[test]
fn smoke_pipeline_runs_stage_by_stage_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    for stage in ["simulate", "detect", "extract", "select", "train", "evaluate", "report"] {
        ok(&pardiff(&[stage], &smoke_config(), &a));
    }
    let report = stage_dir(&a, "report");
    for app in ["detect", "locate", "identify"] {
        let text = std::fs::read_to_string(report.join(format!("{app}.txt"))).unwrap();
        assert!(text.contains("balanced accuracy"), "{text}");
    }
    let records = std::fs::read_dir(stage_dir(&a, "simulate"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "wave"))
        .count();
    assert_eq!(records, 60);

    let b = tmp.path().join("b");
    let out = pardiff(&["run"], &smoke_config(), &b);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("identify"));
    assert_eq!(snapshot(&a), snapshot(&b));

    // rerunning one stage in place reproduces its bytes
    let before = snapshot(&a);
    ok(&pardiff(&["select"], &smoke_config(), &a));
    assert_eq!(snapshot(&a), before);

    let out = pardiff(&["decide"], &smoke_config(), &a);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("windows"));
    let wave = stage_dir(&a, "simulate").join("r000000.wave");
    let out = pardiff(&["decide", wave.to_str().unwrap()], &smoke_config(), &a);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("trip"));
}

#[test]
fn bad_config_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\nunknown_key = 3\n").unwrap();
    let out = pardiff(&["simulate"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_key"));
}

#[test]
fn missing_upstream_exits_with_3_and_names_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pardiff(&["train"], &smoke_config(), tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`select`"), "{err}");
}

#[test]
fn healthy_only_data_stops_after_detect() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("healthy.toml");
    std::fs::write(&cfg, "[simulation]\ntables = [\"healthy\"]\nhealthy_count = 4\n").unwrap();
    let root = tmp.path().join("s");
    ok(&pardiff(&["simulate"], &cfg, &root));
    ok(&pardiff(&["detect"], &cfg, &root));
    let captures = std::fs::read_to_string(stage_dir(&root, "detect").join("captures.jsonl")).unwrap();
    assert!(captures.is_empty());
    let out = pardiff(&["extract"], &cfg, &root);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no record triggered"));
}
