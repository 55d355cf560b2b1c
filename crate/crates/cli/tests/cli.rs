use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn clebsch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clebsch"))
        .args(args)
        .env_remove("CLEBSCH_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("clebsch-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SHORT: [&str; 6] = ["--N", "16", "--dt", "0.0078125", "--t-end", "0.125"];

#[test]
fn presets_are_listed_and_printable() {
    let out = clebsch(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["burgers", "travelling_wave", "periodic_bump"] {
        assert!(text.contains(name), "{text}");
    }
    let out = clebsch(&["presets", "periodic_bump"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["N"], 32);
    assert_eq!(clebsch(&["presets", "nope"]).status.code(), Some(1));
}

#[test]
fn run_writes_outputs() {
    let dir = scratch("run");
    let mut args = vec!["run", "--out", s(&dir), "--emit-plots", "--observe-every", "4"];
    args.extend(SHORT);
    let out = clebsch(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["diagnostics.csv", "final_collective.csv", "final_conventional.csv", "meta.json", "plot.gp"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.join("diagnostics.csv")).unwrap();
    // steps 0, 4, ..., 16 for two schemes plus the header
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("override");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    let preset = clebsch(&["presets", "burgers"]).stdout;
    std::fs::write(&cfg, preset).unwrap();
    let out_dir = dir.join("out");
    let mut args = vec!["run", "--config", s(&cfg), "--method", "conventional", "--out", s(&out_dir)];
    args.extend(SHORT);
    assert!(clebsch(&args).status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["N"], 16);
    assert_eq!(meta["config"]["method"], "conventional");
    assert!(!out_dir.join("final_collective.csv").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_errors_exit_with_one() {
    assert_eq!(clebsch(&["run", "--N", "2"]).status.code(), Some(1));
    assert_eq!(clebsch(&["run", "--ic", "1 +"]).status.code(), Some(1));

    let dir = scratch("badkey");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    let mut v: serde_json::Value =
        serde_json::from_slice(&clebsch(&["presets", "burgers"]).stdout).unwrap();
    v["t_ned"] = 1.0.into();
    std::fs::write(&cfg, v.to_string()).unwrap();
    let out = clebsch(&["run", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_ned"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn non_convergence_exits_with_two_and_keeps_data() {
    let dir = scratch("newton");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    let mut v: serde_json::Value =
        serde_json::from_slice(&clebsch(&["presets", "burgers"]).stdout).unwrap();
    v["newton"]["max_iter"] = 1.into();
    std::fs::write(&cfg, v.to_string()).unwrap();
    let out_dir = dir.join("out");
    let mut args = vec!["run", "--config", s(&cfg), "--out", s(&out_dir)];
    args.extend(SHORT);
    let out = clebsch(&args);
    assert_eq!(out.status.code(), Some(2));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["runs"][0]["failure"]["step"], 1);
    assert!(out_dir.join("diagnostics.csv").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn output_dir_comes_from_environment() {
    let base = scratch("env");
    let mut args = vec!["run", "--method", "conventional"];
    args.extend(SHORT);
    let out = Command::new(env!("CARGO_BIN_EXE_clebsch"))
        .args(&args)
        .env("CLEBSCH_OUTPUT_DIR", &base)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(base.join("burgers").join("diagnostics.csv").exists());
    std::fs::remove_dir_all(base).unwrap();
}

#[test]
fn converge_reports_orders() {
    let dir = scratch("converge");
    let out = clebsch(&[
        "converge", "--levels", "16,32", "--dt", "0.001953125", "--t-end", "0.0625", "--out", s(&dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(String::from_utf8(out.stdout).unwrap().contains("characteristics"));
    assert_eq!(clebsch(&["converge", "--levels", "16"]).status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}
