use std::path::Path;
use std::process::Command;

fn vlamax(dir: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vlamax"));
    c.current_dir(dir).env_remove("VLAMAX_SEED").env_remove("VLAMAX_OUT_DIR").env("RUST_LOG", "warn");
    c
}

fn run(c: &mut Command) -> String {
    let out = c.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const CONFIG: &str = "\
[run]
t_end = 0.25
dt = 0.05
checkpoint_interval = 0.25
reference_size = 16

[sweep]
n_values = [4, 8]
seeds = 2

[energy]
enabled = false
";

#[test]
fn simulate_meanfield_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    run(vlamax(dir.path()).args(["-c", "c.toml", "simulate", "--n", "6", "--seed", "2"]));
    run(vlamax(dir.path()).args(["-c", "c.toml", "meanfield", "--n", "6", "--seed", "2"]));
    let out = dir.path().join("vlamax-out");
    assert!(out.join("reference_N6.traj").exists());
    let text = run(vlamax(dir.path()).args(["metrics", "vlamax-out/micro_N6_s2.traj", "vlamax-out/tracers_N6_s2.traj"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["W1", "W2", "Winf_upper"] {
        assert!(v[key].as_f64().unwrap() >= 0.0, "{key}");
    }
    assert!(v["W1"].as_f64().unwrap() <= v["Winf_upper"].as_f64().unwrap());
    for key in ["sup_x", "sup_xi", "raw", "J_t"] {
        assert!(v["J"][key].as_f64().is_some(), "{key}");
    }
    // A JSON snapshot is compared at its own time.
    let text = run(vlamax(dir.path()).args(["metrics", "vlamax-out/micro_N6_s2_final.json", "vlamax-out/tracers_N6_s2.traj"]));
    let w: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(w["W1"], v["W1"]);
}

#[test]
fn environment_overrides_seed_and_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    run(vlamax(dir.path()).args(["-c", "c.toml", "simulate", "--n", "3"]).env("VLAMAX_SEED", "77").env("VLAMAX_OUT_DIR", "elsewhere"));
    assert!(dir.path().join("elsewhere/micro_N3_s77.traj").exists());
}

#[test]
fn field_slice_has_breakdown_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    run(vlamax(dir.path()).args(["-c", "c.toml", "fields", "--n", "4", "--plane", "1", "--out", "f.csv"]));
    let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=vlamax.fields.v1"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..5], ["t", "x", "y", "z", "E0_x"]);
    assert_eq!(header.len(), 34);
    // n_lat = 2 gives 7 x 7 points in one plane.
    assert_eq!(lines.count(), 49);
}

#[test]
fn sweep_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    let text = run(vlamax(dir.path()).args(["-c", "c.toml", "sweep"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["failed_rows"], 0);
    let csv = std::fs::read_to_string(dir.path().join("vlamax-out/sweep.csv")).unwrap();
    assert!(csv.starts_with("# schema=vlamax.sweep.v1\n"));
    assert_eq!(csv.lines().count(), 2 + 4);
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[run]\nunknown_key = 1\n").unwrap();
    let out = vlamax(dir.path()).args(["-c", "c.toml", "sweep"]).output().unwrap();
    assert!(!out.status.success());
}
