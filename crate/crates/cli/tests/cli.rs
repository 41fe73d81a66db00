use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fracheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracheat"))
        .args(args)
        .env_remove("FRACHEAT_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn out_dir(tmp: &TempDir, name: &str) -> String {
    tmp.path().join(name).to_str().unwrap().to_string()
}

const SMALL_SIM: &str = r#"
samples = 6
export = 2
t_stride = 4
[model]
d = 2
preset = { kind = "bounded-smooth" }
[grid]
alpha = 1.5
horizon = 0.5
half_width = 2.0
nt = 16
nx = 32
"#;

#[test]
fn negative_order_capacity_prints_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "beta = -0.5\n");
    let o = fracheat(&["capacity", "--config", &cfg, "--out", &out_dir(&tmp, "o")]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "1\n");
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "o");
    for text in ["alphas = [2.5]\n", "alphas = []\n", "alphas = [2.0]\nextra = 1\n"] {
        let cfg = write(tmp.path(), "k.toml", text);
        assert_eq!(code(&fracheat(&["kernel-check", "--config", &cfg, "--out", &out])), 2, "{text}");
    }
    assert_eq!(code(&fracheat(&["no-such-command"])), 2);
    assert_eq!(code(&fracheat(&["capacity", "--workers", "0", "--out", &out])), 2);
    let missing = tmp.path().join("absent.toml");
    assert_eq!(code(&fracheat(&["capacity", "--config", missing.to_str().unwrap(), "--out", &out])), 1);
    // a point that is not a grid node
    let cfg = write(tmp.path(), "d.toml", "samples = 1000\npoint = { t = 0.3, x = 0.0 }\n");
    assert_eq!(code(&fracheat(&["density", "--config", &cfg, "--out", &out])), 2);
}

#[test]
fn kernel_check_reports_failures_with_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "k.toml", "alphas = [1.5, 2.0]\n");
    let out = out_dir(&tmp, "o");
    let o = fracheat(&["kernel-check", "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 0);
    let table = fs::read_to_string(Path::new(&out).join("kernel_checks.csv")).unwrap();
    assert!(table.starts_with("alpha,check,error,tolerance,passed\n"));
    assert!(table.contains("2,gaussian-closed-form,"));
    assert!(!table.contains("false"));
    let o = fracheat(&["kernel-check", "--config", &cfg, "--out", &out, "--tolerance", "0"]);
    assert_eq!(code(&o), 1);
    let m = fs::read_to_string(Path::new(&out).join("manifest.json")).unwrap();
    assert!(m.contains("\"check-failed\""));
}

#[test]
fn numeric_failure_exits_three_with_marker() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "beta = 0.5\nmesh = 0.01\nmax_iterations = 2\n");
    let out = out_dir(&tmp, "o");
    let o = fracheat(&["capacity", "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 3);
    let marker = fs::read_to_string(Path::new(&out).join("FAILED")).unwrap();
    assert!(marker.contains("Frank-Wolfe"));
    assert!(fs::read_to_string(Path::new(&out).join("manifest.json")).unwrap().contains("\"failed\""));
}

#[test]
fn simulate_exports_csv_and_snapshots() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SIM);
    let out = out_dir(&tmp, "o");
    assert_eq!(code(&fracheat(&["simulate", "--config", &cfg, "--out", &out, "--seed", "40"])), 0);
    let dir = Path::new(&out);
    let csv = fs::read_to_string(dir.join("trajectory_41.csv")).unwrap();
    assert!(csv.starts_with("seed,t,x,component,value\n41,"));
    // rows at steps 0, 4, 8, 12, 16, 32 nodes, 2 components
    assert_eq!(csv.lines().count(), 1 + 5 * 32 * 2);
    let bin = fs::read(dir.join("trajectory_40.bin")).unwrap();
    assert_eq!(&bin[..8], b"FRACHEAT");
    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6 * 2);
    assert!(dir.join("profile.svg").exists());
    let m = fs::read_to_string(dir.join("manifest.json")).unwrap();
    assert!(m.contains("\"first\": 40"));
}

#[test]
fn json_config_matches_toml() {
    let tmp = TempDir::new().unwrap();
    let toml_cfg = write(tmp.path(), "h.toml", "beta = 0.5\neps = [0.2, 0.1]\n");
    let json_cfg = write(tmp.path(), "h.json", r#"{"beta": 0.5, "eps": [0.2, 0.1]}"#);
    let (a, b) = (out_dir(&tmp, "a"), out_dir(&tmp, "b"));
    assert_eq!(code(&fracheat(&["hausdorff", "--config", &toml_cfg, "--out", &a])), 0);
    assert_eq!(code(&fracheat(&["hausdorff", "--config", &json_cfg, "--out", &b])), 0);
    for f in ["hausdorff.csv", "manifest.json"] {
        assert_eq!(fs::read(Path::new(&a).join(f)).unwrap(), fs::read(Path::new(&b).join(f)).unwrap());
    }
}

#[test]
fn rerun_is_byte_identical_across_worker_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SIM);
    let (a, b) = (out_dir(&tmp, "a"), out_dir(&tmp, "b"));
    assert_eq!(code(&fracheat(&["simulate", "--config", &cfg, "--out", &a, "--workers", "3"])), 0);
    let o = fracheat(&["rerun", &a, "--out", &b, "--workers", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8(o.stdout).unwrap().contains("byte-identical"));
    for e in fs::read_dir(&a).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(
            fs::read(Path::new(&a).join(&name)).unwrap(),
            fs::read(Path::new(&b).join(&name)).unwrap(),
            "{name:?}"
        );
    }
    // a tampered manifest is detected
    let m = Path::new(&a).join("manifest.json");
    let text = fs::read_to_string(&m).unwrap();
    let first_hash = text.find("\"sha256\": \"").unwrap() + 11;
    let mut bytes = text.into_bytes();
    bytes[first_hash] = if bytes[first_hash] == b'0' { b'1' } else { b'0' };
    fs::write(&m, bytes).unwrap();
    assert_eq!(code(&fracheat(&["rerun", &a, "--out", &b])), 1);
}

#[test]
fn workers_env_is_honoured() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fracheat"))
        .args(["capacity", "--out", &out_dir(&tmp, "o")])
        .env("FRACHEAT_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn holder_default_emits_half_slope_in_time() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "o");
    let o = fracheat(&["holder", "--out", &out, "--no-plots"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let mut r = csv::Reader::from_path(Path::new(&out).join("slopes.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    let time = rows.iter().find(|r| &r[0] == "time").unwrap();
    let slope: f64 = time[2].parse().unwrap();
    assert!((slope - 0.5).abs() <= 0.05, "{slope}");
    assert!(!Path::new(&out).join("holder.svg").exists());
}

#[test]
fn hitting_defaults_pass_and_write_tables() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "o");
    let o = fracheat(&["hitting", "--out", &out]);
    assert_eq!(code(&o), 0);
    let dir = Path::new(&out);
    let d = fs::read_to_string(dir.join("distances.csv")).unwrap();
    assert_eq!(d.lines().count(), 2001);
    let j: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("hitting.json")).unwrap()).unwrap();
    assert!(j["result"]["wilson_ci"]["lo"].as_f64().unwrap() > 0.0);
    assert_eq!(j["result"]["capacity_value"].as_f64(), Some(1.0));
    let sb = fs::read_to_string(dir.join("small_ball.csv")).unwrap();
    assert!(sb.starts_with("level,radius,hits,samples,frequency,ci_lo,ci_hi,excluded\n3,"));
}

#[test]
fn density_defaults_match_exact_law() {
    let tmp = TempDir::new().unwrap();
    let out = out_dir(&tmp, "o");
    let o = fracheat(&["density", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let pairs = fs::read_to_string(Path::new(&out).join("pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 4);
}
