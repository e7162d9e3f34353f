use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use xcf_core::harness::{read_eps_sweep, read_series, read_snapshot, CLAIMS_FILE, CURVATURE_FILE, SERIES_FILE};

fn xcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xcf"))
        .args(args)
        .env_remove("XCF_OUT")
        .output()
        .expect("spawn xcf")
}

fn scenario(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.cfg");
    fs::write(&path, format!("{body}\noutput.dir = {}\n", dir.join("out").display())).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_series_snapshots_and_claims() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = torus\nt_end = 0.4\ngrid.n = 64\nclaims.delta_l = 1e-5");
    let o = xcf(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let out = tmp.path().join("out");
    let records = read_series(&out.join(SERIES_FILE)).unwrap();
    assert_eq!(records.len(), 101);
    assert_eq!(records.last().unwrap().t, 0.4);
    for t in ["0", "0.1", "0.2", "0.3", "0.4"] {
        let snap = read_snapshot(&out.join(format!("snap_{t}.json"))).unwrap();
        assert_eq!(snap.n(), 64);
    }
    let claims = fs::read_to_string(out.join(CLAIMS_FILE)).unwrap();
    assert_eq!(claims.lines().count(), 7);
    assert_eq!(stdout(&o), claims);
    assert!(claims.lines().all(|l| l.starts_with("T-") && l.contains(" pass ")));
}

#[test]
fn check_reproduces_the_run_verdicts() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = sphere\nt_end = 1\ngrid.n = 64");
    let run = xcf(&["run", "--config", &cfg]);
    let series = tmp.path().join("out").join(SERIES_FILE);
    let check = xcf(&["check", "--series", series.to_str().unwrap(), "--kind", "sphere", "--n", "64"]);
    assert_eq!(run.status.code(), check.status.code());
    assert_eq!(stdout(&run), stdout(&check));
}

#[test]
fn check_exits_one_on_a_failing_claim() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = torus\nt_end = 0.2\ngrid.n = 64");
    xcf(&["run", "--config", &cfg]);
    let series = tmp.path().join("out").join(SERIES_FILE);
    let text = fs::read_to_string(&series).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.len() - 1;
    let mut cols: Vec<String> = lines[last].split(',').map(str::to_string).collect();
    let g_max: f64 = cols[3].parse().unwrap();
    cols[3] = (g_max + 0.01).to_string();
    lines[last] = cols.join(",");
    fs::write(&series, lines.join("\n") + "\n").unwrap();

    let o = xcf(&["check", "--series", series.to_str().unwrap(), "--kind", "torus", "--n", "64"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("T-L2 fail")));
}

#[test]
fn curvature_dump_of_the_reference_torus() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = torus\nt_end = 1");
    let o = xcf(&["curvature", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("out").join(CURVATURE_FILE)).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(65)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(row[0], 64.0);
    // x = π/2: K12 = 0.1 / 2.1, h11 = K12².
    let k12 = 0.1 / 2.1;
    assert!((row[6] - k12).abs() < 1e-4);
    assert!((row[13] - k12 * k12).abs() < 1e-5, "h11 = {}", row[13]);
    assert!(row[14].abs() < 1e-8);
}

#[test]
fn eps_sweep_writes_gaps_in_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = torus\nt_end = 0.5\ngrid.n = 64");
    let o = xcf(&["eps-sweep", "--config", &cfg, "--epsilons", "1e-2,1e-3,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_eps_sweep(&tmp.path().join("out").join("eps_sweep.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1e-2, 1e-3, 0.0]);
    assert!(rows[0].1 > rows[1].1);
    assert_eq!(rows[2].1, 0.0);
    assert!(tmp.path().join("out/eps_0.01").join(SERIES_FILE).exists());
}

#[test]
fn eps_sweep_rejects_the_sphere() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = sphere\nt_end = 0.5");
    let o = xcf(&["eps-sweep", "--config", &cfg, "--epsilons", "1e-2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("torus"));
}

#[test]
fn stationary_torus_warns_and_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = torus\nt_end = 0.5\ngrid.n = 32\nprofile.amplitude = 0");
    let o = xcf(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stationary"));
    assert!(stdout(&o).contains("T-T6 n/a"));
}

#[test]
fn steep_sphere_profile_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = sphere\nt_end = 1\nprofile.amplitude = 0.5");
    let o = xcf(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_report_the_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = torus\nt_end = 1\nbogus = 3");
    let o = xcf(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn resume_matches_an_uninterrupted_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = scenario(tmp.path(), "bundle = sphere\nt_end = 1\ngrid.n = 64");
    // Decay claims need a longer horizon; only the series matters here.
    assert!(xcf(&["run", "--config", &cfg]).status.code().is_some_and(|c| c < 2));
    let out = tmp.path().join("out");
    let full = fs::read_to_string(out.join(SERIES_FILE)).unwrap();

    let snap = tmp.path().join("mid.json");
    fs::copy(out.join("snap_0.5.json"), &snap).unwrap();
    let resumed_out = tmp.path().join("resumed");
    let o = Command::new(env!("CARGO_BIN_EXE_xcf"))
        .args(["run", "--config", &cfg, "--resume", snap.to_str().unwrap()])
        .env("XCF_OUT", &resumed_out)
        .output()
        .unwrap();
    assert!(o.status.code().is_some_and(|c| c < 2), "{}", String::from_utf8_lossy(&o.stderr));
    let resumed = fs::read_to_string(resumed_out.join(SERIES_FILE)).unwrap();
    let tail: Vec<&str> = resumed.lines().skip(1).collect();
    assert!(full.lines().collect::<Vec<_>>().ends_with(&tail));
    assert_eq!(tail.len(), 51);
}
