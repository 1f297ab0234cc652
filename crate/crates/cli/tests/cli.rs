use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iafb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iafb"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const REFERENCE: &str = "m = [[4, 4], [4, 4], [4, 4]]\ng = 2\nn = [4, 3]\n";

#[test]
fn feasible_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "reference.toml", REFERENCE);
    write(dir.path(), "starved.toml", "m = [[2, 2], [2, 2]]\ng = 0\nn = []\n");
    write(dir.path(), "odd.toml", "m = [[3], [3]]\ng = 2\nn = [3, 3]\n");
    write(dir.path(), "net.toml", "G = 3\nK = 2\nN = 4\nM = 4\nd = 1\n");

    let o = iafb(&["feasible", "--config", "net.toml", "--profile", "reference.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("D = 114"));
    assert!(stdout(&o).contains("witness:"));

    let o = iafb(&["feasible", "--config", "2,2,3,3,1", "--profile", "starved.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("condition 1 violated"));

    let o = iafb(&["feasible", "--config", "2,1,3,3,2", "--profile", "odd.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("necessary: satisfied"));
}

#[test]
fn malformed_input_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.toml", "m = [[4, 4]]\ng = \n");
    write(dir.path(), "reference.toml", REFERENCE);
    for args in [
        vec!["feasible", "--config", "3,2,4,4,1", "--profile", "bad.toml"],
        vec!["feasible", "--config", "3,2,4,4,1", "--profile", "missing.toml"],
        vec!["feasible", "--config", "3,2,4", "--profile", "reference.toml"],
        vec!["feasible", "--config", "2,2,3,3,1", "--profile", "reference.toml"],
        vec!["optimize"],
        vec!["sweep", "--config", "3,2,4,4,1", "--snr", "10:-5:0"],
        vec!["sweep", "--config", "3,2,4,4,1", "--btot", "lots"],
        vec!["frobnicate"],
    ] {
        let o = iafb(&args, dir.path());
        assert_eq!(o.status.code(), Some(64), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(iafb(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn optimize_reports_greedy_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = iafb(&["optimize", "--config", "3,2,4,4,1", "--out", "l0.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for line in ["g0          2", "g1          1", "D(L0)       114", "D_low       -18"] {
        assert!(text.contains(line), "{text}");
    }
    assert_eq!(fs::read_to_string(dir.path().join("l0.toml")).unwrap(), REFERENCE);

    let o = iafb(&["optimize", "--config", "2,2,3,3,1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("g = 0"));
    assert!(stderr(&o).contains("D(L0)       4"));

    for k in 1..=3 {
        let cfg = format!("4,1,{},{},1", 3 + k, 3);
        let o = iafb(&["optimize", "--config", &cfg], dir.path());
        assert_eq!(o.status.code(), Some(0), "{cfg}: {}", stderr(&o));
    }

    let o = iafb(&["optimize", "--config", "3,2,2,3,1"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn design_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = iafb(&["design", "--config", "3,2,4,4,1", "--seed", "5", "--out", "trace.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ia_verified true"));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,I"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(values.len() > 2);
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(*values.last().unwrap() < 1e-9);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = "snr_db = [10, 20]\nbtot = 800\ntrials = 2\nseed = 4\n\n[config]\nG = 3\nK = 2\nN = 4\nM = 4\nd = 1\n";
    write(dir.path(), "exp.toml", spec);
    let run = |out: &str| {
        let o = iafb(&["simulate", "exp.toml", "--trials", "1", "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 2);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(3) == Some("1")));

    let infeasible = spec.replace("[config]", "[profile]\nm = [[4, 4], [4, 4], [4, 4]]\ng = 2\nn = [3, 3]\n\n[config]");
    write(dir.path(), "bad.toml", &infeasible);
    let o = iafb(&["simulate", "bad.toml", "--out", "c.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!dir.path().join("c.csv").exists());
}

#[test]
fn sweep_reports_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let o = iafb(
        &["sweep", "--config", "3,2,4,4,1", "--snr", "30:10:50", "--btot", "scaled", "--trials", "2", "--schemes", "proposed,baseline3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 3);
    assert!(stderr(&o).contains("proposed: DoF slope"));
    let o = iafb(&["sweep", "--config", "3,2,4,4,1", "--snr", "30,40", "--trials", "1", "--no-quantize"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("no DoF slope"));
}
