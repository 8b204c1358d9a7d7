use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn orbiglue(config: Option<&str>, dir: &Path, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orbiglue"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.arg("--out").arg(dir.join("out")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn jet(kind: &str) -> String {
    format!("[jet]\nkind = \"{kind}\"\n[scan]\ngrid_points = 1500\n")
}

#[test]
fn obstruction_exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&orbiglue(Some(&jet("sphere")), d.path(), &["obstruction"])), 1);
    assert_eq!(code(&orbiglue(Some(&jet("hyperbolic")), d.path(), &["obstruction"])), 1);
    assert_eq!(code(&orbiglue(Some(&jet("flat")), d.path(), &["obstruction"])), 0);
    let rd = "[jet]\nkind = \"rank-deficient\"\nlambda = 0.4\n[scan]\ngrid_points = 1500\n";
    assert_eq!(code(&orbiglue(Some(rd), d.path(), &["--seed", "3", "obstruction"])), 0);
    let grid = read(d.path(), "lambda_grid.csv");
    assert!(grid.lines().nth(1).unwrap().starts_with("parity,n0,n1,n2,lambda_1"));
    assert!(read(d.path(), "report.toml").contains("verdict = \"unobstructed-at-tolerance\""));
}

#[test]
fn curvature_input_matches_named_jet() {
    let d = TempDir::new().unwrap();
    let text = "[jet]\nkind = \"curvature\"\nscal = 12.0\nrplus = [[1,0,0],[0,1,0],[0,0,1]]\nrminus = [[1,0,0],[0,1,0],[0,0,1]]\n[scan]\ngrid_points = 1500\n";
    assert_eq!(code(&orbiglue(Some(text), d.path(), &["obstruction"])), 1);
    let bad = text.replace("scal = 12.0", "scal = 12.0\nric0 = [[0.5,0,0],[0,0,0],[0,0,0]]");
    assert_eq!(code(&orbiglue(Some(&bad), d.path(), &["obstruction"])), 2);
}

#[test]
fn malformed_config_reports_the_field() {
    let d = TempDir::new().unwrap();
    let o = orbiglue(Some("[jet]\nkind = \"sphere\"\n[scan]\ngrid_pts = 3\n"), d.path(), &["obstruction"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") && err.contains("grid_pts"), "{err}");
    assert_eq!(code(&orbiglue(None, d.path(), &["obstruction"])), 2);
}

fn kummer() -> String {
    let mut s = String::from("root = \"T4/Z2\"\n");
    for i in 0..16 {
        s += &format!("[[nodes]]\nlabel = \"eh{i}\"\npiece = \"EH\"\npoint = \"p{i}\"\nscale = 0.1\norientation = \"+\"\n");
    }
    s
}

fn s4(second: &str, point: &str) -> String {
    format!(
        "root = \"S4/Z2\"\n[[nodes]]\nlabel = \"a\"\npiece = \"EH\"\npoint = \"north\"\nscale = 0.1\norientation = \"+\"\n\
         [[nodes]]\nlabel = \"b\"\npiece = \"EH\"\npoint = \"{point}\"\nscale = 0.1\norientation = \"{second}\"\n"
    )
}

#[test]
fn hitchin_thorpe_verdicts() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&orbiglue(Some(&kummer()), d.path(), &["hitchin-thorpe"])), 0);
    let v = read(d.path(), "verdict.csv");
    assert!(v.contains("24,-16,0,0,equality,57"), "{v}");
    assert_eq!(read(d.path(), "tree.csv").matches("det R = 0 required").count(), 16);

    assert_eq!(code(&orbiglue(Some(&s4("-", "south")), d.path(), &["hitchin-thorpe"])), 0);
    assert!(read(d.path(), "verdict.csv").contains("strict-increase"));
    assert_eq!(code(&orbiglue(Some(&s4("+", "south")), d.path(), &["hitchin-thorpe"])), 0);
    assert!(read(d.path(), "verdict.csv").contains(",2,equality,"));
    assert_eq!(code(&orbiglue(Some(&s4("+", "north")), d.path(), &["hitchin-thorpe"])), 2);
}

#[test]
fn residual_scaling_writes_the_fit() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&orbiglue(None, d.path(), &["study", "residual-scaling"])), 0);
    let fit = read(d.path(), "fit.csv");
    let line = fit.lines().nth(2).unwrap();
    let exponent: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!(exponent >= 0.375 - 0.05);
    assert!(read(d.path(), "manifest.txt").contains("grid_converged=true"));
    assert_eq!(read(d.path(), "residual_scaling.csv").lines().count(), 2 + 4);
    let o = orbiglue(Some("[study]\nshells = 100\n"), d.path(), &["study", "residual-scaling"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hint"));
}

#[test]
fn pinching_has_lp_and_sup_columns() {
    let d = TempDir::new().unwrap();
    let cfg = "t_list = [1e-2, 1e-3, 1e-4, 1e-5]\np_list = [1.0, 2.0]\n";
    assert_eq!(code(&orbiglue(Some(cfg), d.path(), &["study", "pinching"])), 0);
    let csv = read(d.path(), "pinching.csv");
    assert_eq!(csv.lines().nth(1).unwrap(), "t,p,lp,sup");
    assert_eq!(csv.lines().count(), 2 + 8);
}

#[test]
fn picard_refusal_and_success() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&orbiglue(Some("problem = \"quadratic\"\na = 0.3\n"), d.path(), &["study", "picard"])), 1);
    let r = read(d.path(), "refusal.toml");
    assert!(r.contains("bound = 0.25") && r.contains("phi0_norm = 0.3"));
    let forced = "problem = \"quadratic\"\na = 0.1\n[overrides]\nc = 4.0\n";
    assert_eq!(code(&orbiglue(Some(forced), d.path(), &["study", "picard"])), 1);
    assert_eq!(code(&orbiglue(None, d.path(), &["study", "picard"])), 0);
    assert!(read(d.path(), "certificate.toml").contains("iterations"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = "[jet]\nkind = \"random-einstein\"\nlambda = 0.3\n[scan]\ngrid_points = 800\n";
    for d in [&a, &b] {
        orbiglue(Some(cfg), d.path(), &["--seed", "11", "--threads", "2", "obstruction"]);
        std::fs::rename(d.path().join("out"), d.path().join("obs")).unwrap();
        assert_eq!(code(&orbiglue(Some("samples = 50\n"), d.path(), &["study", "sin-warp"])), 0);
    }
    for (dir, f) in [("obs", "lambda_grid.csv"), ("obs", "report.toml"), ("obs", "manifest.txt"), ("out", "sin_warp.csv")] {
        let x = std::fs::read(a.path().join(dir).join(f)).unwrap();
        let y = std::fs::read(b.path().join(dir).join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let other = TempDir::new().unwrap();
    orbiglue(Some(cfg), other.path(), &["--seed", "12", "obstruction"]);
    assert_ne!(read(other.path(), "report.toml"), std::fs::read_to_string(a.path().join("obs/report.toml")).unwrap());
}

#[test]
fn every_output_carries_the_hash() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&orbiglue(None, d.path(), &["study", "annulus"])), 0);
    let manifest = read(d.path(), "manifest.txt");
    let hash = manifest.lines().find_map(|l| l.strip_prefix("config_sha256=")).unwrap();
    assert_eq!(hash.len(), 64);
    for f in ["modes.csv", "oracle.csv"] {
        assert_eq!(read(d.path(), f).lines().next().unwrap(), format!("# config-sha256={hash}"));
    }
    assert!(manifest.contains("grid_converged=true"));
}
