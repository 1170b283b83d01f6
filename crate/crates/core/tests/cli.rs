use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hartree-cascade"))
}

fn run(args: &[&str]) -> i32 {
    bin().args(args).output().expect("binary runs").status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn pset_writes_json_and_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    assert_eq!(run(&["pset", "--out", a.to_str().unwrap()]), 0);
    assert_eq!(run(&["pset", "--out", b.to_str().unwrap()]), 0);
    let x = std::fs::read(a.join("pset.json")).unwrap();
    assert_eq!(x, std::fs::read(b.join("pset.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v["command"], "pset");
    assert_eq!(v["result"]["n"], 4);
}

#[test]
fn blowup_outputs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[model]\nlambda = 1.0\n[grid]\nr_max = 4.0\nm = 200\n[data]\nkind = \"constant\"\nc = 1.0\n[blowup]\ntau_end = 1.0\ndt = 1e-2\ncount = 16\nr_lo = 0.1\nr_hi = 3.0\n");
    let outs: Vec<_> = ["x", "y"].iter().map(|s| d.path().join(s)).collect();
    for o in &outs {
        assert_eq!(run(&["blowup", "--config", &cfg, "--out", o.to_str().unwrap()]), 0);
    }
    for f in ["blowup.json", "characteristics.csv"] {
        assert_eq!(std::fs::read(outs[0].join(f)).unwrap(), std::fs::read(outs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn repulsive_breakdown_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[grid]\nr_max = 8.0\nm = 2000\n[data]\nkind = \"flat_core\"\n[blowup]\ntau_end = 2.0\ndt = 1e-2\ncount = 16\nr_lo = 0.1\nr_hi = 7.0\n");
    assert_eq!(run(&["blowup", "--config", &cfg, "--out", d.path().join("o").to_str().unwrap()]), 1);
}

#[test]
fn config_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let out = out.to_str().unwrap();
    let bad = write(d.path(), "bad.toml", "[grid]\nbogus = 1\n");
    assert_eq!(run(&["pset", "--config", &bad, "--out", out]), 2);
    let params = write(d.path(), "p.toml", "[model]\ngamma = 5\n");
    assert_eq!(run(&["layers", "--config", &params, "--out", out]), 2);
    assert_eq!(run(&["pset", "--config", d.path().join("missing.toml").to_str().unwrap(), "--out", out]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    // nls without a semiclassical parameter
    assert_eq!(run(&["nls", "--out", out]), 2);
}

#[test]
fn cfl_violation_exits_three() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[grid]\nm = 200\n[data]\nkind = \"gaussian\"\namplitude = 3.0\n[hydro]\nt_end = 2.0\ndt = 0.2\n");
    assert_eq!(run(&["hydro", "--config", &cfg, "--out", d.path().join("o").to_str().unwrap()]), 3);
}

#[test]
fn layers_and_hydro_write_tables() {
    let d = tempfile::tempdir().unwrap();
    let o = d.path().join("o");
    let cfg = write(d.path(), "c.toml", "[grid]\nm = 100\n[hydro]\nt_end = 0.1\ndt = 1e-3\nstride = 20\n");
    assert_eq!(run(&["layers", "--config", &cfg, "--out", o.to_str().unwrap(), "--jobs", "1"]), 0);
    assert_eq!(run(&["hydro", "--config", &cfg, "--out", o.to_str().unwrap()]), 0);
    let csv = std::fs::read_to_string(o.join("hydro.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "tau,r,re_a,im_a,v,phi");
    // 0, 0.02, …, 0.1: six stored states of 100 rows
    assert_eq!(csv.lines().count(), 1 + 6 * 100);
    assert!(o.join("layers.json").exists() && o.join("hydro_diagnostics.csv").exists());
}
