use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-rk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn converge_writes_csv_and_order_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let o = run(&["converge", "--problem", "rotation", "--scheme", "stvdrk3", "--h", "0.1/2^0..4", "--out", path_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,h,e2,enorm"));
    assert_eq!(lines.count(), 5);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    let order = json["stvdrk3"]["order_e2"].as_f64().unwrap();
    assert!((order - 3.0).abs() < 0.25, "{order}");
}

#[test]
fn converge_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<_> = ["a.csv", "b.csv"]
        .iter()
        .map(|name| {
            let p = dir.path().join(name);
            let o = run(&["converge", "--scheme", "table2", "--out", path_arg(&p)]);
            assert!(o.status.success());
            fs::read(&p).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
}

#[test]
fn converge_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.json");
    let o = run(&["converge", "--scheme", "ptvdrk3'", "--out", path_arg(&out)]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json[0]["method"], "ptvdrk3p");
    assert_eq!(json[0]["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["converge", "--scheme", "rk7"],
        vec!["converge", "--h", "0.1/2^0..2"],
        vec!["verify", "--target", "nothing"],
        vec!["frobnicate"],
        vec!["pharmonic", "--p", "2", "--nodes", "7", "--t-final", "0.001"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--target", "appendix-b"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    assert_eq!(run(&["verify", "--target", "slerp-parity"]).status.code(), Some(0));
    // The stated h⁴ coefficient disagrees with the construction's own series.
    assert_eq!(run(&["verify", "--target", "appendix-a"]).status.code(), Some(2));
}

#[test]
fn stability_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stab.csv");
    let o = run(&["stability", "--scheme", "sfe", "--h", "1.99", "--steps", "50", "--out", path_arg(&out)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("sfe h=1.99"));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("step,t,distance\n0,0,"));
    assert_eq!(text.lines().count(), 52);
}

#[test]
fn eikonal_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eik.csv");
    let o = run(&[
        "eikonal", "--velocity", "expz2", "--order", "3", "--rays", "16", "--dt", "0.2", "--t-final", "1.0",
        "--snapshots", "0.5,1.0", "--out", path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("t,ray_index,x,y,z,kx,ky,kz,u"));
    assert_eq!(text.lines().count(), 1 + 2 * 16);
}

#[test]
fn pharmonic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ph.csv");
    let o = run(&[
        "pharmonic", "--p", "1", "--nodes", "32", "--t-final", "0.001", "--snapshots", "0.0005,0.001", "--out",
        path_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("t,s,mx,my,mz"));
    assert_eq!(text.lines().count(), 1 + 3 * 32);
}
