use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const Z2: &str = r#"{"num": [[0,0],[0,0],[1,0]], "den": [[1,0]]}"#;
const BASILICA: &str = r#"{"num": [[-1,0],[0,0],[1,0]], "den": [[1,0]]}"#;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schroeder-lab"))
        .current_dir(dir)
        .env_remove("SCHRODER_LAB_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn map_file(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn coeffs_of_z_squared_are_inverse_factorials() {
    let dir = tempfile::tempdir().unwrap();
    map_file(dir.path(), "z2.json", Z2);
    let v = json(&lab(dir.path(), &["coeffs", "--map", "z2.json", "--z0", "1,0"]));
    let a = v["coeffs"].as_array().unwrap();
    let mut fact = 1.0;
    for (n, c) in a.iter().take(20).enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        assert!((c[0].as_f64().unwrap() - 1.0 / fact).abs() < 1e-12);
    }
}

#[test]
fn ply_report_for_z_squared() {
    let dir = tempfile::tempdir().unwrap();
    map_file(dir.path(), "z2.json", Z2);
    let v = json(&lab(dir.path(), &["ply", "--map", "z2.json"]));
    assert_eq!(v["q_inf"], 1);
    assert_eq!(v["lhs"], 1.0);
    assert_eq!(v["rhs"], 2.0);
    assert_eq!(v["slack"], 1.0);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    map_file(dir.path(), "b.json", BASILICA);
    let jobs: [&[&str]; 3] = [
        &["tracts", "--map", "b.json", "--census"],
        &["sweep", "--nx", "40", "--ny", "30"],
        &["render", "--map", "b.json", "--kind", "julia", "--box", "2", "--grid", "96"],
    ];
    for job in jobs {
        let mut outs = Vec::new();
        for t in ["1", "4", "8"] {
            let mut args = job.to_vec();
            args.extend(["--threads", t, "--out", "o.dat"]);
            let out = lab(dir.path(), &args);
            assert!(out.status.success(), "{job:?}: {}", String::from_utf8_lossy(&out.stderr));
            let mut files = vec![std::fs::read(dir.path().join("o.dat")).unwrap()];
            if job[0] == "sweep" {
                files.push(std::fs::read(dir.path().join("o.ppm")).unwrap());
            }
            outs.push(files);
        }
        assert!(outs.windows(2).all(|w| w[0] == w[1]), "{job:?}");
    }
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = Command::new(env!("CARGO_BIN_EXE_schroeder-lab"))
        .current_dir(dir.path())
        .env("SCHRODER_LAB_THREADS", "3")
        .args(["sweep", "--nx", "16", "--ny", "16"])
        .output()
        .unwrap();
    let b = lab(dir.path(), &["sweep", "--nx", "16", "--ny", "16", "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = String::from_utf8(a.stdout).unwrap();
    assert!(csv.starts_with("re,im,in_c,escape_iter,in_h,period,multiplier_abs,cover,error\n"));
    assert_eq!(csv.lines().count(), 1 + 16 * 16);
}

#[test]
fn config_file_with_relative_map() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("cfg")).unwrap();
    map_file(&dir.path().join("cfg"), "z2.json", Z2);
    std::fs::write(
        dir.path().join("cfg/job.toml"),
        "map_file = \"z2.json\"\nthreads = 2\nw = [[0.5, 0.0]]\n",
    )
    .unwrap();
    let v = json(&lab(dir.path(), &["eval", "--config", "cfg/job.toml"]));
    let row = &v[0];
    assert!((row["value"][0].as_f64().unwrap() - 0.5f64.exp()).abs() < 1e-12);
    // flags win over the file
    let v = json(&lab(dir.path(), &["eval", "--config", "cfg/job.toml", "--w", "1,0"]));
    assert!((v[0]["value"][0].as_f64().unwrap() - 1f64.exp()).abs() < 1e-12);
}

#[test]
fn bad_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    map_file(dir.path(), "z2.json", Z2);
    for args in [
        &["order", "--map", "z2.json", "--grid", "0"][..],
        &["coeffs"][..],
        &["coeffs", "--map", "missing.json"][..],
        &["sweep", "--threads", "0"][..],
        &["tracts", "--map", "z2.json", "--value", "0,0", "--radii", "0.1,0.2,0.3"][..],
    ] {
        let out = lab(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}
