use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use fskyrme_core::config::parse_config;
use fskyrme_core::energy;
use fskyrme_core::run::{self, convergence_rows, drift_monotone, Command};
use fskyrme_core::snapshot::FieldSnapshot;

fn fskyrme() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_fskyrme"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn csv_rows_match_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        "grid.n = 16\ngrid.box_length = 4\ntarget = su2\ninitializer = hedgehog\n\
         flow.max_iters = 30\nflow.skyrme_weight = 0.7\noutput.snapshot_every = 10\n",
    )
    .unwrap();
    let outcome = run::run(Command::Minimize, &cfg, dir.path()).unwrap();
    assert!(outcome.passed, "{}", outcome.summary);
    let csv = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    let mut checked = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let iter: usize = cols[0].parse().unwrap();
        let path = dir.path().join(format!("snapshot_{iter:06}.bin"));
        if !path.exists() {
            continue;
        }
        let snap = FieldSnapshot::read(&path).unwrap();
        let e = energy::energy_map_weighted(&snap.field, 0.7);
        let logged: f64 = cols[3].parse().unwrap();
        assert!((e.total - logged).abs() <= 1e-12 * logged.abs(), "{} vs {logged}", e.total);
        assert_eq!(snap.energy, logged);
        checked += 1;
    }
    assert_eq!(checked, 3);
}

#[test]
fn invariants_of_degree_two_projection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("grid.n = 48\ntarget = s2\ninitializer = hopf_projection\ninitializer.k = 2\n").unwrap();
    let o = run::run(Command::Invariants, &cfg, dir.path()).unwrap();
    assert!(o.passed, "{}", o.summary);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("invariants.json")).unwrap()).unwrap();
    let hopf = &json["invariants"]["hopf"];
    assert_eq!(hopf["nearest"], 2);
    assert!((hopf["raw"].as_f64().unwrap() - 2.0).abs() < 0.3);
}

#[test]
fn hopf_drift_shrinks_under_refinement() {
    let cfg = parse_config(
        "target = s2\ninitializer = hopf_projection\nconvergence.sizes = 16, 32, 48\n",
    )
    .unwrap();
    let rows = convergence_rows(&cfg).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [16, 32, 48]);
    assert!(drift_monotone(&rows), "{rows:?}");
    assert!(rows[2].drift < 0.1);
}

#[test]
fn binary_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "# tiny run\ngrid.n = 12\ngrid.box_length = 3\ntarget = s2\ninitializer = hopf_projection\n\
         flow.max_iters = 5\noutput.emit_vtk = true\n",
    );
    let out = dir.path().join("out");
    let st = fskyrme()
        .args(["minimize", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "1"])
        .output()
        .unwrap();
    assert!(
        st.status.success(),
        "{}{}",
        String::from_utf8_lossy(&st.stdout),
        String::from_utf8_lossy(&st.stderr)
    );
    for f in ["energy.csv", "final.bin", "invariants.json", "energy_density.vtk"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let vtk = fs::read_to_string(out.join("energy_density.vtk")).unwrap();
    assert!(vtk.contains("DATASET STRUCTURED_POINTS") && vtk.contains("POINT_DATA 1728"));

    let st = fskyrme()
        .args(["invariants", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("FSKYRME_THREADS", "1")
        .output()
        .unwrap();
    assert!(st.status.success());
    assert!(String::from_utf8_lossy(&st.stdout).contains("PASS"));
}

#[test]
fn binary_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "target = s2\ninitializer = constant\ngrid.spacing = 2\n");
    let st = fskyrme().args(["invariants", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let err = String::from_utf8_lossy(&st.stderr);
    assert!(err.contains("line 3") && err.contains("grid.spacing"), "{err}");

    let missing = dir.path().join("nope.cfg");
    let st = fskyrme().args(["invariants", "--config"]).arg(&missing).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("nope.cfg"));

    let cfg = write_config(dir.path(), "target = s2\ninitializer = constant\n");
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let st = fskyrme()
        .args(["invariants", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("sub"));
}
