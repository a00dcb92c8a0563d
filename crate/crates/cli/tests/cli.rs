//! End-to-end tests of the binary: exit codes, deterministic outputs, and
//! the derive -> re-ingest round trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kidagraph"))
}

fn jobs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../jobs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn tower_csv_matches_known_values() {
    let job = jobs_dir().join("cycle3_p2_inertia_zp.job");
    let out = run(&["tower", "--job", job.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    // base tower: kappa(X_n) = 3 * 4^n
    assert!(text.contains("0,3,3,3,0\n"), "{text}");
    assert!(text.contains("4,3,48,768,8\n"), "{text}");
    // full tower: kappa = 6 * 32^n
    assert!(text.contains("4,6,96,6291456,21\n"), "{text}");
    assert!(text.contains("base,2,0,0,0,true\n"), "{text}");
    assert!(text.contains("full,5,0,1,0,true\n"), "{text}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let job = jobs_dir().join("cycle3_p2_inertia_full.job");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let out = run(&[
            "tower",
            "--job",
            job.to_str().unwrap(),
            "--output-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let out = run(&[
            "kida",
            "--job",
            job.to_str().unwrap(),
            "--output-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let out = run(&[
            "derive",
            "--job",
            job.to_str().unwrap(),
            "--level",
            "2",
            "--output-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for file in [
        "tower_base.csv",
        "tower_full.csv",
        "fits.csv",
        "kida_summary.csv",
        "kida_corrections.csv",
        "vertices.csv",
        "edges.csv",
    ] {
        let a = fs::read(dirs[0].path().join(file)).unwrap();
        let b = fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs across runs");
        assert!(!a.is_empty());
    }
}

#[test]
fn derive_output_reingests_with_the_same_kappa() {
    let job = jobs_dir().join("cycle3_p2_inertia_zp.job");
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "derive",
        "--job",
        job.to_str().unwrap(),
        "--level",
        "2",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let edges = dir.path().join("edges.csv");
    let out = run(&["oracle", "--edges", edges.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    // the full tower of this job at level 2 has kappa = 6 * 32^2 = 6144
    assert!(stdout(&out).contains("kappa (determinant):        6144"), "{}", stdout(&out));
    assert!(stdout(&out).contains("oracle: agree"));
}

#[test]
fn kida_passes_on_all_shipped_jobs() {
    for name in [
        "cycle3_p2_inertia_g.job",
        "cycle3_p2_inertia_zp.job",
        "cycle3_p2_inertia_full.job",
    ] {
        let job = jobs_dir().join(name);
        let out = run(&["kida", "--job", job.to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        assert!(stdout(&out).contains("verdict: pass"), "{name}");
    }
    // the finite-inertia job reports the failed vertex condition and mu = 3
    let job = jobs_dir().join("cycle3_p2_inertia_g.job");
    let out = run(&["kida", "--job", job.to_str().unwrap(), "--format", "csv"]);
    let text = stdout(&out);
    assert!(text.contains("star_holds,false"), "{text}");
    assert!(text.contains("mu_full,3"), "{text}");
    assert!(text.contains("lambda_identity,n/a"), "{text}");
}

#[test]
fn parse_errors_exit_2_with_records() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.job");
    fs::write(
        &bad,
        "format_version = 1\n[group]\np = 4\n[graph]\nvertices = []\n",
    )
    .unwrap();
    let out = run(&["tower", "--job", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("record: kind=parse"), "{err}");
    assert!(err.contains("non-prime-p"), "{err}");
    assert!(err.contains("empty-graph"), "{err}");
}

#[test]
fn too_few_levels_is_a_domain_error() {
    let job = jobs_dir().join("cycle3_p2_inertia_zp.job");
    let out = run(&[
        "tower",
        "--job",
        job.to_str().unwrap(),
        "--n-max",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("record: kind=domain"), "{}", stderr(&out));
}

#[test]
fn disconnected_layer_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("disconnected.job");
    // all-identity voltages: level 1 of the full tower falls apart
    fs::write(
        &job,
        r#"
format_version = 1
[group]
p = 2
[graph]
vertices = ["a", "b"]
[[graph.edges]]
name = "e"
from = "a"
to = "b"
"#,
    )
    .unwrap();
    let out = run(&["tower", "--job", job.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("disconnected"), "{}", stderr(&out));
}

#[test]
fn cases_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "cases",
        "--p",
        "2",
        "--m",
        "2",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("grid: all-pass"));
    let csv = fs::read_to_string(dir.path().join("cases.csv")).unwrap();
    assert!(csv.starts_with("case,n_max,row,pass,level,expected,actual\n"));
    assert!(csv.contains("inertia=G,4,full mu,true"), "{csv}");
}

#[test]
fn oracle_runs_on_job_base_graph() {
    let job = jobs_dir().join("cycle3_p2_inertia_zp.job");
    let out = run(&["oracle", "--job", job.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("kappa (determinant):        3"), "{text}");
    assert!(text.contains("kappa (enumeration):        3"), "{text}");
    assert!(text.contains("oracle: agree"));
}
