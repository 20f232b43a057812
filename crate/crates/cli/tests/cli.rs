use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use psdrank::certificates::p_alpha_factorization;
use psdrank::gadgets::{build_p, InstanceMatrix};
use psdrank::io;
use psdrank::number::int;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psdrank")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn setup() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("f.txt"), "x1*x1-1\n").unwrap();
    fs::write(dir.path().join("i3.mtx"), io::write_instance(&InstanceMatrix::identity(3), None)).unwrap();
    dir
}

#[test]
fn reduce_writes_instance_with_target() {
    let dir = setup();
    let o = run(dir.path(), &["reduce", "f.txt", "-o", "m.mtx"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (m, r) = io::parse_instance(&fs::read_to_string(dir.path().join("m.mtx")).unwrap()).unwrap();
    let r = r.unwrap();
    let k = (r - 3) / 2;
    assert_eq!(m.nrows(), 2 * k + 217);
    assert_eq!(r, 2 * k + 3);
    let err = stderr(&o);
    assert!(err.contains("stage=reduce") && err.contains("input_sha256=") && err.contains("K=144"));
}

#[test]
fn verify_p4_exactly() {
    let dir = setup();
    let a = int(4);
    fs::write(dir.path().join("p4.mtx"), io::write_instance(&build_p(&a).unwrap(), Some(2))).unwrap();
    fs::write(dir.path().join("p4.fac"), io::write_factorization_exact(&p_alpha_factorization(&a).unwrap())).unwrap();
    let o = run(dir.path(), &["verify", "p4.mtx", "p4.fac", "--mode", "full"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max_residual=0\n"), "{}", stdout(&o));
}

#[test]
fn search_reports_failure_on_identity() {
    let dir = setup();
    let o = run(dir.path(), &["search", "i3.mtx", "--k", "2", "--restarts", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict=failed"));
    assert!(stderr(&o).contains("error code=no-witness"));
    let o = run(dir.path(), &["search", "i3.mtx", "--k", "3", "-o", "w.fac"]);
    assert_eq!(o.status.code(), Some(0));
    let v = run(dir.path(), &["verify", "i3.mtx", "w.fac"]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = setup();
    let a = run(dir.path(), &["search", "i3.mtx", "--k", "2", "--restarts", "4", "--seed", "7", "-o", "a.fac"]);
    let b = run(dir.path(), &["search", "i3.mtx", "--k", "2", "--restarts", "4", "--seed", "7", "-o", "b.fac"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(fs::read(dir.path().join("a.fac")).unwrap(), fs::read(dir.path().join("b.fac")).unwrap());
    fs::write(dir.path().join("g.txt"), "x1").unwrap();
    run(dir.path(), &["matrices", "g.txt", "--out-dir", "m1"]);
    run(dir.path(), &["matrices", "g.txt", "--out-dir", "m2"]);
    for name in ["A.sym", "B.mtx", "C.mtx"] {
        assert_eq!(
            fs::read(dir.path().join("m1").join(name)).unwrap(),
            fs::read(dir.path().join("m2").join(name)).unwrap()
        );
    }
}

#[test]
fn output_files_round_trip() {
    let dir = setup();
    let o = run(dir.path(), &["matrices", "f.txt", "--out-dir", "mats"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let read = |p: &str| fs::read_to_string(dir.path().join(p)).unwrap();
    let a = io::parse_symbolic(&read("mats/A.sym")).unwrap();
    assert_eq!(io::write_symbolic(&a), read("mats/A.sym"));
    for name in ["mats/B.mtx", "mats/C.mtx"] {
        let m = io::parse_incomplete(&read(name)).unwrap();
        assert_eq!(io::write_incomplete(&m), read(name));
    }
    let o = run(dir.path(), &["witness", "f.txt", "--root", "-1", "--out-dir", "w"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (m, r) = io::parse_instance(&read("w/completion.mtx")).unwrap();
    assert_eq!(io::write_instance(&m, r), read("w/completion.mtx"));
    let w = io::parse_factorization(&read("w/completion.fac")).unwrap();
    assert_eq!(io::write_witness(&w), read("w/completion.fac"));

    let v = run(dir.path(), &["verify", "w/completion.mtx", "w/completion.fac"]);
    assert_eq!(v.status.code(), Some(0));
    let e = run(dir.path(), &["extract-root", "f.txt", "w/completion.fac"]);
    assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
    assert_eq!(stdout(&e), "x1=-1e0\n");
    let s = run(dir.path(), &["sqrt-check", "mats/B.mtx"]);
    assert_eq!(s.status.code(), Some(0));
    assert!(stdout(&s).starts_with("holds=true\n"));
}

#[test]
fn formula_and_bound() {
    let dir = setup();
    fs::write(dir.path().join("phi.txt"), "x1 > 0 & x1*x1 = 4").unwrap();
    let o = run(dir.path(), &["normalize", "phi.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let f: psdrank::poly::Polynomial = stdout(&o).trim().parse().unwrap();
    assert!(!f.is_zero());
    let o = run(dir.path(), &["bound", "f.txt", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains(" m=2 ") && err.contains("warning code=cube-completeness"));
}

#[test]
fn errors_carry_codes() {
    let dir = setup();
    fs::write(dir.path().join("bad.txt"), "x1 +* 2").unwrap();
    let o = run(dir.path(), &["sigma", "bad.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error code=parse "));
    let o = run(dir.path(), &["search", "i3.mtx"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error code=usage") && stderr(&o).contains("--k"));
    let o = run(dir.path(), &["sigma", "missing.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error code=io "));
    let o = run(dir.path(), &["witness", "f.txt", "--root", "1/2", "--out-dir", "w"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error code=not-a-root "));
}
