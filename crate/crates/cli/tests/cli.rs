use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn program(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/programs").join(format!("{name}.hopl"))
}

fn hoplc(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hoplc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const MAPFUN: &str = "
kind i type.
type nil list i.
type :: i -> list i -> list i.
type g i -> i -> i.
type a, b i.
type mapfun list i -> (i -> i) -> list i -> o.
mapfun nil F nil.
mapfun (X :: L1) F ((F X) :: L2) :- mapfun L1 F L2.
";

fn mapfun_file() -> tempfile_lite::Path {
    tempfile_lite::write("mapfun", MAPFUN)
}

/// Just enough of a temp file to hand a program to the binary.
mod tempfile_lite {
    pub struct Path(pub std::path::PathBuf);

    impl Drop for Path {
        fn drop(&mut self) {
            let _ = std::fs::remove_file(&self.0);
        }
    }

    pub fn write(stem: &str, text: &str) -> Path {
        let p = std::env::temp_dir().join(format!("hoplc-{stem}-{}.hopl", std::process::id()));
        std::fs::write(&p, text).unwrap();
        Path(p)
    }
}

#[test]
fn batch_queries_from_a_file() {
    for engine in ["interp", "vm"] {
        let o = hoplc(&["--engine", engine, program("peano").to_str().unwrap()], "");
        let out = stdout(&o);
        assert!(out.contains("K = s (s (s (s (s (s z)))))"), "{out}");
        assert!(out.ends_with("no\n"));
        // the last query in the file fails
        assert_eq!(o.status.code(), Some(1));
    }
}

#[test]
fn eval_and_exit_codes() {
    let f = mapfun_file();
    let path = f.0.to_str().unwrap();
    let o = hoplc(&[path, "-e", "mapfun (a :: b :: nil) F ((g a a) :: (g a b) :: nil)"], "");
    assert_eq!(stdout(&o), "F = g a\nno\n");
    assert_eq!(o.status.code(), Some(0));

    let o = hoplc(&[path, "-e", "mapfun (a :: nil) F nil"], "");
    assert_eq!(stdout(&o), "no\n");
    assert_eq!(o.status.code(), Some(1));

    let o = hoplc(&[path, "-e", "mapfun undeclared F nil"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = hoplc(&["/nonexistent/file.hopl"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solutions_limits_the_stream() {
    let f = mapfun_file();
    let q = "mapfun (a :: nil) F ((g a a) :: nil)";
    let o = hoplc(&[f.0.to_str().unwrap(), "--engine", "vm", "--solutions", "2", "-e", q], "");
    assert_eq!(stdout(&o), "F = x1\\ g a a\nF = g a\n");
}

#[test]
fn depth_exhaustion_is_reported() {
    let f = mapfun_file();
    let q = "mapfun (a :: nil) F ((g a a) :: nil)";
    let o = hoplc(&[f.0.to_str().unwrap(), "--depth", "1", "-e", q], "");
    assert!(stdout(&o).ends_with("no (search depth exceeded)\n"), "{}", stdout(&o));
}

#[test]
fn dump_code_prints_a_listing() {
    let f = mapfun_file();
    let o = hoplc(&[f.0.to_str().unwrap(), "--dump-code", "mapfun"], "");
    assert_eq!(o.status.code(), Some(0));
    let golden = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/mapfun.txt")).unwrap();
    assert_eq!(stdout(&o), golden);

    let o = hoplc(&[f.0.to_str().unwrap(), "--dump-code", "nosuch"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn counters_go_to_stderr() {
    let o = hoplc(&["--counters", program("nrev").to_str().unwrap()], "");
    assert!(String::from_utf8_lossy(&o.stderr).contains("counters:"));
    assert!(!stdout(&o).contains("counters:"));
}

#[test]
fn repl_asks_for_more_and_halts() {
    let f = mapfun_file();
    let input = "mapfun (a :: nil)\n  F ((g a a) :: nil).\n;\n\nmapfun nil F nil.\n;\nhalt.\nmapfun nil F nil.\n";
    let o = hoplc(&[f.0.to_str().unwrap()], input);
    assert_eq!(stdout(&o), "F = x1\\ g a a\nF = g a\nyes\nno\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn repl_reports_errors_and_continues() {
    let f = mapfun_file();
    let o = hoplc(&[f.0.to_str().unwrap()], "nosuch X.\nmapfun (a :: nil) (x\\ x) L.\n");
    let out = stdout(&o);
    assert!(out.starts_with("error:"), "{out}");
    assert!(out.ends_with("L = a :: nil\n"), "{out}");
    assert_eq!(o.status.code(), Some(0));
}
