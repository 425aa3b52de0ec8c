use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn baer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

struct Setup {
    dir: TempDir,
}

impl Setup {
    fn new() -> Self {
        Setup {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn share(&self, dir: &str, node: usize) -> String {
        s(&self.path(dir).join(format!("node{node}.share"))).to_string()
    }
}

const EX3: &str = "n=6\nk=3\nb=1\nalpha=6\nD=4,5\n";
const EX1: &str = "n=5\nk=2\nb=0\nalpha=12\nD=3,4\n";

#[test]
fn bounds_tables() {
    let t = Setup::new();
    let out = baer(&["bounds", "--params", s(&t.file("ex3", EX3))]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("\n4\t3\t12\t"), "{text}");
    assert!(text.contains("\n5\t2\t10\t"), "{text}");
    assert!(text.contains("f_mbr=6\n"));
    assert!(text.contains("capacity_upper_bound=6\n"));

    let text = stdout(&baer(&["bounds", "--params", s(&t.file("ex1", EX1))]));
    assert!(
        text.contains("\n3\t4\t12\t") && text.contains("\n4\t3\t12\t"),
        "{text}"
    );
    assert!(text.contains("f_mbr=20\n"));

    let bad = baer(&[
        "bounds",
        "--params",
        s(&t.file("bad", "n=6\nk=3\nb=2\nalpha=6\nD=4,5\n")),
    ]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("2b = 4 is not below k = 3"));
}

#[test]
fn selftest_and_find_field() {
    let t = Setup::new();
    let seven = t.file("ex3-7", &format!("{EX3}p=7\n"));
    assert_eq!(
        code(&baer(&["selftest", "--params", s(&seven), "--scheme", "1"])),
        4
    );

    let certified = t.path("ex3-cert");
    let out = baer(&[
        "find-field",
        "--params",
        s(&seven),
        "--scheme",
        "1",
        "--out",
        s(&certified),
    ]);
    assert_eq!(code(&out), 0);
    assert!(fs::read_to_string(&certified).unwrap().contains("p=17"));
    assert_eq!(
        code(&baer(&[
            "selftest",
            "--params",
            s(&certified),
            "--scheme",
            "1"
        ])),
        0
    );

    let none = baer(&[
        "find-field",
        "--params",
        s(&seven),
        "--scheme",
        "1",
        "--to",
        "13",
    ]);
    assert_eq!(code(&none), 4);
    assert_eq!(
        code(&baer(&[
            "selftest",
            "--params",
            s(&t.file("nop", EX3)),
            "--scheme",
            "1"
        ])),
        2
    );
}

#[test]
fn encode_repair_reconstruct_round_trip() {
    let t = Setup::new();
    let params = t.file("p", &format!("{EX3}p=17\n"));
    let msg = t.file("msg", "3\n1\n4\n1\n5\n9\n");
    assert_eq!(
        code(&baer(&[
            "encode",
            "--params",
            s(&params),
            "--scheme",
            "1",
            "--message",
            s(&msg),
            "--out",
            s(&t.path("sh"))
        ])),
        0
    );
    let original = fs::read_to_string(t.share("sh", 2)).unwrap();
    assert!(original.starts_with("BAER1 p=17 n=6 k=3 b=1 alpha=6 D=4,5 node=2 scheme=1\n"));

    // node 2 lost; node 4 lies during repair
    let out_share = t.path("r2.share");
    let mut args = vec![
        "repair",
        "--params",
        s(&params),
        "--failed",
        "2",
        "--helpers",
    ];
    let helpers: Vec<String> = [1, 3, 4, 5, 6].iter().map(|&n| t.share("sh", n)).collect();
    args.extend(helpers.iter().map(String::as_str));
    args.extend([
        "--adversary",
        "liar",
        "--controlled",
        "4",
        "--seed",
        "8",
        "--out",
        s(&out_share),
    ]);
    let out = baer(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        stdout(&out),
        "bandwidth d=5 symbols=10 gamma_mbr=10 per_helper=2\n"
    );
    assert_eq!(fs::read_to_string(&out_share).unwrap(), original);

    let back = t.path("back");
    let (a, b, c) = (
        t.share("sh", 1),
        s(&out_share).to_string(),
        t.share("sh", 6),
    );
    let out = baer(&[
        "reconstruct",
        "--shares",
        &a,
        &b,
        &c,
        "--adversary",
        "random",
        "--controlled",
        "6",
        "--out",
        s(&back),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&back).unwrap(), fs::read(&msg).unwrap());

    // two liars out of k = 3 exceed the model
    let out = baer(&[
        "reconstruct",
        "--shares",
        &a,
        &b,
        &c,
        "--adversary",
        "random",
        "--controlled",
        "1,6",
        "--out",
        s(&back),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn scheme_two_and_concat_repairs() {
    let t = Setup::new();
    let p2 = t.file("p2", "n=6\nk=3\nb=1\nalpha=12\nD=4,5\np=19\n");
    let msg: String = (0..12).map(|i| format!("{}\n", i + 2)).collect();
    let m2 = t.file("m2", &msg);
    assert_eq!(
        code(&baer(&[
            "encode",
            "--params",
            s(&p2),
            "--scheme",
            "2",
            "--message",
            s(&m2),
            "--out",
            s(&t.path("a"))
        ])),
        0
    );
    let helpers: Vec<String> = [1, 2, 3, 4, 5].iter().map(|&n| t.share("a", n)).collect();
    let out_path = t.path("r6");
    let mut args = vec![
        "repair",
        "--scheme",
        "2",
        "--failed",
        "6",
        "--out",
        s(&out_path),
        "--helpers",
    ];
    args.extend(helpers.iter().map(String::as_str));
    let out = baer(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        stdout(&out),
        "bandwidth d=5 symbols=20 gamma_mbr=20 per_helper=4\n"
    );
    assert_eq!(
        fs::read(&out_path).unwrap(),
        fs::read(t.share("a", 6)).unwrap()
    );

    let p1 = t.file("p1", &format!("{EX1}p=7\n"));
    let m1 = t.file(
        "m1",
        &(0..20).map(|i| format!("{}\n", i % 7)).collect::<String>(),
    );
    assert_eq!(
        code(&baer(&[
            "encode",
            "--params",
            s(&p1),
            "--scheme",
            "concat",
            "--message",
            s(&m1),
            "--out",
            s(&t.path("c"))
        ])),
        0
    );
    let (h1, h2, h3) = (t.share("c", 1), t.share("c", 2), t.share("c", 4));
    let r = t.path("r5");
    let out = baer(&[
        "repair",
        "--failed",
        "5",
        "--helpers",
        &h1,
        &h2,
        &h3,
        "--out",
        s(&r),
    ]);
    assert_eq!(
        stdout(&out),
        "bandwidth d=3 symbols=12 gamma_mbr=12 per_helper=4\n"
    );
    assert_eq!(fs::read(&r).unwrap(), fs::read(t.share("c", 5)).unwrap());

    // a scheme mismatch between the flag and the headers is rejected
    assert_eq!(
        code(&baer(&[
            "repair",
            "--scheme",
            "1",
            "--failed",
            "5",
            "--helpers",
            &h1,
            &h2,
            &h3,
            "--out",
            s(&r)
        ])),
        2
    );
}

#[test]
fn input_validation() {
    let t = Setup::new();
    let params = t.file("p", &format!("{EX3}p=17\n"));
    let short = t.file("short", "1\n2\n");
    assert_eq!(
        code(&baer(&[
            "encode",
            "--params",
            s(&params),
            "--scheme",
            "1",
            "--message",
            s(&short),
            "--out",
            s(&t.path("x"))
        ])),
        2
    );
    let padded = t.file("padded", "01\n2\n3\n4\n5\n6\n");
    assert_eq!(
        code(&baer(&[
            "encode",
            "--params",
            s(&params),
            "--scheme",
            "1",
            "--message",
            s(&padded),
            "--out",
            s(&t.path("x"))
        ])),
        2
    );
    let missing = t.path("nope");
    assert_eq!(code(&baer(&["bounds", "--params", s(&missing)])), 2);
}

#[test]
fn simulate_scripted_and_generated() {
    let t = Setup::new();
    let params = t.file("p", &format!("{EX3}p=17\n"));
    let script = t.file(
        "s",
        "corrupt liar nodes=2 seed=1\nfail 1\nrepair 1 d=4 helpers=lowest\nreconstruct 1,2,3\n",
    );
    let out = baer(&[
        "simulate",
        "--params",
        s(&params),
        "--scheme",
        "1",
        "--scenario",
        s(&script),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("BAERSIM p=17 "));
    assert!(
        text.contains("\trepair 1 d=4 helpers=lowest\t12\t12\tyes\tyes\tyes\t"),
        "{text}"
    );

    let report = t.path("report");
    let out = baer(&[
        "simulate",
        "--params",
        s(&params),
        "--scheme",
        "1",
        "--adversary",
        "liar",
        "--seed",
        "5",
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("totals events=50 "), "{text}");
    assert!(text.contains("bandwidth_match=yes all_ok=yes"));

    let bad = t.file("bad", "repair 1 d=4\n");
    assert_eq!(
        code(&baer(&[
            "simulate",
            "--params",
            s(&params),
            "--scheme",
            "1",
            "--scenario",
            s(&bad)
        ])),
        2
    );
}
