use kummer_modules::cli::run;
use serde_json::Value;

fn kummod(args: &[&str]) -> (i32, String) {
    let out = run(std::iter::once("kummod").chain(args.iter().copied()));
    (out.code, out.stdout)
}

#[test]
fn exit_codes() {
    let (code, _) = kummod(&["decompose", "--spec", "unramified p=3 n=1", "--m", "1"]);
    assert_eq!(code, 0);
    let (code, _) = kummod(&["decompose", "--spec", "elliptic p=3", "--m", "1"]);
    assert_eq!(code, 2);
    let (code, _) = kummod(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, out) = kummod(&[
        "decompose",
        "--spec",
        "cyclotomic p=3 n=1",
        "--m",
        "2",
        "--digits",
        "5",
    ]);
    assert_eq!(code, 3, "{out}");
    let (code, out) = kummod(&["normpair", "--spec", "unramified p=3 n=1", "--m", "1"]);
    assert_ne!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn json_reports() {
    let (code, out) = kummod(&[
        "--json",
        "normpair",
        "--spec",
        "cyclotomic p=3 n=1",
        "--m",
        "2",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);

    let (code, out) = kummod(&[
        "--json",
        "indecomp",
        "--p",
        "3",
        "--n",
        "1",
        "--m",
        "2",
        "--a",
        "-inf,-inf",
        "--d",
        "4",
        "--oracle",
    ]);
    assert_eq!(code, 0, "{out}");

    let (code, out) = kummod(&[
        "--json",
        "lemmas",
        "--p",
        "2",
        "--n",
        "1",
        "--m",
        "1,2",
        "--samples",
        "200",
    ]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn decompose_then_verify() {
    let dir = std::env::temp_dir().join(format!("kummod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let p = path.to_str().unwrap();
    let (code, _) = kummod(&[
        "decompose",
        "--spec",
        "cyclotomic p=3 n=1",
        "--m",
        "2",
        "--out",
        p,
    ]);
    assert_eq!(code, 0);
    let (code, _) = kummod(&["verify", "--report", p]);
    assert_eq!(code, 0);
    let (code, _) = kummod(&["verify", "--report", p, "--spec", "quadratic2 a=-1"]);
    assert_eq!(code, 2);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["d"] = 7.into();
    std::fs::write(&path, v.to_string()).unwrap();
    let (code, out) = kummod(&["verify", "--report", p]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], false);
    std::fs::remove_dir_all(&dir).ok();
}
