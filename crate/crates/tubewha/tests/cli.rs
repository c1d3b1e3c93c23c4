use std::path::Path;
use std::process::{Command, Output};

use tubewha::report::Report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubewha")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--category", "builtin:vec_z2"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert!(stdout(&ok).contains("=> pass"));

    // the fibonacci Haar integral is not cocommutative
    let fib = run(&["verify", "--category", "builtin:fibonacci"]);
    assert_eq!(code(&fib), 1);
    let line = stdout(&fib).lines().find(|l| l.contains("haar_cocommutative")).unwrap().to_string();
    assert!(line.ends_with("FAIL"), "{line}");

    let bad = run(&["verify", "--category", "builtin:nope"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));
}

#[test]
fn json_report_parses() {
    let o = run(&["--json", "characters", "--category", "builtin:fibonacci"]);
    assert_eq!(code(&o), 0);
    let r = Report::from_json(&stdout(&o)).unwrap();
    assert_eq!(r.manifest.command, "characters");
    assert_eq!(r.manifest.category.as_deref(), Some("fibonacci"));
    assert!(r.manifest.category_hash.is_some());
    let mut dims: Vec<u64> = serde_json::from_value(r.results["block_dims"].clone()).unwrap();
    dims.sort();
    assert_eq!(dims, [2, 3]);
}

#[test]
fn oversized_lattice_needs_sampled_mode() {
    let o = run(&["lattice", "--category", "builtin:haagerup_h3", "--n", "2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--sampled"));
}

#[test]
fn dump_roundtrip_and_fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("z3.dump");
    let o = run(&["build", "--category", "builtin:vec_z3", "--out", p(&dump)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["verify", "--in", p(&dump)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let text = std::fs::read_to_string(&dump).unwrap();
    let mut done = false;
    let corrupted: Vec<String> = text
        .lines()
        .map(|l| {
            if !done && l.starts_with("mult ") {
                done = true;
                let mut f: Vec<String> = l.split_whitespace().map(String::from).collect();
                let re: f64 = f[4].parse().unwrap();
                f[4] = format!("{:e}", re + 1e-2);
                f.join(" ")
            } else {
                l.to_string()
            }
        })
        .collect();
    let bad = dir.path().join("bad.dump");
    std::fs::write(&bad, corrupted.join("\n")).unwrap();
    let o = run(&["verify", "--in", p(&bad)]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    let line = out.lines().find(|l| l.contains("associativity")).unwrap();
    assert!(line.ends_with("FAIL"), "{out}");
}

#[test]
fn malformed_dump_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.dump");
    std::fs::write(&f, "#tubewha-dump/1\ndim 2\nmult 0 0 9 1 0\n").unwrap();
    let o = run(&["verify", "--in", p(&f)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn recorded_runs_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("run.json");
    let o = run(&["--seed", "7", "--report", p(&rep), "lattice", "--category", "builtin:vec_z2", "--n", "2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["--verify-manifest", p(&rep)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("matches"));

    // a tampered result is reported
    let mut r = Report::from_json(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    r.results["terms"] = serde_json::json!(99);
    std::fs::write(&rep, r.to_json()).unwrap();
    let o = run(&["--verify-manifest", p(&rep)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("terms"), "{}", stdout(&o));
}

#[test]
fn spec_files_load() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("z2.toml");
    std::fs::write(
        &spec,
        r#"
name = "z2 by hand"
rank = 2
labels = ["1", "g1"]
dual = [0, 1]
fusion = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]
fsymbols = [
  [0, 0, 0, 0, 0, 0, 1, 0], [0, 0, 1, 1, 0, 1, 1, 0], [0, 1, 0, 1, 1, 1, 1, 0], [0, 1, 1, 0, 1, 0, 1, 0],
  [1, 0, 0, 1, 1, 0, 1, 0], [1, 0, 1, 0, 1, 1, 1, 0], [1, 1, 0, 0, 0, 1, 1, 0], [1, 1, 1, 1, 0, 0, 1, 0],
]
fpdim = [1.0, 1.0]
"#,
    )
    .unwrap();
    let o = run(&["verify", "--category", p(&spec)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));

    // same data and labels, same hash as the builtin
    let h = |cat: &str| {
        let o = run(&["--json", "characters", "--category", cat]);
        Report::from_json(&stdout(&o)).unwrap().manifest.category_hash.unwrap()
    };
    assert_eq!(h(p(&spec)), h("builtin:vec_z2"));

    std::fs::write(&spec, "rank = 1\nlabels = [\"1\"]\ndual = [0]\nfusion = [[0,0,0]]\ncolour = 3\n").unwrap();
    let o = run(&["verify", "--category", p(&spec)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}
