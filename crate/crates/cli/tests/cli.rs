use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cssep"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn cssep");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(bytes) = stdin {
            pipe.write_all(bytes).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn example(name: &str, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["example", "--name", name];
    args.extend_from_slice(extra);
    let out = run(&args, None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn entangled_rank_six_exits_one() {
    let doc = example("entangled-rank6", &[]);
    let out = run(&["classify"], Some(&doc));
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "entangled");
    assert_eq!(v["rule"], "rank-6 empty product set");
}

#[test]
fn sigma_is_separable() {
    let doc = example("sigma", &[]);
    let out = run(&["classify"], Some(&doc));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "separable");
    let vectors = v["evidence"]["product_vectors"].as_array().map_or(0, |a| a.len());
    let terms = v["terms"].as_array().map_or(0, |a| a.len());
    assert!(vectors == 8 || terms == 7, "vectors {vectors}, terms {terms}");
}

#[test]
fn toeplitz_scan_lines() {
    let out = run(&["toeplitz-scan", "--parties", "3", "--samples", "10", "--seed", "1"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    for l in lines {
        serde_json::from_str::<Value>(l).unwrap();
    }
    let again = run(&["toeplitz-scan", "--parties", "3", "--samples", "10", "--seed", "1"], None);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn outputs_are_deterministic() {
    for (name, cmd) in [("sigma", "decompose"), ("nonnegative", "gme"), ("entangled-rank6", "ppt")] {
        let doc = example(name, &[]);
        let a = run(&[cmd, "--seed", "5"], Some(&doc));
        let b = run(&[cmd, "--seed", "5"], Some(&doc));
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "{name} {cmd}");
    }
}

#[test]
fn document_round_trip_is_fixed_point() {
    for fmt in ["dense", "cs-compressed"] {
        let doc = example("sigma", &["--format", fmt]);
        let v: Value = serde_json::from_slice(&doc).unwrap();
        let once = serde_json::to_string(&v).unwrap();
        let parsed = cssep::document::StateDocument::parse(&once).unwrap();
        assert_eq!(parsed.to_json(), cssep::document::StateDocument::parse(&parsed.to_json()).unwrap().to_json());
    }
}

#[test]
fn compressed_and_dense_agree() {
    let dense = run(&["check-cs"], Some(&example("entangled-rank6", &["--format", "dense"])));
    let packed = run(&["check-cs"], Some(&example("entangled-rank6", &["--format", "cs-compressed"])));
    assert_eq!(dense.status.code(), Some(0));
    assert_eq!(dense.stdout, packed.stdout);
}

#[test]
fn malformed_json_is_input_error() {
    let out = run(&["classify"], Some(b"{\"parties\": 2,"));
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
    let out = run(&["classify"], Some(b"{\"parties\": 2, \"dim\": 2, \"format\": \"dense\"}"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oversize_is_input_error() {
    let doc = br#"{"parties": 7, "dim": 4, "format": "cs-compressed", "csEntries": []}"#;
    let out = run(&["classify"], Some(doc));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_subcommand_is_input_error() {
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(3));
    assert_eq!(run(&["--help"], None).status.code(), Some(0));
}
