use std::path::Path;
use std::process::{Command, Output};

use e2ev_format::doc::{canonical, ClaimDoc, ReceiptDoc};
use serde_json::Value;

fn e2ev(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_e2ev"))
        .args(args)
        .arg("--workspace")
        .arg(ws)
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn kinds(ws: &Path) -> Vec<String> {
    std::fs::read_to_string(ws.join("board.ndjson"))
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["kind"]
                .as_str()
                .unwrap()
                .to_owned()
        })
        .collect()
}

fn count(kinds: &[String], kind: &str) -> usize {
    kinds.iter().filter(|k| *k == kind).count()
}

#[test]
fn three_voters_challenge_tally_verify_and_dispute() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    ok(e2ev(
        ws,
        &[
            "setup",
            "--candidates",
            "A,B,C",
            "--trustees",
            "1",
            "--group",
            "toy",
            "--seed",
            "1",
        ],
    ));
    let board = std::fs::read_to_string(ws.join("board.ndjson")).unwrap();
    assert_eq!(board.lines().count(), 1);
    assert!(board.starts_with("{\"seq\":0,"));

    let receipts: Vec<String> = ["A", "A", "B"].iter().map(|v| ok(e2ev(ws, &["vote", v]))).collect();
    assert_eq!(count(&kinds(ws), "CastBallot"), 3);
    ok(e2ev(ws, &["challenge", "C"]));
    let after = kinds(ws);
    assert_eq!((count(&after, "ChallengedBallot"), count(&after, "CastBallot")), (1, 3));

    let tally: Value = serde_json::from_str(&ok(e2ev(ws, &["tally"]))).unwrap();
    assert_eq!(tally["total_cast"], 3);
    let report: Value = serde_json::from_str(&ok(e2ev(ws, &["verify"]))).unwrap();
    assert_eq!(report["verdict"], "PASS");
    assert_eq!(report["counts"], serde_json::json!([2, 1, 0]));
    assert!(ws.join("reports/verification.json").exists());

    // No secret material leaks into published files.
    let published = std::fs::read_to_string(ws.join("board.ndjson")).unwrap()
        + &std::fs::read_to_string(ws.join("manifest.json")).unwrap();
    for f in std::fs::read_dir(ws.join("secrets")).unwrap() {
        let secret: Value = serde_json::from_slice(&std::fs::read(f.unwrap().path()).unwrap()).unwrap();
        assert!(!published.contains(secret["sk"].as_str().unwrap()));
    }

    let receipt: ReceiptDoc = serde_json::from_str(&receipts[0]).unwrap();
    let path = ws.join("receipts").join(format!("{}.json", receipt.ballot_hash));
    let report: Value = serde_json::from_str(&ok(e2ev(ws, &["verify", "--receipt", path.to_str().unwrap()]))).unwrap();
    assert_eq!(report["receipt"], "Included");

    let claim = ws.join("claim.json");
    let doc = ClaimDoc {
        receipt: receipt.clone(),
        kind: "NotIncluded".into(),
        observed_issuance: false,
    };
    std::fs::write(&claim, canonical(&doc)).unwrap();
    let text = ok(e2ev(ws, &["adjudicate", "--claim", claim.to_str().unwrap()]));
    assert!(text.starts_with("outcome: Rejected\n"), "{text}");
    assert!(ws
        .join(format!("reports/adjudication-{}.txt", &receipt.ballot_hash[..16]))
        .exists());

    let out = e2ev(ws, &["vote", "A"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closed"));

    let tampered = std::fs::read_to_string(ws.join("board.ndjson"))
        .unwrap()
        .replacen("\"count\":2", "\"count\":3", 1);
    std::fs::write(ws.join("board.ndjson"), tampered).unwrap();
    assert_eq!(e2ev(ws, &["verify"]).status.code(), Some(1));
}

#[test]
fn lock_file_excludes_concurrent_writers() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    ok(e2ev(ws, &["setup", "--candidates", "X,Y", "--group", "test"]));
    std::fs::write(ws.join("board.lock"), "1\n").unwrap();
    let out = e2ev(ws, &["vote", "X"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("board.lock"));
    std::fs::remove_file(ws.join("board.lock")).unwrap();
    ok(e2ev(ws, &["vote", "X"]));
    assert!(!ws.join("board.lock").exists());

    let again = e2ev(ws, &["setup", "--candidates", "X,Y", "--group", "test"]);
    assert_eq!(again.status.code(), Some(2));
}

#[test]
fn config_file_and_dummy_audit() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    let honest = ws.join("honest.json");
    std::fs::write(
        &honest,
        r#"{"group":"toy","candidates":["A","B","C"],"trustees":2,"seed":3}"#,
    )
    .unwrap();
    ok(e2ev(ws, &["setup", "--config", honest.to_str().unwrap()]));
    assert!(ws.join("secrets/trustee-1.json").exists());
    for s in ["0", "1", "2"] {
        ok(e2ev(ws, &["dummy", s, "--config", honest.to_str().unwrap()]));
    }
    assert!(ok(e2ev(ws, &["audit"])).starts_with("dummy audit: 3 sessions, 0 inconsistencies, 0 counted"));

    let cheating = ws.join("cheat.json");
    std::fs::write(&cheating, r#"{"seed":4,"device":{"cheat_rate":1.0}}"#).unwrap();
    ok(e2ev(ws, &["dummy", "B", "--config", cheating.to_str().unwrap()]));
    let out = e2ev(ws, &["audit"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("1 inconsistencies"));

    ok(e2ev(ws, &["vote", "A", "--config", honest.to_str().unwrap()]));
    ok(e2ev(ws, &["tally"]));
    let out = e2ev(ws, &["verify"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "FAIL");
    assert_eq!(report["first_failure"]["check"], "opening");
}

const COLUMNS: &str = "N,q,rho,f,d,trials,analytic_challenge,empirical_challenge,analytic_receipt,empirical_receipt";

#[test]
fn simulator_binaries_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    std::fs::write(
        &run,
        r#"{"n_voters":10,"candidates":3,"q":1.0,"rho":1.0,"f":1.0,"d":0.0,"trials":4,"seed":1}"#,
    )
    .unwrap();
    let out = dir.path().join("run.csv");
    let res = Command::new(env!("CARGO_BIN_EXE_e2ev-sim"))
        .args(["run", "--config", run.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(res.status.success());
    let estimate: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(estimate["challenge"]["empirical"], 1.0);
    let mut csv = csv::Reader::from_path(&out).unwrap();
    assert_eq!(csv.headers().unwrap().iter().collect::<Vec<_>>().join(","), COLUMNS);
    let rows: Vec<_> = csv.records().map(Result::unwrap).collect();
    assert_eq!((rows.len(), &rows[0][7]), (1, "1.0"));

    let grid = dir.path().join("grid.json");
    std::fs::write(
        &grid,
        r#"{"n_voters":[5,10],"q":[0.0,0.5],"rho":[0.0],"f":[0.5],"d":[0.0],"candidates":2,"trials":100,"seed":2}"#,
    )
    .unwrap();
    ok(e2ev(
        dir.path(),
        &["simulate", "sweep", "--sim", grid.to_str().unwrap()],
    ));
    let swept = std::fs::read_to_string(dir.path().join("reports/results.csv")).unwrap();
    let lines: Vec<&str> = swept.lines().collect();
    assert_eq!((lines[0], lines.len()), (COLUMNS, 5));
    assert!(lines[1].starts_with("5,0.0,0.0,0.5,0.0,100,0.0,0.0,"), "{}", lines[1]);

    std::fs::write(
        &grid,
        r#"{"n_voters":[],"q":[0.1],"rho":[0.0],"f":[0.5],"d":[0.0],"candidates":2,"trials":100,"seed":2}"#,
    )
    .unwrap();
    let res = e2ev(dir.path(), &["simulate", "sweep", "--sim", grid.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}
