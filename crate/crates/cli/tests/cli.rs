use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

fn engine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engine")).args(args).output().expect("run engine")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_status_tracks_errors() {
    let schema = fixture("schemas/produce.schema.json");
    let ok = engine(&["check", path(&fixture("docs/produce.jsonc")), "--schema", path(&schema)]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": 3, "price": }"#).unwrap();
    let out = engine(&["check", path(&bad), "--schema", path(&schema)]);
    assert_eq!(out.status.code(), Some(1));
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.iter().any(|d| d["source"] == "parse"));
    assert!(lines.iter().all(|d| d["range"]["startPosition"]["line"].is_u64()));
}

#[test]
fn check_missing_file_fails() {
    let out = engine(&["check", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reading"));
}

#[test]
fn menu_prints_picklist() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("doc.json");
    let text = r#"{"kind": "fruit"}"#;
    std::fs::write(&doc, text).unwrap();
    let offset = text.find("fruit").unwrap().to_string();
    let out = engine(&["menu", path(&doc), "--schema", path(&fixture("schemas/produce.schema.json")), "--offset", &offset]);
    assert!(out.status.success());
    let menu: Value = serde_json::from_slice(&out.stdout).unwrap();
    let values: Vec<&str> = menu["items"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["group"] == "schemaValue")
        .map(|i| i["label"].as_str().unwrap())
        .collect();
    assert!(!values.is_empty());
    assert!(values.contains(&"fruit"));
}

#[test]
fn search_prints_json_lines() {
    let out = engine(&[
        "search",
        "--schema",
        path(&fixture("schemas/vega-lite-lite.schema.json")),
        "--query",
        "cividis",
        "--limit",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        let s: Value = serde_json::from_str(line).unwrap();
        assert_eq!(s["matchedPath"][0], "config");
    }
}

#[test]
fn tracery_expand_is_stable() {
    let grammar = fixture("docs/grammar.tracery.json");
    let a = engine(&["tracery", "expand", path(&grammar), "--seed", "7"]);
    let b = engine(&["tracery", "expand", path(&grammar), "--seed", "7"]);
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let t = engine(&["tracery", "expand", path(&grammar), "--seed", "7", "--trace"]);
    let trace: Value = serde_json::from_slice(&t.stdout).unwrap();
    assert_eq!(format!("{}\n", trace["output"].as_str().unwrap()).as_bytes(), a.stdout);
}

#[test]
fn serve_stdio_answers_each_request() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_engine"))
        .args(["serve", "--stdio"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let requests = [
        json!({"jsonrpc": "2.0", "id": 1, "method": "doc/open", "params": {"docId": "a", "text": "[1]"}}),
        json!({"jsonrpc": "2.0", "method": "doc/text", "params": {"docId": "a"}}),
        json!({"jsonrpc": "2.0", "id": 2, "method": "doc/text", "params": {"docId": "a"}}),
        json!({"jsonrpc": "2.0", "id": 3, "method": "bogus"}),
    ];
    {
        let mut stdin = child.stdin.take().unwrap();
        for r in &requests {
            writeln!(stdin, "{r}").unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    let replies: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(replies.len(), 3);
    assert_eq!(replies[0]["result"]["version"], 1);
    assert_eq!(replies[1]["result"]["text"], "[1]");
    assert_eq!(replies[2]["error"]["code"], -32601);
}

#[test]
fn serve_websocket_round_trip() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_engine"))
        .args(["serve", "--port", &port.to_string()])
        .spawn()
        .unwrap();
    let url = format!("ws://127.0.0.1:{port}");
    let deadline = Instant::now() + Duration::from_secs(10);
    let mut socket = loop {
        match tungstenite::connect(&url) {
            Ok((socket, _)) => break socket,
            Err(_) if Instant::now() < deadline => std::thread::sleep(Duration::from_millis(50)),
            Err(e) => {
                child.kill().ok();
                panic!("could not connect: {e}");
            }
        }
    };
    let request = json!({"jsonrpc": "2.0", "id": 9, "method": "doc/open", "params": {"docId": "w", "text": "{}"}});
    socket.send(tungstenite::Message::text(request.to_string())).unwrap();
    let reply = socket.read().unwrap();
    let reply: Value = serde_json::from_str(reply.to_text().unwrap()).unwrap();
    socket.close(None).ok();
    child.kill().ok();
    child.wait().ok();
    assert_eq!(reply["id"], 9);
    assert_eq!(reply["result"]["version"], 1);
}
