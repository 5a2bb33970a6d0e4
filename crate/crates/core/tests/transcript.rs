//! Replays a recorded JSON-RPC session and compares every response byte for
//! byte with the frozen recording.

use projector_core::service::{serve_lines, Service};

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn replay() -> String {
    let service = Service::with_base_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"));
    let mut out = Vec::new();
    serve_lines(&service, golden("transcript.requests.jsonl").as_bytes(), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn transcript_has_fifty_requests() {
    assert_eq!(golden("transcript.requests.jsonl").lines().count(), 50);
}

#[test]
fn transcript_replays_byte_identically() {
    let expected = golden("transcript.responses.jsonl");
    let got = replay();
    for (i, (g, e)) in got.lines().zip(expected.lines()).enumerate() {
        assert_eq!(g, e, "response {}", i + 1);
    }
    assert_eq!(got, expected);
}

#[test]
fn replays_agree_across_threads() {
    let runs: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4).map(|_| s.spawn(replay)).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}
