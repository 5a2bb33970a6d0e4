//! Fixtures and random generators shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use std::path::PathBuf;

use projector_core::edit::{apply, EditKind, TextEdit};
use projector_core::jsonc::{KeyPath, NodeKind, Step, SyntaxTree};
use projector_core::projection::{PathPattern, Placement, Query, ViewSpec, WidgetKind};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Map, Value};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every JSONC fixture: the recovery corpus plus the sample documents.
pub fn corpus() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for dir in ["corpus", "docs"] {
        let mut entries: Vec<_> = std::fs::read_dir(fixture_dir().join(dir))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for path in entries {
            let bytes = std::fs::read(&path).unwrap();
            let text = String::from_utf8_lossy(&bytes).into_owned();
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), text));
        }
    }
    out
}

const FRAGMENTS: &[&str] = &[
    "{", "}", "[", "]", ",", ":", "\"", "\\", "/", "*", "//", "/*", "*/", "\n", " ", "\t", "\r\n", "0", "-1",
    "1e5", "true", "false", "null", "nul", "\"k\":", "é", "😀", "\u{0}", "\u{feff}", "x", ".5", "0x1F",
];

fn char_boundary(text: &str, rng: &mut impl Rng) -> usize {
    let mut at = rng.gen_range(0..=text.len());
    while !text.is_char_boundary(at) {
        at -= 1;
    }
    at
}

/// Applies one to four random character-level mutations.
pub fn mutate(rng: &mut impl Rng, text: &str) -> String {
    let mut s = text.to_owned();
    for _ in 0..rng.gen_range(1..=4) {
        let a = char_boundary(&s, rng);
        let b = char_boundary(&s, rng);
        let (lo, hi) = (a.min(b), a.max(b));
        match rng.gen_range(0..4) {
            0 => s.insert_str(a, FRAGMENTS.choose(rng).unwrap()),
            1 => {
                let mut end = hi.min(lo + 8);
                while !s.is_char_boundary(end) {
                    end -= 1;
                }
                s.replace_range(lo..end, "");
            }
            2 => {
                let slice = s[lo..hi].to_owned();
                let at = char_boundary(&s, rng);
                s.insert_str(at, &slice);
            }
            _ => s.replace_range(lo..hi, FRAGMENTS.choose(rng).unwrap()),
        }
    }
    s
}

pub fn random_key(rng: &mut impl Rng) -> String {
    const KEYS: &[&str] = &["a", "b", "name", "kind", "value", "x y", "é", "\"q\"", "", "data", "mark", "type"];
    KEYS.choose(rng).unwrap().to_string()
}

pub fn random_value(rng: &mut impl Rng, depth: usize) -> Value {
    let top = if depth == 0 { 5 } else { 7 };
    match rng.gen_range(0..top) {
        0 => Value::Null,
        1 => Value::Bool(rng.gen()),
        2 => json!(rng.gen_range(-1000..1000)),
        3 => json!(rng.gen_range(-10.0..10.0f64)),
        4 => Value::String(["", "red", "a\"b", "line\nbreak", "ünï", "#aabbcc"].choose(rng).unwrap().to_string()),
        5 => Value::Array((0..rng.gen_range(0..4)).map(|_| random_value(rng, depth - 1)).collect()),
        _ => {
            let mut m = Map::new();
            for _ in 0..rng.gen_range(0..4) {
                m.insert(random_key(rng), random_value(rng, depth - 1));
            }
            Value::Object(m)
        }
    }
}

fn gap(rng: &mut impl Rng, indent: usize, pretty: bool) -> String {
    let mut s = String::new();
    if pretty {
        s.push('\n');
        s.push_str(&"  ".repeat(indent));
    }
    match rng.gen_range(0..12) {
        0 => s.push_str("/* note */ "),
        1 if pretty => {
            s.push_str("// line\n");
            s.push_str(&"  ".repeat(indent));
        }
        _ => {}
    }
    s
}

fn write_value(rng: &mut impl Rng, v: &Value, indent: usize, pretty: bool, out: &mut String) {
    let sep = if pretty { ": " } else { ":" };
    match v {
        Value::Array(items) if !items.is_empty() => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&gap(rng, indent + 1, pretty));
                write_value(rng, item, indent + 1, pretty, out);
            }
            if pretty {
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
            }
            out.push(']');
        }
        Value::Object(m) if !m.is_empty() => {
            out.push('{');
            for (i, (k, item)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&gap(rng, indent + 1, pretty));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(sep);
                write_value(rng, item, indent + 1, pretty, out);
            }
            if pretty {
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
            }
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// A well-formed JSONC document with random layout and comments.
pub fn random_document(rng: &mut impl Rng) -> String {
    let root = if rng.gen_bool(0.7) {
        let mut m = Map::new();
        for _ in 0..rng.gen_range(1..6) {
            m.insert(random_key(rng), random_value(rng, 3));
        }
        Value::Object(m)
    } else {
        Value::Array((0..rng.gen_range(1..6)).map(|_| random_value(rng, 3)).collect())
    };
    let mut out = String::new();
    if rng.gen_bool(0.2) {
        out.push_str("// header\n");
    }
    let pretty = rng.gen();
    write_value(rng, &root, 0, pretty, &mut out);
    if rng.gen_bool(0.5) {
        out.push('\n');
    }
    out
}

/// Key paths of every value node.
pub fn value_paths(tree: &SyntaxTree) -> Vec<(KeyPath, NodeKind)> {
    tree.nodes()
        .filter(|n| {
            matches!(
                n.kind(),
                NodeKind::Object
                    | NodeKind::Array
                    | NodeKind::String
                    | NodeKind::Number
                    | NodeKind::True
                    | NodeKind::False
                    | NodeKind::Null
            ) && !n.in_error()
        })
        .filter_map(|n| Some((tree.key_path_of(n).ok()?, n.kind())))
        .filter(|(p, _)| p.steps().iter().all(|s| !matches!(s, Step::KeyName(_))))
        .collect()
}

/// A random structural edit that targets a node of `tree`.
pub fn random_edit(rng: &mut impl Rng, tree: &SyntaxTree) -> EditKind {
    let paths = value_paths(tree);
    let (path, kind) = paths.choose(rng).cloned().unwrap_or((KeyPath::root(), NodeKind::Null));
    let members = tree.resolve(&path).map_or(0, |n| n.significant_children().count());
    match (rng.gen_range(0..9), kind) {
        (0, NodeKind::Object) => EditKind::InsertProperty { path, name: random_key(rng), value: random_value(rng, 2) },
        (1, NodeKind::Array) => {
            EditKind::InsertArrayElement { path, index: rng.gen_range(0..=members), value: random_value(rng, 2) }
        }
        (2, _) if !path.is_empty() => EditKind::DeleteNode { path },
        (3, _) if !path.is_empty() => EditKind::DuplicateNode { path },
        (4, _) if !path.is_empty() => EditKind::MoveSibling { path, direction: if rng.gen() { 1 } else { -1 } },
        (5, _) if matches!(path.last(), Some(Step::Key(_))) => EditKind::RenameKey { path, new_name: random_key(rng) },
        (6, NodeKind::Object) => EditKind::SortObjectKeys { path },
        (7, _) => EditKind::FormatDocument,
        _ => EditKind::ReplaceValue { path, value: random_value(rng, 2) },
    }
}

/// Edits that undo `edits` once they have been applied.
pub fn inverse(original: &str, edits: &[TextEdit]) -> Vec<TextEdit> {
    let mut shift: isize = 0;
    let mut out = Vec::new();
    for e in edits {
        let start = (e.range.start as isize + shift) as usize;
        out.push(TextEdit::new(
            projector_core::jsonc::TextRange::new(start, start + e.new_text.len()),
            &original[e.range.start..e.range.end],
        ));
        shift += e.new_text.len() as isize - e.range.len() as isize;
    }
    out
}

pub fn round_trip(original: &str, edits: &[TextEdit]) -> bool {
    let Ok(edited) = apply(original, edits) else { return false };
    apply(&edited, &inverse(original, edits)).is_ok_and(|t| t == original)
}

/// A random view; queries draw from selectors that hit the fixtures.
pub fn random_view(rng: &mut impl Rng, id: usize, paths: &[KeyPath]) -> ViewSpec {
    let kinds = [NodeKind::Object, NodeKind::Array, NodeKind::String, NodeKind::Number, NodeKind::True, NodeKind::PropertyName];
    let query = match rng.gen_range(0..4) {
        0 => Query::syntax(&[*kinds.choose(rng).unwrap(), *kinds.choose(rng).unwrap()]),
        1 if !paths.is_empty() => Query::KeyPath(vec![PathPattern::from(paths.choose(rng).unwrap())]),
        2 => Query::regex(&[["^\"", "[0-9]", "true", "^\\{"].choose(rng).unwrap()]).unwrap(),
        _ => Query::SchemaKeyword(vec![["enum", "type", "properties"].choose(rng).unwrap().to_string()]),
    };
    let placement = [Placement::Replace, Placement::Replace, Placement::InlinePrefix, Placement::Menu]
        .choose(rng)
        .copied()
        .unwrap();
    ViewSpec::new(format!("v{id}"), placement, query, WidgetKind::Custom(format!("w{id}")))
}
