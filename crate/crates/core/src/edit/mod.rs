//! Structural edit intents compiled to minimal, formatting-preserving text
//! edits.
//!
//! Compilation works against the concrete syntax tree so commas, comments
//! and indentation around the touched nodes survive. Inserted JSON is
//! pretty-printed to the surrounding indentation inside multi-line
//! containers and kept on one line otherwise.

mod format;
mod render;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::jsonc::{KeyPath, Node, NodeKind, Step, SyntaxTree, TextRange};

pub use format::format_tree;
pub use render::{quote, render};

/// Replace `range` of the current text with `new_text`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextEdit {
    pub range: TextRange,
    pub new_text: String,
}

impl TextEdit {
    pub fn new(range: TextRange, new_text: impl Into<String>) -> Self {
        TextEdit { range, new_text: new_text.into() }
    }

    pub fn insert(at: usize, new_text: impl Into<String>) -> Self {
        TextEdit::new(TextRange::empty(at), new_text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum EditKind {
    /// Append a property to the object at `path`.
    InsertProperty { path: KeyPath, name: String, value: Value },
    /// Insert before element `index` of the array at `path`; `index` equal
    /// to the length appends.
    InsertArrayElement { path: KeyPath, index: usize, value: Value },
    DeleteNode { path: KeyPath },
    DuplicateNode { path: KeyPath },
    /// Swap with the sibling `direction` positions away (usually ±1).
    MoveSibling { path: KeyPath, direction: i64 },
    ReplaceValue { path: KeyPath, value: Value },
    RenameKey { path: KeyPath, new_name: String },
    SortObjectKeys { path: KeyPath },
    FormatDocument,
}

/// What produced an action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ActionSource {
    ParseTree,
    Schema,
    View,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditAction {
    #[serde(flatten)]
    pub kind: EditKind,
    pub label: String,
    pub source: ActionSource,
}

impl EditAction {
    pub fn new(kind: EditKind, label: impl Into<String>, source: ActionSource) -> Self {
        EditAction { kind, label: label.into(), source }
    }

    pub fn compile(&self, tree: &SyntaxTree) -> Result<Compiled, EditError> {
        compile(tree, &self.kind)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EditError {
    #[error("path {0} does not resolve")]
    Path(KeyPath),
    #[error("expected {expected} at {path}, found {found}")]
    Kind { path: KeyPath, expected: &'static str, found: NodeKind },
    #[error("index {index} is out of range at {path}")]
    Index { path: KeyPath, index: i64 },
    #[error("edits overlap at byte {0}")]
    Conflict(usize),
    #[error("edit range {start}..{end} is invalid for text of length {len}")]
    Range { start: usize, end: usize, len: usize },
    #[error("the document has syntax errors")]
    Malformed,
}

/// Result of compiling an action: sorted, non-overlapping edits plus
/// non-fatal warnings (e.g. a duplicate key was created).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Compiled {
    pub edits: Vec<TextEdit>,
    pub warnings: Vec<String>,
}

/// Compiles `kind` against `tree` into minimal text edits.
pub fn compile(tree: &SyntaxTree, kind: &EditKind) -> Result<Compiled, EditError> {
    let mut c = Compiler { tree, text: tree.text(), out: Compiled::default() };
    match kind {
        EditKind::InsertProperty { path, name, value } => c.insert_property(path, name, value)?,
        EditKind::InsertArrayElement { path, index, value } => c.insert_element(path, *index, value)?,
        EditKind::DeleteNode { path } => c.delete(path)?,
        EditKind::DuplicateNode { path } => c.duplicate(path)?,
        EditKind::MoveSibling { path, direction } => c.move_sibling(path, *direction)?,
        EditKind::ReplaceValue { path, value } => c.replace(path, value)?,
        EditKind::RenameKey { path, new_name } => c.rename(path, new_name)?,
        EditKind::SortObjectKeys { path } => c.sort_keys(path)?,
        EditKind::FormatDocument => {
            let formatted = format_tree(tree).ok_or(EditError::Malformed)?;
            c.out.edits.push(TextEdit::new(TextRange::new(0, c.text.len()), formatted));
        }
    }
    let mut out = c.out;
    out.edits = out
        .edits
        .into_iter()
        .map(|e| minimize(tree.text(), e))
        .filter(|e| !(e.range.is_empty() && e.new_text.is_empty()))
        .collect();
    out.edits.sort_by_key(|e| (e.range.start, e.range.end));
    Ok(out)
}

/// Applies non-overlapping edits atomically (splice semantics).
pub fn apply(text: &str, edits: &[TextEdit]) -> Result<String, EditError> {
    let mut sorted: Vec<&TextEdit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.range.start, e.range.end));
    for e in &sorted {
        let TextRange { start, end } = e.range;
        if start > end || end > text.len() || !text.is_char_boundary(start) || !text.is_char_boundary(end) {
            return Err(EditError::Range { start, end, len: text.len() });
        }
    }
    for w in sorted.windows(2) {
        let (a, b) = (w[0].range, w[1].range);
        if b.start < a.end || (a == b && a.is_empty()) {
            return Err(EditError::Conflict(b.start));
        }
    }
    let mut out = text.to_owned();
    for e in sorted.iter().rev() {
        out.replace_range(e.range.start..e.range.end, &e.new_text);
    }
    Ok(out)
}

/// Shrinks an edit to the part that actually changes.
pub fn minimize(text: &str, edit: TextEdit) -> TextEdit {
    let old = &text[edit.range.start..edit.range.end];
    let new = edit.new_text.as_str();
    let prefix = common_prefix(old, new);
    let suffix = common_suffix(&old[prefix..], &new[prefix..]);
    TextEdit {
        range: TextRange::new(edit.range.start + prefix, edit.range.end - suffix),
        new_text: new[prefix..new.len() - suffix].to_owned(),
    }
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).map(|(x, _)| x.len_utf8()).sum()
}

fn common_suffix(a: &str, b: &str) -> usize {
    a.chars().rev().zip(b.chars().rev()).take_while(|(x, y)| x == y).map(|(x, _)| x.len_utf8()).sum()
}

struct Compiler<'t> {
    tree: &'t SyntaxTree,
    text: &'t str,
    out: Compiled,
}

impl<'t> Compiler<'t> {
    fn resolve(&self, path: &KeyPath) -> Result<Node<'t>, EditError> {
        self.tree.resolve(path).ok_or_else(|| EditError::Path(path.clone()))
    }

    fn expect(&self, path: &KeyPath, kind: NodeKind, expected: &'static str) -> Result<Node<'t>, EditError> {
        let node = self.resolve(path)?;
        if node.kind() != kind {
            return Err(EditError::Kind { path: path.clone(), expected, found: node.kind() });
        }
        Ok(node)
    }

    /// The object member or array element containing `path`, with its
    /// container.
    fn member(&self, path: &KeyPath) -> Result<(Node<'t>, Node<'t>), EditError> {
        let node = self.resolve(path)?;
        member_of(node).ok_or(EditError::Kind { path: path.clone(), expected: "member", found: node.kind() })
    }

    fn push(&mut self, range: TextRange, text: impl Into<String>) {
        self.out.edits.push(TextEdit::new(range, text));
    }

    /// Interior bounds of a container: just after the open bracket and at
    /// the close bracket.
    fn interior(&self, container: Node<'_>) -> Result<(usize, usize), EditError> {
        let span = container.span();
        let close = if self.text[..span.end].ends_with(['}', ']']) && span.len() >= 2 {
            span.end - 1
        } else {
            return Err(EditError::Malformed);
        };
        Ok((span.start + 1, close))
    }

    fn member_indent(&self, container: Node<'_>, members: &[Node<'_>]) -> String {
        members
            .iter()
            .rev()
            .find(|m| starts_line(self.text, m.span().start))
            .map(|m| indent_at(self.text, m.span().start).to_owned())
            .unwrap_or_else(|| format!("{}  ", indent_at(self.text, container.span().start)))
    }

    /// Appends a member after the last one, managing commas.
    fn append(&mut self, container: Node<'_>, render_member: impl Fn(&str, bool) -> String) -> Result<(), EditError> {
        let (open, close) = self.interior(container)?;
        let members: Vec<Node<'_>> = container.significant_children().collect();
        let multiline = container.text().contains('\n');
        let outer = indent_at(self.text, container.span().start).to_owned();
        let Some(last) = members.last() else {
            let interior = &self.text[open..close];
            let blank = interior.trim().is_empty();
            if multiline {
                let ind = format!("{outer}  ");
                let m = render_member(&ind, true);
                if blank {
                    self.push(TextRange::new(open, close), format!("\n{ind}{m}\n{outer}"));
                } else {
                    self.push(TextRange::empty(open), format!("\n{ind}{m}"));
                }
            } else {
                let m = render_member("", false);
                if blank {
                    self.push(TextRange::new(open, close), m);
                } else {
                    self.push(TextRange::empty(open), format!("{m} "));
                }
            }
            return Ok(());
        };
        let last_end = last.span().end;
        let comma = comma_after(self.text, last_end, close);
        if multiline {
            let ind = self.member_indent(container, &members);
            let m = render_member(&ind, true);
            match comma {
                Some(c) => {
                    let pos = same_line_comments_end(self.text, c + 1);
                    self.push(TextRange::empty(pos), format!("\n{ind}{m}"));
                }
                None => {
                    let pos = same_line_comments_end(self.text, last_end);
                    if pos == last_end {
                        self.push(TextRange::empty(pos), format!(",\n{ind}{m}"));
                    } else {
                        self.push(TextRange::empty(last_end), ",");
                        self.push(TextRange::empty(pos), format!("\n{ind}{m}"));
                    }
                }
            }
        } else {
            let m = render_member("", false);
            match comma {
                Some(c) => self.push(TextRange::empty(c + 1), format!(" {m}")),
                None => self.push(TextRange::empty(last_end), format!(", {m}")),
            }
        }
        Ok(())
    }

    fn insert_property(&mut self, path: &KeyPath, name: &str, value: &Value) -> Result<(), EditError> {
        let obj = self.expect(path, NodeKind::Object, "object")?;
        if obj.property(name).is_some() {
            self.out.warnings.push(format!("duplicate key {name:?} at {path}"));
        }
        let key = quote(name);
        self.append(obj, |ind, pretty| format!("{key}: {}", render(value, ind, pretty)))
    }

    fn insert_element(&mut self, path: &KeyPath, index: usize, value: &Value) -> Result<(), EditError> {
        let arr = self.expect(path, NodeKind::Array, "array")?;
        let elements: Vec<Node<'_>> = arr.significant_children().collect();
        if index > elements.len() {
            return Err(EditError::Index { path: path.clone(), index: index as i64 });
        }
        if index == elements.len() {
            return self.append(arr, |ind, pretty| render(value, ind, pretty));
        }
        let at = elements[index].span().start;
        if arr.text().contains('\n') && starts_line(self.text, at) {
            let ind = indent_at(self.text, at).to_owned();
            self.push(TextRange::empty(at), format!("{},\n{ind}", render(value, &ind, true)));
        } else {
            self.push(TextRange::empty(at), format!("{}, ", render(value, "", false)));
        }
        Ok(())
    }

    fn delete(&mut self, path: &KeyPath) -> Result<(), EditError> {
        let (unit, container) = self.member(path)?;
        let (open, close) = self.interior(container)?;
        let members: Vec<Node<'_>> = container.significant_children().collect();
        let i = members.iter().position(|m| *m == unit).ok_or(EditError::Malformed)?;
        let span = unit.span();
        let range = if members.len() == 1 {
            let after = comma_after(self.text, span.end, close).map_or(span.end, |c| c + 1);
            if self.text[open..span.start].trim().is_empty() && self.text[after..close].trim().is_empty() {
                TextRange::new(open, close)
            } else {
                TextRange::new(span.start, after)
            }
        } else if let Some(next) = members.get(i + 1) {
            let next_start = next.span().start;
            match comma_after(self.text, span.end, next_start) {
                Some(c) => TextRange::new(span.start, skip_whitespace(self.text, c + 1, next_start)),
                None => TextRange::new(span.start, next_start),
            }
        } else {
            let prev_end = members[i - 1].span().end;
            let end = comma_after(self.text, span.end, close).map_or(span.end, |c| c + 1);
            TextRange::new(prev_end, end)
        };
        self.push(range, "");
        Ok(())
    }

    fn duplicate(&mut self, path: &KeyPath) -> Result<(), EditError> {
        let (unit, container) = self.member(path)?;
        let (_, close) = self.interior(container)?;
        if unit.kind() == NodeKind::Property {
            self.out.warnings.push(format!("duplicate key {:?} at {path}", unit.property_key().unwrap_or_default()));
        }
        let span = unit.span();
        let copy = &self.text[span.start..span.end];
        if container.text().contains('\n') && starts_line(self.text, span.start) {
            let ind = indent_at(self.text, span.start);
            match comma_after(self.text, span.end, close) {
                Some(c) => {
                    let pos = same_line_comments_end(self.text, c + 1);
                    self.push(TextRange::empty(pos), format!("\n{ind}{copy},"));
                }
                None => self.push(TextRange::empty(span.end), format!(",\n{ind}{copy}")),
            }
        } else {
            self.push(TextRange::empty(span.end), format!(", {copy}"));
        }
        Ok(())
    }

    fn move_sibling(&mut self, path: &KeyPath, direction: i64) -> Result<(), EditError> {
        let (unit, container) = self.member(path)?;
        let members: Vec<Node<'_>> = container.significant_children().collect();
        let i = members.iter().position(|m| *m == unit).ok_or(EditError::Malformed)?;
        let j = i as i64 + direction;
        if j < 0 || j >= members.len() as i64 {
            return Err(EditError::Index { path: path.clone(), index: j });
        }
        let other = members[j as usize];
        let (a, b) = (unit.span(), other.span());
        let (a_text, b_text) = (&self.text[a.start..a.end], &self.text[b.start..b.end]);
        self.push(a, b_text);
        self.push(b, a_text);
        Ok(())
    }

    fn replace(&mut self, path: &KeyPath, value: &Value) -> Result<(), EditError> {
        if let Some(Step::KeyName(_)) = path.last() {
            let found = self.resolve(path)?.kind();
            return Err(EditError::Kind { path: path.clone(), expected: "value", found });
        }
        let node = self.resolve(path)?;
        let span = node.span();
        let container_multiline = match node.parent() {
            Some(p) if p.kind() == NodeKind::Property => p.parent().is_some_and(|c| c.text().contains('\n')),
            Some(p) => p.text().contains('\n'),
            None => self.text.contains('\n'),
        };
        let pretty = container_multiline && !matches!(value, Value::Object(m) if m.is_empty())
            && !matches!(value, Value::Array(a) if a.is_empty());
        let base = indent_at(self.text, span.start).to_owned();
        self.push(span, render(value, &base, pretty));
        Ok(())
    }

    fn rename(&mut self, path: &KeyPath, new_name: &str) -> Result<(), EditError> {
        let node = self.resolve(path)?;
        let prop = match node.kind() {
            NodeKind::PropertyName => node.parent(),
            _ => node.parent().filter(|p| p.kind() == NodeKind::Property),
        };
        let Some(name_node) = prop.and_then(|p| p.property_name_node()) else {
            return Err(EditError::Kind { path: path.clone(), expected: "property", found: node.kind() });
        };
        if name_node.string_value().as_deref() == Some(new_name) {
            return Ok(());
        }
        if let Some(obj) = prop.and_then(|p| p.parent()) {
            if obj.property(new_name).is_some() {
                self.out.warnings.push(format!("duplicate key {new_name:?} after rename at {path}"));
            }
        }
        self.push(name_node.span(), quote(new_name));
        Ok(())
    }

    fn sort_keys(&mut self, path: &KeyPath) -> Result<(), EditError> {
        let obj = self.expect(path, NodeKind::Object, "object")?;
        let props: Vec<Node<'_>> = obj.significant_children().collect();
        if props.iter().any(|p| p.kind() != NodeKind::Property) {
            return Err(EditError::Malformed);
        }
        let mut sorted = props.clone();
        sorted.sort_by_cached_key(|p| p.property_key().unwrap_or_default());
        for (slot, p) in props.iter().zip(&sorted) {
            if slot != p {
                let s = p.span();
                let replacement = self.text[s.start..s.end].to_owned();
                self.push(slot.span(), replacement);
            }
        }
        Ok(())
    }
}

/// The object member or array element that `node` belongs to, and its
/// container. Error wrappers around a member count as the member.
pub(crate) fn member_of(node: Node<'_>) -> Option<(Node<'_>, Node<'_>)> {
    let mut unit = node;
    if unit.kind() == NodeKind::PropertyName {
        unit = unit.parent()?;
    } else if let Some(p) = unit.parent().filter(|p| p.kind() == NodeKind::Property) {
        unit = p;
    }
    loop {
        let parent = unit.parent()?;
        match parent.kind() {
            NodeKind::Error => unit = parent,
            NodeKind::Object | NodeKind::Array => return Some((unit, parent)),
            _ => return None,
        }
    }
}

fn line_start(text: &str, offset: usize) -> usize {
    text[..offset].rfind('\n').map_or(0, |i| i + 1)
}

/// Leading spaces and tabs of the line containing `offset`.
fn indent_at(text: &str, offset: usize) -> &str {
    let line = &text[line_start(text, offset)..];
    &line[..line.len() - line.trim_start_matches([' ', '\t']).len()]
}

fn starts_line(text: &str, offset: usize) -> bool {
    text[line_start(text, offset)..offset].trim_matches([' ', '\t']).is_empty()
}

fn skip_whitespace(text: &str, mut at: usize, limit: usize) -> usize {
    let bytes = text.as_bytes();
    while at < limit && bytes[at].is_ascii_whitespace() {
        at += 1;
    }
    at
}

/// Position of the first byte at or after `at` that is neither whitespace
/// nor part of a comment.
fn skip_trivia(text: &str, mut at: usize, limit: usize) -> usize {
    let bytes = text.as_bytes();
    loop {
        at = skip_whitespace(text, at, limit);
        if text[at..limit].starts_with("//") {
            at = text[at..limit].find('\n').map_or(limit, |i| at + i);
        } else if text[at..limit].starts_with("/*") {
            at = text[at + 2..limit].find("*/").map_or(limit, |i| at + 2 + i + 2);
        } else {
            return at.min(limit);
        }
        if at >= limit || bytes.get(at).is_none() {
            return limit;
        }
    }
}

fn comma_after(text: &str, at: usize, limit: usize) -> Option<usize> {
    let p = skip_trivia(text, at, limit);
    (p < limit && text.as_bytes()[p] == b',').then_some(p)
}

/// End of any comments that follow `at` on the same line.
fn same_line_comments_end(text: &str, at: usize) -> usize {
    let bytes = text.as_bytes();
    let mut end = at;
    let mut p = at;
    loop {
        while p < bytes.len() && (bytes[p] == b' ' || bytes[p] == b'\t') {
            p += 1;
        }
        let rest = &text[p..];
        if rest.starts_with("//") {
            return p + rest.find('\n').unwrap_or(rest.len());
        }
        if let Some(body) = rest.strip_prefix("/*") {
            match body.find("*/") {
                Some(i) if !body[..i].contains('\n') => {
                    p += i + 4;
                    end = p;
                }
                _ => return end,
            }
        } else {
            return end;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn k(s: &str) -> Step {
        Step::key(s)
    }

    fn run(text: &str, kind: EditKind) -> String {
        let tree = SyntaxTree::parse(text);
        let compiled = compile(&tree, &kind).unwrap();
        let out = apply(text, &compiled.edits).unwrap();
        let reparsed = SyntaxTree::parse(&out);
        assert!(reparsed.is_well_formed(), "{out:?} is malformed");
        out
    }

    fn path(steps: Vec<Step>) -> KeyPath {
        KeyPath::new(steps)
    }

    #[test]
    fn insert_property_inline() {
        let kind = EditKind::InsertProperty { path: KeyPath::root(), name: "b".into(), value: json!(2) };
        let tree = SyntaxTree::parse(r#"{"a": 1}"#);
        assert_eq!(compile(&tree, &kind).unwrap().edits.len(), 1);
        assert_eq!(run(r#"{"a": 1}"#, kind.clone()), r#"{"a": 1, "b": 2}"#);
        assert_eq!(run("{}", kind.clone()), r#"{"b": 2}"#);
        assert_eq!(run(r#"{"a": 1,}"#, kind), r#"{"a": 1, "b": 2}"#);
    }

    #[test]
    fn insert_property_multiline() {
        let kind = EditKind::InsertProperty { path: KeyPath::root(), name: "b".into(), value: json!({"c": [1]}) };
        assert_eq!(
            run("{\n    \"a\": 1 // note\n}", kind.clone()),
            "{\n    \"a\": 1, // note\n    \"b\": {\n      \"c\": [\n        1\n      ]\n    }\n}"
        );
        assert_eq!(run("{\n}", kind), "{\n  \"b\": {\n    \"c\": [\n      1\n    ]\n  }\n}");
    }

    #[test]
    fn insert_into_nested_empty_multiline() {
        let kind = EditKind::InsertProperty { path: path(vec![k("o")]), name: "x".into(), value: json!(true) };
        assert_eq!(run("{\n  \"o\": {\n  }\n}", kind), "{\n  \"o\": {\n    \"x\": true\n  }\n}");
    }

    #[test]
    fn insert_elements() {
        let at = |index| EditKind::InsertArrayElement { path: KeyPath::root(), index, value: json!("x") };
        assert_eq!(run("[1, 2]", at(0)), r#"["x", 1, 2]"#);
        assert_eq!(run("[1, 2]", at(2)), r#"[1, 2, "x"]"#);
        assert_eq!(run("[\n  1\n]", at(0)), "[\n  \"x\",\n  1\n]");
        assert_eq!(run("[]", at(0)), r#"["x"]"#);
        let tree = SyntaxTree::parse("[]");
        assert!(matches!(compile(&tree, &at(3)), Err(EditError::Index { .. })));
    }

    #[test]
    fn delete_manages_commas() {
        let del = |p| EditKind::DeleteNode { path: p };
        assert_eq!(run(r#"{"a": 1}"#, del(path(vec![k("a")]))), "{}");
        assert_eq!(run(r#"{"a": 1, "b": 2}"#, del(path(vec![k("a")]))), r#"{"b": 2}"#);
        assert_eq!(run(r#"{"a": 1, "b": 2}"#, del(path(vec![k("b")]))), r#"{"a": 1}"#);
        assert_eq!(run("[1, 2, 3,]", del(path(vec![Step::Index(2)]))), "[1, 2]");
        assert_eq!(run("{\n  \"a\": 1,\n  \"b\": 2\n}", del(path(vec![k("a")]))), "{\n  \"b\": 2\n}");
        assert_eq!(run(r#"{"a": 1}"#, del(path(vec![Step::KeyName("a".into())]))), "{}");
    }

    #[test]
    fn delete_root_is_rejected() {
        let tree = SyntaxTree::parse("[]");
        assert!(matches!(
            compile(&tree, &EditKind::DeleteNode { path: KeyPath::root() }),
            Err(EditError::Kind { .. })
        ));
    }

    #[test]
    fn delete_then_reinsert_restores_bytes() {
        let text = "{\n  \"a\": [1, /* c */ 2],\n  \"b\": null\n}";
        let tree = SyntaxTree::parse(text);
        let c = compile(&tree, &EditKind::DeleteNode { path: path(vec![k("a"), Step::Index(0)]) }).unwrap();
        let e = &c.edits[0];
        let removed = &text[e.range.start..e.range.end];
        let deleted = apply(text, &c.edits).unwrap();
        let restored = apply(&deleted, &[TextEdit::insert(e.range.start, removed)]).unwrap();
        assert_eq!(restored, text);
    }

    #[test]
    fn move_keeps_spacing() {
        let mv = |d| EditKind::MoveSibling { path: path(vec![Step::Index(0)]), direction: d };
        assert_eq!(run("[1, 2]", mv(1)), "[2, 1]");
        assert_eq!(run("[1,   2]", mv(1)), "[2,   1]");
        let tree = SyntaxTree::parse("[1, 2]");
        assert!(compile(&tree, &mv(-1)).is_err());
    }

    #[test]
    fn duplicate_and_rename() {
        let dup = EditKind::DuplicateNode { path: path(vec![Step::Index(0)]) };
        assert_eq!(run("[{\"a\": 1}]", dup), "[{\"a\": 1}, {\"a\": 1}]");
        let dup = EditKind::DuplicateNode { path: path(vec![k("a")]) };
        assert_eq!(run("{\n  \"a\": 1, // c\n  \"b\": 2\n}", dup), "{\n  \"a\": 1, // c\n  \"a\": 1,\n  \"b\": 2\n}");
        let rename = EditKind::RenameKey { path: path(vec![k("a")]), new_name: "b\"".into() };
        assert_eq!(run(r#"{"a": [1,  2]}"#, rename), r#"{"b\"": [1,  2]}"#);
        let tree = SyntaxTree::parse(r#"{"a": 1, "b": 2}"#);
        let c = compile(&tree, &EditKind::RenameKey { path: path(vec![k("a")]), new_name: "b".into() }).unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn replace_values() {
        let rep = |p, v| EditKind::ReplaceValue { path: p, value: v };
        assert_eq!(run(r#"{"a": "x"}"#, rep(path(vec![k("a")]), json!("y"))), r#"{"a": "y"}"#);
        assert_eq!(run(r#"{"a": }"#.replace(' ', "").as_str(), rep(path(vec![k("a")]), json!(1))), r#"{"a":1}"#);
        assert_eq!(run("", rep(KeyPath::root(), json!({}))), "{}");
        let tree = SyntaxTree::parse(r#"{"a": true}"#);
        let c = compile(&tree, &rep(path(vec![k("a")]), json!(false))).unwrap();
        assert_eq!(c.edits, vec![TextEdit::new(TextRange::new(6, 9), "fals")]);
    }

    #[test]
    fn sort_keys_keeps_comments_in_place() {
        let sort = EditKind::SortObjectKeys { path: KeyPath::root() };
        assert_eq!(run("{\"b\": 1, /* x */ \"a\": [2]}", sort), "{\"a\": [2], /* x */ \"b\": 1}");
    }

    #[test]
    fn format_document() {
        assert_eq!(run(r#"{"a":1}"#, EditKind::FormatDocument), "{\n  \"a\": 1\n}\n");
    }

    #[test]
    fn apply_rules() {
        assert_eq!(apply("abc", &[TextEdit::new(TextRange::new(1, 2), "X")]).unwrap(), "aXc");
        assert_eq!(apply("abc", &[]).unwrap(), "abc");
        let overlapping = [TextEdit::new(TextRange::new(0, 2), "x"), TextEdit::new(TextRange::new(1, 3), "y")];
        assert_eq!(apply("abc", &overlapping), Err(EditError::Conflict(1)));
        let same_point = [TextEdit::insert(1, "x"), TextEdit::insert(1, "y")];
        assert!(apply("abc", &same_point).is_err());
        assert!(apply("é", &[TextEdit::new(TextRange::new(0, 1), "")]).is_err());
    }

    #[test]
    fn minimize_trims_on_char_boundaries() {
        let e = minimize("aéb", TextEdit::new(TextRange::new(0, 4), "aèb"));
        assert_eq!(e.range, TextRange::new(1, 3));
        assert_eq!(e.new_text, "è");
    }

    #[test]
    fn wire_format() {
        let a = EditAction::new(
            EditKind::RenameKey { path: path(vec![k("a")]), new_name: "b".into() },
            "Rename",
            ActionSource::ParseTree,
        );
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v, json!({"kind": "renameKey", "path": ["a"], "newName": "b", "label": "Rename", "source": "parseTree"}));
        assert_eq!(serde_json::from_value::<EditAction>(v).unwrap(), a);
    }
}
