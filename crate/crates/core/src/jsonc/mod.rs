//! Lossless, error-tolerant JSONC syntax trees.
//!
//! [`SyntaxTree::parse`] accepts any UTF-8 text and returns a tree whose root
//! spans the whole input. Comments are kept as nodes, trailing commas are
//! tolerated with a warning, and malformed input is recovered into `Error`
//! and `Missing` nodes. Ranges are UTF-8 byte offsets.

mod keypath;
mod lexer;
mod lines;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use keypath::{KeyPath, Step};
pub(crate) use keypath::{step_from_json, step_to_json};
pub use lines::{LineCol, LineIndex};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum JsoncError {
    #[error("input is not valid UTF-8 (valid up to byte {valid_up_to})")]
    InputEncoding { valid_up_to: usize },
    #[error("offset {offset} is outside the document (length {len})")]
    Offset { offset: usize, len: usize },
    #[error("node does not belong to this tree")]
    ForeignNode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Object,
    Array,
    Property,
    PropertyName,
    String,
    Number,
    True,
    False,
    Null,
    LineComment,
    BlockComment,
    Error,
    Missing,
}

impl NodeKind {
    pub fn is_comment(self) -> bool {
        matches!(self, NodeKind::LineComment | NodeKind::BlockComment)
    }

    pub fn is_scalar(self) -> bool {
        matches!(
            self,
            NodeKind::String | NodeKind::Number | NodeKind::True | NodeKind::False | NodeKind::Null
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Object => "Object",
            NodeKind::Array => "Array",
            NodeKind::Property => "Property",
            NodeKind::PropertyName => "PropertyName",
            NodeKind::String => "String",
            NodeKind::Number => "Number",
            NodeKind::True => "True",
            NodeKind::False => "False",
            NodeKind::Null => "Null",
            NodeKind::LineComment => "LineComment",
            NodeKind::BlockComment => "BlockComment",
            NodeKind::Error => "Error",
            NodeKind::Missing => "Missing",
        }
    }

    pub fn from_name(name: &str) -> Option<NodeKind> {
        use NodeKind::*;
        [
            Object, Array, Property, PropertyName, String, Number, True, False, Null, LineComment,
            BlockComment, Error, Missing,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Half-open byte interval `[start, end)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TextRange {
    pub start: usize,
    pub end: usize,
}

impl TextRange {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        TextRange { start, end }
    }

    pub fn empty(at: usize) -> Self {
        TextRange { start: at, end: at }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Inclusive at both ends, so carets on a boundary touch the range.
    pub fn touches(&self, offset: usize) -> bool {
        self.start <= offset && offset <= self.end
    }

    pub fn contains_range(&self, other: TextRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: TextRange) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticCode {
    TrailingComma,
    MissingComma,
    MissingValue,
    UnterminatedString,
    UnexpectedToken,
    UnbalancedBracket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub range: TextRange,
    pub code: DiagnosticCode,
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct NodeData {
    kind: NodeKind,
    range: TextRange,
    span: TextRange,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
}

/// Immutable concrete syntax tree over a JSONC document.
///
/// Nodes live in an arena in pre-order, so the root is always the first
/// node and a node's descendants follow it contiguously.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    text: String,
    nodes: Vec<NodeData>,
    diagnostics: Vec<ParseDiagnostic>,
    lines: LineIndex,
}

impl SyntaxTree {
    pub fn parse(text: &str) -> SyntaxTree {
        let (green, diagnostics) = parser::parse(text);
        let mut nodes = Vec::new();
        flatten(green, None, &mut nodes);
        SyntaxTree { text: text.to_owned(), nodes, diagnostics, lines: LineIndex::new(text) }
    }

    /// Parses raw bytes, rejecting input that is not UTF-8.
    pub fn parse_bytes(bytes: &[u8]) -> Result<SyntaxTree, JsoncError> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| JsoncError::InputEncoding { valid_up_to: e.valid_up_to() })?;
        Ok(SyntaxTree::parse(text))
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn diagnostics(&self) -> &[ParseDiagnostic] {
        &self.diagnostics
    }

    pub fn line_index(&self) -> &LineIndex {
        &self.lines
    }

    pub fn root(&self) -> Node<'_> {
        self.node(NodeId(0))
    }

    /// # Panics
    /// If `id` was not produced by this tree.
    pub fn node(&self, id: NodeId) -> Node<'_> {
        assert!(id.index() < self.nodes.len(), "node id out of range");
        Node { tree: self, id }
    }

    pub fn get(&self, id: NodeId) -> Option<Node<'_>> {
        (id.index() < self.nodes.len()).then_some(Node { tree: self, id })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All nodes in pre-order.
    pub fn nodes(&self) -> impl Iterator<Item = Node<'_>> + '_ {
        (0..self.nodes.len()).map(move |i| Node { tree: self, id: NodeId(i as u32) })
    }

    /// True when the tree holds no `Error` or `Missing` nodes.
    pub fn is_well_formed(&self) -> bool {
        self.error_count() == 0
    }

    pub fn error_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Error | NodeKind::Missing)).count()
    }

    pub fn has_error_diagnostics(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    /// Innermost node touching `offset`. On a boundary, a node starting at
    /// the offset wins over one ending there.
    pub fn node_at(&self, offset: usize) -> Result<Node<'_>, JsoncError> {
        if offset > self.text.len() {
            return Err(JsoncError::Offset { offset, len: self.text.len() });
        }
        let mut current = NodeId(0);
        loop {
            let children = &self.nodes[current.index()].children;
            let pick = |pred: &dyn Fn(&NodeData) -> bool| {
                children.iter().copied().find(|c| pred(&self.nodes[c.index()]))
            };
            let next = pick(&|n| n.range.start == offset && !n.range.is_empty())
                .or_else(|| pick(&|n| n.range.start < offset && offset < n.range.end))
                .or_else(|| pick(&|n| n.range.end == offset && !n.range.is_empty()))
                .or_else(|| pick(&|n| n.range.is_empty() && n.range.start == offset));
            match next {
                Some(c) => current = c,
                None => return Ok(self.node(current)),
            }
        }
    }

    pub fn key_path_of(&self, node: Node<'_>) -> Result<KeyPath, JsoncError> {
        if !std::ptr::eq(node.tree, self) {
            return Err(JsoncError::ForeignNode);
        }
        Ok(self.key_path_of_id(node.id))
    }

    pub(crate) fn key_path_of_id(&self, id: NodeId) -> KeyPath {
        let mut steps = Vec::new();
        let mut current = id;
        // Error children of string tokens share their token's path.
        if let Some(p) = self.nodes[id.index()].parent {
            if matches!(self.nodes[p.index()].kind, NodeKind::PropertyName | NodeKind::String) {
                current = p;
            }
        }
        // Set when the path so far addresses a property's name token.
        let mut first = true;
        loop {
            let data = &self.nodes[current.index()];
            let Some(parent) = data.parent else { break };
            let pdata = &self.nodes[parent.index()];
            match pdata.kind {
                NodeKind::Property => {
                    let prop = self.node(parent);
                    let name = prop.property_key().unwrap_or_default();
                    if data.kind == NodeKind::PropertyName && first {
                        steps.push(Step::KeyName(name));
                    } else {
                        steps.push(Step::Key(name));
                    }
                    // Skip the Property itself: its path is the same Key step.
                    current = match pdata.parent {
                        Some(p) => p,
                        None => break,
                    };
                    first = false;
                    continue;
                }
                NodeKind::Object => {
                    if data.kind == NodeKind::Property {
                        let name = self.node(current).property_key().unwrap_or_default();
                        steps.push(Step::Key(name));
                    }
                }
                NodeKind::Array
                    if !data.kind.is_comment() => {
                        let index = pdata
                            .children
                            .iter()
                            .take_while(|c| **c != current)
                            .filter(|c| !self.nodes[c.index()].kind.is_comment())
                            .count();
                        steps.push(Step::Index(index));
                    }
                _ => {}
            }
            first = false;
            current = parent;
        }
        steps.reverse();
        KeyPath::new(steps)
    }

    /// Addressed node, or `None`. Duplicate keys resolve to the first one.
    pub fn resolve(&self, path: &KeyPath) -> Option<Node<'_>> {
        let mut current = self.root();
        let steps = path.steps();
        for (i, step) in steps.iter().enumerate() {
            match step {
                Step::Key(name) => current = current.property(name)?.property_value()?,
                Step::KeyName(name) => {
                    if i + 1 != steps.len() {
                        return None;
                    }
                    current = current.property(name)?.property_name_node()?;
                }
                Step::Index(idx) => {
                    if current.kind() != NodeKind::Array {
                        return None;
                    }
                    current = current.elements().nth(*idx)?;
                }
            }
        }
        Some(current)
    }

    /// Reassembles the document from node leaves and the trivia between them.
    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity(self.text.len());
        let mut cursor = 0;
        for node in self.nodes.iter().filter(|n| n.children.is_empty()) {
            if node.range.start < cursor {
                continue;
            }
            out.push_str(&self.text[cursor..node.range.end]);
            cursor = node.range.end;
        }
        out.push_str(&self.text[cursor..]);
        out
    }

    /// Lossy conversion of the whole document to a JSON value.
    pub fn to_value(&self) -> Value {
        self.root().to_value()
    }
}

fn flatten(green: parser::Green, parent: Option<NodeId>, nodes: &mut Vec<NodeData>) -> NodeId {
    let id = NodeId(nodes.len() as u32);
    nodes.push(NodeData {
        kind: green.kind,
        range: green.range,
        span: green.span,
        parent,
        children: Vec::with_capacity(green.children.len()),
    });
    for child in green.children {
        let cid = flatten(child, Some(id), nodes);
        nodes[id.index()].children.push(cid);
    }
    id
}

/// Borrowed handle to a node of a [`SyntaxTree`].
#[derive(Clone, Copy)]
pub struct Node<'t> {
    tree: &'t SyntaxTree,
    id: NodeId,
}

impl fmt::Debug for Node<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}..{}", self.kind(), self.range().start, self.range().end)
    }
}

impl PartialEq for Node<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.tree, other.tree) && self.id == other.id
    }
}

impl Eq for Node<'_> {}

impl<'t> Node<'t> {
    fn data(&self) -> &'t NodeData {
        &self.tree.nodes[self.id.index()]
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn tree(&self) -> &'t SyntaxTree {
        self.tree
    }

    pub fn kind(&self) -> NodeKind {
        self.data().kind
    }

    pub fn range(&self) -> TextRange {
        self.data().range
    }

    /// The node's own tokens. Equal to [`Node::range`] except for the root,
    /// whose range also covers surrounding trivia.
    pub fn span(&self) -> TextRange {
        self.data().span
    }

    pub fn text(&self) -> &'t str {
        let s = self.span();
        &self.tree.text[s.start..s.end]
    }

    pub fn parent(&self) -> Option<Node<'t>> {
        self.data().parent.map(|p| self.tree.node(p))
    }

    pub fn children(&self) -> impl Iterator<Item = Node<'t>> + 't {
        let tree = self.tree;
        self.data().children.iter().map(move |&c| tree.node(c))
    }

    pub fn ancestors(&self) -> impl Iterator<Item = Node<'t>> + 't {
        std::iter::successors(self.parent(), |n| n.parent())
    }

    /// Non-comment children.
    pub fn significant_children(&self) -> impl Iterator<Item = Node<'t>> + 't {
        self.children().filter(|c| !c.kind().is_comment())
    }

    pub fn is_root(&self) -> bool {
        self.data().parent.is_none()
    }

    /// Property children of an object, in document order.
    pub fn properties(&self) -> impl Iterator<Item = Node<'t>> + 't {
        let is_object = self.kind() == NodeKind::Object;
        self.children().filter(move |c| is_object && c.kind() == NodeKind::Property)
    }

    /// Elements of an array (every non-comment child).
    pub fn elements(&self) -> impl Iterator<Item = Node<'t>> + 't {
        let is_array = self.kind() == NodeKind::Array;
        self.significant_children().filter(move |_| is_array)
    }

    /// First property with the given key.
    pub fn property(&self, name: &str) -> Option<Node<'t>> {
        self.properties().find(|p| p.property_key().as_deref() == Some(name))
    }

    pub fn property_name_node(&self) -> Option<Node<'t>> {
        if self.kind() != NodeKind::Property {
            return None;
        }
        self.children().find(|c| c.kind() == NodeKind::PropertyName)
    }

    /// Value child of a property (a `Missing` node when absent).
    pub fn property_value(&self) -> Option<Node<'t>> {
        if self.kind() != NodeKind::Property {
            return None;
        }
        self.significant_children().find(|c| c.kind() != NodeKind::PropertyName)
    }

    /// Decoded key of a property.
    pub fn property_key(&self) -> Option<String> {
        self.property_name_node().and_then(|n| n.string_value())
    }

    /// Decoded content of a `String` or `PropertyName` node.
    pub fn string_value(&self) -> Option<String> {
        if !matches!(self.kind(), NodeKind::String | NodeKind::PropertyName) {
            return None;
        }
        let raw = self.text();
        let body = raw.strip_prefix('"').unwrap_or(raw);
        let body = if self.children().any(|c| c.kind() == NodeKind::Error) && !closes(raw) {
            body
        } else {
            body.strip_suffix('"').unwrap_or(body)
        };
        Some(lexer::unescape(body))
    }

    /// True if this node is, or lies inside, an `Error` node.
    pub fn in_error(&self) -> bool {
        self.kind() == NodeKind::Error
            || self.ancestors().any(|a| a.kind() == NodeKind::Error)
            || self.children().any(|c| c.kind() == NodeKind::Error && c.range() == self.range())
    }

    /// Lossy JSON value: `Error` and `Missing` become null, duplicate keys
    /// keep their first occurrence, and comments are dropped.
    pub fn to_value(&self) -> Value {
        match self.kind() {
            NodeKind::Object => {
                let mut map = serde_json::Map::new();
                for p in self.properties() {
                    let Some(key) = p.property_key() else { continue };
                    if map.contains_key(&key) {
                        continue;
                    }
                    let v = p.property_value().map_or(Value::Null, |v| v.to_value());
                    map.insert(key, v);
                }
                Value::Object(map)
            }
            NodeKind::Array => Value::Array(self.elements().map(|e| e.to_value()).collect()),
            NodeKind::String | NodeKind::PropertyName => {
                Value::String(self.string_value().unwrap_or_default())
            }
            NodeKind::Number => serde_json::from_str(self.text()).unwrap_or(Value::Null),
            NodeKind::True => Value::Bool(true),
            NodeKind::False => Value::Bool(false),
            _ => Value::Null,
        }
    }
}

/// Whether a raw string token ends in an unescaped closing quote.
fn closes(raw: &str) -> bool {
    if raw.len() < 2 || !raw.ends_with('"') {
        return false;
    }
    let backslashes = raw[..raw.len() - 1].bytes().rev().take_while(|b| *b == b'\\').count();
    backslashes % 2 == 0
}
