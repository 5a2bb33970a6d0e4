//! Recursive-descent JSONC parser with panic-mode recovery.
//!
//! The parser never fails. Unexpected input is wrapped in `Error` nodes and
//! absent values become zero-width `Missing` nodes; each of those carries at
//! least one diagnostic whose range lies inside the node.

use super::lexer::{tokenize, Token, TokenKind};
use super::{DiagnosticCode, NodeKind, ParseDiagnostic, Severity, TextRange};

#[derive(Debug)]
pub(crate) struct Green {
    pub kind: NodeKind,
    pub range: TextRange,
    /// Range of the value tokens themselves. Differs from `range` only for the
    /// document root, whose range is stretched over leading and trailing trivia.
    pub span: TextRange,
    pub children: Vec<Green>,
}

impl Green {
    fn new(kind: NodeKind, range: TextRange, children: Vec<Green>) -> Self {
        Green { kind, range, span: range, children }
    }

    fn leaf(kind: NodeKind, start: usize, end: usize) -> Self {
        Green::new(kind, TextRange::new(start, end), Vec::new())
    }
}

pub(crate) fn parse(text: &str) -> (Green, Vec<ParseDiagnostic>) {
    let mut p = Parser { text, tokens: tokenize(text), pos: 0, depth: 0, diagnostics: Vec::new() };
    let root = p.document();
    (root, p.diagnostics)
}

/// Containers nested deeper than this are skipped as a single error node.
pub(crate) const MAX_DEPTH: usize = 256;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    /// Waiting for a member or element.
    Expect,
    /// A member was just parsed; a comma or closing bracket should follow.
    After,
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    diagnostics: Vec<ParseDiagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos];
        self.pos += 1;
        t
    }

    /// Offset of the next token, or end of input.
    fn here(&self) -> usize {
        self.peek().map_or(self.text.len(), |t| t.start)
    }

    fn diag(&mut self, code: DiagnosticCode, range: TextRange, message: impl Into<String>) {
        let severity = match code {
            DiagnosticCode::TrailingComma => Severity::Warning,
            _ => Severity::Error,
        };
        self.diagnostics.push(ParseDiagnostic { range, code, severity, message: message.into() });
    }

    /// Consumes whitespace and comments, pushing comment nodes into `out`.
    fn trivia(&mut self, out: &mut Vec<Green>) {
        while let Some(t) = self.peek() {
            match t.kind {
                TokenKind::Whitespace => {
                    self.bump();
                }
                TokenKind::LineComment => {
                    self.bump();
                    out.push(Green::leaf(NodeKind::LineComment, t.start, t.end));
                }
                TokenKind::BlockComment { terminated } => {
                    self.bump();
                    let mut node = Green::leaf(NodeKind::BlockComment, t.start, t.end);
                    if !terminated {
                        let range = TextRange::new(t.start, t.end);
                        self.diag(DiagnosticCode::UnexpectedToken, range, "unterminated block comment");
                        node.children.push(Green::new(NodeKind::Error, range, Vec::new()));
                    }
                    out.push(node);
                }
                _ => break,
            }
        }
    }

    /// Index of the next non-trivia token, without consuming anything.
    fn next_significant(&self) -> Option<Token> {
        self.tokens[self.pos..].iter().find(|t| !t.kind.is_trivia()).copied()
    }

    fn document(&mut self) -> Green {
        let len = self.text.len();
        let mut children = Vec::new();
        let mut items = Vec::new();
        loop {
            self.trivia(&mut children);
            if self.peek().is_none() {
                break;
            }
            items.push(children.len());
            let item = self.value_or_junk();
            children.push(item);
        }

        let full = TextRange::new(0, len);
        match items.len() {
            0 => {
                let mut root = Green::new(NodeKind::Missing, full, children);
                root.span = TextRange::new(len, len);
                self.diag(DiagnosticCode::MissingValue, full, "empty document");
                self.diagnostics.last_mut().expect("just pushed").severity = Severity::Warning;
                root
            }
            1 => {
                let idx = items[0];
                let value = children.remove(idx);
                let span = value.range;
                let mut merged = children;
                // Comments before the value stay in front of its own children.
                let tail = merged.split_off(idx);
                merged.extend(value.children);
                merged.extend(tail);
                Green { kind: value.kind, range: full, span, children: merged }
            }
            _ => {
                for &i in &items[1..] {
                    if children[i].kind != NodeKind::Error {
                        let range = children[i].range;
                        self.diag(
                            DiagnosticCode::UnexpectedToken,
                            range,
                            "unexpected content after the document value",
                        );
                    }
                }
                let span = TextRange::new(
                    children[items[0]].range.start,
                    children[*items.last().unwrap()].range.end,
                );
                Green { kind: NodeKind::Error, range: full, span, children }
            }
        }
    }

    /// Parses a value at the current token; anything that cannot start a value
    /// is swallowed into an `Error` node. Always consumes at least one token.
    fn value_or_junk(&mut self) -> Green {
        let t = self.peek().expect("caller checked for a token");
        match t.kind {
            TokenKind::LBrace | TokenKind::LBracket if self.depth >= MAX_DEPTH => self.too_deep(),
            TokenKind::LBrace => {
                self.depth += 1;
                let g = self.object();
                self.depth -= 1;
                g
            }
            TokenKind::LBracket => {
                self.depth += 1;
                let g = self.array();
                self.depth -= 1;
                g
            }
            TokenKind::String { terminated, valid_escapes } => {
                self.bump();
                self.string_node(NodeKind::String, t, terminated, valid_escapes)
            }
            TokenKind::Number { valid } => {
                self.bump();
                let range = TextRange::new(t.start, t.end);
                if valid {
                    Green::new(NodeKind::Number, range, Vec::new())
                } else {
                    self.diag(DiagnosticCode::UnexpectedToken, range, "malformed number");
                    Green::new(NodeKind::Error, range, Vec::new())
                }
            }
            TokenKind::True => {
                self.bump();
                Green::leaf(NodeKind::True, t.start, t.end)
            }
            TokenKind::False => {
                self.bump();
                Green::leaf(NodeKind::False, t.start, t.end)
            }
            TokenKind::Null => {
                self.bump();
                Green::leaf(NodeKind::Null, t.start, t.end)
            }
            _ => self.junk(is_value_sync, false),
        }
    }

    /// Skips a bracketed region without recursing, for nesting beyond `MAX_DEPTH`.
    fn too_deep(&mut self) -> Green {
        let start = self.here();
        let mut balance = 0usize;
        let mut end = start;
        while let Some(t) = self.peek() {
            match t.kind {
                TokenKind::LBrace | TokenKind::LBracket => balance += 1,
                TokenKind::RBrace | TokenKind::RBracket => balance = balance.saturating_sub(1),
                _ => {}
            }
            self.bump();
            end = t.end;
            if balance == 0 {
                break;
            }
        }
        let range = TextRange::new(start, end);
        self.diag(DiagnosticCode::UnexpectedToken, range, "nesting too deep");
        Green::new(NodeKind::Error, range, Vec::new())
    }

    fn string_node(&mut self, kind: NodeKind, t: Token, terminated: bool, valid: bool) -> Green {
        let range = TextRange::new(t.start, t.end);
        let mut node = Green::new(kind, range, Vec::new());
        if !terminated {
            self.diag(DiagnosticCode::UnterminatedString, range, "unterminated string");
            node.children.push(Green::new(NodeKind::Error, range, Vec::new()));
        } else if !valid {
            self.diag(DiagnosticCode::UnexpectedToken, range, "invalid escape sequence");
            node.children.push(Green::new(NodeKind::Error, range, Vec::new()));
        }
        node
    }

    /// Panic mode: skip tokens until `sync` accepts the next significant one.
    /// Consumes at least one token. With `nest`, brackets met on the way are
    /// parsed as nested values so that the skip stays bracket-balanced.
    fn junk(&mut self, sync: fn(TokenKind) -> bool, nest: bool) -> Green {
        let first = self.peek().expect("caller checked for a token");
        let code = match first.kind {
            TokenKind::RBrace | TokenKind::RBracket => DiagnosticCode::UnbalancedBracket,
            _ => DiagnosticCode::UnexpectedToken,
        };
        let mut children = Vec::new();
        let start = first.start;
        let mut end;
        loop {
            let t = self.peek().expect("loop keeps a token in view");
            if nest && matches!(t.kind, TokenKind::LBrace | TokenKind::LBracket) {
                let v = self.value_or_junk();
                end = v.range.end;
                children.push(v);
            } else if nest && t.kind == TokenKind::Colon {
                // `key: value` with an unquoted key: the value belongs to the junk.
                self.bump();
                end = t.end;
                if self.next_significant().is_some_and(|n| n.kind.starts_value()) {
                    self.trivia(&mut children);
                    let v = self.value_or_junk();
                    end = v.range.end;
                    children.push(v);
                }
            } else {
                self.bump();
                end = t.end;
            }
            match self.next_significant() {
                Some(n) if !sync(n.kind) => self.trivia(&mut children),
                _ => break,
            }
        }
        let range = TextRange::new(start, end);
        let message = match code {
            DiagnosticCode::UnbalancedBracket => "unbalanced bracket",
            _ => "unexpected token",
        };
        self.diag(code, range, message);
        Green::new(NodeKind::Error, range, children)
    }

    fn missing(&mut self, at: usize, code: DiagnosticCode, message: &str) -> Green {
        let range = TextRange::new(at, at);
        self.diag(code, range, message);
        Green::new(NodeKind::Missing, range, Vec::new())
    }

    fn wrap_error(&mut self, inner: Green, code: DiagnosticCode, message: &str) -> Green {
        let range = inner.range;
        self.diag(code, range, message);
        Green::new(NodeKind::Error, range, vec![inner])
    }

    fn object(&mut self) -> Green {
        let open = self.bump();
        let mut children = Vec::new();
        let mut slot = Slot::Expect;
        let mut last_comma: Option<TextRange> = None;
        let mut has_member = false;
        let end;
        loop {
            self.trivia(&mut children);
            let Some(t) = self.peek() else {
                let at = self.text.len();
                children.push(self.missing(at, DiagnosticCode::UnbalancedBracket, "unclosed object"));
                end = at;
                break;
            };
            match t.kind {
                TokenKind::RBrace => {
                    if let (Slot::Expect, Some(c), true) = (slot, last_comma, has_member) {
                        self.diag(DiagnosticCode::TrailingComma, c, "trailing comma");
                    }
                    self.bump();
                    end = t.end;
                    break;
                }
                TokenKind::Comma if slot == Slot::After => {
                    self.bump();
                    last_comma = Some(TextRange::new(t.start, t.end));
                    slot = Slot::Expect;
                }
                TokenKind::String { .. } => {
                    let prop = self.property();
                    let prop = if slot == Slot::After {
                        self.wrap_error(prop, DiagnosticCode::MissingComma, "missing comma")
                    } else {
                        prop
                    };
                    children.push(prop);
                    slot = Slot::After;
                    has_member = true;
                    last_comma = None;
                }
                TokenKind::RBracket | TokenKind::Comma => {
                    children.push(self.junk(|_| true, false));
                }
                _ => {
                    // Unquoted keys and other stray content in member position.
                    children.push(self.junk(is_member_sync, true));
                    slot = Slot::After;
                    last_comma = None;
                }
            }
        }
        Green::new(NodeKind::Object, TextRange::new(open.start, end), children)
    }

    fn property(&mut self) -> Green {
        let t = self.bump();
        let TokenKind::String { terminated, valid_escapes } = t.kind else {
            unreachable!("property starts at a string token")
        };
        let name = self.string_node(NodeKind::PropertyName, t, terminated, valid_escapes);
        let start = name.range.start;
        let mut children = vec![name];
        self.trivia(&mut children);
        let value = match self.peek_kind() {
            Some(TokenKind::Colon) => {
                self.bump();
                self.trivia(&mut children);
                match self.peek_kind() {
                    None
                    | Some(TokenKind::Comma | TokenKind::RBrace | TokenKind::RBracket) => {
                        let at = self.here();
                        self.missing(at, DiagnosticCode::MissingValue, "missing value")
                    }
                    Some(_) => self.value_or_junk(),
                }
            }
            Some(k) if k.starts_value() => {
                let v = self.value_or_junk();
                self.wrap_error(v, DiagnosticCode::UnexpectedToken, "expected ':'")
            }
            _ => {
                let at = self.here();
                self.missing(at, DiagnosticCode::MissingValue, "missing ':' and value")
            }
        };
        let end = value.range.end;
        children.push(value);
        Green::new(NodeKind::Property, TextRange::new(start, end), children)
    }

    fn array(&mut self) -> Green {
        let open = self.bump();
        let mut children = Vec::new();
        let mut slot = Slot::Expect;
        let mut last_comma: Option<TextRange> = None;
        let mut has_element = false;
        let end;
        loop {
            self.trivia(&mut children);
            let Some(t) = self.peek() else {
                let at = self.text.len();
                children.push(self.missing(at, DiagnosticCode::UnbalancedBracket, "unclosed array"));
                end = at;
                break;
            };
            match t.kind {
                TokenKind::RBracket => {
                    if let (Slot::Expect, Some(c), true) = (slot, last_comma, has_element) {
                        self.diag(DiagnosticCode::TrailingComma, c, "trailing comma");
                    }
                    self.bump();
                    end = t.end;
                    break;
                }
                TokenKind::Comma => {
                    if slot == Slot::Expect {
                        children.push(self.missing(t.start, DiagnosticCode::MissingValue, "missing element"));
                    }
                    self.bump();
                    last_comma = Some(TextRange::new(t.start, t.end));
                    slot = Slot::Expect;
                    has_element = true;
                }
                TokenKind::RBrace | TokenKind::Colon => {
                    children.push(self.junk(|_| true, false));
                }
                _ => {
                    let v = self.value_or_junk();
                    let v = if slot == Slot::After {
                        self.wrap_error(v, DiagnosticCode::MissingComma, "missing comma")
                    } else {
                        v
                    };
                    children.push(v);
                    slot = Slot::After;
                    has_element = true;
                    last_comma = None;
                }
            }
        }
        Green::new(NodeKind::Array, TextRange::new(open.start, end), children)
    }
}

/// Recovery points in value position.
fn is_value_sync(k: TokenKind) -> bool {
    matches!(
        k,
        TokenKind::LBrace
            | TokenKind::RBrace
            | TokenKind::LBracket
            | TokenKind::RBracket
            | TokenKind::Colon
            | TokenKind::Comma
            | TokenKind::String { .. }
            | TokenKind::Number { .. }
    )
}

/// Recovery points in object-member position: the next key, a separator, or
/// a closing bracket. Values after an unquoted key are swallowed.
fn is_member_sync(k: TokenKind) -> bool {
    matches!(
        k,
        TokenKind::String { .. } | TokenKind::Comma | TokenKind::RBrace | TokenKind::RBracket
    )
}
