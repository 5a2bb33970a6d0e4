//! Byte-offset tokenizer for JSONC.
//!
//! Every byte of the input belongs to exactly one token, so the token stream
//! alone is enough to reproduce the source text.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum TokenKind {
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    String { terminated: bool, valid_escapes: bool },
    Number { valid: bool },
    True,
    False,
    Null,
    LineComment,
    BlockComment { terminated: bool },
    Whitespace,
    Junk,
}

impl TokenKind {
    pub(crate) fn is_trivia(self) -> bool {
        matches!(
            self,
            TokenKind::Whitespace | TokenKind::LineComment | TokenKind::BlockComment { .. }
        )
    }

    pub(crate) fn starts_value(self) -> bool {
        matches!(
            self,
            TokenKind::LBrace
                | TokenKind::LBracket
                | TokenKind::String { .. }
                | TokenKind::Number { .. }
                | TokenKind::True
                | TokenKind::False
                | TokenKind::Null
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

pub(crate) fn tokenize(text: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let start = pos;
        let kind = match bytes[pos] {
            b'{' => {
                pos += 1;
                TokenKind::LBrace
            }
            b'}' => {
                pos += 1;
                TokenKind::RBrace
            }
            b'[' => {
                pos += 1;
                TokenKind::LBracket
            }
            b']' => {
                pos += 1;
                TokenKind::RBracket
            }
            b':' => {
                pos += 1;
                TokenKind::Colon
            }
            b',' => {
                pos += 1;
                TokenKind::Comma
            }
            b' ' | b'\t' | b'\r' | b'\n' => {
                while pos < bytes.len() && matches!(bytes[pos], b' ' | b'\t' | b'\r' | b'\n') {
                    pos += 1;
                }
                TokenKind::Whitespace
            }
            b'"' => {
                let (end, terminated, valid_escapes) = lex_string(bytes, pos);
                pos = end;
                TokenKind::String { terminated, valid_escapes }
            }
            b'/' if bytes.get(pos + 1) == Some(&b'/') => {
                while pos < bytes.len() && bytes[pos] != b'\n' && bytes[pos] != b'\r' {
                    pos += 1;
                }
                TokenKind::LineComment
            }
            b'/' if bytes.get(pos + 1) == Some(&b'*') => {
                pos += 2;
                let mut terminated = false;
                while pos < bytes.len() {
                    if bytes[pos] == b'*' && bytes.get(pos + 1) == Some(&b'/') {
                        pos += 2;
                        terminated = true;
                        break;
                    }
                    pos += 1;
                }
                TokenKind::BlockComment { terminated }
            }
            b'-' | b'0'..=b'9' => {
                pos += 1;
                while pos < bytes.len()
                    && matches!(bytes[pos], b'0'..=b'9' | b'.' | b'e' | b'E' | b'+' | b'-')
                {
                    pos += 1;
                }
                TokenKind::Number { valid: is_json_number(&text[start..pos]) }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' | b'$' => {
                while pos < bytes.len()
                    && matches!(bytes[pos], b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_' | b'$')
                {
                    pos += 1;
                }
                match &text[start..pos] {
                    "true" => TokenKind::True,
                    "false" => TokenKind::False,
                    "null" => TokenKind::Null,
                    _ => TokenKind::Junk,
                }
            }
            _ => {
                // A BOM is whitespace; anything else is a single junk character.
                let ch = text[pos..].chars().next().expect("in bounds");
                pos += ch.len_utf8();
                if ch == '\u{FEFF}' {
                    TokenKind::Whitespace
                } else {
                    TokenKind::Junk
                }
            }
        };
        tokens.push(Token { kind, start, end: pos });
    }
    tokens
}

/// Scans a string starting at the opening quote. Strings stop at the closing
/// quote, or before a raw line break / end of input when unterminated.
fn lex_string(bytes: &[u8], start: usize) -> (usize, bool, bool) {
    let mut pos = start + 1;
    let mut valid = true;
    while pos < bytes.len() {
        match bytes[pos] {
            b'"' => return (pos + 1, true, valid),
            b'\n' | b'\r' => return (pos, false, valid),
            b'\\' => {
                match bytes.get(pos + 1) {
                    Some(b'"' | b'\\' | b'/' | b'b' | b'f' | b'n' | b'r' | b't') => pos += 2,
                    Some(b'u') => {
                        let hex = bytes.get(pos + 2..pos + 6);
                        if hex.is_some_and(|h| h.iter().all(u8::is_ascii_hexdigit)) {
                            pos += 6;
                        } else {
                            valid = false;
                            pos += 2;
                        }
                    }
                    Some(b'\n' | b'\r') | None => {
                        valid = false;
                        pos += 1;
                    }
                    Some(_) => {
                        valid = false;
                        // Skip the whole escaped character, which may be multi-byte.
                        pos += 1;
                        while pos + 1 < bytes.len() && (bytes[pos + 1] & 0xC0) == 0x80 {
                            pos += 1;
                        }
                        pos += 1;
                    }
                }
            }
            _ => pos += 1,
        }
    }
    (pos, false, valid)
}

/// Strict JSON number grammar: `-? (0 | [1-9][0-9]*) (. [0-9]+)? ([eE] [+-]? [0-9]+)?`.
pub(crate) fn is_json_number(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if b.get(i) == Some(&b'-') {
        i += 1;
    }
    match b.get(i) {
        Some(b'0') => i += 1,
        Some(b'1'..=b'9') => {
            while b.get(i).is_some_and(u8::is_ascii_digit) {
                i += 1;
            }
        }
        _ => return false,
    }
    if b.get(i) == Some(&b'.') {
        i += 1;
        let digits = i;
        while b.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        if i == digits {
            return false;
        }
    }
    if matches!(b.get(i), Some(b'e' | b'E')) {
        i += 1;
        if matches!(b.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        let digits = i;
        while b.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        if i == digits {
            return false;
        }
    }
    i == b.len()
}

/// Decodes the body of a JSON string literal, without its quotes.
/// Malformed escapes decode to U+FFFD.
pub(crate) fn unescape(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('"') => out.push('"'),
            Some('\\') => out.push('\\'),
            Some('/') => out.push('/'),
            Some('b') => out.push('\u{8}'),
            Some('f') => out.push('\u{c}'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some('u') => {
                let Some(hi) = read_hex4(&mut chars) else {
                    out.push('\u{FFFD}');
                    continue;
                };
                if (0xD800..0xDC00).contains(&hi) {
                    let mut look = chars.clone();
                    if look.next() == Some('\\') && look.next() == Some('u') {
                        if let Some(lo) = read_hex4(&mut look) {
                            if (0xDC00..0xE000).contains(&lo) {
                                chars = look;
                                let cp = 0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00);
                                out.push(char::from_u32(cp).unwrap_or('\u{FFFD}'));
                                continue;
                            }
                        }
                    }
                    out.push('\u{FFFD}');
                } else {
                    out.push(char::from_u32(hi).unwrap_or('\u{FFFD}'));
                }
            }
            _ => out.push('\u{FFFD}'),
        }
    }
    out
}

fn read_hex4(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Option<u32> {
    let mut v = 0;
    for _ in 0..4 {
        let d = chars.peek()?.to_digit(16)?;
        chars.next();
        v = v * 16 + d;
    }
    Some(v)
}
