//! Tracery grammars: seeded expansion with a provenance trace, and
//! propagation of edits made to the generated text back into the grammar.
//!
//! A grammar maps symbols to rule lists. Rules are literal text with
//! `#symbol#` references. Expansion starts at the start symbol and draws one
//! [`SplitMix64`] value per expanded symbol, in pre-order.

mod rng;

use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::jsonc::{SyntaxTree, TextRange};

pub use rng::SplitMix64;

pub const DEFAULT_START: &str = "origin";
pub const DEFAULT_DEPTH_LIMIT: usize = 32;
/// Upper bound on expanded symbols per run.
pub const MAX_EXPANSIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceryError {
    #[error("grammar is not an object of string arrays: {0}")]
    Grammar(String),
    #[error("unknown symbol {symbol:?}")]
    Symbol { symbol: String },
    #[error("symbol {0:?} has no rules")]
    EmptyRules(String),
    #[error("expansion of {symbol:?} exceeds depth {limit}")]
    Recursion { symbol: String, limit: usize },
    #[error("expansion exceeds {MAX_EXPANSIONS} symbols")]
    TooLarge,
    #[error("edited text equals the original")]
    NoEdit,
    #[error("trace was produced from a different grammar")]
    TraceStale,
}

/// Piece of a rule: literal text or a `#symbol#` reference, with its byte
/// range in the rule string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Part {
    Literal(TextRange),
    Symbol(String, TextRange),
}

/// Splits a rule into literal and reference parts. An unmatched `#` is
/// literal text.
pub fn parse_rule(rule: &str) -> Vec<Part> {
    let mut parts = Vec::new();
    let mut lit_start = 0;
    let mut i = 0;
    while let Some(open) = rule[i..].find('#').map(|p| p + i) {
        let Some(close) = rule[open + 1..].find('#').map(|p| p + open + 1) else { break };
        if open > lit_start {
            parts.push(Part::Literal(TextRange::new(lit_start, open)));
        }
        parts.push(Part::Symbol(rule[open + 1..close].to_owned(), TextRange::new(open, close + 1)));
        lit_start = close + 1;
        i = close + 1;
    }
    if lit_start < rule.len() {
        parts.push(Part::Literal(TextRange::new(lit_start, rule.len())));
    }
    parts
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrammarDiagnostic {
    pub symbol: String,
    pub rule_index: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Grammar {
    pub rules: IndexMap<String, Vec<String>>,
    pub start_symbol: String,
}

impl Grammar {
    pub fn new(rules: IndexMap<String, Vec<String>>) -> Self {
        Grammar { rules, start_symbol: DEFAULT_START.to_owned() }
    }

    pub fn from_value(value: &Value) -> Result<Grammar, TraceryError> {
        let Value::Object(map) = value else {
            return Err(TraceryError::Grammar("expected an object".into()));
        };
        let mut rules = IndexMap::new();
        for (symbol, list) in map {
            let Value::Array(items) = list else {
                return Err(TraceryError::Grammar(format!("{symbol:?} is not an array")));
            };
            let strings = items
                .iter()
                .map(|v| v.as_str().map(str::to_owned))
                .collect::<Option<Vec<String>>>()
                .ok_or_else(|| TraceryError::Grammar(format!("{symbol:?} has a non-string rule")))?;
            rules.insert(symbol.clone(), strings);
        }
        Ok(Grammar::new(rules))
    }

    pub fn from_json(text: &str) -> Result<Grammar, TraceryError> {
        let tree = SyntaxTree::parse(text);
        if tree.has_error_diagnostics() {
            return Err(TraceryError::Grammar("document has syntax errors".into()));
        }
        Grammar::from_value(&tree.to_value())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(&self.rules).unwrap_or(Value::Null)
    }

    pub fn rule(&self, symbol: &str, index: usize) -> Option<&str> {
        self.rules.get(symbol)?.get(index).map(String::as_str)
    }

    /// Missing start symbol, dangling references and empty rule lists.
    pub fn diagnostics(&self) -> Vec<GrammarDiagnostic> {
        let mut out = Vec::new();
        if !self.rules.contains_key(&self.start_symbol) {
            out.push(GrammarDiagnostic {
                symbol: self.start_symbol.clone(),
                rule_index: 0,
                message: format!("start symbol {:?} is not defined", self.start_symbol),
            });
        }
        for (symbol, rules) in &self.rules {
            if rules.is_empty() {
                out.push(GrammarDiagnostic { symbol: symbol.clone(), rule_index: 0, message: "no rules".into() });
            }
            for (i, rule) in rules.iter().enumerate() {
                for part in parse_rule(rule) {
                    if let Part::Symbol(name, _) = part {
                        if !self.rules.contains_key(&name) {
                            out.push(GrammarDiagnostic {
                                symbol: symbol.clone(),
                                rule_index: i,
                                message: format!("reference to undefined symbol {name:?}"),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// A copy with one rule replaced.
    pub fn with_edit(&self, edit: &GrammarEdit) -> Grammar {
        let mut g = self.clone();
        if let Some(slot) = g.rules.get_mut(&edit.symbol).and_then(|r| r.get_mut(edit.rule_index)) {
            slot.clone_from(&edit.new_rule);
        }
        g
    }

    /// FNV-1a over the canonical JSON form; identifies the grammar a trace
    /// came from.
    pub fn fingerprint(&self) -> u64 {
        let text = serde_json::to_string(self).unwrap_or_default();
        text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3))
    }
}

/// Literal text copied from a rule into the output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LiteralSpan {
    pub rule_range: TextRange,
    pub output: TextRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum TracePiece {
    Literal(LiteralSpan),
    Child { index: usize },
}

/// One symbol expansion: the chosen rule and where its text landed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceNode {
    pub symbol: String,
    pub chosen_rule_index: usize,
    pub output_span: TextRange,
    pub pieces: Vec<TracePiece>,
    pub children: Vec<TraceNode>,
}

impl TraceNode {
    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TraceNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    /// Literal spans in output order.
    pub fn leaves(&self) -> Vec<&LiteralSpan> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a LiteralSpan>) {
        for p in &self.pieces {
            match p {
                TracePiece::Literal(l) => out.push(l),
                TracePiece::Child { index } => self.children[*index].collect_leaves(out),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionTrace {
    pub root: TraceNode,
    pub seed: u64,
    pub output: String,
    pub depth_limit: usize,
    pub grammar_fingerprint: u64,
}

impl ExpansionTrace {
    /// Whether the literal leaves tile the output exactly.
    pub fn is_faithful(&self, grammar: &Grammar) -> bool {
        let mut pos = 0;
        let mut ok = true;
        self.root.walk(&mut |node| {
            let Some(rule) = grammar.rule(&node.symbol, node.chosen_rule_index) else {
                ok = false;
                return;
            };
            for p in &node.pieces {
                if let TracePiece::Literal(l) = p {
                    ok &= rule.get(l.rule_range.start..l.rule_range.end)
                        == self.output.get(l.output.start..l.output.end);
                }
            }
        });
        for leaf in self.root.leaves() {
            ok &= leaf.output.start == pos;
            pos = leaf.output.end;
        }
        ok && pos == self.output.len()
    }

    /// How many trace nodes chose `(symbol, rule_index)`.
    pub fn uses(&self, symbol: &str, rule_index: usize) -> usize {
        let mut n = 0;
        self.root.walk(&mut |t| n += usize::from(t.symbol == symbol && t.chosen_rule_index == rule_index));
        n
    }

    fn used_rules(&self) -> Vec<(String, usize)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.root.walk(&mut |t| {
            if seen.insert((t.symbol.clone(), t.chosen_rule_index)) {
                out.push((t.symbol.clone(), t.chosen_rule_index));
            }
        });
        out
    }
}

struct Expander<'g> {
    grammar: &'g Grammar,
    rng: SplitMix64,
    limit: usize,
    out: String,
    expansions: usize,
}

impl Expander<'_> {
    fn symbol(&mut self, symbol: &str, depth: usize) -> Result<TraceNode, TraceryError> {
        if depth > self.limit {
            return Err(TraceryError::Recursion { symbol: symbol.to_owned(), limit: self.limit });
        }
        self.expansions += 1;
        if self.expansions > MAX_EXPANSIONS {
            return Err(TraceryError::TooLarge);
        }
        let rules = self
            .grammar
            .rules
            .get(symbol)
            .ok_or_else(|| TraceryError::Symbol { symbol: symbol.to_owned() })?;
        if rules.is_empty() {
            return Err(TraceryError::EmptyRules(symbol.to_owned()));
        }
        let index = self.rng.choose(rules.len());
        let rule = &rules[index];
        let start = self.out.len();
        let mut node = TraceNode {
            symbol: symbol.to_owned(),
            chosen_rule_index: index,
            output_span: TextRange::empty(start),
            pieces: Vec::new(),
            children: Vec::new(),
        };
        for part in parse_rule(rule) {
            match part {
                Part::Literal(r) => {
                    let at = self.out.len();
                    self.out.push_str(&rule[r.start..r.end]);
                    node.pieces.push(TracePiece::Literal(LiteralSpan {
                        rule_range: r,
                        output: TextRange::new(at, self.out.len()),
                    }));
                }
                Part::Symbol(name, _) => {
                    let child = self.symbol(&name, depth + 1)?;
                    node.pieces.push(TracePiece::Child { index: node.children.len() });
                    node.children.push(child);
                }
            }
        }
        node.output_span = TextRange::new(start, self.out.len());
        Ok(node)
    }
}

/// Expands the start symbol. The start symbol sits at depth 1; expanding
/// deeper than `depth_limit` fails.
pub fn expand(grammar: &Grammar, seed: u64, depth_limit: usize) -> Result<ExpansionTrace, TraceryError> {
    let mut ex = Expander { grammar, rng: SplitMix64::new(seed), limit: depth_limit, out: String::new(), expansions: 0 };
    let root = ex.symbol(&grammar.start_symbol, 1)?;
    let trace = ExpansionTrace {
        root,
        seed,
        output: ex.out,
        depth_limit,
        grammar_fingerprint: grammar.fingerprint(),
    };
    debug_assert!(trace.is_faithful(grammar));
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EditClass {
    Delete,
    Insert,
    Swap,
}

/// The single contiguous difference between two texts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutputEdit {
    pub classification: EditClass,
    /// Replaced bytes of the original.
    pub region: TextRange,
    pub replacement: String,
}

/// Isolates the differing region by longest common prefix and suffix.
pub fn classify_edit(original: &str, edited: &str) -> Result<OutputEdit, TraceryError> {
    if original == edited {
        return Err(TraceryError::NoEdit);
    }
    let prefix: usize = original
        .chars()
        .zip(edited.chars())
        .take_while(|(a, b)| a == b)
        .map(|(a, _)| a.len_utf8())
        .sum();
    let max_suffix = original.len().min(edited.len()) - prefix;
    let mut suffix = 0;
    for (a, b) in original[prefix..].chars().rev().zip(edited[prefix..].chars().rev()) {
        if a != b || suffix + a.len_utf8() > max_suffix {
            break;
        }
        suffix += a.len_utf8();
    }
    let region = TextRange::new(prefix, original.len() - suffix);
    let replacement = edited[prefix..edited.len() - suffix].to_owned();
    let classification = if replacement.is_empty() {
        EditClass::Delete
    } else if region.is_empty() {
        EditClass::Insert
    } else {
        EditClass::Swap
    };
    Ok(OutputEdit { classification, region, replacement })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrammarEdit {
    pub symbol: String,
    pub rule_index: usize,
    pub new_rule: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SyncStatus {
    Applied,
    OutOfSync,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OutOfSyncReason {
    CrossesProvenanceBoundary,
    AmbiguousRuleUse,
    NoCandidate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SyncPhase {
    Enumerative,
    Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SyncResult {
    pub status: SyncStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grammar_edit: Option<GrammarEdit>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<OutOfSyncReason>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phase: Option<SyncPhase>,
    pub edit: OutputEdit,
    /// Number of distinct grammar edits the enumerative phase found.
    pub candidates: usize,
}

fn char_boundaries_outside_refs(rule: &str) -> Vec<usize> {
    let mut out = Vec::new();
    for part in parse_rule(rule) {
        if let Part::Literal(r) = part {
            out.extend(rule[r.start..r.end].char_indices().map(|(i, _)| r.start + i));
            out.push(r.end);
        }
    }
    if out.is_empty() {
        out.push(0);
        out.push(rule.len());
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Every rule text obtained by applying `edit` at one place in `rule`.
fn variants(rule: &str, removed: &str, edit: &OutputEdit) -> Vec<String> {
    let mut out = Vec::new();
    if removed.is_empty() {
        for p in char_boundaries_outside_refs(rule) {
            out.push(format!("{}{}{}", &rule[..p], edit.replacement, &rule[p..]));
        }
    } else {
        for (p, _) in rule.match_indices(removed) {
            out.push(format!("{}{}{}", &rule[..p], edit.replacement, &rule[p + removed.len()..]));
        }
    }
    out.sort();
    out.dedup();
    out.retain(|v| v != rule);
    out
}

fn reproduces(grammar: &Grammar, edit: &GrammarEdit, trace: &ExpansionTrace, edited: &str) -> bool {
    expand(&grammar.with_edit(edit), trace.seed, trace.depth_limit).is_ok_and(|t| t.output == edited)
}

/// Propagates `edited` (an edit of `trace.output`) back into a single rule.
///
/// The enumerative phase tries the edit at every place in every rule used
/// by the trace and keeps the distinct grammar edits that reproduce
/// `edited`. If there is not exactly one, the provenance phase looks for the
/// deepest rule instance whose literal text contains the whole edit. An
/// applied result always re-expands to `edited`; otherwise the grammar is
/// left alone and a reason is reported.
pub fn synthesize(grammar: &Grammar, trace: &ExpansionTrace, edited: &str) -> Result<SyncResult, TraceryError> {
    if grammar.fingerprint() != trace.grammar_fingerprint {
        return Err(TraceryError::TraceStale);
    }
    let edit = classify_edit(&trace.output, edited)?;
    let removed = &trace.output[edit.region.start..edit.region.end];

    let mut candidates: Vec<GrammarEdit> = Vec::new();
    for (symbol, index) in trace.used_rules() {
        let Some(rule) = grammar.rule(&symbol, index) else { continue };
        for new_rule in variants(rule, removed, &edit) {
            let ge = GrammarEdit { symbol: symbol.clone(), rule_index: index, new_rule };
            if !candidates.contains(&ge) && reproduces(grammar, &ge, trace, edited) {
                candidates.push(ge);
            }
        }
    }
    let count = candidates.len();
    let result = |status, grammar_edit, reason, phase| SyncResult {
        status,
        grammar_edit,
        reason,
        phase,
        edit: edit.clone(),
        candidates: count,
    };
    if count == 1 {
        return Ok(result(SyncStatus::Applied, candidates.pop(), None, Some(SyncPhase::Enumerative)));
    }

    match provenance_edit(grammar, trace, &edit) {
        Ok(ge) if reproduces(grammar, &ge, trace, edited) => {
            Ok(result(SyncStatus::Applied, Some(ge), None, Some(SyncPhase::Provenance)))
        }
        Ok(_) => Ok(result(SyncStatus::OutOfSync, None, Some(OutOfSyncReason::NoCandidate), None)),
        Err(reason) => Ok(result(SyncStatus::OutOfSync, None, Some(reason), None)),
    }
}

fn deepest_containing(node: &TraceNode, region: TextRange) -> &TraceNode {
    for child in &node.children {
        let s = child.output_span;
        let inside = s.start <= region.start && region.end <= s.end;
        // An empty insertion at a child's edge belongs to the parent's text.
        let strictly = !region.is_empty() || (s.start < region.start && region.end < s.end);
        if inside && strictly && !s.is_empty() {
            return deepest_containing(child, region);
        }
    }
    node
}

fn provenance_edit(grammar: &Grammar, trace: &ExpansionTrace, edit: &OutputEdit) -> Result<GrammarEdit, OutOfSyncReason> {
    let region = edit.region;
    let node = deepest_containing(&trace.root, region);
    let literal = node.pieces.iter().find_map(|p| match p {
        TracePiece::Literal(l) if l.output.start <= region.start && region.end <= l.output.end => Some(l),
        _ => None,
    });
    let Some(literal) = literal else {
        return Err(OutOfSyncReason::CrossesProvenanceBoundary);
    };
    if trace.uses(&node.symbol, node.chosen_rule_index) > 1 {
        return Err(OutOfSyncReason::AmbiguousRuleUse);
    }
    let rule = grammar.rule(&node.symbol, node.chosen_rule_index).ok_or(OutOfSyncReason::NoCandidate)?;
    let from = literal.rule_range.start + (region.start - literal.output.start);
    let to = from + region.len();
    let new_rule = format!("{}{}{}", &rule[..from], edit.replacement, &rule[to..]);
    Ok(GrammarEdit { symbol: node.symbol.clone(), rule_index: node.chosen_rule_index, new_rule })
}
