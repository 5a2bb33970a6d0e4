//! Document sessions behind a JSON-RPC 2.0 interface.
//!
//! A [`Service`] owns open documents. Each session holds the text, its
//! parse tree, a schema, a view registry and a version number that grows
//! with every accepted change. Responses are a pure function of the session
//! state and the request, so replaying a transcript reproduces it byte for
//! byte.
//!
//! Methods: `doc/open`, `doc/update`, `doc/text`, `doc/close`, `doc/menu`,
//! `doc/applyAction`, `doc/anchors`, `schema/search`, `tracery/expand` and
//! `tracery/reverseEdit`. Every range in a response carries byte offsets
//! plus `startPosition`/`endPosition` line and column pairs.

pub mod rpc;

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::edit::{apply, ActionSource, EditAction, EditError, EditKind, TextEdit};
use crate::jsonc::{KeyPath, LineIndex, Step, SyntaxTree, TextRange};
use crate::menu::{extract_query_at_cursor, filter_menu, menu_for, schema_search};
use crate::projection::{resolve_anchors_with, quiet_mode_view, Registry, ViewSpec, ViewStatus};
use crate::schema::{validate, SchemaDoc, SchemaError};
use crate::tracery::{self, ExpansionTrace, Grammar, SyncStatus, TraceryError};

pub use rpc::RpcError;

const DEFAULT_SEARCH_LIMIT: usize = 20;
const KEPT_TRACES: usize = 64;

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn params<T: DeserializeOwned>(value: Value) -> Result<T, RpcError> {
    serde_json::from_value(value).map_err(|e| RpcError::invalid_params(e.to_string()))
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}

fn position(lines: &LineIndex, offset: usize) -> Value {
    let lc = lines.line_col(offset);
    json!({ "line": lc.line, "column": lc.column })
}

/// Adds line/column pairs to every range found under one of `keys`.
fn annotate(value: &mut Value, lines: &LineIndex, keys: &[&str]) {
    match value {
        Value::Object(map) => {
            for (k, v) in map.iter_mut() {
                if keys.contains(&k.as_str()) {
                    if let Value::Object(range) = v {
                        let start = range.get("start").and_then(Value::as_u64);
                        let end = range.get("end").and_then(Value::as_u64);
                        if let (Some(s), Some(e)) = (start, end) {
                            range.insert("startPosition".into(), position(lines, s as usize));
                            range.insert("endPosition".into(), position(lines, e as usize));
                            continue;
                        }
                    }
                }
                annotate(v, lines, keys);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| annotate(v, lines, keys)),
        _ => {}
    }
}

struct Offered {
    reference: String,
    action: EditAction,
    suggestion: bool,
}

struct Trace {
    id: String,
    version: u64,
    trace: ExpansionTrace,
}

struct Session {
    tree: SyntaxTree,
    schema: Arc<SchemaDoc>,
    registry: Registry,
    version: u64,
    /// Actions served for the current version.
    offered: Vec<Offered>,
    next_action: u64,
    traces: Vec<Trace>,
    next_trace: u64,
    /// Text inserted from schema search, flagged on anchors until the next
    /// change.
    suggestions: Vec<TextRange>,
}

impl Session {
    fn text(&self) -> &str {
        self.tree.text()
    }

    fn status(&self) -> ViewStatus {
        if self.tree.root().kind() == crate::jsonc::NodeKind::Error {
            ViewStatus::ViewsDeactivated
        } else {
            ViewStatus::Active
        }
    }

    fn diagnostics(&self) -> Value {
        Value::Array(document_diagnostics(&self.tree, &self.schema))
    }

    fn check_version(&self, base: u64) -> Result<(), RpcError> {
        if base != self.version {
            return Err(RpcError::stale_version(base, self.version));
        }
        Ok(())
    }

    fn offer(&mut self, action: EditAction, suggestion: bool) -> String {
        let reference = format!("a{}.{}", self.version, self.next_action);
        self.next_action += 1;
        self.offered.push(Offered { reference: reference.clone(), action, suggestion });
        reference
    }

    /// Replaces the text and bumps the version; offered actions expire.
    fn set_text(&mut self, text: String) {
        self.tree = SyntaxTree::parse(&text);
        self.version += 1;
        self.offered.clear();
        self.next_action = 0;
        self.next_trace = 0;
        self.suggestions.clear();
    }

    fn changed(&self) -> Value {
        json!({ "version": self.version, "diagnostics": self.diagnostics(), "status": self.status() })
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ViewManifest {
    #[serde(default)]
    remove: Vec<String>,
    #[serde(default)]
    views: Vec<ViewSpec>,
    #[serde(default)]
    quiet_mode: bool,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct OpenParams {
    doc_id: String,
    #[serde(default)]
    text: String,
    /// A schema file path, or an inline schema object.
    #[serde(default)]
    schema_ref: Option<Value>,
    #[serde(default)]
    view_manifest: Option<ViewManifest>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct DocParams {
    doc_id: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct UpdateParams {
    doc_id: String,
    base_version: u64,
    edits: Vec<TextEdit>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct MenuParams {
    doc_id: String,
    offset: usize,
    #[serde(default)]
    query: Option<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ApplyParams {
    doc_id: String,
    base_version: u64,
    action_ref: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SearchParams {
    doc_id: String,
    query: String,
    #[serde(default)]
    limit: Option<usize>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ExpandParams {
    doc_id: String,
    seed: u64,
    #[serde(default)]
    depth_limit: Option<usize>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ReverseParams {
    doc_id: String,
    trace_id: String,
    edited_output: String,
}

fn edit_error(e: EditError) -> RpcError {
    match e {
        EditError::Conflict(at) => {
            RpcError::new(rpc::EDIT_CONFLICT, "editConflict", format!("edits overlap at byte {at}")).with("offset", at)
        }
        other => RpcError::invalid_params(other.to_string()),
    }
}

fn tracery_error(e: TraceryError) -> RpcError {
    match e {
        TraceryError::TraceStale => RpcError::new(rpc::TRACE_STALE, "traceStale", e.to_string()),
        TraceryError::Symbol { .. } => RpcError::new(rpc::TRACERY, "symbolError", e.to_string()),
        TraceryError::Recursion { .. } | TraceryError::TooLarge => {
            RpcError::new(rpc::TRACERY, "recursionError", e.to_string())
        }
        TraceryError::NoEdit => RpcError::new(rpc::TRACERY, "noEdit", e.to_string()),
        other => RpcError::new(rpc::TRACERY, "grammarError", other.to_string()),
    }
}

/// All open sessions. Requests for one document are serialized by that
/// session's lock; distinct documents proceed independently.
#[derive(Default)]
pub struct Service {
    base_dir: PathBuf,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl Service {
    /// Schema paths resolve against the working directory.
    pub fn new() -> Self {
        Service::with_base_dir(".")
    }

    pub fn with_base_dir(dir: impl AsRef<Path>) -> Self {
        Service { base_dir: dir.as_ref().to_path_buf(), sessions: Mutex::new(HashMap::new()) }
    }

    fn session(&self, doc_id: &str) -> Result<Arc<Mutex<Session>>, RpcError> {
        lock(&self.sessions).get(doc_id).cloned().ok_or_else(|| RpcError::document_not_found(doc_id))
    }

    /// Handles one request or notification. Notifications (no `id`) get no
    /// response.
    pub fn handle(&self, request: Value) -> Option<Value> {
        let Value::Object(mut req) = request else {
            let err = RpcError::new(rpc::INVALID_REQUEST, "invalidRequest", "request must be an object");
            return Some(rpc::response(Value::Null, Err(err)));
        };
        let id = req.remove("id");
        let method = req.get("method").and_then(Value::as_str).map(str::to_owned);
        let result = match (req.get("jsonrpc").and_then(Value::as_str), method) {
            (Some("2.0"), Some(method)) => {
                let p = req.remove("params").unwrap_or_else(|| json!({}));
                log::debug!("{method}");
                self.call(&method, p)
            }
            _ => Err(RpcError::new(rpc::INVALID_REQUEST, "invalidRequest", "expected jsonrpc 2.0 with a method")),
        };
        id.map(|id| rpc::response(id, result))
    }

    /// Handles one serialized message (a request or a batch).
    pub fn handle_text(&self, text: &str) -> Option<String> {
        let response = match serde_json::from_str::<Value>(text) {
            Err(e) => Some(rpc::response(Value::Null, Err(RpcError::new(rpc::PARSE_ERROR, "parseError", e.to_string())))),
            Ok(Value::Array(batch)) if !batch.is_empty() => {
                let out: Vec<Value> = batch.into_iter().filter_map(|r| self.handle(r)).collect();
                (!out.is_empty()).then_some(Value::Array(out))
            }
            Ok(value) => self.handle(value),
        };
        response.map(|r| r.to_string())
    }

    pub fn call(&self, method: &str, p: Value) -> Result<Value, RpcError> {
        match method {
            "doc/open" => self.open(params(p)?),
            "doc/update" => self.update(params(p)?),
            "doc/text" => self.text(params(p)?),
            "doc/close" => self.close(params(p)?),
            "doc/menu" => self.menu(params(p)?),
            "doc/applyAction" => self.apply_action(params(p)?),
            "doc/anchors" => self.anchors(params(p)?),
            "schema/search" => self.search(params(p)?),
            "tracery/expand" => self.expand(params(p)?),
            "tracery/reverseEdit" => self.reverse_edit(params(p)?),
            other => Err(RpcError::method_not_found(other)),
        }
    }

    fn load_schema(&self, schema_ref: Option<Value>) -> Result<SchemaDoc, RpcError> {
        let schema_error = |e: SchemaError, source: &str| {
            RpcError::new(rpc::SCHEMA_REF, "schemaRefError", format!("cannot load schema {source}: {e}"))
                .with("schemaRef", source)
        };
        match schema_ref {
            None | Some(Value::Null) => Ok(SchemaDoc::any()),
            Some(Value::String(path)) => {
                let full = self.base_dir.join(&path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    RpcError::new(rpc::SCHEMA_REF, "schemaRefError", format!("cannot read schema {path}: {e}"))
                        .with("schemaRef", path.as_str())
                })?;
                SchemaDoc::load_with_uri(&text, &path).map_err(|e| schema_error(e, &path))
            }
            Some(inline @ Value::Object(_)) => SchemaDoc::load(&inline.to_string()).map_err(|e| schema_error(e, "inline")),
            Some(_) => Err(RpcError::invalid_params("schemaRef must be a path or a schema object")),
        }
    }

    fn open(&self, p: OpenParams) -> Result<Value, RpcError> {
        if lock(&self.sessions).contains_key(&p.doc_id) {
            return Err(RpcError::new(rpc::DUPLICATE_DOCUMENT, "duplicateDocument", format!("{:?} is already open", p.doc_id))
                .with("docId", p.doc_id.as_str()));
        }
        let schema = self.load_schema(p.schema_ref)?;
        let mut registry = Registry::with_builtins();
        if let Some(m) = p.view_manifest {
            for id in &m.remove {
                registry = registry.remove(id);
            }
            if m.quiet_mode {
                registry = registry.register(quiet_mode_view()).map_err(|e| RpcError::invalid_params(e.to_string()))?;
            }
            for view in m.views {
                registry = registry.register(view).map_err(|e| RpcError::invalid_params(e.to_string()))?;
            }
        }
        let session = Session {
            tree: SyntaxTree::parse(&p.text),
            schema: Arc::new(schema),
            registry,
            version: 1,
            offered: Vec::new(),
            next_action: 0,
            traces: Vec::new(),
            next_trace: 0,
            suggestions: Vec::new(),
        };
        let mut result = session.changed();
        result["docId"] = Value::String(p.doc_id.clone());
        let mut sessions = lock(&self.sessions);
        if sessions.contains_key(&p.doc_id) {
            return Err(RpcError::new(rpc::DUPLICATE_DOCUMENT, "duplicateDocument", format!("{:?} is already open", p.doc_id)));
        }
        sessions.insert(p.doc_id, Arc::new(Mutex::new(session)));
        Ok(result)
    }

    fn update(&self, p: UpdateParams) -> Result<Value, RpcError> {
        let s = self.session(&p.doc_id)?;
        let mut s = lock(&s);
        s.check_version(p.base_version)?;
        let text = apply(s.text(), &p.edits).map_err(edit_error)?;
        s.set_text(text);
        Ok(s.changed())
    }

    fn text(&self, p: DocParams) -> Result<Value, RpcError> {
        let s = self.session(&p.doc_id)?;
        let s = lock(&s);
        Ok(json!({ "version": s.version, "text": s.text() }))
    }

    fn close(&self, p: DocParams) -> Result<Value, RpcError> {
        lock(&self.sessions).remove(&p.doc_id).ok_or_else(|| RpcError::document_not_found(&p.doc_id))?;
        Ok(json!({ "closed": true }))
    }

    fn menu(&self, p: MenuParams) -> Result<Value, RpcError> {
        let s = self.session(&p.doc_id)?;
        let mut s = lock(&s);
        let len = s.text().len();
        let menu = menu_for(&s.tree, &s.schema, &s.registry, p.offset)
            .map_err(|_| RpcError::invalid_params(format!("offset {} is beyond the text length {len}", p.offset)))?;
        let query = match p.query {
            Some(q) if !q.is_empty() => q,
            _ => extract_query_at_cursor(&s.tree, p.offset),
        };
        let menu = filter_menu(&menu, &query);
        let mut items = Vec::new();
        for item in menu.items {
            let mut v = to_json(&item);
            if let Some(action) = item.action {
                let reference = s.offer(action, false);
                v["actionRef"] = Value::String(reference);
            }
            items.push(v);
        }
        Ok(json!({
            "version": s.version,
            "query": query,
            "anchorPath": menu.anchor_path,
            "typeInfo": menu.type_info,
            "items": items,
        }))
    }

    fn apply_action(&self, p: ApplyParams) -> Result<Value, RpcError> {
        let s = self.session(&p.doc_id)?;
        let mut s = lock(&s);
        s.check_version(p.base_version)?;
        let Some(offered) = s.offered.iter().find(|o| o.reference == p.action_ref) else {
            return Err(RpcError::new(rpc::EXPIRED_ACTION, "expiredActionRef", format!("action {:?} is not valid for version {}", p.action_ref, s.version))
                .with("actionRef", p.action_ref.as_str()));
        };
        let suggestion = offered.suggestion;
        let compiled = offered.action.compile(&s.tree).map_err(edit_error)?;
        let text = apply(s.text(), &compiled.edits).map_err(edit_error)?;
        let mut edits = to_json(&compiled.edits);
        annotate(&mut edits, s.tree.line_index(), &["range"]);
        let inserted = inserted_ranges(&compiled.edits);
        s.set_text(text);
        if suggestion {
            s.suggestions = inserted;
        }
        let mut result = s.changed();
        result["edits"] = edits;
        result["warnings"] = to_json(&compiled.warnings);
        Ok(result)
    }

    fn anchors(&self, p: DocParams) -> Result<Value, RpcError> {
        let s = self.session(&p.doc_id)?;
        let s = lock(&s);
        let res = resolve_anchors_with(&s.tree, &s.schema, &s.registry, &s.suggestions);
        let mut anchors = to_json(&res.anchors);
        annotate(&mut anchors, s.tree.line_index(), &["nodeRange"]);
        Ok(json!({ "version": s.version, "status": res.status, "anchors": anchors }))
    }

    fn search(&self, p: SearchParams) -> Result<Value, RpcError> {
        if p.query.is_empty() {
            return Err(RpcError::invalid_params("query must not be empty"));
        }
        let limit = p.limit.unwrap_or(DEFAULT_SEARCH_LIMIT);
        if limit == 0 {
            return Err(RpcError::invalid_params("limit must be positive"));
        }
        let s = self.session(&p.doc_id)?;
        let mut s = lock(&s);
        let results = schema_search(&s.tree, &s.schema, &p.query, limit);
        let mut out = Vec::new();
        for r in results {
            let mut v = to_json(&r);
            if r.action.compile(&s.tree).is_ok() {
                v["actionRef"] = Value::String(s.offer(r.action, true));
            }
            out.push(v);
        }
        Ok(json!({ "version": s.version, "suggestions": out }))
    }

    fn expand(&self, p: ExpandParams) -> Result<Value, RpcError> {
        let s = self.session(&p.doc_id)?;
        let mut s = lock(&s);
        let grammar = grammar_of(&s.tree)?;
        let depth = p.depth_limit.unwrap_or(tracery::DEFAULT_DEPTH_LIMIT);
        let trace = tracery::expand(&grammar, p.seed, depth).map_err(tracery_error)?;
        let id = format!("t{}.{}", s.version, s.next_trace);
        s.next_trace += 1;
        let lines = LineIndex::new(&trace.output);
        let mut trace_json = to_json(&trace);
        annotate(&mut trace_json, &lines, &["outputSpan", "output"]);
        annotate_rule_ranges(&mut trace_json["root"], &grammar);
        let result = json!({ "version": s.version, "output": trace.output, "traceId": id, "trace": trace_json });
        let version = s.version;
        s.traces.push(Trace { id, version, trace });
        if s.traces.len() > KEPT_TRACES {
            s.traces.remove(0);
        }
        Ok(result)
    }

    fn reverse_edit(&self, p: ReverseParams) -> Result<Value, RpcError> {
        let s = self.session(&p.doc_id)?;
        let mut s = lock(&s);
        let stale = || {
            RpcError::new(rpc::TRACE_STALE, "traceStale", format!("trace {:?} is unknown or predates the current text", p.trace_id))
                .with("traceId", p.trace_id.as_str())
        };
        let t = s.traces.iter().find(|t| t.id == p.trace_id).ok_or_else(stale)?;
        if t.version != s.version {
            return Err(stale());
        }
        let grammar = grammar_of(&s.tree)?;
        let sync = tracery::synthesize(&grammar, &t.trace, &p.edited_output).map_err(tracery_error)?;
        let output_lines = LineIndex::new(&t.trace.output);
        let mut result = to_json(&sync);
        annotate(&mut result, &output_lines, &["region"]);
        result["version"] = json!(s.version);
        if let (SyncStatus::Applied, Some(ge)) = (sync.status, &sync.grammar_edit) {
            let path = KeyPath::new(vec![Step::key(ge.symbol.clone()), Step::Index(ge.rule_index)]);
            let kind = EditKind::ReplaceValue { path, value: Value::String(ge.new_rule.clone()) };
            let action = EditAction::new(kind, format!("Update rule {} #{}", ge.symbol, ge.rule_index), ActionSource::View);
            if let Ok(compiled) = action.compile(&s.tree) {
                let mut edits = to_json(&compiled.edits);
                annotate(&mut edits, s.tree.line_index(), &["range"]);
                result["edits"] = edits;
                result["actionRef"] = Value::String(s.offer(action, false));
            }
        }
        Ok(result)
    }
}

/// Positions for `ruleRange`, measured in the text of the node's chosen rule.
fn annotate_rule_ranges(node: &mut Value, grammar: &Grammar) {
    let symbol = node["symbol"].as_str().unwrap_or_default();
    let index = node["chosenRuleIndex"].as_u64().unwrap_or_default() as usize;
    if let Some(rule) = grammar.rule(symbol, index) {
        let lines = LineIndex::new(rule);
        if let Some(pieces) = node.get_mut("pieces") {
            annotate(pieces, &lines, &["ruleRange"]);
        }
    }
    if let Some(Value::Array(children)) = node.get_mut("children") {
        children.iter_mut().for_each(|c| annotate_rule_ranges(c, grammar));
    }
}

fn grammar_of(tree: &SyntaxTree) -> Result<Grammar, RpcError> {
    if tree.has_error_diagnostics() {
        return Err(RpcError::new(rpc::TRACERY, "grammarError", "the grammar document has syntax errors"));
    }
    Grammar::from_value(&tree.to_value()).map_err(tracery_error)
}

/// Parse and schema diagnostics in wire form, each tagged with its `source`
/// and carrying line/column positions.
pub fn document_diagnostics(tree: &SyntaxTree, schema: &SchemaDoc) -> Vec<Value> {
    let mut out: Vec<Value> = tree
        .diagnostics()
        .iter()
        .map(|d| {
            json!({
                "source": "parse",
                "range": d.range,
                "severity": d.severity,
                "code": d.code,
                "message": d.message,
            })
        })
        .collect();
    out.extend(validate(tree, schema).into_iter().map(|d| {
        json!({
            "source": "schema",
            "range": d.range,
            "severity": d.severity,
            "rule": d.rule,
            "keyPath": d.key_path,
            "message": d.message,
        })
    }));
    for d in &mut out {
        annotate(d, tree.line_index(), &["range"]);
    }
    out
}

/// Where the new text of each edit lands once all are applied.
fn inserted_ranges(edits: &[TextEdit]) -> Vec<TextRange> {
    let mut shift: isize = 0;
    let mut sorted: Vec<&TextEdit> = edits.iter().collect();
    sorted.sort_by_key(|e| e.range.start);
    sorted
        .into_iter()
        .map(|e| {
            let start = (e.range.start as isize + shift) as usize;
            shift += e.new_text.len() as isize - e.range.len() as isize;
            TextRange::new(start, start + e.new_text.len())
        })
        .collect()
}

/// Serves newline-delimited JSON-RPC until `input` ends. Blank lines are
/// ignored.
pub fn serve_lines(service: &Service, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(reply) = service.handle_text(&line) {
            writeln!(output, "{reply}")?;
            output.flush()?;
        }
    }
    Ok(())
}
