//! Views: queries over the syntax tree that attach widgets to nodes.
//!
//! A view pairs a [`Placement`] with a [`Query`] and a [`WidgetDescriptor`].
//! [`resolve_anchors`] walks the tree once, evaluates every view at every
//! node and emits [`Anchor`]s. Among `replace` views matching the same node
//! only the latest registration survives.

mod builtin;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::jsonc::{step_from_json, step_to_json, KeyPath, Node, NodeKind, Step, SyntaxTree, TextRange};
use crate::schema::{SchemaDoc, SchemaSet};

pub use builtin::{builtin_views, quiet_mode_view, widget_params, CSS_COLOR_NAMES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectionError {
    #[error("a view with id {0:?} is already registered")]
    DuplicateId(String),
    #[error("invalid regex {pattern:?}: {message}")]
    Regex { pattern: String, message: String },
    #[error("query has no selectors")]
    EmptyQuery,
    #[error("unknown node kind {0:?}")]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    InlinePrefix,
    InlineSuffix,
    InlineBackground,
    Replace,
    Menu,
}

/// One segment of a key-path pattern. `Any` matches exactly one step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Segment {
    Step(Step),
    Any,
}

/// On the wire a pattern is an array like a key path where the string `"*"`
/// is the wildcard; a literal `*` key is written `{"key": "*"}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PathPattern(pub Vec<Segment>);

impl PathPattern {
    pub fn matches(&self, path: &KeyPath) -> bool {
        self.0.len() == path.len()
            && self.0.iter().zip(path.steps()).all(|(seg, step)| match seg {
                Segment::Any => true,
                Segment::Step(s) => s == step,
            })
    }
}

impl From<&KeyPath> for PathPattern {
    fn from(path: &KeyPath) -> Self {
        PathPattern(path.steps().iter().cloned().map(Segment::Step).collect())
    }
}

impl Serialize for PathPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let items: Vec<Value> = self
            .0
            .iter()
            .map(|seg| match seg {
                Segment::Any => Value::from("*"),
                Segment::Step(Step::Key(k)) if k == "*" => serde_json::json!({ "key": "*" }),
                Segment::Step(step) => step_to_json(step),
            })
            .collect();
        items.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PathPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let items = Vec::<Value>::deserialize(d)?;
        let segments = items
            .iter()
            .map(|v| match v {
                Value::String(s) if s == "*" => Ok(Segment::Any),
                Value::Object(m) if m.len() == 1 && m.get("key").is_some_and(Value::is_string) => {
                    Ok(Segment::Step(Step::Key(m["key"].as_str().unwrap_or_default().to_owned())))
                }
                other => step_from_json(other).map(Segment::Step),
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Ok(PathPattern(segments))
    }
}

/// Which nodes a view attaches to.
#[derive(Clone, Debug)]
pub enum Query {
    /// Nodes of the listed kinds.
    SyntaxNode(Vec<NodeKind>),
    /// Value or key-name nodes whose path matches a pattern.
    KeyPath(Vec<PathPattern>),
    /// Nodes whose schema set contains a listed definition name.
    SchemaNode(Vec<String>),
    /// Nodes whose source text matches a pattern.
    Regex(Vec<Regex>),
    /// Value nodes whose schema set uses one of the listed keywords
    /// (e.g. `enum`).
    SchemaKeyword(Vec<String>),
}

impl Query {
    pub fn syntax(kinds: &[NodeKind]) -> Query {
        Query::SyntaxNode(kinds.to_vec())
    }

    pub fn regex<S: AsRef<str>>(patterns: &[S]) -> Result<Query, ProjectionError> {
        patterns
            .iter()
            .map(|p| {
                Regex::new(p.as_ref())
                    .map_err(|e| ProjectionError::Regex { pattern: p.as_ref().to_owned(), message: e.to_string() })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Query::Regex)
    }

    fn selector_count(&self) -> usize {
        match self {
            Query::SyntaxNode(v) => v.len(),
            Query::KeyPath(v) => v.len(),
            Query::SchemaNode(v) | Query::SchemaKeyword(v) => v.len(),
            Query::Regex(v) => v.len(),
        }
    }

    fn needs_schema(&self) -> bool {
        matches!(self, Query::SchemaNode(_) | Query::SchemaKeyword(_))
    }
}

impl PartialEq for Query {
    fn eq(&self, other: &Self) -> bool {
        QuerySpec::from(self.clone()) == QuerySpec::from(other.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "selectors")]
enum QuerySpec {
    SyntaxNode(Vec<String>),
    KeyPath(Vec<PathPattern>),
    SchemaNode(Vec<String>),
    Regex(Vec<String>),
    SchemaKeyword(Vec<String>),
}

impl From<Query> for QuerySpec {
    fn from(q: Query) -> Self {
        match q {
            Query::SyntaxNode(k) => QuerySpec::SyntaxNode(k.iter().map(|k| k.name().to_owned()).collect()),
            Query::KeyPath(p) => QuerySpec::KeyPath(p),
            Query::SchemaNode(n) => QuerySpec::SchemaNode(n),
            Query::Regex(r) => QuerySpec::Regex(r.iter().map(|r| r.as_str().to_owned()).collect()),
            Query::SchemaKeyword(k) => QuerySpec::SchemaKeyword(k),
        }
    }
}

impl TryFrom<QuerySpec> for Query {
    type Error = ProjectionError;

    fn try_from(spec: QuerySpec) -> Result<Self, Self::Error> {
        let q = match spec {
            QuerySpec::SyntaxNode(names) => Query::SyntaxNode(
                names
                    .iter()
                    .map(|n| NodeKind::from_name(n).ok_or_else(|| ProjectionError::UnknownKind(n.clone())))
                    .collect::<Result<_, _>>()?,
            ),
            QuerySpec::KeyPath(p) => Query::KeyPath(p),
            QuerySpec::SchemaNode(n) => Query::SchemaNode(n),
            QuerySpec::Regex(r) => Query::regex(&r)?,
            QuerySpec::SchemaKeyword(k) => Query::SchemaKeyword(k),
        };
        if q.selector_count() == 0 {
            return Err(ProjectionError::EmptyQuery);
        }
        Ok(q)
    }
}

impl Serialize for Query {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QuerySpec::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Query {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Query::try_from(QuerySpec::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Client widget kind. Unknown names deserialize as `Custom`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WidgetKind {
    BooleanToggle,
    ColorChip,
    ColorPicker,
    NumberSlider,
    Picklist,
    QuietQuote,
    SparkSummary,
    Custom(String),
}

impl WidgetKind {
    pub fn name(&self) -> &str {
        match self {
            WidgetKind::BooleanToggle => "booleanToggle",
            WidgetKind::ColorChip => "colorChip",
            WidgetKind::ColorPicker => "colorPicker",
            WidgetKind::NumberSlider => "numberSlider",
            WidgetKind::Picklist => "picklist",
            WidgetKind::QuietQuote => "quietQuote",
            WidgetKind::SparkSummary => "sparkSummary",
            WidgetKind::Custom(name) => name,
        }
    }

    pub fn from_name(name: &str) -> WidgetKind {
        match name {
            "booleanToggle" => WidgetKind::BooleanToggle,
            "colorChip" => WidgetKind::ColorChip,
            "colorPicker" => WidgetKind::ColorPicker,
            "numberSlider" => WidgetKind::NumberSlider,
            "picklist" => WidgetKind::Picklist,
            "quietQuote" => WidgetKind::QuietQuote,
            "sparkSummary" => WidgetKind::SparkSummary,
            other => WidgetKind::Custom(other.to_owned()),
        }
    }
}

impl fmt::Display for WidgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for WidgetKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for WidgetKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(WidgetKind::from_name(&String::deserialize(d)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidgetDescriptor {
    pub kind: WidgetKind,
    #[serde(default)]
    pub params: Value,
}

impl WidgetDescriptor {
    pub fn new(kind: WidgetKind) -> Self {
        WidgetDescriptor { kind, params: Value::Null }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewSpec {
    pub id: String,
    pub placement: Placement,
    pub query: Query,
    pub widget: WidgetDescriptor,
    /// Assigned on registration.
    #[serde(default)]
    pub registration_index: u64,
}

impl ViewSpec {
    pub fn new(id: impl Into<String>, placement: Placement, query: Query, widget: WidgetKind) -> Self {
        ViewSpec { id: id.into(), placement, query, widget: WidgetDescriptor::new(widget), registration_index: 0 }
    }
}

/// Immutable, cheaply cloned view registry. Registration returns a new
/// registry and leaves the old one untouched.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    views: Arc<Vec<Arc<ViewSpec>>>,
    next_index: u64,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// Registry preloaded with [`builtin_views`].
    pub fn with_builtins() -> Self {
        static BUILTINS: OnceLock<Registry> = OnceLock::new();
        BUILTINS
            .get_or_init(|| {
                builtin_views()
                    .into_iter()
                    .try_fold(Registry::new(), |r, v| r.register(v))
                    .expect("builtin ids are unique")
            })
            .clone()
    }

    pub fn register(&self, mut spec: ViewSpec) -> Result<Registry, ProjectionError> {
        if spec.query.selector_count() == 0 {
            return Err(ProjectionError::EmptyQuery);
        }
        if self.get(&spec.id).is_some() {
            return Err(ProjectionError::DuplicateId(spec.id));
        }
        spec.registration_index = self.next_index;
        let mut views = (*self.views).clone();
        views.push(Arc::new(spec));
        Ok(Registry { views: Arc::new(views), next_index: self.next_index + 1 })
    }

    /// Removes a view by id; unknown ids leave the registry unchanged.
    pub fn remove(&self, id: &str) -> Registry {
        let views = self.views.iter().filter(|v| v.id != id).cloned().collect();
        Registry { views: Arc::new(views), next_index: self.next_index }
    }

    pub fn get(&self, id: &str) -> Option<&ViewSpec> {
        self.views.iter().find(|v| v.id == id).map(|v| &**v)
    }

    /// Views in registration order.
    pub fn views(&self) -> impl Iterator<Item = &ViewSpec> + '_ {
        self.views.iter().map(|v| &**v)
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }
}

/// Whether `query` selects `node`, which sits at `key_path` with schema set
/// `schema_set`.
pub fn matches(query: &Query, node: Node<'_>, key_path: &KeyPath, schema_set: &SchemaSet<'_>) -> bool {
    match query {
        Query::SyntaxNode(kinds) => kinds.contains(&node.kind()),
        Query::KeyPath(patterns) => is_addressable(node) && patterns.iter().any(|p| p.matches(key_path)),
        Query::SchemaNode(names) => names.iter().any(|n| schema_set.has_name(n)),
        Query::Regex(patterns) => patterns.iter().any(|r| r.is_match(node.text())),
        Query::SchemaKeyword(keywords) => {
            is_value(node)
                && schema_set.entries.iter().any(|e| keywords.iter().any(|k| has_keyword(e.def, k)))
        }
    }
}

fn is_value(node: Node<'_>) -> bool {
    matches!(
        node.kind(),
        NodeKind::Object
            | NodeKind::Array
            | NodeKind::String
            | NodeKind::Number
            | NodeKind::True
            | NodeKind::False
            | NodeKind::Null
    )
}

fn is_addressable(node: Node<'_>) -> bool {
    is_value(node) || matches!(node.kind(), NodeKind::PropertyName | NodeKind::Missing)
}

fn has_keyword(def: &crate::schema::SchemaNodeDef, keyword: &str) -> bool {
    match keyword {
        "enum" => def.enum_values.is_some(),
        "const" => def.const_value.is_some(),
        "type" => def.types.is_some(),
        "properties" => !def.properties.is_empty(),
        "required" => !def.required.is_empty(),
        "items" => def.items.is_some(),
        "anyOf" => !def.any_of.is_empty(),
        "oneOf" => !def.one_of.is_empty(),
        "allOf" => !def.all_of.is_empty(),
        "minimum" => def.minimum.is_some(),
        "maximum" => def.maximum.is_some(),
        "title" => def.title.is_some(),
        "description" => def.description.is_some(),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnchorPayload {
    pub node_kind: NodeKind,
    pub node_text: String,
    pub schema_names: Vec<String>,
    pub suggestion_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Anchor {
    pub view_id: String,
    pub node_range: TextRange,
    pub key_path: KeyPath,
    pub placement: Placement,
    /// The view's widget with per-node parameters filled in.
    pub widget: WidgetDescriptor,
    pub registration_index: u64,
    pub payload: AnchorPayload,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ViewStatus {
    Active,
    ViewsDeactivated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Resolution {
    pub anchors: Vec<Anchor>,
    pub status: ViewStatus,
    /// Nodes visited and query evaluations performed.
    #[serde(skip)]
    pub nodes_visited: usize,
    #[serde(skip)]
    pub evaluations: usize,
}

/// Caches schema sets per key path during one traversal.
pub(crate) struct SchemaSets<'s> {
    schema: &'s SchemaDoc,
    cache: HashMap<KeyPath, SchemaSet<'s>>,
}

impl<'s> SchemaSets<'s> {
    pub(crate) fn new(schema: &'s SchemaDoc) -> Self {
        SchemaSets { schema, cache: HashMap::new() }
    }

    pub(crate) fn get(&mut self, path: &KeyPath) -> &SchemaSet<'s> {
        if !self.cache.contains_key(path) {
            let set = match (path.parent(), path.last()) {
                (Some(parent), Some(step)) => {
                    let step = step.clone();
                    let parent_set = self.get(&parent).clone();
                    self.schema.descend(&parent_set, &step)
                }
                _ => self.schema.root_set(),
            };
            self.cache.insert(path.clone(), set);
        }
        &self.cache[path]
    }
}

/// Resolves every registered view against the tree.
pub fn resolve_anchors(tree: &SyntaxTree, schema: &SchemaDoc, registry: &Registry) -> Resolution {
    resolve_anchors_with(tree, schema, registry, &[])
}

/// Like [`resolve_anchors`]; nodes inside any of `suggestions` carry the
/// suggestion flag.
pub fn resolve_anchors_with(
    tree: &SyntaxTree,
    schema: &SchemaDoc,
    registry: &Registry,
    suggestions: &[TextRange],
) -> Resolution {
    let mut res = Resolution { anchors: Vec::new(), status: ViewStatus::Active, nodes_visited: 0, evaluations: 0 };
    if tree.root().kind() == NodeKind::Error {
        res.status = ViewStatus::ViewsDeactivated;
        return res;
    }
    let views: Vec<&ViewSpec> = registry.views().collect();
    let mut sets = SchemaSets::new(schema);
    let empty = SchemaSet::default();
    for node in tree.nodes() {
        if node.in_error() {
            continue;
        }
        res.nodes_visited += 1;
        let Ok(path) = tree.key_path_of(node) else { continue };
        let schema_path = path.to_value_path();
        let mut matched: Vec<&ViewSpec> = Vec::new();
        for view in &views {
            res.evaluations += 1;
            let set = if view.query.needs_schema() { sets.get(&schema_path) } else { &empty };
            if matches(&view.query, node, &path, set) {
                matched.push(view);
            }
        }
        if matched.is_empty() {
            continue;
        }
        let winner = matched
            .iter()
            .filter(|v| v.placement == Placement::Replace)
            .map(|v| v.registration_index)
            .max();
        let set = sets.get(&schema_path);
        let schema_names: Vec<String> = set.names().map(str::to_owned).collect();
        let flagged = suggestions.iter().any(|s| s.contains_range(node.span()));
        for view in matched {
            if view.placement == Placement::Replace && Some(view.registration_index) != winner {
                continue;
            }
            res.anchors.push(Anchor {
                view_id: view.id.clone(),
                node_range: node.span(),
                key_path: path.clone(),
                placement: view.placement,
                widget: WidgetDescriptor {
                    kind: view.widget.kind.clone(),
                    params: widget_params(&view.widget, node, set),
                },
                registration_index: view.registration_index,
                payload: AnchorPayload {
                    node_kind: node.kind(),
                    node_text: node.text().to_owned(),
                    schema_names: schema_names.clone(),
                    suggestion_flag: flagged,
                },
            });
        }
    }
    res
}
