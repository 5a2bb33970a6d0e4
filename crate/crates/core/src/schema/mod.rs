//! JSON Schema loading, applicable-subschema inference, minimal instance
//! synthesis and validation over a draft-07 keyword subset.
//!
//! Keywords outside the subset are kept in
//! [`SchemaNodeDef::unsupported`] and otherwise ignored. Only document-local
//! `$ref`s are accepted; as in draft-07, a `$ref` overrides its sibling
//! keywords.

mod load;
mod synth;
mod validate;

use std::collections::HashSet;

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value;

use crate::jsonc::{KeyPath, Step};

pub use synth::{synthesize_minimal, Synthesis, DEFAULT_DEPTH_LIMIT};
pub use validate::{validate, validate_against, ValidationDiagnostic};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("schema is not valid JSON: {0}")]
    Json(String),
    #[error("unresolvable $ref {0:?}")]
    Ref(String),
    #[error("external $ref {0:?} is not supported")]
    UnsupportedRef(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemaId(u32);

impl SchemaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JsonType {
    Null,
    Boolean,
    Object,
    Array,
    Number,
    Integer,
    String,
}

impl JsonType {
    pub fn from_name(name: &str) -> Option<JsonType> {
        Some(match name {
            "null" => JsonType::Null,
            "boolean" => JsonType::Boolean,
            "object" => JsonType::Object,
            "array" => JsonType::Array,
            "number" => JsonType::Number,
            "integer" => JsonType::Integer,
            "string" => JsonType::String,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            JsonType::Null => "null",
            JsonType::Boolean => "boolean",
            JsonType::Object => "object",
            JsonType::Array => "array",
            JsonType::Number => "number",
            JsonType::Integer => "integer",
            JsonType::String => "string",
        }
    }

    /// Whether `value` is an instance of this type.
    pub fn accepts(self, value: &Value) -> bool {
        match (self, value) {
            (JsonType::Null, Value::Null)
            | (JsonType::Boolean, Value::Bool(_))
            | (JsonType::Object, Value::Object(_))
            | (JsonType::Array, Value::Array(_))
            | (JsonType::Number, Value::Number(_))
            | (JsonType::String, Value::String(_)) => true,
            (JsonType::Integer, Value::Number(n)) => {
                n.is_i64() || n.is_u64() || n.as_f64().is_some_and(|f| f.fract() == 0.0)
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Additional {
    /// Absent or `true`.
    Any,
    Forbidden,
    Schema(SchemaId),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Items {
    Single(SchemaId),
    Tuple(Vec<SchemaId>),
}

/// One compiled (sub)schema.
#[derive(Clone, Debug)]
pub struct SchemaNodeDef {
    pub id: SchemaId,
    /// JSON pointer fragment of this subschema, e.g. `#/properties/mark`.
    pub pointer: String,
    /// Definition name when this node sits directly under `definitions`/`$defs`.
    pub name: Option<String>,
    pub types: Option<Vec<JsonType>>,
    pub enum_values: Option<Vec<Value>>,
    pub const_value: Option<Value>,
    pub properties: IndexMap<String, SchemaId>,
    pub required: Vec<String>,
    pub additional: Additional,
    pub items: Option<Items>,
    pub any_of: Vec<SchemaId>,
    pub one_of: Vec<SchemaId>,
    pub all_of: Vec<SchemaId>,
    pub ref_target: Option<String>,
    /// Resolved `$ref`.
    pub reference: Option<SchemaId>,
    pub title: Option<String>,
    pub description: Option<String>,
    pub minimum: Option<f64>,
    pub maximum: Option<f64>,
    pub min_items: Option<usize>,
    pub max_items: Option<usize>,
    /// Keywords present in the source but outside the supported subset.
    pub unsupported: Vec<String>,
    /// The `false` schema.
    pub never: bool,
}

impl SchemaNodeDef {
    fn empty(id: SchemaId, pointer: String, name: Option<String>) -> Self {
        SchemaNodeDef {
            id,
            pointer,
            name,
            types: None,
            enum_values: None,
            const_value: None,
            properties: IndexMap::new(),
            required: Vec::new(),
            additional: Additional::Any,
            items: None,
            any_of: Vec::new(),
            one_of: Vec::new(),
            all_of: Vec::new(),
            ref_target: None,
            reference: None,
            title: None,
            description: None,
            minimum: None,
            maximum: None,
            min_items: None,
            max_items: None,
            unsupported: Vec::new(),
            never: false,
        }
    }

    /// Definition name, or the pointer for anonymous subschemas.
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.pointer)
    }

    /// Alternatives offered by `anyOf` followed by `oneOf`.
    pub fn branches(&self) -> impl Iterator<Item = SchemaId> + '_ {
        self.any_of.iter().chain(&self.one_of).copied()
    }

    /// Declared types, or the ones implied by structural keywords.
    pub fn effective_types(&self) -> Vec<JsonType> {
        if let Some(t) = &self.types {
            return t.clone();
        }
        let mut out = Vec::new();
        if !self.properties.is_empty() || !self.required.is_empty() {
            out.push(JsonType::Object);
        }
        if self.items.is_some() || self.min_items.is_some() || self.max_items.is_some() {
            out.push(JsonType::Array);
        }
        if self.minimum.is_some() || self.maximum.is_some() {
            out.push(JsonType::Number);
        }
        out
    }

    /// Every subschema edge out of this node.
    pub(crate) fn edges(&self) -> impl Iterator<Item = SchemaId> + '_ {
        let items: Vec<SchemaId> = match &self.items {
            Some(Items::Single(i)) => vec![*i],
            Some(Items::Tuple(v)) => v.clone(),
            None => Vec::new(),
        };
        let additional = match self.additional {
            Additional::Schema(s) => Some(s),
            _ => None,
        };
        self.properties
            .values()
            .copied()
            .chain(items)
            .chain(additional)
            .chain(self.any_of.iter().copied())
            .chain(self.one_of.iter().copied())
            .chain(self.all_of.iter().copied())
            .chain(self.reference)
    }
}

/// A loaded schema document.
#[derive(Clone, Debug)]
pub struct SchemaDoc {
    source_uri: String,
    root: SchemaId,
    definitions: IndexMap<String, SchemaId>,
    nodes: Vec<SchemaNodeDef>,
    ref_cycles: Vec<String>,
    recursive: Vec<String>,
}

impl SchemaDoc {
    pub fn load(json: &str) -> Result<SchemaDoc, SchemaError> {
        load::load(json, "inline")
    }

    pub fn load_with_uri(json: &str, source_uri: &str) -> Result<SchemaDoc, SchemaError> {
        load::load(json, source_uri)
    }

    /// The empty schema: accepts everything, offers nothing.
    pub fn any() -> SchemaDoc {
        load::load("{}", "builtin:any").expect("empty schema loads")
    }

    pub fn source_uri(&self) -> &str {
        &self.source_uri
    }

    pub fn root(&self) -> &SchemaNodeDef {
        self.node(self.root)
    }

    pub fn root_id(&self) -> SchemaId {
        self.root
    }

    pub fn node(&self, id: SchemaId) -> &SchemaNodeDef {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[SchemaNodeDef] {
        &self.nodes
    }

    pub fn definition(&self, name: &str) -> Option<&SchemaNodeDef> {
        self.definitions.get(name).map(|&id| self.node(id))
    }

    pub fn definitions(&self) -> impl Iterator<Item = (&str, &SchemaNodeDef)> + '_ {
        self.definitions.iter().map(|(k, &v)| (k.as_str(), self.node(v)))
    }

    /// Pointers of subschemas whose `$ref` chain loops back on itself.
    pub fn ref_cycles(&self) -> &[String] {
        &self.ref_cycles
    }

    /// Definitions that (indirectly) contain themselves.
    pub fn recursive_definitions(&self) -> &[String] {
        &self.recursive
    }

    /// Follows `$ref` chains. `None` for a chain that never leaves a cycle.
    pub fn follow_refs(&self, id: SchemaId) -> Option<SchemaId> {
        let mut cur = id;
        let mut hops = 0;
        while let Some(next) = self.node(cur).reference {
            cur = next;
            hops += 1;
            if hops > self.nodes.len() {
                return None;
            }
        }
        Some(cur)
    }

    /// Subschemas applicable at the document root.
    pub fn root_set(&self) -> SchemaSet<'_> {
        let mut set = SchemaSet::default();
        self.expand(self.root, Vec::new(), &mut set);
        set
    }

    /// Subschemas applicable at `path`, descending from the root through
    /// `properties`/`additionalProperties` for keys and `items` for indices.
    /// Combinator branches are listed unfiltered.
    pub fn schema_set(&self, path: &KeyPath) -> SchemaSet<'_> {
        let mut set = self.root_set();
        for step in path.steps() {
            if set.is_empty() {
                break;
            }
            set = self.descend(&set, step);
        }
        set
    }

    /// Applicable subschemas one step below `set`.
    pub fn descend<'s>(&'s self, set: &SchemaSet<'s>, step: &Step) -> SchemaSet<'s> {
        let mut next = SchemaSet::default();
        for entry in &set.entries {
            let def = entry.def;
            match step {
                Step::Key(name) | Step::KeyName(name) => {
                    if let Some(&sub) = def.properties.get(name) {
                        self.expand(sub, Vec::new(), &mut next);
                    } else if let Additional::Schema(sub) = def.additional {
                        self.expand(sub, Vec::new(), &mut next);
                    }
                }
                Step::Index(i) => match &def.items {
                    Some(Items::Single(sub)) => self.expand(*sub, Vec::new(), &mut next),
                    Some(Items::Tuple(subs)) => {
                        if let Some(&sub) = subs.get(*i) {
                            self.expand(sub, Vec::new(), &mut next);
                        }
                    }
                    None => {}
                },
            }
        }
        next
    }

    fn expand<'s>(&'s self, id: SchemaId, via: Vec<Branch>, set: &mut SchemaSet<'s>) {
        let Some(id) = self.follow_refs(id) else { return };
        if !set.seen.insert(id) {
            return;
        }
        let def = self.node(id);
        set.entries.push(SchemaEntry { def, name: def.display_name().to_owned(), via: via.clone() });
        if !def.all_of.is_empty() {
            set.conflicts.extend(self.all_of_conflicts(id));
        }
        let groups = [
            (BranchKind::AllOf, &def.all_of),
            (BranchKind::AnyOf, &def.any_of),
            (BranchKind::OneOf, &def.one_of),
        ];
        for (kind, members) in groups {
            for (index, &member) in members.iter().enumerate() {
                let mut v = via.clone();
                v.push(Branch { kind, index, parent: id });
                self.expand(member, v, set);
            }
        }
    }

    /// Keyword conflicts between a schema and its `allOf` members.
    pub fn all_of_conflicts(&self, id: SchemaId) -> Vec<MergeConflict> {
        let merged = self.merged(id);
        let mut out = Vec::new();
        let pointer = self.node(id).pointer.clone();
        if let Some(first) = merged.consts.first() {
            if merged.consts.iter().any(|c| !json_eq(c, first)) {
                out.push(MergeConflict {
                    pointer: pointer.clone(),
                    keyword: "const".into(),
                    message: "allOf members require different constants".into(),
                });
            }
        }
        if merged.types.as_ref().is_some_and(Vec::is_empty) {
            out.push(MergeConflict {
                pointer: pointer.clone(),
                keyword: "type".into(),
                message: "allOf members share no common type".into(),
            });
        }
        if merged.enums.len() > 1 && merged.enum_intersection().is_empty() {
            out.push(MergeConflict {
                pointer,
                keyword: "enum".into(),
                message: "allOf members share no common enum member".into(),
            });
        }
        out
    }

    /// Keyword-wise merge of a schema with its `allOf` members (recursively).
    pub(crate) fn merged(&self, id: SchemaId) -> Merged<'_> {
        let mut m = Merged::default();
        let mut seen = HashSet::new();
        self.merge_into(id, &mut m, &mut seen);
        m
    }

    fn merge_into<'s>(&'s self, id: SchemaId, m: &mut Merged<'s>, seen: &mut HashSet<SchemaId>) {
        let Some(id) = self.follow_refs(id) else {
            return;
        };
        if !seen.insert(id) {
            return;
        }
        let def = self.node(id);
        m.never |= def.never;
        if let Some(c) = &def.const_value {
            m.consts.push(c);
        }
        if let Some(e) = &def.enum_values {
            m.enums.push(e);
        }
        if let Some(t) = &def.types {
            m.types = Some(match m.types.take() {
                None => t.clone(),
                Some(prev) => prev.into_iter().filter(|x| type_compatible(*x, t)).collect(),
            });
        }
        for (name, &sub) in &def.properties {
            m.properties.entry(name.as_str()).or_default().push(sub);
        }
        for r in &def.required {
            if !m.required.contains(&r.as_str()) {
                m.required.push(r);
            }
        }
        if let Additional::Schema(s) = def.additional {
            m.additional.get_or_insert(s);
        }
        if let Some(items) = &def.items {
            m.items.get_or_insert(items);
        }
        if m.branches.is_empty() {
            m.branches = def.branches().collect();
        }
        m.minimum = max_opt(m.minimum, def.minimum);
        m.maximum = min_opt(m.maximum, def.maximum);
        m.min_items = def.min_items.max(m.min_items);
        m.max_items = match (m.max_items, def.max_items) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        m.structural |= !def.properties.is_empty() || def.items.is_some() || !def.required.is_empty();
        for &member in &def.all_of {
            self.merge_into(member, m, seen);
        }
    }
}

fn type_compatible(t: JsonType, others: &[JsonType]) -> bool {
    others.contains(&t)
        || (t == JsonType::Integer && others.contains(&JsonType::Number))
        || (t == JsonType::Number && others.contains(&JsonType::Integer))
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Keyword-wise union of a schema and its `allOf` members.
#[derive(Default, Debug)]
pub(crate) struct Merged<'s> {
    pub never: bool,
    pub consts: Vec<&'s Value>,
    pub enums: Vec<&'s Vec<Value>>,
    /// Intersection of declared types; `None` when no member declares one.
    pub types: Option<Vec<JsonType>>,
    pub properties: IndexMap<&'s str, Vec<SchemaId>>,
    pub required: Vec<&'s str>,
    pub additional: Option<SchemaId>,
    pub items: Option<&'s Items>,
    pub branches: Vec<SchemaId>,
    pub minimum: Option<f64>,
    pub maximum: Option<f64>,
    pub min_items: Option<usize>,
    pub max_items: Option<usize>,
    pub structural: bool,
}

impl Merged<'_> {
    /// Members of the first enum that every other enum also allows.
    pub fn enum_intersection(&self) -> Vec<&Value> {
        let Some((first, rest)) = self.enums.split_first() else {
            return Vec::new();
        };
        first
            .iter()
            .filter(|v| rest.iter().all(|e| e.iter().any(|w| json_eq(v, w))))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BranchKind {
    AnyOf,
    OneOf,
    AllOf,
}

/// How an entry was reached: branch `index` of a combinator on `parent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Branch {
    pub kind: BranchKind,
    pub index: usize,
    pub parent: SchemaId,
}

#[derive(Clone, Debug)]
pub struct SchemaEntry<'s> {
    pub def: &'s SchemaNodeDef,
    /// Definition name, or a synthetic `#/...` pointer.
    pub name: String,
    pub via: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeConflict {
    pub pointer: String,
    pub keyword: String,
    pub message: String,
}

/// Ordered, deduplicated subschemas applicable at one tree position.
#[derive(Clone, Debug, Default)]
pub struct SchemaSet<'s> {
    pub entries: Vec<SchemaEntry<'s>>,
    pub conflicts: Vec<MergeConflict>,
    seen: HashSet<SchemaId>,
}

impl<'s> SchemaSet<'s> {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn has_name(&self, name: &str) -> bool {
        self.names().any(|n| n == name)
    }

    pub fn ids(&self) -> impl Iterator<Item = SchemaId> + '_ {
        self.entries.iter().map(|e| e.def.id)
    }

    /// Union of declared types, in first-seen order.
    pub fn types(&self) -> Vec<JsonType> {
        let mut out = Vec::new();
        for e in &self.entries {
            for t in e.def.types.iter().flatten() {
                if !out.contains(t) {
                    out.push(*t);
                }
            }
        }
        out
    }

    /// Union of enum members and consts, deduplicated, in schema order.
    pub fn enum_options(&self) -> Vec<Value> {
        let mut out: Vec<Value> = Vec::new();
        for e in &self.entries {
            let members = e.def.enum_values.iter().flatten().chain(e.def.const_value.as_ref());
            for v in members {
                if !out.iter().any(|o| json_eq(o, v)) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// Short human-readable summary, e.g. `Mark: string | #/properties/x: number`.
    pub fn summary(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                let types: Vec<&str> = e.def.effective_types().iter().map(|t| t.name()).collect();
                let shape = if e.def.enum_values.is_some() {
                    "enum".to_owned()
                } else if e.def.const_value.is_some() {
                    "const".to_owned()
                } else if !types.is_empty() {
                    types.join("|")
                } else if !e.def.any_of.is_empty() || !e.def.one_of.is_empty() {
                    "union".to_owned()
                } else {
                    "any".to_owned()
                };
                format!("{}: {}", e.name, shape)
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

/// JSON equality that compares numbers by value (`1 == 1.0`).
pub fn json_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => match (x.as_i64(), y.as_i64()) {
            (Some(i), Some(j)) => i == j,
            _ => x.as_f64() == y.as_f64(),
        },
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(a, b)| json_eq(a, b))
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| json_eq(v, w)))
        }
        _ => a == b,
    }
}
