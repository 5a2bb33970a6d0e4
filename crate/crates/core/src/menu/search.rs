use std::collections::HashSet;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::edit::{ActionSource, EditAction, EditKind};
use crate::jsonc::{KeyPath, Node, NodeKind, Step, SyntaxTree};
use crate::schema::{synthesize_minimal, Items, SchemaDoc, SchemaId, SchemaNodeDef, DEFAULT_DEPTH_LIMIT};

/// Deepest property path the search descends to.
pub const MAX_SEARCH_DEPTH: usize = 12;
const VISIT_BUDGET: usize = 250_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum MatchField {
    Name,
    Title,
    Description,
    Enum,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SearchScore {
    pub depth: usize,
    pub path: Vec<String>,
}

/// A schema location matching a search query, ready to insert.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchSuggestion {
    /// Path from the schema root; array items appear as index 0.
    pub matched_path: KeyPath,
    pub matched_on: MatchField,
    /// What gets inserted at `insertion_path`.
    pub snippet: Value,
    /// Deepest node of the current document along `matched_path`.
    pub insertion_path: KeyPath,
    pub action: EditAction,
    pub score: SearchScore,
}

struct Found {
    steps: Vec<Step>,
    /// Subschema declaring each step.
    containers: Vec<SchemaId>,
    leaf: Value,
    field: MatchField,
}

struct Searcher<'s> {
    schema: &'s SchemaDoc,
    needle: String,
    steps: Vec<Step>,
    containers: Vec<SchemaId>,
    on_path: Vec<SchemaId>,
    seen: HashSet<Vec<Step>>,
    found: Vec<Found>,
    budget: usize,
}

impl<'s> Searcher<'s> {
    /// The subschemas in force at one position: `id` with refs followed and
    /// combinator branches flattened, minus anything already being expanded
    /// further up the current path.
    fn expand(&self, id: SchemaId) -> Vec<&'s SchemaNodeDef> {
        let mut out = Vec::new();
        let mut local = HashSet::new();
        let mut stack = vec![id];
        while let Some(next) = stack.pop() {
            let Some(resolved) = self.schema.follow_refs(next) else { continue };
            if self.on_path.contains(&resolved) || !local.insert(resolved) {
                continue;
            }
            let def = self.schema.node(resolved);
            out.push(def);
            let branches: Vec<SchemaId> = def.all_of.iter().chain(&def.any_of).chain(&def.one_of).copied().collect();
            stack.extend(branches.into_iter().rev());
        }
        out
    }

    fn contains(&self, s: &str) -> bool {
        s.to_lowercase().contains(&self.needle)
    }

    fn visit(&mut self, id: SchemaId) {
        if self.budget == 0 {
            return;
        }
        self.budget -= 1;
        let defs = self.expand(id);
        if !self.steps.is_empty() && !self.seen.contains(&self.steps) {
            if let Some((field, leaf)) = self.match_here(id, &defs) {
                self.seen.insert(self.steps.clone());
                self.found.push(Found { steps: self.steps.clone(), containers: self.containers.clone(), leaf, field });
            }
        }
        if self.steps.len() >= MAX_SEARCH_DEPTH {
            return;
        }
        let pushed = defs.len();
        self.on_path.extend(defs.iter().map(|d| d.id));
        for def in &defs {
            for (name, &sub) in &def.properties {
                self.descend(Step::Key(name.clone()), def.id, sub);
            }
            let item = match &def.items {
                Some(Items::Single(sub)) => Some(*sub),
                Some(Items::Tuple(subs)) => subs.first().copied(),
                None => None,
            };
            if let Some(sub) = item {
                self.descend(Step::Index(0), def.id, sub);
            }
        }
        self.on_path.truncate(self.on_path.len() - pushed);
    }

    fn descend(&mut self, step: Step, container: SchemaId, sub: SchemaId) {
        self.steps.push(step);
        self.containers.push(container);
        self.visit(sub);
        self.steps.pop();
        self.containers.pop();
    }

    fn match_here(&self, id: SchemaId, defs: &[&SchemaNodeDef]) -> Option<(MatchField, Value)> {
        let synth = || synthesize_minimal(self.schema, id, DEFAULT_DEPTH_LIMIT).value;
        if let Some(Step::Key(name)) = self.steps.last() {
            if self.contains(name) {
                return Some((MatchField::Name, synth()));
            }
        }
        let own = self.schema.node(id);
        let all = || std::iter::once(own).chain(defs.iter().copied());
        if all().any(|d| d.title.as_deref().is_some_and(|t| self.contains(t))) {
            return Some((MatchField::Title, synth()));
        }
        if all().any(|d| d.description.as_deref().is_some_and(|t| self.contains(t))) {
            return Some((MatchField::Description, synth()));
        }
        for d in defs {
            for v in d.enum_values.iter().flatten().chain(d.const_value.as_ref()) {
                let text = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                if self.contains(&text) {
                    return Some((MatchField::Enum, v.clone()));
                }
            }
        }
        None
    }
}

fn step_label(step: &Step) -> String {
    match step {
        Step::Key(k) | Step::KeyName(k) => k.clone(),
        Step::Index(i) => i.to_string(),
    }
}

/// Searches `schema` for locations whose property name, title, description
/// or enum members contain `query` (ignoring case) and turns each into a
/// snippet insertable into `tree`. Shallow matches come first.
pub fn schema_search(tree: &SyntaxTree, schema: &SchemaDoc, query: &str, limit: usize) -> Vec<SearchSuggestion> {
    if query.is_empty() || limit == 0 {
        return Vec::new();
    }
    let mut s = Searcher {
        schema,
        needle: query.to_lowercase(),
        steps: Vec::new(),
        containers: Vec::new(),
        on_path: Vec::new(),
        seen: HashSet::new(),
        found: Vec::new(),
        budget: VISIT_BUDGET,
    };
    s.visit(schema.root_id());
    let mut found: Vec<(SearchScore, Found)> = s
        .found
        .into_iter()
        .map(|f| (SearchScore { depth: f.steps.len(), path: f.steps.iter().map(step_label).collect() }, f))
        .collect();
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found.truncate(limit);
    found.into_iter().map(|(score, f)| suggestion(tree, schema, f, score)).collect()
}

/// The value to place at depth `j` of the path, creating missing objects
/// with their required properties filled in.
fn build(schema: &SchemaDoc, f: &Found, j: usize) -> Value {
    if j == f.steps.len() {
        return f.leaf.clone();
    }
    let inner = build(schema, f, j + 1);
    match &f.steps[j] {
        Step::Key(name) | Step::KeyName(name) => {
            let mut base = match synthesize_minimal(schema, f.containers[j], DEFAULT_DEPTH_LIMIT).value {
                Value::Object(m) => m,
                _ => Map::new(),
            };
            base.insert(name.clone(), inner);
            Value::Object(base)
        }
        Step::Index(_) => Value::Array(vec![inner]),
    }
}

fn suggestion(tree: &SyntaxTree, schema: &SchemaDoc, f: Found, score: SearchScore) -> SearchSuggestion {
    let mut cur: Node<'_> = tree.root();
    let mut i = 0;
    let (insertion_path, snippet, kind) = loop {
        let here = KeyPath::new(f.steps[..i].to_vec());
        if i == f.steps.len() {
            let leaf = f.leaf.clone();
            break (here.clone(), leaf.clone(), EditKind::ReplaceValue { path: here, value: leaf });
        }
        match (cur.kind(), &f.steps[i]) {
            (NodeKind::Object, Step::Key(name)) => match cur.property(name).and_then(|p| p.property_value()) {
                Some(child) if child.kind() != NodeKind::Missing => {
                    cur = child;
                    i += 1;
                }
                _ => {
                    let value = build(schema, &f, i + 1);
                    let mut m = Map::new();
                    m.insert(name.clone(), value.clone());
                    let kind = EditKind::InsertProperty { path: here.clone(), name: name.clone(), value };
                    break (here, Value::Object(m), kind);
                }
            },
            (NodeKind::Array, Step::Index(_)) => {
                let value = build(schema, &f, i + 1);
                let index = cur.elements().count();
                let kind = EditKind::InsertArrayElement { path: here.clone(), index, value: value.clone() };
                break (here, value, kind);
            }
            _ => {
                let value = build(schema, &f, i);
                break (here.clone(), value.clone(), EditKind::ReplaceValue { path: here, value });
            }
        }
    };
    let matched_path = KeyPath::new(f.steps);
    let action = EditAction::new(kind, format!("Insert {matched_path}"), ActionSource::Schema);
    SearchSuggestion { matched_path, matched_on: f.field, snippet, insertion_path, action, score }
}
