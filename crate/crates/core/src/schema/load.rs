use indexmap::IndexMap;
use serde_json::{Map, Value};

use super::{Additional, Items, JsonType, SchemaDoc, SchemaError, SchemaId, SchemaNodeDef};

const SUPPORTED: &[&str] = &[
    "type",
    "enum",
    "const",
    "properties",
    "required",
    "additionalProperties",
    "items",
    "anyOf",
    "oneOf",
    "allOf",
    "$ref",
    "title",
    "description",
    "minimum",
    "maximum",
    "minItems",
    "maxItems",
];

/// Keywords that hold subschemas or metadata rather than constraints; they
/// are walked or ignored without being reported as unsupported.
const STRUCTURAL: &[&str] = &["definitions", "$defs", "$schema", "$id", "$comment", "default", "examples"];

pub(super) fn load(json: &str, source_uri: &str) -> Result<SchemaDoc, SchemaError> {
    let value: Value = serde_json::from_str(json).map_err(|e| SchemaError::Json(e.to_string()))?;
    let mut loader = Loader { doc_value: &value, nodes: Vec::new(), by_pointer: IndexMap::new(), pending: Vec::new() };
    let root = loader.compile(&value, "#".to_owned(), None);

    let mut definitions = IndexMap::new();
    for key in ["definitions", "$defs"] {
        if let Some(Value::Object(defs)) = value.get(key) {
            for (name, def) in defs {
                let pointer = format!("#/{key}/{}", escape(name));
                let id = loader.compile(def, pointer, Some(name.clone()));
                definitions.entry(name.clone()).or_insert(id);
            }
        }
    }

    // Resolve refs; compiling a ref target may discover further refs.
    while let Some((from, target)) = loader.pending.pop() {
        let id = loader.resolve_ref(&target)?;
        loader.nodes[from.index()].reference = Some(id);
    }

    let nodes = loader.nodes;
    let mut doc = SchemaDoc {
        source_uri: source_uri.to_owned(),
        root,
        definitions,
        nodes,
        ref_cycles: Vec::new(),
        recursive: Vec::new(),
    };
    doc.ref_cycles = find_ref_cycles(&doc);
    doc.recursive = find_recursive_definitions(&doc);
    Ok(doc)
}

struct Loader<'v> {
    doc_value: &'v Value,
    nodes: Vec<SchemaNodeDef>,
    by_pointer: IndexMap<String, SchemaId>,
    /// `(node, ref target)` pairs still to resolve.
    pending: Vec<(SchemaId, String)>,
}

impl<'v> Loader<'v> {
    fn compile(&mut self, value: &Value, pointer: String, name: Option<String>) -> SchemaId {
        if let Some(&id) = self.by_pointer.get(&pointer) {
            if name.is_some() && self.nodes[id.index()].name.is_none() {
                self.nodes[id.index()].name = name;
            }
            return id;
        }
        let id = SchemaId(self.nodes.len() as u32);
        self.nodes.push(SchemaNodeDef::empty(id, pointer.clone(), name));
        self.by_pointer.insert(pointer.clone(), id);

        let obj = match value {
            Value::Bool(true) => return id,
            Value::Bool(false) => {
                self.nodes[id.index()].never = true;
                return id;
            }
            Value::Object(obj) => obj,
            _ => {
                self.nodes[id.index()].unsupported.push("<non-schema value>".to_owned());
                return id;
            }
        };

        let mut def = std::mem::replace(
            &mut self.nodes[id.index()],
            SchemaNodeDef::empty(id, String::new(), None),
        );
        self.fill(&mut def, obj, &pointer);
        self.nodes[id.index()] = def;

        // Nested definition tables are compiled so refs into them resolve to
        // named nodes.
        for key in ["definitions", "$defs"] {
            if let Some(Value::Object(defs)) = obj.get(key) {
                for (n, d) in defs {
                    let p = format!("{pointer}/{key}/{}", escape(n));
                    self.compile(d, p, Some(n.clone()));
                }
            }
        }
        id
    }

    fn fill(&mut self, def: &mut SchemaNodeDef, obj: &Map<String, Value>, pointer: &str) {
        for (key, v) in obj {
            match key.as_str() {
                "type" => {
                    let names: Vec<&str> = match v {
                        Value::String(s) => vec![s.as_str()],
                        Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
                        _ => Vec::new(),
                    };
                    def.types = Some(names.into_iter().filter_map(JsonType::from_name).collect());
                }
                "enum" => {
                    if let Value::Array(a) = v {
                        def.enum_values = Some(a.clone());
                    }
                }
                "const" => def.const_value = Some(v.clone()),
                "properties" => {
                    if let Value::Object(props) = v {
                        for (name, sub) in props {
                            let p = format!("{pointer}/properties/{}", escape(name));
                            let sid = self.compile(sub, p, None);
                            def.properties.insert(name.clone(), sid);
                        }
                    }
                }
                "required" => {
                    if let Value::Array(a) = v {
                        for n in a.iter().filter_map(Value::as_str) {
                            if !def.required.iter().any(|r| r == n) {
                                def.required.push(n.to_owned());
                            }
                        }
                    }
                }
                "additionalProperties" => {
                    def.additional = match v {
                        Value::Bool(true) => Additional::Any,
                        Value::Bool(false) => Additional::Forbidden,
                        other => Additional::Schema(self.compile(
                            other,
                            format!("{pointer}/additionalProperties"),
                            None,
                        )),
                    }
                }
                "items" => {
                    def.items = Some(match v {
                        Value::Array(a) => Items::Tuple(
                            a.iter()
                                .enumerate()
                                .map(|(i, s)| self.compile(s, format!("{pointer}/items/{i}"), None))
                                .collect(),
                        ),
                        other => Items::Single(self.compile(other, format!("{pointer}/items"), None)),
                    })
                }
                "anyOf" | "oneOf" | "allOf" => {
                    if let Value::Array(a) = v {
                        let ids = a
                            .iter()
                            .enumerate()
                            .map(|(i, s)| self.compile(s, format!("{pointer}/{key}/{i}"), None))
                            .collect();
                        match key.as_str() {
                            "anyOf" => def.any_of = ids,
                            "oneOf" => def.one_of = ids,
                            _ => def.all_of = ids,
                        }
                    }
                }
                "$ref" => match v.as_str() {
                    Some(target) => {
                        def.ref_target = Some(target.to_owned());
                        self.pending.push((def.id, target.to_owned()));
                    }
                    None => def.unsupported.push("$ref".to_owned()),
                },
                "title" => def.title = v.as_str().map(str::to_owned),
                "description" => def.description = v.as_str().map(str::to_owned),
                "minimum" => def.minimum = v.as_f64(),
                "maximum" => def.maximum = v.as_f64(),
                "minItems" => def.min_items = v.as_u64().map(|n| n as usize),
                "maxItems" => def.max_items = v.as_u64().map(|n| n as usize),
                other if STRUCTURAL.contains(&other) => {}
                other => {
                    debug_assert!(!SUPPORTED.contains(&other));
                    def.unsupported.push(other.to_owned());
                }
            }
        }
    }

    fn resolve_ref(&mut self, target: &str) -> Result<SchemaId, SchemaError> {
        let Some(fragment) = target.strip_prefix('#') else {
            return Err(SchemaError::UnsupportedRef(target.to_owned()));
        };
        let pointer = format!("#{fragment}");
        if let Some(&id) = self.by_pointer.get(&pointer) {
            return Ok(id);
        }
        let value = self
            .doc_value
            .pointer(&percent_decode(fragment))
            .ok_or_else(|| SchemaError::Ref(target.to_owned()))?;
        let name = definition_name(fragment);
        Ok(self.compile(value, pointer, name))
    }
}

fn escape(name: &str) -> String {
    name.replace('~', "~0").replace('/', "~1")
}

/// Minimal `%XX` decoding for URI-fragment pointers.
fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let Ok(b) = u8::from_str_radix(&s[i + 1..i + 3], 16) {
                out.push(b);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8(out).unwrap_or_else(|_| s.to_owned())
}

fn definition_name(fragment: &str) -> Option<String> {
    let parts: Vec<&str> = fragment.trim_start_matches('/').split('/').collect();
    match parts.as_slice() {
        ["definitions" | "$defs", name] => Some(name.replace("~1", "/").replace("~0", "~")),
        _ => None,
    }
}

/// Definitions whose `$ref` chain loops without passing through any
/// structural keyword.
fn find_ref_cycles(doc: &SchemaDoc) -> Vec<String> {
    let mut cycles = Vec::new();
    for def in &doc.nodes {
        let mut seen = vec![def.id];
        let mut cur = def.reference;
        while let Some(next) = cur {
            if next == def.id {
                cycles.push(def.pointer.clone());
                break;
            }
            if seen.contains(&next) {
                break;
            }
            seen.push(next);
            cur = doc.node(next).reference;
        }
    }
    cycles
}

/// Named definitions that can reach themselves through any subschema edge.
fn find_recursive_definitions(doc: &SchemaDoc) -> Vec<String> {
    let mut out = Vec::new();
    for (name, &start) in &doc.definitions {
        let mut stack: Vec<SchemaId> = doc.node(start).edges().collect();
        let mut seen = std::collections::HashSet::new();
        while let Some(id) = stack.pop() {
            if id == start {
                out.push(name.clone());
                break;
            }
            if seen.insert(id) {
                stack.extend(doc.node(id).edges());
            }
        }
    }
    out
}
