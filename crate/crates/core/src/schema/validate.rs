use serde::Serialize;
use serde_json::Value;

use super::{json_eq, Additional, Items, JsonType, SchemaDoc, SchemaId};
use crate::jsonc::{KeyPath, Node, NodeKind, Severity, Step, SyntaxTree, TextRange};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationDiagnostic {
    pub key_path: KeyPath,
    pub range: TextRange,
    pub message: String,
    /// The violated keyword.
    pub rule: String,
    pub severity: Severity,
}

/// Checks the document against the schema root.
pub fn validate(tree: &SyntaxTree, doc: &SchemaDoc) -> Vec<ValidationDiagnostic> {
    validate_against(tree, doc, doc.root_id())
}

/// Checks the document against an arbitrary subschema of `doc`.
///
/// `Error` and `Missing` nodes are skipped: they already carry parse
/// diagnostics. `anyOf`/`oneOf` failures report the violations of the
/// branch that came closest to matching.
pub fn validate_against(tree: &SyntaxTree, doc: &SchemaDoc, id: SchemaId) -> Vec<ValidationDiagnostic> {
    let mut out = Vec::new();
    let root = tree.root();
    let v = Validator { doc };
    if root.kind() == NodeKind::Missing {
        let m = doc.merged(id);
        if let Some(first) = m.required.first() {
            out.push(diag(KeyPath::root(), root.range(), "required", format!("missing required property {first:?}")));
        }
        return out;
    }
    v.check(root, &KeyPath::root(), id, &mut out, 0);
    out
}

fn diag(key_path: KeyPath, range: TextRange, rule: &str, message: String) -> ValidationDiagnostic {
    ValidationDiagnostic { key_path, range, message, rule: rule.to_owned(), severity: Severity::Error }
}

const MAX_DEPTH: usize = 512;

struct Validator<'d> {
    doc: &'d SchemaDoc,
}

impl Validator<'_> {
    fn check(&self, node: Node<'_>, path: &KeyPath, id: SchemaId, out: &mut Vec<ValidationDiagnostic>, depth: usize) {
        if matches!(node.kind(), NodeKind::Error | NodeKind::Missing) || depth > MAX_DEPTH {
            return;
        }
        let Some(id) = self.doc.follow_refs(id) else { return };
        let def = self.doc.node(id);
        let range = node.span();
        let here = |rule: &str, message: String| diag(path.clone(), range, rule, message);

        if def.never {
            out.push(here("false", "no value is allowed here".into()));
            return;
        }

        let value = node.to_value();
        if let Some(types) = &def.types {
            if !types.iter().any(|t| t.accepts(&value)) {
                let names: Vec<&str> = types.iter().map(|t| t.name()).collect();
                out.push(here("type", format!("expected {}, found {}", names.join(" or "), kind_name(&value))));
                return;
            }
        }
        if let Some(c) = &def.const_value {
            if !json_eq(c, &value) {
                out.push(here("const", format!("expected {c}")));
            }
        }
        if let Some(e) = &def.enum_values {
            if !e.iter().any(|m| json_eq(m, &value)) {
                let shown: Vec<String> = e.iter().take(8).map(Value::to_string).collect();
                out.push(here("enum", format!("expected one of {}", shown.join(", "))));
            }
        }

        match node.kind() {
            NodeKind::Object => self.check_object(node, path, id, out, depth),
            NodeKind::Array => self.check_array(node, path, id, out, depth),
            NodeKind::Number => {
                if let Some(n) = value.as_f64() {
                    if def.minimum.is_some_and(|min| n < min) {
                        out.push(here("minimum", format!("must be at least {}", def.minimum.unwrap())));
                    }
                    if def.maximum.is_some_and(|max| n > max) {
                        out.push(here("maximum", format!("must be at most {}", def.maximum.unwrap())));
                    }
                }
            }
            _ => {}
        }

        for &member in &def.all_of {
            self.check(node, path, member, out, depth + 1);
        }
        if !def.any_of.is_empty() {
            let results: Vec<_> = def.any_of.iter().map(|&b| self.trial(node, path, b, depth)).collect();
            if results.iter().all(|r| !r.is_empty()) {
                out.extend(fewest(results));
            }
        }
        if !def.one_of.is_empty() {
            let results: Vec<_> = def.one_of.iter().map(|&b| self.trial(node, path, b, depth)).collect();
            let passing = results.iter().filter(|r| r.is_empty()).count();
            if passing == 0 {
                out.extend(fewest(results));
            } else if passing > 1 {
                out.push(here("oneOf", format!("matches {passing} alternatives, expected exactly one")));
            }
        }
    }

    fn trial(&self, node: Node<'_>, path: &KeyPath, id: SchemaId, depth: usize) -> Vec<ValidationDiagnostic> {
        let mut v = Vec::new();
        self.check(node, path, id, &mut v, depth + 1);
        v
    }

    fn check_object(&self, node: Node<'_>, path: &KeyPath, id: SchemaId, out: &mut Vec<ValidationDiagnostic>, depth: usize) {
        let def = self.doc.node(id);
        for name in &def.required {
            if node.property(name).is_none() {
                out.push(diag(path.clone(), node.span(), "required", format!("missing required property {name:?}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for prop in node.properties() {
            let Some(key) = prop.property_key() else { continue };
            if !seen.insert(key.clone()) {
                continue;
            }
            let Some(value) = prop.property_value() else { continue };
            let child = path.child(Step::Key(key.clone()));
            if let Some(&sub) = def.properties.get(&key) {
                self.check(value, &child, sub, out, depth + 1);
                continue;
            }
            match def.additional {
                Additional::Any => {}
                Additional::Forbidden => {
                    let name_node = prop.property_name_node().unwrap_or(prop);
                    out.push(diag(
                        child,
                        name_node.span(),
                        "additionalProperties",
                        format!("property {key:?} is not allowed"),
                    ));
                }
                Additional::Schema(sub) => self.check(value, &child, sub, out, depth + 1),
            }
        }
    }

    fn check_array(&self, node: Node<'_>, path: &KeyPath, id: SchemaId, out: &mut Vec<ValidationDiagnostic>, depth: usize) {
        let def = self.doc.node(id);
        let count = node.elements().count();
        if def.min_items.is_some_and(|n| count < n) {
            out.push(diag(path.clone(), node.span(), "minItems", format!("expected at least {} items", def.min_items.unwrap())));
        }
        if def.max_items.is_some_and(|n| count > n) {
            out.push(diag(path.clone(), node.span(), "maxItems", format!("expected at most {} items", def.max_items.unwrap())));
        }
        for (i, element) in node.elements().enumerate() {
            let sub = match &def.items {
                Some(Items::Single(s)) => Some(*s),
                Some(Items::Tuple(t)) => t.get(i).copied(),
                None => None,
            };
            if let Some(sub) = sub {
                self.check(element, &path.child(Step::Index(i)), sub, out, depth + 1);
            }
        }
    }
}

fn fewest(results: Vec<Vec<ValidationDiagnostic>>) -> Vec<ValidationDiagnostic> {
    results.into_iter().min_by_key(Vec::len).unwrap_or_default()
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) if JsonType::Integer.accepts(v) => "integer",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRODUCE: &str = r#"{
        "type": "object",
        "required": ["kind"],
        "properties": {
            "kind": {"enum": ["fruit", "vegetable"]},
            "weight": {"type": "number", "minimum": 0},
            "tags": {"type": "array", "items": {"type": "string"}}
        },
        "additionalProperties": false
    }"#;

    fn check(text: &str) -> Vec<ValidationDiagnostic> {
        let doc = SchemaDoc::load(PRODUCE).unwrap();
        validate(&SyntaxTree::parse(text), &doc)
    }

    #[test]
    fn valid_document() {
        assert!(check(r#"{"kind":"fruit"}"#).is_empty());
    }

    #[test]
    fn enum_violation() {
        let d = check(r#"{"kind":"meat"}"#);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rule, "enum");
        assert_eq!(d[0].key_path, KeyPath::new(vec![Step::key("kind")]));
    }

    #[test]
    fn empty_document_reports_required_once() {
        let d = check("");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rule, "required");
        assert!(d[0].key_path.is_empty());
    }

    #[test]
    fn nested_rules() {
        let d = check(r#"{"kind":"fruit","weight":-1,"tags":["a",2],"color":"red"}"#);
        let rules: Vec<&str> = d.iter().map(|d| d.rule.as_str()).collect();
        assert_eq!(rules, ["minimum", "type", "additionalProperties"]);
        assert_eq!(d[1].key_path.to_string(), "/tags/1");
    }

    #[test]
    fn any_of_reports_closest_branch() {
        let doc = SchemaDoc::load(
            r#"{"anyOf":[{"type":"object","required":["x","y"]},
                         {"type":"object","required":["a"],"properties":{"b":{"type":"number"}}},
                         {"type":"string"}]}"#,
        )
        .unwrap();
        let d = validate(&SyntaxTree::parse(r#"{"b": 1}"#), &doc);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "missing required property \"a\"");
        assert!(validate(&SyntaxTree::parse(r#""x""#), &doc).is_empty());
    }

    #[test]
    fn one_of_rejects_double_match() {
        let doc = SchemaDoc::load(r#"{"oneOf":[{"type":"number"},{"minimum":0}]}"#).unwrap();
        let d = validate(&SyntaxTree::parse("3"), &doc);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rule, "oneOf");
    }

    #[test]
    fn parse_errors_are_not_revalidated() {
        assert!(check(r#"{"kind": }"#).is_empty());
    }
}
