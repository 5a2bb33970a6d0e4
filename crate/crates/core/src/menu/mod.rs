//! Structure-editor menus for a caret position.
//!
//! A menu mixes five groups of items: structural manipulation derived from
//! the parse tree, property and value suggestions derived from the schema
//! set at the caret, type switches, and menu-placement views. Items carry
//! ready-to-compile [`EditAction`]s.

mod search;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::edit::{ActionSource, EditAction, EditKind};
use crate::jsonc::{JsoncError, KeyPath, Node, NodeKind, Step, SyntaxTree};
use crate::projection::{matches, widget_params, Placement, Registry, SchemaSets, WidgetDescriptor, WidgetKind};
use crate::schema::{
    synthesize_minimal, BranchKind, JsonType, SchemaDoc, SchemaId, SchemaSet, DEFAULT_DEPTH_LIMIT,
};

pub use search::{schema_search, SearchSuggestion, MAX_SEARCH_DEPTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MenuGroup {
    Structural,
    SchemaProperty,
    SchemaValue,
    TypeSwitch,
    View,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MenuItem {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub action: Option<EditAction>,
    pub group: MenuGroup,
    pub sort_key: String,
    /// Widget to show for view items without a direct action.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub widget: Option<WidgetDescriptor>,
}

impl MenuItem {
    fn new(group: MenuGroup, label: impl Into<String>, action: Option<EditAction>) -> Self {
        let label = label.into();
        MenuItem { sort_key: label.to_lowercase(), label, detail: None, action, group, widget: None }
    }

    fn detail(mut self, detail: Option<String>) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Menu {
    pub anchor_path: KeyPath,
    pub items: Vec<MenuItem>,
    pub type_info: String,
}

impl Menu {
    pub fn labels(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.label.as_str()).collect()
    }

    pub fn group(&self, group: MenuGroup) -> impl Iterator<Item = &MenuItem> + '_ {
        self.items.iter().filter(move |i| i.group == group)
    }
}

/// Builds the menu for the caret at `offset`.
pub fn menu_for(tree: &SyntaxTree, schema: &SchemaDoc, registry: &Registry, offset: usize) -> Result<Menu, JsoncError> {
    let hit = tree.node_at(offset)?;
    let broken = hit.in_error();
    let target = target_node(hit);
    let path = tree.key_path_of(target)?;
    let value_path = path.to_value_path();
    let mut sets = SchemaSets::new(schema);
    let set = sets.get(&value_path).clone();

    let mut items = structural_items(tree, target, &value_path, schema, &set);
    if !broken {
        if target.kind() == NodeKind::PropertyName {
            items.extend(rename_items(target, &value_path, schema, &mut sets));
        } else {
            if target.kind() == NodeKind::Object {
                items.extend(property_items(target, &value_path, schema, &set));
            }
            items.extend(value_items(&value_path, schema, &set));
            items.extend(type_items(&value_path, schema, &set));
        }
        items.extend(view_items(target, registry, &mut sets));
    }

    items.retain(|i| i.action.as_ref().is_none_or(|a| a.compile(tree).is_ok()));
    items.sort_by(|a, b| a.group.cmp(&b.group).then_with(|| a.sort_key.cmp(&b.sort_key)));
    Ok(Menu { anchor_path: path, items, type_info: set.summary() })
}

/// Walks from the innermost node to the one the menu is about: comments and
/// whitespace inside a property defer to the property's value, and error
/// fragments to the closest intact ancestor.
fn target_node(hit: Node<'_>) -> Node<'_> {
    let mut node = hit;
    if node.kind().is_comment() {
        node = node.parent().unwrap_or(node);
    }
    while node.in_error() {
        match node.parent() {
            Some(p) => node = p,
            None => break,
        }
    }
    if node.kind() == NodeKind::Property {
        if let Some(v) = node.property_value() {
            return v;
        }
    }
    node
}

fn structural_items(
    tree: &SyntaxTree,
    target: Node<'_>,
    path: &KeyPath,
    schema: &SchemaDoc,
    set: &SchemaSet<'_>,
) -> Vec<MenuItem> {
    let mut out = Vec::new();
    let action = |kind, label: &str| Some(EditAction::new(kind, label, ActionSource::ParseTree));
    if let Some((unit, container)) = crate::edit::member_of(target) {
        let siblings: Vec<Node<'_>> = container.significant_children().collect();
        let index = siblings.iter().position(|s| *s == unit);
        if tree.resolve(path).is_some() {
            out.push(MenuItem::new(MenuGroup::Structural, "Delete", action(EditKind::DeleteNode { path: path.clone() }, "Delete")));
            if container.kind() == NodeKind::Array {
                out.push(MenuItem::new(
                    MenuGroup::Structural,
                    "Duplicate",
                    action(EditKind::DuplicateNode { path: path.clone() }, "Duplicate"),
                ));
            }
            if let Some(i) = index {
                if i > 0 {
                    let kind = EditKind::MoveSibling { path: path.clone(), direction: -1 };
                    out.push(MenuItem::new(MenuGroup::Structural, "Move up", action(kind, "Move up")));
                }
                if i + 1 < siblings.len() {
                    let kind = EditKind::MoveSibling { path: path.clone(), direction: 1 };
                    out.push(MenuItem::new(MenuGroup::Structural, "Move down", action(kind, "Move down")));
                }
            }
        }
    }
    if target.kind() == NodeKind::Array && !target.in_error() {
        let len = target.elements().count();
        let value = element_default(schema, set, len);
        let kind = EditKind::InsertArrayElement { path: path.clone(), index: len, value };
        out.push(MenuItem::new(MenuGroup::Structural, "Add element", action(kind, "Add element")));
    }
    out
}

/// A minimal value for a new element at `index` of an array governed by `set`.
fn element_default(schema: &SchemaDoc, set: &SchemaSet<'_>, index: usize) -> Value {
    let element_set = schema.descend(set, &Step::Index(index));
    match element_set.entries.first() {
        Some(e) => synthesize_minimal(schema, e.def.id, DEFAULT_DEPTH_LIMIT).value,
        None => Value::Null,
    }
}

/// Property names the schema set allows at an object, in schema order, each
/// with the subschema that declares it.
fn declared_properties<'s>(set: &SchemaSet<'s>) -> Vec<(&'s str, SchemaId)> {
    let mut out: Vec<(&str, SchemaId)> = Vec::new();
    for e in &set.entries {
        for (name, &id) in &e.def.properties {
            if !out.iter().any(|(n, _)| *n == name) {
                out.push((name.as_str(), id));
            }
        }
    }
    out
}

fn describe(schema: &SchemaDoc, id: SchemaId) -> Option<String> {
    let def = schema.node(id);
    let resolved = schema.follow_refs(id).map(|r| schema.node(r));
    def.description
        .clone()
        .or_else(|| def.title.clone())
        .or_else(|| resolved.and_then(|r| r.description.clone().or_else(|| r.title.clone())))
}

fn property_items(object: Node<'_>, path: &KeyPath, schema: &SchemaDoc, set: &SchemaSet<'_>) -> Vec<MenuItem> {
    declared_properties(set)
        .into_iter()
        .filter(|(name, _)| object.property(name).is_none())
        .map(|(name, id)| {
            let value = synthesize_minimal(schema, id, DEFAULT_DEPTH_LIMIT).value;
            let kind = EditKind::InsertProperty { path: path.clone(), name: name.to_owned(), value };
            let action = EditAction::new(kind, format!("Add {name}"), ActionSource::Schema);
            MenuItem::new(MenuGroup::SchemaProperty, name, Some(action)).detail(describe(schema, id))
        })
        .collect()
}

/// On a property name, the absent sibling properties are offered as renames.
fn rename_items(name_node: Node<'_>, value_path: &KeyPath, schema: &SchemaDoc, sets: &mut SchemaSets<'_>) -> Vec<MenuItem> {
    let Some(object) = name_node.parent().and_then(|p| p.parent()) else {
        return Vec::new();
    };
    let Some(parent_path) = value_path.parent() else {
        return Vec::new();
    };
    let parent_set = sets.get(&parent_path).clone();
    declared_properties(&parent_set)
        .into_iter()
        .filter(|(name, _)| object.property(name).is_none())
        .map(|(name, id)| {
            let kind = EditKind::RenameKey { path: value_path.clone(), new_name: name.to_owned() };
            let action = EditAction::new(kind, format!("Rename to {name}"), ActionSource::Schema);
            MenuItem::new(MenuGroup::SchemaProperty, name, Some(action)).detail(describe(schema, id))
        })
        .collect()
}

fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn value_items(path: &KeyPath, schema: &SchemaDoc, set: &SchemaSet<'_>) -> Vec<MenuItem> {
    let mut out = Vec::new();
    for v in set.enum_options() {
        let label = value_label(&v);
        let kind = EditKind::ReplaceValue { path: path.clone(), value: v };
        let action = EditAction::new(kind, format!("Set to {label}"), ActionSource::Schema);
        out.push(MenuItem::new(MenuGroup::SchemaValue, label, Some(action)));
    }
    for e in &set.entries {
        let Some(branch) = e.via.last() else { continue };
        if branch.kind == BranchKind::AllOf {
            continue;
        }
        let def = e.def;
        let name = def
            .name
            .clone()
            .or_else(|| def.title.clone())
            .unwrap_or_else(|| {
                let types: Vec<&str> = def.effective_types().iter().map(|t| t.name()).collect();
                if types.is_empty() {
                    format!("option {}", branch.index + 1)
                } else {
                    format!("{} (option {})", types.join("|"), branch.index + 1)
                }
            });
        let synth = synthesize_minimal(schema, def.id, DEFAULT_DEPTH_LIMIT);
        let kind = EditKind::ReplaceValue { path: path.clone(), value: synth.value };
        let label = format!("Insert {name}");
        let action = EditAction::new(kind, label.clone(), ActionSource::Schema);
        let mut item = MenuItem::new(MenuGroup::SchemaValue, label, Some(action))
            .detail(def.description.clone().or_else(|| def.title.clone()));
        item.sort_key = format!("{}\u{0}{:04}", item.sort_key, branch.index);
        out.push(item);
    }
    out
}

fn type_default(schema: &SchemaDoc, set: &SchemaSet<'_>, t: JsonType) -> Value {
    let declaring = set.entries.iter().find(|e| e.def.types.as_ref().is_some_and(|ts| ts.len() == 1 && ts[0] == t));
    if let (Some(e), JsonType::Object | JsonType::Array) = (declaring, t) {
        return synthesize_minimal(schema, e.def.id, DEFAULT_DEPTH_LIMIT).value;
    }
    match t {
        JsonType::Object => Value::Object(Default::default()),
        JsonType::Array => Value::Array(Vec::new()),
        JsonType::String => Value::String(String::new()),
        JsonType::Number | JsonType::Integer => Value::from(0),
        JsonType::Boolean => Value::Bool(false),
        JsonType::Null => Value::Null,
    }
}

fn type_items(path: &KeyPath, schema: &SchemaDoc, set: &SchemaSet<'_>) -> Vec<MenuItem> {
    set.types()
        .into_iter()
        .map(|t| {
            let value = type_default(schema, set, t);
            let kind = EditKind::ReplaceValue { path: path.clone(), value };
            let action = EditAction::new(kind, format!("Change to {}", t.name()), ActionSource::Schema);
            MenuItem::new(MenuGroup::TypeSwitch, t.name(), Some(action)).detail(Some(format!("Change to {}", t.name())))
        })
        .collect()
}

/// Menu-placement views matching the target or one of its ancestors; the
/// nearest match of each view wins.
fn view_items(target: Node<'_>, registry: &Registry, sets: &mut SchemaSets<'_>) -> Vec<MenuItem> {
    let tree = target.tree();
    let mut out = Vec::new();
    let nodes: Vec<Node<'_>> = std::iter::once(target).chain(target.ancestors()).collect();
    for view in registry.views().filter(|v| v.placement == Placement::Menu) {
        for &node in &nodes {
            if node.in_error() || node.kind() == NodeKind::Property {
                continue;
            }
            let Ok(path) = tree.key_path_of(node) else { continue };
            let value_path = path.to_value_path();
            let set = sets.get(&value_path).clone();
            if !matches(&view.query, node, &path, &set) {
                continue;
            }
            let (label, kind) = match &view.widget.kind {
                WidgetKind::Custom(name) if name == "objectSorter" => {
                    ("Sort keys".to_owned(), Some(EditKind::SortObjectKeys { path: value_path.clone() }))
                }
                WidgetKind::Custom(name) if name == "formatter" => ("Format document".to_owned(), Some(EditKind::FormatDocument)),
                WidgetKind::NumberSlider => ("Adjust number".to_owned(), None),
                WidgetKind::ColorPicker => ("Pick color".to_owned(), None),
                _ => (view.id.clone(), None),
            };
            let action = kind.map(|k| EditAction::new(k, label.clone(), ActionSource::View));
            let mut item = MenuItem::new(MenuGroup::View, label, action).detail(Some(format!("{} at {}", view.id, path)));
            item.widget = Some(WidgetDescriptor { kind: view.widget.kind.clone(), params: widget_params(&view.widget, node, &set) });
            out.push(item);
            break;
        }
    }
    out
}

fn match_rank(item: &MenuItem, needle: &str) -> Option<u8> {
    let label = item.label.to_lowercase();
    if label.starts_with(needle) {
        Some(0)
    } else if label.contains(needle) {
        Some(1)
    } else if item.detail.as_ref().is_some_and(|d| d.to_lowercase().contains(needle)) {
        Some(2)
    } else {
        None
    }
}

/// Keeps the items whose label or detail contains `query` (ignoring case).
/// Label prefix matches rank first, then label substrings, then detail
/// matches; ties keep group order and then sort key.
pub fn filter_menu(menu: &Menu, query: &str) -> Menu {
    if query.is_empty() {
        return menu.clone();
    }
    let needle = query.to_lowercase();
    let mut ranked: Vec<(u8, &MenuItem)> =
        menu.items.iter().filter_map(|i| match_rank(i, &needle).map(|r| (r, i))).collect();
    ranked.sort_by(|(ra, a), (rb, b)| {
        ra.cmp(rb).then_with(|| a.group.cmp(&b.group)).then_with(|| a.sort_key.cmp(&b.sort_key))
    });
    Menu {
        anchor_path: menu.anchor_path.clone(),
        items: ranked.into_iter().map(|(_, i)| i.clone()).collect(),
        type_info: menu.type_info.clone(),
    }
}

/// The partial text typed so far when the caret sits in a string, property
/// name or stray token; empty otherwise.
pub fn extract_query_at_cursor(tree: &SyntaxTree, offset: usize) -> String {
    let Ok(node) = tree.node_at(offset) else {
        return String::new();
    };
    let token = match node.kind() {
        NodeKind::String | NodeKind::PropertyName => node,
        NodeKind::Error if node.children().next().is_none() => node,
        _ => return String::new(),
    };
    let span = token.span();
    if offset <= span.start || offset > span.end {
        return String::new();
    }
    let typed = &tree.text()[span.start..offset];
    let typed = typed.strip_prefix('"').unwrap_or(typed);
    let typed = if offset == span.end && !typed.is_empty() && token.text().len() > 1 {
        typed.strip_suffix('"').unwrap_or(typed)
    } else {
        typed
    };
    typed.to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::apply;

    const PRODUCE: &str = include_str!("../../fixtures/schemas/produce.schema.json");

    fn produce() -> SchemaDoc {
        SchemaDoc::load(PRODUCE).unwrap()
    }

    fn menu(text: &str, schema: &SchemaDoc, offset: usize) -> Menu {
        menu_for(&SyntaxTree::parse(text), schema, &Registry::with_builtins(), offset).unwrap()
    }

    #[test]
    fn empty_object_lists_every_property() {
        let m = menu("{}", &produce(), 1);
        let props: Vec<&str> = m.group(MenuGroup::SchemaProperty).map(|i| i.label.as_str()).collect();
        assert_eq!(props, ["color", "kind", "name", "organic", "origin", "price", "tags", "weight"]);
        assert_eq!(m.anchor_path, KeyPath::root());
    }

    #[test]
    fn present_properties_are_suppressed() {
        let m = menu(r#"{"kind": "fruit", "name": "x"}"#, &produce(), 0);
        let props: Vec<&str> = m.group(MenuGroup::SchemaProperty).map(|i| i.label.as_str()).collect();
        assert!(!props.contains(&"kind") && !props.contains(&"name"));
        assert!(props.contains(&"weight"));
    }

    #[test]
    fn enum_value_offers_picklist() {
        let text = r#"{"kind": "fruit"}"#;
        let m = menu(text, &produce(), 11);
        let values: Vec<&str> = m.group(MenuGroup::SchemaValue).map(|i| i.label.as_str()).collect();
        assert_eq!(values, ["fruit", "vegetable"]);
        let veg = m.items.iter().find(|i| i.label == "vegetable").unwrap();
        let tree = SyntaxTree::parse(text);
        let edits = veg.action.as_ref().unwrap().compile(&tree).unwrap().edits;
        assert_eq!(apply(text, &edits).unwrap(), r#"{"kind": "vegetable"}"#);
    }

    #[test]
    fn array_element_structural_items() {
        let m = menu("[1, 2, 3]", &SchemaDoc::any(), 4);
        let structural: Vec<&str> = m.group(MenuGroup::Structural).map(|i| i.label.as_str()).collect();
        assert_eq!(structural, ["Delete", "Duplicate", "Move down", "Move up"]);
        assert_eq!(m.anchor_path, KeyPath::new(vec![Step::Index(1)]));
    }

    #[test]
    fn groups_are_ordered() {
        let m = menu(r#"{"price": 3}"#, &produce(), 10);
        let groups: Vec<MenuGroup> = m.items.iter().map(|i| i.group).collect();
        let mut sorted = groups.clone();
        sorted.sort();
        assert_eq!(groups, sorted);
        assert!(m.items.iter().any(|i| i.label == "Insert Price"));
        assert!(m.items.iter().any(|i| i.group == MenuGroup::TypeSwitch && i.label == "number"));
    }

    #[test]
    fn errors_leave_only_structural_items() {
        let m = menu(r#"[{"kind": "fruit"}, tru]"#, &produce(), 21);
        assert!(m.items.iter().all(|i| i.group == MenuGroup::Structural));
    }

    #[test]
    fn views_contribute_sort_and_format() {
        let m = menu(r#"{"b": 1, "a": 2}"#, &SchemaDoc::any(), 6);
        let views: Vec<&str> = m.group(MenuGroup::View).map(|i| i.label.as_str()).collect();
        assert_eq!(views, ["Adjust number", "Format document", "Sort keys"]);
    }

    #[test]
    fn property_name_offers_renames() {
        let text = r#"{"nam": 1}"#;
        let m = menu(text, &produce(), 3);
        let renames: Vec<&str> = m.group(MenuGroup::SchemaProperty).map(|i| i.label.as_str()).collect();
        assert!(renames.contains(&"name"));
        assert_eq!(m.anchor_path.to_string(), "/nam#key");
    }

    #[test]
    fn filter_ranks_prefix_first() {
        let m = menu(r#"{"kind": "fruit"}"#, &produce(), 0);
        let f = filter_menu(&m, "or");
        let labels = f.labels();
        assert_eq!(labels[0], "organic");
        assert!(labels.contains(&"origin") && labels.contains(&"color"));
        assert_eq!(filter_menu(&f, "or"), f);
        assert_eq!(filter_menu(&m, ""), m);
    }

    #[test]
    fn query_extraction() {
        let tree = SyntaxTree::parse(r#"{"type": "no"#);
        assert_eq!(extract_query_at_cursor(&tree, tree.text().len()), "no");
        let tree = SyntaxTree::parse(r#"{"type": "nominal"}"#);
        assert_eq!(extract_query_at_cursor(&tree, 14), "nomi");
        assert_eq!(extract_query_at_cursor(&tree, 8), "");
    }
}
