use serde_json::{json, Map, Value};

use super::{PathPattern, Placement, Query, ViewSpec, WidgetDescriptor, WidgetKind};
use crate::jsonc::{Node, NodeKind};
use crate::schema::SchemaSet;

/// The 148 CSS named colors (plus `transparent`).
pub const CSS_COLOR_NAMES: &[&str] = &[
    "aliceblue", "antiquewhite", "aqua", "aquamarine", "azure", "beige", "bisque", "black",
    "blanchedalmond", "blue", "blueviolet", "brown", "burlywood", "cadetblue", "chartreuse",
    "chocolate", "coral", "cornflowerblue", "cornsilk", "crimson", "cyan", "darkblue", "darkcyan",
    "darkgoldenrod", "darkgray", "darkgreen", "darkgrey", "darkkhaki", "darkmagenta",
    "darkolivegreen", "darkorange", "darkorchid", "darkred", "darksalmon", "darkseagreen",
    "darkslateblue", "darkslategray", "darkslategrey", "darkturquoise", "darkviolet", "deeppink",
    "deepskyblue", "dimgray", "dimgrey", "dodgerblue", "firebrick", "floralwhite", "forestgreen",
    "fuchsia", "gainsboro", "ghostwhite", "gold", "goldenrod", "gray", "green", "greenyellow",
    "grey", "honeydew", "hotpink", "indianred", "indigo", "ivory", "khaki", "lavender",
    "lavenderblush", "lawngreen", "lemonchiffon", "lightblue", "lightcoral", "lightcyan",
    "lightgoldenrodyellow", "lightgray", "lightgreen", "lightgrey", "lightpink", "lightsalmon",
    "lightseagreen", "lightskyblue", "lightslategray", "lightslategrey", "lightsteelblue",
    "lightyellow", "lime", "limegreen", "linen", "magenta", "maroon", "mediumaquamarine",
    "mediumblue", "mediumorchid", "mediumpurple", "mediumseagreen", "mediumslateblue",
    "mediumspringgreen", "mediumturquoise", "mediumvioletred", "midnightblue", "mintcream",
    "mistyrose", "moccasin", "navajowhite", "navy", "oldlace", "olive", "olivedrab", "orange",
    "orangered", "orchid", "palegoldenrod", "palegreen", "paleturquoise", "palevioletred",
    "papayawhip", "peachpuff", "peru", "pink", "plum", "powderblue", "purple", "rebeccapurple",
    "red", "rosybrown", "royalblue", "saddlebrown", "salmon", "sandybrown", "seagreen",
    "seashell", "sienna", "silver", "skyblue", "slateblue", "slategray", "slategrey", "snow",
    "springgreen", "steelblue", "tan", "teal", "thistle", "tomato", "transparent", "turquoise",
    "violet", "wheat", "white", "whitesmoke", "yellow", "yellowgreen",
];

const HEX_COLOR: &str = r##"^"#[0-9a-fA-F]{6}"$"##;
const NUMBER: &str = r"-?(?:0|[1-9][0-9]*)(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?";
const SPARK_MIN_LEN: usize = 8;

fn color_query() -> Query {
    let names = format!(r#"(?i)^"(?:{})"$"#, CSS_COLOR_NAMES.join("|"));
    Query::regex(&[HEX_COLOR.to_owned(), names]).expect("color patterns compile")
}

fn spark_query() -> Query {
    let pattern = format!(r"^\[\s*(?:{NUMBER}\s*,\s*){{{n},}}{NUMBER}\s*,?\s*\]$", n = SPARK_MIN_LEN - 1);
    Query::regex(&[pattern]).expect("spark pattern compiles")
}

/// The default views every session starts with. Each can be removed by id.
pub fn builtin_views() -> Vec<ViewSpec> {
    vec![
        ViewSpec::new(
            "booleanToggle",
            Placement::InlinePrefix,
            Query::syntax(&[NodeKind::True, NodeKind::False]),
            WidgetKind::BooleanToggle,
        ),
        ViewSpec::new("colorChip", Placement::InlinePrefix, color_query(), WidgetKind::ColorChip),
        ViewSpec::new("colorPicker", Placement::Menu, color_query(), WidgetKind::ColorPicker),
        ViewSpec::new("numberSlider", Placement::Menu, Query::syntax(&[NodeKind::Number]), WidgetKind::NumberSlider),
        ViewSpec::new(
            "picklist",
            Placement::InlineSuffix,
            Query::SchemaKeyword(vec!["enum".into()]),
            WidgetKind::Picklist,
        ),
        ViewSpec::new("sparkSummary", Placement::Replace, spark_query(), WidgetKind::SparkSummary),
        ViewSpec::new(
            "objectSorter",
            Placement::Menu,
            Query::syntax(&[NodeKind::Object]),
            WidgetKind::Custom("objectSorter".into()),
        ),
        ViewSpec::new(
            "formatter",
            Placement::Menu,
            Query::KeyPath(vec![PathPattern::default()]),
            WidgetKind::Custom("formatter".into()),
        ),
    ]
}

/// The warm-up "quiet" view: hides the quotes of keys and strings.
pub fn quiet_mode_view() -> ViewSpec {
    ViewSpec::new(
        "quietMode",
        Placement::Replace,
        Query::syntax(&[NodeKind::PropertyName, NodeKind::String]),
        WidgetKind::QuietQuote,
    )
}

/// Widget parameters for one anchor: the view's static params overlaid with
/// values derived from the node and its schema set.
pub fn widget_params(widget: &WidgetDescriptor, node: Node<'_>, set: &SchemaSet<'_>) -> Value {
    let derived = match widget.kind {
        WidgetKind::BooleanToggle => json!({ "value": node.kind() == NodeKind::True }),
        WidgetKind::ColorChip | WidgetKind::ColorPicker => {
            json!({ "color": node.string_value().unwrap_or_else(|| node.text().to_owned()) })
        }
        WidgetKind::NumberSlider => slider(node, set),
        WidgetKind::Picklist => json!({ "options": set.enum_options(), "current": node.to_value() }),
        WidgetKind::QuietQuote => json!({ "text": node.string_value().unwrap_or_default() }),
        WidgetKind::SparkSummary => spark(node),
        WidgetKind::Custom(_) => Value::Null,
    };
    match (widget.params.clone(), derived) {
        (Value::Object(mut base), Value::Object(extra)) => {
            base.extend(extra);
            Value::Object(base)
        }
        (base, Value::Null) => base,
        (_, derived) => derived,
    }
}

fn slider(node: Node<'_>, set: &SchemaSet<'_>) -> Value {
    let value = node.to_value().as_f64().unwrap_or(0.0);
    let schema_min = set.entries.iter().find_map(|e| e.def.minimum);
    let schema_max = set.entries.iter().find_map(|e| e.def.maximum);
    let spread = value.abs() + 10.0;
    let mut min = schema_min.unwrap_or(value - spread);
    let mut max = schema_max.unwrap_or(value + spread);
    if schema_max.is_none() && max < min {
        max = min + spread;
    }
    if schema_min.is_none() && min > max {
        min = max - spread;
    }
    if min > max {
        std::mem::swap(&mut min, &mut max);
    }
    let integral = !node.text().contains(['.', 'e', 'E']);
    let step = if integral { 1.0 } else { ((max - min) / 100.0).max(f64::EPSILON) };
    let mut m = Map::new();
    m.insert("min".into(), number(min));
    m.insert("max".into(), number(max));
    m.insert("step".into(), number(step));
    m.insert("value".into(), number(value));
    Value::Object(m)
}

fn spark(node: Node<'_>) -> Value {
    let values: Vec<f64> = node.elements().filter_map(|e| e.to_value().as_f64()).collect();
    if values.is_empty() {
        return Value::Null;
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    json!({ "min": number(min), "mean": number(mean), "max": number(max), "count": values.len(), "values": values })
}

fn number(n: f64) -> Value {
    if n.fract() == 0.0 && n.abs() < 9.0e15 {
        Value::from(n as i64)
    } else {
        serde_json::Number::from_f64(n).map_or(Value::Null, Value::Number)
    }
}
