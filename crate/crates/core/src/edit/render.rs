use serde_json::Value;

/// Renders `value` as JSON. Pretty output nests by two spaces and prefixes
/// every continuation line with `base`; inline output keeps one line with
/// `", "` and `": "` separators.
pub fn render(value: &Value, base: &str, pretty: bool) -> String {
    let mut out = String::new();
    write(value, base, pretty, &mut out);
    out
}

fn write(value: &Value, indent: &str, pretty: bool, out: &mut String) {
    match value {
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Object(map) => {
            let inner = format!("{indent}  ");
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                    if !pretty {
                        out.push(' ');
                    }
                }
                if pretty {
                    out.push('\n');
                    out.push_str(&inner);
                }
                out.push_str(&quote(k));
                out.push_str(": ");
                write(v, &inner, pretty, out);
            }
            if pretty {
                out.push('\n');
                out.push_str(indent);
            }
            out.push('}');
        }
        Value::Array(items) => {
            let inner = format!("{indent}  ");
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                    if !pretty {
                        out.push(' ');
                    }
                }
                if pretty {
                    out.push('\n');
                    out.push_str(&inner);
                }
                write(v, &inner, pretty, out);
            }
            if pretty {
                out.push('\n');
                out.push_str(indent);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// A JSON string literal for `s`.
pub fn quote(s: &str) -> String {
    Value::String(s.to_owned()).to_string()
}
