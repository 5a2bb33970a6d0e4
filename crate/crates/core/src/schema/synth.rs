use serde_json::{Map, Value};

use super::{Items, JsonType, SchemaDoc, SchemaId};

pub const DEFAULT_DEPTH_LIMIT: usize = 16;

/// A synthesized instance. `truncated` lists the property/index paths where
/// the depth limit cut recursion short; the value there is `null`.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub value: Value,
    pub truncated: Vec<Vec<Value>>,
}

impl Synthesis {
    pub fn is_truncated(&self) -> bool {
        !self.truncated.is_empty()
    }
}

/// Smallest instance satisfying the required structure of `id`.
///
/// `const` wins over `enum` (first member), objects get all required
/// properties, arrays `minItems` copies of their item, numbers their
/// `minimum`, and `anyOf`/`oneOf` the first branch.
pub fn synthesize_minimal(doc: &SchemaDoc, id: SchemaId, depth_limit: usize) -> Synthesis {
    let mut s = Synth { doc, limit: depth_limit, truncated: Vec::new(), path: Vec::new(), hops: Vec::new() };
    let value = s.value(id, 0);
    Synthesis { value, truncated: s.truncated }
}

struct Synth<'d> {
    doc: &'d SchemaDoc,
    limit: usize,
    truncated: Vec<Vec<Value>>,
    path: Vec<Value>,
    /// Schemas entered at the current depth through branch hops.
    hops: Vec<SchemaId>,
}

impl Synth<'_> {
    fn truncate(&mut self) -> Value {
        self.truncated.push(self.path.clone());
        Value::Null
    }

    fn value(&mut self, id: SchemaId, depth: usize) -> Value {
        if depth >= self.limit || self.hops.contains(&id) {
            return self.truncate();
        }
        let m = self.doc.merged(id);

        if let Some(c) = m.consts.first() {
            return (*c).clone();
        }
        if !m.enums.is_empty() {
            let common = m.enum_intersection();
            let typed = common
                .iter()
                .find(|v| m.types.as_ref().is_none_or(|t| t.iter().any(|t| t.accepts(v))));
            return match typed.or(common.first()) {
                Some(v) => (*v).clone(),
                None => m.enums[0].first().cloned().unwrap_or(Value::Null),
            };
        }

        let ty = match &m.types {
            Some(types) => types.first().copied(),
            None if m.structural && m.items.is_some() => Some(JsonType::Array),
            None if m.structural => Some(JsonType::Object),
            None if m.min_items.is_some() || m.max_items.is_some() => Some(JsonType::Array),
            None if m.minimum.is_some() || m.maximum.is_some() => Some(JsonType::Number),
            None => None,
        };

        let Some(ty) = ty else {
            return match m.branches.first() {
                Some(&branch) => {
                    self.hops.push(id);
                    let v = self.value(branch, depth);
                    self.hops.pop();
                    v
                }
                None => Value::Null,
            };
        };

        let saved_hops = std::mem::take(&mut self.hops);
        let out = match ty {
            JsonType::Null => Value::Null,
            JsonType::Boolean => Value::Bool(false),
            JsonType::String => Value::String(String::new()),
            JsonType::Number => number(m.minimum, m.maximum, false),
            JsonType::Integer => number(m.minimum, m.maximum, true),
            JsonType::Object => {
                let mut map = Map::new();
                for &name in &m.required {
                    let sub = m.properties.get(name).and_then(|v| v.first().copied()).or(m.additional);
                    self.path.push(Value::String(name.to_owned()));
                    let v = match sub {
                        Some(sub) => self.value(sub, depth + 1),
                        None => Value::Null,
                    };
                    self.path.pop();
                    map.insert(name.to_owned(), v);
                }
                Value::Object(map)
            }
            JsonType::Array => {
                let n = m.min_items.unwrap_or(0);
                let mut arr = Vec::with_capacity(n);
                for i in 0..n {
                    let sub = match m.items {
                        Some(Items::Single(s)) => Some(*s),
                        Some(Items::Tuple(t)) => t.get(i).copied(),
                        None => None,
                    };
                    self.path.push(Value::from(i));
                    arr.push(match sub {
                        Some(sub) => self.value(sub, depth + 1),
                        None => Value::Null,
                    });
                    self.path.pop();
                }
                Value::Array(arr)
            }
        };
        self.hops = saved_hops;
        out
    }
}

fn number(min: Option<f64>, max: Option<f64>, integer: bool) -> Value {
    let mut n = match (min, max) {
        (Some(lo), _) => lo,
        (None, Some(hi)) if hi < 0.0 => hi,
        _ => 0.0,
    };
    if integer {
        n = n.ceil();
    }
    if n.fract() == 0.0 && n.abs() < 9.0e15 {
        Value::from(n as i64)
    } else {
        serde_json::Number::from_f64(n).map_or(Value::Null, Value::Number)
    }
}
