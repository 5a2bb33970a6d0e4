use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// One navigation step through a JSON document.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// The value of an object property.
    Key(String),
    /// An array element.
    Index(usize),
    /// The property-name token itself. Only valid as the final step.
    KeyName(String),
}

impl Step {
    pub fn key(name: impl Into<String>) -> Self {
        Step::Key(name.into())
    }

    /// Name for `Key` and `KeyName` steps.
    pub fn name(&self) -> Option<&str> {
        match self {
            Step::Key(n) | Step::KeyName(n) => Some(n),
            Step::Index(_) => None,
        }
    }
}

/// Path of object keys and array indices from the document root.
///
/// On the wire a key is a JSON string, an index a number, and a key-name
/// step `{"keyName": "..."}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyPath(Vec<Step>);

impl KeyPath {
    pub fn root() -> Self {
        KeyPath(Vec::new())
    }

    pub fn new(steps: Vec<Step>) -> Self {
        KeyPath(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<&Step> {
        self.0.last()
    }

    pub fn child(&self, step: Step) -> KeyPath {
        let mut steps = self.0.clone();
        steps.push(step);
        KeyPath(steps)
    }

    pub fn parent(&self) -> Option<KeyPath> {
        if self.0.is_empty() {
            None
        } else {
            Some(KeyPath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// A `KeyName` tail becomes `Key`, addressing the value instead of the name.
    pub fn to_value_path(&self) -> KeyPath {
        let mut steps = self.0.clone();
        if let Some(Step::KeyName(n)) = steps.last().cloned() {
            *steps.last_mut().unwrap() = Step::Key(n);
        }
        KeyPath(steps)
    }

    pub fn starts_with(&self, prefix: &KeyPath) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// `KeyName` is only allowed as the final step.
    pub fn is_valid(&self) -> bool {
        self.0.iter().rev().skip(1).all(|s| !matches!(s, Step::KeyName(_)))
    }
}

impl From<Vec<Step>> for KeyPath {
    fn from(steps: Vec<Step>) -> Self {
        KeyPath(steps)
    }
}

impl fmt::Display for KeyPath {
    /// JSON-pointer style, with a trailing `#key` marking a key-name step.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for step in &self.0 {
            match step {
                Step::Key(k) => write!(f, "/{}", escape_pointer(k))?,
                Step::Index(i) => write!(f, "/{i}")?,
                Step::KeyName(k) => write!(f, "/{}#key", escape_pointer(k))?,
            }
        }
        Ok(())
    }
}

fn escape_pointer(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

pub(crate) fn step_to_json(step: &Step) -> Value {
    match step {
        Step::Key(k) => Value::String(k.clone()),
        Step::Index(i) => Value::from(*i),
        Step::KeyName(k) => serde_json::json!({ "keyName": k }),
    }
}

pub(crate) fn step_from_json(v: &Value) -> Result<Step, String> {
    match v {
        Value::String(s) => Ok(Step::Key(s.clone())),
        Value::Number(n) => {
            n.as_u64().map(|i| Step::Index(i as usize)).ok_or_else(|| format!("bad index {n}"))
        }
        Value::Object(m) if m.len() == 1 => match m.get("keyName") {
            Some(Value::String(s)) => Ok(Step::KeyName(s.clone())),
            _ => Err("expected {\"keyName\": string}".into()),
        },
        other => Err(format!("invalid key path step {other}")),
    }
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        step_to_json(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Step {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        step_from_json(&Value::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for KeyPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for KeyPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let path = KeyPath(Vec::<Step>::deserialize(d)?);
        if !path.is_valid() {
            return Err(D::Error::custom("keyName may only be the last step"));
        }
        Ok(path)
    }
}
