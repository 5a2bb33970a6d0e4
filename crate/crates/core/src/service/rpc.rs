use serde::Serialize;
use serde_json::{json, Value};

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
pub const DOCUMENT_NOT_FOUND: i64 = -32001;
pub const DUPLICATE_DOCUMENT: i64 = -32002;
pub const STALE_VERSION: i64 = -32003;
pub const SCHEMA_REF: i64 = -32004;
pub const EXPIRED_ACTION: i64 = -32005;
pub const EDIT_CONFLICT: i64 = -32006;
pub const TRACE_STALE: i64 = -32007;
pub const TRACERY: i64 = -32008;

/// JSON-RPC error object. `data.kind` names the failure in camelCase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RpcError {
    pub code: i64,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl RpcError {
    pub fn new(code: i64, kind: &str, message: impl Into<String>) -> Self {
        RpcError { code, message: message.into(), data: Some(json!({ "kind": kind })) }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        if let Some(Value::Object(m)) = &mut self.data {
            m.insert(key.to_owned(), value.into());
        }
        self
    }

    pub fn kind(&self) -> Option<&str> {
        self.data.as_ref()?.get("kind")?.as_str()
    }

    pub fn invalid_params(message: impl Into<String>) -> Self {
        RpcError::new(INVALID_PARAMS, "invalidParams", message)
    }

    pub fn method_not_found(method: &str) -> Self {
        RpcError::new(METHOD_NOT_FOUND, "methodNotFound", format!("unknown method {method:?}")).with("method", method)
    }

    pub fn document_not_found(doc_id: &str) -> Self {
        RpcError::new(DOCUMENT_NOT_FOUND, "documentNotFound", format!("no open document {doc_id:?}"))
            .with("docId", doc_id)
    }

    pub fn stale_version(base: u64, current: u64) -> Self {
        RpcError::new(STALE_VERSION, "staleVersion", format!("base version {base} is not current version {current}"))
            .with("currentVersion", current)
    }
}

pub fn response(id: Value, result: Result<Value, RpcError>) -> Value {
    match result {
        Ok(result) => json!({ "jsonrpc": "2.0", "id": id, "result": result }),
        Err(error) => json!({ "jsonrpc": "2.0", "id": id, "error": error }),
    }
}
