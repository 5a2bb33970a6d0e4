//! Headless projectional editing for JSON-based DSLs.
//!
//! The engine parses JSONC into a lossless syntax tree ([`jsonc`]), computes
//! which JSON Schema subschemas apply at every node ([`schema`]), compiles
//! structural edits into formatting-preserving text edits ([`edit`]), builds
//! structure-editor menus and in-situ schema search results ([`menu`]),
//! resolves user-registered views onto tree anchors ([`projection`]) and
//! keeps Tracery grammars in sync with their generated text ([`tracery`]).
//! [`service`] wraps all of it in a JSON-RPC 2.0 session layer.

pub mod jsonc;
pub mod menu;
pub mod projection;
pub mod edit;
pub mod schema;
pub mod tracery;
pub mod service;

pub use jsonc::{KeyPath, Node, NodeKind, Step, SyntaxTree, TextRange};
