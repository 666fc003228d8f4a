//! The declarative document: model types, parsing, schema checks and the
//! canonical form used for content addressing.

mod canonical;
mod model;
mod parse;
mod schema;

pub use canonical::{canonicalize, format_number, spec_to_json, to_canonical_string, transform_json, write_canonical};
pub use model::*;
pub use parse::{parse_spec, ParseError};
pub use schema::{validate_schema, IssueKind, SchemaIssue};
