//! Hosts published specs. Each publish is an immutable version; viewers fetch
//! the reference render, the virtual layer and the anchor payload by id.

mod api;
mod store;

pub use api::{router, serve};
pub use store::{check_spec, HubError, Meta, Published, Receipt, Store, VersionMeta};
