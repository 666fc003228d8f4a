//! Compile a single declarative spec into a static layer and a virtual (AR)
//! layer, and check that the virtual layer leaves the static one unchanged.

pub mod anchor;
pub mod artifacts;
pub mod augment;
pub mod dataflow;
pub mod encode;
pub mod expr;
pub mod scale;
pub mod scene;
pub mod spec;
pub mod svg;
pub mod validator;
pub mod value;
