//! Property tests over the public API.

mod algebra;
mod structure;
