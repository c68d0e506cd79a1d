//! File formats, run configuration, and the inverse pipeline behind the
//! `magnomech` command-line tool. The physics lives in `magnomech_core`;
//! this crate owns everything that touches the filesystem.

pub mod config;
pub mod io;
pub mod manifest;
pub mod pipeline;
