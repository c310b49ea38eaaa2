//! Command-line pipeline around the `shapewarp` library: file formats,
//! synthetic object families, model persistence, end-to-end commands and a
//! desk-scale placement benchmark.

pub mod benchmark;
pub mod commands;
pub mod errors;
pub mod io;
pub mod scenes;
pub mod synth;
