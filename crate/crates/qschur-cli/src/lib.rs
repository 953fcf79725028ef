//! Library surface of the command-line tool: file formats, the seeded
//! problem generator, and the subcommand entry points. The binary in
//! `main.rs` is a thin argument-parsing wrapper around these.

pub mod commands;
pub mod gen;
pub mod io;
