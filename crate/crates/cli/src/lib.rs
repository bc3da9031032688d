//! Input format, command dispatch and reports for the `logres` binary.

pub mod commands;
pub mod document;
pub mod error;
mod lexer;
pub mod parser;
pub mod print;
pub mod resolve;

pub use commands::{run, Command, Options, Output, Report};
pub use document::{Declaration, Document, Item, Kind};
pub use error::CliError;
pub use parser::{parse, parse_with, ParseError};
pub use print::print;
pub use resolve::Workspace;
