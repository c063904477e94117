//! Text front end: expression parsing, JSON documents and the command line.

pub mod cli;
pub mod json;
pub mod parse;

pub use cli::run_cli;
pub use parse::{format_poly, parse_poly, ParseError};
