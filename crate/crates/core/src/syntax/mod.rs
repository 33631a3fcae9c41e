//! Module files: lexing, parsing and printing.

pub mod lexer;
pub mod parser;
pub mod printer;

pub use lexer::lex_fragment;
pub use parser::{numeral, parse_module, Module, TermParser};
pub use printer::{print_module, print_theory, show, show_pretty, ModuleOut};
