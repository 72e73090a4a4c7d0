//! File formats and the batch front end for `gtrs-core`.
//!
//! Problems are read from JSON ([`problem_file`]), every command produces a
//! JSON [`report::Report`], and the cone program can be written to and read
//! from a line-oriented text format ([`conic`]).

pub mod conic;
pub mod problem_file;
pub mod report;
pub mod run;

pub use conic::{read_conic, write_conic, ConicError, Export};
pub use problem_file::{Kind, ProblemFile, ProblemFileError};
pub use report::Report;
pub use run::{run_path, run_text, Command, Output, RunError, Settings};
