//! Library half of the `cgt` command-line tool: file formats, report
//! plumbing, and the reproduction pipelines for the worked examples.

pub mod files;
pub mod report;
pub mod repro;
