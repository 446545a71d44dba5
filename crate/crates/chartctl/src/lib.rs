//! Command-line front end for `isoflat`: config handling, commands, output files and
//! the SVG heatmap. The binary in `main.rs` only parses flags and maps results to
//! exit codes (0 all checks pass, 1 a check failed, 2 usage or hypothesis error).

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;
pub mod render;
