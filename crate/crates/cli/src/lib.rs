//! Command-line harness: matrix I/O, seeded runs of every algorithm and
//! JSON-lines reports.

pub mod acceptance;
pub mod commands;
pub mod io;
pub mod report;
