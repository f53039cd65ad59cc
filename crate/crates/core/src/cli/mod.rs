//! Verification commands and their reports, shared by the binary and the tests.

pub mod commands;
pub mod report;

pub use report::{Check, Report, Status};
