#![allow(clippy::needless_range_loop)]
//! Front end for the `ksmv` solvers: configuration, commands and reports.

pub mod commands;
pub mod config;
pub mod report;

use ksmv::Error;

/// 1 for a failed scientific check or a numerical breakdown, 2 for bad
/// input.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Usage(_) | Error::Io(_) | Error::Csv(_) => 2,
        Error::Instability { .. }
        | Error::NoHorizon(_)
        | Error::Divergence { .. }
        | Error::Numeric(_) => 1,
    }
}
