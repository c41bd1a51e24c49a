//! Command-line front end and JSON service for the `scalefree` toolkit.
//!
//! Both share the output functions in [`output`], so the CLI and the
//! service produce the same bytes for the same input.

pub mod cli;
pub mod output;
pub mod service;

use scalefree::ErrorKind;

/// Process exit status for an error: 1 validation, 2 domain, 3 numeric.
/// Anything that is not a toolkit error (unreadable file, bad JSON) counts
/// as a validation failure.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<scalefree::Error>())
    {
        Some(e) => match e.kind() {
            ErrorKind::Validation => 1,
            ErrorKind::Domain => 2,
            ErrorKind::Numeric => 3,
        },
        None => 1,
    }
}
