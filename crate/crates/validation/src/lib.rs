//! Acceptance checks for `rdw-core`.
//!
//! The checks live in `tests/acceptance.rs` and run with
//! `cargo test -p rdw-validation --test acceptance`. They print one
//! pass/fail line per criterion and exit non-zero if any criterion fails.
//! They sit in their own package so that a failing criterion does not stop
//! cargo from running the test binaries of the other crates.
