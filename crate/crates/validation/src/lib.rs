//! Holds the `acceptance` test target. Run it with
//! `cargo test -p scalefree-validation --test acceptance`.
