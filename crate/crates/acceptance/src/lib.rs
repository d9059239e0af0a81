//! Holder crate for the `acceptance` test target, which runs after every
//! other test in the workspace. Run it alone with
//! `cargo test -p bmhull-validation --test acceptance`.
