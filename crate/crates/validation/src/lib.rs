//! Holds the `acceptance` test target only; run it with
//! `cargo test -p ipod-validation --test acceptance`.
