//! Holds no code. The checks live in `tests/acceptance.rs`; run them with
//! `cargo test -p aiaudit-acceptance`.
