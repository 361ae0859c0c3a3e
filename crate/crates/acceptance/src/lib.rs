//! Acceptance suite for `resfi`; see `tests/acceptance.rs`.
