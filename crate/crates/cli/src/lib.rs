//! File formats shared by the `incompat` binary and its tests.

pub mod format;
