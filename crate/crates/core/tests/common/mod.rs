//! Shared helpers for the integration tests: brute-force reference
//! implementations, random instance generators and end-to-end scene runs.
#![allow(dead_code)]

pub mod oracles;
pub mod scene;
