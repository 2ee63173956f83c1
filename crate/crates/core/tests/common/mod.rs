//! Generators and brute-force oracles shared by the property suites and the
//! acceptance run.

#![allow(dead_code)]

pub mod actions;
pub mod effects;
pub mod queries;
