//! Experiment harness for the `superiorization` crate: seeded problem
//! generators, JSON run configurations, batch experiments and the
//! `superior` command line.

pub mod app;
pub mod config;
pub mod experiment;
pub mod problem;

pub use app::cli_main;
