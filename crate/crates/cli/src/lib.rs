//! Experiment driver for the `ppevo-core` simulators: replicate orchestration,
//! CSV and JSON artifacts, event-log replay and TOML recipes.

pub mod cli;
pub mod experiments;
pub mod output;
pub mod pool;
pub mod recipe;
pub mod replay;
