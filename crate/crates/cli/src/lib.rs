//! Configuration, experiment drivers and CSV output for the `ap-kinetic`
//! command-line tool.

pub mod config;
pub mod experiments;
pub mod output;
