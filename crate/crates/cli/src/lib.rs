//! Experiment configuration, file formats and scenario drivers for the
//! `rotnls` command line tool.

pub mod config;
pub mod experiments;
pub mod figures;
pub mod io;
