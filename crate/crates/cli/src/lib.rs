//! Library half of the `prolate` command line: configuration, file formats,
//! and task runners. The binary is a thin argument-parsing shell over this.

pub mod config;
pub mod error;
pub mod io;
pub mod tasks;
