//! Instance files, constraint systems, random instances and the `isect`
//! command line on top of [`isect_core`].

pub mod app;
pub mod constraints;
pub mod generate;
pub mod instance;
pub mod plans;
pub mod report;

pub use app::{run, Cli, Outcome};
pub use instance::InstanceFile;
