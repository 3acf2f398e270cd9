//! Configured sweeps comparing the brute force, the table and the hyperbola
//! integrals, plus the factor and operator suites.

pub mod config;
pub mod corpus;
pub mod report;
pub mod suites;

pub use config::{Case, JobConfig, Suite};
pub use report::{Record, Report};
pub use suites::run;
