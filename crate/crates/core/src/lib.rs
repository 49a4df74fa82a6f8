pub mod calculus;
pub mod cli;
pub mod config;
pub mod expr;
pub mod feasibility;
pub mod model;
pub mod oracle;
pub mod polyhedral;
pub mod stationarity;
