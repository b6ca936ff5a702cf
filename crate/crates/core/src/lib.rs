pub mod frontend;
pub mod metrics;
pub mod extraction;
pub mod graph;
pub mod ilp;
pub mod solver;
pub mod oracle;
pub mod refactor;
