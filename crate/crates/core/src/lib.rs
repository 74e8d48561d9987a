pub mod corpus;
pub mod harness;
pub mod lse;
pub mod metrics;
pub mod modeling;
pub mod syntax;
