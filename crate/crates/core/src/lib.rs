//! Autotelic goal-conditioned learning in a kitchen text world.

pub mod curriculum;
pub mod goals;
pub mod orchestrator;
pub mod qpolicy;
pub mod replay;
pub mod report;
pub mod worldsim;
