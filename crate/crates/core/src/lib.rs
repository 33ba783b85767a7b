//! Compile durative-action temporal planning problems into PDDL+ (processes,
//! events and instantaneous actions), validate plans under both semantics,
//! translate plans in both directions and search tiny instances exhaustively.

pub mod bridge;
pub mod cli;
pub mod compiler;
pub mod model;
pub mod pddl;
pub mod plus;
pub mod solver;
pub mod temporal;
