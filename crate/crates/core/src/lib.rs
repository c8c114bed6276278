pub mod cli;
pub mod detect;
pub mod poset;
pub mod plot;
pub mod predicates;
pub mod rl;
pub mod spaces;
pub mod stl;
pub mod trace;
