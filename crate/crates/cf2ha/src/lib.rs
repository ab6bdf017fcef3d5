//! Bidimensional context-free hedge automata (CF²HA).
//!
//! The crate provides the automaton model and its HA/CFHA fragments, the
//! membership and emptiness procedures, and two exact forward rewrite closure
//! constructions: one for linear inverse-monadic 1-childvar hedge rewriting
//! systems and one for parameterized update rules (`ren`, `ac`, `as`, `ap`,
//! `rpl`, `del`). A brute-force rewriting engine in [`oracle`] serves as the
//! independent reference for both constructions.

mod intern;

pub mod hedge;
pub mod automata;
pub mod decision;
pub mod closure_monadic;
pub mod closure_update;
pub mod oracle;
pub mod cli;
