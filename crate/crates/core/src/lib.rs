//! A Krivine machine extended with bit-level input and output, together with
//! tools to reason about its processes: a labeled transition system with
//! bounded weak bisimulation, a combinator library that compiles numeral
//! functions to I/O processes, and desk-scale classical realizability.

pub mod bits;
pub mod combinators;
pub mod equivalence;
pub mod gen;
pub mod machine;
pub mod realizability;
pub mod scenario;
pub mod syntax;
pub mod verdict;

pub use verdict::{Limit, Verdict};
