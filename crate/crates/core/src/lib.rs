//! Satisfiability of straight-line string constraints built from
//! concatenation, finite-state transducers and regular constraints, with
//! length, letter-count, character, IndexOf and disequality extensions.

pub mod automata;
pub mod constraints;
pub mod extensions;
pub mod oracle;
pub mod par;
pub mod solver;
pub mod straightline;
pub mod websec;
