//! Finite automata and transducers over a small explicit alphabet.
//!
//! Every structure uses dense integer state ids and keeps its transition
//! lists sorted, so all derived automata and all extracted witnesses are
//! deterministic functions of their inputs.

mod alphabet;
mod multitrack;
mod nfa;
mod regex;
mod text;
mod transducer;

pub use alphabet::{words_of_len, words_up_to, Alphabet, Sym, Word};
pub use multitrack::MultiTrackAutomaton;
pub use nfa::{Nfa, StateId};
pub use regex::regex_parse;
pub use text::{parse_nfa_body, parse_transducer_body, write_transducer_body, TextError};
pub use transducer::Transducer;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("alphabet must not be empty")]
    EmptyAlphabet,
    #[error("alphabet has {0} letters, more than supported")]
    AlphabetTooLarge(usize),
    #[error("letter {0:?} appears twice in the alphabet")]
    DuplicateLetter(char),
    #[error("character {0:?} is not in the alphabet")]
    LetterOutsideAlphabet(char),
    #[error("automata are defined over different alphabets")]
    AlphabetMismatch,
    #[error("letter index {0} is outside the alphabet")]
    UnknownSymbol(usize),
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("regex syntax error at offset {pos}: {msg}")]
    RegexSyntax { pos: usize, msg: String },
    #[error("automaton exceeds the state limit of {0}")]
    TooManyStates(usize),
}
