use std::fmt;
use std::sync::Arc;

use crate::automata::{Alphabet, Nfa, Sym, Transducer, Word};

/// Index of a string variable in [`Problem::str_vars`].
pub type VarId = usize;
/// Index of an integer variable in [`Problem::int_vars`].
pub type IntVarId = usize;

/// Boolean combination of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula<L> {
    Leaf(L),
    And(Vec<Formula<L>>),
    Or(Vec<Formula<L>>),
    Not(Box<Formula<L>>),
}

impl<L> Formula<L> {
    /// Evaluates the formula given a truth value per leaf.
    pub fn eval(&self, leaf: &mut impl FnMut(&L) -> bool) -> bool {
        match self {
            Formula::Leaf(l) => leaf(l),
            Formula::And(fs) => fs.iter().all(|f| f.eval(leaf)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(leaf)),
            Formula::Not(f) => !f.eval(leaf),
        }
    }

    /// Three-valued evaluation: `None` leaves are unknown.
    pub fn eval_partial(&self, leaf: &mut impl FnMut(&L) -> Option<bool>) -> Option<bool> {
        match self {
            Formula::Leaf(l) => leaf(l),
            Formula::And(fs) => {
                let mut unknown = false;
                for f in fs {
                    match f.eval_partial(leaf) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Formula::Or(fs) => {
                let mut unknown = false;
                for f in fs {
                    match f.eval_partial(leaf) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
            Formula::Not(f) => f.eval_partial(leaf).map(|b| !b),
        }
    }

    /// Visits every leaf in left-to-right order.
    pub fn leaves<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Formula::Leaf(l) => out.push(l),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.leaves(out)),
            Formula::Not(f) => f.leaves(out),
        }
    }

    /// Rebuilds the formula with every leaf mapped.
    pub fn map<M>(&self, f: &mut impl FnMut(&L) -> M) -> Formula<M> {
        match self {
            Formula::Leaf(l) => Formula::Leaf(f(l)),
            Formula::And(fs) => Formula::And(fs.iter().map(|x| x.map(f)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|x| x.map(f)).collect()),
            Formula::Not(x) => Formula::Not(Box::new(x.map(f))),
        }
    }
}

/// Right-hand-side item of a concatenation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Var(VarId),
    Lit(Word),
}

/// Relational atom: the left-hand side is defined by the right-hand side.
#[derive(Clone, Debug)]
pub enum RelAtom {
    /// `lhs = rhs[0] . rhs[1] ...`; an empty `rhs` means `lhs` is empty.
    Concat { lhs: VarId, rhs: Vec<Item> },
    /// `lhs = NAME(arg)`, i.e. `(arg, lhs)` belongs to the transducer's relation.
    Trans {
        lhs: VarId,
        name: String,
        transducer: Arc<Transducer>,
        arg: VarId,
    },
}

impl RelAtom {
    pub fn lhs(&self) -> VarId {
        match self {
            RelAtom::Concat { lhs, .. } | RelAtom::Trans { lhs, .. } => *lhs,
        }
    }

    /// Right-hand-side variables in order of occurrence (with repetitions).
    pub fn rhs_vars(&self) -> Vec<VarId> {
        match self {
            RelAtom::Concat { rhs, .. } => rhs
                .iter()
                .filter_map(|i| match i {
                    Item::Var(v) => Some(*v),
                    Item::Lit(_) => None,
                })
                .collect(),
            RelAtom::Trans { arg, .. } => vec![*arg],
        }
    }
}

impl PartialEq for RelAtom {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (RelAtom::Concat { lhs: a, rhs: b }, RelAtom::Concat { lhs: c, rhs: d }) => {
                a == c && b == d
            }
            (
                RelAtom::Trans {
                    lhs: a,
                    name: n,
                    transducer: t,
                    arg: x,
                },
                RelAtom::Trans {
                    lhs: b,
                    name: m,
                    transducer: u,
                    arg: y,
                },
            ) => a == b && n == m && x == y && (Arc::ptr_eq(t, u) || **t == **u),
            _ => false,
        }
    }
}

/// Atomic regular constraint `var ∈ L(pattern)`.
#[derive(Clone, Debug)]
pub struct RegLeaf {
    pub var: VarId,
    /// Source pattern, kept for printing and diagnostics.
    pub pattern: String,
    pub nfa: Arc<Nfa>,
}

impl PartialEq for RegLeaf {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var && self.pattern == other.pattern
    }
}

/// Term of a linear integer expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntTerm {
    Var(IntVarId),
    Len(VarId),
    Count(VarId, Sym),
}

/// `Σ coef·term ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearAtom {
    pub terms: Vec<(i64, IntTerm)>,
    pub bound: i64,
}

/// String operand of a character term or an IndexOf haystack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrRef {
    Var(VarId),
    Lit(Word),
}

/// Integer operand that is either a variable or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntRef {
    Var(IntVarId),
    Const(i64),
}

/// `s[idx]`, 1-indexed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharTerm {
    pub s: StrRef,
    pub idx: IntRef,
}

/// `lhs = rhs` (or `lhs ≠ rhs` when `eq` is false).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharAtom {
    pub lhs: CharTerm,
    pub rhs: CharTerm,
    pub eq: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexOfSemantics {
    /// The target is the first position where the needle occurs.
    First,
    /// The target is any position where the needle occurs.
    Anywhere,
}

impl fmt::Display for IndexOfSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexOfSemantics::First => "first",
            IndexOfSemantics::Anywhere => "anywhere",
        })
    }
}

/// `target = IndexOf(needle, haystack)` with 1-indexed positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexOfAtom {
    pub target: IntRef,
    pub needle: Word,
    pub haystack: StrRef,
    pub semantics: IndexOfSemantics,
}

/// How the alphabet was declared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlphabetDecl {
    Websec,
    Explicit,
}

/// A parsed constraint problem. Every list is a conjunction.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub alphabet: Alphabet,
    pub alphabet_decl: AlphabetDecl,
    pub str_vars: Vec<String>,
    pub int_vars: Vec<String>,
    pub relational: Vec<RelAtom>,
    pub regular: Vec<Formula<RegLeaf>>,
    pub integer: Vec<Formula<LinearAtom>>,
    pub character: Vec<Formula<CharAtom>>,
    pub index_of: Vec<IndexOfAtom>,
    pub disequalities: Vec<(VarId, VarId)>,
    pub transducer_defs: Vec<(String, Arc<Transducer>)>,
}

impl Problem {
    /// An empty problem over `alphabet`.
    pub fn new(alphabet: Alphabet) -> Self {
        Problem {
            alphabet,
            alphabet_decl: AlphabetDecl::Explicit,
            str_vars: Vec::new(),
            int_vars: Vec::new(),
            relational: Vec::new(),
            regular: Vec::new(),
            integer: Vec::new(),
            character: Vec::new(),
            index_of: Vec::new(),
            disequalities: Vec::new(),
            transducer_defs: Vec::new(),
        }
    }

    pub fn add_str_var(&mut self, name: &str) -> VarId {
        self.str_vars.push(name.to_string());
        self.str_vars.len() - 1
    }

    pub fn add_int_var(&mut self, name: &str) -> IntVarId {
        self.int_vars.push(name.to_string());
        self.int_vars.len() - 1
    }

    pub fn str_var(&self, name: &str) -> Option<VarId> {
        self.str_vars.iter().position(|v| v == name)
    }

    pub fn int_var(&self, name: &str) -> Option<IntVarId> {
        self.int_vars.iter().position(|v| v == name)
    }

    /// True if the problem uses only concatenation, transducers and regular
    /// constraints.
    pub fn is_string_only(&self) -> bool {
        self.integer.is_empty()
            && self.character.is_empty()
            && self.index_of.is_empty()
            && self.disequalities.is_empty()
    }

    /// Adds the conjunct `var ∈ L(nfa)` with a display pattern.
    pub fn add_regular(&mut self, var: VarId, pattern: &str, nfa: Nfa) {
        self.regular.push(Formula::Leaf(RegLeaf {
            var,
            pattern: pattern.to_string(),
            nfa: Arc::new(nfa),
        }));
    }
}

/// Values for every declared variable.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Assignment {
    pub strs: Vec<Word>,
    pub ints: Vec<i64>,
}

impl Assignment {
    pub fn new(problem: &Problem) -> Self {
        Assignment {
            strs: vec![Vec::new(); problem.str_vars.len()],
            ints: vec![0; problem.int_vars.len()],
        }
    }
}
