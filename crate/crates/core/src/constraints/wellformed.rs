//! Structural checks for problems assembled through the library API.
//!
//! The parser already rejects most of these conditions; problems built by
//! hand can still violate them.

use super::ast::*;
use crate::websec::BUILTIN_NAMES;

/// Returns one human-readable diagnostic per problem found.
pub fn problem_wellformed(p: &Problem) -> Vec<String> {
    let mut out = Vec::new();
    if p.alphabet.is_empty() {
        out.push("alphabet is empty".to_string());
    }
    let ns = p.str_vars.len();
    let ni = p.int_vars.len();
    let k = p.alphabet.len();
    let str_ok = |v: VarId| v < ns;
    let int_ok = |u: IntVarId| u < ni;
    let word_ok = |w: &[crate::automata::Sym]| w.iter().all(|s| s.index() < k);
    let str_ref_ok = |s: &StrRef| match s {
        StrRef::Var(v) => str_ok(*v),
        StrRef::Lit(w) => word_ok(w),
    };
    let int_ref_ok = |i: IntRef| match i {
        IntRef::Var(u) => int_ok(u),
        IntRef::Const(c) => c >= 1,
    };

    for (i, a) in p.relational.iter().enumerate() {
        let ok = match a {
            RelAtom::Concat { lhs, rhs } => {
                str_ok(*lhs)
                    && rhs.iter().all(|it| match it {
                        Item::Var(v) => str_ok(*v),
                        Item::Lit(w) => word_ok(w),
                    })
            }
            RelAtom::Trans {
                lhs,
                arg,
                transducer,
                ..
            } => {
                if !transducer.alphabet().same_as(&p.alphabet) {
                    out.push(format!(
                        "relational atom {i}: transducer uses a different alphabet"
                    ));
                }
                str_ok(*lhs) && str_ok(*arg)
            }
        };
        if !ok {
            out.push(format!(
                "relational atom {i}: undeclared variable or letter"
            ));
        }
    }
    for (i, f) in p.regular.iter().enumerate() {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        for l in leaves {
            if !str_ok(l.var) {
                out.push(format!("regular constraint {i}: undeclared variable"));
            }
            if !l.nfa.alphabet().same_as(&p.alphabet) {
                out.push(format!(
                    "regular constraint {i}: automaton uses a different alphabet"
                ));
            }
        }
    }
    for (i, f) in p.integer.iter().enumerate() {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        for a in leaves {
            for (_, t) in &a.terms {
                let ok = match *t {
                    IntTerm::Var(u) => int_ok(u),
                    IntTerm::Len(x) => str_ok(x),
                    IntTerm::Count(x, c) => str_ok(x) && c.index() < k,
                };
                if !ok {
                    out.push(format!(
                        "integer constraint {i}: undeclared variable or letter"
                    ));
                }
            }
        }
    }
    for (i, f) in p.character.iter().enumerate() {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        for a in leaves {
            for t in [&a.lhs, &a.rhs] {
                if !str_ref_ok(&t.s) || !int_ref_ok(t.idx) {
                    out.push(format!(
                        "character constraint {i}: undeclared variable, letter or position below 1"
                    ));
                }
            }
        }
    }
    for (i, a) in p.index_of.iter().enumerate() {
        let target_ok = match a.target {
            IntRef::Var(u) => int_ok(u),
            IntRef::Const(c) => c >= 0,
        };
        if !target_ok || !str_ref_ok(&a.haystack) || !word_ok(&a.needle) {
            out.push(format!(
                "indexof constraint {i}: undeclared variable or letter"
            ));
        }
        if a.needle.is_empty() {
            out.push(format!("indexof constraint {i}: empty needle"));
        }
    }
    for (i, &(x, y)) in p.disequalities.iter().enumerate() {
        if !str_ok(x) || !str_ok(y) {
            out.push(format!("disequality {i}: undeclared variable"));
        }
    }
    for (i, (name, _)) in p.transducer_defs.iter().enumerate() {
        if p.transducer_defs[..i].iter().any(|(n, _)| n == name) {
            out.push(format!("transducer `{name}` is defined more than once"));
        } else if BUILTIN_NAMES.contains(&name.as_str()) {
            out.push(format!("transducer `{name}` shadows a builtin"));
        }
    }
    for (i, name) in p.str_vars.iter().chain(&p.int_vars).enumerate() {
        if p.str_vars
            .iter()
            .chain(&p.int_vars)
            .take(i)
            .any(|n| n == name)
        {
            out.push(format!("variable `{name}` is declared more than once"));
        }
    }
    out
}
