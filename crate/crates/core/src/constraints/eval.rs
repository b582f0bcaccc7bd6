//! Ground evaluation of problems under a concrete assignment.

use crate::automata::{Sym, Word};

use super::ast::*;

fn str_of<'a>(s: &'a StrRef, asg: &'a Assignment) -> &'a [Sym] {
    match s {
        StrRef::Var(v) => &asg.strs[*v],
        StrRef::Lit(w) => w,
    }
}

fn int_of(i: IntRef, asg: &Assignment) -> i64 {
    match i {
        IntRef::Var(u) => asg.ints[u],
        IntRef::Const(c) => c,
    }
}

/// Value of an integer term.
pub fn term_value(t: &IntTerm, asg: &Assignment) -> i64 {
    match *t {
        IntTerm::Var(u) => asg.ints[u],
        IntTerm::Len(x) => asg.strs[x].len() as i64,
        IntTerm::Count(x, a) => asg.strs[x].iter().filter(|&&s| s == a).count() as i64,
    }
}

/// Truth of `Σ coef·term ≤ bound`, computed without overflow.
pub fn linear_holds(atom: &LinearAtom, asg: &Assignment) -> bool {
    let sum: i128 = atom
        .terms
        .iter()
        .map(|(c, t)| *c as i128 * term_value(t, asg) as i128)
        .sum();
    sum <= atom.bound as i128
}

/// The letter at a 1-indexed position, or `None` if out of range.
pub fn char_value(t: &CharTerm, asg: &Assignment) -> Option<Sym> {
    let s = str_of(&t.s, asg);
    let i = int_of(t.idx, asg);
    if i >= 1 && (i as u64) <= s.len() as u64 {
        Some(s[i as usize - 1])
    } else {
        None
    }
}

/// Evaluates a character formula. Any out-of-range index anywhere in the
/// formula makes it false.
pub fn char_formula_holds(f: &Formula<CharAtom>, asg: &Assignment) -> bool {
    let mut leaves = Vec::new();
    f.leaves(&mut leaves);
    let in_range = leaves
        .iter()
        .all(|a| char_value(&a.lhs, asg).is_some() && char_value(&a.rhs, asg).is_some());
    in_range && f.eval(&mut |a| (char_value(&a.lhs, asg) == char_value(&a.rhs, asg)) == a.eq)
}

/// 1-indexed start positions of all occurrences of `needle` in `hay`.
pub fn occurrences(needle: &[Sym], hay: &[Sym]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    (0..=hay.len() - needle.len())
        .filter(|&i| hay[i..i + needle.len()] == *needle)
        .map(|i| i + 1)
        .collect()
}

pub fn index_of_holds(atom: &IndexOfAtom, asg: &Assignment) -> bool {
    let hay = str_of(&atom.haystack, asg);
    let target = int_of(atom.target, asg);
    let occ = occurrences(&atom.needle, hay);
    match atom.semantics {
        IndexOfSemantics::First => occ.first().is_some_and(|&p| p as i64 == target),
        IndexOfSemantics::Anywhere => occ.iter().any(|&p| p as i64 == target),
    }
}

fn concat_value(rhs: &[Item], asg: &Assignment) -> Word {
    let mut out = Vec::new();
    for it in rhs {
        match it {
            Item::Var(v) => out.extend_from_slice(&asg.strs[*v]),
            Item::Lit(w) => out.extend_from_slice(w),
        }
    }
    out
}

pub fn relational_holds(atom: &RelAtom, asg: &Assignment) -> bool {
    match atom {
        RelAtom::Concat { lhs, rhs } => asg.strs[*lhs] == concat_value(rhs, asg),
        RelAtom::Trans {
            lhs,
            transducer,
            arg,
            ..
        } => transducer.accepts(&asg.strs[*arg], &asg.strs[*lhs]),
    }
}

pub fn regular_holds(f: &Formula<RegLeaf>, asg: &Assignment) -> bool {
    f.eval(&mut |l| l.nfa.accepts(&asg.strs[l.var]))
}

/// True iff the assignment satisfies every conjunct of the problem.
///
/// The assignment must be total on the declared variables; negative integer
/// values never satisfy a problem.
pub fn evaluate(problem: &Problem, asg: &Assignment) -> bool {
    if asg.strs.len() != problem.str_vars.len() || asg.ints.len() != problem.int_vars.len() {
        return false;
    }
    if asg.ints.iter().any(|&i| i < 0) {
        return false;
    }
    let k = problem.alphabet.len();
    if asg.strs.iter().flatten().any(|s| s.index() >= k) {
        return false;
    }
    problem.relational.iter().all(|a| relational_holds(a, asg))
        && problem.regular.iter().all(|f| regular_holds(f, asg))
        && problem
            .integer
            .iter()
            .all(|f| f.eval(&mut |a| linear_holds(a, asg)))
        && problem.character.iter().all(|f| char_formula_holds(f, asg))
        && problem.index_of.iter().all(|a| index_of_holds(a, asg))
        && problem
            .disequalities
            .iter()
            .all(|&(x, y)| asg.strs[x] != asg.strs[y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Alphabet;

    fn setup() -> (Problem, VarId, VarId) {
        let al = Alphabet::from_str_chars("ab").unwrap();
        let mut p = Problem::new(al);
        let x = p.add_str_var("x");
        let y = p.add_str_var("y");
        p.relational.push(RelAtom::Concat {
            lhs: x,
            rhs: vec![Item::Var(y), Item::Var(y)],
        });
        (p, x, y)
    }

    #[test]
    fn concat_evaluation() {
        let (p, x, y) = setup();
        let enc = |s: &str| p.alphabet.encode(s).unwrap();
        let mut asg = Assignment::new(&p);
        asg.strs[y] = enc("a");
        asg.strs[x] = enc("aa");
        assert!(evaluate(&p, &asg));
        asg.strs[x] = enc("ab");
        assert!(!evaluate(&p, &asg));
    }

    #[test]
    fn char_safety_rule() {
        let (mut p, x, _) = setup();
        let u = p.add_int_var("u");
        let a = p.alphabet.sym('a').unwrap();
        p.character
            .push(Formula::Not(Box::new(Formula::Leaf(CharAtom {
                lhs: CharTerm {
                    s: StrRef::Var(x),
                    idx: IntRef::Var(u),
                },
                rhs: CharTerm {
                    s: StrRef::Lit(vec![a]),
                    idx: IntRef::Const(1),
                },
                eq: true,
            }))));
        let mut asg = Assignment::new(&p);
        // x = ε: the index is out of range, so even the negation is false.
        asg.ints[u] = 1;
        assert!(!evaluate(&p, &asg));
        asg.strs = vec![vec![Sym(1), Sym(1)], vec![Sym(1)]];
        assert!(evaluate(&p, &asg));
        asg.ints[u] = 0;
        assert!(!evaluate(&p, &asg));
    }

    #[test]
    fn index_of_semantics() {
        let al = Alphabet::from_str_chars("abc").unwrap();
        let hay = al.encode("abab").unwrap();
        let needle = al.encode("ab").unwrap();
        assert_eq!(occurrences(&needle, &hay), vec![1, 3]);
        let mut p = Problem::new(al.clone());
        let x = p.add_str_var("x");
        let u = p.add_int_var("u");
        p.index_of.push(IndexOfAtom {
            target: IntRef::Var(u),
            needle,
            haystack: StrRef::Var(x),
            semantics: IndexOfSemantics::First,
        });
        let mut asg = Assignment::new(&p);
        asg.strs[x] = hay;
        asg.ints[u] = 3;
        assert!(!evaluate(&p, &asg));
        p.index_of[0].semantics = IndexOfSemantics::Anywhere;
        assert!(evaluate(&p, &asg));
    }
}
