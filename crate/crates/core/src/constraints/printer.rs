//! Pretty-printer producing text that parses back to an equal problem.

use std::fmt::Write as _;

use crate::automata::{write_transducer_body, Alphabet, Sym};

use super::ast::*;

/// Quotes `s` as a string literal of the problem format.
pub fn quote_str(s: &str, delim: char) -> String {
    let mut out = String::new();
    out.push(delim);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c == delim => {
                out.push('\\');
                out.push(c);
            }
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push(delim);
    out
}

fn quote_word(al: &Alphabet, w: &[Sym]) -> String {
    quote_str(&al.decode(w), '"')
}

fn formula<L>(f: &Formula<L>, out: &mut String, leaf: &dyn Fn(&L, &mut String)) {
    match f {
        Formula::Leaf(l) => {
            out.push('(');
            leaf(l, out);
            out.push(')');
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push_str(if matches!(f, Formula::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for g in fs {
                out.push(' ');
                formula(g, out, leaf);
            }
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            formula(g, out, leaf);
            out.push(')');
        }
    }
}

fn str_ref(p: &Problem, s: &StrRef) -> String {
    match s {
        StrRef::Var(v) => p.str_vars[*v].clone(),
        StrRef::Lit(w) => quote_word(&p.alphabet, w),
    }
}

fn int_ref(p: &Problem, i: IntRef) -> String {
    match i {
        IntRef::Var(u) => p.int_vars[u].clone(),
        IntRef::Const(c) => c.to_string(),
    }
}

fn int_term(p: &Problem, t: &IntTerm) -> String {
    match *t {
        IntTerm::Var(u) => p.int_vars[u].clone(),
        IntTerm::Len(x) => format!("len({})", p.str_vars[x]),
        IntTerm::Count(x, a) => format!(
            "count({}, {})",
            p.str_vars[x],
            quote_str(&p.alphabet.char_of(a).to_string(), '\'')
        ),
    }
}

fn linear(p: &Problem, a: &LinearAtom, out: &mut String) {
    out.push_str("<= ");
    if a.terms.is_empty() {
        out.push('0');
    }
    for (i, (c, t)) in a.terms.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        let _ = write!(out, "{c}*{}", int_term(p, t));
    }
    let _ = write!(out, " {}", a.bound);
}

fn char_term(p: &Problem, t: &CharTerm) -> String {
    format!("{}[{}]", str_ref(p, &t.s), int_ref(p, t.idx))
}

/// Renders the problem in the textual format.
pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    match p.alphabet_decl {
        AlphabetDecl::Websec => out.push_str("alphabet websec\n"),
        AlphabetDecl::Explicit => {
            let chars: String = p.alphabet.chars().iter().collect();
            let _ = writeln!(out, "alphabet {}", quote_str(&chars, '"'));
        }
    }
    if !p.str_vars.is_empty() {
        let _ = writeln!(out, "str {}", p.str_vars.join(" "));
    }
    if !p.int_vars.is_empty() {
        let _ = writeln!(out, "int {}", p.int_vars.join(" "));
    }
    for (name, t) in &p.transducer_defs {
        let body = write_transducer_body(t).replace('\n', "\n ");
        let _ = writeln!(out, "transducer {name} {{\n  {body}\n}}");
    }
    for atom in &p.relational {
        match atom {
            RelAtom::Concat { lhs, rhs } => {
                let items: Vec<String> = rhs
                    .iter()
                    .map(|i| match i {
                        Item::Var(v) => p.str_vars[*v].clone(),
                        Item::Lit(w) => quote_word(&p.alphabet, w),
                    })
                    .collect();
                let rhs = if items.is_empty() {
                    "\"\"".to_string()
                } else {
                    items.join(" . ")
                };
                let _ = writeln!(out, "{} = {}", p.str_vars[*lhs], rhs);
            }
            RelAtom::Trans { lhs, name, arg, .. } => {
                let _ = writeln!(out, "{} = {}({})", p.str_vars[*lhs], name, p.str_vars[*arg]);
            }
        }
    }
    for f in &p.regular {
        out.push_str("regc ");
        formula(f, &mut out, &|l: &RegLeaf, o: &mut String| {
            let _ = write!(o, "in {} /{}/", p.str_vars[l.var], l.pattern);
        });
        out.push('\n');
    }
    for f in &p.integer {
        out.push_str("intc ");
        formula(f, &mut out, &|a: &LinearAtom, o: &mut String| {
            linear(p, a, o)
        });
        out.push('\n');
    }
    for f in &p.character {
        out.push_str("charc ");
        formula(f, &mut out, &|a: &CharAtom, o: &mut String| {
            let _ = write!(
                o,
                "{} {} {}",
                if a.eq { "=" } else { "!=" },
                char_term(p, &a.lhs),
                char_term(p, &a.rhs)
            );
        });
        out.push('\n');
    }
    for a in &p.index_of {
        let _ = writeln!(
            out,
            "{} = indexof({}, {}, {})",
            int_ref(p, a.target),
            quote_word(&p.alphabet, &a.needle),
            str_ref(p, &a.haystack),
            a.semantics
        );
    }
    for &(x, y) in &p.disequalities {
        let _ = writeln!(out, "{} != {}", p.str_vars[x], p.str_vars[y]);
    }
    out
}
