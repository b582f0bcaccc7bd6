//! Constraint syntax tree, problem file parser and printer, and the ground
//! evaluator used to verify models.

mod ast;
mod eval;
mod parser;
mod printer;
mod wellformed;

pub use ast::*;
pub use eval::{
    char_formula_holds, char_value, evaluate, index_of_holds, linear_holds, occurrences,
    regular_holds, relational_holds, term_value,
};
pub use parser::{
    encode_letter_set, parse_problem, regex_escape, ParseError, ParseErrorKind, KEYWORDS,
};
pub use printer::{print_problem, quote_str};
pub use wellformed::problem_wellformed;

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
alphabet "ab<c"
str x y z w
int u v
transducer T {
  states 2; initial 0; final 1
  t 0 a/b 1; t 1 ~/c 1
}
y = T(x)
z = y . "ab" . x
w = erase[<](z)
regc (and (in x /(a|b)*/) (not (in z /a*/)))
intc (< 3*len(x) - count(z, 'a') + u 10)
intc (= v 2)
charc (or (= x[u] "ab"[2]) (!= 'c' z[3]))
u = indexof("ab", z, anywhere)
2 = indexof("b", "ab")
x != y
y = "ab" . "c"
"#;

    #[test]
    fn parses_sample() {
        let p = parse_problem(SAMPLE).unwrap();
        assert_eq!(p.str_vars, vec!["x", "y", "z", "w"]);
        assert_eq!(p.relational.len(), 3);
        assert_eq!(p.regular.len(), 2);
        assert_eq!(p.integer.len(), 2);
        match &p.integer[0] {
            Formula::Leaf(a) => {
                assert_eq!(a.bound, 9);
                assert_eq!(a.terms.len(), 3);
                assert_eq!(a.terms[1].0, -1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(p.index_of.len(), 2);
        assert_eq!(p.disequalities, vec![(0, 1)]);
        assert!(problem_wellformed(&p).is_empty());
    }

    #[test]
    fn print_roundtrip() {
        let p = parse_problem(SAMPLE).unwrap();
        let text = print_problem(&p);
        let q = parse_problem(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(p, q);
        assert_eq!(print_problem(&q), text);
    }

    #[test]
    fn error_kinds_and_positions() {
        let e = parse_problem("alphabet \"ab\"\nstr x\ny = x").unwrap_err();
        assert_eq!(
            (e.line, e.col, e.kind),
            (3, 1, ParseErrorKind::UndeclaredVariable)
        );
        let e = parse_problem("alphabet \"ab\"\nstr x y\ny = F(x)").unwrap_err();
        assert_eq!(
            (e.line, e.col, e.kind),
            (3, 5, ParseErrorKind::UnknownTransducer)
        );
        let e = parse_problem("alphabet \"ab\"\nstr x\nregc (in x /ac/)").unwrap_err();
        assert_eq!(
            (e.line, e.col, e.kind),
            (3, 14, ParseErrorKind::OutsideAlphabet)
        );
        let e = parse_problem("alphabet \"ab\"\nstr x y\ny = x . \"c\"").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::OutsideAlphabet);
        let e = parse_problem("alphabet \"ab\"\nstr x\nregc (in x /a/").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn declarations_only_and_self_reference() {
        let p = parse_problem("alphabet \"ab\"\nstr x y\nint u").unwrap();
        assert!(p.relational.is_empty());
        let p = parse_problem("alphabet \"ab\"\nstr x\nx = identity(x)").unwrap();
        assert_eq!(p.relational.len(), 1);
    }

    #[test]
    fn wellformed_diagnostics() {
        let mut p = parse_problem("alphabet \"ab\"\nstr x").unwrap();
        p.integer.push(Formula::Leaf(LinearAtom {
            terms: vec![(1, IntTerm::Len(7))],
            bound: 0,
        }));
        assert_eq!(problem_wellformed(&p).len(), 1);
        let mut p = parse_problem(
            "alphabet \"ab\"\nstr x\ntransducer T { states 1 }\ntransducer T { states 1 }",
        )
        .unwrap();
        assert_eq!(problem_wellformed(&p).len(), 1);
        p.transducer_defs.pop();
        assert!(problem_wellformed(&p).is_empty());
    }
}
