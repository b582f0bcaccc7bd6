//! Compiler from a small regular-expression dialect to ε-free automata.
//!
//! Supported syntax: literal characters, `\`-escapes, `.`, bracket classes
//! `[...]` and `[^...]` with ranges, grouping `( )`, alternation `|` and the
//! postfix operators `*`, `+`, `?`. Empty alternatives denote the empty word.
//! A pattern always has to match the whole word.

use super::{Alphabet, AutomataError, Nfa, StateId, Sym};

/// Parses `pattern` and returns a trimmed ε-free automaton for its language.
pub fn regex_parse(pattern: &str, alphabet: &Alphabet) -> Result<Nfa, AutomataError> {
    let chars: Vec<char> = pattern.chars().collect();
    let mut p = Parser {
        chars: &chars,
        pos: 0,
        alphabet,
        nfa: Nfa::new(alphabet),
    };
    let (start, end) = p.alternation()?;
    if p.pos < chars.len() {
        return Err(p.error("unbalanced ')'"));
    }
    let mut nfa = p.nfa;
    nfa.set_initial(start)?;
    nfa.set_final(end, true)?;
    Ok(nfa.eliminate_epsilon().trim())
}

/// Thompson fragment: one entry and one exit state.
type Frag = (StateId, StateId);

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
    alphabet: &'a Alphabet,
    nfa: Nfa,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> AutomataError {
        AutomataError::RegexSyntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eps(&mut self, from: StateId, to: StateId) {
        self.nfa
            .add_transition(from, None, to)
            .expect("valid states");
    }

    fn letters(&mut self, syms: &[Sym]) -> Frag {
        let s = self.nfa.add_state();
        let e = self.nfa.add_state();
        for &c in syms {
            self.nfa
                .add_transition(s, Some(c), e)
                .expect("valid states");
        }
        (s, e)
    }

    fn empty_word(&mut self) -> Frag {
        let s = self.nfa.add_state();
        (s, s)
    }

    fn alternation(&mut self) -> Result<Frag, AutomataError> {
        let first = self.concatenation()?;
        if self.peek() != Some('|') {
            return Ok(first);
        }
        let s = self.nfa.add_state();
        let e = self.nfa.add_state();
        self.eps(s, first.0);
        self.eps(first.1, e);
        while self.peek() == Some('|') {
            self.pos += 1;
            let alt = self.concatenation()?;
            self.eps(s, alt.0);
            self.eps(alt.1, e);
        }
        Ok((s, e))
    }

    fn concatenation(&mut self) -> Result<Frag, AutomataError> {
        let mut acc: Option<Frag> = None;
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let f = self.repetition()?;
            acc = Some(match acc {
                None => f,
                Some((s, e)) => {
                    self.eps(e, f.0);
                    (s, f.1)
                }
            });
        }
        Ok(match acc {
            Some(f) => f,
            None => self.empty_word(),
        })
    }

    fn repetition(&mut self) -> Result<Frag, AutomataError> {
        let mut f = self.atom()?;
        while let Some(op) = self.peek() {
            match op {
                '*' | '+' | '?' => {
                    self.pos += 1;
                    let s = self.nfa.add_state();
                    let e = self.nfa.add_state();
                    self.eps(s, f.0);
                    self.eps(f.1, e);
                    if op != '+' {
                        self.eps(s, e);
                    }
                    if op != '?' {
                        self.eps(f.1, f.0);
                    }
                    f = (s, e);
                }
                _ => break,
            }
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<Frag, AutomataError> {
        let c = self
            .peek()
            .ok_or_else(|| self.error("unexpected end of pattern"))?;
        match c {
            '(' => {
                self.pos += 1;
                let f = self.alternation()?;
                if self.peek() != Some(')') {
                    return Err(self.error("missing ')'"));
                }
                self.pos += 1;
                Ok(f)
            }
            '[' => {
                self.pos += 1;
                let syms = self.class()?;
                Ok(self.letters(&syms))
            }
            '.' => {
                self.pos += 1;
                let all: Vec<Sym> = self.alphabet.syms().collect();
                Ok(self.letters(&all))
            }
            '*' | '+' | '?' => Err(self.error("repetition operator without operand")),
            _ => {
                let at = self.pos;
                let ch = self.literal_char()?;
                let s = self.sym_at(ch, at)?;
                Ok(self.letters(&[s]))
            }
        }
    }

    /// Reads one possibly escaped character.
    fn literal_char(&mut self) -> Result<char, AutomataError> {
        let c = self
            .peek()
            .ok_or_else(|| self.error("unexpected end of pattern"))?;
        self.pos += 1;
        if c != '\\' {
            return Ok(c);
        }
        let e = self.peek().ok_or_else(|| self.error("dangling escape"))?;
        self.pos += 1;
        Ok(match e {
            'n' => '\n',
            't' => '\t',
            'r' => '\r',
            's' => ' ',
            other => other,
        })
    }

    fn sym_at(&self, c: char, at: usize) -> Result<Sym, AutomataError> {
        self.alphabet
            .sym(c)
            .ok_or_else(|| AutomataError::RegexSyntax {
                pos: at,
                msg: format!("character {c:?} is not in the alphabet"),
            })
    }

    /// Parses a bracket class after the opening `[`.
    fn class(&mut self) -> Result<Vec<Sym>, AutomataError> {
        let negated = self.peek() == Some('^');
        if negated {
            self.pos += 1;
        }
        let mut member = vec![false; self.alphabet.len()];
        let mut first = true;
        loop {
            let c = self
                .peek()
                .ok_or_else(|| self.error("unterminated character class"))?;
            if c == ']' && !first {
                self.pos += 1;
                break;
            }
            first = false;
            let at = self.pos;
            let lo = self.literal_char()?;
            let is_range =
                self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&n| n != ']');
            if is_range {
                self.pos += 1;
                let hi = self.literal_char()?;
                if hi < lo {
                    return Err(AutomataError::RegexSyntax {
                        pos: at,
                        msg: format!("empty range {lo}-{hi}"),
                    });
                }
                let mut any = false;
                for s in self.alphabet.syms() {
                    let ch = self.alphabet.char_of(s);
                    if lo <= ch && ch <= hi {
                        member[s.index()] = true;
                        any = true;
                    }
                }
                if !any {
                    return Err(AutomataError::RegexSyntax {
                        pos: at,
                        msg: format!("range {lo}-{hi} contains no alphabet letter"),
                    });
                }
            } else {
                member[self.sym_at(lo, at)?.index()] = true;
            }
        }
        Ok(self
            .alphabet
            .syms()
            .filter(|s| member[s.index()] != negated)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::words_up_to;

    fn lang(pattern: &str, al: &Alphabet, n: usize) -> Vec<String> {
        let a = regex_parse(pattern, al).unwrap();
        words_up_to(al, n)
            .filter(|w| a.accepts(w))
            .map(|w| al.decode(&w))
            .collect()
    }

    #[test]
    fn alternation_of_stars() {
        let al = Alphabet::from_str_chars("ab").unwrap();
        assert_eq!(lang("(a*|b*)", &al, 2), vec!["", "a", "b", "aa", "bb"]);
    }

    #[test]
    fn empty_group_is_epsilon() {
        let al = Alphabet::from_str_chars("ab").unwrap();
        assert_eq!(lang("()", &al, 3), vec![""]);
        assert_eq!(lang("", &al, 3), vec![""]);
    }

    #[test]
    fn negated_class() {
        let al = Alphabet::from_str_chars("a'").unwrap();
        assert_eq!(lang("[^']", &al, 1), vec!["a"]);
    }

    #[test]
    fn ranges_intersect_alphabet() {
        let al = Alphabet::from_str_chars("ab1").unwrap();
        assert_eq!(
            lang("[a-z]+", &al, 2),
            vec!["a", "b", "aa", "ab", "ba", "bb"]
        );
        assert!(regex_parse("[x-z]", &al).is_err());
    }

    #[test]
    fn escapes_and_operators() {
        let al = Alphabet::from_str_chars("a()\\").unwrap();
        assert_eq!(lang("\\(a?\\)", &al, 3), vec!["()", "(a)"]);
        assert_eq!(lang("\\\\+", &al, 2), vec!["\\", "\\\\"]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let al = Alphabet::from_str_chars("ab").unwrap();
        assert!(matches!(
            regex_parse("(ab", &al),
            Err(AutomataError::RegexSyntax { pos: 3, .. })
        ));
        assert!(matches!(
            regex_parse("ab)", &al),
            Err(AutomataError::RegexSyntax { pos: 2, .. })
        ));
        assert!(matches!(
            regex_parse("*", &al),
            Err(AutomataError::RegexSyntax { pos: 0, .. })
        ));
        assert!(matches!(
            regex_parse("ac", &al),
            Err(AutomataError::RegexSyntax { pos: 1, .. })
        ));
    }
}
