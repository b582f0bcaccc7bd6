//! Textual format for automata and transducers.
//!
//! A body is a list of statements separated by `;` or line breaks:
//!
//! ```text
//! states 3; initial 0; final 0 2
//! t 0 a/b 1          # transducer move reading `a`, writing `b`
//! t 1 ~/c 2          # `~` is ε
//! ```
//!
//! Automaton moves omit the output side (`t 0 a 1`). Letters may be written
//! with the escapes `\~`, `\/`, `\;`, `\\`, `\s` (space), `\xHH` and
//! `\u{H...}`. A `#` at the start of a statement comments out the rest of
//! the line.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Alphabet, Nfa, StateId, Sym, Transducer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{msg}")]
pub struct TextError {
    /// Byte offset into the parsed body.
    pub offset: usize,
    pub msg: String,
}

fn err<T>(offset: usize, msg: impl Into<String>) -> Result<T, TextError> {
    Err(TextError {
        offset,
        msg: msg.into(),
    })
}

/// A whitespace-separated token with its byte offset.
#[derive(Debug)]
struct Tok {
    offset: usize,
    text: String,
}

/// Splits a body into statements of tokens. Backslash escapes are kept
/// verbatim inside tokens so that letters can be decoded later.
fn statements(body: &str) -> Vec<Vec<Tok>> {
    let mut out: Vec<Vec<Tok>> = Vec::new();
    let mut cur: Vec<Tok> = Vec::new();
    let mut chars = body.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c == ';' || c == '\n' {
            chars.next();
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if c.is_whitespace() {
            chars.next();
        } else if c == '#' && cur.is_empty() {
            while let Some(&(_, d)) = chars.peek() {
                if d == '\n' {
                    break;
                }
                chars.next();
            }
        } else {
            let mut text = String::new();
            while let Some(&(_, d)) = chars.peek() {
                if d.is_whitespace() || d == ';' {
                    break;
                }
                chars.next();
                text.push(d);
                if d == '\\' {
                    if let Some(&(_, e)) = chars.peek() {
                        chars.next();
                        text.push(e);
                    }
                }
            }
            cur.push(Tok { offset: i, text });
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Decodes one label (a letter or `~`) starting at `s`, returning the letter
/// and the remaining text.
fn decode_label<'a>(
    s: &'a str,
    offset: usize,
    alphabet: &Alphabet,
) -> Result<(Option<Sym>, &'a str), TextError> {
    let mut it = s.chars();
    let c = match it.next() {
        Some(c) => c,
        None => return err(offset, "missing letter"),
    };
    let (ch, rest) = match c {
        '~' => return Ok((None, it.as_str())),
        '\\' => {
            let e = match it.next() {
                Some(e) => e,
                None => return err(offset, "dangling escape"),
            };
            match e {
                's' => (' ', it.as_str()),
                'x' => {
                    let r = it.as_str();
                    if r.len() < 2 || !r.is_char_boundary(2) {
                        return err(offset, "expected two hex digits after \\x");
                    }
                    let code = u32::from_str_radix(&r[..2], 16).map_err(|_| TextError {
                        offset,
                        msg: "bad \\x escape".into(),
                    })?;
                    (char::from_u32(code).expect("byte is a char"), &r[2..])
                }
                'u' => {
                    let r = it.as_str();
                    let close = match (r.starts_with('{'), r.find('}')) {
                        (true, Some(k)) => k,
                        _ => return err(offset, "expected \\u{...}"),
                    };
                    let code = u32::from_str_radix(&r[1..close], 16)
                        .ok()
                        .and_then(char::from_u32);
                    match code {
                        Some(ch) => (ch, &r[close + 1..]),
                        None => return err(offset, "bad \\u escape"),
                    }
                }
                other => (other, it.as_str()),
            }
        }
        other => (other, it.as_str()),
    };
    match alphabet.sym(ch) {
        Some(s) => Ok((Some(s), rest)),
        None => err(offset, format!("letter {ch:?} is not in the alphabet")),
    }
}

fn parse_state(tok: &Tok, n: Option<usize>) -> Result<StateId, TextError> {
    let q: StateId = match tok.text.parse() {
        Ok(q) => q,
        Err(_) => {
            return err(
                tok.offset,
                format!("expected a state number, found {:?}", tok.text),
            )
        }
    };
    match n {
        Some(n) if q >= n => err(tok.offset, format!("state {q} out of range (states {n})")),
        None => err(tok.offset, "`states` must come before any state reference"),
        _ => Ok(q),
    }
}

/// Common statement handling for automata and transducers.
struct Header {
    states: usize,
    initial: StateId,
    finals: Vec<StateId>,
    moves: Vec<(StateId, Option<Sym>, Option<Sym>, StateId)>,
}

fn parse_body(body: &str, alphabet: &Alphabet, with_output: bool) -> Result<Header, TextError> {
    let mut states: Option<usize> = None;
    let mut initial: Option<StateId> = None;
    let mut finals = Vec::new();
    let mut moves = Vec::new();
    for st in statements(body) {
        let head = &st[0];
        match head.text.as_str() {
            "states" => {
                if st.len() != 2 {
                    return err(head.offset, "expected `states N`");
                }
                if states.is_some() {
                    return err(head.offset, "duplicate `states`");
                }
                match st[1].text.parse::<usize>() {
                    Ok(n) if n > 0 => states = Some(n),
                    _ => return err(st[1].offset, "expected a positive state count"),
                }
            }
            "initial" => {
                if st.len() != 2 {
                    return err(head.offset, "expected `initial Q`");
                }
                if initial.is_some() {
                    return err(head.offset, "duplicate `initial`");
                }
                initial = Some(parse_state(&st[1], states)?);
            }
            "final" => {
                for t in &st[1..] {
                    finals.push(parse_state(t, states)?);
                }
            }
            "t" => {
                if st.len() != 4 {
                    let shape = if with_output {
                        "t Q IN/OUT Q"
                    } else {
                        "t Q LETTER Q"
                    };
                    return err(head.offset, format!("expected `{shape}`"));
                }
                let from = parse_state(&st[1], states)?;
                let to = parse_state(&st[3], states)?;
                let lab = &st[2];
                let (input, rest) = decode_label(&lab.text, lab.offset, alphabet)?;
                let output = if with_output {
                    let Some(rest) = rest.strip_prefix('/') else {
                        return err(lab.offset, "expected `IN/OUT`");
                    };
                    let (output, rest) = decode_label(rest, lab.offset, alphabet)?;
                    if !rest.is_empty() {
                        return err(lab.offset, "trailing characters after label");
                    }
                    output
                } else {
                    if !rest.is_empty() {
                        return err(lab.offset, "expected a single letter or `~`");
                    }
                    None
                };
                moves.push((from, input, output, to));
            }
            other => return err(head.offset, format!("unknown statement {other:?}")),
        }
    }
    let Some(states) = states else {
        return err(0, "missing `states`");
    };
    Ok(Header {
        states,
        initial: initial.unwrap_or(0),
        finals,
        moves,
    })
}

/// Parses a transducer body.
pub fn parse_transducer_body(body: &str, alphabet: &Alphabet) -> Result<Transducer, TextError> {
    let h = parse_body(body, alphabet, true)?;
    let mut t = Transducer::with_states(alphabet, h.states, h.initial).expect("checked");
    for f in h.finals {
        t.set_final(f, true).expect("checked");
    }
    for (from, a, b, to) in h.moves {
        t.add_transition(from, a, b, to).expect("checked");
    }
    Ok(t)
}

/// Parses an automaton body.
pub fn parse_nfa_body(body: &str, alphabet: &Alphabet) -> Result<Nfa, TextError> {
    let h = parse_body(body, alphabet, false)?;
    let mut a = Nfa::with_states(alphabet, h.states, h.initial).expect("checked");
    for f in h.finals {
        a.set_final(f, true).expect("checked");
    }
    for (from, l, _, to) in h.moves {
        a.add_transition(from, l, to).expect("checked");
    }
    Ok(a)
}

fn encode_letter(out: &mut String, alphabet: &Alphabet, s: Option<Sym>) {
    let Some(s) = s else {
        out.push('~');
        return;
    };
    match alphabet.char_of(s) {
        ' ' => out.push_str("\\s"),
        c @ ('~' | '/' | ';' | '\\') => {
            out.push('\\');
            out.push(c);
        }
        c if c.is_ascii_graphic() && c != '#' && c != '{' && c != '}' => out.push(c),
        c if (c as u32) < 0x100 => {
            let _ = write!(out, "\\x{:02x}", c as u32);
        }
        c => {
            let _ = write!(out, "\\u{{{:x}}}", c as u32);
        }
    }
}

/// Renders a transducer in the textual format, one statement per line.
pub fn write_transducer_body(t: &Transducer) -> String {
    let al = t.alphabet();
    let mut out = format!("states {}; initial {};", t.num_states(), t.initial());
    out.push_str(" final");
    for f in t.finals() {
        let _ = write!(out, " {f}");
    }
    out.push(';');
    for q in 0..t.num_states() {
        for &(a, b, r) in t.transitions(q) {
            let _ = write!(out, "\n  t {q} ");
            encode_letter(&mut out, al, a);
            out.push('/');
            encode_letter(&mut out, al, b);
            let _ = write!(out, " {r};");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_roundtrip() {
        let al = Alphabet::from_str_chars("ab ;/~#}").unwrap();
        let body = "states 2; initial 0; final 1\n# comment line\nt 0 a/~ 0; t 0 \\s/\\; 1\nt 1 \\~/\\/ 1; t 1 #/\\x7d 0";
        let t = parse_transducer_body(body, &al).unwrap();
        assert_eq!(t.num_states(), 2);
        assert_eq!(t.num_transitions(), 4);
        let printed = write_transducer_body(&t);
        let again = parse_transducer_body(&printed, &al).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn reports_offsets() {
        let al = Alphabet::from_str_chars("ab").unwrap();
        let e = parse_transducer_body("states 2; t 0 c/a 1", &al).unwrap_err();
        assert_eq!(e.offset, 14);
        let e = parse_transducer_body("states 2; t 0 a/a 5", &al).unwrap_err();
        assert_eq!(e.offset, 18);
        assert!(parse_transducer_body("t 0 a/a 0", &al).is_err());
    }

    #[test]
    fn nfa_body() {
        let al = Alphabet::from_str_chars("ab").unwrap();
        let a = parse_nfa_body("states 2; initial 0; final 1; t 0 a 1; t 1 ~ 0", &al).unwrap();
        assert!(a.accepts_str("aa"));
        assert!(!a.accepts_str("b"));
    }
}
