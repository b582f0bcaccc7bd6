//! Parser for the problem file format.
//!
//! Statements are separated by line breaks or `;` outside parentheses.
//! `#` starts a comment that runs to the end of the line. See the README for
//! the full grammar.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{
    parse_transducer_body, regex_parse, Alphabet, AutomataError, Nfa, Sym, Transducer, Word,
};
use crate::websec;

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UndeclaredVariable,
    UnknownTransducer,
    OutsideAlphabet,
    Redeclared,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UndeclaredVariable => "undeclared variable",
            ParseErrorKind::UnknownTransducer => "unknown transducer",
            ParseErrorKind::OutsideAlphabet => "letter outside alphabet",
            ParseErrorKind::Redeclared => "duplicate declaration",
        })
    }
}

/// Parse failure with a 1-based line and column.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {kind}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
    pub msg: String,
}

/// Names that cannot be used as variables.
pub const KEYWORDS: &[&str] = &[
    "alphabet",
    "str",
    "int",
    "regc",
    "intc",
    "charc",
    "transducer",
    "indexof",
    "len",
    "count",
    "and",
    "or",
    "not",
    "in",
    "erase",
    "first",
    "anywhere",
    "websec",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Char(char),
    Regex(String),
    /// Raw text between `{` and `}`, with the byte offset of its first char.
    Body(String, usize),
    /// Raw text between `[` and `]` directly after `erase`.
    Raw(String),
    Punct(&'static str),
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(i) => write!(f, "integer {i}"),
            Tok::Str(_) => f.write_str("string literal"),
            Tok::Char(_) => f.write_str("character literal"),
            Tok::Regex(_) => f.write_str("regex"),
            Tok::Body(..) => f.write_str("`{ ... }` block"),
            Tok::Raw(_) => f.write_str("`[ ... ]` letter set"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Newline => f.write_str("end of statement"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

/// Maps byte offsets to 1-based line/column pairs.
struct Lines {
    starts: Vec<usize>,
}

impl Lines {
    fn new(src: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(
            src.char_indices()
                .filter(|&(_, c)| c == '\n')
                .map(|(i, _)| i + 1),
        );
        Lines { starts }
    }

    fn pos(&self, src: &str, offset: usize) -> (usize, usize) {
        let line = self.starts.partition_point(|&s| s <= offset);
        let start = self.starts[line - 1];
        let col = src[start..offset.min(src.len())].chars().count() + 1;
        (line, col)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    depth: usize,
    out: Vec<Spanned>,
}

type LexResult<T> = Result<T, (usize, String)>;

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn push(&mut self, tok: Tok, offset: usize) {
        self.out.push(Spanned { tok, offset });
    }

    /// Reads one escaped character after a backslash inside a quoted literal.
    fn escape(&mut self, start: usize) -> LexResult<char> {
        let e = self
            .bump()
            .ok_or((start, "unterminated escape".to_string()))?;
        Ok(match e {
            'n' => '\n',
            't' => '\t',
            'r' => '\r',
            's' => ' ',
            'x' => {
                let hex: String = (0..2).filter_map(|_| self.bump()).collect();
                let code = u32::from_str_radix(&hex, 16)
                    .map_err(|_| (start, "expected two hex digits after \\x".to_string()))?;
                char::from_u32(code).expect("byte value")
            }
            'u' => {
                if self.bump() != Some('{') {
                    return Err((start, "expected \\u{...}".to_string()));
                }
                let mut hex = String::new();
                loop {
                    match self.bump() {
                        Some('}') => break,
                        Some(c) => hex.push(c),
                        None => return Err((start, "unterminated \\u escape".to_string())),
                    }
                }
                u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or((start, "bad \\u escape".to_string()))?
            }
            other => other,
        })
    }

    fn quoted(&mut self, close: char, start: usize) -> LexResult<String> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err((start, "unterminated literal".to_string())),
                Some('\\') => s.push(self.escape(start)?),
                Some(c) if c == close => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }

    /// Raw text up to an unescaped `close`; escapes are kept verbatim.
    fn raw(&mut self, close: char, start: usize, multiline: bool) -> LexResult<String> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err((start, format!("missing closing `{close}`"))),
                Some('\n') if !multiline => {
                    return Err((start, format!("missing closing `{close}`")))
                }
                Some('\\') => {
                    s.push('\\');
                    if let Some(c) = self.bump() {
                        s.push(c);
                    }
                }
                Some(c) if c == close => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }

    fn run(mut self) -> LexResult<Vec<Spanned>> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                '\n' | ';' => {
                    self.bump();
                    if self.depth == 0 {
                        self.push(Tok::Newline, start);
                    } else if c == ';' {
                        return Err((start, "`;` inside parentheses".to_string()));
                    }
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '"' => {
                    self.bump();
                    let s = self.quoted('"', start)?;
                    self.push(Tok::Str(s), start);
                }
                '\'' => {
                    self.bump();
                    let s = self.quoted('\'', start)?;
                    let mut it = s.chars();
                    match (it.next(), it.next()) {
                        (Some(ch), None) => self.push(Tok::Char(ch), start),
                        _ => {
                            return Err((
                                start,
                                "character literal must hold exactly one character".to_string(),
                            ))
                        }
                    }
                }
                '/' => {
                    self.bump();
                    let s = self.raw('/', start, false)?;
                    self.push(Tok::Regex(s), start);
                }
                '{' => {
                    self.bump();
                    let body_start = self.pos;
                    let s = self.raw('}', start, true)?;
                    self.push(Tok::Body(s, body_start), start);
                }
                '[' => {
                    self.bump();
                    let after_erase = matches!(self.out.last(), Some(Spanned { tok: Tok::Ident(id), offset }) if id == "erase" && offset + 5 == start);
                    if after_erase {
                        let s = self.raw(']', start, false)?;
                        self.push(Tok::Raw(s), start);
                    } else {
                        self.push(Tok::Punct("["), start);
                    }
                }
                '(' => {
                    self.bump();
                    self.depth += 1;
                    self.push(Tok::Punct("("), start);
                }
                ')' => {
                    self.bump();
                    if self.depth == 0 {
                        return Err((start, "unbalanced `)`".to_string()));
                    }
                    self.depth -= 1;
                    self.push(Tok::Punct(")"), start);
                }
                '-' if self.peek2().is_some_and(|d| d.is_ascii_digit()) => {
                    self.bump();
                    let n = self.number(start)?;
                    self.push(Tok::Int(-n), start);
                }
                d if d.is_ascii_digit() => {
                    let n = self.number(start)?;
                    self.push(Tok::Int(n), start);
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut s = String::new();
                    while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                        s.push(c);
                        self.bump();
                    }
                    self.push(Tok::Ident(s), start);
                }
                _ => {
                    let two = &self.src[self.pos..];
                    let punct = [
                        "!=", "<=", ">=", "]", "=", ".", ",", "+", "-", "*", "<", ">",
                    ]
                    .into_iter()
                    .find(|p| two.starts_with(p));
                    match punct {
                        Some(p) => {
                            self.pos += p.len();
                            self.push(Tok::Punct(p), start);
                        }
                        None => return Err((start, format!("unexpected character {c:?}"))),
                    }
                }
            }
        }
        if self.depth != 0 {
            return Err((self.src.len(), "unclosed `(`".to_string()));
        }
        let end = self.src.len();
        self.push(Tok::Newline, end);
        self.push(Tok::Eof, end);
        Ok(self.out)
    }

    fn number(&mut self, start: usize) -> LexResult<i64> {
        let mut s = String::new();
        while let Some(d) = self.peek().filter(char::is_ascii_digit) {
            s.push(d);
            self.bump();
        }
        s.parse()
            .map_err(|_| (start, "integer literal out of range".to_string()))
    }
}

/// Escapes `w` so that it can be used as a regex matching exactly `w`.
pub fn regex_escape(w: &str) -> String {
    let mut out = String::new();
    for c in w.chars() {
        match c {
            '\\' | '.' | '[' | ']' | '(' | ')' | '|' | '*' | '+' | '?' | '/' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Decodes the letter set of `erase[...]`.
fn decode_letter_set(raw: &str) -> Result<Vec<char>, String> {
    let mut out = Vec::new();
    let mut it = raw.chars();
    while let Some(c) = it.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match it.next() {
            Some('s') => out.push(' '),
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('x') => {
                let hex: String = it.by_ref().take(2).collect();
                let code =
                    u32::from_str_radix(&hex, 16).map_err(|_| "bad \\x escape".to_string())?;
                out.push(char::from_u32(code).expect("byte value"));
            }
            Some(other) => out.push(other),
            None => return Err("dangling escape".to_string()),
        }
    }
    Ok(out)
}

/// Canonical spelling of a letter set inside `erase[...]`.
pub fn encode_letter_set(chars: &[char]) -> String {
    let mut out = String::new();
    for &c in chars {
        match c {
            '\\' | ']' => {
                out.push('\\');
                out.push(c);
            }
            ' ' => out.push_str("\\s"),
            c if c.is_control() => out.push_str(&format!("\\x{:02x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

struct Parser<'a> {
    src: &'a str,
    lines: Lines,
    toks: Vec<Spanned>,
    pos: usize,
    problem: Problem,
    alphabet_fixed: bool,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn err_at<T>(&self, offset: usize, kind: ParseErrorKind, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.lines.pos(self.src, offset);
        Err(ParseError {
            line,
            col,
            kind,
            msg: msg.into(),
        })
    }

    fn err<T>(&self, kind: ParseErrorKind, msg: impl Into<String>) -> PResult<T> {
        self.err_at(self.toks[self.pos].offset, kind, msg)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_punct(&mut self, p: &'static str) -> PResult<()> {
        if *self.peek() == Tok::Punct(p) {
            self.next();
            Ok(())
        } else {
            self.err(
                ParseErrorKind::Syntax,
                format!("expected `{p}`, found {}", self.peek()),
            )
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected an identifier, found {other}"),
            ),
        }
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.next();
                Ok(())
            }
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected end of statement, found {other}"),
            ),
        }
    }

    fn alphabet(&mut self) -> &Alphabet {
        self.alphabet_fixed = true;
        &self.problem.alphabet
    }

    fn encode(&mut self, s: &str, offset: usize) -> PResult<Word> {
        let al = self.alphabet().clone();
        match al.encode(s) {
            Ok(w) => Ok(w),
            Err(e) => self.err_at(offset, ParseErrorKind::OutsideAlphabet, e.to_string()),
        }
    }

    fn str_var(&mut self) -> PResult<VarId> {
        let at = self.offset();
        let name = self.ident()?;
        match self.problem.str_var(&name) {
            Some(v) => Ok(v),
            None => self.err_at(
                at,
                ParseErrorKind::UndeclaredVariable,
                format!("string variable `{name}` is not declared"),
            ),
        }
    }

    fn int_var(&mut self) -> PResult<IntVarId> {
        let at = self.offset();
        let name = self.ident()?;
        match self.problem.int_var(&name) {
            Some(v) => Ok(v),
            None => self.err_at(
                at,
                ParseErrorKind::UndeclaredVariable,
                format!("integer variable `{name}` is not declared"),
            ),
        }
    }

    fn alphabet_decl(&mut self) -> PResult<()> {
        let at = self.offset();
        self.next();
        if self.alphabet_fixed {
            return self.err_at(
                at,
                ParseErrorKind::Syntax,
                "`alphabet` must come before everything that uses letters or variables",
            );
        }
        match self.next() {
            Tok::Str(s) => match Alphabet::from_str_chars(&s) {
                Ok(al) => {
                    self.problem.alphabet = al;
                    self.problem.alphabet_decl = AlphabetDecl::Explicit;
                }
                Err(e) => return self.err_at(at, ParseErrorKind::Syntax, e.to_string()),
            },
            Tok::Ident(w) if w == "websec" => {
                self.problem.alphabet = websec::websec_alphabet();
                self.problem.alphabet_decl = AlphabetDecl::Websec;
            }
            _ => {
                return self.err_at(
                    at,
                    ParseErrorKind::Syntax,
                    "expected `alphabet \"...\"` or `alphabet websec`",
                )
            }
        }
        self.alphabet_fixed = true;
        Ok(())
    }

    fn declaration(&mut self, is_str: bool) -> PResult<()> {
        self.next();
        self.alphabet_fixed = true;
        while let Tok::Ident(name) = self.peek().clone() {
            let at = self.offset();
            self.next();
            if KEYWORDS.contains(&name.as_str()) {
                return self.err_at(at, ParseErrorKind::Syntax, format!("`{name}` is a keyword"));
            }
            if self.problem.str_var(&name).is_some() || self.problem.int_var(&name).is_some() {
                return self.err_at(
                    at,
                    ParseErrorKind::Redeclared,
                    format!("`{name}` is already declared"),
                );
            }
            if is_str {
                self.problem.add_str_var(&name);
            } else {
                self.problem.add_int_var(&name);
            }
        }
        Ok(())
    }

    fn transducer_def(&mut self) -> PResult<()> {
        self.next();
        let at = self.offset();
        let name = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return self.err_at(at, ParseErrorKind::Syntax, format!("`{name}` is a keyword"));
        }
        let (body, body_at) = match self.next() {
            Tok::Body(b, o) => (b, o),
            other => {
                return self.err_at(
                    at,
                    ParseErrorKind::Syntax,
                    format!("expected `{{` after transducer name, found {other}"),
                )
            }
        };
        let al = self.alphabet().clone();
        match parse_transducer_body(&body, &al) {
            Ok(t) => {
                self.problem.transducer_defs.push((name, Arc::new(t)));
                Ok(())
            }
            Err(e) => {
                let kind = if e.msg.contains("not in the alphabet") {
                    ParseErrorKind::OutsideAlphabet
                } else {
                    ParseErrorKind::Syntax
                };
                self.err_at(body_at + e.offset, kind, e.msg)
            }
        }
    }

    /// Statements of the form `lhs = ...` or `lhs != rhs`.
    fn assignment(&mut self) -> PResult<()> {
        let at = self.offset();
        if let Tok::Int(c) = self.peek().clone() {
            self.next();
            self.expect_punct("=")?;
            return self.index_of(IntRef::Const(c), at);
        }
        let name = self.ident()?;
        if *self.peek() == Tok::Punct("!=") {
            self.next();
            let Some(x) = self.problem.str_var(&name) else {
                return self.err_at(
                    at,
                    ParseErrorKind::UndeclaredVariable,
                    format!("string variable `{name}` is not declared"),
                );
            };
            let y = self.str_var()?;
            self.problem.disequalities.push((x, y));
            return Ok(());
        }
        self.expect_punct("=")?;
        if let Some(u) = self.problem.int_var(&name) {
            return self.index_of(IntRef::Var(u), at);
        }
        let Some(lhs) = self.problem.str_var(&name) else {
            return self.err_at(
                at,
                ParseErrorKind::UndeclaredVariable,
                format!("variable `{name}` is not declared"),
            );
        };
        let is_app = matches!(self.peek(), Tok::Ident(_))
            && (matches!(self.peek_at(1), Tok::Punct("("))
                || matches!(self.peek_at(1), Tok::Raw(_)));
        if is_app {
            return self.transducer_app(lhs);
        }
        let mut items = Vec::new();
        loop {
            let item_at = self.offset();
            match self.peek().clone() {
                Tok::Str(s) => {
                    self.next();
                    items.push(Item::Lit(self.encode(&s, item_at)?));
                }
                Tok::Ident(_) => items.push(Item::Var(self.str_var()?)),
                other => {
                    return self.err(
                        ParseErrorKind::Syntax,
                        format!("expected a variable or string literal, found {other}"),
                    )
                }
            }
            if *self.peek() == Tok::Punct(".") {
                self.next();
            } else {
                break;
            }
        }
        // Adjacent literals merge; an all-literal right-hand side becomes a
        // regular constraint.
        let mut rhs: Vec<Item> = Vec::new();
        for it in items {
            match (rhs.last_mut(), it) {
                (Some(Item::Lit(prev)), Item::Lit(w)) => prev.extend(w),
                (_, it) => rhs.push(it),
            }
        }
        if rhs.iter().all(|i| matches!(i, Item::Lit(_))) {
            let w: Word = rhs
                .into_iter()
                .flat_map(|i| if let Item::Lit(w) = i { w } else { Vec::new() })
                .collect();
            let al = self.problem.alphabet.clone();
            let pattern = regex_escape(&al.decode(&w));
            self.problem
                .add_regular(lhs, &pattern, Nfa::from_word(&al, &w));
        } else {
            self.problem.relational.push(RelAtom::Concat { lhs, rhs });
        }
        Ok(())
    }

    fn transducer_app(&mut self, lhs: VarId) -> PResult<()> {
        let at = self.offset();
        let name = self.ident()?;
        let al = self.alphabet().clone();
        let (canonical, t) = if name == "erase" {
            let raw = match self.next() {
                Tok::Raw(r) => r,
                _ => return self.err_at(at, ParseErrorKind::Syntax, "expected `erase[letters]`"),
            };
            let chars = match decode_letter_set(&raw) {
                Ok(c) => c,
                Err(m) => return self.err_at(at, ParseErrorKind::Syntax, m),
            };
            let mut syms: Vec<Sym> = Vec::new();
            for c in &chars {
                match al.sym(*c) {
                    Some(s) => syms.push(s),
                    None => {
                        return self.err_at(
                            at,
                            ParseErrorKind::OutsideAlphabet,
                            format!("letter {c:?} is not in the alphabet"),
                        )
                    }
                }
            }
            (
                format!("erase[{}]", encode_letter_set(&chars)),
                Arc::new(Transducer::erase(&al, &syms)),
            )
        } else if let Some((_, t)) = self
            .problem
            .transducer_defs
            .iter()
            .find(|(n, _)| *n == name)
        {
            (name, t.clone())
        } else {
            match websec::builtin_transducer(&name, &al) {
                Ok(t) => (name, Arc::new(t)),
                Err(websec::WebsecError::UnknownBuiltin(_)) => {
                    return self.err_at(
                        at,
                        ParseErrorKind::UnknownTransducer,
                        format!("no transducer named `{name}`"),
                    )
                }
                Err(e) => return self.err_at(at, ParseErrorKind::OutsideAlphabet, e.to_string()),
            }
        };
        self.expect_punct("(")?;
        let arg = self.str_var()?;
        self.expect_punct(")")?;
        self.problem.relational.push(RelAtom::Trans {
            lhs,
            name: canonical,
            transducer: t,
            arg,
        });
        Ok(())
    }

    fn index_of(&mut self, target: IntRef, at: usize) -> PResult<()> {
        match self.peek() {
            Tok::Ident(k) if k == "indexof" => {
                self.next();
            }
            _ => return self.err(ParseErrorKind::Syntax, "expected `indexof(...)`"),
        }
        if let IntRef::Const(c) = target {
            if c < 0 {
                return self.err_at(
                    at,
                    ParseErrorKind::Syntax,
                    "IndexOf target must be non-negative",
                );
            }
        }
        self.expect_punct("(")?;
        let needle_at = self.offset();
        let needle = match self.next() {
            Tok::Str(s) => self.encode(&s, needle_at)?,
            _ => {
                return self.err_at(
                    needle_at,
                    ParseErrorKind::Syntax,
                    "expected the needle as a string literal",
                )
            }
        };
        if needle.is_empty() {
            return self.err_at(
                needle_at,
                ParseErrorKind::Syntax,
                "IndexOf needle must not be empty",
            );
        }
        self.expect_punct(",")?;
        let haystack = self.str_ref()?;
        let mut semantics = IndexOfSemantics::First;
        if *self.peek() == Tok::Punct(",") {
            self.next();
            let sem_at = self.offset();
            semantics = match self.ident()?.as_str() {
                "first" => IndexOfSemantics::First,
                "anywhere" => IndexOfSemantics::Anywhere,
                other => {
                    return self.err_at(
                        sem_at,
                        ParseErrorKind::Syntax,
                        format!("expected `first` or `anywhere`, found `{other}`"),
                    )
                }
            };
        }
        self.expect_punct(")")?;
        self.problem.index_of.push(IndexOfAtom {
            target,
            needle,
            haystack,
            semantics,
        });
        Ok(())
    }

    fn str_ref(&mut self) -> PResult<StrRef> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(StrRef::Lit(self.encode(&s, at)?))
            }
            Tok::Ident(_) => Ok(StrRef::Var(self.str_var()?)),
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected a string variable or literal, found {other}"),
            ),
        }
    }

    /// `(and f...)`, `(or f...)`, `(not f)` or an atom handled by `atom`,
    /// which is called with the opening parenthesis already consumed.
    fn formula<L>(&mut self, atom: &mut dyn FnMut(&mut Self) -> PResult<L>) -> PResult<Formula<L>> {
        self.expect_punct("(")?;
        let f = match self.peek().clone() {
            Tok::Ident(op) if op == "and" || op == "or" => {
                self.next();
                let mut parts = Vec::new();
                while *self.peek() != Tok::Punct(")") {
                    parts.push(self.formula(atom)?);
                }
                if op == "and" {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
            Tok::Ident(op) if op == "not" => {
                self.next();
                Formula::Not(Box::new(self.formula(atom)?))
            }
            _ => Formula::Leaf(atom(self)?),
        };
        self.expect_punct(")")?;
        Ok(f)
    }

    fn reg_atom(&mut self) -> PResult<RegLeaf> {
        match self.peek() {
            Tok::Ident(k) if k == "in" => {
                self.next();
            }
            other => {
                return self.err(
                    ParseErrorKind::Syntax,
                    format!("expected `in`, `and`, `or` or `not`, found {other}"),
                )
            }
        }
        let var = self.str_var()?;
        let at = self.offset();
        let pattern = match self.next() {
            Tok::Regex(r) => r,
            other => {
                return self.err_at(
                    at,
                    ParseErrorKind::Syntax,
                    format!("expected /regex/, found {other}"),
                )
            }
        };
        let al = self.alphabet().clone();
        match regex_parse(&pattern, &al) {
            Ok(nfa) => Ok(RegLeaf {
                var,
                pattern,
                nfa: Arc::new(nfa),
            }),
            Err(AutomataError::RegexSyntax { pos, msg }) => {
                let kind =
                    if msg.contains("not in the alphabet") || msg.contains("no alphabet letter") {
                        ParseErrorKind::OutsideAlphabet
                    } else {
                        ParseErrorKind::Syntax
                    };
                // Regex offsets count characters after the opening slash.
                let byte = pattern
                    .char_indices()
                    .nth(pos)
                    .map_or(pattern.len(), |(b, _)| b);
                self.err_at(at + 1 + byte, kind, msg)
            }
            Err(e) => self.err_at(at, ParseErrorKind::Syntax, e.to_string()),
        }
    }

    /// Parses `expr INT` up to (not including) the closing parenthesis and
    /// returns the terms with the constant folded into the bound.
    fn linear_tail(&mut self) -> PResult<(Vec<(i64, IntTerm)>, i64)> {
        let mut terms = Vec::new();
        let mut constant: i64 = 0;
        let mut sign = 1i64;
        let mut expect_term = true;
        let mut after_op = false;
        loop {
            let at = self.offset();
            let is_bound = matches!(
                (self.peek(), self.peek_at(1)),
                (Tok::Int(_), Tok::Punct(")"))
            ) && !after_op;
            if is_bound {
                let Tok::Int(d) = self.next() else {
                    unreachable!()
                };
                return match d.checked_sub(constant) {
                    Some(b) => Ok((terms, b)),
                    None => self.err_at(at, ParseErrorKind::Syntax, "integer overflow"),
                };
            }
            if !expect_term {
                match self.peek() {
                    Tok::Punct("+") => sign = 1,
                    Tok::Punct("-") => sign = -1,
                    other => {
                        return self.err(
                            ParseErrorKind::Syntax,
                            format!("expected `+`, `-` or the bound, found {other}"),
                        )
                    }
                }
                self.next();
                expect_term = true;
                after_op = true;
                continue;
            }
            let (coef, term) = self.linear_term()?;
            let Some(coef) = coef.checked_mul(sign) else {
                return self.err_at(at, ParseErrorKind::Syntax, "integer overflow");
            };
            match term {
                Some(t) => terms.push((coef, t)),
                None => match constant.checked_add(coef) {
                    Some(c) => constant = c,
                    None => return self.err_at(at, ParseErrorKind::Syntax, "integer overflow"),
                },
            }
            expect_term = false;
            after_op = false;
        }
    }

    /// `INT`, `INT * atom` or `atom`; a bare integer is a constant (`None`).
    fn linear_term(&mut self) -> PResult<(i64, Option<IntTerm>)> {
        if let Tok::Int(c) = self.peek().clone() {
            self.next();
            if *self.peek() != Tok::Punct("*") {
                return Ok((c, None));
            }
            self.next();
            return Ok((c, Some(self.int_term_atom()?)));
        }
        Ok((1, Some(self.int_term_atom()?)))
    }

    fn int_term_atom(&mut self) -> PResult<IntTerm> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Ident(k) if k == "len" => {
                self.next();
                self.expect_punct("(")?;
                let x = self.str_var()?;
                self.expect_punct(")")?;
                Ok(IntTerm::Len(x))
            }
            Tok::Ident(k) if k == "count" => {
                self.next();
                self.expect_punct("(")?;
                let x = self.str_var()?;
                self.expect_punct(",")?;
                let c_at = self.offset();
                let c = match self.next() {
                    Tok::Char(c) => c,
                    other => {
                        return self.err_at(
                            c_at,
                            ParseErrorKind::Syntax,
                            format!("expected a character literal, found {other}"),
                        )
                    }
                };
                let s = match self.alphabet().sym(c) {
                    Some(s) => s,
                    None => {
                        return self.err_at(
                            c_at,
                            ParseErrorKind::OutsideAlphabet,
                            format!("letter {c:?} is not in the alphabet"),
                        )
                    }
                };
                self.expect_punct(")")?;
                Ok(IntTerm::Count(x, s))
            }
            Tok::Ident(_) => Ok(IntTerm::Var(self.int_var()?)),
            other => self.err_at(
                at,
                ParseErrorKind::Syntax,
                format!("expected len(..), count(..) or an integer variable, found {other}"),
            ),
        }
    }

    fn char_atom(&mut self) -> PResult<CharAtom> {
        let eq = match self.next() {
            Tok::Punct("=") => true,
            Tok::Punct("!=") => false,
            other => {
                self.pos -= 1;
                return self.err(
                    ParseErrorKind::Syntax,
                    format!("expected `=` or `!=`, found {other}"),
                );
            }
        };
        let lhs = self.char_term()?;
        let rhs = self.char_term()?;
        Ok(CharAtom { lhs, rhs, eq })
    }

    fn char_term(&mut self) -> PResult<CharTerm> {
        let at = self.offset();
        if let Tok::Char(c) = self.peek().clone() {
            self.next();
            let w = self.encode(&c.to_string(), at)?;
            return Ok(CharTerm {
                s: StrRef::Lit(w),
                idx: IntRef::Const(1),
            });
        }
        let s = self.str_ref()?;
        self.expect_punct("[")?;
        let idx_at = self.offset();
        let idx = match self.peek().clone() {
            Tok::Int(c) if c >= 1 => {
                self.next();
                IntRef::Const(c)
            }
            Tok::Int(_) => {
                return self.err_at(
                    idx_at,
                    ParseErrorKind::Syntax,
                    "constant positions start at 1",
                )
            }
            Tok::Ident(_) => IntRef::Var(self.int_var()?),
            other => {
                return self.err_at(
                    idx_at,
                    ParseErrorKind::Syntax,
                    format!("expected a position, found {other}"),
                )
            }
        };
        self.expect_punct("]")?;
        Ok(CharTerm { s, idx })
    }
}

/// Expands comparison sugar into `<=` atoms: `a < d` is `a <= d-1`,
/// `a >= d` is `-a <= -d`, `a > d` is `-a <= -d-1`, `a = d` is both
/// inequalities, and `a != d` is its negation.
fn int_leaf(p: &mut Parser<'_>) -> PResult<Formula<LinearAtom>> {
    let rel_at = p.offset();
    let rel = match p.next() {
        Tok::Punct(r @ ("<=" | "<" | ">=" | ">" | "=" | "!=")) => r,
        other => {
            return p.err_at(
                rel_at,
                ParseErrorKind::Syntax,
                format!("expected a comparison, found {other}"),
            )
        }
    };
    let (terms, d) = p.linear_tail()?;
    let neg = |ts: &[(i64, IntTerm)]| -> Option<Vec<(i64, IntTerm)>> {
        ts.iter()
            .map(|&(c, t)| c.checked_neg().map(|n| (n, t)))
            .collect()
    };
    let overflow = || ParseError {
        line: 0,
        col: 0,
        kind: ParseErrorKind::Syntax,
        msg: "integer overflow".into(),
    };
    let le = |terms: Vec<(i64, IntTerm)>, bound: i64| Formula::Leaf(LinearAtom { terms, bound });
    let ge = |terms: &[(i64, IntTerm)], bound: i64| -> Result<Formula<LinearAtom>, ParseError> {
        Ok(le(
            neg(terms).ok_or_else(overflow)?,
            bound.checked_neg().ok_or_else(overflow)?,
        ))
    };
    let res = match rel {
        "<=" => Ok(le(terms, d)),
        "<" => d.checked_sub(1).map(|b| le(terms, b)).ok_or_else(overflow),
        ">=" => ge(&terms, d),
        ">" => d
            .checked_add(1)
            .ok_or_else(overflow)
            .and_then(|b| ge(&terms, b)),
        "=" => ge(&terms, d).map(|g| Formula::And(vec![le(terms.clone(), d), g])),
        _ => ge(&terms, d)
            .map(|g| Formula::Not(Box::new(Formula::And(vec![le(terms.clone(), d), g])))),
    };
    res.or_else(|_| p.err_at(rel_at, ParseErrorKind::Syntax, "integer overflow"))
}

impl Parser<'_> {
    fn int_formula(&mut self) -> PResult<Formula<LinearAtom>> {
        self.expect_punct("(")?;
        let f = match self.peek().clone() {
            Tok::Ident(op) if op == "and" || op == "or" => {
                self.next();
                let mut parts = Vec::new();
                while *self.peek() != Tok::Punct(")") {
                    parts.push(self.int_formula()?);
                }
                if op == "and" {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
            Tok::Ident(op) if op == "not" => {
                self.next();
                Formula::Not(Box::new(self.int_formula()?))
            }
            _ => int_leaf(self)?,
        };
        self.expect_punct(")")?;
        Ok(f)
    }
}

/// Parses a problem file.
pub fn parse_problem(src: &str) -> Result<Problem, ParseError> {
    let lines = Lines::new(src);
    let toks = match (Lexer {
        src,
        pos: 0,
        depth: 0,
        out: Vec::new(),
    })
    .run()
    {
        Ok(t) => t,
        Err((offset, msg)) => {
            let (line, col) = lines.pos(src, offset);
            return Err(ParseError {
                line,
                col,
                kind: ParseErrorKind::Syntax,
                msg,
            });
        }
    };
    let mut parser = Parser {
        src,
        lines,
        toks,
        pos: 0,
        problem: Problem::new(websec::websec_alphabet()),
        alphabet_fixed: false,
    };
    parser.problem.alphabet_decl = AlphabetDecl::Websec;
    parser.run()
}

impl Parser<'_> {
    fn run(mut self) -> PResult<Problem> {
        while !self.statement()? {}
        Ok(self.problem)
    }

    /// Parses one statement; returns true at end of input.
    fn statement(&mut self) -> PResult<bool> {
        match self.peek().clone() {
            Tok::Eof => Ok(true),
            Tok::Newline => {
                self.next();
                Ok(false)
            }
            Tok::Ident(kw) => {
                match kw.as_str() {
                    "alphabet" => self.alphabet_decl()?,
                    "str" | "int" => self.declaration(kw == "str")?,
                    "transducer" => self.transducer_def()?,
                    "regc" => {
                        self.next();
                        let f = self.formula(&mut |p| p.reg_atom())?;
                        self.problem.regular.push(f);
                    }
                    "intc" => {
                        self.next();
                        let f = self.int_formula()?;
                        self.problem.integer.push(f);
                    }
                    "charc" => {
                        self.next();
                        let f = self.formula(&mut |p| p.char_atom())?;
                        self.problem.character.push(f);
                    }
                    _ => self.assignment()?,
                }
                self.end_of_statement()?;
                Ok(false)
            }
            Tok::Int(_) => {
                self.assignment()?;
                self.end_of_statement()?;
                Ok(false)
            }
            other => self.err(
                ParseErrorKind::Syntax,
                format!("unexpected {other} at start of statement"),
            ),
        }
    }
}
