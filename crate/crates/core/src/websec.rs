//! Sanitizer and browser transducers plus the mutation-XSS benchmark problems.

use std::sync::OnceLock;

use thiserror::Error;

use crate::automata::{Alphabet, Sym, Transducer};
use crate::constraints::{parse_problem, ParseError, Problem};

/// Printable subset large enough for every literal of the benchmarks and
/// attack patterns, sorted by code point.
pub const WEBSEC_CHARS: &str = " \"#&'()./13489:;<=>CFL\\abcdefghiklmnopqrstuw";

/// Shared handle to the websec alphabet.
pub fn websec_alphabet() -> Alphabet {
    static AL: OnceLock<Alphabet> = OnceLock::new();
    AL.get_or_init(|| Alphabet::from_str_chars(WEBSEC_CHARS).expect("valid alphabet"))
        .clone()
}

#[derive(Debug, Error)]
pub enum WebsecError {
    #[error("unknown builtin transducer {0:?}")]
    UnknownBuiltin(String),
    #[error("builtin {name} needs letter {letter:?}, which is not in the alphabet")]
    MissingLetter { name: String, letter: char },
    #[error("unknown benchmark {0:?}")]
    UnknownBenchmark(String),
    #[error("benchmark {name} does not parse: {source}")]
    Parse { name: String, source: ParseError },
}

/// Names accepted by [`builtin_transducer`]. `erase[...]` is handled by the
/// problem parser because it carries a letter set.
pub const BUILTIN_NAMES: &[&str] = &["identity", "htmlEscape", "escapeString", "innerHTMLDecode"];

fn sym(alphabet: &Alphabet, name: &str, c: char) -> Result<Sym, WebsecError> {
    alphabet.sym(c).ok_or(WebsecError::MissingLetter {
        name: name.to_string(),
        letter: c,
    })
}

fn word(alphabet: &Alphabet, name: &str, s: &str) -> Result<Vec<Sym>, WebsecError> {
    s.chars().map(|c| sym(alphabet, name, c)).collect()
}

fn substitution(
    alphabet: &Alphabet,
    name: &str,
    rules: &[(char, &str)],
) -> Result<Transducer, WebsecError> {
    let rules = rules
        .iter()
        .map(|&(c, w)| Ok((sym(alphabet, name, c)?, word(alphabet, name, w)?)))
        .collect::<Result<Vec<_>, WebsecError>>()?;
    Ok(Transducer::substitution(alphabet, &rules))
}

/// HTML-escapes the five reserved characters.
pub fn html_escape(alphabet: &Alphabet) -> Result<Transducer, WebsecError> {
    substitution(
        alphabet,
        "htmlEscape",
        &[
            ('&', "&amp;"),
            ('<', "&lt;"),
            ('>', "&gt;"),
            ('"', "&quot;"),
            ('\'', "&#39;"),
        ],
    )
}

/// Backslash-escapes quotes and backslashes.
pub fn escape_string(alphabet: &Alphabet) -> Result<Transducer, WebsecError> {
    substitution(
        alphabet,
        "escapeString",
        &[('\'', "\\'"), ('"', "\\\""), ('\\', "\\\\")],
    )
}

/// Entities decoded when a string is written through `innerHTML`. The named
/// entities `&amp;`, `&lt;` and `&gt;` are deliberately absent: they survive
/// the write unchanged.
pub const DECODED_ENTITIES: &[(&str, char)] = &[
    ("&#34;", '"'),
    ("&quot;", '"'),
    ("&#38;", '&'),
    ("&#39;", '\''),
];

/// Left-to-right entity decoder.
///
/// States are the proper prefixes of the decoded entities. A pending prefix
/// is flushed by an output-only chain that ends in a guard state for that
/// prefix; the guard only accepts letters that cannot extend the prefix, and
/// it is final so that a prefix pending at the end of the input is flushed
/// too. Every input therefore has exactly one accepting run.
pub fn inner_html_decode(alphabet: &Alphabet) -> Result<Transducer, WebsecError> {
    let name = "innerHTMLDecode";
    let entities = DECODED_ENTITIES
        .iter()
        .map(|&(e, c)| Ok((word(alphabet, name, e)?, sym(alphabet, name, c)?)))
        .collect::<Result<Vec<_>, WebsecError>>()?;
    let amp = sym(alphabet, name, '&')?;

    // Proper prefixes of the entities, shortest first; index 0 is the root.
    let mut prefixes: Vec<Vec<Sym>> = vec![Vec::new()];
    for (e, _) in &entities {
        for k in 1..e.len() {
            if !prefixes.contains(&e[..k].to_vec()) {
                prefixes.push(e[..k].to_vec());
            }
        }
    }
    prefixes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let state_of = |p: &[Sym]| prefixes.iter().position(|q| q.as_slice() == p);
    let amp_state = state_of(&[amp]).expect("'&' is a prefix");

    let mut t = Transducer::with_states(alphabet, prefixes.len(), 0).expect("initial state exists");
    t.set_final(0, true).expect("state exists");

    for (s, buf) in prefixes.iter().enumerate() {
        // Letters that continue the buffered prefix.
        let mut extends = Vec::new();
        for c in alphabet.syms() {
            let mut ext = buf.clone();
            ext.push(c);
            if let Some(&(_, out)) = entities.iter().find(|(e, _)| *e == ext) {
                t.add_transition(s, Some(c), Some(out), 0)
                    .expect("states exist");
                extends.push(c);
            } else if let Some(next) = state_of(&ext) {
                t.add_transition(s, Some(c), None, next)
                    .expect("states exist");
                extends.push(c);
            }
        }
        let guard = if s == 0 {
            0
        } else {
            let guard = t.add_state();
            t.set_final(guard, true).expect("state exists");
            let mut cur = s;
            for (i, &o) in buf.iter().enumerate() {
                let next = if i + 1 == buf.len() {
                    guard
                } else {
                    t.add_state()
                };
                t.add_transition(cur, None, Some(o), next)
                    .expect("states exist");
                cur = next;
            }
            guard
        };
        for c in alphabet.syms() {
            if extends.contains(&c) {
                continue;
            }
            if c == amp {
                t.add_transition(guard, Some(c), None, amp_state)
                    .expect("states exist");
            } else {
                t.add_transition(guard, Some(c), Some(c), 0)
                    .expect("states exist");
            }
        }
    }
    Ok(t)
}

/// Resolves a builtin transducer name over `alphabet`.
pub fn builtin_transducer(name: &str, alphabet: &Alphabet) -> Result<Transducer, WebsecError> {
    match name {
        "identity" => Ok(Transducer::identity(alphabet)),
        "htmlEscape" => html_escape(alphabet),
        "escapeString" => escape_string(alphabet),
        "innerHTMLDecode" => inner_html_decode(alphabet),
        other => Err(WebsecError::UnknownBuiltin(other.to_string())),
    }
}

/// Attack pattern against the category-list button, as written for a
/// JavaScript engine.
pub const E1_ORIGINAL: &str =
    r#"/<button onclick="createCatList\('('|[^']*[^'\\]')\);[^']*[^'\\]')">.*<\/button>/"#;
/// The same pattern in the supported regex subset. The unmatched `)` before
/// `">` becomes a literal parenthesis.
pub const E1: &str =
    r#"<button onclick="createCatList\('('|[^']*[^'\\]')\);[^']*[^'\\]'\)">.*<\/button>"#;

/// Attack pattern detecting an injected iframe attribute, as written for a
/// JavaScript engine (line breaks removed).
pub const E2_ORIGINAL: &str = r#"/<iframe id="("|[^"]*[^"\\]")[a-zA-Z][a-zA-Z0-9]*="("|[^"]*[^"\\]")name="("|[^"]*[^"\\]")src="http:\/\/www.w3schools.com"><\/iframe>/"#;
/// The same pattern in the supported regex subset, with the attribute
/// separators the generating script actually emits.
pub const E2: &str = r#"<iframe id="("|[^"]*[^"\\]") [a-zA-Z][a-zA-Z0-9]*="("|[^"]*[^"\\]") name="("|[^"]*[^"\\]")src="http:\/\/www.w3schools.com"><\/iframe>"#;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Sat,
    Unsat,
}

/// One shipped benchmark problem.
#[derive(Clone, Copy, Debug)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub source: &'static str,
    pub expected: Expected,
    /// Where the scenario comes from.
    pub note: &'static str,
    /// Variable holding the final DOM string.
    pub output_var: &'static str,
    /// Attack pattern the output is matched against.
    pub pattern: &'static str,
}

pub const BENCHMARKS: &[BenchmarkCase] = &[
    BenchmarkCase {
        name: "ex_cacm",
        source: include_str!("../examples/ex_cacm.slp"),
        expected: Expected::Sat,
        note: "category button built from htmlEscape then escapeString",
        output_var: "catElem_innerHTML",
        pattern: E1,
    },
    BenchmarkCase {
        name: "ex_corrected",
        source: include_str!("../examples/ex_corrected.slp"),
        expected: Expected::Unsat,
        note: "same script with the two sanitizers swapped",
        output_var: "catElem_innerHTML",
        pattern: E1,
    },
    BenchmarkCase {
        name: "ex_mxss1",
        source: include_str!("../examples/ex_mxss1.slp"),
        expected: Expected::Sat,
        note: "corrected script plus a title element decoded through innerHTML",
        output_var: "catElem_innerHTML",
        pattern: E1,
    },
    BenchmarkCase {
        name: "ex_iframe",
        source: include_str!("../examples/ex_iframe.slp"),
        expected: Expected::Sat,
        note: "iframe markup assembled from an escaped and twice-decoded value",
        output_var: "x_innerHTML",
        pattern: E2,
    },
];

pub fn benchmark(name: &str) -> Result<&'static BenchmarkCase, WebsecError> {
    BENCHMARKS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| WebsecError::UnknownBenchmark(name.to_string()))
}

/// Parses a shipped benchmark and returns it with its expected verdict.
pub fn load_benchmark(name: &str) -> Result<(Problem, Expected), WebsecError> {
    let case = benchmark(name)?;
    let problem = parse_problem(case.source).map_err(|source| WebsecError::Parse {
        name: name.to_string(),
        source,
    })?;
    Ok((problem, case.expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{regex_parse, words_of_len};

    fn run(t: &Transducer, s: &str) -> String {
        t.apply_str(s).expect("functional on this input")
    }

    #[test]
    fn sanitizer_fixtures() {
        let al = websec_alphabet();
        assert_eq!(
            run(&html_escape(&al).unwrap(), "Flora & Fauna"),
            "Flora &amp; Fauna"
        );
        assert_eq!(
            run(&escape_string(&al).unwrap(), "&#39;);alert(1);//"),
            "&#39;);alert(1);//"
        );
        assert_eq!(
            run(&inner_html_decode(&al).unwrap(), "&#39;);alert(1);//"),
            "');alert(1);//"
        );
    }

    #[test]
    fn decoder_edge_cases() {
        let al = websec_alphabet();
        let d = inner_html_decode(&al).unwrap();
        assert_eq!(run(&d, "&amp;&lt;&gt;"), "&amp;&lt;&gt;");
        assert_eq!(run(&d, "&&#34;&quot"), "&\"&quot");
        assert_eq!(run(&d, "&#38;#34;"), "&#34;");
        assert_eq!(run(&d, "&#3"), "&#3");
        assert_eq!(run(&d, "a&#39"), "a&#39");
    }

    #[test]
    fn builtins_are_total_functions_on_short_inputs() {
        let al = websec_alphabet();
        for name in BUILTIN_NAMES {
            let t = builtin_transducer(name, &al).unwrap();
            for n in 0..=2 {
                for w in words_of_len(&al, n) {
                    assert!(
                        t.apply_unique(&w).is_some(),
                        "{name} on {:?}",
                        al.decode(&w)
                    );
                }
            }
        }
    }

    #[test]
    fn patterns_compile_and_match_known_attacks() {
        let al = websec_alphabet();
        let e1 = regex_parse(E1, &al).unwrap();
        assert!(e1.accepts_str(
            r#"<button onclick="createCatList('');alert(1);//')">');alert(1);//</button>"#
        ));
        assert!(!e1.accepts_str(r#"<button onclick="createCatList('abc')">abc</button>"#));
        let e2 = regex_parse(E2, &al).unwrap();
        assert!(e2.accepts_str(
            r#"<iframe id="" onload="alert(1)" name="a"src="http://www.w3schools.com"></iframe>"#
        ));
        assert!(
            !e2.accepts_str(r#"<iframe id="a" name="a"src="http://www.w3schools.com"></iframe>"#)
        );
    }

    #[test]
    fn benchmarks_parse() {
        for b in BENCHMARKS {
            load_benchmark(b.name).unwrap();
        }
        assert!(load_benchmark("nope").is_err());
    }
}
