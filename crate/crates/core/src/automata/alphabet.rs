use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::AutomataError;

/// Index of a letter inside an [`Alphabet`].
///
/// Letters are ordered by their position in the alphabet declaration, which
/// is also the order used for all tie-breaking (shortest witnesses, model
/// enumeration).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(pub u16);

impl Sym {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A word over an alphabet, stored as letter indices.
pub type Word = Vec<Sym>;

struct Inner {
    chars: Vec<char>,
    index: HashMap<char, Sym>,
}

/// Finite, ordered, duplicate-free set of characters.
///
/// Cloning is cheap; all automata built over the same declaration share one
/// allocation.
#[derive(Clone)]
pub struct Alphabet(Arc<Inner>);

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(chars: I) -> Result<Self, AutomataError> {
        let chars: Vec<char> = chars.into_iter().collect();
        if chars.is_empty() {
            return Err(AutomataError::EmptyAlphabet);
        }
        if chars.len() > u16::MAX as usize {
            return Err(AutomataError::AlphabetTooLarge(chars.len()));
        }
        let mut index = HashMap::with_capacity(chars.len());
        for (i, &c) in chars.iter().enumerate() {
            if index.insert(c, Sym(i as u16)).is_some() {
                return Err(AutomataError::DuplicateLetter(c));
            }
        }
        Ok(Alphabet(Arc::new(Inner { chars, index })))
    }

    pub fn from_str_chars(s: &str) -> Result<Self, AutomataError> {
        Self::new(s.chars())
    }

    pub fn len(&self) -> usize {
        self.0.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.0.chars
    }

    pub fn syms(&self) -> impl Iterator<Item = Sym> + Clone {
        (0..self.len() as u16).map(Sym)
    }

    pub fn sym(&self, c: char) -> Option<Sym> {
        self.0.index.get(&c).copied()
    }

    pub fn char_of(&self, s: Sym) -> char {
        self.0.chars[s.index()]
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.index.contains_key(&c)
    }

    /// Encodes a string, failing on the first character outside the alphabet.
    pub fn encode(&self, s: &str) -> Result<Word, AutomataError> {
        s.chars()
            .map(|c| self.sym(c).ok_or(AutomataError::LetterOutsideAlphabet(c)))
            .collect()
    }

    pub fn decode(&self, w: &[Sym]) -> String {
        w.iter().map(|&s| self.char_of(s)).collect()
    }

    /// Two handles denote the same alphabet if they list the same characters
    /// in the same order.
    pub fn same_as(&self, other: &Alphabet) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.chars == other.0.chars
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet({:?})", self.0.chars.iter().collect::<String>())
    }
}

/// Enumerates all words of exactly length `n` in lexicographic order.
pub fn words_of_len(alphabet: &Alphabet, n: usize) -> impl Iterator<Item = Word> + '_ {
    let k = alphabet.len();
    let total = k.checked_pow(n as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut i| {
        let mut w = vec![Sym(0); n];
        for pos in (0..n).rev() {
            w[pos] = Sym((i % k) as u16);
            i /= k;
        }
        w
    })
}

/// Enumerates all words of length at most `max_len`, shortest first and then
/// lexicographically.
pub fn words_up_to(alphabet: &Alphabet, max_len: usize) -> impl Iterator<Item = Word> + '_ {
    (0..=max_len).flat_map(move |n| words_of_len(alphabet, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(matches!(
            Alphabet::from_str_chars("aba"),
            Err(AutomataError::DuplicateLetter('a'))
        ));
        assert!(matches!(
            Alphabet::from_str_chars(""),
            Err(AutomataError::EmptyAlphabet)
        ));
    }

    #[test]
    fn encode_roundtrip() {
        let a = Alphabet::from_str_chars("ab<").unwrap();
        let w = a.encode("<ab").unwrap();
        assert_eq!(w, vec![Sym(2), Sym(0), Sym(1)]);
        assert_eq!(a.decode(&w), "<ab");
        assert!(a.encode("abc").is_err());
    }

    #[test]
    fn word_enumeration_order() {
        let a = Alphabet::from_str_chars("ab").unwrap();
        let all: Vec<String> = words_up_to(&a, 2).map(|w| a.decode(&w)).collect();
        assert_eq!(all, vec!["", "a", "b", "aa", "ab", "ba", "bb"]);
    }
}
