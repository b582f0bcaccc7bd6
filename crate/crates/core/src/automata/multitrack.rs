use std::collections::HashSet;

use super::{Alphabet, StateId, Sym};

/// Automaton over tuples of letters-or-ε, one component per track.
///
/// Each track reads its own word; a tuple of words is accepted if some run
/// consumes every track completely and ends in a final state.
#[derive(Clone, Debug)]
pub struct MultiTrackAutomaton {
    pub alphabet: Alphabet,
    pub tracks: Vec<String>,
    pub trans: Vec<Vec<(Vec<Option<Sym>>, StateId)>>,
    pub initial: StateId,
    pub finals: Vec<bool>,
}

impl MultiTrackAutomaton {
    pub fn new(alphabet: &Alphabet, tracks: Vec<String>) -> Self {
        MultiTrackAutomaton {
            alphabet: alphabet.clone(),
            tracks,
            trans: vec![Vec::new()],
            initial: 0,
            finals: vec![false],
        }
    }

    pub fn arity(&self) -> usize {
        self.tracks.len()
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn add_state(&mut self) -> StateId {
        self.trans.push(Vec::new());
        self.finals.push(false);
        self.trans.len() - 1
    }

    pub fn add_transition(&mut self, from: StateId, label: Vec<Option<Sym>>, to: StateId) {
        assert_eq!(
            label.len(),
            self.arity(),
            "label arity must match the track count"
        );
        self.trans[from].push((label, to));
    }

    /// Decides whether the tuple `words` (one word per track) is accepted.
    pub fn accepts(&self, words: &[Vec<Sym>]) -> bool {
        assert_eq!(words.len(), self.arity());
        let start = (self.initial, vec![0usize; words.len()]);
        let mut seen: HashSet<(StateId, Vec<usize>)> = HashSet::new();
        seen.insert(start.clone());
        let mut stack = vec![start];
        while let Some((q, pos)) = stack.pop() {
            if self.finals[q] && pos.iter().zip(words).all(|(&p, w)| p == w.len()) {
                return true;
            }
            'moves: for (label, r) in &self.trans[q] {
                let mut next = pos.clone();
                for (k, l) in label.iter().enumerate() {
                    if let Some(s) = l {
                        if words[k].get(pos[k]) != Some(s) {
                            continue 'moves;
                        }
                        next[k] += 1;
                    }
                }
                let key = (*r, next);
                if seen.insert(key.clone()) {
                    stack.push(key);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_track_equal_words() {
        let al = Alphabet::from_str_chars("a").unwrap();
        let mut m = MultiTrackAutomaton::new(&al, vec!["x".into(), "y".into()]);
        m.finals[0] = true;
        let mid = m.add_state();
        m.add_transition(0, vec![Some(Sym(0)), None], mid);
        m.add_transition(mid, vec![None, Some(Sym(0))], 0);
        let w = |n: usize| vec![Sym(0); n];
        assert!(m.accepts(&[w(2), w(2)]));
        assert!(!m.accepts(&[w(2), w(1)]));
        assert!(m.accepts(&[w(0), w(0)]));
    }
}
