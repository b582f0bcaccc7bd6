use std::collections::{HashMap, VecDeque};

use super::{Alphabet, AutomataError, Sym, Word};

/// Dense state identifier.
pub type StateId = usize;

/// Nondeterministic finite automaton with optional ε-moves.
///
/// Transition lists are kept sorted and duplicate-free; `None` labels are ε.
#[derive(Clone, Debug)]
pub struct Nfa {
    alphabet: Alphabet,
    trans: Vec<Vec<(Option<Sym>, StateId)>>,
    initial: StateId,
    finals: Vec<bool>,
}

impl PartialEq for Nfa {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.trans == other.trans
            && self.initial == other.initial
            && self.finals == other.finals
    }
}

impl Eq for Nfa {}

impl Nfa {
    /// A one-state automaton with no transitions and no final state.
    pub fn new(alphabet: &Alphabet) -> Self {
        Nfa {
            alphabet: alphabet.clone(),
            trans: vec![Vec::new()],
            initial: 0,
            finals: vec![false],
        }
    }

    /// An automaton with `n` (at least one) isolated, non-final states.
    pub fn with_states(
        alphabet: &Alphabet,
        n: usize,
        initial: StateId,
    ) -> Result<Self, AutomataError> {
        let n = n.max(1);
        if initial >= n {
            return Err(AutomataError::UnknownState(initial));
        }
        Ok(Nfa {
            alphabet: alphabet.clone(),
            trans: vec![Vec::new(); n],
            initial,
            finals: vec![false; n],
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn set_initial(&mut self, q: StateId) -> Result<(), AutomataError> {
        self.check_state(q)?;
        self.initial = q;
        Ok(())
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(q, _)| q)
    }

    pub fn set_final(&mut self, q: StateId, fin: bool) -> Result<(), AutomataError> {
        self.check_state(q)?;
        self.finals[q] = fin;
        Ok(())
    }

    pub fn add_state(&mut self) -> StateId {
        self.trans.push(Vec::new());
        self.finals.push(false);
        self.trans.len() - 1
    }

    pub fn transitions(&self, q: StateId) -> &[(Option<Sym>, StateId)] {
        &self.trans[q]
    }

    pub fn add_transition(
        &mut self,
        from: StateId,
        label: Option<Sym>,
        to: StateId,
    ) -> Result<(), AutomataError> {
        self.check_state(from)?;
        self.check_state(to)?;
        if let Some(s) = label {
            if s.index() >= self.alphabet.len() {
                return Err(AutomataError::UnknownSymbol(s.index()));
            }
        }
        let list = &mut self.trans[from];
        if let Err(pos) = list.binary_search(&(label, to)) {
            list.insert(pos, (label, to));
        }
        Ok(())
    }

    fn push_sorted(&mut self, from: StateId, label: Option<Sym>, to: StateId) {
        let list = &mut self.trans[from];
        if let Err(pos) = list.binary_search(&(label, to)) {
            list.insert(pos, (label, to));
        }
    }

    fn check_state(&self, q: StateId) -> Result<(), AutomataError> {
        if q < self.trans.len() {
            Ok(())
        } else {
            Err(AutomataError::UnknownState(q))
        }
    }

    /// Targets of the `s`-labelled moves out of `q`, in id order.
    pub fn successors(&self, q: StateId, s: Option<Sym>) -> impl Iterator<Item = StateId> + '_ {
        let list = &self.trans[q];
        let lo = list.partition_point(|&(l, _)| l < s);
        list[lo..]
            .iter()
            .take_while(move |&&(l, _)| l == s)
            .map(|&(_, r)| r)
    }

    /// Builds an automaton from raw transition lists, which are sorted and
    /// deduplicated here.
    pub fn from_parts(
        alphabet: &Alphabet,
        mut trans: Vec<Vec<(Option<Sym>, StateId)>>,
        initial: StateId,
        finals: Vec<bool>,
    ) -> Result<Self, AutomataError> {
        let n = trans.len();
        if n == 0 || finals.len() != n || initial >= n {
            return Err(AutomataError::UnknownState(initial));
        }
        for list in &mut trans {
            if let Some(&(_, r)) = list.iter().find(|(_, r)| *r >= n) {
                return Err(AutomataError::UnknownState(r));
            }
            if let Some(&(Some(s), _)) = list
                .iter()
                .find(|(l, _)| l.is_some_and(|s| s.index() >= alphabet.len()))
            {
                return Err(AutomataError::UnknownSymbol(s.index()));
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(Nfa {
            alphabet: alphabet.clone(),
            trans,
            initial,
            finals,
        })
    }

    // ----- constructors -------------------------------------------------

    /// Accepts nothing.
    pub fn empty_language(alphabet: &Alphabet) -> Self {
        Nfa::new(alphabet)
    }

    /// Accepts only the empty word.
    pub fn epsilon(alphabet: &Alphabet) -> Self {
        let mut a = Nfa::new(alphabet);
        a.finals[0] = true;
        a
    }

    /// Accepts every word.
    pub fn universal(alphabet: &Alphabet) -> Self {
        let mut a = Nfa::epsilon(alphabet);
        for s in alphabet.syms() {
            a.push_sorted(0, Some(s), 0);
        }
        a
    }

    /// Accepts exactly the one-letter words drawn from `letters`.
    pub fn from_letters(alphabet: &Alphabet, letters: &[Sym]) -> Self {
        let mut a = Nfa::new(alphabet);
        let f = a.add_state();
        a.finals[f] = true;
        for &s in letters {
            a.push_sorted(0, Some(s), f);
        }
        a
    }

    /// Accepts exactly `{w}`.
    pub fn from_word(alphabet: &Alphabet, w: &[Sym]) -> Self {
        let mut a = Nfa::new(alphabet);
        let mut cur = 0;
        for &s in w {
            let next = a.add_state();
            a.push_sorted(cur, Some(s), next);
            cur = next;
        }
        a.finals[cur] = true;
        a
    }

    /// Accepts exactly `{s}`, failing if `s` uses a letter outside the alphabet.
    pub fn from_str(alphabet: &Alphabet, s: &str) -> Result<Self, AutomataError> {
        Ok(Nfa::from_word(alphabet, &alphabet.encode(s)?))
    }

    // ----- regular operations (Thompson style, introduce ε) -------------

    fn embed(&mut self, other: &Nfa) -> StateId {
        let offset = self.trans.len();
        for q in 0..other.num_states() {
            self.trans.push(
                other.trans[q]
                    .iter()
                    .map(|&(l, r)| (l, r + offset))
                    .collect(),
            );
            self.finals.push(false);
        }
        offset
    }

    fn ensure_same(&self, other: &Nfa) -> Result<(), AutomataError> {
        if self.alphabet.same_as(&other.alphabet) {
            Ok(())
        } else {
            Err(AutomataError::AlphabetMismatch)
        }
    }

    pub fn union(&self, other: &Nfa) -> Result<Nfa, AutomataError> {
        self.ensure_same(other)?;
        let mut out = Nfa::new(&self.alphabet);
        for part in [self, other] {
            let off = out.embed(part);
            out.push_sorted(0, None, part.initial + off);
            for f in part.finals() {
                out.finals[f + off] = true;
            }
        }
        Ok(out)
    }

    pub fn concat(&self, other: &Nfa) -> Result<Nfa, AutomataError> {
        self.ensure_same(other)?;
        let mut out = self.clone();
        out.finals.iter_mut().for_each(|f| *f = false);
        let off = out.embed(other);
        for f in self.finals() {
            out.push_sorted(f, None, other.initial + off);
        }
        for f in other.finals() {
            out.finals[f + off] = true;
        }
        Ok(out)
    }

    /// Kleene star.
    pub fn star(&self) -> Nfa {
        let mut out = Nfa::new(&self.alphabet);
        out.finals[0] = true;
        let off = out.embed(self);
        out.push_sorted(0, None, self.initial + off);
        for f in self.finals() {
            out.push_sorted(f + off, None, 0);
        }
        out
    }

    /// Zero or one occurrence.
    pub fn optional(&self) -> Nfa {
        let mut out = Nfa::new(&self.alphabet);
        out.finals[0] = true;
        let off = out.embed(self);
        out.push_sorted(0, None, self.initial + off);
        for f in self.finals() {
            out.finals[f + off] = true;
        }
        out
    }

    // ----- ε handling ---------------------------------------------------

    pub fn has_epsilon(&self) -> bool {
        self.trans
            .iter()
            .any(|l| l.first().is_some_and(|(lab, _)| lab.is_none()))
    }

    /// Sorted ε-closure of a set of states.
    pub fn eps_closure(&self, start: &[StateId]) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = Vec::new();
        for &q in start {
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
        while let Some(q) = stack.pop() {
            // ε-labels sort first, so the scan stops at the first letter.
            for &(l, r) in &self.trans[q] {
                if l.is_some() {
                    break;
                }
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(q, _)| q)
            .collect()
    }

    /// Language-equivalent automaton without ε-moves over the same states.
    pub fn eliminate_epsilon(&self) -> Nfa {
        if !self.has_epsilon() {
            return self.clone();
        }
        let n = self.num_states();
        let mut out = Nfa {
            alphabet: self.alphabet.clone(),
            trans: vec![Vec::new(); n],
            initial: self.initial,
            finals: vec![false; n],
        };
        for q in 0..n {
            let cl = self.eps_closure(&[q]);
            let mut list: Vec<(Option<Sym>, StateId)> = Vec::new();
            for &p in &cl {
                if self.finals[p] {
                    out.finals[q] = true;
                }
                list.extend(self.trans[p].iter().filter(|(l, _)| l.is_some()).copied());
            }
            list.sort_unstable();
            list.dedup();
            out.trans[q] = list;
        }
        out
    }

    // ----- reachability and trimming -------------------------------------

    /// States reachable from `q` (including `q`) along any moves.
    pub fn reachable_from(&self, q: StateId) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[q] = true;
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            for &(_, r) in &self.trans[p] {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (q, list) in self.trans.iter().enumerate() {
            for &(_, r) in list {
                rev[r].push(q);
            }
        }
        let mut seen = self.finals.clone();
        let mut stack: Vec<StateId> = self.finals().collect();
        while let Some(p) = stack.pop() {
            for &q in &rev[p] {
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        seen
    }

    /// Removes states that are unreachable or cannot reach a final state.
    /// The initial state is always kept; surviving states keep their
    /// relative order.
    pub fn trim(&self) -> Nfa {
        let fwd = self.reachable_from(self.initial);
        let bwd = self.coreachable();
        let keep: Vec<bool> = (0..self.num_states())
            .map(|q| q == self.initial || (fwd[q] && bwd[q]))
            .collect();
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[bool]) -> Nfa {
        if keep.iter().all(|&k| k) {
            return self.clone();
        }
        let mut map = vec![usize::MAX; self.num_states()];
        let mut n = 0;
        for q in 0..self.num_states() {
            if keep[q] {
                map[q] = n;
                n += 1;
            }
        }
        let mut out = Nfa {
            alphabet: self.alphabet.clone(),
            trans: vec![Vec::new(); n],
            initial: map[self.initial],
            finals: vec![false; n],
        };
        for q in 0..self.num_states() {
            if !keep[q] {
                continue;
            }
            out.finals[map[q]] = self.finals[q];
            out.trans[map[q]] = self.trans[q]
                .iter()
                .filter(|(_, r)| keep[*r])
                .map(|&(l, r)| (l, map[r]))
                .collect();
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        let fwd = self.reachable_from(self.initial);
        !self.finals().any(|f| fwd[f])
    }

    /// Sub-automaton `A[q, q2]`: initial state replaced by `q` and the final
    /// states replaced by `{q2}`. The result is trimmed.
    pub fn slice(&self, q: StateId, q2: StateId) -> Result<Nfa, AutomataError> {
        self.check_state(q)?;
        self.check_state(q2)?;
        let mut out = self.clone();
        out.initial = q;
        out.finals.iter_mut().for_each(|f| *f = false);
        out.finals[q2] = true;
        Ok(out.trim())
    }

    // ----- runs -----------------------------------------------------------

    /// States reached from the set `start` after reading `w` (ε-closed).
    pub fn run_from(&self, start: &[StateId], w: &[Sym]) -> Vec<StateId> {
        let mut cur = self.eps_closure(start);
        for &s in w {
            let mut next: Vec<StateId> = Vec::new();
            for &q in &cur {
                for &(l, r) in &self.trans[q] {
                    if l == Some(s) {
                        next.push(r);
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            cur = self.eps_closure(&next);
            if cur.is_empty() {
                break;
            }
        }
        cur
    }

    pub fn accepts(&self, w: &[Sym]) -> bool {
        self.run_from(&[self.initial], w)
            .iter()
            .any(|&q| self.finals[q])
    }

    pub fn accepts_str(&self, s: &str) -> bool {
        match self.alphabet.encode(s) {
            Ok(w) => self.accepts(&w),
            Err(_) => false,
        }
    }

    /// The shortest accepted word, ties broken lexicographically by alphabet
    /// order; `None` iff the language is empty.
    pub fn shortest_word(&self) -> Option<Word> {
        let a = self.eliminate_epsilon();
        let n = a.num_states();
        let mut parent: Vec<Option<(StateId, Sym)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[a.initial] = true;
        queue.push_back(a.initial);
        while let Some(q) = queue.pop_front() {
            if a.finals[q] {
                let mut w = Vec::new();
                let mut cur = q;
                while let Some((p, s)) = parent[cur] {
                    w.push(s);
                    cur = p;
                }
                w.reverse();
                return Some(w);
            }
            // Transitions are sorted by label, so letters are expanded in
            // alphabet order.
            for &(l, r) in &a.trans[q] {
                if !seen[r] {
                    seen[r] = true;
                    parent[r] = Some((q, l.expect("ε-free")));
                    queue.push_back(r);
                }
            }
        }
        None
    }

    // ----- boolean operations --------------------------------------------

    /// Product automaton; `L(out) = L(self) ∩ L(other)`.
    pub fn intersect(&self, other: &Nfa) -> Result<Nfa, AutomataError> {
        self.ensure_same(other)?;
        let a = self.eliminate_epsilon();
        let b = other.eliminate_epsilon();
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs: Vec<(StateId, StateId)> = Vec::new();
        let mut out = Nfa {
            alphabet: self.alphabet.clone(),
            trans: Vec::new(),
            initial: 0,
            finals: Vec::new(),
        };
        let start = (a.initial, b.initial);
        index.insert(start, 0);
        pairs.push(start);
        out.trans.push(Vec::new());
        out.finals.push(false);
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            out.finals[i] = a.finals[p] && b.finals[q];
            let mut list = Vec::new();
            for &(l1, r1) in &a.trans[p] {
                let lo = b.trans[q].partition_point(|&(l, _)| l < l1);
                for &(l2, r2) in &b.trans[q][lo..] {
                    if l2 != l1 {
                        break;
                    }
                    let id = *index.entry((r1, r2)).or_insert_with(|| {
                        pairs.push((r1, r2));
                        out.trans.push(Vec::new());
                        out.finals.push(false);
                        pairs.len() - 1
                    });
                    list.push((l1, id));
                }
            }
            list.sort_unstable();
            list.dedup();
            out.trans[i] = list;
            i += 1;
        }
        Ok(out)
    }

    /// Subset construction. The result is deterministic and complete: every
    /// state has exactly one move per letter (a sink absorbs missing moves).
    pub fn determinize(&self) -> Nfa {
        let a = self.eliminate_epsilon();
        let k = a.alphabet.len();
        let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut sets: Vec<Vec<StateId>> = Vec::new();
        let start = vec![a.initial];
        index.insert(start.clone(), 0);
        sets.push(start);
        let mut out = Nfa {
            alphabet: a.alphabet.clone(),
            trans: Vec::new(),
            initial: 0,
            finals: Vec::new(),
        };
        let mut i = 0;
        while i < sets.len() {
            let set = sets[i].clone();
            out.finals.push(set.iter().any(|&q| a.finals[q]));
            let mut succ: Vec<Vec<StateId>> = vec![Vec::new(); k];
            for &q in &set {
                for &(l, r) in &a.trans[q] {
                    succ[l.expect("ε-free").index()].push(r);
                }
            }
            let mut list = Vec::with_capacity(k);
            for (s, mut t) in succ.into_iter().enumerate() {
                t.sort_unstable();
                t.dedup();
                let id = *index.entry(t.clone()).or_insert_with(|| {
                    sets.push(t);
                    sets.len() - 1
                });
                list.push((Some(Sym(s as u16)), id));
            }
            out.trans.push(list);
            i += 1;
        }
        out
    }

    /// `L(out) = Σ* \ L(self)`.
    pub fn complement(&self) -> Nfa {
        let mut d = self.determinize();
        d.finals.iter_mut().for_each(|f| *f = !*f);
        d
    }

    /// Exhaustive language comparison on all words up to `max_len`.
    pub fn agrees_up_to(&self, other: &Nfa, max_len: usize) -> bool {
        super::words_up_to(&self.alphabet, max_len).all(|w| self.accepts(&w) == other.accepts(&w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::words_up_to;

    fn ab() -> Alphabet {
        Alphabet::from_str_chars("ab").unwrap()
    }

    #[test]
    fn word_automaton() {
        let al = ab();
        let a = Nfa::from_str(&al, "ab").unwrap();
        assert!(a.accepts_str("ab"));
        assert!(!a.accepts_str("a"));
        assert!(!a.accepts_str("abb"));
        let e = Nfa::from_word(&al, &[]);
        assert!(e.accepts(&[]));
        assert!(!e.accepts_str("a"));
        assert!(Nfa::from_str(&al, "abc").is_err());
    }

    #[test]
    fn eps_elimination_preserves_language() {
        let al = ab();
        let a = Nfa::from_str(&al, "a")
            .unwrap()
            .star()
            .concat(&Nfa::from_str(&al, "b").unwrap())
            .unwrap();
        let e = a.eliminate_epsilon();
        assert!(!e.has_epsilon());
        assert!(a.agrees_up_to(&e, 6));
        let plain = Nfa::from_str(&al, "ab").unwrap();
        assert_eq!(plain.eliminate_epsilon(), plain);
    }

    #[test]
    fn epsilon_chain_collapses() {
        let al = ab();
        let mut a = Nfa::new(&al);
        let f = a.add_state();
        a.add_transition(0, None, f).unwrap();
        a.set_final(f, true).unwrap();
        let e = a.eliminate_epsilon().trim();
        assert_eq!(e.num_states(), 1);
        assert!(e.accepts(&[]));
        assert!(a.agrees_up_to(&e, 4));
    }

    #[test]
    fn intersection_and_complement() {
        let al = ab();
        let astar = Nfa::from_str(&al, "a").unwrap().star();
        let bstar = Nfa::from_str(&al, "b").unwrap().star();
        let i = astar.intersect(&bstar).unwrap();
        for w in words_up_to(&al, 5) {
            assert_eq!(i.accepts(&w), w.is_empty());
        }
        let univ = Nfa::universal(&al);
        assert!(univ.complement().is_empty());
        let abw = Nfa::from_str(&al, "ab").unwrap();
        let c = abw.complement();
        for w in words_up_to(&al, 4) {
            assert_eq!(c.accepts(&w), al.decode(&w) != "ab");
        }
        assert!(c.complement().agrees_up_to(&abw, 6));
    }

    #[test]
    fn shortest_is_length_lex_least() {
        let al = ab();
        let a = Nfa::from_str(&al, "ab")
            .unwrap()
            .union(&Nfa::from_str(&al, "b").unwrap())
            .unwrap();
        assert_eq!(al.decode(&a.shortest_word().unwrap()), "b");
        let c = Nfa::from_str(&al, "ba")
            .unwrap()
            .union(&Nfa::from_str(&al, "ab").unwrap())
            .unwrap();
        assert_eq!(al.decode(&c.shortest_word().unwrap()), "ab");
        let mut d = Nfa::new(&al);
        let f = d.add_state();
        d.set_final(f, true).unwrap();
        assert_eq!(d.shortest_word(), None);
    }

    #[test]
    fn slice_of_self_loop_accepts_epsilon() {
        let al = ab();
        let a = Nfa::from_str(&al, "ab").unwrap();
        for q in 0..a.num_states() {
            assert!(a.slice(q, q).unwrap().accepts(&[]));
        }
        assert!(a.slice(0, 9).is_err());
        assert!(a.slice(0, 2).unwrap().agrees_up_to(&a, 4));
    }
}
