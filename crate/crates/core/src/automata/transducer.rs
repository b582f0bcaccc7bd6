use std::collections::{HashMap, VecDeque};

use super::{Alphabet, AutomataError, Nfa, StateId, Sym, Word};

/// One move of a transducer: input letter or ε, output letter or ε, target.
pub type Move = (Option<Sym>, Option<Sym>, StateId);

/// Finite-state transducer recognising a binary relation over words.
#[derive(Clone, Debug)]
pub struct Transducer {
    alphabet: Alphabet,
    trans: Vec<Vec<Move>>,
    initial: StateId,
    finals: Vec<bool>,
}

impl PartialEq for Transducer {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.trans == other.trans
            && self.initial == other.initial
            && self.finals == other.finals
    }
}

impl Eq for Transducer {}

impl Transducer {
    /// One non-final state and no moves.
    pub fn new(alphabet: &Alphabet) -> Self {
        Transducer {
            alphabet: alphabet.clone(),
            trans: vec![Vec::new()],
            initial: 0,
            finals: vec![false],
        }
    }

    pub fn with_states(
        alphabet: &Alphabet,
        n: usize,
        initial: StateId,
    ) -> Result<Self, AutomataError> {
        let n = n.max(1);
        if initial >= n {
            return Err(AutomataError::UnknownState(initial));
        }
        Ok(Transducer {
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

    pub fn transitions(&self, q: StateId) -> &[Move] {
        &self.trans[q]
    }

    pub fn add_transition(
        &mut self,
        from: StateId,
        input: Option<Sym>,
        output: Option<Sym>,
        to: StateId,
    ) -> Result<(), AutomataError> {
        self.check_state(from)?;
        self.check_state(to)?;
        for s in [input, output].into_iter().flatten() {
            if s.index() >= self.alphabet.len() {
                return Err(AutomataError::UnknownSymbol(s.index()));
            }
        }
        self.push_sorted(from, (input, output, to));
        Ok(())
    }

    fn push_sorted(&mut self, from: StateId, m: Move) {
        let list = &mut self.trans[from];
        if let Err(pos) = list.binary_search(&m) {
            list.insert(pos, m);
        }
    }

    fn check_state(&self, q: StateId) -> Result<(), AutomataError> {
        if q < self.trans.len() {
            Ok(())
        } else {
            Err(AutomataError::UnknownState(q))
        }
    }

    // ----- builtin shapes --------------------------------------------------

    /// The identity relation `{(w, w)}`.
    pub fn identity(alphabet: &Alphabet) -> Self {
        let mut t = Transducer::new(alphabet);
        t.finals[0] = true;
        for s in alphabet.syms() {
            t.push_sorted(0, (Some(s), Some(s), 0));
        }
        t
    }

    /// Deletes every occurrence of the given letters and copies the rest.
    pub fn erase(alphabet: &Alphabet, letters: &[Sym]) -> Self {
        let mut t = Transducer::new(alphabet);
        t.finals[0] = true;
        for s in alphabet.syms() {
            let out = if letters.contains(&s) { None } else { Some(s) };
            t.push_sorted(0, (Some(s), out, 0));
        }
        t
    }

    /// Letter-wise substitution: each letter listed in `rules` is replaced by
    /// its word, every other letter is copied.
    pub fn substitution(alphabet: &Alphabet, rules: &[(Sym, Word)]) -> Self {
        let mut t = Transducer::new(alphabet);
        t.finals[0] = true;
        for s in alphabet.syms() {
            match rules.iter().find(|(a, _)| *a == s) {
                None => t.push_sorted(0, (Some(s), Some(s), 0)),
                Some((_, w)) if w.is_empty() => t.push_sorted(0, (Some(s), None, 0)),
                Some((_, w)) => {
                    let mut cur = 0;
                    for (i, &o) in w.iter().enumerate() {
                        let input = if i == 0 { Some(s) } else { None };
                        let next = if i + 1 == w.len() { 0 } else { t.add_state() };
                        t.push_sorted(cur, (input, Some(o), next));
                        cur = next;
                    }
                }
            }
        }
        t
    }

    // ----- structure ---------------------------------------------------------

    /// Same relation, but every move reads or writes at most one letter:
    /// `(a, b)` moves go through a fresh middle state as `(a, ε)(ε, b)` and
    /// `(ε, ε)` moves are removed.
    pub fn normalize(&self) -> Transducer {
        let t = self.eliminate_eps_pairs();
        let mut out = Transducer {
            alphabet: t.alphabet.clone(),
            trans: vec![Vec::new(); t.num_states()],
            initial: t.initial,
            finals: t.finals.clone(),
        };
        for q in 0..t.num_states() {
            for &(a, b, r) in &t.trans[q] {
                if a.is_some() && b.is_some() {
                    let mid = out.add_state();
                    out.push_sorted(q, (a, None, mid));
                    out.push_sorted(mid, (None, b, r));
                } else {
                    out.push_sorted(q, (a, b, r));
                }
            }
        }
        out
    }

    pub fn is_normalized(&self) -> bool {
        self.trans
            .iter()
            .flatten()
            .all(|&(a, b, _)| a.is_some() != b.is_some())
    }

    fn eps_pair_closure(&self, q: StateId) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        seen[q] = true;
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            for &(a, b, r) in &self.trans[p] {
                if a.is_none() && b.is_none() && !seen[r] {
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

    /// Removes `(ε, ε)` moves without changing the relation.
    pub fn eliminate_eps_pairs(&self) -> Transducer {
        if !self
            .trans
            .iter()
            .flatten()
            .any(|&(a, b, _)| a.is_none() && b.is_none())
        {
            return self.clone();
        }
        let n = self.num_states();
        let mut out = Transducer {
            alphabet: self.alphabet.clone(),
            trans: vec![Vec::new(); n],
            initial: self.initial,
            finals: vec![false; n],
        };
        for q in 0..n {
            let mut list = Vec::new();
            for p in self.eps_pair_closure(q) {
                out.finals[q] |= self.finals[p];
                list.extend(
                    self.trans[p]
                        .iter()
                        .filter(|(a, b, _)| a.is_some() || b.is_some())
                        .copied(),
                );
            }
            list.sort_unstable();
            list.dedup();
            out.trans[q] = list;
        }
        out
    }

    pub fn reachable_from(&self, q: StateId) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[q] = true;
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            for &(_, _, r) in &self.trans[p] {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (q, list) in self.trans.iter().enumerate() {
            for &(_, _, r) in list {
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

    /// Drops useless states; the initial state is always kept.
    pub fn trim(&self) -> Transducer {
        let fwd = self.reachable_from(self.initial);
        let bwd = self.coreachable();
        let keep: Vec<bool> = (0..self.num_states())
            .map(|q| q == self.initial || (fwd[q] && bwd[q]))
            .collect();
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
        let mut out = Transducer {
            alphabet: self.alphabet.clone(),
            trans: vec![Vec::new(); n],
            initial: map[self.initial],
            finals: vec![false; n],
        };
        for q in (0..self.num_states()).filter(|&q| keep[q]) {
            out.finals[map[q]] = self.finals[q];
            out.trans[map[q]] = self.trans[q]
                .iter()
                .filter(|m| keep[m.2])
                .map(|&(a, b, r)| (a, b, map[r]))
                .collect();
        }
        out
    }

    /// Sub-transducer `R[p, p2]`, trimmed.
    pub fn slice(&self, p: StateId, p2: StateId) -> Result<Transducer, AutomataError> {
        self.check_state(p)?;
        self.check_state(p2)?;
        let mut out = self.clone();
        out.initial = p;
        out.finals.iter_mut().for_each(|f| *f = false);
        out.finals[p2] = true;
        Ok(out.trim())
    }

    // ----- semantics -----------------------------------------------------------

    /// Decides `(x, y) ∈ R` by search over (input position, output position, state).
    pub fn accepts(&self, x: &[Sym], y: &[Sym]) -> bool {
        let n = self.num_states();
        let idx = |i: usize, j: usize, q: StateId| (i * (y.len() + 1) + j) * n + q;
        let mut seen = vec![false; (x.len() + 1) * (y.len() + 1) * n];
        let mut stack = vec![(0usize, 0usize, self.initial)];
        seen[idx(0, 0, self.initial)] = true;
        while let Some((i, j, q)) = stack.pop() {
            if i == x.len() && j == y.len() && self.finals[q] {
                return true;
            }
            for &(a, b, r) in &self.trans[q] {
                let ni = match a {
                    None => i,
                    Some(s) if i < x.len() && x[i] == s => i + 1,
                    Some(_) => continue,
                };
                let nj = match b {
                    None => j,
                    Some(s) if j < y.len() && y[j] == s => j + 1,
                    Some(_) => continue,
                };
                let k = idx(ni, nj, r);
                if !seen[k] {
                    seen[k] = true;
                    stack.push((ni, nj, r));
                }
            }
        }
        false
    }

    /// `{ x : ∃y. (x, y) ∈ R ∧ y ∈ L(a) }`.
    pub fn pre_image(&self, a: &Nfa) -> Result<Nfa, AutomataError> {
        self.image(a, true)
    }

    /// `{ y : ∃x ∈ L(a). (x, y) ∈ R }`.
    pub fn post_image(&self, a: &Nfa) -> Result<Nfa, AutomataError> {
        self.image(a, false)
    }

    /// Product of the transducer with `a` on one side, projected onto the
    /// other side. `pre` selects which side `a` constrains.
    fn image(&self, a: &Nfa, pre: bool) -> Result<Nfa, AutomataError> {
        if !self.alphabet.same_as(a.alphabet()) {
            return Err(AutomataError::AlphabetMismatch);
        }
        let a = a.eliminate_epsilon();
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs = vec![(self.initial, a.initial())];
        index.insert(pairs[0], 0);
        let mut out = Nfa::new(&self.alphabet);
        let mut queue = VecDeque::from([0usize]);
        let mut edges: Vec<(StateId, Option<Sym>, (StateId, StateId))> = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (p, q) = pairs[i];
            edges.clear();
            for &(inp, outp, r) in &self.trans[p] {
                let (kept, checked) = if pre { (inp, outp) } else { (outp, inp) };
                match checked {
                    None => edges.push((i, kept, (r, q))),
                    Some(s) => {
                        for &(l, q2) in a.transitions(q) {
                            if l == Some(s) {
                                edges.push((i, kept, (r, q2)));
                            }
                        }
                    }
                }
            }
            for &(from, label, key) in &edges {
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = out.add_state();
                        index.insert(key, id);
                        pairs.push(key);
                        queue.push_back(id);
                        id
                    }
                };
                out.add_transition(from, label, id)?;
            }
        }
        for (i, &(p, q)) in pairs.iter().enumerate() {
            if self.finals[p] && a.is_final(q) {
                out.set_final(i, true)?;
            }
        }
        Ok(out.eliminate_epsilon().trim())
    }

    /// All outputs for the input `x`, as an automaton.
    pub fn apply(&self, x: &[Sym]) -> Nfa {
        self.post_image(&Nfa::from_word(&self.alphabet, x))
            .expect("same alphabet")
    }

    /// The unique output for `x`, or `None` if there is no output or more
    /// than one.
    pub fn apply_unique(&self, x: &[Sym]) -> Option<Word> {
        let img = self.apply(x);
        let w = img.shortest_word()?;
        let other = img
            .intersect(&Nfa::from_word(&self.alphabet, &w).complement())
            .expect("same alphabet");
        if other.is_empty() {
            Some(w)
        } else {
            None
        }
    }

    /// String convenience wrapper around [`Transducer::apply_unique`].
    pub fn apply_str(&self, x: &str) -> Option<String> {
        let w = self.alphabet.encode(x).ok()?;
        self.apply_unique(&w).map(|o| self.alphabet.decode(&o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::words_up_to;

    fn al() -> Alphabet {
        Alphabet::from_str_chars("a<b").unwrap()
    }

    #[test]
    fn erase_membership() {
        let al = al();
        let e = Transducer::erase(&al, &[al.sym('<').unwrap()]);
        let enc = |s: &str| al.encode(s).unwrap();
        assert!(e.accepts(&enc("<a<b"), &enc("ab")));
        assert!(!e.accepts(&enc("a"), &enc("b")));
        assert_eq!(e.apply_str("<a<"), Some("a".to_string()));
    }

    #[test]
    fn identity_images() {
        let al = al();
        let id = Transducer::identity(&al);
        let a = Nfa::from_str(&al, "ab").unwrap().star();
        assert!(id.pre_image(&a).unwrap().agrees_up_to(&a, 5));
        assert!(id.post_image(&a).unwrap().agrees_up_to(&a, 5));
        let empty = Nfa::empty_language(&al);
        assert!(id.pre_image(&empty).unwrap().is_empty());
    }

    #[test]
    fn erase_pre_image() {
        let al = al();
        let e = Transducer::erase(&al, &[al.sym('<').unwrap()]);
        let pre = e.pre_image(&Nfa::from_str(&al, "aa").unwrap()).unwrap();
        assert!(pre.accepts_str("<a<a<"));
        assert!(!pre.accepts_str("ab"));
        let post = e.post_image(&Nfa::from_str(&al, "<a<").unwrap()).unwrap();
        for w in words_up_to(&al, 3) {
            assert_eq!(post.accepts(&w), al.decode(&w) == "a");
        }
    }

    #[test]
    fn substitution_and_normalization() {
        let al = al();
        let t = Transducer::substitution(&al, &[(al.sym('<').unwrap(), al.encode("ab").unwrap())]);
        assert_eq!(t.apply_str("a<"), Some("aab".to_string()));
        let n = t.normalize();
        assert!(n.is_normalized());
        for x in words_up_to(&al, 3) {
            for y in words_up_to(&al, 4) {
                assert_eq!(t.accepts(&x, &y), n.accepts(&x, &y));
            }
        }
    }

    #[test]
    fn eps_pairs_are_removed() {
        let al = al();
        let mut t = Transducer::new(&al);
        let f = t.add_state();
        t.add_transition(0, None, None, f).unwrap();
        t.add_transition(f, Some(Sym(0)), Some(Sym(0)), f).unwrap();
        t.set_final(f, true).unwrap();
        let e = t.eliminate_eps_pairs();
        assert!(e
            .trans
            .iter()
            .flatten()
            .all(|&(a, b, _)| a.is_some() || b.is_some()));
        assert!(e.accepts(&[], &[]));
        assert!(e.accepts(&[Sym(0)], &[Sym(0)]));
        assert!(e.slice(0, 0).unwrap().accepts(&[], &[]));
    }
}
