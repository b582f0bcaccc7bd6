//! Multi-track automaton recognising the solutions of an acyclic forest.
//!
//! Track `i` reads the word of forest node `i`. A state is a tuple holding
//! the automaton state of every node and the transducer state of every edge.
//! A root emits a letter on its own; a child emits whenever its edge takes an
//! output move. Every emitted letter is consumed at once by the input side of
//! all edges leaving the emitting node.

use std::collections::{HashMap, VecDeque};

use crate::automata::{Alphabet, MultiTrackAutomaton, Nfa, StateId, Sym, Transducer};
use crate::solver::{AcForest, SolveError};

/// Machines of one forest, with edge transducers split into one-sided moves.
struct Parts {
    nfas: Vec<Nfa>,
    edges: Vec<Option<Transducer>>,
    children: Vec<Vec<usize>>,
}

impl Parts {
    fn new(forest: &AcForest) -> Self {
        let nfas = forest
            .nodes
            .iter()
            .map(|n| {
                if n.nfa.has_epsilon() {
                    n.nfa.eliminate_epsilon()
                } else {
                    (*n.nfa).clone()
                }
            })
            .collect();
        let edges = forest
            .nodes
            .iter()
            .map(|n| n.parent.as_ref().map(|e| e.transducer.normalize()))
            .collect();
        Parts {
            nfas,
            edges,
            children: forest.children(),
        }
    }

    fn initial(&self) -> Vec<u32> {
        let n = self.nfas.len();
        let mut t = vec![0u32; 2 * n];
        for i in 0..n {
            t[i] = self.nfas[i].initial() as u32;
            if let Some(e) = &self.edges[i] {
                t[n + i] = e.initial() as u32;
            }
        }
        t
    }

    fn is_final(&self, t: &[u32]) -> bool {
        let n = self.nfas.len();
        (0..n).all(|i| {
            self.nfas[i].is_final(t[i] as StateId)
                && self.edges[i]
                    .as_ref()
                    .is_none_or(|e| e.is_final(t[n + i] as StateId))
        })
    }

    /// All tuples reached when node `node` emits `a` from `t`.
    fn emit(&self, t: &[u32], node: usize, a: Sym, out: &mut Vec<Vec<u32>>) {
        for r in self.nfas[node].successors(t[node] as StateId, Some(a)) {
            let mut next = t.to_vec();
            next[node] = r as u32;
            self.feed_children(&next, &self.children[node], a, out);
        }
    }

    /// Every edge in `edges` reads `a` on its input side.
    fn feed_children(&self, t: &[u32], edges: &[usize], a: Sym, out: &mut Vec<Vec<u32>>) {
        let Some((&c, rest)) = edges.split_first() else {
            out.push(t.to_vec());
            return;
        };
        let n = self.nfas.len();
        let edge = self.edges[c].as_ref().expect("children have an edge");
        for &(inp, outp, r) in edge.transitions(t[n + c] as StateId) {
            if inp == Some(a) && outp.is_none() {
                let mut next = t.to_vec();
                next[n + c] = r as u32;
                self.feed_children(&next, rest, a, out);
            }
        }
    }

    /// Successor tuples, each labelled with the emitting node and letter.
    fn successors(&self, t: &[u32]) -> Vec<(usize, Sym, Vec<u32>)> {
        let n = self.nfas.len();
        let mut res = Vec::new();
        let mut buf = Vec::new();
        for node in 0..n {
            match &self.edges[node] {
                None => {
                    let mut letters: Vec<Sym> = self.nfas[node]
                        .transitions(t[node] as StateId)
                        .iter()
                        .filter_map(|m| m.0)
                        .collect();
                    letters.dedup();
                    for a in letters {
                        self.emit(t, node, a, &mut buf);
                        res.extend(buf.drain(..).map(|s| (node, a, s)));
                    }
                }
                Some(edge) => {
                    for &(inp, outp, r) in edge.transitions(t[n + node] as StateId) {
                        let (None, Some(b)) = (inp, outp) else {
                            continue;
                        };
                        let mut moved = t.to_vec();
                        moved[n + node] = r as u32;
                        self.emit(&moved, node, b, &mut buf);
                        res.extend(buf.drain(..).map(|s| (node, b, s)));
                    }
                }
            }
        }
        res
    }
}

/// Builds the trimmed solution automaton of `forest`. Its accepted tuples are
/// exactly the node words of the forest's solutions. Fails with a resource
/// error when more than `max_states` product states are reachable.
pub fn build_tree_solution_automaton(
    forest: &AcForest,
    alphabet: &Alphabet,
    max_states: usize,
) -> Result<MultiTrackAutomaton, SolveError> {
    let parts = Parts::new(forest);
    let n = forest.nodes.len();
    let tracks: Vec<String> = (0..n).map(|i| format!("node{i}")).collect();

    let init = parts.initial();
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut tuples = vec![init.clone()];
    let mut edges: Vec<Vec<(usize, Sym, usize)>> = vec![Vec::new()];
    index.insert(init, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let succ = parts.successors(&tuples[i]);
        for (node, a, t) in succ {
            let j = match index.get(&t) {
                Some(&j) => j,
                None => {
                    if tuples.len() >= max_states {
                        return Err(SolveError::ResourceLimit(format!(
                            "solution automaton exceeds {max_states} states"
                        )));
                    }
                    tuples.push(t.clone());
                    edges.push(Vec::new());
                    index.insert(t, tuples.len() - 1);
                    queue.push_back(tuples.len() - 1);
                    tuples.len() - 1
                }
            };
            edges[i].push((node, a, j));
        }
    }

    // Keep the initial state and every state that can still reach a final one.
    let finals: Vec<bool> = tuples.iter().map(|t| parts.is_final(t)).collect();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); tuples.len()];
    for (i, list) in edges.iter().enumerate() {
        for &(_, _, j) in list {
            rev[j].push(i);
        }
    }
    let mut live = finals.clone();
    let mut stack: Vec<usize> = (0..tuples.len()).filter(|&i| finals[i]).collect();
    while let Some(j) = stack.pop() {
        for &i in &rev[j] {
            if !live[i] {
                live[i] = true;
                stack.push(i);
            }
        }
    }
    live[0] = true;
    let mut map = vec![usize::MAX; tuples.len()];
    let mut m = MultiTrackAutomaton::new(alphabet, tracks);
    map[0] = 0;
    for i in 1..tuples.len() {
        if live[i] {
            map[i] = m.add_state();
        }
    }
    for i in (0..tuples.len()).filter(|&i| live[i]) {
        m.finals[map[i]] = finals[i];
        for &(node, a, j) in &edges[i] {
            if live[j] {
                let mut label = vec![None; n];
                label[node] = Some(a);
                m.add_transition(map[i], label, map[j]);
            }
        }
    }
    Ok(m)
}

/// Transitions of `m` as `(track, letter, target)`, assuming every label
/// carries exactly one letter.
pub(crate) fn emissions(m: &MultiTrackAutomaton) -> Vec<Vec<(usize, Sym, StateId)>> {
    m.trans
        .iter()
        .map(|list| {
            list.iter()
                .map(|(label, r)| {
                    let (k, a) = label
                        .iter()
                        .enumerate()
                        .find_map(|(k, l)| l.map(|a| (k, a)))
                        .expect("one letter per move");
                    (k, a, *r)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::automata::words_up_to;
    use crate::solver::{ForestEdge, ForestNode, Segment};

    fn node(nfa: Nfa, parent: Option<ForestEdge>) -> ForestNode {
        ForestNode {
            nfa: Arc::new(nfa),
            parent,
            origin: (0, 0),
        }
    }

    fn chain(t: Transducer, x: Nfa, y: Nfa) -> AcForest {
        let edge = ForestEdge {
            parent: 0,
            transducer: Arc::new(t),
            states: (0, 0),
        };
        AcForest {
            nodes: vec![node(x, None), node(y, Some(edge))],
            layouts: vec![vec![Segment::Node(0)], vec![Segment::Node(1)]],
        }
    }

    #[test]
    fn single_node() {
        let al = Alphabet::from_str_chars("ab").unwrap();
        let f = AcForest {
            nodes: vec![node(Nfa::from_str(&al, "a").unwrap(), None)],
            layouts: vec![vec![Segment::Node(0)]],
        };
        let m = build_tree_solution_automaton(&f, &al, 100).unwrap();
        for w in words_up_to(&al, 3) {
            assert_eq!(m.accepts(std::slice::from_ref(&w)), al.decode(&w) == "a");
        }
    }

    #[test]
    fn identity_pairs() {
        let al = Alphabet::from_str_chars("a").unwrap();
        let f = chain(
            Transducer::identity(&al),
            Nfa::universal(&al),
            Nfa::universal(&al),
        );
        let m = build_tree_solution_automaton(&f, &al, 100).unwrap();
        for x in words_up_to(&al, 4) {
            for y in words_up_to(&al, 4) {
                assert_eq!(m.accepts(&[x.clone(), y.clone()]), x == y);
            }
        }
    }

    #[test]
    fn erase_pairs() {
        let al = Alphabet::from_str_chars("a<").unwrap();
        let erase = Transducer::erase(&al, &[al.sym('<').unwrap()]);
        let f = chain(erase, Nfa::universal(&al), Nfa::universal(&al));
        let m = build_tree_solution_automaton(&f, &al, 1000).unwrap();
        let enc = |s: &str| al.encode(s).unwrap();
        assert!(m.accepts(&[enc("<a<"), enc("a")]));
        assert!(!m.accepts(&[enc("<a<"), enc("aa")]));
    }
}
