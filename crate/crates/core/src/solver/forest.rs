//! Acyclic constraint forests and their solution by language propagation.
//!
//! After concatenations are removed, every string variable is a sequence of
//! segments. A segment is either a literal word or a forest node. Nodes carry
//! a regular constraint, and a non-root node is the image of its parent under
//! a transducer slice. Concatenation copies are not separate nodes: a
//! variable defined by concatenation simply reuses the nodes of its operands.

use std::sync::Arc;

use crate::automata::{Nfa, StateId, Transducer, Word};
use crate::constraints::VarId;

use super::SolveError;

/// A piece of a variable's value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Node(usize),
    Lit(Word),
}

/// Link from a node to its parent: `node = transducer(parent)`.
#[derive(Clone, Debug)]
pub struct ForestEdge {
    pub parent: usize,
    /// The slice `R[p, p2]` of the defining transducer.
    pub transducer: Arc<Transducer>,
    /// The slice boundaries `(p, p2)` in the unsliced transducer.
    pub states: (StateId, StateId),
}

#[derive(Clone, Debug)]
pub struct ForestNode {
    /// Regular constraint on the node's word (trimmed, ε-free).
    pub nfa: Arc<Nfa>,
    pub parent: Option<ForestEdge>,
    /// Variable whose definition created the node, and the segment index.
    pub origin: (VarId, usize),
}

/// A forest of nodes plus the segment layout of every string variable.
/// Parents always precede their children in `nodes`.
#[derive(Clone, Debug)]
pub struct AcForest {
    pub nodes: Vec<ForestNode>,
    pub layouts: Vec<Vec<Segment>>,
}

impl AcForest {
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(e) = &n.parent {
                ch[e.parent].push(i);
            }
        }
        ch
    }

    /// Values of all string variables given one word per node.
    pub fn assemble(&self, words: &[Word]) -> Vec<Word> {
        self.layouts
            .iter()
            .map(|layout| {
                let mut w = Vec::new();
                for s in layout {
                    match s {
                        Segment::Node(n) => w.extend_from_slice(&words[*n]),
                        Segment::Lit(l) => w.extend_from_slice(l),
                    }
                }
                w
            })
            .collect()
    }

    /// Largest node automaton.
    pub fn max_nfa_states(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.nfa.num_states())
            .max()
            .unwrap_or(0)
    }

    /// Checks the structural invariants: parents precede children, and every
    /// layout refers to existing nodes.
    pub fn is_valid(&self) -> bool {
        self.nodes
            .iter()
            .enumerate()
            .all(|(i, n)| n.parent.as_ref().is_none_or(|e| e.parent < i))
            && self.layouts.iter().flatten().all(|s| match s {
                Segment::Node(n) => *n < self.nodes.len(),
                Segment::Lit(_) => true,
            })
    }
}

/// Bottom-up feasible languages: a node's own constraint intersected with the
/// pre-images of its children's feasible languages. `None` if some node has
/// no feasible word.
pub fn feasible_languages(forest: &AcForest) -> Result<Option<Vec<Nfa>>, SolveError> {
    let children = forest.children();
    let mut feasible: Vec<Option<Nfa>> = vec![None; forest.nodes.len()];
    for i in (0..forest.nodes.len()).rev() {
        let mut lang = (*forest.nodes[i].nfa).clone();
        for &c in &children[i] {
            let edge = forest.nodes[c].parent.as_ref().expect("child has a parent");
            let pre = edge
                .transducer
                .pre_image(feasible[c].as_ref().expect("children are processed first"))?;
            lang = lang.intersect(&pre)?.trim();
            if lang.is_empty() {
                return Ok(None);
            }
        }
        if lang.is_empty() {
            return Ok(None);
        }
        feasible[i] = Some(lang);
    }
    Ok(Some(
        feasible
            .into_iter()
            .map(|f| f.expect("all nodes processed"))
            .collect(),
    ))
}

/// Solves the forest: `Some(words)` with one word per node, or `None` if the
/// forest has no solution. Roots get their shortest feasible word; every
/// child gets the shortest feasible word among the images of its parent's
/// word.
pub fn solve_ac_forest(forest: &AcForest) -> Result<Option<Vec<Word>>, SolveError> {
    let Some(feasible) = feasible_languages(forest)? else {
        return Ok(None);
    };
    let mut words: Vec<Word> = Vec::with_capacity(forest.nodes.len());
    for (i, node) in forest.nodes.iter().enumerate() {
        let w = match &node.parent {
            None => feasible[i].shortest_word(),
            Some(e) => {
                let img = e.transducer.apply(&words[e.parent]);
                img.intersect(&feasible[i])?.shortest_word()
            }
        };
        match w {
            Some(w) => words.push(w),
            None => {
                return Err(SolveError::Internal(format!(
                    "node {i} has no word compatible with its parent"
                )))
            }
        }
    }
    Ok(Some(words))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{regex_parse, Alphabet};

    fn node(nfa: Nfa, parent: Option<ForestEdge>) -> ForestNode {
        ForestNode {
            nfa: Arc::new(nfa),
            parent,
            origin: (0, 0),
        }
    }

    #[test]
    fn single_node() {
        let al = Alphabet::from_str_chars("a<").unwrap();
        let f = AcForest {
            nodes: vec![node(Nfa::from_str(&al, "a").unwrap(), None)],
            layouts: vec![vec![Segment::Node(0)]],
        };
        assert_eq!(
            solve_ac_forest(&f).unwrap(),
            Some(vec![al.encode("a").unwrap()])
        );
    }

    #[test]
    fn erase_edge() {
        let al = Alphabet::from_str_chars("a<").unwrap();
        let erase = Arc::new(Transducer::erase(&al, &[al.sym('<').unwrap()]));
        let edge = ForestEdge {
            parent: 0,
            transducer: erase,
            states: (0, 0),
        };
        let mk = |y: &str| AcForest {
            nodes: vec![
                node(Nfa::from_str(&al, "<a<").unwrap(), None),
                node(regex_parse(y, &al).unwrap(), Some(edge.clone())),
            ],
            layouts: vec![vec![Segment::Node(0)], vec![Segment::Node(1)]],
        };
        assert_eq!(solve_ac_forest(&mk("aa")).unwrap(), None);
        let words = solve_ac_forest(&mk("a")).unwrap().unwrap();
        assert_eq!(al.decode(&words[0]), "<a<");
        assert_eq!(al.decode(&words[1]), "a");
    }
}
