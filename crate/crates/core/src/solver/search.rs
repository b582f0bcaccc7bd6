//! Concatenation removal: enumeration of acyclic forests.
//!
//! Variables are visited in straight-line order. A source becomes one root
//! node. A concatenation-defined variable reuses the segments of its
//! operands; if it carries a regular constraint `P`, the search picks a
//! splitting `q0, …, qm` of `P` along its segments, where literal segments
//! must lead from `q(i-1)` to `q(i)` by exactly their word and node segments
//! are refined with the slice `P[q(i-1), q(i)]`. A transducer-defined
//! variable `y = R(x)` gets one fresh node per segment of `x`, and the search
//! jointly picks a splitting of `R` and of `y`'s constraint. Splittings are
//! enumerated over a layered graph of boundary states whose edges are kept
//! only when the segment language between them is nonempty.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use crate::automata::{Nfa, StateId, Sym, Transducer};
use crate::constraints::{Item, Problem, RelAtom, VarId};
use crate::straightline::StraightLine;

use super::forest::{AcForest, ForestEdge, ForestNode, Segment};
use super::regular::RegularBranch;
use super::SolveError;

/// Search budget and work counters shared by one solver run.
#[derive(Clone, Debug, Default)]
pub struct SearchControl {
    pub deadline: Option<Instant>,
    pub max_forests: Option<u64>,
    pub forests: u64,
    pub steps: u64,
    pub max_nfa_states: usize,
    pub max_forest_nodes: usize,
}

impl SearchControl {
    fn step(&mut self) -> Result<(), SolveError> {
        self.steps += 1;
        if self.steps.is_multiple_of(32) {
            self.check_time()?;
        }
        Ok(())
    }

    pub fn check_time(&self) -> Result<(), SolveError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => {
                Err(SolveError::ResourceLimit("time limit reached".into()))
            }
            _ => Ok(()),
        }
    }

    fn note(&mut self, nfa: &Nfa) {
        self.max_nfa_states = self.max_nfa_states.max(nfa.num_states());
    }
}

/// Callback receiving each complete forest; `Some` stops the enumeration.
pub type ForestSink<'s, B> = dyn FnMut(AcForest) -> Result<Option<B>, SolveError> + 's;

/// Product of an input-side automaton, a transducer and an output-side
/// automaton, projected onto the output. Finals are not set; callers pick
/// the target boundary states.
struct Product {
    nfa: Nfa,
    /// (input state, transducer state, output state) of each product state.
    keys: Vec<(StateId, StateId, StateId)>,
}

impl Product {
    /// Runs of `r` from `p` that read a word of `input` and write a word
    /// read by `out` from `q`. With `r = None` the relation is the identity.
    fn build(input: &Nfa, r: Option<&Transducer>, p: StateId, out: &Nfa, q: StateId) -> Product {
        let mut index: HashMap<(StateId, StateId, StateId), usize> = HashMap::new();
        let start = (input.initial(), p, q);
        let mut keys = vec![start];
        index.insert(start, 0);
        let mut trans: Vec<Vec<(Option<Sym>, StateId)>> = vec![Vec::new()];
        let mut i = 0;
        while i < keys.len() {
            let (a, t, b) = keys[i];
            let mut moves: Vec<(Option<Sym>, (StateId, StateId, StateId))> = Vec::new();
            match r {
                None => {
                    for &(l, a2) in input.transitions(a) {
                        for b2 in out.successors(b, l) {
                            moves.push((l, (a2, t, b2)));
                        }
                    }
                }
                Some(r) => {
                    for &(inp, outp, t2) in r.transitions(t) {
                        let ins: Vec<StateId> = match inp {
                            None => vec![a],
                            Some(s) => input.successors(a, Some(s)).collect(),
                        };
                        let outs: Vec<StateId> = match outp {
                            None => vec![b],
                            Some(s) => out.successors(b, Some(s)).collect(),
                        };
                        for &a2 in &ins {
                            for &b2 in &outs {
                                moves.push((outp, (a2, t2, b2)));
                            }
                        }
                    }
                }
            }
            for (l, key) in moves {
                let id = *index.entry(key).or_insert_with(|| {
                    keys.push(key);
                    trans.push(Vec::new());
                    keys.len() - 1
                });
                trans[i].push((l, id));
            }
            i += 1;
        }
        let finals = vec![false; keys.len()];
        let nfa = Nfa::from_parts(out.alphabet(), trans, 0, finals)
            .expect("product states are consistent");
        Product { nfa, keys }
    }

    /// Boundary pairs `(transducer state, output state)` reachable at the end
    /// of an input word.
    fn ends(&self, input: &Nfa) -> BTreeSet<(StateId, StateId)> {
        self.keys
            .iter()
            .filter(|k| input.is_final(k.0))
            .map(|k| (k.1, k.2))
            .collect()
    }

    /// Output language of the runs ending in `(t2, q2)`, trimmed and ε-free.
    fn language_to(&self, input: &Nfa, t2: StateId, q2: StateId) -> Nfa {
        let mut a = self.nfa.clone();
        for (i, k) in self.keys.iter().enumerate() {
            if input.is_final(k.0) && k.1 == t2 && k.2 == q2 {
                a.set_final(i, true).expect("state exists");
            }
        }
        a.eliminate_epsilon().trim()
    }
}

/// Layered boundary graph of one splitting problem. Layer `i` holds the
/// boundary states before segment `i`; `succ[i]` maps a boundary to its
/// sorted successors; `viable[i]` holds boundaries from which the last layer
/// can be reached.
struct Layers<K: Ord + Copy> {
    succ: Vec<HashMap<K, Vec<K>>>,
    viable: Vec<BTreeSet<K>>,
}

impl<K: Ord + Copy + std::hash::Hash> Layers<K> {
    fn build(
        start: K,
        m: usize,
        is_final: impl Fn(K) -> bool,
        mut next: impl FnMut(usize, K) -> Result<Vec<K>, SolveError>,
    ) -> Result<Self, SolveError> {
        let mut succ: Vec<HashMap<K, Vec<K>>> = Vec::with_capacity(m);
        let mut frontier: BTreeSet<K> = BTreeSet::from([start]);
        for i in 0..m {
            let mut map = HashMap::new();
            let mut nf = BTreeSet::new();
            for &k in &frontier {
                let mut s = next(i, k)?;
                s.sort_unstable();
                s.dedup();
                nf.extend(s.iter().copied());
                map.insert(k, s);
            }
            succ.push(map);
            frontier = nf;
        }
        let mut viable = vec![BTreeSet::new(); m + 1];
        viable[m] = frontier.into_iter().filter(|&k| is_final(k)).collect();
        for i in (0..m).rev() {
            let v: BTreeSet<K> = succ[i]
                .iter()
                .filter(|(_, s)| s.iter().any(|k| viable[i + 1].contains(k)))
                .map(|(&k, _)| k)
                .collect();
            viable[i] = v;
        }
        Ok(Layers { succ, viable })
    }

    fn successors(&self, i: usize, k: K) -> Vec<K> {
        self.succ[i].get(&k).map_or_else(Vec::new, |s| {
            s.iter()
                .copied()
                .filter(|n| self.viable[i + 1].contains(n))
                .collect()
        })
    }
}

#[derive(Clone)]
struct State {
    nodes: Vec<ForestNode>,
    layouts: Vec<Vec<Segment>>,
}

/// Layout of a concatenation: operand layouts joined, with adjacent literals
/// merged and empty literals dropped.
fn concat_layout(rhs: &[Item], layouts: &[Vec<Segment>]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    let push = |s: &Segment, out: &mut Vec<Segment>| match (s, out.last_mut()) {
        (Segment::Lit(w), _) if w.is_empty() => {}
        (Segment::Lit(w), Some(Segment::Lit(prev))) => prev.extend_from_slice(w),
        (s, _) => out.push(s.clone()),
    };
    for it in rhs {
        match it {
            Item::Var(v) => {
                for s in &layouts[*v] {
                    push(s, &mut out);
                }
            }
            Item::Lit(w) => push(&Segment::Lit(w.clone()), &mut out),
        }
    }
    out
}

struct Search<'a, 's, B> {
    problem: &'a Problem,
    sl: &'a StraightLine,
    branch: &'a RegularBranch,
    ctl: &'a mut SearchControl,
    sink: &'a mut ForestSink<'s, B>,
}

type Res<B> = Result<Option<B>, SolveError>;

impl<'a, 's, B> Search<'a, 's, B> {
    fn visit(&mut self, k: usize, mut st: State) -> Res<B> {
        self.ctl.step()?;
        if k == self.sl.order.len() {
            return self.emit(st);
        }
        let v = self.sl.order[k];
        match self.sl.def[v].map(|i| &self.problem.relational[i]) {
            None => {
                let nfa = self.branch.nfas[v].clone();
                st.layouts[v] = vec![Segment::Node(st.nodes.len())];
                st.nodes.push(ForestNode {
                    nfa,
                    parent: None,
                    origin: (v, 0),
                });
                self.visit(k + 1, st)
            }
            Some(RelAtom::Concat { rhs, .. }) => {
                let layout = concat_layout(rhs, &st.layouts);
                if !self.branch.constrained[v] {
                    st.layouts[v] = layout;
                    return self.visit(k + 1, st);
                }
                self.split_concat(k, v, layout, st)
            }
            Some(RelAtom::Trans {
                transducer, arg, ..
            }) => {
                let mut layout = st.layouts[*arg].clone();
                if layout.is_empty() {
                    layout.push(Segment::Lit(Vec::new()));
                }
                let r = transducer.clone();
                self.split_trans(k, v, &r, layout, st)
            }
        }
    }

    fn emit(&mut self, st: State) -> Res<B> {
        self.ctl.forests += 1;
        if let Some(max) = self.ctl.max_forests {
            if self.ctl.forests > max {
                return Err(SolveError::ResourceLimit(format!(
                    "more than {max} forests explored"
                )));
            }
        }
        self.ctl.max_forest_nodes = self.ctl.max_forest_nodes.max(st.nodes.len());
        (self.sink)(AcForest {
            nodes: st.nodes,
            layouts: st.layouts,
        })
    }

    /// Splits the constraint of a concatenation-defined variable along its
    /// segments.
    fn split_concat(&mut self, k: usize, v: VarId, layout: Vec<Segment>, st: State) -> Res<B> {
        let p = self.branch.nfas[v].clone();
        let m = layout.len();
        let layers = Layers::build(
            p.initial(),
            m,
            |q| p.is_final(q),
            |i, q| {
                Ok(match &layout[i] {
                    Segment::Lit(w) => p.run_from(&[q], w),
                    Segment::Node(n) => {
                        let local = &st.nodes[*n].nfa;
                        let prod = Product::build(local, None, 0, &p, q);
                        prod.ends(local).into_iter().map(|(_, q2)| q2).collect()
                    }
                })
            },
        )?;
        let mut st = st;
        st.layouts[v] = layout.clone();
        self.concat_path(k, &p, &layout, &layers, 0, p.initial(), st)
    }

    #[allow(clippy::too_many_arguments)]
    fn concat_path(
        &mut self,
        k: usize,
        p: &Nfa,
        layout: &[Segment],
        layers: &Layers<StateId>,
        i: usize,
        q: StateId,
        st: State,
    ) -> Res<B> {
        if i == layout.len() {
            return self.visit(k + 1, st);
        }
        for q2 in layers.successors(i, q) {
            self.ctl.step()?;
            let mut next = st.clone();
            if let Segment::Node(n) = &layout[i] {
                let local = &st.nodes[*n].nfa;
                let refined = Product::build(local, None, 0, p, q).language_to(local, 0, q2);
                if refined.is_empty() {
                    continue;
                }
                self.ctl.note(&refined);
                next.nodes[*n].nfa = Arc::new(refined);
            }
            if let Some(b) = self.concat_path(k, p, layout, layers, i + 1, q2, next)? {
                return Ok(Some(b));
            }
        }
        Ok(None)
    }

    /// Splits the transducer of `v = R(x)` jointly with `v`'s constraint
    /// along the segments of `x`.
    fn split_trans(
        &mut self,
        k: usize,
        v: VarId,
        r: &Arc<Transducer>,
        layout: Vec<Segment>,
        st: State,
    ) -> Res<B> {
        let p = self.branch.nfas[v].clone();
        let m = layout.len();
        let inputs: Vec<Arc<Nfa>> = layout
            .iter()
            .map(|s| match s {
                Segment::Node(n) => st.nodes[*n].nfa.clone(),
                Segment::Lit(w) => Arc::new(Nfa::from_word(&self.problem.alphabet, w)),
            })
            .collect();
        let mut products: HashMap<(usize, StateId, StateId), Product> = HashMap::new();
        let layers = Layers::build(
            (r.initial(), p.initial()),
            m,
            |(t, q)| r.is_final(t) && p.is_final(q),
            |i, (t, q)| {
                let prod = Product::build(&inputs[i], Some(r), t, &p, q);
                let ends = prod.ends(&inputs[i]).into_iter().collect();
                products.insert((i, t, q), prod);
                Ok(ends)
            },
        )?;
        let mut ctx = TransCtx {
            v,
            r,
            layout: &layout,
            inputs: &inputs,
            products,
            languages: HashMap::new(),
            slices: HashMap::new(),
        };
        let mut st = st;
        st.layouts[v] = Vec::with_capacity(m);
        self.trans_path(k, &mut ctx, &layers, 0, (r.initial(), p.initial()), st)
    }

    fn trans_path(
        &mut self,
        k: usize,
        ctx: &mut TransCtx<'_>,
        layers: &Layers<(StateId, StateId)>,
        i: usize,
        from: (StateId, StateId),
        st: State,
    ) -> Res<B> {
        if i == ctx.layout.len() {
            return self.visit(k + 1, st);
        }
        for to in layers.successors(i, from) {
            self.ctl.step()?;
            let lang = ctx.language(i, from, to);
            if lang.is_empty() {
                continue;
            }
            self.ctl.note(&lang);
            let parent = match &ctx.layout[i] {
                Segment::Node(n) => Some(ForestEdge {
                    parent: *n,
                    transducer: ctx.slice(from.0, to.0)?,
                    states: (from.0, to.0),
                }),
                Segment::Lit(_) => None,
            };
            let mut next = st.clone();
            next.layouts[ctx.v].push(Segment::Node(next.nodes.len()));
            next.nodes.push(ForestNode {
                nfa: lang,
                parent,
                origin: (ctx.v, i),
            });
            if let Some(b) = self.trans_path(k, ctx, layers, i + 1, to, next)? {
                return Ok(Some(b));
            }
        }
        Ok(None)
    }
}

/// Segment index with the state pairs bounding a language.
type LanguageKey = (usize, (StateId, StateId), (StateId, StateId));

/// Caches shared by all paths through one transducer splitting graph.
struct TransCtx<'c> {
    v: VarId,
    r: &'c Arc<Transducer>,
    layout: &'c [Segment],
    inputs: &'c [Arc<Nfa>],
    products: HashMap<(usize, StateId, StateId), Product>,
    languages: HashMap<LanguageKey, Arc<Nfa>>,
    slices: HashMap<(StateId, StateId), Arc<Transducer>>,
}

impl TransCtx<'_> {
    fn language(&mut self, i: usize, from: (StateId, StateId), to: (StateId, StateId)) -> Arc<Nfa> {
        let key = (i, from, to);
        if let Some(a) = self.languages.get(&key) {
            return a.clone();
        }
        let prod = &self.products[&(i, from.0, from.1)];
        let a = Arc::new(prod.language_to(&self.inputs[i], to.0, to.1));
        self.languages.insert(key, a.clone());
        a
    }

    fn slice(&mut self, p: StateId, p2: StateId) -> Result<Arc<Transducer>, SolveError> {
        if let Some(t) = self.slices.get(&(p, p2)) {
            return Ok(t.clone());
        }
        let t = Arc::new(self.r.slice(p, p2)?);
        self.slices.insert((p, p2), t.clone());
        Ok(t)
    }
}

/// Enumerates every forest of one regular branch in deterministic order,
/// passing each to `sink` until it returns `Some`.
pub fn enumerate_branch_forests<B>(
    problem: &Problem,
    sl: &StraightLine,
    branch: &RegularBranch,
    ctl: &mut SearchControl,
    sink: &mut ForestSink<'_, B>,
) -> Res<B> {
    let st = State {
        nodes: Vec::new(),
        layouts: vec![Vec::new(); problem.str_vars.len()],
    };
    let mut s = Search {
        problem,
        sl,
        branch,
        ctl,
        sink,
    };
    s.visit(0, st)
}

/// All forests of one regular branch (eager; intended for small problems).
pub fn split_concat(
    problem: &Problem,
    sl: &StraightLine,
    branch: &RegularBranch,
) -> Result<Vec<AcForest>, SolveError> {
    let mut out = Vec::new();
    let mut ctl = SearchControl::default();
    enumerate_branch_forests::<()>(problem, sl, branch, &mut ctl, &mut |f| {
        out.push(f);
        Ok(None)
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_problem;
    use crate::solver::regular::normalize_regular;
    use crate::straightline::check_straightline;

    fn forests(src: &str) -> (Problem, Vec<AcForest>) {
        let p = parse_problem(src).unwrap();
        let sl = check_straightline(&p).unwrap();
        let bs = normalize_regular(&p);
        let mut all = Vec::new();
        for b in &bs {
            all.extend(split_concat(&p, &sl, b).unwrap());
        }
        (p, all)
    }

    #[test]
    fn source_only_is_single_node() {
        let (_, fs) = forests("alphabet \"ab\"\nstr y\nregc (in y /ab*/)");
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].nodes.len(), 1);
        assert!(fs[0].nodes[0].nfa.accepts_str("abb"));
    }

    #[test]
    fn repeated_operand_gets_both_slices() {
        // z = y.y with z in (ab)*: y's node must lie in both halves.
        let (p, fs) = forests("alphabet \"ab\"\nstr y z\nz = y . y\nregc (in z /(ab)*/)");
        assert!(!fs.is_empty());
        for f in &fs {
            assert_eq!(f.layouts[1], vec![Segment::Node(0), Segment::Node(0)]);
            let node = &f.nodes[0].nfa;
            for w in crate::automata::words_up_to(&p.alphabet, 4) {
                if node.accepts(&w) {
                    let mut zz = w.clone();
                    zz.extend_from_slice(&w);
                    assert!(p
                        .regular
                        .iter()
                        .all(|r| r.eval(&mut |l| l.nfa.accepts(&zz))));
                }
            }
        }
    }

    #[test]
    fn literal_consumed_by_exact_reachability() {
        let (_, fs) = forests("alphabet \"ab\"\nstr y z\nz = \"ab\" . y\nregc (in z /abb+/)");
        assert_eq!(fs.len(), 1);
        let f = &fs[0];
        assert_eq!(f.nodes.len(), 1);
        assert!(
            f.nodes[0].nfa.accepts_str("b")
                && f.nodes[0].nfa.accepts_str("bbb")
                && !f.nodes[0].nfa.accepts_str("")
        );
    }

    #[test]
    fn transducer_segments_get_fresh_nodes() {
        let (_, fs) = forests(
            "alphabet \"a<\"\nstr x y z\ny = x . \"<\" . x\nz = erase[<](y)\nregc (in z /aa/)",
        );
        assert!(!fs.is_empty());
        for f in &fs {
            assert_eq!(f.layouts[2].len(), 3);
            assert!(f.is_valid());
        }
    }
}
