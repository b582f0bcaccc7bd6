//! Lowering of integer, character, IndexOf and disequality constraints onto
//! the nodes of an acyclic forest.
//!
//! Every string variable of a forest is a sequence of node and literal
//! segments, so its length and letter counts are sums of node counters plus
//! constants. A character term `x[u]` is bound to one segment of `x`: on a
//! literal segment it is a constant letter, on a node segment it becomes a
//! position counter on that node, linked to `u` by an offset equation.
//! Different segment choices are enumerated as separate lowerings.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::automata::{Alphabet, Sym, Word};
use crate::constraints::{
    CharAtom, Formula, IndexOfAtom, IndexOfSemantics, IntRef, IntTerm, LinearAtom, Problem, StrRef,
    VarId,
};
use crate::solver::{AcForest, Segment};

/// Quantity tracked by the counter walk. All counters start at zero and only
/// grow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Counter {
    /// Length of a node's word.
    Len(usize),
    /// Occurrences of a letter in a node's word.
    Count(usize, Sym),
    /// Position of a character term inside its node, fixed once the term
    /// picks its letter.
    TermPos(usize),
    /// Position inside a node where a first-occurrence monitor completes its
    /// first match.
    MatchEnd(usize),
}

/// Operand of a lowered linear expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Val {
    /// Integer variable: the problem's own variables come first, then fresh
    /// ones introduced by lowering.
    Slot(usize),
    /// Index into [`Lowered::counters`].
    Counter(usize),
}

/// `Σ coef·val + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lin {
    pub terms: Vec<(i64, Val)>,
    pub constant: i64,
}

impl Lin {
    pub fn constant(c: i64) -> Lin {
        Lin {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn of(v: Val) -> Lin {
        Lin {
            terms: vec![(1, v)],
            constant: 0,
        }
    }

    pub fn plus(mut self, coef: i64, v: Val) -> Lin {
        self.terms.push((coef, v));
        self
    }

    pub fn plus_lin(mut self, coef: i64, other: &Lin) -> Lin {
        self.terms
            .extend(other.terms.iter().map(|&(c, v)| (c * coef, v)));
        self.constant += coef * other.constant;
        self
    }

    pub fn plus_const(mut self, c: i64) -> Lin {
        self.constant += c;
        self
    }

    /// Value under the given slots and counters; `None` if a slot is unknown.
    pub fn eval(&self, slots: &[Option<i64>], counters: &[u32]) -> Option<i128> {
        let mut sum = self.constant as i128;
        for &(c, v) in &self.terms {
            let x = match v {
                Val::Slot(s) => slots[s]?,
                Val::Counter(k) => counters[k] as i64,
            };
            sum += c as i128 * x as i128;
        }
        Some(sum)
    }

    fn map_counters(&self, f: &impl Fn(usize) -> usize) -> Lin {
        Lin {
            terms: self
                .terms
                .iter()
                .map(|&(c, v)| match v {
                    Val::Counter(k) => (c, Val::Counter(f(k))),
                    s => (c, s),
                })
                .collect(),
            constant: self.constant,
        }
    }

    fn counters(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().filter_map(|(_, v)| match v {
            Val::Counter(k) => Some(*k),
            Val::Slot(_) => None,
        })
    }

    pub fn slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().filter_map(|(_, v)| match v {
            Val::Slot(s) => Some(*s),
            Val::Counter(_) => None,
        })
    }
}

fn int_ref(i: IntRef) -> Lin {
    match i {
        IntRef::Var(u) => Lin::of(Val::Slot(u)),
        IntRef::Const(c) => Lin::constant(c),
    }
}

/// Interns counters, handing out dense indices.
#[derive(Clone, Debug, Default)]
pub struct Counters {
    pub list: Vec<Counter>,
    index: HashMap<Counter, usize>,
}

impl Counters {
    pub fn id(&mut self, c: Counter) -> usize {
        if let Some(&i) = self.index.get(&c) {
            return i;
        }
        self.list.push(c);
        self.index.insert(c, self.list.len() - 1);
        self.list.len() - 1
    }
}

/// Sum of the lengths of `segments`.
fn segments_len(segments: &[Segment], reg: &mut Counters) -> Lin {
    let mut lin = Lin::default();
    for s in segments {
        lin = match s {
            Segment::Node(n) => lin.plus(1, Val::Counter(reg.id(Counter::Len(*n)))),
            Segment::Lit(w) => lin.plus_const(w.len() as i64),
        };
    }
    lin
}

/// Replaces `|x|` and `|x|_a` by sums over the segments of `x`; each atom
/// `Σ c·t ≤ b` becomes the expression `Σ c·t − b`, required to be `≤ 0`.
pub fn lower_integer_terms(
    f: &Formula<LinearAtom>,
    forest: &AcForest,
    reg: &mut Counters,
) -> Formula<Lin> {
    f.map(&mut |atom: &LinearAtom| {
        let mut lin = Lin::constant(-atom.bound);
        for &(coef, term) in &atom.terms {
            let t = match term {
                IntTerm::Var(u) => Lin::of(Val::Slot(u)),
                IntTerm::Len(x) => segments_len(&forest.layouts[x], reg),
                IntTerm::Count(x, a) => {
                    let mut l = Lin::default();
                    for s in &forest.layouts[x] {
                        l = match s {
                            Segment::Node(n) => {
                                l.plus(1, Val::Counter(reg.id(Counter::Count(*n, a))))
                            }
                            Segment::Lit(w) => {
                                l.plus_const(w.iter().filter(|&&b| b == a).count() as i64)
                            }
                        };
                    }
                    l
                }
            };
            lin = lin.plus_lin(coef, &t);
        }
        lin
    })
}

/// A character term before it is bound to a segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermSpec {
    /// `s[idx]` with a 1-indexed position.
    At { s: StrRef, idx: Lin },
    /// A fixed letter.
    Letter(Sym),
}

/// Comparison of two character terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cmp {
    pub lhs: usize,
    pub rhs: usize,
    pub eq: bool,
}

/// Where a character term reads its letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermBinding {
    Const(Sym),
    /// The letter a node emits at the position held by `counter`.
    Track {
        node: usize,
        counter: usize,
    },
}

/// Every way of placing `term` (with id `id`) on a segment, each with the
/// equation (an expression required to be zero) linking its index to the
/// segment offset. Out-of-range positions have no placement.
pub fn lower_char_term(
    id: usize,
    term: &TermSpec,
    forest: &AcForest,
    reg: &mut Counters,
) -> Vec<(TermBinding, Option<Lin>)> {
    let mut out = Vec::new();
    let lit_positions =
        |w: &Word, off: &Lin, out: &mut Vec<(TermBinding, Option<Lin>)>, idx: &Lin| {
            for (k, &a) in w.iter().enumerate() {
                let link = idx.clone().plus_lin(-1, off).plus_const(-(k as i64 + 1));
                out.push((TermBinding::Const(a), Some(link)));
            }
        };
    match term {
        TermSpec::Letter(a) => out.push((TermBinding::Const(*a), None)),
        TermSpec::At {
            s: StrRef::Lit(w),
            idx,
        } => lit_positions(w, &Lin::default(), &mut out, idx),
        TermSpec::At {
            s: StrRef::Var(x),
            idx,
        } => {
            let layout = &forest.layouts[*x];
            for i in 0..layout.len() {
                let off = segments_len(&layout[..i], reg);
                match &layout[i] {
                    Segment::Lit(w) => lit_positions(w, &off, &mut out, idx),
                    Segment::Node(n) => {
                        let counter = reg.id(Counter::TermPos(id));
                        let link = idx
                            .clone()
                            .plus_lin(-1, &off)
                            .plus(-1, Val::Counter(counter));
                        out.push((TermBinding::Track { node: *n, counter }, Some(link)));
                    }
                }
            }
        }
    }
    out
}

/// Registers the terms of a character formula and returns the formula over
/// comparisons of term ids.
pub fn lower_char_formula(f: &Formula<CharAtom>, terms: &mut Vec<TermSpec>) -> Formula<Cmp> {
    let push = |s: &StrRef, idx: IntRef, terms: &mut Vec<TermSpec>| {
        terms.push(TermSpec::At {
            s: s.clone(),
            idx: int_ref(idx),
        });
        terms.len() - 1
    };
    f.map(&mut |a: &CharAtom| {
        let lhs = push(&a.lhs.s, a.lhs.idx, terms);
        let rhs = push(&a.rhs.s, a.rhs.idx, terms);
        Cmp { lhs, rhs, eq: a.eq }
    })
}

/// Matcher for one needle: `delta[q][a]` for the `m` non-accepting states;
/// state `m` means the needle has just been completed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kmp {
    pub m: u32,
    pub delta: Vec<Vec<u32>>,
}

impl Kmp {
    pub fn new(needle: &[Sym], alphabet: &Alphabet) -> Kmp {
        let m = needle.len();
        assert!(m > 0, "needle must be non-empty");
        let k = alphabet.len();
        let mut delta = vec![vec![0u32; k]; m];
        delta[0][needle[0].index()] = 1;
        let mut x = 0usize;
        for j in 1..m {
            delta[j] = delta[x].clone();
            delta[j][needle[j].index()] = j as u32 + 1;
            x = delta[x][needle[j].index()] as usize;
        }
        Kmp { m: m as u32, delta }
    }

    /// Runs from `q` over `w`; `Err(k)` if the needle completes at the
    /// 1-indexed position `k` of `w`, otherwise the final state.
    pub fn run(&self, q: u32, w: &[Sym]) -> Result<u32, usize> {
        let mut q = q;
        for (k, a) in w.iter().enumerate() {
            q = self.delta[q as usize][a.index()];
            if q == self.m {
                return Err(k + 1);
            }
        }
        Ok(q)
    }
}

/// Watches the needle matcher on one node occurrence of a haystack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monitor {
    pub node: usize,
    pub kmp: Arc<Kmp>,
    pub start: u32,
    pub mode: MonitorMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorMode {
    /// The node's word leads from `start` to `end` without completing the
    /// needle.
    Pass { end: u32 },
    /// The node's word completes the needle; `counter` records the position
    /// of the first completion.
    Hit { counter: usize },
}

/// One alternative at a choice point.
#[derive(Clone, Debug, Default)]
pub struct Fragment {
    pub bindings: Vec<(usize, TermBinding)>,
    pub links: Vec<Lin>,
    pub monitors: Vec<Monitor>,
    pub int_formulas: Vec<Formula<Lin>>,
    pub cmps: Vec<Formula<Cmp>>,
}

impl Fragment {
    fn absorb(&mut self, other: &Fragment) {
        self.bindings.extend(other.bindings.iter().cloned());
        self.links.extend(other.links.iter().cloned());
        self.monitors.extend(other.monitors.iter().cloned());
        self.int_formulas.extend(other.int_formulas.iter().cloned());
        self.cmps.extend(other.cmps.iter().cloned());
    }
}

/// Static part of an IndexOf lowering plus its choice points.
pub struct IndexOfLowering {
    /// Comparisons `x[u + i − 1] = w_i`.
    pub cmps: Vec<Formula<Cmp>>,
    /// Equations fixed regardless of choices.
    pub links: Vec<Lin>,
    /// For the first-occurrence reading on a variable haystack: where the
    /// matcher completes its first match. Empty list means no alternative.
    pub first: Option<Vec<Fragment>>,
    /// False if the atom can never hold.
    pub feasible: bool,
}

/// Lowers `u = IndexOf(w, x)`: the needle's letters are read at `u`,
/// `u + 1`, … of `x`, and for the first-occurrence reading the needle must
/// not complete before position `u + |w| − 1`.
pub fn lower_indexof(
    atom: &IndexOfAtom,
    alphabet: &Alphabet,
    forest: &AcForest,
    terms: &mut Vec<TermSpec>,
    reg: &mut Counters,
    next_monitor: &mut usize,
) -> IndexOfLowering {
    let m = atom.needle.len();
    let target = int_ref(atom.target);
    let mut low = IndexOfLowering {
        cmps: Vec::new(),
        links: Vec::new(),
        first: None,
        feasible: m > 0,
    };
    if m == 0 {
        return low;
    }
    for (i, &a) in atom.needle.iter().enumerate() {
        terms.push(TermSpec::At {
            s: atom.haystack.clone(),
            idx: target.clone().plus_const(i as i64),
        });
        let lhs = terms.len() - 1;
        terms.push(TermSpec::Letter(a));
        low.cmps.push(Formula::Leaf(Cmp {
            lhs,
            rhs: terms.len() - 1,
            eq: true,
        }));
    }
    if atom.semantics == IndexOfSemantics::Anywhere {
        return low;
    }
    let kmp = Arc::new(Kmp::new(&atom.needle, alphabet));
    // Position where the first match ends, as `target + m − 1`.
    let match_end = target.plus_const(m as i64 - 1);
    match &atom.haystack {
        StrRef::Lit(w) => match kmp.run(0, w) {
            Err(k) => low.links.push(match_end.plus_const(-(k as i64))),
            Ok(_) => low.feasible = false,
        },
        StrRef::Var(x) => {
            let mut options = Vec::new();
            first_match_options(
                &forest.layouts[*x],
                0,
                0,
                Lin::default(),
                Vec::new(),
                &kmp,
                &match_end,
                reg,
                next_monitor,
                &mut options,
            );
            low.first = Some(options);
        }
    }
    low
}

#[allow(clippy::too_many_arguments)]
fn first_match_options(
    layout: &[Segment],
    j: usize,
    q: u32,
    off: Lin,
    passes: Vec<Monitor>,
    kmp: &Arc<Kmp>,
    match_end: &Lin,
    reg: &mut Counters,
    next_monitor: &mut usize,
    out: &mut Vec<Fragment>,
) {
    let Some(seg) = layout.get(j) else { return };
    match seg {
        Segment::Lit(w) => match kmp.run(q, w) {
            Err(k) => out.push(Fragment {
                monitors: passes,
                links: vec![match_end.clone().plus_lin(-1, &off).plus_const(-(k as i64))],
                ..Fragment::default()
            }),
            Ok(q2) => {
                let off = off.plus_const(w.len() as i64);
                first_match_options(
                    layout,
                    j + 1,
                    q2,
                    off,
                    passes,
                    kmp,
                    match_end,
                    reg,
                    next_monitor,
                    out,
                );
            }
        },
        Segment::Node(n) => {
            let counter = reg.id(Counter::MatchEnd(*next_monitor));
            *next_monitor += 1;
            let mut monitors = passes.clone();
            monitors.push(Monitor {
                node: *n,
                kmp: kmp.clone(),
                start: q,
                mode: MonitorMode::Hit { counter },
            });
            let link = match_end
                .clone()
                .plus_lin(-1, &off)
                .plus(-1, Val::Counter(counter));
            out.push(Fragment {
                monitors,
                links: vec![link],
                ..Fragment::default()
            });
            let len = reg.id(Counter::Len(*n));
            for q2 in 0..kmp.m {
                let mut p = passes.clone();
                p.push(Monitor {
                    node: *n,
                    kmp: kmp.clone(),
                    start: q,
                    mode: MonitorMode::Pass { end: q2 },
                });
                let off = off.clone().plus(1, Val::Counter(len));
                first_match_options(
                    layout,
                    j + 1,
                    q2,
                    off,
                    p,
                    kmp,
                    match_end,
                    reg,
                    next_monitor,
                    out,
                );
            }
        }
    }
}

/// The alternatives for `x ≠ y`: `|x| < |y|`, `|y| < |x|`, or
/// `x[v] ≠ y[v]` for the fresh integer slot `v`.
pub fn lower_disequalities(
    pairs: &[(VarId, VarId)],
    first_slot: usize,
    forest: &AcForest,
    terms: &mut Vec<TermSpec>,
    reg: &mut Counters,
) -> Vec<Vec<Fragment>> {
    pairs
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| {
            let lx = segments_len(&forest.layouts[x], reg);
            let ly = segments_len(&forest.layouts[y], reg);
            let shorter = |a: &Lin, b: &Lin| Fragment {
                int_formulas: vec![Formula::Leaf(a.clone().plus_lin(-1, b).plus_const(1))],
                ..Fragment::default()
            };
            let v = Lin::of(Val::Slot(first_slot + k));
            terms.push(TermSpec::At {
                s: StrRef::Var(x),
                idx: v.clone(),
            });
            terms.push(TermSpec::At {
                s: StrRef::Var(y),
                idx: v,
            });
            let n = terms.len();
            let differ = Fragment {
                cmps: vec![Formula::Leaf(Cmp {
                    lhs: n - 2,
                    rhs: n - 1,
                    eq: false,
                })],
                ..Fragment::default()
            };
            vec![shorter(&lx, &ly), shorter(&ly, &lx), differ]
        })
        .collect()
}

/// A fully lowered instance: one choice at every choice point.
#[derive(Clone, Debug, Default)]
pub struct Lowered {
    pub num_slots: usize,
    /// Only the counters some constraint refers to.
    pub counters: Vec<Counter>,
    /// Binding per term id; terms of unchosen alternatives stay unbound.
    pub terms: Vec<Option<TermBinding>>,
    /// Comparisons; every formula must hold.
    pub cmps: Vec<Formula<Cmp>>,
    /// Expressions required to be zero.
    pub links: Vec<Lin>,
    /// Formulas over expressions required to be `≤ 0`.
    pub int_formulas: Vec<Formula<Lin>>,
    pub monitors: Vec<Monitor>,
}

impl Lowered {
    fn from_fragment(
        frag: Fragment,
        num_slots: usize,
        num_terms: usize,
        reg: &Counters,
    ) -> Lowered {
        let mut used = vec![false; reg.list.len()];
        let mut mark = |k: usize| used[k] = true;
        frag.links
            .iter()
            .flat_map(Lin::counters)
            .for_each(&mut mark);
        for f in &frag.int_formulas {
            let mut leaves = Vec::new();
            f.leaves(&mut leaves);
            leaves.iter().flat_map(|l| l.counters()).for_each(&mut mark);
        }
        for (_, b) in &frag.bindings {
            if let TermBinding::Track { counter, .. } = b {
                mark(*counter);
            }
        }
        for m in &frag.monitors {
            if let MonitorMode::Hit { counter } = m.mode {
                mark(counter);
            }
        }
        let mut map = vec![usize::MAX; reg.list.len()];
        let mut counters = Vec::new();
        for (k, &u) in used.iter().enumerate() {
            if u {
                map[k] = counters.len();
                counters.push(reg.list[k]);
            }
        }
        let remap = |k: usize| map[k];
        let mut terms = vec![None; num_terms];
        for (t, b) in frag.bindings {
            terms[t] = Some(match b {
                TermBinding::Track { node, counter } => TermBinding::Track {
                    node,
                    counter: remap(counter),
                },
                c => c,
            });
        }
        Lowered {
            num_slots,
            counters,
            terms,
            cmps: frag.cmps,
            links: frag.links.iter().map(|l| l.map_counters(&remap)).collect(),
            int_formulas: frag
                .int_formulas
                .iter()
                .map(|f| f.map(&mut |l: &Lin| l.map_counters(&remap)))
                .collect(),
            monitors: frag
                .monitors
                .into_iter()
                .map(|m| Monitor {
                    mode: match m.mode {
                        MonitorMode::Hit { counter } => MonitorMode::Hit {
                            counter: remap(counter),
                        },
                        p => p,
                    },
                    ..m
                })
                .collect(),
        }
    }
}

/// Calls `f` on every lowering of the problem's extended constraints over
/// `forest`, in a deterministic order. Nothing is emitted if some IndexOf
/// atom can never hold.
pub fn for_each_lowering<B>(
    problem: &Problem,
    forest: &AcForest,
    f: &mut dyn FnMut(&Lowered) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let mut reg = Counters::default();
    let mut terms: Vec<TermSpec> = Vec::new();
    let mut base = Fragment::default();
    for g in &problem.integer {
        base.int_formulas
            .push(lower_integer_terms(g, forest, &mut reg));
    }
    for g in &problem.character {
        base.cmps.push(lower_char_formula(g, &mut terms));
    }
    let mut choice_points: Vec<Vec<Fragment>> = Vec::new();
    let mut next_monitor = 0;
    for atom in &problem.index_of {
        let low = lower_indexof(
            atom,
            &problem.alphabet,
            forest,
            &mut terms,
            &mut reg,
            &mut next_monitor,
        );
        if !low.feasible {
            return ControlFlow::Continue(());
        }
        base.cmps.extend(low.cmps);
        base.links.extend(low.links);
        if let Some(options) = low.first {
            choice_points.push(options);
        }
    }
    let num_slots = problem.int_vars.len() + problem.disequalities.len();
    choice_points.extend(lower_disequalities(
        &problem.disequalities,
        problem.int_vars.len(),
        forest,
        &mut terms,
        &mut reg,
    ));
    let bindings: Vec<Vec<(TermBinding, Option<Lin>)>> = terms
        .iter()
        .enumerate()
        .map(|(id, t)| lower_char_term(id, t, forest, &mut reg))
        .collect();

    for_each_choice(&choice_points, &mut |frag| {
        let mut frag_all = base.clone();
        frag_all.absorb(frag);
        let frag = frag_all;
        // Terms referenced by the chosen comparisons must be placed.
        let mut active = vec![false; terms.len()];
        for g in &frag.cmps {
            let mut leaves = Vec::new();
            g.leaves(&mut leaves);
            for c in leaves {
                active[c.lhs] = true;
                active[c.rhs] = true;
            }
        }
        let term_points: Vec<Vec<Fragment>> = (0..terms.len())
            .filter(|&t| active[t])
            .map(|t| {
                bindings[t]
                    .iter()
                    .map(|(b, link)| Fragment {
                        bindings: vec![(t, *b)],
                        links: link.iter().cloned().collect(),
                        ..Fragment::default()
                    })
                    .collect()
            })
            .collect();
        for_each_choice(&term_points, &mut |placed| {
            let mut all = frag.clone();
            all.absorb(placed);
            f(&Lowered::from_fragment(all, num_slots, terms.len(), &reg))
        })
    })
}

/// Calls `f` with the union of one fragment per choice point, for every
/// combination in odometer order (last point varies fastest).
fn for_each_choice<B>(
    points: &[Vec<Fragment>],
    f: &mut dyn FnMut(&Fragment) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if points.iter().any(Vec::is_empty) {
        return ControlFlow::Continue(());
    }
    let mut pick = vec![0usize; points.len()];
    loop {
        let mut frag = Fragment::default();
        for (p, &i) in points.iter().zip(&pick) {
            frag.absorb(&p[i]);
        }
        f(&frag)?;
        let mut k = points.len();
        loop {
            if k == 0 {
                return ControlFlow::Continue(());
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < points[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_problem;
    use crate::solver::split_concat;
    use crate::straightline::check_straightline;

    fn forests(src: &str) -> (Problem, Vec<AcForest>) {
        let p = parse_problem(src).unwrap();
        let sl = check_straightline(&p).unwrap();
        let branch = crate::solver::normalize_regular(&p).remove(0);
        let fs = split_concat(&p, &sl, &branch).unwrap();
        (p, fs)
    }

    #[test]
    fn length_of_concatenation() {
        let (p, fs) = forests("alphabet \"ab\"\nstr y z\nz = \"ab\" . y . y\nintc (<= len(z) 4)");
        let mut reg = Counters::default();
        let f = lower_integer_terms(&p.integer[0], &fs[0], &mut reg);
        let Formula::Leaf(lin) = f else { panic!() };
        // |z| − 4 = 2 + 2·|y(1)| − 4
        assert_eq!(lin.constant, -2);
        assert_eq!(lin.terms.len(), 2);
        assert_eq!(reg.list, vec![Counter::Len(0)]);
    }

    #[test]
    fn char_term_segments() {
        let (_, fs) = forests("alphabet \"ab\"\nstr y z\nz = \"ab\" . y . y");
        let mut reg = Counters::default();
        let term = TermSpec::At {
            s: StrRef::Var(1),
            idx: Lin::of(Val::Slot(0)),
        };
        let b = lower_char_term(0, &term, &fs[0], &mut reg);
        // Two literal positions and two node occurrences.
        assert_eq!(b.len(), 4);
        assert_eq!(b[0].0, TermBinding::Const(Sym(0)));
        assert_eq!(b[1].0, TermBinding::Const(Sym(1)));
        assert!(matches!(b[2].0, TermBinding::Track { node: 0, .. }));
        let link = b[3].1.as_ref().unwrap();
        // u − (2 + |y(1)|) − pos = 0
        assert_eq!(link.constant, -2);
        assert_eq!(link.terms.len(), 3);
    }

    #[test]
    fn kmp_first_completion() {
        let al = Alphabet::from_str_chars("ab").unwrap();
        let k = Kmp::new(&al.encode("ab").unwrap(), &al);
        assert_eq!(k.run(0, &al.encode("aab").unwrap()), Err(3));
        assert_eq!(k.run(0, &al.encode("ba").unwrap()), Ok(1));
        assert_eq!(k.run(1, &al.encode("b").unwrap()), Err(1));
    }

    #[test]
    fn disequality_has_three_alternatives() {
        let (p, fs) = forests("alphabet \"ab\"\nstr x y\nx != y");
        let mut n = 0;
        let _ = for_each_lowering::<()>(&p, &fs[0], &mut |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(n, 3);
    }
}
