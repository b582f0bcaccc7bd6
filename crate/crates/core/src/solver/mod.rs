//! Decision procedure for straight-line string constraints.
//!
//! The pipeline has three stages:
//! 1. [`regular`] expands the regular constraint into branches with one
//!    automaton per variable;
//! 2. [`search`] removes concatenations by enumerating splittings, producing
//!    acyclic forests;
//! 3. [`forest`] decides each forest by pre-image propagation and extracts a
//!    model.
//!
//! Problems with integer, character, IndexOf or disequality constraints are
//! handed to [`crate::extensions`], which reuses stages 1 and 2.

pub mod forest;
pub mod regular;
pub mod search;

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automata::{AutomataError, Transducer};
use crate::constraints::{evaluate, problem_wellformed, Assignment, Problem, RelAtom};
use crate::straightline::{check_straightline, SlRejection, StraightLine};

pub use forest::{feasible_languages, solve_ac_forest, AcForest, ForestEdge, ForestNode, Segment};
pub use regular::{for_each_regular_branch, normalize_regular, RegularBranch};
pub use search::{enumerate_branch_forests, split_concat, SearchControl};

/// Outcome of a satisfiability check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Satisfiable, with a model that passes [`evaluate`].
    Sat(Assignment),
    Unsat,
    /// No model exists with integer values (and counters) up to the bound;
    /// larger values were not explored.
    UnsatWithinBounds(u64),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            Verdict::Sat(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("problem is not straight-line: {0}")]
    NotStraightLine(SlRejection),
    #[error("problem is malformed: {}", .0.join("; "))]
    Malformed(Vec<String>),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

/// Solver settings.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Bound on integer values and counters for the extended engine; `None`
    /// selects the default `max(64, product states)`.
    pub int_bound: Option<u64>,
    /// Stop after this many forests.
    pub max_forests: Option<u64>,
    /// Wall-clock budget.
    pub timeout: Option<Duration>,
    /// Cap on the states of one solution automaton or memo table.
    pub max_product_states: usize,
    /// Forests are decided in batches of this size.
    pub batch: usize,
    /// Decide each batch on the rayon pool (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            int_bound: None,
            max_forests: None,
            timeout: None,
            max_product_states: 2_000_000,
            batch: 8,
            parallel: crate::par::PARALLEL_AVAILABLE,
        }
    }
}

/// Work counters of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub regular_branches: u64,
    pub forests: u64,
    pub search_steps: u64,
    pub max_nfa_states: usize,
    pub max_forest_nodes: usize,
    pub guesses: u64,
    pub memo_states: u64,
    pub int_bound: Option<u64>,
}

impl SolveStats {
    /// `key=value` lines in a fixed order.
    pub fn lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("regular_branches={}", self.regular_branches),
            format!("forests={}", self.forests),
            format!("search_steps={}", self.search_steps),
            format!("max_nfa_states={}", self.max_nfa_states),
            format!("max_forest_nodes={}", self.max_forest_nodes),
            format!("guesses={}", self.guesses),
            format!("memo_states={}", self.memo_states),
        ];
        if let Some(b) = self.int_bound {
            v.push(format!("int_bound={b}"));
        }
        v
    }

    fn absorb(&mut self, ctl: &SearchControl) {
        self.forests = ctl.forests;
        self.search_steps = ctl.steps;
        self.max_nfa_states = ctl.max_nfa_states;
        self.max_forest_nodes = ctl.max_forest_nodes;
    }
}

/// Validates the problem and returns its straight-line structure.
pub fn prepare(problem: &Problem) -> Result<StraightLine, SolveError> {
    let diags = problem_wellformed(problem);
    if !diags.is_empty() {
        return Err(SolveError::Malformed(diags));
    }
    check_straightline(problem).map_err(SolveError::NotStraightLine)
}

pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<Verdict, SolveError> {
    solve_with_stats(problem, config).map(|(v, _)| v)
}

/// Decides the problem and reports work counters.
pub fn solve_with_stats(
    problem: &Problem,
    config: &SolverConfig,
) -> Result<(Verdict, SolveStats), SolveError> {
    let sl = prepare(problem)?;
    let mut ctl = SearchControl {
        deadline: config.timeout.map(|t| Instant::now() + t),
        max_forests: config.max_forests,
        ..SearchControl::default()
    };
    let mut stats = SolveStats::default();
    let verdict = if problem.is_string_only() {
        solve_strings(problem, &sl, config, &mut ctl, &mut stats)?
    } else {
        crate::extensions::solve_extended(problem, &sl, config, &mut ctl, &mut stats)?
    };
    stats.absorb(&ctl);
    if let Verdict::Sat(m) = &verdict {
        if !evaluate(problem, m) {
            return Err(SolveError::Internal(
                "extracted model violates the problem".into(),
            ));
        }
    }
    Ok((verdict, stats))
}

/// Runs `decide` over every forest of every regular branch, in batches, and
/// returns the first result in enumeration order.
pub(crate) fn search_forests<R: Send>(
    problem: &Problem,
    sl: &StraightLine,
    config: &SolverConfig,
    ctl: &mut SearchControl,
    stats: &mut SolveStats,
    decide: &(dyn Fn(&AcForest) -> Result<Option<R>, SolveError> + Sync),
) -> Result<Option<R>, SolveError> {
    let batch = config.batch.max(1);
    let parallel = config.parallel;
    let run = |forests: &[AcForest]| -> Result<Option<R>, SolveError> {
        crate::par::find_map_first(forests, parallel, |f| match decide(f) {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
    };
    let mut buffer: Vec<AcForest> = Vec::with_capacity(batch);
    let mut outcome: Result<Option<R>, SolveError> = Ok(None);
    let flow = for_each_regular_branch(problem, &mut |branch| {
        stats.regular_branches += 1;
        let r = enumerate_branch_forests(problem, sl, &branch, ctl, &mut |f| {
            buffer.push(f);
            if buffer.len() >= batch {
                let r = run(&buffer);
                buffer.clear();
                return r;
            }
            Ok(None)
        });
        match r {
            Ok(None) => ControlFlow::Continue(()),
            other => ControlFlow::Break(other),
        }
    });
    if let ControlFlow::Break(r) = flow {
        outcome = r;
    }
    if matches!(outcome, Ok(None)) && !buffer.is_empty() {
        ctl.check_time()?;
        outcome = run(&buffer);
    }
    outcome
}

fn solve_strings(
    problem: &Problem,
    sl: &StraightLine,
    config: &SolverConfig,
    ctl: &mut SearchControl,
    stats: &mut SolveStats,
) -> Result<Verdict, SolveError> {
    let found = search_forests(problem, sl, config, ctl, stats, &|f| {
        Ok(solve_ac_forest(f)?.map(|words| f.assemble(&words)))
    })?;
    Ok(match found {
        Some(strs) => {
            let mut m = Assignment::new(problem);
            m.strs = strs;
            Verdict::Sat(m)
        }
        None => Verdict::Unsat,
    })
}

/// Informational model-size bound: if the problem is satisfiable, it has a
/// model in which every string is at most this long.
///
/// For each regular branch the bound multiplies the state counts of every
/// automaton that constrains a forest node (one factor per node and
/// constraint) and of every transducer slice on an edge. A shortest run of
/// the synchronised product of all these machines emits at most one letter
/// per step, so every node word is shorter than that product; a variable
/// then adds its literal length and counts each repeated node once per
/// occurrence. The result is the maximum over branches (saturating).
pub fn max_model_bound(problem: &Problem) -> Result<u64, SolveError> {
    let sl = prepare(problem)?;
    let mut best = 0u64;
    let _ = for_each_regular_branch::<()>(problem, &mut |b| {
        best = best.max(branch_bound(problem, &sl, &b));
        ControlFlow::Continue(())
    });
    Ok(best)
}

fn normalized_states(t: &Transducer) -> u64 {
    t.normalize().trim().num_states() as u64
}

fn branch_bound(problem: &Problem, sl: &StraightLine, b: &RegularBranch) -> u64 {
    // Structural layouts: nodes are numbered, literals keep their length.
    #[derive(Clone)]
    enum Seg {
        Node(usize),
        Lit(u64),
    }
    let size = |v: usize| {
        if b.constrained[v] {
            b.nfas[v].num_states() as u64
        } else {
            1
        }
    };
    let mut layouts: Vec<Vec<Seg>> = vec![Vec::new(); problem.str_vars.len()];
    let mut nodes = 0usize;
    let mut product: u64 = 1;
    let mul = |x: u64, product: &mut u64| *product = product.saturating_mul(x.max(1));
    for &v in &sl.order {
        match sl.def[v].map(|i| &problem.relational[i]) {
            None => {
                layouts[v] = vec![Seg::Node(nodes)];
                nodes += 1;
                mul(size(v), &mut product);
            }
            Some(RelAtom::Concat { rhs, .. }) => {
                let mut l = Vec::new();
                for it in rhs {
                    match it {
                        crate::constraints::Item::Var(x) => l.extend(layouts[*x].iter().cloned()),
                        crate::constraints::Item::Lit(w) => l.push(Seg::Lit(w.len() as u64)),
                    }
                }
                let node_segs = l.iter().filter(|s| matches!(s, Seg::Node(_))).count();
                for _ in 0..node_segs {
                    mul(size(v), &mut product);
                }
                layouts[v] = l;
            }
            Some(RelAtom::Trans {
                transducer, arg, ..
            }) => {
                let r = normalized_states(transducer);
                let arg_l = if layouts[*arg].is_empty() {
                    vec![Seg::Lit(0)]
                } else {
                    layouts[*arg].clone()
                };
                let mut l = Vec::new();
                for s in &arg_l {
                    mul(r, &mut product);
                    mul(size(v), &mut product);
                    if let Seg::Lit(len) = s {
                        mul(len + 1, &mut product);
                    }
                    l.push(Seg::Node(nodes));
                    nodes += 1;
                }
                layouts[v] = l;
            }
        }
    }
    let steps = product.saturating_sub(1);
    layouts
        .iter()
        .map(|l| {
            let lits: u64 = l
                .iter()
                .map(|s| if let Seg::Lit(n) = s { *n } else { 0 })
                .sum();
            let mut counts = std::collections::HashMap::new();
            for s in l {
                if let Seg::Node(n) = s {
                    *counts.entry(*n).or_insert(0u64) += 1;
                }
            }
            let mult = counts.values().copied().max().unwrap_or(0);
            lits.saturating_add(mult.saturating_mul(steps))
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_problem;

    fn run(src: &str) -> Verdict {
        let p = parse_problem(src).unwrap();
        solve(&p, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn square_of_uniform_word_is_not_ab() {
        assert_eq!(
            run("alphabet \"ab\"\nstr x y\nx = y . y\nregc (in y /a*|b*/)\nregc (in x /ab/)"),
            Verdict::Unsat
        );
    }

    #[test]
    fn simple_sat_models() {
        let v = run("alphabet \"ab\"\nstr x y\nx = y . y\nregc (in x /abab/)");
        let p = parse_problem("alphabet \"ab\"\nstr x y").unwrap();
        let m = v.model().unwrap();
        assert_eq!(p.alphabet.decode(&m.strs[1]), "ab");
        assert_eq!(p.alphabet.decode(&m.strs[0]), "abab");
        assert!(run(
            "alphabet \"a<\"\nstr w x\nx = erase[<](w)\nregc (in w /<a</)\nregc (in x /a/)"
        )
        .is_sat());
        assert_eq!(
            run("alphabet \"a<\"\nstr w x\nx = erase[<](w)\nregc (in w /<a</)\nregc (in x /aa/)"),
            Verdict::Unsat
        );
    }

    #[test]
    fn not_straight_line_is_reported() {
        let p = parse_problem("alphabet \"ab\"\nstr x y\nx = y\ny = identity(x)").unwrap();
        assert!(matches!(
            solve(&p, &SolverConfig::default()),
            Err(SolveError::NotStraightLine(_))
        ));
    }

    #[test]
    fn bound_covers_models() {
        let p = parse_problem("alphabet \"ab\"\nstr x y\nx = y . y\nregc (in x /abab/)").unwrap();
        let b = max_model_bound(&p).unwrap();
        let m = solve(&p, &SolverConfig::default()).unwrap();
        assert!(m.model().unwrap().strs.iter().all(|s| s.len() as u64 <= b));
    }
}
