//! Integer, character, IndexOf and disequality constraints.
//!
//! The string part of the problem is handled exactly as for string-only
//! problems: regular branches are split into acyclic forests. For each forest
//! the remaining constraints are [lowered](lower) onto forest nodes, the
//! forest's [solution automaton](tree) is built, and a [counter walk](walk)
//! searches it for a configuration satisfying the lowered constraints.
//!
//! Counters and free integer variables are explored up to a bound. A negative
//! answer that depended on the bound is reported as
//! [`Verdict::UnsatWithinBounds`].

pub mod lower;
pub mod tree;
pub mod walk;

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::constraints::{Assignment, Problem};
use crate::solver::{
    search_forests, AcForest, SearchControl, SolveError, SolveStats, SolverConfig, Verdict,
};
use crate::straightline::StraightLine;

pub use lower::{
    for_each_lowering, lower_char_term, lower_disequalities, lower_indexof, lower_integer_terms,
    Counter, Lin, Lowered,
};
pub use tree::build_tree_solution_automaton;
pub use walk::{counter_walk_solve, WalkLimits, WalkOutcome};

/// Smallest default bound on counters and free integers.
pub const MIN_INT_BOUND: u64 = 64;

/// Work shared by the forests of one run.
#[derive(Default)]
struct Shared {
    bounded: AtomicBool,
    bound: AtomicU64,
    guesses: AtomicU64,
    memo: AtomicU64,
}

/// Searches one forest; `Some` carries a model of the whole problem.
fn decide_forest(
    problem: &Problem,
    forest: &AcForest,
    config: &SolverConfig,
    ctl: &SearchControl,
    shared: &Shared,
) -> Result<Option<Assignment>, SolveError> {
    let m = build_tree_solution_automaton(forest, &problem.alphabet, config.max_product_states)?;
    let bound = config
        .int_bound
        .unwrap_or_else(|| MIN_INT_BOUND.max(m.num_states() as u64));
    shared.bound.fetch_max(bound, Ordering::Relaxed);
    let limits = WalkLimits {
        bound,
        max_configs: config.max_product_states,
        deadline: ctl.deadline,
    };
    let mut result = Ok(None);
    let _ = for_each_lowering(problem, forest, &mut |low| {
        shared.guesses.fetch_add(1, Ordering::Relaxed);
        match counter_walk_solve(low, &m, limits) {
            Ok((outcome, explored)) => {
                shared.memo.fetch_add(explored as u64, Ordering::Relaxed);
                match outcome {
                    WalkOutcome::Sat { words, slots } => {
                        let mut asg = Assignment::new(problem);
                        asg.strs = forest.assemble(&words);
                        asg.ints = slots[..problem.int_vars.len()].to_vec();
                        result = Ok(Some(asg));
                        ControlFlow::Break(())
                    }
                    WalkOutcome::UnsatWithinBounds => {
                        shared.bounded.store(true, Ordering::Relaxed);
                        ControlFlow::Continue(())
                    }
                    WalkOutcome::Unsat => ControlFlow::Continue(()),
                }
            }
            Err(e) => {
                result = Err(e);
                ControlFlow::Break(())
            }
        }
    });
    result
}

/// Decides a problem with extended constraints.
pub fn solve_extended(
    problem: &Problem,
    sl: &StraightLine,
    config: &SolverConfig,
    ctl: &mut SearchControl,
    stats: &mut SolveStats,
) -> Result<Verdict, SolveError> {
    let shared = Shared::default();
    let snapshot = ctl.clone();
    let found = search_forests(problem, sl, config, ctl, stats, &|forest| {
        decide_forest(problem, forest, config, &snapshot, &shared)
    })?;
    stats.guesses = shared.guesses.load(Ordering::Relaxed);
    stats.memo_states = shared.memo.load(Ordering::Relaxed);
    let bound = shared.bound.load(Ordering::Relaxed);
    stats.int_bound = Some(config.int_bound.unwrap_or(bound.max(MIN_INT_BOUND)));
    Ok(match found {
        Some(asg) => Verdict::Sat(asg),
        None if shared.bounded.load(Ordering::Relaxed) => {
            Verdict::UnsatWithinBounds(stats.int_bound.expect("set above"))
        }
        None => Verdict::Unsat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_problem;
    use crate::solver::solve;

    fn run(src: &str) -> Verdict {
        let p = parse_problem(src).unwrap();
        solve(&p, &SolverConfig::default()).unwrap()
    }

    #[test]
    fn odd_length_of_square_is_unsat() {
        let v =
            run("alphabet \"a\"\nstr x y\nx = y . y\nintc (<= len(x) 3)\nintc (not (<= len(x) 2))");
        assert_eq!(v, Verdict::Unsat);
    }

    #[test]
    fn zero_count() {
        let v = run("alphabet \"ab\"\nstr x\nregc (in x /a*/)\nintc (<= count(x, 'a') 0)");
        assert_eq!(v.model().unwrap().strs[0], Vec::new());
    }

    #[test]
    fn char_position() {
        let v = run("alphabet \"ab\"\nstr x\nint u\nregc (in x /ab/)\ncharc (= x[u] 'b')");
        assert_eq!(v.model().unwrap().ints, vec![2]);
    }

    #[test]
    fn indexof_semantics() {
        let any = run(
            "alphabet \"abc\"\nstr x\nint u\nregc (in x /cab/)\nu = indexof(\"ab\", x, anywhere)",
        );
        assert_eq!(any.model().unwrap().ints, vec![2]);
        let first =
            "alphabet \"ab\"\nstr x\nint u\nregc (in x /abab/)\nu = indexof(\"ab\", x, first)";
        assert_eq!(run(first).model().unwrap().ints, vec![1]);
        assert_eq!(run(&format!("{first}\nintc (>= u 2)")), Verdict::Unsat);
        let anywhere = "alphabet \"ab\"\nstr x\nint u\nregc (in x /abab/)\nu = indexof(\"ab\", x, anywhere)\nintc (>= u 2)";
        assert_eq!(run(anywhere).model().unwrap().ints, vec![3]);
    }

    #[test]
    fn disequality_alternatives() {
        let v = run("alphabet \"abc\"\nstr x y\nregc (in x /ab/)\nregc (in y /ab|ac/)\nx != y");
        let m = v.model().unwrap();
        assert_eq!(
            m.strs[1],
            vec![crate::automata::Sym(0), crate::automata::Sym(2)]
        );
        let v = run("alphabet \"a\"\nstr x y\nregc (in x //)\nregc (in y //)\nx != y");
        assert_eq!(v, Verdict::Unsat);
    }

    #[test]
    fn free_integers_are_bounded() {
        let v = run("alphabet \"a\"\nint u\nintc (>= u 100)");
        assert_eq!(v, Verdict::UnsatWithinBounds(64));
        let p = parse_problem("alphabet \"a\"\nint u\nintc (>= u 100)").unwrap();
        let cfg = SolverConfig {
            int_bound: Some(200),
            ..SolverConfig::default()
        };
        assert_eq!(solve(&p, &cfg).unwrap().model().unwrap().ints, vec![100]);
    }
}
