//! Regular-constraint normalisation: the boolean combination of membership
//! atoms is expanded into disjunctive branches, and every branch is turned
//! into one automaton per string variable.

use std::collections::HashSet;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::automata::Nfa;
use crate::constraints::{Formula, Problem, RegLeaf};

/// One disjunct of the regular constraint: exactly one automaton per string
/// variable. Variables not mentioned in the disjunct get the universal
/// language and are flagged as unconstrained.
#[derive(Clone, Debug)]
pub struct RegularBranch {
    pub nfas: Vec<Arc<Nfa>>,
    pub constrained: Vec<bool>,
}

/// Largest determinised automaton accepted in place of its nondeterministic
/// source, relative to the source size.
const DETERMINIZE_GROWTH: usize = 4;
const DETERMINIZE_FLOOR: usize = 256;

/// Conjunction of all regular formulas of the problem, with leaves numbered
/// in order of appearance.
fn numbered(problem: &Problem) -> (Formula<usize>, Vec<&RegLeaf>) {
    let mut leaves = Vec::new();
    let mut conj = Vec::new();
    for f in &problem.regular {
        let mut tmp = Vec::new();
        f.leaves(&mut tmp);
        let base = leaves.len();
        let mut k = 0;
        conj.push(f.map(&mut |_| {
            k += 1;
            base + k - 1
        }));
        leaves.extend(tmp);
    }
    (Formula::And(conj), leaves)
}

/// Enumerates partial truth assignments to the leaves (cubes) whose
/// conjunction implies the formula. Every satisfying total assignment extends
/// at least one emitted cube.
fn cubes<'f, B>(
    goals: &mut Vec<(&'f Formula<usize>, bool)>,
    asg: &mut Vec<Option<bool>>,
    emit: &mut dyn FnMut(&[Option<bool>]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let Some((f, pol)) = goals.pop() else {
        return emit(asg);
    };
    let r = match (f, pol) {
        (Formula::Leaf(i), _) => match asg[*i] {
            Some(v) if v != pol => ControlFlow::Continue(()),
            Some(_) => cubes(goals, asg, emit),
            None => {
                asg[*i] = Some(pol);
                let r = cubes(goals, asg, emit);
                asg[*i] = None;
                r
            }
        },
        (Formula::Not(g), _) => {
            goals.push((g, !pol));
            let r = cubes(goals, asg, emit);
            goals.pop();
            r
        }
        (Formula::And(fs), true) | (Formula::Or(fs), false) => {
            let len = goals.len();
            goals.extend(fs.iter().rev().map(|g| (g, pol)));
            let r = cubes(goals, asg, emit);
            goals.truncate(len);
            r
        }
        (Formula::Or(fs), true) | (Formula::And(fs), false) => {
            let mut r = ControlFlow::Continue(());
            for g in fs {
                goals.push((g, pol));
                r = cubes(goals, asg, emit);
                goals.pop();
                if r.is_break() {
                    break;
                }
            }
            r
        }
    };
    goals.push((f, pol));
    r
}

/// Replaces `a` by an equivalent trimmed deterministic automaton when that
/// does not blow up its size.
fn prefer_deterministic(a: Nfa) -> Nfa {
    let d = a.determinize().trim();
    if d.num_states() <= (a.num_states() * DETERMINIZE_GROWTH).max(DETERMINIZE_FLOOR) {
        d
    } else {
        a
    }
}

/// Calls `f` on every regular branch in a deterministic order. Branches with
/// an empty language for some variable are skipped; duplicate cubes are
/// reported once.
pub fn for_each_regular_branch<B>(
    problem: &Problem,
    f: &mut dyn FnMut(RegularBranch) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let (formula, leaves) = numbered(problem);
    let n = problem.str_vars.len();
    let universal = Arc::new(Nfa::universal(&problem.alphabet));
    let mut complements: Vec<Option<Arc<Nfa>>> = vec![None; leaves.len()];
    let mut seen: HashSet<Vec<Option<bool>>> = HashSet::new();
    let mut goals = vec![(&formula, true)];
    let mut asg = vec![None; leaves.len()];
    cubes(&mut goals, &mut asg, &mut |cube| {
        if !seen.insert(cube.to_vec()) {
            return ControlFlow::Continue(());
        }
        let mut per_var: Vec<Option<Nfa>> = vec![None; n];
        for (i, lit) in cube.iter().enumerate() {
            let Some(pos) = *lit else { continue };
            let leaf = leaves[i];
            let lang: Arc<Nfa> = if pos {
                leaf.nfa.clone()
            } else {
                complements[i]
                    .get_or_insert_with(|| Arc::new(leaf.nfa.complement().trim()))
                    .clone()
            };
            let next = match per_var[leaf.var].take() {
                None => lang.eliminate_epsilon().trim(),
                Some(cur) => cur
                    .intersect(&lang)
                    .expect("regular leaves share the problem alphabet")
                    .trim(),
            };
            if next.is_empty() {
                return ControlFlow::Continue(());
            }
            per_var[leaf.var] = Some(next);
        }
        let constrained: Vec<bool> = per_var.iter().map(Option::is_some).collect();
        let nfas = per_var
            .into_iter()
            .map(|a| match a {
                Some(a) => Arc::new(prefer_deterministic(a)),
                None => universal.clone(),
            })
            .collect();
        f(RegularBranch { nfas, constrained })
    })
}

/// All regular branches, collected eagerly.
pub fn normalize_regular(problem: &Problem) -> Vec<RegularBranch> {
    let mut out = Vec::new();
    let _ = for_each_regular_branch::<()>(problem, &mut |b| {
        out.push(b);
        ControlFlow::Continue(())
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::words_up_to;
    use crate::constraints::parse_problem;

    fn prob(body: &str) -> Problem {
        parse_problem(&format!("alphabet \"ab\"\nstr x y\n{body}")).unwrap()
    }

    #[test]
    fn single_leaf() {
        let p = prob("regc (in x /a/)");
        let bs = normalize_regular(&p);
        assert_eq!(bs.len(), 1);
        assert!(bs[0].constrained[0] && !bs[0].constrained[1]);
        assert!(bs[0].nfas[0].accepts_str("a") && !bs[0].nfas[0].accepts_str("aa"));
        assert!(bs[0].nfas[1].accepts_str("abba"));
    }

    #[test]
    fn disjunction_covers_truth_table() {
        let p = prob("regc (or (in x /a/) (in x /b/))");
        let bs = normalize_regular(&p);
        assert!(!bs.is_empty() && bs.len() <= 3);
        for w in words_up_to(&p.alphabet, 3) {
            let want = w.len() == 1;
            assert_eq!(bs.iter().any(|b| b.nfas[0].accepts(&w)), want);
        }
    }

    #[test]
    fn negation_intersects_complement() {
        let p = prob("regc (and (in x /a*/) (not (in x /aa/)))");
        let bs = normalize_regular(&p);
        assert_eq!(bs.len(), 1);
        for w in words_up_to(&p.alphabet, 4) {
            let s = p.alphabet.decode(&w);
            let want = s.chars().all(|c| c == 'a') && s != "aa";
            assert_eq!(bs[0].nfas[0].accepts(&w), want, "{s}");
        }
    }

    #[test]
    fn contradictions_are_dropped() {
        let p = prob("regc (and (in x /a/) (not (in x /a/)))");
        assert!(normalize_regular(&p).is_empty());
        let p = prob("regc (and (in x /a/) (in x /b/))");
        assert!(normalize_regular(&p).is_empty());
        let p = prob("");
        assert_eq!(normalize_regular(&p).len(), 1);
    }
}
