//! Counter-tracking reachability over a solution automaton.
//!
//! A configuration is a state of the solution automaton together with the
//! counter values, the letters picked by character terms and the matcher
//! states of first-occurrence monitors. Counters only grow. A counter that
//! would pass the bound cuts the walk, which makes an unsuccessful search
//! bound-dependent; a configuration whose constraints are already violated
//! for good is dropped without that penalty.

use std::collections::{HashSet, VecDeque};
use std::time::Instant;

use crate::automata::{MultiTrackAutomaton, StateId, Sym, Word};

use super::lower::{Counter, Lin, Lowered, MonitorMode, TermBinding, Val};
use super::tree::emissions;
use crate::solver::SolveError;

/// Result of one walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkOutcome {
    /// Node words and integer slot values (unconstrained slots are zero).
    Sat {
        words: Vec<Word>,
        slots: Vec<i64>,
    },
    Unsat,
    /// No solution with counters and free integers up to the bound.
    UnsatWithinBounds,
}

/// Limits of one walk.
#[derive(Clone, Copy, Debug)]
pub struct WalkLimits {
    pub bound: u64,
    pub max_configs: usize,
    pub deadline: Option<Instant>,
}

/// Per-node update plan derived from a lowering.
struct Plan {
    /// Counters bumped by every letter of the node.
    len: Vec<Vec<usize>>,
    /// Counters bumped by a given letter of the node, indexed `[node][sym]`.
    count: Vec<Vec<Vec<usize>>>,
    /// Character terms on the node: (slot in the letter block, position counter).
    terms: Vec<Vec<(usize, usize)>>,
    /// Monitors on the node, by index.
    monitors: Vec<Vec<usize>>,
    /// Term id to slot in the letter block.
    term_slot: Vec<Option<usize>>,
    num_counters: usize,
    num_track_terms: usize,
    used_slots: Vec<usize>,
}

impl Plan {
    fn new(low: &Lowered, nodes: usize, letters: usize) -> Plan {
        let mut len = vec![Vec::new(); nodes];
        let mut count = vec![vec![Vec::new(); letters]; nodes];
        for (k, c) in low.counters.iter().enumerate() {
            match *c {
                Counter::Len(n) => len[n].push(k),
                Counter::Count(n, a) => count[n][a.index()].push(k),
                Counter::TermPos(_) | Counter::MatchEnd(_) => {}
            }
        }
        let mut terms = vec![Vec::new(); nodes];
        let mut term_slot = vec![None; low.terms.len()];
        let mut next = 0;
        for (t, b) in low.terms.iter().enumerate() {
            if let Some(TermBinding::Track { node, counter }) = b {
                terms[*node].push((next, *counter));
                term_slot[t] = Some(next);
                next += 1;
            }
        }
        let mut monitors = vec![Vec::new(); nodes];
        for (i, m) in low.monitors.iter().enumerate() {
            monitors[m.node].push(i);
        }
        let mut used = vec![false; low.num_slots];
        for l in &low.links {
            l.slots().for_each(|s| used[s] = true);
        }
        for f in &low.int_formulas {
            let mut leaves = Vec::new();
            f.leaves(&mut leaves);
            leaves
                .iter()
                .flat_map(|l| l.slots())
                .for_each(|s| used[s] = true);
        }
        Plan {
            len,
            count,
            terms,
            monitors,
            term_slot,
            num_counters: low.counters.len(),
            num_track_terms: next,
            used_slots: (0..low.num_slots).filter(|&s| used[s]).collect(),
        }
    }
}

/// Truth of an expression `≤ 0` that no counter growth can change, or
/// `None` if it may still change or depends on an integer variable.
fn settled_le(l: &Lin, counters: &[u32]) -> Option<bool> {
    let mut sum = l.constant as i128;
    let (mut up, mut down) = (false, false);
    for &(c, v) in &l.terms {
        match v {
            Val::Slot(_) => return None,
            Val::Counter(k) => {
                sum += c as i128 * counters[k] as i128;
                up |= c > 0;
                down |= c < 0;
            }
        }
    }
    if sum <= 0 && !up {
        Some(true)
    } else if sum > 0 && !down {
        Some(false)
    } else {
        None
    }
}

/// True if some constraint is violated whatever the counters do next.
fn doomed(low: &Lowered, counters: &[u32]) -> bool {
    let le = |l: &Lin| settled_le(l, counters);
    low.int_formulas
        .iter()
        .any(|f| f.eval_partial(&mut |l| le(l)) == Some(false))
        || low.links.iter().any(|l| {
            // `l = 0` is `l ≤ 0 ∧ −l ≤ 0`.
            let neg = Lin {
                terms: l.terms.iter().map(|&(c, v)| (-c, v)).collect(),
                constant: -l.constant,
            };
            le(l) == Some(false) || le(&neg) == Some(false)
        })
}

/// Decides whether the accepted configuration extends to a full solution;
/// returns the slot values if so. Sets `free` when integer variables had to
/// be enumerated up to the bound.
fn accept(
    low: &Lowered,
    plan: &Plan,
    vals: &[u32],
    bound: u64,
    free: &mut bool,
) -> Option<Vec<i64>> {
    let counters = &vals[..plan.num_counters];
    let letter = |t: usize| -> Sym {
        match low.terms[t].expect("compared terms are placed") {
            TermBinding::Const(a) => a,
            TermBinding::Track { .. } => {
                let s = plan.term_slot[t].expect("track terms have a slot");
                Sym((vals[plan.num_counters + s] - 1) as u16)
            }
        }
    };
    if !low
        .cmps
        .iter()
        .all(|f| f.eval(&mut |c| (letter(c.lhs) == letter(c.rhs)) == c.eq))
    {
        return None;
    }
    let mut slots: Vec<Option<i64>> = vec![None; low.num_slots];
    // Solve equations with a single unknown of unit coefficient.
    loop {
        let mut progress = false;
        for l in &low.links {
            let unknown: Vec<(i64, usize)> = l
                .terms
                .iter()
                .filter_map(|&(c, v)| match v {
                    Val::Slot(s) if slots[s].is_none() => Some((c, s)),
                    _ => None,
                })
                .collect();
            if let [(c, s)] = unknown[..] {
                if c == 1 || c == -1 {
                    let mut rest = slots.clone();
                    rest[s] = Some(0);
                    let r = l.eval(&rest, counters).expect("only one unknown");
                    let v = -r * c as i128;
                    if v < 0 || v > i64::MAX as i128 {
                        return None;
                    }
                    slots[s] = Some(v as i64);
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }
    let holds = |slots: &[Option<i64>]| {
        low.links.iter().all(|l| l.eval(slots, counters) == Some(0))
            && low
                .int_formulas
                .iter()
                .all(|f| f.eval(&mut |l| l.eval(slots, counters).is_some_and(|v| v <= 0)))
    };
    let open: Vec<usize> = plan
        .used_slots
        .iter()
        .copied()
        .filter(|&s| slots[s].is_none())
        .collect();
    if open.is_empty() {
        return holds(&slots).then(|| slots.iter().map(|s| s.unwrap_or(0)).collect());
    }
    for &s in &open {
        slots[s] = Some(0);
    }
    loop {
        if holds(&slots) {
            return Some(slots.iter().map(|s| s.unwrap_or(0)).collect());
        }
        let mut k = open.len();
        loop {
            if k == 0 {
                *free = true;
                return None;
            }
            k -= 1;
            let s = open[k];
            let v = slots[s].expect("open slots are set");
            if (v as u64) < bound {
                slots[s] = Some(v + 1);
                break;
            }
            slots[s] = Some(0);
        }
    }
}

/// Whether an accepting configuration is reachable when counters, integer
/// constraints and letter comparisons are ignored. A negative answer rules
/// out the lowering for every bound.
fn coarsely_reachable(
    low: &Lowered,
    plan: &Plan,
    moves: &[Vec<(usize, Sym, StateId)>],
    m: &MultiTrackAutomaton,
) -> bool {
    let terms = plan.num_track_terms;
    let mut init = vec![0u32; terms + low.monitors.len()];
    for (i, mon) in low.monitors.iter().enumerate() {
        init[terms + i] = mon.start;
    }
    let accepting = |q: StateId, v: &[u32]| {
        m.finals[q]
            && v[..terms].iter().all(|&t| t != 0)
            && low
                .monitors
                .iter()
                .enumerate()
                .all(|(i, mon)| match mon.mode {
                    MonitorMode::Pass { end } => v[terms + i] == end,
                    MonitorMode::Hit { .. } => v[terms + i] == mon.kmp.m,
                })
    };
    let mut seen = HashSet::new();
    seen.insert((m.initial, init.clone()));
    let mut stack = vec![(m.initial, init)];
    while let Some((q, v)) = stack.pop() {
        if accepting(q, &v) {
            return true;
        }
        for &(n, a, r) in &moves[q] {
            let mut w = v.clone();
            let mut dead = false;
            for &mi in &plan.monitors[n] {
                let mon = &low.monitors[mi];
                let st = w[terms + mi];
                match mon.mode {
                    MonitorMode::Pass { .. } => {
                        let s2 = mon.kmp.delta[st as usize][a.index()];
                        dead |= s2 == mon.kmp.m;
                        w[terms + mi] = s2;
                    }
                    MonitorMode::Hit { .. } if st != mon.kmp.m => {
                        w[terms + mi] = mon.kmp.delta[st as usize][a.index()];
                    }
                    MonitorMode::Hit { .. } => {}
                }
            }
            if dead {
                continue;
            }
            let open: Vec<usize> = plan.terms[n]
                .iter()
                .map(|&(s, _)| s)
                .filter(|&s| w[s] == 0)
                .collect();
            for mask in 0u64..(1u64 << open.len()) {
                let mut x = w.clone();
                for (bit, &s) in open.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        x[s] = 1;
                    }
                }
                if seen.insert((r, x.clone())) {
                    stack.push((r, x));
                }
            }
        }
    }
    false
}

/// A configuration: state, values, predecessor index and the move reaching it.
type Config = (StateId, Box<[u32]>, usize, Option<(usize, Sym)>);

/// Breadth-first reachability over configurations of `m` under the lowered
/// constraints. The first accepted configuration yields the node words.
pub fn counter_walk_solve(
    low: &Lowered,
    m: &MultiTrackAutomaton,
    limits: WalkLimits,
) -> Result<(WalkOutcome, usize), SolveError> {
    let nodes = m.arity();
    let plan = Plan::new(low, nodes, m.alphabet.len());
    let moves = emissions(m);
    let c_end = plan.num_counters;
    let t_end = c_end + plan.num_track_terms;
    let width = t_end + low.monitors.len();
    let bound = limits.bound.min(u32::MAX as u64 - 1) as u32;

    let mut init = vec![0u32; width];
    for (i, mon) in low.monitors.iter().enumerate() {
        init[t_end + i] = mon.start;
    }
    let mut truncated = false;
    let mut free = false;

    let mut configs: Vec<Config> = Vec::new();
    let mut seen: HashSet<(StateId, Box<[u32]>)> = HashSet::new();
    let mut queue = VecDeque::new();

    let is_accepting = |q: StateId, vals: &[u32]| -> bool {
        m.finals[q]
            && vals[c_end..t_end].iter().all(|&v| v != 0)
            && low
                .monitors
                .iter()
                .enumerate()
                .all(|(i, mon)| match mon.mode {
                    MonitorMode::Pass { end } => vals[t_end + i] == end,
                    MonitorMode::Hit { .. } => vals[t_end + i] == mon.kmp.m,
                })
    };

    if doomed(low, &init[..c_end]) || !coarsely_reachable(low, &plan, &moves, m) {
        return Ok((WalkOutcome::Unsat, 0));
    }
    let init: Box<[u32]> = init.into();
    seen.insert((m.initial, init.clone()));
    configs.push((m.initial, init, usize::MAX, None));
    queue.push_back(0usize);

    let mut found: Option<(usize, Vec<i64>)> = None;
    'bfs: while let Some(i) = queue.pop_front() {
        let (q, vals) = (configs[i].0, configs[i].1.clone());
        if is_accepting(q, &vals) {
            if let Some(slots) = accept(low, &plan, &vals, limits.bound, &mut free) {
                found = Some((i, slots));
                break 'bfs;
            }
        }
        if configs.len().is_multiple_of(1024) {
            if let Some(d) = limits.deadline {
                if Instant::now() >= d {
                    return Err(SolveError::ResourceLimit("timeout".into()));
                }
            }
        }
        for &(n, a, r) in &moves[q] {
            let mut v = vals.to_vec();
            let mut over = false;
            for &k in plan.len[n].iter().chain(&plan.count[n][a.index()]) {
                v[k] += 1;
                over |= v[k] > bound;
            }
            let mut dead = false;
            for &mi in &plan.monitors[n] {
                let mon = &low.monitors[mi];
                let s = v[t_end + mi];
                match mon.mode {
                    MonitorMode::Pass { .. } => {
                        let s2 = mon.kmp.delta[s as usize][a.index()];
                        dead |= s2 == mon.kmp.m;
                        v[t_end + mi] = s2;
                    }
                    MonitorMode::Hit { counter } => {
                        if s != mon.kmp.m {
                            v[t_end + mi] = mon.kmp.delta[s as usize][a.index()];
                            v[counter] += 1;
                            over |= v[counter] > bound;
                        }
                    }
                }
            }
            if dead {
                continue;
            }
            let open: Vec<(usize, usize)> = plan.terms[n]
                .iter()
                .copied()
                .filter(|&(s, _)| v[c_end + s] == 0)
                .collect();
            for &(_, counter) in &open {
                v[counter] += 1;
                over |= v[counter] > bound;
            }
            if doomed(low, &v[..c_end]) {
                continue;
            }
            if over {
                truncated = true;
                continue;
            }
            debug_assert!(
                v[..c_end].iter().zip(&vals[..c_end]).all(|(x, y)| x >= y),
                "counters never decrease"
            );
            // Every subset of the open terms may pick the current letter.
            for mask in 0u64..(1u64 << open.len()) {
                let mut w = v.clone();
                for (bit, &(s, _)) in open.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        w[c_end + s] = a.0 as u32 + 1;
                    }
                }
                let key: (StateId, Box<[u32]>) = (r, w.into());
                if seen.contains(&key) {
                    continue;
                }
                if configs.len() >= limits.max_configs {
                    return Err(SolveError::ResourceLimit(format!(
                        "counter walk exceeds {} configurations",
                        limits.max_configs
                    )));
                }
                seen.insert(key.clone());
                configs.push((key.0, key.1, i, Some((n, a))));
                queue.push_back(configs.len() - 1);
            }
        }
    }
    let explored = configs.len();
    if let Some((mut i, slots)) = found {
        let mut words = vec![Vec::new(); nodes];
        let mut trail = Vec::new();
        while let Some(e) = configs[i].3 {
            trail.push(e);
            i = configs[i].2;
        }
        for (n, a) in trail.into_iter().rev() {
            words[n].push(a);
        }
        return Ok((WalkOutcome::Sat { words, slots }, explored));
    }
    let outcome = if truncated || free {
        WalkOutcome::UnsatWithinBounds
    } else {
        WalkOutcome::Unsat
    };
    Ok((outcome, explored))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settled_expressions() {
        let l = Lin::of(Val::Counter(0)).plus_const(-3);
        assert_eq!(settled_le(&l, &[2]), None);
        assert_eq!(settled_le(&l, &[4]), Some(false));
        let g = Lin::constant(2).plus(-1, Val::Counter(0));
        assert_eq!(settled_le(&g, &[2]), Some(true));
        assert_eq!(settled_le(&g, &[1]), None);
        assert_eq!(settled_le(&Lin::of(Val::Slot(0)), &[]), None);
    }
}
