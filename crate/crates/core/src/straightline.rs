//! Straight-line validation, dependency graph and split counts.
//!
//! A relational constraint is straight-line if every variable is defined by
//! at most one atom and the dependency graph (edge `x → y` whenever the
//! definition of `y` mentions `x`) is acyclic.

use std::collections::VecDeque;
use std::fmt;

use crate::constraints::{Item, Problem, RelAtom, VarId};

/// Why a problem is not straight-line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlRejection {
    /// The variable is the left-hand side of more than one atom.
    MultiplyDefined(VarId),
    /// A dependency cycle; each variable's definition uses the previous one
    /// and the first uses the last.
    Cycle(Vec<VarId>),
}

impl SlRejection {
    /// Human-readable reason with variable names.
    pub fn describe(&self, p: &Problem) -> String {
        match self {
            SlRejection::MultiplyDefined(x) => {
                format!("variable {} is defined more than once", p.str_vars[*x])
            }
            SlRejection::Cycle(c) => {
                let mut names: Vec<&str> = c.iter().map(|&v| p.str_vars[v].as_str()).collect();
                names.push(names[0]);
                format!("dependency cycle {}", names.join(" -> "))
            }
        }
    }
}

impl fmt::Display for SlRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlRejection::MultiplyDefined(x) => write!(f, "variable #{x} is defined more than once"),
            SlRejection::Cycle(c) => write!(f, "dependency cycle through {} variables", c.len()),
        }
    }
}

/// Edges `x → y` for every atom defining `y` from `x`, deduplicated and
/// sorted per source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    pub succ: Vec<Vec<VarId>>,
}

pub fn dependency_graph(p: &Problem) -> DependencyGraph {
    let mut succ = vec![Vec::new(); p.str_vars.len()];
    for a in &p.relational {
        for x in a.rhs_vars() {
            succ[x].push(a.lhs());
        }
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    DependencyGraph { succ }
}

/// Accepted straight-line structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StraightLine {
    /// Every string variable in a topological order, sources first.
    pub order: Vec<VarId>,
    /// Indices into `Problem::relational` in defining order.
    pub atoms: Vec<usize>,
    /// Defining atom of each variable, if any.
    pub def: Vec<Option<usize>>,
}

impl StraightLine {
    pub fn is_source(&self, v: VarId) -> bool {
        self.def[v].is_none()
    }
}

/// Checks unique definitions, then sorts the dependency graph topologically.
pub fn check_straightline(p: &Problem) -> Result<StraightLine, SlRejection> {
    let n = p.str_vars.len();
    let mut def: Vec<Option<usize>> = vec![None; n];
    for (i, a) in p.relational.iter().enumerate() {
        let y = a.lhs();
        if def[y].is_some() {
            return Err(SlRejection::MultiplyDefined(y));
        }
        def[y] = Some(i);
    }
    let g = dependency_graph(p);
    let mut indeg = vec![0usize; n];
    for s in &g.succ {
        for &y in s {
            indeg[y] += 1;
        }
    }
    let mut queue: VecDeque<VarId> = (0..n).filter(|&v| def[v].is_none()).collect();
    queue.extend((0..n).filter(|&v| def[v].is_some() && indeg[v] == 0));
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &y in &g.succ[v] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                queue.push_back(y);
            }
        }
    }
    if order.len() < n {
        let remaining: Vec<bool> = indeg.iter().map(|&d| d > 0).collect();
        return Err(SlRejection::Cycle(shortest_cycle(&g, &remaining)));
    }
    let atoms = order.iter().filter_map(|&v| def[v]).collect();
    Ok(StraightLine { order, atoms, def })
}

/// Shortest cycle among the nodes that Kahn's algorithm could not remove.
/// The cycle is rotated to start at its smallest variable.
fn shortest_cycle(g: &DependencyGraph, remaining: &[bool]) -> Vec<VarId> {
    let n = remaining.len();
    let mut best: Option<Vec<VarId>> = None;
    let mut parent = vec![usize::MAX; n];
    let mut touched: Vec<usize> = Vec::new();
    for start in (0..n).filter(|&v| remaining[v]) {
        for &t in &touched {
            parent[t] = usize::MAX;
        }
        touched.clear();
        let mut queue = VecDeque::from([start]);
        let mut found = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for &y in &g.succ[v] {
                if !remaining[y] {
                    continue;
                }
                if y == start {
                    found = Some(v);
                    break 'bfs;
                }
                if parent[y] == usize::MAX {
                    parent[y] = v;
                    touched.push(y);
                    queue.push_back(y);
                }
            }
        }
        if let Some(last) = found {
            let mut cyc = vec![last];
            let mut cur = last;
            while cur != start {
                cur = parent[cur];
                cyc.push(cur);
            }
            cyc.reverse();
            if best.as_ref().is_none_or(|b| cyc.len() < b.len()) {
                let short = cyc.len() == 1;
                best = Some(cyc);
                if short {
                    break;
                }
            }
        }
    }
    let mut c = best.expect("a graph with leftover nodes has a cycle");
    let min_pos = c
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    c.rotate_left(min_pos);
    c
}

/// Per-variable split counts with lazily evaluated selector functions.
#[derive(Clone, Debug)]
pub struct SplitCounts {
    /// `max_x` for every variable (saturating).
    pub max: Vec<u64>,
    /// For a concatenation-defined variable: cumulative segment counts per
    /// right-hand-side item, used to evaluate the selector.
    prefix: Vec<Option<Vec<u64>>>,
    pub count_constants: bool,
}

impl SplitCounts {
    /// Selector `ν(k)` for segment `k` (0-based) of a concatenation-defined
    /// variable: the right-hand-side item index and the segment inside it.
    pub fn selector(&self, y: VarId, k: u64) -> Option<(usize, u64)> {
        let pre = self.prefix[y].as_ref()?;
        if k >= *pre.last().unwrap_or(&0) {
            return None;
        }
        let i = pre.partition_point(|&c| c <= k);
        let before = if i == 0 { 0 } else { pre[i - 1] };
        Some((i, k - before))
    }

    /// Full selector table of a concatenation-defined variable.
    pub fn selector_table(&self, y: VarId) -> Option<Vec<(usize, u64)>> {
        let total = *self.prefix[y].as_ref()?.last().unwrap_or(&0);
        Some(
            (0..total)
                .map(|k| self.selector(y, k).expect("in range"))
                .collect(),
        )
    }

    pub fn dimension(&self) -> u64 {
        self.max.iter().copied().max().unwrap_or(0)
    }
}

/// Computes `max_x` bottom-up: sources have one segment, a concatenation has
/// the sum over its variable items (literals count only when
/// `count_constants` is set), and a transducer output inherits the count of
/// its argument. A concatenation without any segment still reports 1.
pub fn split_counts(p: &Problem, sl: &StraightLine, count_constants: bool) -> SplitCounts {
    let n = p.str_vars.len();
    let mut max = vec![1u64; n];
    let mut prefix: Vec<Option<Vec<u64>>> = vec![None; n];
    for &ai in &sl.atoms {
        match &p.relational[ai] {
            RelAtom::Concat { lhs, rhs } => {
                let mut acc = 0u64;
                let mut pre = Vec::with_capacity(rhs.len());
                for it in rhs {
                    let c = match it {
                        Item::Var(v) => max[*v],
                        Item::Lit(_) => u64::from(count_constants),
                    };
                    acc = acc.saturating_add(c);
                    pre.push(acc);
                }
                max[*lhs] = acc.max(1);
                prefix[*lhs] = Some(pre);
            }
            RelAtom::Trans { lhs, arg, .. } => max[*lhs] = max[*arg],
        }
    }
    SplitCounts {
        max,
        prefix,
        count_constants,
    }
}

/// Maximum split count over all variables.
pub fn dimension(p: &Problem, count_constants: bool) -> Result<u64, SlRejection> {
    let sl = check_straightline(p)?;
    Ok(split_counts(p, &sl, count_constants).dimension())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_problem;

    fn prob(body: &str) -> Problem {
        parse_problem(&format!("alphabet \"ab\"\n{body}")).unwrap()
    }

    #[test]
    fn accepts_example_order() {
        let p = prob("str x y z zp\ny = identity(x)\nz = y . y . zp");
        let sl = check_straightline(&p).unwrap();
        let names: Vec<&str> = sl.order.iter().map(|&v| p.str_vars[v].as_str()).collect();
        assert_eq!(names, vec!["x", "zp", "y", "z"]);
        let sc = split_counts(&p, &sl, false);
        assert_eq!(sc.max, vec![1, 1, 3, 1]);
        assert_eq!(sc.selector_table(2).unwrap(), vec![(0, 0), (1, 0), (2, 0)]);
    }

    #[test]
    fn rejects_cycle_and_double_definition() {
        let p = prob("str x y\nx = y\ny = identity(x)");
        assert_eq!(check_straightline(&p), Err(SlRejection::Cycle(vec![0, 1])));
        let p = prob("str x y\ny = x\ny = identity(x)");
        assert_eq!(check_straightline(&p), Err(SlRejection::MultiplyDefined(1)));
        let p = prob("str x\nx = identity(x)");
        assert_eq!(check_straightline(&p), Err(SlRejection::Cycle(vec![0])));
    }

    #[test]
    fn dimensions() {
        let p = prob("str x y\ny = identity(x)");
        assert_eq!(dimension(&p, false), Ok(1));
        let p = prob("str y z\nz = y . y . y . y");
        assert_eq!(dimension(&p, false), Ok(4));
        let p = prob("str y z\nz = \"a\" . y . \"b\" . y");
        assert_eq!(dimension(&p, false), Ok(2));
        assert_eq!(dimension(&p, true), Ok(4));
    }

    #[test]
    fn selector_with_nested_counts() {
        let p = prob("str a b c d\nc = a . b . a\nd = c . \"ab\" . b");
        let sl = check_straightline(&p).unwrap();
        let sc = split_counts(&p, &sl, false);
        assert_eq!(sc.max[2], 3);
        assert_eq!(sc.max[3], 4);
        assert_eq!(
            sc.selector_table(3).unwrap(),
            vec![(0, 0), (0, 1), (0, 2), (2, 0)]
        );
        let sc = split_counts(&p, &sl, true);
        assert_eq!(
            sc.selector_table(3).unwrap(),
            vec![(0, 0), (0, 1), (0, 2), (1, 0), (2, 0)]
        );
    }
}
