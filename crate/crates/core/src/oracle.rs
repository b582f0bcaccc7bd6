//! Brute-force reference solver and random problem generator.
//!
//! The reference solver enumerates values of the source variables by total
//! length, then lexicographically, derives every other string variable along
//! the straight-line order, enumerates integer variables, and checks each
//! full assignment with [`evaluate`]. Regular formulas are also checked as
//! soon as their variables are known. Every assignment whose strings are at
//! most `max_len` long and whose integers are at most `max_int` is covered.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{regex_parse, Alphabet, Nfa, Sym, Transducer, Word};
use crate::constraints::{
    evaluate, Assignment, CharAtom, CharTerm, Formula, IndexOfAtom, IndexOfSemantics, IntRef,
    IntTerm, Item, LinearAtom, Problem, RegLeaf, RelAtom, StrRef, VarId,
};
use crate::straightline::{check_straightline, StraightLine};

/// Search bounds of the reference solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_len: usize,
    pub max_int: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    /// The first satisfying assignment in enumeration order.
    Sat(Assignment),
    /// No assignment within the bounds satisfies the problem.
    Exhausted,
}

impl OracleOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleOutcome::Sat(_))
    }
}

/// Words of `dfa` (deterministic, trimmed) of length exactly `n`, in
/// lexicographic order.
fn words_of_len(dfa: &Nfa, n: usize, ok: &[Vec<bool>]) -> Vec<Word> {
    fn go(dfa: &Nfa, q: usize, left: usize, ok: &[Vec<bool>], cur: &mut Word, out: &mut Vec<Word>) {
        if left == 0 {
            if dfa.is_final(q) {
                out.push(cur.clone());
            }
            return;
        }
        for &(a, r) in dfa.transitions(q) {
            let a = a.expect("deterministic automata have no ε-moves");
            if ok[left - 1][r] {
                cur.push(a);
                go(dfa, r, left - 1, ok, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if dfa.num_states() > 0 && ok[n][dfa.initial()] {
        go(dfa, dfa.initial(), n, ok, &mut Vec::new(), &mut out);
    }
    out
}

/// `ok[k][q]`: some word of length exactly `k` leads from `q` to a final state.
fn exact_reach(dfa: &Nfa, max: usize) -> Vec<Vec<bool>> {
    let n = dfa.num_states();
    let mut ok = vec![(0..n).map(|q| dfa.is_final(q)).collect::<Vec<_>>()];
    for k in 1..=max {
        let prev = &ok[k - 1];
        let row = (0..n)
            .map(|q| dfa.transitions(q).iter().any(|&(_, r)| prev[r]))
            .collect();
        ok.push(row);
    }
    ok
}

/// Lexicographically ordered words of a language, grouped by length.
struct Domain {
    by_len: Vec<Vec<Word>>,
}

impl Domain {
    fn new(lang: &Nfa, max_len: usize) -> Domain {
        let dfa = lang.determinize().trim();
        let ok = exact_reach(&dfa, max_len);
        Domain {
            by_len: (0..=max_len).map(|n| words_of_len(&dfa, n, &ok)).collect(),
        }
    }
}

/// Exact language of a formula whose leaves all constrain one variable.
fn formula_language(f: &Formula<RegLeaf>, alphabet: &Alphabet) -> Nfa {
    let join = |fs: &[Formula<RegLeaf>], unit: Nfa, and: bool| {
        fs.iter().fold(unit, |acc, g| {
            let l = formula_language(g, alphabet);
            let r = if and {
                acc.intersect(&l)
            } else {
                acc.union(&l)
            };
            r.expect("same alphabet").trim()
        })
    };
    match f {
        Formula::Leaf(l) => (*l.nfa).clone(),
        Formula::And(fs) => join(fs, Nfa::universal(alphabet), true),
        Formula::Or(fs) => join(fs, Nfa::empty_language(alphabet), false),
        Formula::Not(g) => formula_language(g, alphabet).complement(),
    }
}

/// Language every value of each variable must belong to, and whether it is
/// narrower than everything. A formula on a single variable contributes its
/// exact language; any other formula contributes its positive leaves that
/// sit under conjunctions only.
fn necessary_languages(problem: &Problem) -> (Vec<Nfa>, Vec<bool>) {
    fn collect<'a>(f: &'a Formula<RegLeaf>, out: &mut Vec<&'a RegLeaf>) {
        match f {
            Formula::Leaf(l) => out.push(l),
            Formula::And(fs) => fs.iter().for_each(|g| collect(g, out)),
            _ => {}
        }
    }
    let n = problem.str_vars.len();
    let mut langs: Vec<Nfa> = (0..n).map(|_| Nfa::universal(&problem.alphabet)).collect();
    let mut narrowed = vec![false; n];
    let mut narrow = |x: VarId, l: &Nfa| {
        langs[x] = langs[x].intersect(l).expect("same alphabet").trim();
        narrowed[x] = true;
    };
    for f in &problem.regular {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        match leaves.first() {
            Some(first) if leaves.iter().all(|l| l.var == first.var) => {
                narrow(first.var, &formula_language(f, &problem.alphabet));
            }
            _ => {
                let mut positive = Vec::new();
                collect(f, &mut positive);
                positive.iter().for_each(|l| narrow(l.var, &l.nfa));
            }
        }
    }
    (langs, narrowed)
}

/// Words occurring inside some word of `lang`.
fn factors(lang: &Nfa) -> Nfa {
    let t = lang.trim();
    if !t.coreachable()[t.initial()] {
        return t;
    }
    let mut f = t.clone();
    let start = f.add_state();
    for q in 0..t.num_states() {
        f.add_transition(start, None, q).expect("state exists");
        f.set_final(q, true).expect("state exists");
    }
    f.set_initial(start).expect("state exists");
    f.eliminate_epsilon().trim()
}

/// Narrows the languages of atom arguments using the languages of the
/// variables they define, walking the straight-line order backwards. A
/// transducer also narrows its argument to its own domain.
fn propagate_back(problem: &Problem, sl: &StraightLine, nec: &mut [Nfa], narrowed: &mut [bool]) {
    for &x in sl.order.iter().rev() {
        let Some(atom) = sl.def[x] else { continue };
        match &problem.relational[atom] {
            RelAtom::Concat { .. } if !narrowed[x] => {}
            RelAtom::Concat { rhs, .. } => {
                let f = factors(&nec[x]);
                for it in rhs {
                    if let Item::Var(v) = it {
                        nec[*v] = nec[*v].intersect(&f).expect("same alphabet").trim();
                        narrowed[*v] = true;
                    }
                }
            }
            RelAtom::Trans {
                transducer, arg, ..
            } => {
                let pre = transducer.pre_image(&nec[x]).expect("same alphabet");
                nec[*arg] = nec[*arg].intersect(&pre).expect("same alphabet").trim();
                narrowed[*arg] = true;
            }
        }
    }
}

/// Variables some constraint or atom refers to.
fn mentioned_strs(problem: &Problem) -> Vec<bool> {
    let mut used = vec![false; problem.str_vars.len()];
    for a in &problem.relational {
        used[a.lhs()] = true;
        a.rhs_vars().into_iter().for_each(|v| used[v] = true);
    }
    for f in &problem.regular {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        leaves.iter().for_each(|l| used[l.var] = true);
    }
    for f in &problem.integer {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        for a in leaves {
            for (_, t) in &a.terms {
                if let IntTerm::Len(x) | IntTerm::Count(x, _) = t {
                    used[*x] = true;
                }
            }
        }
    }
    for f in &problem.character {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        for a in leaves {
            for s in [&a.lhs.s, &a.rhs.s] {
                if let StrRef::Var(x) = s {
                    used[*x] = true;
                }
            }
        }
    }
    for a in &problem.index_of {
        if let StrRef::Var(x) = a.haystack {
            used[x] = true;
        }
    }
    for &(x, y) in &problem.disequalities {
        used[x] = true;
        used[y] = true;
    }
    used
}

struct Search<'p> {
    problem: &'p Problem,
    sl: StraightLine,
    cfg: OracleConfig,
    necessary: Vec<Nfa>,
    /// Assignment order: every source comes right before its first consumer.
    plan: Vec<VarId>,
    /// Sources in the order their lengths are chosen.
    sources: Vec<VarId>,
    domains: Vec<Option<Domain>>,
    /// Regular formulas that become decidable after each step of the plan.
    checks: Vec<Vec<usize>>,
    /// Integer variables that some constraint mentions.
    ints: Vec<usize>,
}

impl<'p> Search<'p> {
    fn new(problem: &'p Problem, sl: StraightLine, cfg: OracleConfig) -> Self {
        let (mut necessary, mut narrowed) = necessary_languages(problem);
        propagate_back(problem, &sl, &mut necessary, &mut narrowed);
        let used = mentioned_strs(problem);
        let mut planned = vec![false; problem.str_vars.len()];
        let mut plan = Vec::new();
        for &x in &sl.order {
            if !used[x] || planned[x] || sl.is_source(x) {
                continue;
            }
            if let Some(atom) = sl.def[x] {
                for v in problem.relational[atom].rhs_vars() {
                    if !planned[v] {
                        planned[v] = true;
                        plan.push(v);
                    }
                }
            }
            planned[x] = true;
            plan.push(x);
        }
        for &x in &sl.order {
            if used[x] && !planned[x] {
                planned[x] = true;
                plan.push(x);
            }
        }
        let sources: Vec<VarId> = plan.iter().copied().filter(|&x| sl.is_source(x)).collect();
        let mut domains: Vec<Option<Domain>> = (0..problem.str_vars.len()).map(|_| None).collect();
        for &x in &sources {
            domains[x] = Some(Domain::new(&necessary[x], cfg.max_len));
        }
        let step_of: Vec<usize> = {
            let mut s = vec![usize::MAX; problem.str_vars.len()];
            plan.iter().enumerate().for_each(|(k, &x)| s[x] = k);
            s
        };
        let mut checks = vec![Vec::new(); plan.len()];
        for (i, f) in problem.regular.iter().enumerate() {
            let mut leaves = Vec::new();
            f.leaves(&mut leaves);
            if let Some(k) = leaves.iter().map(|l| step_of[l.var]).max() {
                checks[k].push(i);
            }
        }
        Search {
            problem,
            sl,
            cfg,
            necessary,
            plan,
            sources,
            domains,
            checks,
            ints: mentioned_ints(problem),
        }
    }

    fn passes(&self, k: usize, asg: &Assignment) -> bool {
        self.checks[k]
            .iter()
            .all(|&i| crate::constraints::regular_holds(&self.problem.regular[i], asg))
    }

    /// Assigns plan steps `k..` with the source lengths in `lens`.
    fn step(&self, k: usize, lens: &[usize], asg: &mut Assignment) -> Option<Assignment> {
        let Some(&x) = self.plan.get(k) else {
            return self.assign_ints(0, asg);
        };
        let try_value = |w: Word, asg: &mut Assignment| {
            asg.strs[x] = w;
            if self.passes(k, asg) {
                self.step(k + 1, lens, asg)
            } else {
                None
            }
        };
        let Some(atom) = self.sl.def[x] else {
            let j = self
                .sources
                .iter()
                .position(|&s| s == x)
                .expect("sources are planned");
            let dom = self.domains[x].as_ref().expect("sources have a domain");
            for w in &dom.by_len[lens[j]] {
                if let Some(found) = try_value(w.clone(), asg) {
                    return Some(found);
                }
            }
            return None;
        };
        match &self.problem.relational[atom] {
            RelAtom::Concat { rhs, .. } => {
                let mut w = Vec::new();
                for it in rhs {
                    match it {
                        Item::Var(v) => w.extend_from_slice(&asg.strs[*v]),
                        Item::Lit(l) => w.extend_from_slice(l),
                    }
                }
                if w.len() > self.cfg.max_len || !self.necessary[x].accepts(&w) {
                    return None;
                }
                try_value(w, asg)
            }
            RelAtom::Trans {
                transducer, arg, ..
            } => {
                let image = transducer
                    .apply(&asg.strs[*arg])
                    .intersect(&self.necessary[x])
                    .expect("same alphabet");
                let dom = Domain::new(&image, self.cfg.max_len);
                for w in dom.by_len.into_iter().flatten() {
                    if let Some(found) = try_value(w, asg) {
                        return Some(found);
                    }
                }
                None
            }
        }
    }

    fn assign_ints(&self, i: usize, asg: &mut Assignment) -> Option<Assignment> {
        let Some(&u) = self.ints.get(i) else {
            return evaluate(self.problem, asg).then(|| asg.clone());
        };
        for v in 0..=self.cfg.max_int {
            asg.ints[u] = v;
            if let Some(found) = self.assign_ints(i + 1, asg) {
                return Some(found);
            }
        }
        asg.ints[u] = 0;
        None
    }

    /// Every way to split `total` into one length per source, each at most
    /// `max_len`, in lexicographic order.
    fn length_vectors(&self, total: usize) -> Vec<Vec<usize>> {
        fn go(n: usize, total: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == n {
                if total == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for l in 0..=total.min(max) {
                cur.push(l);
                go(n, total - l, max, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(
            self.sources.len(),
            total,
            self.cfg.max_len,
            &mut Vec::new(),
            &mut out,
        );
        out
    }
}

fn mentioned_ints(problem: &Problem) -> Vec<usize> {
    let mut used = vec![false; problem.int_vars.len()];
    let mut mark = |i: IntRef| {
        if let IntRef::Var(u) = i {
            used[u] = true;
        }
    };
    for f in &problem.character {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        for a in leaves {
            mark(a.lhs.idx);
            mark(a.rhs.idx);
        }
    }
    for a in &problem.index_of {
        mark(a.target);
    }
    for f in &problem.integer {
        let mut leaves = Vec::new();
        f.leaves(&mut leaves);
        for a in leaves {
            for (_, t) in &a.terms {
                if let IntTerm::Var(u) = t {
                    used[*u] = true;
                }
            }
        }
    }
    (0..used.len()).filter(|&u| used[u]).collect()
}

/// Searches all assignments within the bounds. Variables that no atom or
/// constraint mentions stay empty. The problem must be straight-line;
/// otherwise the result is [`OracleOutcome::Exhausted`].
pub fn brute_force_solve(problem: &Problem, cfg: OracleConfig) -> OracleOutcome {
    let Ok(sl) = check_straightline(problem) else {
        return OracleOutcome::Exhausted;
    };
    let search = Search::new(problem, sl, cfg);
    let mut asg = Assignment::new(problem);
    for total in 0..=cfg.max_len * search.sources.len() {
        for lens in search.length_vectors(total) {
            let empty = |(j, &x): (usize, &VarId)| {
                search.domains[x]
                    .as_ref()
                    .is_some_and(|d| d.by_len[lens[j]].is_empty())
            };
            if search.sources.iter().enumerate().any(empty) {
                continue;
            }
            if let Some(found) = search.step(0, &lens, &mut asg) {
                return OracleOutcome::Sat(found);
            }
        }
    }
    OracleOutcome::Exhausted
}

/// Shape of generated problems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    /// Letters are taken from `abc` in order (1 to 3).
    pub alphabet_size: usize,
    /// Upper bound on relational atoms; zero yields declarations only.
    pub max_atoms: usize,
    /// Upper bound on the states of generated transducers.
    pub max_states: usize,
    /// Upper bound on source variables (at least one is generated).
    pub max_sources: usize,
    /// Add integer, character, IndexOf and disequality constraints.
    pub extended: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            alphabet_size: 2,
            max_atoms: 3,
            max_states: 3,
            max_sources: 2,
            extended: false,
        }
    }
}

fn random_regex(rng: &mut ChaCha8Rng, letters: &[char], depth: usize) -> String {
    let atom = |rng: &mut ChaCha8Rng| -> String {
        match rng.gen_range(0..4) {
            0 if letters.len() > 1 => {
                let mut ls = letters.to_vec();
                ls.shuffle(rng);
                let k = rng.gen_range(2..=ls.len());
                let mut chosen: Vec<char> = ls[..k].to_vec();
                chosen.sort();
                format!("[{}]", chosen.into_iter().collect::<String>())
            }
            _ => letters[rng.gen_range(0..letters.len())].to_string(),
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..5) {
        0 => format!(
            "{}{}",
            random_regex(rng, letters, depth - 1),
            random_regex(rng, letters, depth - 1)
        ),
        1 => format!(
            "({}|{})",
            random_regex(rng, letters, depth - 1),
            random_regex(rng, letters, depth - 1)
        ),
        2 => format!("({})*", random_regex(rng, letters, depth - 1)),
        3 => format!("{}*", atom(rng)),
        _ => atom(rng),
    }
}

fn random_transducer(rng: &mut ChaCha8Rng, al: &Alphabet, max_states: usize) -> Transducer {
    let n = rng.gen_range(1..=max_states.max(1));
    let mut t = Transducer::with_states(al, n, 0).expect("initial state exists");
    let letter = |rng: &mut ChaCha8Rng| -> Option<Sym> {
        if rng.gen_bool(0.25) {
            None
        } else {
            Some(Sym(rng.gen_range(0..al.len()) as u16))
        }
    };
    for q in 0..n {
        if q == n - 1 || rng.gen_bool(0.4) {
            t.set_final(q, true).expect("state exists");
        }
        for _ in 0..rng.gen_range(1..=al.len() + 1) {
            let (a, b) = (letter(rng), letter(rng));
            if a.is_none() && b.is_none() {
                continue;
            }
            let r = rng.gen_range(0..n);
            t.add_transition(q, a, b, r).expect("states exist");
        }
    }
    t
}

fn random_word(rng: &mut ChaCha8Rng, k: usize, min: usize, max: usize) -> Word {
    (0..rng.gen_range(min..=max))
        .map(|_| Sym(rng.gen_range(0..k) as u16))
        .collect()
}

fn leaf(problem: &Problem, var: VarId, pattern: String) -> Formula<RegLeaf> {
    let nfa = regex_parse(&pattern, &problem.alphabet).expect("generated patterns are valid");
    Formula::Leaf(RegLeaf {
        var,
        pattern,
        nfa: Arc::new(nfa),
    })
}

/// Generates a straight-line problem, deterministically per seed. Variables
/// are defined along their declaration order, so the result always passes
/// the straight-line check.
pub fn gen_random_problem(seed: u64, params: &GenParams) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters: Vec<char> = "abc"
        .chars()
        .take(params.alphabet_size.clamp(1, 3))
        .collect();
    let al = Alphabet::new(letters.iter().copied()).expect("distinct letters");
    let k = al.len();
    let mut p = Problem::new(al.clone());

    let sources = rng.gen_range(1..=params.max_sources.max(1));
    for i in 0..sources {
        p.add_str_var(&format!("x{i}"));
    }
    if params.max_atoms == 0 {
        return p;
    }
    let atoms = rng.gen_range(0..=params.max_atoms);
    let mut machines = 0;
    for i in 0..atoms {
        let defined = p.str_vars.len();
        let lhs = p.add_str_var(&format!("y{i}"));
        if rng.gen_bool(0.5) {
            let mut rhs = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                if rng.gen_bool(0.75) {
                    rhs.push(Item::Var(rng.gen_range(0..defined)));
                } else {
                    rhs.push(Item::Lit(random_word(&mut rng, k, 1, 2)));
                }
            }
            if !rhs.iter().any(|it| matches!(it, Item::Var(_))) {
                rhs.push(Item::Var(rng.gen_range(0..defined)));
            }
            p.relational.push(RelAtom::Concat { lhs, rhs });
        } else {
            let arg = rng.gen_range(0..defined);
            let (name, t) = if rng.gen_bool(0.15) {
                ("identity".to_string(), Arc::new(Transducer::identity(&al)))
            } else {
                let name = format!("T{machines}");
                machines += 1;
                let t = Arc::new(random_transducer(&mut rng, &al, params.max_states));
                p.transducer_defs.push((name.clone(), t.clone()));
                (name, t)
            };
            p.relational.push(RelAtom::Trans {
                lhs,
                name,
                transducer: t,
                arg,
            });
        }
    }

    let nvars = p.str_vars.len();
    for _ in 0..rng.gen_range(1..=2) {
        let var = rng.gen_range(0..nvars);
        let pat = random_regex(&mut rng, &letters, 2);
        let f = match rng.gen_range(0..6) {
            0 => Formula::Not(Box::new(leaf(&p, var, pat))),
            1 => {
                let other = rng.gen_range(0..nvars);
                let pat2 = random_regex(&mut rng, &letters, 1);
                Formula::Or(vec![leaf(&p, var, pat), leaf(&p, other, pat2)])
            }
            _ => leaf(&p, var, pat),
        };
        p.regular.push(f);
    }

    if params.extended {
        add_extended(&mut rng, &mut p);
    }
    p
}

fn add_extended(rng: &mut ChaCha8Rng, p: &mut Problem) {
    let k = p.alphabet.len();
    let nvars = p.str_vars.len();
    let nints = rng.gen_range(0..=2);
    for i in 0..nints {
        p.add_int_var(&format!("u{i}"));
    }
    let int_ref = |rng: &mut ChaCha8Rng| -> IntRef {
        if nints > 0 && rng.gen_bool(0.7) {
            IntRef::Var(rng.gen_range(0..nints))
        } else {
            IntRef::Const(rng.gen_range(1..=3))
        }
    };
    let str_ref = |rng: &mut ChaCha8Rng| -> StrRef {
        if rng.gen_bool(0.85) {
            StrRef::Var(rng.gen_range(0..nvars))
        } else {
            StrRef::Lit(random_word(rng, k, 1, 3))
        }
    };
    let kinds = rng.gen_range(1..=2);
    for _ in 0..kinds {
        match rng.gen_range(0..4) {
            0 => {
                let x = rng.gen_range(0..nvars);
                let mut terms = vec![(
                    1,
                    if rng.gen_bool(0.5) {
                        IntTerm::Len(x)
                    } else {
                        IntTerm::Count(x, Sym(rng.gen_range(0..k) as u16))
                    },
                )];
                if nints > 0 && rng.gen_bool(0.5) {
                    terms.push((-1, IntTerm::Var(rng.gen_range(0..nints))));
                }
                if rng.gen_bool(0.5) {
                    terms.iter_mut().for_each(|t| t.0 = -t.0);
                }
                let atom = Formula::Leaf(LinearAtom {
                    terms,
                    bound: rng.gen_range(-2..=3),
                });
                p.integer.push(if rng.gen_bool(0.25) {
                    Formula::Not(Box::new(atom))
                } else {
                    atom
                });
            }
            1 => {
                let lhs = CharTerm {
                    s: str_ref(rng),
                    idx: int_ref(rng),
                };
                let rhs = if rng.gen_bool(0.5) {
                    CharTerm {
                        s: StrRef::Lit(vec![Sym(rng.gen_range(0..k) as u16)]),
                        idx: IntRef::Const(1),
                    }
                } else {
                    CharTerm {
                        s: str_ref(rng),
                        idx: int_ref(rng),
                    }
                };
                let atom = Formula::Leaf(CharAtom {
                    lhs,
                    rhs,
                    eq: rng.gen_bool(0.7),
                });
                p.character.push(if rng.gen_bool(0.2) {
                    Formula::Not(Box::new(atom))
                } else {
                    atom
                });
            }
            2 => {
                let semantics = if rng.gen_bool(0.5) {
                    IndexOfSemantics::First
                } else {
                    IndexOfSemantics::Anywhere
                };
                p.index_of.push(IndexOfAtom {
                    target: int_ref(rng),
                    needle: random_word(rng, k, 1, 2),
                    haystack: StrRef::Var(rng.gen_range(0..nvars)),
                    semantics,
                });
            }
            _ if nvars > 1 => {
                let x = rng.gen_range(0..nvars);
                let y = (x + rng.gen_range(1..nvars)) % nvars;
                p.disequalities.push((x, y));
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::parse_problem;

    fn cfg(max_len: usize) -> OracleConfig {
        OracleConfig {
            max_len,
            max_int: 4,
        }
    }

    #[test]
    fn single_membership() {
        let p = parse_problem("alphabet \"ab\"\nstr x\nregc (in x /a/)").unwrap();
        let OracleOutcome::Sat(m) = brute_force_solve(&p, cfg(3)) else {
            panic!()
        };
        assert_eq!(p.alphabet.decode(&m.strs[0]), "a");
    }

    #[test]
    fn square_of_uniform_word_exhausts() {
        let p = parse_problem(
            "alphabet \"ab\"\nstr x y\nx = y . y\nregc (in y /a*|b*/)\nregc (in x /ab/)",
        )
        .unwrap();
        assert_eq!(brute_force_solve(&p, cfg(6)), OracleOutcome::Exhausted);
    }

    #[test]
    fn erase_applies() {
        let p =
            parse_problem("alphabet \"a<\"\nstr w x\nx = erase[<](w)\nregc (in w /<a</)").unwrap();
        let OracleOutcome::Sat(m) = brute_force_solve(&p, cfg(4)) else {
            panic!()
        };
        assert_eq!(p.alphabet.decode(&m.strs[1]), "a");
    }

    #[test]
    fn minimal_witness_first() {
        let p = parse_problem("alphabet \"ab\"\nstr x\nregc (in x /b*a/)").unwrap();
        let OracleOutcome::Sat(m) = brute_force_solve(&p, cfg(4)) else {
            panic!()
        };
        assert_eq!(p.alphabet.decode(&m.strs[0]), "a");
    }

    #[test]
    fn generator_is_deterministic_and_straight_line() {
        let params = GenParams {
            extended: true,
            ..GenParams::default()
        };
        assert_eq!(
            format!("{:?}", gen_random_problem(1, &params)),
            format!("{:?}", gen_random_problem(1, &params))
        );
        for seed in 0..100 {
            let p = gen_random_problem(seed, &params);
            assert!(check_straightline(&p).is_ok(), "seed {seed}");
            assert!(
                crate::constraints::problem_wellformed(&p).is_empty(),
                "seed {seed}"
            );
        }
        let p = gen_random_problem(
            3,
            &GenParams {
                max_atoms: 0,
                ..GenParams::default()
            },
        );
        assert!(p.relational.is_empty() && p.regular.is_empty());
        assert!(brute_force_solve(&p, cfg(0)).is_sat());
    }
}
