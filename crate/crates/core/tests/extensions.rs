use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slstr_core::automata::{words_up_to, Alphabet, Nfa, Sym, Transducer, Word};
use slstr_core::constraints::{parse_problem, regex_escape};
use slstr_core::extensions::build_tree_solution_automaton;
use slstr_core::solver::{solve, AcForest, ForestEdge, ForestNode, Segment, SolverConfig};

fn random_nfa(rng: &mut ChaCha8Rng, al: &Alphabet) -> Nfa {
    let n = rng.gen_range(1..=3);
    let mut a = Nfa::with_states(al, n, 0).unwrap();
    for q in 0..n {
        a.set_final(q, rng.gen_bool(0.5)).unwrap();
        for r in 0..n {
            for s in al.syms() {
                if rng.gen_bool(0.4) {
                    a.add_transition(q, Some(s), r).unwrap();
                }
            }
        }
    }
    a
}

fn random_transducer(rng: &mut ChaCha8Rng, al: &Alphabet) -> Transducer {
    let n = rng.gen_range(1..=2);
    let mut t = Transducer::with_states(al, n, 0).unwrap();
    let letter = |rng: &mut ChaCha8Rng| rng.gen_bool(0.75).then(|| Sym(rng.gen_range(0..2)));
    for q in 0..n {
        t.set_final(q, rng.gen_bool(0.6)).unwrap();
        for _ in 0..rng.gen_range(1..=4) {
            let r = rng.gen_range(0..n);
            let (i, o) = (letter(rng), letter(rng));
            if i.is_some() || o.is_some() {
                t.add_transition(q, i, o, r).unwrap();
            }
        }
    }
    t
}

/// A forest with the given parent of every node (`None` for roots).
fn forest(rng: &mut ChaCha8Rng, al: &Alphabet, parents: &[Option<usize>]) -> AcForest {
    let nodes = parents
        .iter()
        .enumerate()
        .map(|(i, p)| ForestNode {
            nfa: Arc::new(random_nfa(rng, al)),
            parent: p.map(|parent| ForestEdge {
                parent,
                transducer: Arc::new(random_transducer(rng, al)),
                states: (0, 0),
            }),
            origin: (i, 0),
        })
        .collect();
    AcForest {
        nodes,
        layouts: (0..parents.len()).map(|i| vec![Segment::Node(i)]).collect(),
    }
}

fn brute_force_accepts(f: &AcForest, words: &[&Word]) -> bool {
    f.nodes.iter().enumerate().all(|(i, n)| {
        n.nfa.accepts(words[i])
            && n.parent
                .as_ref()
                .is_none_or(|e| e.transducer.accepts(words[e.parent], words[i]))
    })
}

#[test]
fn tree_automaton_matches_brute_force() {
    let al = Alphabet::from_str_chars("ab").unwrap();
    let words: Vec<Word> = words_up_to(&al, 4).collect();
    let shapes: [&[Option<usize>]; 4] = [
        &[None],
        &[None, Some(0)],
        &[None, Some(0), Some(1)],
        &[None, Some(0), Some(0)],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for shape in shapes {
        for round in 0..8 {
            let f = forest(&mut rng, &al, shape);
            let m = build_tree_solution_automaton(&f, &al, 100_000).unwrap();
            let mut idx = vec![0usize; shape.len()];
            loop {
                let tuple: Vec<&Word> = idx.iter().map(|&i| &words[i]).collect();
                let owned: Vec<Word> = tuple.iter().map(|w| (*w).clone()).collect();
                assert_eq!(
                    m.accepts(&owned),
                    brute_force_accepts(&f, &tuple),
                    "shape {shape:?} round {round} tuple {owned:?}"
                );
                let Some(k) = (0..idx.len()).rev().find(|&k| idx[k] + 1 < words.len()) else {
                    break;
                };
                idx[k] += 1;
                idx[k + 1..].iter_mut().for_each(|i| *i = 0);
            }
        }
    }
}

fn pinned(x: &str, y: &str, extra: &str) -> String {
    format!(
        "alphabet \"ab\"\nstr x y\nregc (in x /{}/)\nregc (in y /{}/)\n{extra}",
        regex_escape(x),
        regex_escape(y)
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn disequality_is_sound(x in "[ab]{0,4}", y in "[ab]{0,4}") {
        let p = parse_problem(&pinned(&x, &y, "x != y")).unwrap();
        let v = solve(&p, &SolverConfig::default()).unwrap();
        prop_assert_eq!(v.is_sat(), x != y);
    }

    #[test]
    fn length_and_count_terms(x in "[ab]{0,5}", n in 0i64..7) {
        let src = pinned(&x, "", &format!("intc (<= len(x) {n})\nintc (>= count(x, 'a') {n})"));
        let p = parse_problem(&src).unwrap();
        let v = solve(&p, &SolverConfig::default()).unwrap();
        let a = x.chars().filter(|&c| c == 'a').count() as i64;
        prop_assert_eq!(v.is_sat(), x.len() as i64 <= n && a >= n);
    }
}
