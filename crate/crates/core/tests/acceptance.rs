//! Acceptance suite. Prints one pass/fail line per criterion and exits with a
//! failure status if any criterion fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slstr_core::automata::{
    regex_parse, words_up_to, Alphabet, Nfa, StateId, Sym, Transducer, Word,
};
use slstr_core::constraints::{evaluate, parse_problem, Item, Problem, RelAtom};
use slstr_core::oracle::{brute_force_solve, gen_random_problem, GenParams, OracleConfig};
use slstr_core::solver::{max_model_bound, solve, SolverConfig, Verdict};
use slstr_core::straightline::{check_straightline, dimension, SlRejection};
use slstr_core::websec::{
    escape_string, html_escape, inner_html_decode, load_benchmark, websec_alphabet, Expected,
    BENCHMARKS,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || {
        format!("{what} took {took:.2?}, limit {limit:?}")
    })?;
    Ok(took)
}

fn square_is_not_ab() -> Outcome {
    let p =
        parse_problem("alphabet \"ab\"\nstr x y\nx = y . y\nregc (in y /a*|b*/)\nregc (in x /ab/)")
            .map_err(|e| e.to_string())?;
    let t = Instant::now();
    let v = solve(&p, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let took = within(t, Duration::from_secs(1), "solve")?;
    ensure(v == Verdict::Unsat, || format!("verdict {v:?}"))?;
    Ok(format!("unsat in {took:.2?}"))
}

/// Recomputes every defined variable from the source values of `model`.
fn replay(p: &Problem, model: &[Word]) -> Result<Vec<Word>, String> {
    let sl = check_straightline(p).map_err(|e| e.describe(p))?;
    let mut vals = model.to_vec();
    for &x in &sl.order {
        let Some(atom) = sl.def[x] else { continue };
        vals[x] = match &p.relational[atom] {
            RelAtom::Concat { rhs, .. } => rhs
                .iter()
                .flat_map(|it| match it {
                    Item::Var(v) => vals[*v].clone(),
                    Item::Lit(l) => l.clone(),
                })
                .collect(),
            RelAtom::Trans {
                transducer, arg, ..
            } => transducer
                .apply_unique(&vals[*arg])
                .ok_or_else(|| format!("{} has no unique image", p.str_vars[x]))?,
        };
    }
    Ok(vals)
}

fn mxss_benchmarks() -> Outcome {
    let mut report = Vec::new();
    for case in BENCHMARKS {
        let (p, expected) = load_benchmark(case.name).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let v = solve(&p, &SolverConfig::default()).map_err(|e| e.to_string())?;
        let took = within(t, Duration::from_secs(60), case.name)?;
        match (expected, &v) {
            (Expected::Unsat, Verdict::Unsat) => {}
            (Expected::Sat, Verdict::Sat(m)) => {
                let vals = replay(&p, &m.strs)?;
                ensure(vals == m.strs, || {
                    format!("{}: model differs from replay", case.name)
                })?;
                let out = p
                    .str_var(case.output_var)
                    .ok_or_else(|| format!("{}: no variable {}", case.name, case.output_var))?;
                let attack = regex_parse(case.pattern, &p.alphabet).map_err(|e| e.to_string())?;
                ensure(attack.accepts(&vals[out]), || {
                    format!(
                        "{}: output {:?} misses the attack pattern",
                        case.name,
                        p.alphabet.decode(&vals[out])
                    )
                })?;
            }
            _ => return Err(format!("{}: expected {expected:?}, got {v:?}", case.name)),
        }
        report.push(format!("{} {took:.2?}", case.name));
    }
    Ok(report.join(", "))
}

fn benchmark_dimensions() -> Outcome {
    let mut dims = Vec::new();
    for case in BENCHMARKS {
        let (p, _) = load_benchmark(case.name).map_err(|e| e.to_string())?;
        let d = dimension(&p, false).map_err(|e| e.describe(&p))?;
        ensure(d == 2, || format!("{} has dimension {d}", case.name))?;
        dims.push(format!("{}={d}", case.name));
    }
    Ok(dims.join(", "))
}

fn string_params(seed: u64) -> GenParams {
    GenParams {
        alphabet_size: 1 + (seed % 3) as usize,
        max_atoms: 5,
        max_states: 3,
        max_sources: 2,
        extended: false,
    }
}

fn differential_strings() -> Outcome {
    let t = Instant::now();
    let (mut accepted, mut seed, mut sat) = (0, 0u64, 0);
    while accepted < 500 {
        seed += 1;
        let p = gen_random_problem(seed, &string_params(seed));
        if max_model_bound(&p).map_err(|e| e.to_string())? > 12 {
            continue;
        }
        accepted += 1;
        let v = solve(&p, &SolverConfig::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        let o = brute_force_solve(
            &p,
            OracleConfig {
                max_len: 12,
                max_int: 0,
            },
        );
        ensure(v.is_sat() == o.is_sat(), || {
            format!("seed {seed}: solver {v:?}, oracle sat {}", o.is_sat())
        })?;
        if let Verdict::Sat(m) = &v {
            ensure(evaluate(&p, m), || {
                format!("seed {seed}: model fails evaluation")
            })?;
            sat += 1;
        }
    }
    let took = within(t, Duration::from_secs(600), "suite")?;
    Ok(format!(
        "{accepted} instances ({sat} sat, seeds 1..={seed}) agree in {took:.2?}"
    ))
}

fn differential_extended() -> Outcome {
    const BOUND: usize = 8;
    let t = Instant::now();
    let cfg = SolverConfig {
        int_bound: Some(BOUND as u64),
        ..SolverConfig::default()
    };
    let (mut sat, mut within_bounds) = (0, 0);
    for seed in 1..=300u64 {
        let params = GenParams {
            max_atoms: 3,
            extended: true,
            ..string_params(seed)
        };
        let p = gen_random_problem(seed, &params);
        let v = solve(&p, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        let o = brute_force_solve(
            &p,
            OracleConfig {
                max_len: BOUND,
                max_int: BOUND as i64,
            },
        );
        match &v {
            Verdict::Sat(m) => {
                ensure(evaluate(&p, m), || {
                    format!("seed {seed}: model fails evaluation")
                })?;
                let fits = m.strs.iter().all(|w| w.len() <= BOUND)
                    && m.ints.iter().all(|&i| (0..=BOUND as i64).contains(&i));
                ensure(!fits || o.is_sat(), || {
                    format!("seed {seed}: model within bounds but the oracle found none")
                })?;
                sat += 1;
            }
            Verdict::Unsat | Verdict::UnsatWithinBounds(_) => {
                within_bounds += matches!(v, Verdict::UnsatWithinBounds(_)) as usize;
                ensure(!o.is_sat(), || {
                    format!("seed {seed}: solver {v:?}, oracle sat")
                })?;
            }
        }
    }
    let took = within(t, Duration::from_secs(900), "suite")?;
    Ok(format!(
        "300 instances ({sat} sat, {within_bounds} unsat within bounds) agree in {took:.2?}"
    ))
}

fn straight_line_gate() -> Outcome {
    let cyc = parse_problem("alphabet \"ab\"\nstr x y\nx = y\ny = identity(x)")
        .map_err(|e| e.to_string())?;
    match check_straightline(&cyc) {
        Err(SlRejection::Cycle(c)) => {
            ensure(c.len() == 2, || format!("cycle witness {c:?}"))?;
        }
        other => return Err(format!("cycle not rejected: {other:?}")),
    }
    let ok = parse_problem("alphabet \"ab\"\nstr x y z zp\ny = identity(x)\nz = y . y . zp")
        .map_err(|e| e.to_string())?;
    let sl = check_straightline(&ok).map_err(|e| e.describe(&ok))?;
    let pos = |name: &str| {
        let v = ok.str_var(name).expect("declared");
        sl.order.iter().position(|&w| w == v).expect("ordered")
    };
    ensure(
        pos("x") < pos("y") && pos("y") < pos("z") && pos("zp") < pos("z"),
        || format!("order {:?}", sl.order),
    )?;

    const N: usize = 100_000;
    let mut chain = Problem::new(Alphabet::from_str_chars("ab").map_err(|e| e.to_string())?);
    let mut prev = chain.add_str_var("v0");
    for i in 1..=N {
        let next = chain.add_str_var(&format!("v{i}"));
        chain.relational.push(RelAtom::Concat {
            lhs: next,
            rhs: vec![Item::Var(prev), Item::Lit(vec![Sym(0)])],
        });
        prev = next;
    }
    let t = Instant::now();
    let sl = check_straightline(&chain).map_err(|e| e.describe(&chain))?;
    let took = within(t, Duration::from_secs(1), "chain check")?;
    ensure(sl.order.len() == N + 1, || {
        format!("order has {} entries", sl.order.len())
    })?;
    Ok(format!(
        "cycle rejected, order valid, {N}-atom chain in {took:.2?}"
    ))
}

fn random_nfa(rng: &mut ChaCha8Rng, al: &Alphabet) -> Nfa {
    let n = rng.gen_range(1..=4);
    let mut a = Nfa::with_states(al, n, 0).expect("initial exists");
    for q in 0..n {
        a.set_final(q, rng.gen_bool(0.4)).expect("state exists");
        for r in 0..n {
            for s in al.syms() {
                if rng.gen_bool(0.3) {
                    a.add_transition(q, Some(s), r).expect("valid move");
                }
            }
            if rng.gen_bool(0.1) {
                a.add_transition(q, None, r).expect("valid move");
            }
        }
    }
    a
}

/// Random transducer; `reads` forces every move to consume an input letter
/// and `writes` forces every move to produce an output letter.
fn random_transducer(rng: &mut ChaCha8Rng, al: &Alphabet, reads: bool, writes: bool) -> Transducer {
    let n = rng.gen_range(1..=3);
    let mut t = Transducer::with_states(al, n, 0).expect("initial exists");
    let letter = |rng: &mut ChaCha8Rng, forced: bool| -> Option<Sym> {
        (forced || rng.gen_bool(0.7)).then(|| Sym(rng.gen_range(0..al.len()) as u16))
    };
    for q in 0..n {
        t.set_final(q, rng.gen_bool(0.5)).expect("state exists");
        for _ in 0..rng.gen_range(1..=4) {
            let r = rng.gen_range(0..n);
            let (i, o) = (letter(rng, reads), letter(rng, writes));
            if i.is_some() || o.is_some() {
                t.add_transition(q, i, o, r).expect("valid move");
            }
        }
    }
    t
}

fn states(n: usize) -> std::ops::Range<StateId> {
    0..n
}

fn automata_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checks = 0usize;
    for k in 1..=3 {
        let al = Alphabet::from_str_chars(&"abc"[..k]).map_err(|e| e.to_string())?;
        let words6: Vec<Word> = words_up_to(&al, 6).collect();
        let words5: Vec<Word> = words_up_to(&al, 5).collect();
        let words4: Vec<Word> = words_up_to(&al, 4).collect();
        for round in 0..12 {
            let (a, b) = (random_nfa(&mut rng, &al), random_nfa(&mut rng, &al));
            let inter = a.intersect(&b).map_err(|e| e.to_string())?;
            let uni = a.union(&b).map_err(|e| e.to_string())?;
            let comp = a.complement();
            for w in &words6 {
                let (x, y) = (a.accepts(w), b.accepts(w));
                ensure(inter.accepts(w) == (x && y), || {
                    format!("intersection, k={k} round {round}")
                })?;
                ensure(uni.accepts(w) == (x || y), || {
                    format!("union, k={k} round {round}")
                })?;
                ensure(comp.accepts(w) == !x, || {
                    format!("complement, k={k} round {round}")
                })?;
                checks += 3;
            }

            let slices: Vec<Vec<Nfa>> = states(a.num_states())
                .map(|q| {
                    states(a.num_states())
                        .map(|r| a.slice(q, r).expect("states exist"))
                        .collect()
                })
                .collect();
            let finals: Vec<StateId> = a.finals().collect();
            for w in &words5 {
                for cut in 0..=w.len() {
                    let (u, v) = w.split_at(cut);
                    let split = states(a.num_states()).any(|q| {
                        slices[a.initial()][q].accepts(u)
                            && finals.iter().any(|&f| slices[q][f].accepts(v))
                    });
                    ensure(split == a.accepts(w), || {
                        format!("nfa slicing, k={k} round {round}")
                    })?;
                    checks += 1;
                }
            }

            // Images against a pair-membership oracle. Letter-consuming moves
            // bound the other side's length, so the oracle is exact.
            let r = random_transducer(&mut rng, &al, true, false);
            let pre = r.pre_image(&b).map_err(|e| e.to_string())?;
            for x in &words4 {
                let expect = words4
                    .iter()
                    .filter(|y| y.len() <= x.len())
                    .any(|y| b.accepts(y) && r.accepts(x, y));
                ensure(pre.accepts(x) == expect, || {
                    format!("pre-image, k={k} round {round}")
                })?;
                checks += 1;
            }
            let r = random_transducer(&mut rng, &al, false, true);
            let post = r.post_image(&b).map_err(|e| e.to_string())?;
            for y in &words4 {
                let expect = words4
                    .iter()
                    .filter(|x| x.len() <= y.len())
                    .any(|x| b.accepts(x) && r.accepts(x, y));
                ensure(post.accepts(y) == expect, || {
                    format!("post-image, k={k} round {round}")
                })?;
                checks += 1;
            }

            let r = random_transducer(&mut rng, &al, false, false);
            let norm = r.normalize();
            let n = r.num_states();
            let tslices: Vec<Vec<Transducer>> = states(n)
                .map(|q| {
                    states(n)
                        .map(|s| r.slice(q, s).expect("states exist"))
                        .collect()
                })
                .collect();
            let rfinals: Vec<StateId> = r.finals().collect();
            for x in &words4 {
                for y in &words4 {
                    let member = r.accepts(x, y);
                    ensure(norm.accepts(x, y) == member, || {
                        format!("normalization, k={k} round {round}")
                    })?;
                    for cut in 0..=x.len() {
                        let (x1, x2) = x.split_at(cut);
                        let split = (0..=y.len()).any(|j| {
                            let (y1, y2) = y.split_at(j);
                            states(n).any(|q| {
                                tslices[r.initial()][q].accepts(x1, y1)
                                    && rfinals.iter().any(|&f| tslices[q][f].accepts(x2, y2))
                            })
                        });
                        ensure(split == member, || {
                            format!("transducer slicing, k={k} round {round}")
                        })?;
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checks} exhaustive checks"))
}

fn sanitizer_fixtures() -> Outcome {
    let al = websec_alphabet();
    let cases: [(&str, Transducer, &str, &str); 3] = [
        (
            "htmlEscape",
            html_escape(&al).map_err(|e| e.to_string())?,
            "Flora & Fauna",
            "Flora &amp; Fauna",
        ),
        (
            "escapeString",
            escape_string(&al).map_err(|e| e.to_string())?,
            "&#39;);alert(1);//",
            "&#39;);alert(1);//",
        ),
        (
            "innerHTMLDecode",
            inner_html_decode(&al).map_err(|e| e.to_string())?,
            "&#39;);alert(1);//",
            "');alert(1);//",
        ),
    ];
    let mut seen = HashSet::new();
    for (name, t, input, expected) in &cases {
        let got = t.apply_str(input);
        ensure(got.as_deref() == Some(*expected), || {
            format!("{name}({input:?}) = {got:?}")
        })?;
        seen.insert(*name);
    }
    Ok(format!("{} fixtures byte-exact", seen.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("square of a uniform word is not ab", square_is_not_ab),
        ("mXSS benchmarks", mxss_benchmarks),
        ("benchmark dimensions", benchmark_dimensions),
        ("string-only differential suite", differential_strings),
        ("extended differential suite", differential_extended),
        ("straight-line gate", straight_line_gate),
        ("automata invariants", automata_invariants),
        ("sanitizer fixtures", sanitizer_fixtures),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
