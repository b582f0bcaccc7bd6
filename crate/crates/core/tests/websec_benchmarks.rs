use std::time::Instant;

use slstr_core::solver::{solve_with_stats, SolverConfig, Verdict};
use slstr_core::websec::{load_benchmark, Expected, BENCHMARKS};

#[test]
fn benchmarks_match_expected_verdicts() {
    for case in BENCHMARKS {
        let (p, expected) = load_benchmark(case.name).unwrap();
        let t = Instant::now();
        let (v, stats) = solve_with_stats(&p, &SolverConfig::default()).unwrap();
        eprintln!(
            "{} {:?} {:?} {:?}",
            case.name,
            matches!(v, Verdict::Sat(_)),
            t.elapsed(),
            stats.lines()
        );
        match expected {
            Expected::Sat => assert!(v.is_sat(), "{}", case.name),
            Expected::Unsat => assert_eq!(v, Verdict::Unsat, "{}", case.name),
        }
    }
}
