mod common;

use common::oracle::run_all;

#[test]
fn matching_and_unification_agree_with_brute_force() {
    let rep = run_all(3000, 1000);
    eprintln!("{} match, {} unify problems, {} brute solutions, {:.1}s", rep.match_problems, rep.unify_problems, rep.brute_solutions, rep.secs);
    assert!(rep.failures.is_empty(), "{} failures, first: {:#?}", rep.failures.len(), &rep.failures[..rep.failures.len().min(5)]);
    assert!(rep.brute_solutions > 0);
}
