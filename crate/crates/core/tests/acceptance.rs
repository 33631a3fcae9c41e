//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use eqnpe::bench::{self, BenchSpec, Workload};
use eqnpe::embed::embeds_modulo;
use eqnpe::generalize::bmt_report;
use eqnpe::pe::{resultant_theory, specialize, PeConfig};
use eqnpe::rewrite::compile;
use eqnpe::subst::eq_modulo_renaming;
use eqnpe::syntax::{parse_module, show};
use eqnpe::{Error, Signature, Term};

use common::*;

type Outcome = Result<String, String>;

fn within(t0: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = t0.elapsed();
    if e > limit {
        Err(format!("{what} took {e:.2?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn golden(case: Case, expected: &[&str], limit: Duration) -> Outcome {
    let t0 = Instant::now();
    let r = run(case);
    let ren = r.out.renamed.as_ref().ok_or("no renamed program")?;
    same_equations(&ren.theory, expected)?;
    if !all_closed(&r) {
        return Err("a resultant is not closed".into());
    }
    within(t0, limit, case.0)?;
    Ok(format!("{} equations, {} calls, {:.2?}", ren.theory.equations.len(), r.out.state.calls.len(), t0.elapsed()))
}

fn c1() -> Outcome {
    golden(
        PARSER,
        &[
            "finit(eps) = feps",
            "finit(1) = feps",
            "finit(0 L:String) = finit(L:String)",
            "finit(1 1 L:String) = fS(L:String)",
            "fS(eps) = feps",
            "fS(1 L:String) = fS(L:String)",
        ],
        Duration::from_secs(10),
    )
}

fn c2() -> Outcome {
    golden(
        FLIP_TREE,
        &["dflip(N:Nat) = N:Nat", "dflip(L:NatTree {N:Nat} R:NatTree) = dflip(L:NatTree) {N:Nat} dflip(R:NatTree)"],
        Duration::from_secs(5),
    )
}

fn c3() -> Outcome {
    let t0 = Instant::now();
    let r = run(FLIP_FIX);
    let th = &*r.ct.theory;
    let plain = resultant_theory("RESULTANTS", &r.out.resultants, th).map_err(|e| e.to_string())?;
    let v = "{R1:Ref I:Id R2:Ref}";
    same_equations(
        &plain,
        &[
            "flip(fix(2, e, flip(mt))) = mt",
            &format!("flip(fix(2, e, flip({v} ; BG:BinGraph))) = {v} ; flip(flip(BG:BinGraph))"),
            "flip(flip(mt)) = mt",
            &format!("flip(flip({v} ; BG:BinGraph)) = {v} ; flip(flip(BG:BinGraph))"),
        ],
    )
    .map_err(|e| format!("resultants: {e}"))?;
    let out = golden(
        FLIP_FIX,
        &[
            "dflip-fix(mt) = mt",
            &format!("dflip-fix({v} ; BG:BinGraph) = {v} ; dflip(BG:BinGraph)"),
            "dflip(mt) = mt",
            &format!("dflip({v} ; BG:BinGraph) = {v} ; dflip(BG:BinGraph)"),
        ],
        Duration::from_secs(30),
    )?;
    within(t0, Duration::from_secs(30), "flip-fix")?;
    Ok(out)
}

fn same_set(sig: &Signature, got: &[Term], want: &[Term]) -> bool {
    got.len() == want.len()
        && want.iter().all(|w| got.iter().any(|g| eq_modulo_renaming(sig, g, w).is_some()))
        && got.iter().all(|g| want.iter().any(|w| eq_modulo_renaming(sig, g, w).is_some()))
}

fn c4() -> Outcome {
    let m = parse_module(
        "fmod BMT is sort S . op 1 : -> S . op g : S -> S . op _+_ : S S -> S [assoc comm] . vars X Y Z W : S . endfm",
    )
    .map_err(|e| e.to_string())?;
    let p = |s: &str| m.parse_term(s).unwrap();
    let ps = |xs: &[&str]| xs.iter().map(|x| p(x)).collect::<Vec<_>>();
    let us = ps(&["1 + g(X)", "X + g(1)", "X + Y"]);
    let r = bmt_report(&us, &p("g(1) + 1 + g(Y)"), &m.theory).map_err(|e| e.to_string())?;
    let sig = m.sig();
    let shown = |ts: &[Term]| ts.iter().map(|t| show(sig, t)).collect::<Vec<_>>().join(", ");
    let checks = [
        ("W1", &r.w[0], ps(&["Z + 1", "Z + g(W)"])),
        ("W2", &r.w[1], ps(&["Z + g(1)"])),
        ("W3", &r.w[2], ps(&["Z + W"])),
        ("M", &r.m, ps(&["Z + 1", "Z + g(1)"])),
        ("BMT", &r.selected, ps(&["1 + g(X)", "X + g(1)"])),
    ];
    for (name, got, want) in &checks {
        if !same_set(sig, got, want) {
            return Err(format!("{name} = {{{}}}, expected {{{}}}", shown(got), shown(want)));
        }
    }
    Ok(format!("BMT = {{{}}}", shown(&r.selected)))
}

fn c5() -> Outcome {
    let m = module("flipfix-mutated");
    let th = &m.theory;
    let p = |s: &str| m.parse_term(s).unwrap();
    let fires = embeds_modulo(&p("flip(fix(2, e, flip(BG)))"), &p("flip(fix(2, e, flip(B2:BinGraph ; {R2 I R1})))"), th);
    let quiet = !embeds_modulo(&p("flip(flip(BG))"), &p("flip(N:Node)"), th);
    match (fires, quiet) {
        (true, true) => Ok("fires on the flip-fix pair, silent on flip(flip(BG)) vs flip(N)".into()),
        _ => Err(format!("fires={fires}, silent={quiet}")),
    }
}

fn c6() -> Outcome {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let cases = [
        (PARSER, "init | $ | G", "finit($)", true),
        (FLIP_TREE, "flip(flip($))", "dflip($)", false),
        (FLIP_FIX, "flip(fix(2, e, flip($)))", "dflip-fix($)", false),
    ];
    let mut ok = true;
    for (case, ot, st, needs_gamma) in cases {
        let lets: &[(&str, &str)] = if needs_gamma { &[("G", GAMMA)] } else { &[] };
        let r = run(case);
        let ren = r.out.renamed.as_ref().unwrap();
        let sct = compile(ren.theory.clone()).unwrap();
        let lets: Vec<(String, Term)> = lets.iter().map(|(n, t)| (n.to_string(), r.module.parse_term(t).unwrap())).collect();
        let spec = BenchSpec {
            original: &r.ct,
            specialized: &sct,
            original_template: ot,
            specialized_template: st,
            workload: Workload::detect(r.module.sig()).unwrap(),
            size: 100_000,
            seed: 1,
            runs: bench::DEFAULT_RUNS,
            lets: &lets,
        };
        let (rep, na, nb) = bench::run(&spec).map_err(|e| e.to_string())?;
        let agree = ren.back(&r.ct.theory, &nb).map_err(|e| e.to_string())? == na;
        let pass = agree
            && if case.0 == "parser" {
                rep.speedup() >= 2.0 && rep.original.match_attempts >= 2 * rep.specialized.match_attempts
            } else {
                rep.improvement > 0.0
            };
        ok &= pass;
        lines.push(format!(
            "{} {:.1}ms->{:.1}ms ({:.1}%, {:.2}x, matches {}->{}{})",
            case.0,
            rep.original.ms,
            rep.specialized.ms,
            rep.improvement,
            rep.speedup(),
            rep.original.match_attempts,
            rep.specialized.match_attempts,
            if agree { "" } else { ", results differ" }
        ));
    }
    within(t0, Duration::from_secs(300), "bench")?;
    let msg = format!("{}; total {:.1?}", lines.join("; "), t0.elapsed());
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7() -> Outcome {
    let mut lines = Vec::new();
    let mut bad = Vec::new();
    for (i, case) in [PARSER, FLIP_TREE, FLIP_FIX].into_iter().enumerate() {
        let r = run(case);
        let s = semantics(&r, 200, 100 + i as u64);
        lines.push(format!("{} {}/{} identical, {} via stuck calls", case.0, s.strict, s.checked, s.stuck_equal));
        bad.extend(s.failures);
    }
    if bad.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(format!("{} failures, first: {}", bad.len(), bad[0]))
    }
}

fn c8() -> Outcome {
    let rep = oracle::run_all(3000, 1000);
    if !rep.failures.is_empty() {
        return Err(format!("{} failures, first: {}", rep.failures.len(), rep.failures[0]));
    }
    if rep.secs > 120.0 {
        return Err(format!("took {:.1}s", rep.secs));
    }
    Ok(format!(
        "{} matching and {} unification problems, {} brute-force solutions covered, {:.1}s",
        rep.match_problems, rep.unify_problems, rep.brute_solutions, rep.secs
    ))
}

fn c9() -> Outcome {
    let mut n = 0;
    for case in [PARSER, FLIP_TREE, FLIP_FIX, GRAPH] {
        let r = run(case);
        if !all_closed(&r) {
            return Err(format!("{}: open resultant", case.0));
        }
        n += r.out.resultants.len();
    }
    Ok(format!("{n} resultant right-hand sides closed"))
}

const GRAPH: Case = ("graph", "flip(flip(BG))", &[]);

fn c10() -> Outcome {
    let mut lines = Vec::new();
    for case in [PARSER, FLIP_TREE, FLIP_FIX, GRAPH] {
        let r = run(case);
        let st = &r.out.state;
        let deepest = st.trees.iter().flat_map(|t| t.nodes.iter().map(|n| n.depth)).max().unwrap_or(0);
        if st.iterations > 50 || st.trees.iter().any(|t| t.depth_exceeded) {
            return Err(format!("{}: {} iterations, depth {deepest}", case.0, st.iterations));
        }
        lines.push(format!("{} {} it/depth {deepest}", case.0, st.iterations));
    }
    let t0 = Instant::now();
    let m = parse_module(&bench::cyclic_counter_module(1300)).map_err(|e| e.to_string())?;
    let ct = compile(m.theory.clone()).map_err(|e| e.to_string())?;
    let q = m.parse_term("f(c0, Y)").unwrap();
    let res = specialize(&ct, &[q], &PeConfig::default(), true, &[]);
    within(t0, Duration::from_secs(60), "non-FVP run")?;
    match res {
        Err(Error::NonConvergence(n)) => Ok(format!("{}; cyclic counter: NonConvergence({n}) in {:.2?}", lines.join(", "), t0.elapsed())),
        Err(e) => Err(format!("cyclic counter: unexpected error {e}")),
        Ok(_) => Err("cyclic counter converged".into()),
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("parser golden program", c1),
        ("flip-tree deforestation", c2),
        ("mutated flip-fix program", c3),
        ("best matching terms", c4),
        ("embedding whistle", c5),
        ("benchmark direction", c6),
        ("semantic preservation", c7),
        ("solver oracle", c8),
        ("closed resultants", c9),
        ("termination guard", c10),
    ];
    let results = bench::with_big_stack(move || {
        criteria
            .iter()
            .enumerate()
            .map(|(i, (name, f))| {
                let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
                    let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
                    Err(format!("panicked: {}", msg.unwrap_or_default()))
                });
                let line = match &r {
                    Ok(d) => format!("criterion {:>2} PASS {name}: {d}", i + 1),
                    Err(d) => format!("criterion {:>2} FAIL {name}: {d}", i + 1),
                };
                println!("{line}");
                r.is_ok()
            })
            .collect::<Vec<_>>()
    });
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
