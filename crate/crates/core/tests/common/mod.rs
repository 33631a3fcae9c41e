#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use eqnpe::pe::{closed_modulo, specialize, Outcome, PeConfig};
use eqnpe::rewrite::{compile, normalize, CompiledTheory};
use eqnpe::signature::{Signature, SortId, Theory};
use eqnpe::subst::renaming_seq;
use eqnpe::syntax::{parse_module, show, Module, TermParser};
use eqnpe::{Subst, Term};

pub const GAMMA: &str = "init -> eps ; init -> 0 . init ; init -> 1 . S ; S -> eps ; S -> 1 . S";

pub fn module_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("modules").join(format!("{name}.fmod"))
}

pub fn module(name: &str) -> Module {
    let src = std::fs::read_to_string(module_path(name)).unwrap();
    parse_module(&src).unwrap()
}

pub fn compiled(m: &Module) -> CompiledTheory {
    compile(m.theory.clone()).unwrap()
}

pub fn term(m: &Module, text: &str) -> Term {
    let mut tp = m.term_parser();
    if let Ok(g) = TermParser::new(m.sig()).parse(GAMMA) {
        tp.lets.insert("G".into(), g);
    }
    tp.parse(text).unwrap()
}

/// Module, call, and operator names for a bundled run.
pub type Case = (&'static str, &'static str, &'static [(&'static str, &'static str)]);

/// The three bundled golden runs.
pub const PARSER: Case = ("parser", "init | L | G", &[]);
pub const FLIP_TREE: Case = ("flip-tree", "flip(flip(T:NatTree))", &[("flip(flip(T:NatTree))", "dflip")]);
pub const FLIP_FIX: Case = (
    "flipfix-mutated",
    "flip(fix(2, e, flip(BG)))",
    &[("flip(fix(2, e, flip(BG)))", "dflip-fix"), ("flip(flip(BG))", "dflip")],
);

pub struct Run {
    pub module: Module,
    pub ct: CompiledTheory,
    pub out: Outcome,
}

pub fn run(case: Case) -> Run {
    let (name, call, names) = case;
    let module = module(name);
    let ct = compiled(&module);
    let q = term(&module, call);
    let names: Vec<(Term, String)> = names.iter().map(|(c, n)| (term(&module, c), n.to_string())).collect();
    let out = specialize(&ct, &[q], &PeConfig::default(), true, &names).unwrap();
    Run { module, ct, out }
}

/// Equations of `th` equal, as a set and up to variable renaming, to `expected`
/// (`lhs = rhs` texts over `th`'s signature with inline-sorted variables).
pub fn same_equations(th: &Theory, expected: &[&str]) -> Result<(), String> {
    let sig = &*th.sig;
    let tp = TermParser::new(sig);
    let mut want = Vec::new();
    for e in expected {
        let (l, r) = e.split_once(" = ").ok_or_else(|| format!("bad equation text {e}"))?;
        let pair = (|| Ok::<_, eqnpe::Error>([tp.parse(l)?, tp.parse(r)?]))().map_err(|err| format!("{e}: {err}"))?;
        want.push(pair);
    }
    let got: Vec<[Term; 2]> = th.equations.iter().map(|e| [e.lhs.clone(), e.rhs.clone()]).collect();
    let shown = |p: &[Term; 2]| format!("{} = {}", show(sig, &p[0]), show(sig, &p[1]));
    for w in &want {
        if !got.iter().any(|g| renaming_seq(sig, g, w).is_some()) {
            return Err(format!("missing `{}`; got {:?}", shown(w), got.iter().map(shown).collect::<Vec<_>>()));
        }
    }
    for g in &got {
        if !want.iter().any(|w| renaming_seq(sig, w, g).is_some()) {
            return Err(format!("unexpected `{}`", shown(g)));
        }
    }
    Ok(())
}

/// Every resultant right-hand side is closed with respect to the final calls.
pub fn all_closed(r: &Run) -> bool {
    r.out.resultants.iter().all(|x| closed_modulo(&r.out.state.calls, &x.rhs, &r.ct.theory))
}

/// Random ground constructor term whose least sort is below `sort`.
pub fn random_ground(th: &Theory, sort: SortId, depth: usize, rng: &mut StdRng) -> Term {
    let sig = &*th.sig;
    for _ in 0..1000 {
        if let Some(t) = try_ground(th, sig, sort, depth, rng) {
            if t.sort().is_some_and(|s| sig.sort_leq(s, sort)) {
                return t;
            }
        }
    }
    panic!("no ground term of sort {}", sig.sorts.name(sort));
}

fn try_ground(th: &Theory, sig: &Signature, sort: SortId, depth: usize, rng: &mut StdRng) -> Option<Term> {
    let mut cands = Vec::new();
    for (f, s) in sig.symbols() {
        if th.is_defined(f) || s.fresh {
            continue;
        }
        for d in &s.decls {
            if sig.sort_leq(d.result, sort) && (depth > 0 || d.args.is_empty()) {
                cands.push((f, d.args.clone()));
            }
        }
    }
    let (f, args) = cands.choose(rng)?.clone();
    let mut xs = Vec::new();
    for a in args {
        let d = if depth == 0 { 0 } else { rng.gen_range(0..depth) };
        xs.push(try_ground(th, sig, a, d, rng)?);
    }
    Some(sig.app(f, xs))
}

#[derive(Debug, Default)]
pub struct Semantics {
    pub checked: usize,
    /// Back-translated specialized normal form identical to the original one.
    pub strict: usize,
    /// Specialized run stuck at a renamed call whose back-translation the
    /// original program rewrites further to the same normal form.
    pub stuck_equal: usize,
    pub failures: Vec<String>,
}

/// `per_call` random ground instances of every specialized call.
pub fn semantics(r: &Run, per_call: usize, seed: u64) -> Semantics {
    let th = &*r.ct.theory;
    let sig = &*th.sig;
    let ren = r.out.renamed.as_ref().expect("renamed run");
    let sct = compile(ren.theory.clone()).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rep = Semantics::default();
    for q in &r.out.state.calls {
        for _ in 0..per_call {
            let depth = rng.gen_range(0..=6);
            let s = Subst::from_pairs(q.vars().into_iter().map(|v| {
                let t = random_ground(th, v.sort, depth, &mut rng);
                (v, t)
            }));
            let g = s.apply(sig, q);
            let want = normalize(&g, &r.ct).unwrap();
            let got = normalize(&ren.forward(th, &g).unwrap(), &sct).unwrap();
            let back = ren.back(th, &got).unwrap();
            rep.checked += 1;
            if back == want {
                rep.strict += 1;
            } else if contains_fresh(&ren.theory.sig, &got) && normalize(&back, &r.ct).unwrap() == want {
                rep.stuck_equal += 1;
            } else {
                rep.failures.push(format!("{}: original {} vs specialized {}", show(sig, &g), show(sig, &want), show(sig, &back)));
            }
        }
    }
    rep
}

fn contains_fresh(sig: &Signature, t: &Term) -> bool {
    t.sym().is_some_and(|f| sig.sym(f).fresh) || t.args().iter().any(|a| contains_fresh(sig, a))
}
