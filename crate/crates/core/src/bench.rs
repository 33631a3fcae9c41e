//! Input generators and the original-versus-specialized timing harness.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rewrite::{normalize_stats, CompiledTheory};
use crate::signature::Signature;
use crate::syntax::{numeral, TermParser};
use crate::term::Term;

/// Template placeholder for the generated input.
pub const HOLE: &str = "$";
const HOLE_NAME: &str = "BENCH-INPUT";

pub const DEFAULT_RUNS: usize = 10;

/// Threads that normalize 100k-element inputs get this much stack.
pub const BIG_STACK: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Workload {
    /// `0^k 1^(n-k)` over `__`, with `k` drawn from the seed.
    ParserString,
    /// Right-leaning `_{_}_` chain of `n` inner nodes with numeral leaves.
    TreeChain,
    /// `_;_` set of `n` nodes `{prev id next}`, ids taken mod 5.
    GraphChain,
}

impl Workload {
    pub fn parse(s: &str) -> Option<Workload> {
        match s {
            "parser" | "string" => Some(Workload::ParserString),
            "tree" => Some(Workload::TreeChain),
            "graph" => Some(Workload::GraphChain),
            _ => None,
        }
    }

    /// Guess from the operators a signature declares.
    pub fn detect(sig: &Signature) -> Option<Workload> {
        if sig.lookup("{___}", 3).is_some() && sig.lookup("_;_", 2).is_some() {
            Some(Workload::GraphChain)
        } else if sig.lookup("_{_}_", 3).is_some() {
            Some(Workload::TreeChain)
        } else if sig.lookup("__", 2).is_some() && sig.lookup("eps", 0).is_some() {
            Some(Workload::ParserString)
        } else {
            None
        }
    }
}

/// Builds an input of `size` elements over the constructors of `sig`.
pub fn generate(kind: Workload, sig: &Signature, size: usize, seed: u64) -> Result<Term> {
    let mut rng = StdRng::seed_from_u64(seed);
    match kind {
        Workload::ParserString => {
            let zeros = if size == 0 { 0 } else { rng.gen_range(0..=size) };
            let mut t = sig.mk("eps", vec![])?;
            for i in (0..size).rev() {
                let c = sig.mk(if i < zeros { "0" } else { "1" }, vec![])?;
                t = sig.mk("__", vec![c, t])?;
            }
            Ok(t)
        }
        Workload::TreeChain => {
            let leaf = |k: u64| numeral(sig, k);
            let mut t = leaf(rng.gen_range(0..5));
            for i in (0..size).rev() {
                t = sig.mk("_{_}_", vec![leaf(rng.gen_range(0..5)), leaf(i as u64 % 5), t])?;
            }
            Ok(t)
        }
        Workload::GraphChain => {
            let id = |k: usize| sig.mk(&(k % 5).to_string(), vec![]);
            let hash = sig.mk("#", vec![])?;
            let mut nodes = Vec::with_capacity(size);
            for i in 0..size {
                let prev = if i == 0 { hash.clone() } else { id(i - 1)? };
                let next = if i + 1 == size { hash.clone() } else { id(i + 1)? };
                nodes.push(sig.mk("{___}", vec![prev, id(i)?, next])?);
            }
            match nodes.len() {
                0 => sig.mk("mt", vec![]),
                1 => Ok(nodes.pop().unwrap()),
                _ => {
                    let f = sig.lookup("_;_", 2).ok_or_else(|| Error::UnknownOp("_;_".into()))?;
                    Ok(sig.app(f, nodes))
                }
            }
        }
    }
}

/// Parses `template` with its single `$` bound to `input`.
pub fn instantiate(sig: &Signature, template: &str, input: &Term, lets: &[(String, Term)]) -> Result<Term> {
    if template.matches(HOLE).count() != 1 {
        return Err(Error::BadCall(format!("template `{template}` must contain exactly one `{HOLE}`")));
    }
    let mut tp = TermParser::new(sig);
    for (n, t) in lets {
        tp.lets.insert(n.clone(), sig.import(t)?);
    }
    tp.lets.insert(HOLE_NAME.to_string(), sig.import(input)?);
    tp.parse(&template.replace(HOLE, &format!(" {HOLE_NAME} ")))
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Measure {
    /// Mean wall time per run.
    pub ms: f64,
    pub steps: u64,
    pub match_attempts: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub size: usize,
    pub runs: usize,
    pub original: Measure,
    pub specialized: Measure,
    /// `100 * (orig - spec) / orig` over mean times; 0 when `orig` is 0.
    pub improvement: f64,
}

impl BenchReport {
    pub fn speedup(&self) -> f64 {
        if self.specialized.ms == 0.0 {
            f64::INFINITY
        } else {
            self.original.ms / self.specialized.ms
        }
    }
}

pub fn improvement(orig: f64, spec: f64) -> f64 {
    if orig == 0.0 {
        0.0
    } else {
        100.0 * (orig - spec) / orig
    }
}

/// Mean over `runs` normalizations; counters come from the first run.
pub fn measure(ct: &CompiledTheory, t: &Term, runs: usize) -> Result<(Measure, Term)> {
    let runs = runs.max(1);
    let mut total = 0.0;
    let mut first = None;
    for _ in 0..runs {
        let t0 = Instant::now();
        let (nf, stats) = normalize_stats(t, ct)?;
        total += t0.elapsed().as_secs_f64() * 1000.0;
        if first.is_none() {
            first = Some((stats, nf));
        } else {
            drop(nf);
        }
    }
    let (stats, nf) = first.unwrap();
    Ok((Measure { ms: total / runs as f64, steps: stats.steps, match_attempts: stats.match_attempts }, nf))
}

/// One benchmark: both programs normalize the template filled with the same input.
pub struct BenchSpec<'a> {
    pub original: &'a CompiledTheory,
    pub specialized: &'a CompiledTheory,
    pub original_template: &'a str,
    pub specialized_template: &'a str,
    pub workload: Workload,
    pub size: usize,
    pub seed: u64,
    pub runs: usize,
    pub lets: &'a [(String, Term)],
}

/// Runs the benchmark; also returns both normal forms.
pub fn run(spec: &BenchSpec<'_>) -> Result<(BenchReport, Term, Term)> {
    let input = generate(spec.workload, spec.original.sig(), spec.size, spec.seed)?;
    let a = instantiate(spec.original.sig(), spec.original_template, &input, spec.lets)?;
    let b = instantiate(spec.specialized.sig(), spec.specialized_template, &input, spec.lets)?;
    let (mo, na) = measure(spec.original, &a, spec.runs)?;
    let (ms, nb) = measure(spec.specialized, &b, spec.runs)?;
    let report = BenchReport { size: spec.size, runs: spec.runs, original: mo, specialized: ms, improvement: improvement(mo.ms, ms.ms) };
    Ok((report, na, nb))
}

/// Runs `f` on a thread with [`BIG_STACK`] bytes of stack.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new().stack_size(BIG_STACK).spawn(f).expect("spawn bench thread").join().expect("bench thread panicked")
}

/// Theory without finite variants: `f(c_i, s Y) = f(c_{i+1}, Y)` around a
/// cycle of `n` constants, plus `f(c_i, 0) = 0`.
pub fn cyclic_counter_module(n: usize) -> String {
    let mut s = String::from("fmod CYCLIC-COUNTER is\n  protecting NAT .\n  sort Tag .\n");
    let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    for c in &names {
        s.push_str(&format!("  op {c} : -> Tag .\n"));
    }
    s.push_str("  op f : Tag Nat -> Nat .\n  var Y : Nat .\n");
    for i in 0..n {
        let next = &names[(i + 1) % n];
        s.push_str(&format!("  eq f({}, s Y) = f({next}, Y) [variant] .\n", names[i]));
        s.push_str(&format!("  eq f({}, 0) = 0 [variant] .\n", names[i]));
    }
    s.push_str("endfm\n");
    s
}
