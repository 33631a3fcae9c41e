//! The specialization driver: unfolding with a whistle, abstraction, the
//! fixpoint over specialized calls, resultants and the final renaming.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use serde_json::json;

use crate::embed::embeds_sig;
use crate::error::{Error, Result};
use crate::generalize::{bmt, lgg_modulo};
use crate::narrow::{build_folding_tree, derivations, NarrowingTree, Status, DEFAULT_MAX_DEPTH};
use crate::rewrite::{normalize, CompiledTheory};
use crate::signature::{Equation, OpSpec, Side, Signature, SymId, Theory};
use crate::solver::matching::match_modulo;
use crate::subst::{eq_modulo_renaming, renaming_seq, Subst};
use crate::syntax::show;
use crate::term::{Term, Var};

pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug)]
pub struct PeConfig {
    pub max_depth: usize,
    pub max_iter: usize,
}

impl Default for PeConfig {
    fn default() -> Self {
        PeConfig { max_depth: DEFAULT_MAX_DEPTH, max_iter: DEFAULT_MAX_ITER }
    }
}

/// `closed_B(Q, t)`: every defined-rooted piece of `t` is an instance of some
/// `q` whose matcher bindings are closed in turn.
pub fn closed_modulo(q: &[Term], t: &Term, th: &Theory) -> bool {
    let Some(f) = t.sym() else { return true };
    if !th.is_defined(f) {
        return t.args().iter().all(|a| closed_modulo(q, a, th));
    }
    q.iter().any(|p| match_modulo(&th.sig, p, t).iter().any(|m| m.iter().all(|(_, b)| closed_modulo(q, b, th))))
}

/// Maximal defined-rooted subterms.
pub fn redexes(t: &Term, th: &Theory) -> Vec<Term> {
    let mut out = Vec::new();
    let mut stack = vec![t.clone()];
    while let Some(s) = stack.pop() {
        let Some(f) = s.sym() else { continue };
        if th.is_defined(f) {
            if !out.contains(&s) {
                out.push(s);
            }
        } else {
            let mut args = s.args();
            args.reverse();
            stack.extend(args);
        }
    }
    out
}

/// Fires when a redex of the candidate embeds a same-rooted redex of an ancestor.
pub fn whistle_fires(th: &Theory, ancestors: &[&Term], cand: &Term) -> Option<(Term, Term)> {
    let new = redexes(cand, th);
    for a in ancestors {
        for r in redexes(a, th) {
            for r2 in &new {
                if r.sym() == r2.sym() && embeds_sig(&r, r2, &th.sig) {
                    return Some((r, r2.clone()));
                }
            }
        }
    }
    None
}

/// Events recorded while specializing, one JSON object per line when written out.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub events: Vec<serde_json::Value>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }
}

fn build_tree(q: &Term, ct: &CompiledTheory, cfg: &PeConfig, trace: &RefCell<Trace>) -> Result<NarrowingTree> {
    let th = &*ct.theory;
    let sig = ct.sig();
    let stop = |anc: &[&Term], cand: &Term| -> bool {
        match whistle_fires(th, anc, cand) {
            Some((r, r2)) => {
                trace.borrow_mut().events.push(json!({
                    "event": "whistle",
                    "call": show(sig, q),
                    "node": show(sig, cand),
                    "embedded": show(sig, &r),
                    "into": show(sig, &r2),
                }));
                true
            }
            None => false,
        }
    };
    build_folding_tree(q, ct, &stop, cfg.max_depth)
}

/// Folding tree for one call with the embedding whistle and no trace.
pub fn unfold_one(q: &Term, ct: &CompiledTheory, max_depth: usize) -> Result<NarrowingTree> {
    let cfg = PeConfig { max_depth, ..PeConfig::default() };
    build_tree(q, ct, &cfg, &RefCell::new(Trace::default()))
}

/// One folding narrowing tree per call.
pub fn unfold(q: &[Term], ct: &CompiledTheory, cfg: &PeConfig) -> Result<Vec<NarrowingTree>> {
    let trace = RefCell::new(Trace::default());
    q.iter().map(|x| build_tree(x, ct, cfg, &trace)).collect()
}

fn contains_renaming(sig: &Signature, q: &[Term], t: &Term) -> bool {
    q.iter().any(|x| eq_modulo_renaming(sig, x, t).is_some())
}

struct Abs<'a> {
    ct: &'a CompiledTheory,
    trace: &'a RefCell<Trace>,
    budget: usize,
}

impl<'a> Abs<'a> {
    fn all(&mut self, mut q: Vec<Term>, ts: &[Term]) -> Result<Vec<Term>> {
        for t in ts {
            q = self.one(q, t)?;
        }
        Ok(q)
    }

    fn one(&mut self, q: Vec<Term>, t: &Term) -> Result<Vec<Term>> {
        let th = &*self.ct.theory;
        let sig = &*th.sig;
        let Some(f) = t.sym() else { return Ok(q) };
        if !th.is_defined(f) {
            return self.all(q, &t.args());
        }
        if contains_renaming(sig, &q, t) {
            return Ok(q);
        }
        self.budget = self.budget.checked_sub(1).ok_or(Error::NonConvergence(0))?;
        let comparable: Vec<Term> = q.iter().filter(|x| x.sym() == Some(f) && embeds_sig(x, t, sig)).cloned().collect();
        let ev = |action: &str, extra: serde_json::Value| {
            self.trace.borrow_mut().events.push(json!({ "event": "abstract", "term": show(sig, t), "action": action, "detail": extra }));
        };
        if comparable.is_empty() {
            ev("add", serde_json::Value::Null);
            let mut q = q;
            q.push(t.clone());
            return Ok(q);
        }
        if closed_modulo(&q, t, th) {
            ev("closed", serde_json::Value::Null);
            return Ok(q);
        }
        let best = bmt(&comparable, t, th)?;
        let mut rest: Vec<Term> = q.into_iter().filter(|x| !best.contains(x)).collect();
        let mut fresh: Vec<Term> = Vec::new();
        for b in &best {
            for g in lgg_modulo(b, t, th) {
                let mut parts = vec![g.term.clone()];
                parts.extend(g.left.iter().map(|(_, x)| x.clone()));
                parts.extend(g.right.iter().map(|(_, x)| x.clone()));
                for p in parts {
                    let p = normalize(&p, self.ct)?;
                    if !fresh.contains(&p) {
                        fresh.push(p);
                    }
                }
            }
        }
        ev(
            "generalize",
            json!({
                "replaced": best.iter().map(|x| show(sig, x)).collect::<Vec<_>>(),
                "with": fresh.iter().map(|x| show(sig, x)).collect::<Vec<_>>(),
            }),
        );
        // generalizations come first so later pieces can close against them
        let mut gens: Vec<Term> = Vec::new();
        let mut pieces: Vec<Term> = Vec::new();
        for p in fresh {
            if p.sym() == Some(f) {
                gens.push(p);
            } else {
                pieces.push(p);
            }
        }
        gens.extend(pieces);
        rest = self.all(rest, &gens)?;
        Ok(rest)
    }
}

/// The abstraction operator over a set of calls and a set of new terms.
pub fn abstraction(q: Vec<Term>, ts: &[Term], ct: &CompiledTheory) -> Result<Vec<Term>> {
    let trace = RefCell::new(Trace::default());
    Abs { ct, trace: &trace, budget: 100_000 }.all(q, ts)
}

/// Fixpoint state.
#[derive(Clone, Debug)]
pub struct Specialization {
    pub calls: Vec<Term>,
    pub trees: Vec<NarrowingTree>,
    pub iterations: usize,
    pub trace: Trace,
}

fn same_set(sig: &Signature, a: &[Term], b: &[Term]) -> bool {
    a.len() == b.len() && a.iter().all(|x| contains_renaming(sig, b, x)) && b.iter().all(|x| contains_renaming(sig, a, x))
}

/// Iterates unfolding and abstraction until the set of calls is stable up to renaming.
pub fn eqnpe(ct: &CompiledTheory, q0: &[Term], cfg: &PeConfig) -> Result<Specialization> {
    let th = &*ct.theory;
    let sig = ct.sig();
    if q0.is_empty() {
        return Err(Error::EmptyInput("no calls to specialize".into()));
    }
    let mut q: Vec<Term> = Vec::new();
    for t in q0 {
        let n = normalize(t, ct)?;
        if !n.sym().is_some_and(|f| th.is_defined(f)) {
            return Err(Error::BadCall(format!("`{}` normalizes to `{}`, which has no defined root", show(sig, t), show(sig, &n))));
        }
        if !contains_renaming(sig, &q, t) {
            q.push(t.clone());
        }
    }
    let trace = RefCell::new(Trace::default());
    let mut cache: HashMap<Term, NarrowingTree> = HashMap::new();
    for it in 1..=cfg.max_iter {
        trace.borrow_mut().events.push(json!({
            "event": "iteration",
            "n": it,
            "calls": q.iter().map(|x| show(sig, x)).collect::<Vec<_>>(),
        }));
        let mut trees = Vec::with_capacity(q.len());
        for x in &q {
            let t = match cache.get(x) {
                Some(t) => t.clone(),
                None => {
                    let t = build_tree(x, ct, cfg, &trace)?;
                    cache.insert(x.clone(), t.clone());
                    t
                }
            };
            trees.push(t);
        }
        let mut leaves: Vec<Term> = Vec::new();
        for tr in &trees {
            for n in &tr.nodes {
                if matches!(n.status, Status::Leaf(_)) && !contains_renaming(sig, &q, &n.term) && !leaves.contains(&n.term) {
                    leaves.push(n.term.clone());
                }
            }
        }
        let next = Abs { ct, trace: &trace, budget: 100_000 }.all(q.clone(), &leaves)?;
        if same_set(sig, &next, &q) {
            trace.borrow_mut().events.push(json!({ "event": "converged", "iterations": it }));
            return Ok(Specialization { calls: q, trees, iterations: it, trace: trace.into_inner() });
        }
        q = next;
    }
    Err(Error::NonConvergence(cfg.max_iter))
}

#[derive(Clone, Debug)]
pub struct Resultant {
    pub lhs: Term,
    pub rhs: Term,
    /// Index of the call in `Specialization::calls`.
    pub call: usize,
}

/// `q sigma => leaf` for every root-to-leaf derivation, without trivial or repeated ones.
pub fn extract_resultants(state: &Specialization, sig: &Signature) -> Vec<Resultant> {
    let mut out: Vec<Resultant> = Vec::new();
    for (ci, (q, tree)) in state.calls.iter().zip(&state.trees).enumerate() {
        for (s, leaf) in derivations(tree) {
            let lhs = s.apply(sig, q);
            if lhs == leaf {
                continue;
            }
            let dup = out.iter().any(|r| renaming_seq(sig, &[r.lhs.clone(), r.rhs.clone()], &[lhs.clone(), leaf.clone()]).is_some());
            if !dup {
                out.push(Resultant { lhs, rhs: leaf, call: ci });
            }
        }
    }
    out
}

/// Resultants over the original symbols, as a theory.
pub fn resultant_theory(name: &str, res: &[Resultant], th: &Theory) -> Result<Theory> {
    let eqs = res.iter().map(|r| Equation { label: None, lhs: r.lhs.clone(), rhs: r.rhs.clone(), variant: false }).collect();
    Theory::new(name, th.sig.clone(), eqs)
}

#[derive(Clone, Debug)]
pub struct RenameEntry {
    pub pattern: Term,
    pub name: String,
    pub args: Vec<Var>,
}

/// Renamed program over the constructors and one fresh operator per call.
#[derive(Clone, Debug)]
pub struct Renamed {
    pub theory: Arc<Theory>,
    pub entries: Vec<RenameEntry>,
    /// Fresh symbol of each entry in the renamed signature.
    pub syms: Vec<SymId>,
}

fn op_specs(sig: &Signature, f: SymId) -> Vec<OpSpec> {
    let s = sig.sym(f);
    s.decls
        .iter()
        .map(|d| OpSpec {
            name: s.name.to_string(),
            args: d.args.iter().map(|&a| sig.sorts.name(a).to_string()).collect(),
            result: sig.sorts.name(d.result).to_string(),
            assoc: s.axioms.assoc,
            comm: s.axioms.comm,
            identity: s.axioms.identity.map(|i| (sig.sym(i.elem).name.to_string(), i.side)),
            ctor: s.ctor_attr,
        })
        .collect()
}

fn alnum(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).collect()
}

/// `flip0`, `flip1`, ... for prefix roots; `f<c>` when a symbolic root has a
/// leading constant argument `c`, so `init | L | G` becomes `finit`.
fn default_name(sig: &Signature, q: &Term, used: &mut HashMap<String, usize>) -> String {
    let mut base = alnum(q.name());
    if base.is_empty() {
        if let Some(a) = q.args().first().filter(|a| a.arity() == 0 && !a.is_var()) {
            let c = alnum(a.name());
            if !c.is_empty() {
                let name = format!("f{c}");
                if !used.contains_key(&name) && sig.lookup_any(&name).is_empty() {
                    used.insert(name.clone(), 0);
                    return name;
                }
            }
        }
    }
    if base.is_empty() || base.starts_with(|c: char| c.is_ascii_digit()) {
        base = format!("f{base}");
    }
    loop {
        let k = used.entry(base.clone()).or_insert(0);
        let name = format!("{base}{k}");
        *k += 1;
        if sig.lookup_any(&name).is_empty() {
            return name;
        }
    }
}

struct Ren<'a> {
    th: &'a Theory,
    calls: &'a [Term],
    entries: &'a [RenameEntry],
    out: &'a Signature,
    syms: &'a [SymId],
}

impl<'a> Ren<'a> {
    fn call(&self, i: usize, s: &Subst) -> Result<Term> {
        let args = self.entries[i]
            .args
            .iter()
            .map(|v| self.term(&s.apply(&self.th.sig, &Term::var(v.clone()))))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.out.app(self.syms[i], args))
    }

    fn term(&self, t: &Term) -> Result<Term> {
        let sig = &*self.th.sig;
        let Some(f) = t.sym() else { return self.out.import(t) };
        if !self.th.is_defined(f) {
            let args = t.args().iter().map(|a| self.term(a)).collect::<Result<Vec<_>>>()?;
            return self.out.mk(t.name(), args);
        }
        for (i, q) in self.calls.iter().enumerate() {
            for m in match_modulo(sig, q, t) {
                if m.iter().all(|(_, b)| closed_modulo(self.calls, b, self.th)) {
                    return self.call(i, &m);
                }
            }
        }
        Err(Error::NotClosed(show(sig, t)))
    }
}

/// Independent renaming of the calls; `names` overrides the generated operator names.
pub fn rename(res: &[Resultant], state: &Specialization, th: &Theory, names: &[(Term, String)]) -> Result<Renamed> {
    let sig = &*th.sig;
    let mut used = HashMap::new();
    let mut entries = Vec::new();
    for q in &state.calls {
        let name = names
            .iter()
            .find(|(p, _)| eq_modulo_renaming(sig, p, q).is_some())
            .map(|(_, n)| n.clone())
            .unwrap_or_else(|| default_name(sig, q, &mut used));
        entries.push(RenameEntry { pattern: q.clone(), name, args: q.vars() });
    }
    let mut specs = Vec::new();
    for (f, _) in sig.symbols() {
        if !th.is_defined(f) {
            specs.extend(op_specs(sig, f));
        }
    }
    let mut out = Signature::new(sig.sorts.clone(), &specs)?;
    out.nat = sig.nat;
    let mut syms = Vec::new();
    for e in &entries {
        let result = e.pattern.sort().ok_or_else(|| Error::IllTyped(show(sig, &e.pattern)))?;
        syms.push(out.add_fresh_op(&e.name, e.args.iter().map(|v| v.sort).collect(), result)?);
    }
    let ren = Ren { th, calls: &state.calls, entries: &entries, out: &out, syms: &syms };
    let mut eqs = Vec::new();
    for r in res {
        let q = &state.calls[r.call];
        let s = match_modulo(sig, q, &r.lhs)
            .into_iter()
            .next()
            .ok_or_else(|| Error::NotClosed(show(sig, &r.lhs)))?;
        let lhs = ren.call(r.call, &s)?;
        let rhs = ren.term(&r.rhs)?;
        eqs.push(Equation { label: None, lhs, rhs, variant: false });
    }
    let name = format!("{}-SPEC", th.name);
    let theory = Theory::new(&name, Arc::new(out), eqs)?;
    Ok(Renamed { theory: Arc::new(theory), entries, syms })
}

impl Renamed {
    /// `rho(g)` for an instance `g` of one of the calls.
    pub fn forward(&self, th: &Theory, g: &Term) -> Result<Term> {
        let ren = Ren { th, calls: &self.calls(), entries: &self.entries, out: &self.theory.sig, syms: &self.syms };
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(m) = match_modulo(&th.sig, &e.pattern, g).into_iter().next() {
                return ren.call(i, &m);
            }
        }
        ren.term(g)
    }

    fn calls(&self) -> Vec<Term> {
        self.entries.iter().map(|e| e.pattern.clone()).collect()
    }

    /// `rho^-1`: fresh calls are replaced by their instantiated patterns.
    pub fn back(&self, th: &Theory, t: &Term) -> Result<Term> {
        let sig = &*th.sig;
        let Some(f) = t.sym() else { return sig.import(t) };
        let args = t.args().iter().map(|a| self.back(th, a)).collect::<Result<Vec<_>>>()?;
        if let Some(i) = self.syms.iter().position(|&s| s == f) {
            let e = &self.entries[i];
            let s = Subst::from_pairs(e.args.iter().cloned().zip(args));
            return Ok(s.apply(sig, &e.pattern));
        }
        sig.mk(t.name(), args)
    }

    /// Header lines describing the renaming, for printed output.
    pub fn header(&self, th: &Theory) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| {
                let args: Vec<&str> = e.args.iter().map(|v| &*v.name).collect();
                let call = if args.is_empty() { e.name.clone() } else { format!("{}({})", e.name, args.join(", ")) };
                format!("rename: {} |-> {}", show(&th.sig, &e.pattern), call)
            })
            .collect()
    }
}

/// Identity-side display used by printers of renamed programs.
pub fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
        Side::Both => "both",
    }
}

/// Everything a `specialize` run produces.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub state: Specialization,
    pub resultants: Vec<Resultant>,
    pub renamed: Option<Renamed>,
}

/// compile -> eqnpe -> resultants -> renaming.
pub fn specialize(ct: &CompiledTheory, calls: &[Term], cfg: &PeConfig, do_rename: bool, names: &[(Term, String)]) -> Result<Outcome> {
    let state = eqnpe(ct, calls, cfg)?;
    let th = &*ct.theory;
    let resultants = extract_resultants(&state, &th.sig);
    let renamed = if do_rename { Some(rename(&resultants, &state, th, names)?) } else { None };
    Ok(Outcome { state, resultants, renamed })
}
