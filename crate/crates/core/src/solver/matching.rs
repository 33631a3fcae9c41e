//! Matching modulo free, C, A, AC and ACU symbols.

use std::cell::Cell;

use crate::signature::{Side, Signature, SymId};
use crate::subst::Subst;
use crate::term::{AcArgs, Kind, Term, Var};

/// Matching context: signature plus an elementary-comparison counter.
pub struct Cx<'a> {
    pub sig: &'a Signature,
    pub attempts: Cell<u64>,
}

impl<'a> Cx<'a> {
    pub fn new(sig: &'a Signature) -> Cx<'a> {
        Cx { sig, attempts: Cell::new(0) }
    }

    fn tick(&self) {
        self.attempts.set(self.attempts.get() + 1);
    }
}

/// Partial matcher with cheap undo by truncation.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    pub v: Vec<(Var, Term)>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings { v: Vec::new() }
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.v.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn to_subst(&self) -> Subst {
        Subst::from_pairs(self.v.iter().cloned())
    }
}

pub type K<'k> = &'k mut dyn FnMut(&mut Bindings) -> bool;

fn sort_ok(sig: &Signature, x: &Var, t: &Term) -> bool {
    match t.sort() {
        Some(s) => sig.sort_leq(s, x.sort),
        None => false,
    }
}

fn bind(cx: &Cx, x: &Var, t: Term, b: &mut Bindings, k: K) -> bool {
    if let Some(old) = b.get(x) {
        return if *old == t { k(b) } else { false };
    }
    if !sort_ok(cx.sig, x, &t) {
        return false;
    }
    b.v.push((x.clone(), t));
    let r = k(b);
    b.v.pop();
    r
}

/// Enumerates matchers of `p` against `s` extending `b`; stops once `k` returns true.
pub fn mt(cx: &Cx, p: &Term, s: &Term, b: &mut Bindings, k: K) -> bool {
    cx.tick();
    if let Kind::Var(x) = p.kind() {
        return bind(cx, x, s.clone(), b, k);
    }
    if p.is_ground() {
        return if p == s { k(b) } else { false };
    }
    let pa = p.as_app().unwrap();
    let f = pa.sym;
    let ax = cx.sig.axioms(f);
    if ax.is_ac() {
        let subj = match s.ac_args() {
            Some(a) if s.sym() == Some(f) => a.clone(),
            _ => {
                let mut a = AcArgs::new();
                let is_id = ax.identity.is_some_and(|id| s.sym() == Some(id.elem) && s.arity() == 0);
                if !is_id {
                    a.insert(s.clone(), 1);
                }
                a
            }
        };
        return match_ac(cx, f, p.ac_args().unwrap(), subj, b, k);
    }
    if s.sym() != Some(f) {
        return false;
    }
    let ps = p.list_args().unwrap();
    let ss = s.list_args().unwrap();
    if ax.assoc {
        return match_assoc(cx, f, ps, ss, b, k);
    }
    if ps.len() != ss.len() {
        return false;
    }
    if ax.comm {
        if match_seq(cx, ps, ss, b, k) {
            return true;
        }
        if ss[0] == ss[1] {
            return false;
        }
        let sw = [ss[1].clone(), ss[0].clone()];
        return match_seq(cx, ps, &sw, b, k);
    }
    match_seq(cx, ps, ss, b, k)
}

pub fn match_seq(cx: &Cx, ps: &[Term], ss: &[Term], b: &mut Bindings, k: K) -> bool {
    if ps.is_empty() {
        return k(b);
    }
    mt(cx, &ps[0], &ss[0], b, &mut |b: &mut Bindings| match_seq(cx, &ps[1..], &ss[1..], b, k))
}

fn match_assoc(cx: &Cx, f: SymId, ps: &[Term], ss: &[Term], b: &mut Bindings, k: K) -> bool {
    if ps.is_empty() {
        return ss.is_empty() && k(b);
    }
    if ss.len() < ps.len() {
        return false;
    }
    let p = &ps[0];
    if p.is_var() {
        let max = ss.len() - (ps.len() - 1);
        for len in 1..=max {
            let seg = if len == 1 { ss[0].clone() } else { cx.sig.app(f, ss[..len].to_vec()) };
            if mt(cx, p, &seg, b, &mut |b: &mut Bindings| match_assoc(cx, f, &ps[1..], &ss[len..], b, k)) {
                return true;
            }
        }
        false
    } else {
        mt(cx, p, &ss[0], b, &mut |b: &mut Bindings| match_assoc(cx, f, &ps[1..], &ss[1..], b, k))
    }
}

fn match_ac(cx: &Cx, f: SymId, pat: &AcArgs, mut subj: AcArgs, b: &mut Bindings, k: K) -> bool {
    let mut nonvar = Vec::new();
    let mut vars = Vec::new();
    for (p, c) in pat.iter() {
        if p.is_ground() {
            cx.tick();
            if !subj.remove(p, c) {
                return false;
            }
        } else if let Some(v) = p.as_var() {
            vars.push((v.clone(), c));
        } else {
            for _ in 0..c {
                nonvar.push(p.clone());
            }
        }
    }
    if nonvar.len() + vars.iter().map(|(_, c)| *c as usize).sum::<usize>() > subj.len() && cx.sig.identity_of(f).is_none()
    {
        return false;
    }
    match_ac_elems(cx, f, &nonvar, &vars, subj, b, k)
}

fn match_ac_elems(cx: &Cx, f: SymId, nonvar: &[Term], vars: &[(Var, u32)], subj: AcArgs, b: &mut Bindings, k: K) -> bool {
    if nonvar.is_empty() {
        return match_ac_vars(cx, f, vars, subj, b, k);
    }
    let p = &nonvar[0];
    let psym = p.sym();
    for (e, _) in subj.iter() {
        cx.tick();
        if e.sym() != psym {
            continue;
        }
        let mut rest = subj.clone();
        rest.remove(e, 1);
        let hit = mt(cx, p, e, b, &mut |b: &mut Bindings| {
            match_ac_elems(cx, f, &nonvar[1..], vars, rest.clone(), b, k)
        });
        if hit {
            return true;
        }
    }
    false
}

fn remove_value(cx: &Cx, f: SymId, subj: &mut AcArgs, t: &Term, c: u32) -> bool {
    if t.sym() == Some(f) {
        if let Some(a) = t.ac_args() {
            return a.iter().all(|(e, n)| subj.remove(e, n * c));
        }
    }
    if let Some(id) = cx.sig.identity_of(f) {
        if t.sym() == Some(id.elem) && t.arity() == 0 {
            return true;
        }
    }
    subj.remove(t, c)
}

fn match_ac_vars(cx: &Cx, f: SymId, vars: &[(Var, u32)], mut subj: AcArgs, b: &mut Bindings, k: K) -> bool {
    let mut free: Vec<(Var, u32)> = Vec::new();
    for (v, c) in vars {
        match b.get(v) {
            Some(t) => {
                let t = t.clone();
                if !remove_value(cx, f, &mut subj, &t, *c) {
                    return false;
                }
            }
            None => free.push((v.clone(), *c)),
        }
    }
    if free.is_empty() {
        return subj.is_empty() && k(b);
    }
    let identity = cx.sig.identity_of(f);
    if free.len() == 1 && free[0].1 == 1 {
        let t = if subj.is_empty() {
            match identity {
                Some(id) => cx.sig.constant_sym(id.elem),
                None => return false,
            }
        } else {
            cx.sig.ac_from(f, subj)
        };
        return bind(cx, &free[0].0, t, b, k);
    }
    let elems: Vec<(Term, u32)> = subj.iter().map(|(t, c)| (t.clone(), c)).collect();
    let mut parts: Vec<AcArgs> = vec![AcArgs::new(); free.len()];
    distribute(cx, f, &free, &elems, 0, &mut parts, identity.map(|i| i.elem), b, k)
}

#[allow(clippy::too_many_arguments)]
fn distribute(
    cx: &Cx,
    f: SymId,
    free: &[(Var, u32)],
    elems: &[(Term, u32)],
    j: usize,
    parts: &mut Vec<AcArgs>,
    id: Option<SymId>,
    b: &mut Bindings,
    k: K,
) -> bool {
    if j == elems.len() {
        let mut terms = Vec::with_capacity(free.len());
        for p in parts.iter() {
            if p.is_empty() {
                match id {
                    Some(e) => terms.push(cx.sig.constant_sym(e)),
                    None => return false,
                }
            } else {
                terms.push(cx.sig.ac_from(f, p.clone()));
            }
        }
        return bind_all(cx, free, &terms, b, k);
    }
    let (e, n) = &elems[j];
    // split n copies of e among the variables, weighted by their multiplicities
    let mut amounts = vec![0u32; free.len()];
    split(cx, f, free, elems, j, e, *n, 0, &mut amounts, parts, id, b, k)
}

#[allow(clippy::too_many_arguments)]
fn split(
    cx: &Cx,
    f: SymId,
    free: &[(Var, u32)],
    elems: &[(Term, u32)],
    j: usize,
    e: &Term,
    left: u32,
    i: usize,
    amounts: &mut Vec<u32>,
    parts: &mut Vec<AcArgs>,
    id: Option<SymId>,
    b: &mut Bindings,
    k: K,
) -> bool {
    if i == free.len() {
        if left != 0 {
            return false;
        }
        let saved: Vec<AcArgs> = parts.clone();
        for (x, a) in amounts.iter().enumerate() {
            parts[x].insert(e.clone(), *a);
        }
        let r = distribute(cx, f, free, elems, j + 1, parts, id, b, k);
        *parts = saved;
        return r;
    }
    let c = free[i].1;
    let mut a = 0;
    while a * c <= left {
        amounts[i] = a;
        if split(cx, f, free, elems, j, e, left - a * c, i + 1, amounts, parts, id, b, k) {
            return true;
        }
        a += 1;
    }
    amounts[i] = 0;
    false
}

fn bind_all(cx: &Cx, free: &[(Var, u32)], terms: &[Term], b: &mut Bindings, k: K) -> bool {
    if free.is_empty() {
        return k(b);
    }
    bind(cx, &free[0].0, terms[0].clone(), b, &mut |b: &mut Bindings| bind_all(cx, &free[1..], &terms[1..], b, k))
}

/// Variables that may be instantiated by an identity of a non-AC operator above them.
pub fn identity_eligible(sig: &Signature, p: &Term) -> Vec<(Var, Term)> {
    let mut out: Vec<(Var, Term)> = Vec::new();
    let mut stack = vec![p.clone()];
    while let Some(t) = stack.pop() {
        let Some(a) = t.as_app() else { continue };
        let ax = sig.axioms(a.sym);
        let args = t.args();
        if let (Some(id), false) = (ax.identity, ax.is_ac()) {
            let n = args.len();
            for (i, x) in args.iter().enumerate() {
                let ok = match id.side {
                    Side::Both => true,
                    Side::Left => i == 0 || ax.assoc,
                    Side::Right => i + 1 == n || ax.assoc,
                };
                if let (true, Some(v)) = (ok, x.as_var()) {
                    let e = sig.constant_sym(id.elem);
                    if e.sort().is_some_and(|s| sig.sort_leq(s, v.sort)) && !out.iter().any(|(w, _)| w == v) {
                        out.push((v.clone(), e));
                    }
                }
            }
        }
        stack.extend(args.into_iter().filter(|x| !x.is_ground()));
    }
    out
}

/// Complete set of matchers of the pattern tuple against the subject tuple.
pub fn match_all_seq(cx: &Cx, ps: &[Term], ss: &[Term]) -> Vec<Subst> {
    assert_eq!(ps.len(), ss.len());
    let mut elig: Vec<(Var, Term)> = Vec::new();
    for p in ps {
        for (v, e) in identity_eligible(cx.sig, p) {
            if !elig.iter().any(|(w, _)| *w == v) {
                elig.push((v, e));
            }
        }
    }
    let mut out: Vec<Subst> = Vec::new();
    let n = elig.len().min(12);
    for mask in 0u32..(1 << n) {
        let pre = Subst::from_pairs((0..n).filter(|i| mask & (1 << i) != 0).map(|i| elig[i].clone()));
        let ps2: Vec<Term> = if mask == 0 { ps.to_vec() } else { ps.iter().map(|p| pre.apply(cx.sig, p)).collect() };
        let mut b = Bindings::new();
        match_seq(cx, &ps2, ss, &mut b, &mut |b: &mut Bindings| {
            let mut s = b.to_subst();
            for (v, t) in pre.iter() {
                s.insert(v.clone(), t.clone());
            }
            if !out.contains(&s) {
                out.push(s);
            }
            false
        });
    }
    out
}

/// Whether some matcher exists; cheaper than enumerating all.
pub fn matches_seq(cx: &Cx, ps: &[Term], ss: &[Term]) -> bool {
    let mut b = Bindings::new();
    if match_seq(cx, ps, ss, &mut b, &mut |_| true) {
        return true;
    }
    let has_id = ps.iter().any(|p| !identity_eligible(cx.sig, p).is_empty());
    has_id && !match_all_seq(cx, ps, ss).is_empty()
}

pub fn match_modulo(sig: &Signature, pattern: &Term, subject: &Term) -> Vec<Subst> {
    let cx = Cx::new(sig);
    let out = match_all_seq(&cx, std::slice::from_ref(pattern), std::slice::from_ref(subject));
    if cfg!(debug_assertions) {
        for s in &out {
            debug_assert!(s.apply(sig, pattern) == *subject, "unsound matcher");
        }
    }
    out
}

pub fn matches(sig: &Signature, pattern: &Term, subject: &Term) -> bool {
    let cx = Cx::new(sig);
    matches_seq(&cx, std::slice::from_ref(pattern), std::slice::from_ref(subject))
}
