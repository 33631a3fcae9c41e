//! Rewriting with the oriented equations modulo the structural axioms.

use std::cell::Cell;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::signature::{Signature, Theory};
use crate::solver::matching::{identity_eligible, mt, Bindings, Cx};
use crate::subst::Subst;
use crate::term::{fresh_var, AcArgs, Args, Kind, Position, Term};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Equation,
    /// Equation with identity-eligible variables instantiated by the identity.
    IdVariant,
    /// `f(X, e) -> X` for a non-AC identity.
    Identity,
    /// AC rule extended with a remainder variable.
    Extension,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
    pub kind: RuleKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: u64,
    pub match_attempts: u64,
}

#[derive(Clone, Debug)]
pub struct CompiledTheory {
    pub theory: Arc<Theory>,
    pub rules: Vec<Rule>,
    /// Candidate rules per subject root, in rule order. Rules rooted by an AC operator
    /// with identity are candidates for every root.
    rewrite_by: Vec<Vec<usize>>,
    narrow_by: Vec<Vec<usize>>,
    pub fuel: u64,
}

fn label_of(th: &Theory, i: usize) -> String {
    th.equations[i].label.clone().unwrap_or_else(|| format!("#{}", i + 1))
}

impl CompiledTheory {
    pub fn sig(&self) -> &Signature {
        &self.theory.sig
    }

    pub fn rule_indices_for(&self, t: &Term, narrowing: bool) -> &[usize] {
        let Some(f) = t.sym() else { return &[] };
        if narrowing {
            &self.narrow_by[f.idx()]
        } else {
            &self.rewrite_by[f.idx()]
        }
    }
}

/// Compiles identities into rules and lhs variants, and adds AC extension rules.
pub fn compile(th: Arc<Theory>) -> Result<CompiledTheory> {
    let sig = th.sig.clone();
    let mut rules: Vec<Rule> = Vec::new();
    for (i, eq) in th.equations.iter().enumerate() {
        let lv = eq.lhs.vars();
        if eq.rhs.vars().iter().any(|v| !lv.contains(v)) {
            return Err(Error::NonOrientable(label_of(&th, i)));
        }
        let label = label_of(&th, i);
        let base = Rule { label: label.clone(), lhs: eq.lhs.clone(), rhs: eq.rhs.clone(), kind: RuleKind::Equation };
        let mut family = vec![base];
        let elig = identity_eligible(&sig, &eq.lhs);
        let n = elig.len().min(10);
        for mask in 1u32..(1 << n) {
            let s = Subst::from_pairs((0..n).filter(|k| mask & (1 << k) != 0).map(|k| elig[k].clone()));
            let lhs = s.apply(&sig, &eq.lhs);
            let rhs = s.apply(&sig, &eq.rhs);
            if lhs.is_var() || lhs.sort().is_none() {
                continue;
            }
            if family.iter().any(|r| r.lhs == lhs) {
                continue;
            }
            family.push(Rule { label: format!("{label}~id"), lhs, rhs, kind: RuleKind::IdVariant });
        }
        let mut ext = Vec::new();
        for r in &family {
            let f = r.lhs.sym().unwrap();
            if sig.axioms(f).is_ac() {
                let y = Term::var(fresh_var("Ext", sig.assoc_top(f), &sig));
                ext.push(Rule {
                    label: format!("{}~ext", r.label),
                    lhs: sig.app(f, vec![r.lhs.clone(), y.clone()]),
                    rhs: sig.app(f, vec![r.rhs.clone(), y]),
                    kind: RuleKind::Extension,
                });
            }
        }
        rules.extend(family);
        rules.extend(ext);
    }
    for (f, s) in sig.symbols() {
        let ax = s.axioms;
        let Some(id) = ax.identity else { continue };
        if ax.is_ac() {
            continue;
        }
        for d in &s.decls {
            let e = sig.constant_sym(id.elem);
            let mk = |left: bool| -> Option<Rule> {
                let xs = if left { d.args[1] } else { d.args[0] };
                let x = Term::var(fresh_var("X", xs, &sig));
                let args = if left { vec![e.clone(), x.clone()] } else { vec![x.clone(), e.clone()] };
                let lhs = sig.app_raw(f, args);
                lhs.sort()?;
                Some(Rule { label: format!("{}-id", s.name), lhs, rhs: x, kind: RuleKind::Identity })
            };
            use crate::signature::Side;
            if matches!(id.side, Side::Right | Side::Both) {
                rules.extend(mk(false));
            }
            if matches!(id.side, Side::Left | Side::Both) {
                rules.extend(mk(true));
            }
        }
    }
    let nsym = sig.symbols().count();
    let mut rewrite_by: Vec<Vec<usize>> = vec![Vec::new(); nsym];
    let mut narrow_by: Vec<Vec<usize>> = vec![Vec::new(); nsym];
    for (i, r) in rules.iter().enumerate() {
        let f = r.lhs.sym().unwrap();
        let loose = sig.axioms(f).is_ac() && sig.identity_of(f).is_some();
        for g in 0..nsym {
            if g == f.idx() || loose {
                narrow_by[g].push(i);
                if r.kind != RuleKind::Identity {
                    rewrite_by[g].push(i);
                }
            }
        }
    }
    Ok(CompiledTheory { theory: th, rules, rewrite_by, narrow_by, fuel: DEFAULT_FUEL })
}

struct Nf<'a> {
    ct: &'a CompiledTheory,
    cx: Cx<'a>,
    steps: Cell<u64>,
}

impl<'a> Nf<'a> {
    fn step(&self) -> Result<()> {
        let s = self.steps.get() + 1;
        self.steps.set(s);
        if s > self.ct.fuel {
            return Err(Error::NonTermination(self.ct.fuel));
        }
        Ok(())
    }

    fn first_match(&self, t: &Term) -> Option<(usize, Bindings)> {
        for &i in self.ct.rule_indices_for(t, false) {
            let r = &self.ct.rules[i];
            let mut found: Option<Bindings> = None;
            let mut b = Bindings::new();
            mt(&self.cx, &r.lhs, t, &mut b, &mut |b: &mut Bindings| {
                found = Some(b.clone());
                true
            });
            if let Some(b) = found {
                return Some((i, b));
            }
        }
        None
    }

    fn nf(&self, t: &Term) -> Result<Term> {
        let Kind::App(a) = t.kind() else { return Ok(t.clone()) };
        let sig = self.ct.sig();
        let t2 = match &a.args {
            Args::List(xs) => {
                let ys = xs.iter().map(|x| self.nf(x)).collect::<Result<Vec<_>>>()?;
                sig.with_args(t, ys)
            }
            Args::Ac(m) => {
                let mut changes = Vec::new();
                for (e, c) in m.iter() {
                    let ne = self.nf(e)?;
                    if !ne.ptr_eq(e) {
                        changes.push((e.clone(), ne, c));
                    }
                }
                if changes.is_empty() {
                    t.clone()
                } else {
                    let mut acc: AcArgs = m.clone();
                    for (e, _, c) in &changes {
                        acc.remove(e, *c);
                    }
                    for (_, ne, c) in changes {
                        sig.ac_push(a.sym, &mut acc, ne, c);
                    }
                    sig.ac_from(a.sym, acc)
                }
            }
        };
        self.reduce_root(t2)
    }

    fn reduce_root(&self, t: Term) -> Result<Term> {
        if t.is_var() {
            return Ok(t);
        }
        match self.first_match(&t) {
            None => Ok(t),
            Some((i, b)) => {
                self.step()?;
                self.inst_nf(&self.ct.rules[i].rhs, &b)
            }
        }
    }

    /// Instantiates a rhs whose bindings are normal and normalizes bottom-up.
    fn inst_nf(&self, r: &Term, b: &Bindings) -> Result<Term> {
        match r.kind() {
            Kind::Var(v) => Ok(b.get(v).cloned().unwrap_or_else(|| r.clone())),
            Kind::App(a) => {
                if r.is_ground() {
                    return self.nf(r);
                }
                let sig = self.ct.sig();
                let args = r.args().iter().map(|x| self.inst_nf(x, b)).collect::<Result<Vec<_>>>()?;
                self.reduce_root(sig.app(a.sym, args))
            }
        }
    }

    fn step_at(&self, t: &Term, path: &mut Vec<usize>) -> Option<(Term, usize)> {
        let sig = self.ct.sig();
        if t.is_var() {
            return None;
        }
        let args = t.args();
        for (i, x) in args.iter().enumerate() {
            path.push(i);
            if let Some((nx, r)) = self.step_at(x, path) {
                let mut ys = args.clone();
                ys[i] = nx;
                return Some((sig.app(t.sym().unwrap(), ys), r));
            }
            path.pop();
        }
        let (i, b) = self.first_match(t)?;
        let rhs = b.to_subst().apply(sig, &self.ct.rules[i].rhs);
        Some((rhs, i))
    }
}

pub fn normalize(t: &Term, ct: &CompiledTheory) -> Result<Term> {
    normalize_stats(t, ct).map(|(t, _)| t)
}

pub fn normalize_stats(t: &Term, ct: &CompiledTheory) -> Result<(Term, Stats)> {
    let nf = Nf { ct, cx: Cx::new(ct.sig()), steps: Cell::new(0) };
    let r = nf.nf(t)?;
    Ok((r, Stats { steps: nf.steps.get(), match_attempts: nf.cx.attempts.get() }))
}

/// One innermost-leftmost step: the result, the rule label and the redex position.
pub fn rewrite_step(t: &Term, ct: &CompiledTheory) -> Option<(Term, String, Position)> {
    let nf = Nf { ct, cx: Cx::new(ct.sig()), steps: Cell::new(0) };
    let mut path = Vec::new();
    let (r, i) = nf.step_at(t, &mut path)?;
    Some((r, ct.rules[i].label.clone(), Position::at(path)))
}

/// Normalizes every binding of a substitution.
pub fn normalize_subst(s: &Subst, ct: &CompiledTheory) -> Result<Subst> {
    let mut out = Subst::new();
    for (v, t) in s.iter() {
        out.insert(v.clone(), normalize(t, ct)?);
    }
    Ok(out)
}
