//! Substitutions.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::signature::Signature;
use crate::solver::matching::{match_all_seq, Cx};
use crate::term::{fresh_var, AcArgs, Args, Kind, Term, Var};

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, Term)>>(it: I) -> Subst {
        Subst { map: it.into_iter().collect() }
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.map.insert(v, t);
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn remove(&mut self, v: &Var) -> Option<Term> {
        self.map.remove(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> Vec<Var> {
        self.map.keys().cloned().collect()
    }

    /// Checks that every binding respects the variable's sort.
    pub fn check_sorts(&self, sig: &Signature) -> Result<()> {
        for (v, t) in &self.map {
            match t.sort() {
                Some(s) if sig.sort_leq(s, v.sort) => {}
                _ => return Err(Error::SortViolation(format!("{} cannot hold {:?}", v.name, t))),
            }
        }
        Ok(())
    }

    pub fn apply(&self, sig: &Signature, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        apply_map(sig, &|v| self.map.get(v).cloned(), t)
    }

    /// `apply(compose(a, b), t) == apply(b, apply(a, t))`.
    pub fn compose(&self, sig: &Signature, other: &Subst) -> Subst {
        let mut map: BTreeMap<Var, Term> = self.map.iter().map(|(v, t)| (v.clone(), other.apply(sig, t))).collect();
        for (v, t) in &other.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        map.retain(|v, t| t.as_var() != Some(v));
        Subst { map }
    }

    pub fn restrict(&self, vars: &[Var]) -> Subst {
        Subst { map: self.map.iter().filter(|(v, _)| vars.contains(v)).map(|(v, t)| (v.clone(), t.clone())).collect() }
    }

    /// True when the substitution is an injective variable-to-variable map.
    pub fn is_renaming(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.map.values().all(|t| t.as_var().is_some_and(|w| seen.insert(w.clone())))
    }

    pub fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Subst {
        Subst { map: self.map.iter().map(|(v, t)| (v.clone(), f(t))).collect() }
    }
}

pub fn apply_map(sig: &Signature, f: &dyn Fn(&Var) -> Option<Term>, t: &Term) -> Term {
    if t.is_ground() {
        return t.clone();
    }
    match t.kind() {
        Kind::Var(v) => f(v).unwrap_or_else(|| t.clone()),
        Kind::App(a) => match &a.args {
            Args::List(xs) => {
                let ys: Vec<Term> = xs.iter().map(|x| apply_map(sig, f, x)).collect();
                sig.with_args(t, ys)
            }
            Args::Ac(m) => {
                let mut changes: Vec<(Term, Term, u32)> = Vec::new();
                for (e, c) in m.iter() {
                    if e.is_ground() {
                        continue;
                    }
                    let ne = apply_map(sig, f, e);
                    if !ne.ptr_eq(e) {
                        changes.push((e.clone(), ne, c));
                    }
                }
                if changes.is_empty() {
                    return t.clone();
                }
                let mut acc: AcArgs = m.clone();
                for (e, _, c) in &changes {
                    acc.remove(e, *c);
                }
                for (_, ne, c) in changes {
                    sig.ac_push(a.sym, &mut acc, ne, c);
                }
                sig.ac_from(a.sym, acc)
            }
        },
    }
}

/// Variant of `t` over globally fresh variables, with the renaming used.
pub fn fresh_rename(sig: &Signature, t: &Term) -> (Term, Subst) {
    let s = Subst::from_pairs(t.vars().into_iter().map(|v| {
        let w = fresh_var(&v.name, v.sort, sig);
        (v, Term::var(w))
    }));
    (s.apply(sig, t), s)
}

/// A renaming `r` with `t1 == apply(r, t2)`, if one exists.
pub fn eq_modulo_renaming(sig: &Signature, t1: &Term, t2: &Term) -> Option<Subst> {
    renaming_seq(sig, std::slice::from_ref(t2), std::slice::from_ref(t1))
}

/// Renaming `r` with `apply(r, pats[i]) == subjects[i]` for all i.
pub fn renaming_seq(sig: &Signature, pats: &[Term], subjects: &[Term]) -> Option<Subst> {
    if pats.len() != subjects.len() {
        return None;
    }
    if pats.iter().zip(subjects).any(|(p, s)| p.size() != s.size() || p.sort() != s.sort()) {
        return None;
    }
    let cx = Cx::new(sig);
    let nv = {
        let mut all = Vec::new();
        for p in pats {
            for v in p.vars() {
                if !all.contains(&v) {
                    all.push(v);
                }
            }
        }
        all.len()
    };
    match_all_seq(&cx, pats, subjects)
        .into_iter()
        .find(|r| r.is_renaming() && r.len() == nv && r.iter().all(|(v, t)| t.as_var().is_some_and(|w| w.sort == v.sort)))
}

impl fmt::Debug for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -> {:?}", v.name, t)?;
        }
        write!(f, "}}")
    }
}
