//! Least general generalization modulo the axioms, and best matching terms.

use crate::error::{Error, Result};
use crate::signature::{Signature, SortId, SymId, Theory};
use crate::solver::matching::{matches_seq, Cx};
use crate::subst::{renaming_seq, Subst};
use crate::term::{fresh_var, Term};

/// Argument lists longer than this are paired greedily.
pub const AC_PAIRING_CAP: usize = 8;
const ALT_CAP: usize = 20_000;

#[derive(Clone, Debug)]
pub struct Generalizer {
    pub term: Term,
    pub left: Subst,
    pub right: Subst,
}

/// Pairs of subterms already generalized by a variable.
type Store = Vec<(Term, Term, Term)>;

struct Au<'a> {
    sig: &'a Signature,
}

impl<'a> Au<'a> {
    fn var_for(&self, a: &Term, b: &Term, st: &Store) -> Vec<(Term, Store)> {
        if let Some((_, _, v)) = st.iter().find(|(x, y, _)| x == a && y == b) {
            return vec![(v.clone(), st.clone())];
        }
        let (Some(sa), Some(sb)) = (a.sort(), b.sort()) else { return Vec::new() };
        let mut sorts = self.sig.sorts.lubs(sa, sb);
        if sorts.is_empty() {
            sorts.push(self.sig.sorts.top(sa));
        }
        sorts
            .into_iter()
            .map(|s| {
                let v = Term::var(fresh_var("G", s, self.sig));
                let mut st2 = st.clone();
                st2.push((a.clone(), b.clone(), v.clone()));
                (v, st2)
            })
            .collect()
    }

    fn au(&self, a: &Term, b: &Term, st: &Store) -> Vec<(Term, Store)> {
        if a == b && a.is_ground() {
            return vec![(a.clone(), st.clone())];
        }
        let (fa, fb) = (a.sym(), b.sym());
        if let (Some(f), Some(g)) = (fa, fb) {
            if f == g {
                let ax = self.sig.axioms(f);
                if ax.is_ac() || (ax.assoc && ax.comm) {
                    return self.au_ac(f, &a.args(), &b.args(), st);
                }
                let xs = a.args();
                let ys = b.args();
                if xs.len() == ys.len() {
                    let mut out = self.au_list(f, &xs, &ys, st);
                    if ax.comm && xs.len() == 2 {
                        let swapped = vec![ys[1].clone(), ys[0].clone()];
                        out.extend(self.au_list(f, &xs, &swapped, st));
                    }
                    if !out.is_empty() {
                        return out;
                    }
                }
            } else {
                // an ACU side absorbs a non-variable other side as a one-element multiset
                for (h, flip) in [(f, false), (g, true)] {
                    let ax = self.sig.axioms(h);
                    if ax.assoc && ax.comm && ax.identity.is_some() {
                        let other = if flip { a } else { b };
                        let elems = self.as_elems(h, other);
                        let own = if flip { b.args() } else { a.args() };
                        let out = if flip { self.au_ac(h, &elems, &own, st) } else { self.au_ac(h, &own, &elems, st) };
                        if !out.is_empty() {
                            return out;
                        }
                    }
                }
            }
        }
        self.var_for(a, b, st)
    }

    fn as_elems(&self, f: SymId, t: &Term) -> Vec<Term> {
        match self.sig.identity_of(f) {
            Some(id) if t.sym() == Some(id.elem) && t.arity() == 0 => Vec::new(),
            _ => vec![t.clone()],
        }
    }

    fn au_list(&self, f: SymId, xs: &[Term], ys: &[Term], st: &Store) -> Vec<(Term, Store)> {
        let mut partial: Vec<(Vec<Term>, Store)> = vec![(Vec::new(), st.clone())];
        for (x, y) in xs.iter().zip(ys) {
            let mut next = Vec::new();
            for (args, s) in &partial {
                for (g, s2) in self.au(x, y, s) {
                    let mut a2 = args.clone();
                    a2.push(g);
                    next.push((a2, s2));
                    if next.len() > ALT_CAP {
                        break;
                    }
                }
            }
            partial = next;
        }
        partial
            .into_iter()
            .filter_map(|(args, s)| {
                let t = self.sig.app(f, args);
                t.sort().map(|_| (t, s))
            })
            .collect()
    }

    fn group(&self, f: SymId, xs: Vec<Term>) -> Term {
        match xs.len() {
            0 => self.sig.constant_sym(self.sig.identity_of(f).expect("identity").elem),
            1 => xs.into_iter().next().unwrap(),
            _ => self.sig.app(f, xs),
        }
    }

    fn au_ac(&self, f: SymId, xs: &[Term], ys: &[Term], st: &Store) -> Vec<(Term, Store)> {
        let unit = self.sig.identity_of(f).is_some();
        let mut out: Vec<(Term, Store)> = Vec::new();
        if xs.len() > AC_PAIRING_CAP || ys.len() > AC_PAIRING_CAP {
            self.greedy(f, xs, ys, st, unit, &mut out);
            return out;
        }
        let mut used = vec![false; ys.len()];
        let mut left = Vec::new();
        self.pairings(f, xs, ys, 0, &mut used, &mut left, Vec::new(), st.clone(), unit, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn pairings(
        &self,
        f: SymId,
        xs: &[Term],
        ys: &[Term],
        i: usize,
        used: &mut Vec<bool>,
        left: &mut Vec<Term>,
        gens: Vec<Term>,
        st: Store,
        unit: bool,
        out: &mut Vec<(Term, Store)>,
    ) {
        if out.len() > ALT_CAP {
            return;
        }
        if i == xs.len() {
            let rest: Vec<Term> = ys.iter().zip(used.iter()).filter(|(_, u)| !**u).map(|(y, _)| y.clone()).collect();
            self.close(f, gens, left.clone(), rest, st, unit, out);
            return;
        }
        left.push(xs[i].clone());
        self.pairings(f, xs, ys, i + 1, used, left, gens.clone(), st.clone(), unit, out);
        left.pop();
        for j in 0..ys.len() {
            if used[j] || (j > 0 && ys[j] == ys[j - 1] && !used[j - 1]) {
                continue;
            }
            used[j] = true;
            for (g, s2) in self.au(&xs[i], &ys[j], &st) {
                let mut g2 = gens.clone();
                g2.push(g);
                self.pairings(f, xs, ys, i + 1, used, left, g2, s2, unit, out);
            }
            used[j] = false;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn close(&self, f: SymId, mut gens: Vec<Term>, la: Vec<Term>, lb: Vec<Term>, st: Store, unit: bool, out: &mut Vec<(Term, Store)>) {
        let mut stores = vec![st];
        if !la.is_empty() || !lb.is_empty() {
            if !unit && (la.is_empty() || lb.is_empty()) {
                return;
            }
            let a = self.group(f, la);
            let b = self.group(f, lb);
            let alts = self.var_for(&a, &b, &stores[0]);
            let mut all = Vec::new();
            for (v, s) in alts {
                let mut g2 = gens.clone();
                g2.push(v);
                all.push((g2, s));
            }
            for (g2, s) in all {
                if g2.len() >= 2 || unit {
                    let t = self.group(f, g2);
                    if t.sort().is_some() {
                        out.push((t, s));
                    }
                }
            }
            return;
        }
        if gens.is_empty() {
            return;
        }
        let t = self.group(f, std::mem::take(&mut gens));
        if t.sort().is_some() {
            out.push((t, stores.pop().unwrap()));
        }
    }

    fn greedy(&self, f: SymId, xs: &[Term], ys: &[Term], st: &Store, unit: bool, out: &mut Vec<(Term, Store)>) {
        let mut used = vec![false; ys.len()];
        let mut gens = Vec::new();
        let mut la = Vec::new();
        let mut s = st.clone();
        for x in xs {
            let j = (0..ys.len()).find(|&j| !used[j] && ys[j].sym() == x.sym() && !x.is_var());
            match j {
                Some(j) => {
                    used[j] = true;
                    let (g, s2) = self.au(x, &ys[j], &s).into_iter().next().expect("generalization");
                    gens.push(g);
                    s = s2;
                }
                None => la.push(x.clone()),
            }
        }
        let lb = ys.iter().zip(&used).filter(|(_, u)| !**u).map(|(y, _)| y.clone()).collect();
        self.close(f, gens, la, lb, s, unit, out);
    }
}

fn shape_of(t: &Term) -> String {
    let mut s = String::new();
    crate::narrow::shape(t, &mut s);
    s
}

/// A minimal complete set of least general generalizations of `t1` and `t2`.
pub fn lgg_modulo(t1: &Term, t2: &Term, th: &Theory) -> Vec<Generalizer> {
    lgg_sig(t1, t2, &th.sig)
}

pub fn lgg_sig(t1: &Term, t2: &Term, sig: &Signature) -> Vec<Generalizer> {
    if t1 == t2 {
        return vec![Generalizer { term: t1.clone(), left: Subst::new(), right: Subst::new() }];
    }
    let au = Au { sig };
    let mut gens: Vec<Generalizer> = Vec::new();
    for (w, st) in au.au(t1, t2, &Vec::new()) {
        let wv = w.vars();
        let mut left = Subst::new();
        let mut right = Subst::new();
        for (a, b, v) in &st {
            let x = v.as_var().unwrap().clone();
            if wv.contains(&x) {
                left.insert(x.clone(), a.clone());
                right.insert(x, b.clone());
            }
        }
        if left.apply(sig, &w) != *t1 || right.apply(sig, &w) != *t2 {
            debug_assert!(false, "generalizer does not instantiate back");
            continue;
        }
        gens.push(Generalizer { term: w, left, right });
    }
    gens.sort_by_cached_key(|g| shape_of(&g.term));
    let terms: Vec<Term> = gens.iter().map(|g| g.term.clone()).collect();
    let keep = least_general(sig, &terms);
    gens.into_iter().zip(keep).filter(|(_, k)| *k).map(|(g, _)| g).collect()
}

/// Flags the least general elements, keeping one representative per renaming class.
fn least_general(sig: &Signature, ws: &[Term]) -> Vec<bool> {
    let cx = Cx::new(sig);
    let n = ws.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !keep[i] || !keep[j] {
                continue;
            }
            // drop i when it is strictly more general than j, or a renaming of an earlier j
            if matches_seq(&cx, std::slice::from_ref(&ws[i]), std::slice::from_ref(&ws[j])) {
                let back = matches_seq(&cx, std::slice::from_ref(&ws[j]), std::slice::from_ref(&ws[i]));
                if !back || (j < i && renaming_seq(sig, std::slice::from_ref(&ws[j]), std::slice::from_ref(&ws[i])).is_some()) {
                    keep[i] = false;
                }
            }
        }
    }
    keep
}

/// The generalizer sets `W_i`, their least general union `M`, and the selected `u_i`.
#[derive(Clone, Debug)]
pub struct BmtReport {
    pub w: Vec<Vec<Term>>,
    pub m: Vec<Term>,
    pub selected: Vec<Term>,
}

pub fn bmt_report(us: &[Term], t: &Term, th: &Theory) -> Result<BmtReport> {
    if us.is_empty() {
        return Err(Error::EmptyInput("no terms to generalize".into()));
    }
    let sig = &*th.sig;
    let w: Vec<Vec<Term>> = us.iter().map(|u| lgg_modulo(u, t, th).into_iter().map(|g| g.term).collect()).collect();
    let all: Vec<Term> = w.iter().flatten().cloned().collect();
    let keep = least_general(sig, &all);
    let m: Vec<Term> = all.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| x.clone()).collect();
    let in_m = |x: &Term| m.iter().any(|y| renaming_seq(sig, std::slice::from_ref(y), std::slice::from_ref(x)).is_some());
    let selected = us.iter().zip(&w).filter(|(_, ws)| ws.iter().any(in_m)).map(|(u, _)| u.clone()).collect();
    Ok(BmtReport { w, m, selected })
}

/// Best matching terms of `us` for `t`.
pub fn bmt(us: &[Term], t: &Term, th: &Theory) -> Result<Vec<Term>> {
    bmt_report(us, t, th).map(|r| r.selected)
}

/// Sort assigned to a generalization of two sorts.
pub fn generalization_sorts(sig: &Signature, a: SortId, b: SortId) -> Vec<SortId> {
    let l = sig.sorts.lubs(a, b);
    if l.is_empty() {
        vec![sig.sorts.top(a)]
    } else {
        l
    }
}
