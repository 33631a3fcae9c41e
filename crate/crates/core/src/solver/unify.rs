//! Order-sorted unification modulo free, C, AC and ACU symbols.

use crate::error::{Error, Result};
use crate::signature::{Signature, SortId, SymId};
use crate::solver::dioph::{basis, BASIS_CAP};
use crate::solver::matching::{match_all_seq, Cx};
use crate::subst::Subst;
use crate::term::{fresh_var, AcArgs, Term, Var};

const STEP_BUDGET: u64 = 2_000_000;
const SORT_COMBO_CAP: usize = 200_000;

#[derive(Clone)]
struct St {
    sol: Subst,
    eqs: Vec<(Term, Term)>,
}

struct Solver<'a> {
    sig: &'a Signature,
    steps: u64,
    out: Vec<Subst>,
}

impl<'a> Solver<'a> {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > STEP_BUDGET {
            return Err(Error::SolverLimit("unification step budget exhausted".into()));
        }
        Ok(())
    }

    fn bind(&self, st: &mut St, x: &Var, t: Term) {
        let one = Subst::from_pairs([(x.clone(), t.clone())]);
        st.sol = st.sol.compose(self.sig, &one);
        st.sol.insert(x.clone(), t);
    }

    fn is_identity(&self, f: SymId, t: &Term) -> bool {
        self.sig.identity_of(f).is_some_and(|id| t.sym() == Some(id.elem) && t.arity() == 0)
    }

    fn multiset(&self, f: SymId, t: &Term) -> AcArgs {
        if t.sym() == Some(f) {
            if let Some(a) = t.ac_args() {
                return a.clone();
            }
        }
        let mut a = AcArgs::new();
        if !self.is_identity(f, t) {
            a.insert(t.clone(), 1);
        }
        a
    }

    fn solve(&mut self, mut st: St) -> Result<()> {
        while let Some((s, t)) = st.eqs.pop() {
            self.tick()?;
            let s = st.sol.apply(self.sig, &s);
            let t = st.sol.apply(self.sig, &t);
            if s == t {
                continue;
            }
            if let Some(x) = s.as_var() {
                if !self.var_eq(&mut st, x, &t)? {
                    return Ok(());
                }
                continue;
            }
            if let Some(y) = t.as_var() {
                if !self.var_eq(&mut st, y, &s)? {
                    return Ok(());
                }
                continue;
            }
            let fs = s.sym().unwrap();
            let ft = t.sym().unwrap();
            if fs == ft {
                let ax = self.sig.axioms(fs);
                if ax.is_ac() {
                    let (a, b) = (self.multiset(fs, &s), self.multiset(fs, &t));
                    return self.ac(st, fs, a, b);
                }
                if ax.assoc {
                    return Err(Error::UnsupportedAxioms(format!(
                        "associative operator `{}` without commutativity",
                        self.sig.sym(fs).name
                    )));
                }
                let xs = s.args();
                let ys = t.args();
                if ax.comm {
                    let mut alt = st.clone();
                    st.eqs.push((xs[0].clone(), ys[0].clone()));
                    st.eqs.push((xs[1].clone(), ys[1].clone()));
                    alt.eqs.push((xs[0].clone(), ys[1].clone()));
                    alt.eqs.push((xs[1].clone(), ys[0].clone()));
                    self.solve(st)?;
                    return self.solve(alt);
                }
                for (x, y) in xs.into_iter().zip(ys) {
                    st.eqs.push((x, y));
                }
                continue;
            }
            let acu = |f: SymId| self.sig.axioms(f).is_ac() && self.sig.identity_of(f).is_some();
            if acu(fs) {
                let (a, b) = (self.multiset(fs, &s), self.multiset(fs, &t));
                return self.ac(st, fs, a, b);
            }
            if acu(ft) {
                let (a, b) = (self.multiset(ft, &s), self.multiset(ft, &t));
                return self.ac(st, ft, a, b);
            }
            return Ok(());
        }
        self.out.push(st.sol);
        Ok(())
    }

    /// Handles `x =? t`; false when the branch fails.
    fn var_eq(&mut self, st: &mut St, x: &Var, t: &Term) -> Result<bool> {
        if let Some(y) = t.as_var() {
            // orient towards the smaller sort so most bindings are already well sorted
            if self.sig.sort_leq(y.sort, x.sort) {
                self.bind(st, x, t.clone());
            } else {
                self.bind(st, y, Term::var(x.clone()));
            }
            return Ok(true);
        }
        if t.occurs(x) {
            let f = t.sym().unwrap();
            let direct = t.ac_args().is_some_and(|a| a.count(&Term::var(x.clone())) > 0);
            if direct && self.sig.identity_of(f).is_some() {
                let mut a = AcArgs::new();
                a.insert(Term::var(x.clone()), 1);
                let b = self.multiset(f, t);
                let st2 = std::mem::replace(st, St { sol: Subst::new(), eqs: Vec::new() });
                self.ac(st2, f, a, b)?;
                // the AC branch continued the search itself
                return Ok(false);
            }
            return Ok(false);
        }
        self.bind(st, x, t.clone());
        Ok(true)
    }

    fn ac(&mut self, st: St, f: SymId, mut a: AcArgs, mut b: AcArgs) -> Result<()> {
        self.tick()?;
        let common: Vec<(Term, u32)> =
            a.iter().filter_map(|(e, c)| Some((e.clone(), c.min(b.count(e)))).filter(|(_, d)| *d > 0)).collect();
        for (e, d) in common {
            a.remove(&e, d);
            b.remove(&e, d);
        }
        let id = self.sig.identity_of(f);
        if a.is_empty() && b.is_empty() {
            return self.solve(st);
        }
        if a.is_empty() || b.is_empty() {
            let Some(id) = id else { return Ok(()) };
            let e = self.sig.constant_sym(id.elem);
            let mut st = st;
            for (x, _) in a.iter().chain(b.iter()) {
                if !x.is_var() {
                    return Ok(());
                }
                st.eqs.push((x.clone(), e.clone()));
            }
            return self.solve(st);
        }
        let left: Vec<(Term, u32)> = a.iter().map(|(t, c)| (t.clone(), c)).collect();
        let right: Vec<(Term, u32)> = b.iter().map(|(t, c)| (t.clone(), c)).collect();
        let elems: Vec<Term> = left.iter().chain(&right).map(|(t, _)| t.clone()).collect();
        let ca: Vec<u64> = left.iter().map(|(_, c)| *c as u64).collect();
        let cb: Vec<u64> = right.iter().map(|(_, c)| *c as u64).collect();
        let alien: Vec<bool> = elems.iter().map(|t| !t.is_var()).collect();
        let vecs: Vec<Vec<u64>> = basis(&ca, &cb, BASIS_CAP)?
            .into_iter()
            .filter(|v| v.iter().zip(&alien).all(|(&x, &al)| !al || x <= 1))
            .collect();
        let (with_alien, plain): (Vec<Vec<u64>>, Vec<Vec<u64>>) =
            vecs.into_iter().partition(|v| v.iter().zip(&alien).any(|(&x, &al)| al && x > 0));
        let aliens: Vec<usize> = (0..elems.len()).filter(|&i| alien[i]).collect();
        let mut covers: Vec<Vec<usize>> = Vec::new();
        exact_cover(&with_alien, &aliens, &mut vec![false; elems.len()], &mut Vec::new(), &mut covers);
        let top = self.sig.assoc_top(f);
        let var_idx: Vec<usize> = (0..elems.len()).filter(|&i| !alien[i]).collect();
        for cover in covers {
            let chosen_alien: Vec<&Vec<u64>> = cover.iter().map(|&k| &with_alien[k]).collect();
            let plain_sets: Vec<Vec<usize>> = if id.is_some() {
                vec![(0..plain.len()).collect()]
            } else {
                if plain.len() > 16 {
                    return Err(Error::SolverLimit("too many AC basis combinations".into()));
                }
                let mut sets = Vec::new();
                for mask in 0u32..(1 << plain.len()) {
                    let set: Vec<usize> = (0..plain.len()).filter(|i| mask & (1 << i) != 0).collect();
                    let covered = var_idx.iter().all(|&vi| {
                        chosen_alien.iter().any(|v| v[vi] > 0) || set.iter().any(|&k| plain[k][vi] > 0)
                    });
                    if covered {
                        sets.push(set);
                    }
                }
                sets
            };
            for set in plain_sets {
                self.tick()?;
                let mut st2 = st.clone();
                // one term per chosen vector: the alien it names or a fresh variable
                let mut reps: Vec<(Term, &Vec<u64>)> = Vec::new();
                for v in &chosen_alien {
                    let al: Vec<usize> = aliens.iter().copied().filter(|&i| v[i] > 0).collect();
                    let r = elems[al[0]].clone();
                    for &o in &al[1..] {
                        st2.eqs.push((r.clone(), elems[o].clone()));
                    }
                    reps.push((r, v));
                }
                for &k in &set {
                    let z = Term::var(fresh_var("Z", top, self.sig));
                    reps.push((z, &plain[k]));
                }
                for &vi in &var_idx {
                    let mut m = AcArgs::new();
                    for (r, v) in &reps {
                        if v[vi] > 0 {
                            m.insert(r.clone(), v[vi] as u32);
                        }
                    }
                    let val = if m.is_empty() {
                        match id {
                            Some(id) => self.sig.constant_sym(id.elem),
                            None => continue,
                        }
                    } else {
                        self.sig.ac_from(f, m)
                    };
                    st2.eqs.push((elems[vi].clone(), val));
                }
                self.solve(st2)?;
            }
        }
        Ok(())
    }
}

fn exact_cover(vecs: &[Vec<u64>], aliens: &[usize], covered: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let Some(&next) = aliens.iter().find(|&&i| !covered[i]) else {
        out.push(cur.clone());
        return;
    };
    for (k, v) in vecs.iter().enumerate() {
        if v[next] == 0 {
            continue;
        }
        if aliens.iter().any(|&i| v[i] > 0 && covered[i]) {
            continue;
        }
        for &i in aliens {
            if v[i] > 0 {
                covered[i] = true;
            }
        }
        cur.push(k);
        exact_cover(vecs, aliens, covered, cur, out);
        cur.pop();
        for &i in aliens {
            if v[i] > 0 {
                covered[i] = false;
            }
        }
    }
}

fn sort_valid(sig: &Signature, s: &Subst) -> bool {
    s.iter().all(|(v, t)| t.sort().is_some_and(|ts| sig.sort_leq(ts, v.sort)))
}

/// Lowers range variables until every binding is well sorted; keeps the maximal choices.
fn refine(sig: &Signature, sigma: &Subst, pv: &[Var]) -> Result<Vec<Subst>> {
    if sort_valid(sig, sigma) {
        return Ok(vec![sigma.clone()]);
    }
    let mut cand: Vec<Var> = Vec::new();
    for (v, t) in sigma.iter() {
        if !t.sort().is_some_and(|ts| sig.sort_leq(ts, v.sort)) {
            for w in t.vars() {
                if !cand.contains(&w) {
                    cand.push(w);
                }
            }
        }
    }
    let options: Vec<Vec<SortId>> = cand.iter().map(|v| sig.sorts.below(v.sort)).collect();
    let total: usize = options.iter().map(|o| o.len()).try_fold(1usize, |a, b| a.checked_mul(b)).unwrap_or(usize::MAX);
    if total > SORT_COMBO_CAP {
        return Err(Error::SolverLimit("too many sort assignments".into()));
    }
    let mut valid: Vec<(Vec<SortId>, Subst)> = Vec::new();
    let mut choice = vec![SortId(0); cand.len()];
    fn rec(
        sig: &Signature,
        sigma: &Subst,
        pv: &[Var],
        cand: &[Var],
        options: &[Vec<SortId>],
        i: usize,
        choice: &mut Vec<SortId>,
        valid: &mut Vec<(Vec<SortId>, Subst)>,
    ) {
        if i == cand.len() {
            let mut rho = Subst::new();
            for (v, &s) in cand.iter().zip(choice.iter()) {
                if s != v.sort {
                    rho.insert(v.clone(), Term::var(fresh_var(&v.name, s, sig)));
                }
            }
            let mut s2 = sigma.map_terms(|t| rho.apply(sig, t));
            for (v, t) in rho.iter() {
                if pv.contains(v) && s2.get(v).is_none() {
                    s2.insert(v.clone(), t.clone());
                }
            }
            if sort_valid(sig, &s2) {
                valid.push((choice.clone(), s2));
            }
            return;
        }
        for &s in &options[i] {
            choice[i] = s;
            rec(sig, sigma, pv, cand, options, i + 1, choice, valid);
        }
    }
    rec(sig, sigma, pv, &cand, &options, 0, &mut choice, &mut valid);
    let maximal: Vec<Subst> = valid
        .iter()
        .filter(|(c, _)| {
            !valid.iter().any(|(d, _)| d != c && c.iter().zip(d).all(|(x, y)| sig.sort_leq(*x, *y)))
        })
        .map(|(_, s)| s.clone())
        .collect();
    Ok(maximal)
}

fn images(sig: &Signature, s: &Subst, pv: &[Var]) -> Vec<Term> {
    pv.iter().map(|v| s.apply(sig, &Term::var(v.clone()))).collect()
}

/// True when `general` instantiates to `special` on the problem variables.
pub fn more_general(sig: &Signature, general: &Subst, special: &Subst, pv: &[Var]) -> bool {
    let cx = Cx::new(sig);
    let p = images(sig, general, pv);
    let s = images(sig, special, pv);
    !match_all_seq(&cx, &p, &s).is_empty()
}

/// Drops solutions that are instances of others, keeping the first of equivalent ones.
pub fn minimize(sig: &Signature, sols: Vec<Subst>, pv: &[Var]) -> Vec<Subst> {
    let mut keep: Vec<Subst> = Vec::new();
    'outer: for s in sols {
        for k in &keep {
            if more_general(sig, k, &s, pv) {
                continue 'outer;
            }
        }
        keep.retain(|k| !more_general(sig, &s, k, pv));
        keep.push(s);
    }
    keep
}

/// Complete set of unifiers of all pairs simultaneously.
pub fn unify_seq(sig: &Signature, pairs: &[(Term, Term)]) -> Result<Vec<Subst>> {
    let mut pv: Vec<Var> = Vec::new();
    for (a, b) in pairs {
        for v in a.vars().into_iter().chain(b.vars()) {
            if !pv.contains(&v) {
                pv.push(v);
            }
        }
    }
    let mut solver = Solver { sig, steps: 0, out: Vec::new() };
    let mut eqs: Vec<(Term, Term)> = pairs.to_vec();
    eqs.reverse();
    solver.solve(St { sol: Subst::new(), eqs })?;
    let mut all = Vec::new();
    for s in solver.out {
        let s = s.restrict(&pv);
        for r in refine(sig, &s, &pv)? {
            all.push(r.restrict(&pv));
        }
    }
    let mut sols = minimize(sig, all, &pv);
    sols.sort_by_cached_key(|s| images(sig, s, &pv));
    if cfg!(debug_assertions) {
        for s in &sols {
            for (a, b) in pairs {
                debug_assert!(s.apply(sig, a) == s.apply(sig, b), "unsound unifier {s:?}");
            }
        }
    }
    Ok(sols)
}

pub fn unify_modulo(sig: &Signature, t1: &Term, t2: &Term) -> Result<Vec<Subst>> {
    unify_seq(sig, &[(t1.clone(), t2.clone())])
}

/// Cheap necessary condition for unifiability.
pub fn may_unify(sig: &Signature, a: &Term, b: &Term) -> bool {
    let (Some(fa), Some(fb)) = (a.sym(), b.sym()) else { return true };
    if fa != fb {
        let loose = |f: SymId| {
            let ax = sig.axioms(f);
            ax.identity.is_some()
        };
        return loose(fa) || loose(fb);
    }
    let ax = sig.axioms(fa);
    if !ax.is_free() {
        return true;
    }
    let (Some(xs), Some(ys)) = (a.list_args(), b.list_args()) else { return true };
    xs.iter().zip(ys).all(|(x, y)| may_unify(sig, x, y))
}
