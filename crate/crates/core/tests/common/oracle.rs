//! Brute-force references for matching and unification over two five-symbol
//! signatures: `a b g h(comm) _+_(AC)` and `e a g h(comm) _*_(ACU, id e)`.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use eqnpe::solver::matching::{match_all_seq, Cx};
use eqnpe::solver::unify::{more_general, unify_modulo};
use eqnpe::solver::match_modulo;
use eqnpe::syntax::{parse_module, show, Module};
use eqnpe::{Signature, Subst, SymId, Term, Var};

pub const AC_SIG: &str = "fmod ORACLE-AC is sort S . ops a b : -> S . op g : S -> S . op h : S S -> S [comm] . \
     op _+_ : S S -> S [assoc comm] . vars X Y Z : S . endfm";
pub const ACU_SIG: &str = "fmod ORACLE-ACU is sort S . ops e a : -> S . op g : S -> S . op h : S S -> S [comm] . \
     op _*_ : S S -> S [assoc comm id: e] . vars X Y Z : S . endfm";

pub struct Gen<'a> {
    sig: &'a Signature,
    consts: Vec<Term>,
    vars: Vec<Term>,
    g: SymId,
    h: SymId,
    ac: SymId,
}

impl<'a> Gen<'a> {
    pub fn new(m: &'a Module) -> Gen<'a> {
        let sig = m.sig();
        let ac = sig.symbols().find(|(_, s)| s.axioms.assoc).unwrap().0;
        let consts = sig.symbols().filter(|(_, s)| s.arity == 0).map(|(i, _)| sig.constant_sym(i)).collect();
        let vars = ["X", "Y", "Z"].iter().map(|v| m.parse_term(v).unwrap()).collect();
        Gen { sig, consts, vars, g: sig.lookup("g", 1).unwrap(), h: sig.lookup("h", 2).unwrap(), ac }
    }

    /// Depth at most `depth`; AC children are never AC-rooted, so arity stays at most 4.
    pub fn term(&self, rng: &mut StdRng, depth: usize, with_vars: bool) -> Term {
        if depth == 0 || rng.gen_bool(0.3) {
            if with_vars && rng.gen_bool(0.5) {
                return self.vars[rng.gen_range(0..self.vars.len())].clone();
            }
            return self.consts[rng.gen_range(0..self.consts.len())].clone();
        }
        match rng.gen_range(0..3) {
            0 => self.sig.app(self.g, vec![self.term(rng, depth - 1, with_vars)]),
            1 => self.sig.app(self.h, vec![self.term(rng, depth - 1, with_vars), self.term(rng, depth - 1, with_vars)]),
            _ => {
                let n = rng.gen_range(2..=4);
                let mut xs = Vec::new();
                while xs.len() < n {
                    let t = self.term(rng, depth - 1, with_vars);
                    if t.sym() != Some(self.ac) {
                        xs.push(t);
                    }
                }
                self.sig.app(self.ac, xs)
            }
        }
    }

    /// Every ground term of depth at most one, AC arity at most 3.
    pub fn ground_universe(&self) -> Vec<Term> {
        let mut out = self.consts.clone();
        for c in &self.consts {
            out.push(self.sig.app(self.g, vec![c.clone()]));
        }
        for (i, c) in self.consts.iter().enumerate() {
            for d in &self.consts[i..] {
                out.push(self.sig.app(self.h, vec![c.clone(), d.clone()]));
            }
        }
        for n in 2..=3 {
            for combo in multisets(self.consts.len(), n) {
                out.push(self.sig.app(self.ac, combo.iter().map(|&i| self.consts[i].clone()).collect()));
            }
        }
        out.sort_by_key(|t| show(self.sig, t));
        out.dedup();
        out
    }
}

fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Every term a matcher could bind: subterms, AC sub-multisets, the identity.
fn binding_universe(sig: &Signature, s: &Term, out: &mut Vec<Term>) {
    if !out.contains(s) {
        out.push(s.clone());
    }
    if let (Some(f), Some(ac)) = (s.sym(), s.ac_args()) {
        let elems: Vec<Term> = ac.to_vec();
        let n = elems.len();
        for mask in 1u32..(1 << n) {
            let pick: Vec<Term> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| elems[i].clone()).collect();
            let t = if pick.len() == 1 { pick[0].clone() } else { sig.app(f, pick) };
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    for a in s.args() {
        binding_universe(sig, &a, out);
    }
}

fn assignments(vars: &[Var], universe: &[Term], f: &mut dyn FnMut(&Subst)) {
    fn rec(vars: &[Var], universe: &[Term], i: usize, cur: &mut Subst, f: &mut dyn FnMut(&Subst)) {
        if i == vars.len() {
            f(cur);
            return;
        }
        for t in universe {
            cur.insert(vars[i].clone(), t.clone());
            rec(vars, universe, i + 1, cur, f);
        }
        cur.remove(&vars[i]);
    }
    rec(vars, universe, 0, &mut Subst::new(), f);
}

fn images(sig: &Signature, s: &Subst, vs: &[Var]) -> Vec<Term> {
    vs.iter().map(|v| s.apply(sig, &Term::var(v.clone()))).collect()
}

#[derive(Debug, Default)]
pub struct OracleReport {
    pub match_problems: usize,
    pub unify_problems: usize,
    pub brute_solutions: usize,
    pub failures: Vec<String>,
    pub secs: f64,
}

/// Sound and complete matching against the enumerated matchers.
pub fn check_matching(m: &Module, n: usize, seed: u64, rep: &mut OracleReport) {
    let sig = m.sig();
    let gen = Gen::new(m);
    let mut rng = StdRng::seed_from_u64(seed);
    let gu = gen.ground_universe();
    for _ in 0..n {
        let p = gen.term(&mut rng, 2, true);
        let s = if rng.gen_bool(0.6) {
            let sub = Subst::from_pairs(p.vars().into_iter().map(|v| (v, gu[rng.gen_range(0..gu.len())].clone())));
            sub.apply(sig, &p)
        } else {
            gen.term(&mut rng, 2, false)
        };
        rep.match_problems += 1;
        let vs = p.vars();
        let got: Vec<Vec<Term>> = match_modulo(sig, &p, &s).iter().map(|x| images(sig, x, &vs)).collect();
        // identity elements can be bound wherever an identity-bearing operator sits in the pattern
        let mut uni: Vec<Term> = sig.symbols().filter_map(|(f, _)| sig.identity_of(f)).map(|i| sig.constant_sym(i.elem)).collect();
        uni.dedup();
        binding_universe(sig, &s, &mut uni);
        let mut brute: Vec<Vec<Term>> = Vec::new();
        assignments(&vs, &uni, &mut |x| {
            if x.apply(sig, &p) == s {
                brute.push(images(sig, x, &vs));
            }
        });
        rep.brute_solutions += brute.len();
        let pr = |x: &[Term]| x.iter().map(|t| show(sig, t)).collect::<Vec<_>>().join(", ");
        for b in &brute {
            if !got.contains(b) {
                rep.failures.push(format!("match {} <= {}: missing [{}]", show(sig, &p), show(sig, &s), pr(b)));
            }
        }
        for g in &got {
            if !brute.contains(g) {
                rep.failures.push(format!("match {} <= {}: unsound [{}]", show(sig, &p), show(sig, &s), pr(g)));
            }
        }
    }
}

/// Every ground unifier from the bounded universe is an instance of a returned one.
pub fn check_unification(m: &Module, n: usize, seed: u64, rep: &mut OracleReport) {
    let sig = m.sig();
    let gen = Gen::new(m);
    let mut rng = StdRng::seed_from_u64(seed);
    let gu = gen.ground_universe();
    let cx = Cx::new(sig);
    for _ in 0..n {
        let a = gen.term(&mut rng, 2, true);
        let b = gen.term(&mut rng, 2, true);
        let mut vs = a.vars();
        for v in b.vars() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        if vs.len() > 3 {
            continue;
        }
        rep.unify_problems += 1;
        let sols = match unify_modulo(sig, &a, &b) {
            Ok(s) => s,
            Err(e) => {
                rep.failures.push(format!("unify {} =? {}: {e}", show(sig, &a), show(sig, &b)));
                continue;
            }
        };
        for s in &sols {
            if s.apply(sig, &a) != s.apply(sig, &b) {
                rep.failures.push(format!("unify {} =? {}: unsound {s:?}", show(sig, &a), show(sig, &b)));
            }
        }
        for (i, x) in sols.iter().enumerate() {
            for (j, y) in sols.iter().enumerate() {
                if i != j && more_general(sig, x, y, &vs) && !more_general(sig, y, x, &vs) {
                    rep.failures.push(format!("unify {} =? {}: non-minimal set", show(sig, &a), show(sig, &b)));
                }
            }
        }
        let pats: Vec<Vec<Term>> = sols.iter().map(|s| images(sig, s, &vs)).collect();
        let mut missing = None;
        assignments(&vs, &gu, &mut |g| {
            if missing.is_some() || g.apply(sig, &a) != g.apply(sig, &b) {
                return;
            }
            rep.brute_solutions += 1;
            let target = images(sig, g, &vs);
            if !pats.iter().any(|p| !match_all_seq(&cx, p, &target).is_empty()) {
                missing = Some(target);
            }
        });
        if let Some(t) = missing {
            let shown: Vec<String> = t.iter().map(|x| show(sig, x)).collect();
            rep.failures.push(format!("unify {} =? {}: ground unifier [{}] not covered", show(sig, &a), show(sig, &b), shown.join(", ")));
        }
    }
}

/// The full suite used by the acceptance run and the solver tests.
pub fn run_all(match_n: usize, unify_n: usize) -> OracleReport {
    let t0 = Instant::now();
    let mut rep = OracleReport::default();
    for (i, src) in [AC_SIG, ACU_SIG].iter().enumerate() {
        let m = parse_module(src).unwrap();
        check_matching(&m, match_n, 11 + i as u64, &mut rep);
        check_unification(&m, unify_n, 23 + i as u64, &mut rep);
    }
    rep.secs = t0.elapsed().as_secs_f64();
    rep
}
