//! Sorts, operators and theories.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::term::Term;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub u32);

impl SortId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl SymId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Subsort partial order with its reflexive-transitive closure and one top per component.
#[derive(Clone, Debug)]
pub struct SortGraph {
    names: Vec<Arc<str>>,
    index: HashMap<Arc<str>, SortId>,
    edges: Vec<(SortId, SortId)>,
    leq: Vec<Vec<bool>>,
    comp: Vec<usize>,
    tops: Vec<SortId>,
    synthesized: Vec<bool>,
}

impl SortGraph {
    pub fn new(names: &[String], edges: &[(String, String)]) -> Result<SortGraph> {
        let mut g = SortGraph {
            names: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            leq: Vec::new(),
            comp: Vec::new(),
            tops: Vec::new(),
            synthesized: Vec::new(),
        };
        for n in names {
            if g.index.contains_key(n.as_str()) {
                return Err(Error::Signature(format!("sort `{n}` declared twice")));
            }
            g.push_sort(n, false);
        }
        for (lo, hi) in edges {
            let l = g.id(lo)?;
            let h = g.id(hi)?;
            if !g.edges.contains(&(l, h)) {
                g.edges.push((l, h));
            }
        }
        g.close()?;
        // one top per connected component
        let ncomp = g.comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut maxima: Vec<Vec<SortId>> = vec![Vec::new(); ncomp];
        for s in 0..g.names.len() {
            let sid = SortId(s as u32);
            let is_max = (0..g.names.len()).all(|t| t == s || !g.leq[s][t]);
            if is_max {
                maxima[g.comp[s]].push(sid);
            }
        }
        let mut added = false;
        for ms in maxima.iter() {
            if ms.len() > 1 {
                let mut parts: Vec<&str> = ms.iter().map(|m| &*g.names[m.idx()]).collect();
                parts.sort_unstable();
                let top = g.push_sort(&format!("Top@{}", parts.join("+")), true);
                for m in ms {
                    g.edges.push((*m, top));
                }
                added = true;
            }
        }
        if added {
            g.close()?;
        }
        g.tops = vec![SortId(0); g.names.len()];
        for s in 0..g.names.len() {
            let top = (0..g.names.len())
                .find(|&t| g.comp[t] == g.comp[s] && (0..g.names.len()).all(|u| g.comp[u] != g.comp[s] || g.leq[u][t]))
                .expect("component top");
            g.tops[s] = SortId(top as u32);
        }
        Ok(g)
    }

    fn push_sort(&mut self, name: &str, synth: bool) -> SortId {
        let id = SortId(self.names.len() as u32);
        let n: Arc<str> = Arc::from(name);
        self.names.push(n.clone());
        self.index.insert(n, id);
        self.synthesized.push(synth);
        id
    }

    fn close(&mut self) -> Result<()> {
        let n = self.names.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(l, h) in &self.edges {
            leq[l.idx()][h.idx()] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(Error::Signature(format!(
                        "subsort cycle between `{}` and `{}`",
                        self.names[i], self.names[j]
                    )));
                }
            }
        }
        // components via union-find over edges
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        for &(l, h) in &self.edges {
            let a = find(&mut parent, l.idx());
            let b = find(&mut parent, h.idx());
            if a != b {
                parent[a] = b;
            }
        }
        let mut ids = HashMap::new();
        self.comp = (0..n)
            .map(|i| {
                let r = find(&mut parent, i);
                let k = ids.len();
                *ids.entry(r).or_insert(k)
            })
            .collect();
        self.leq = leq;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<SortId> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownSort(name.to_string()))
    }

    pub fn name(&self, s: SortId) -> &Arc<str> {
        &self.names[s.idx()]
    }

    pub fn is_synthesized(&self, s: SortId) -> bool {
        self.synthesized[s.idx()]
    }

    pub fn leq(&self, a: SortId, b: SortId) -> bool {
        self.leq[a.idx()][b.idx()]
    }

    pub fn same_component(&self, a: SortId, b: SortId) -> bool {
        self.comp[a.idx()] == self.comp[b.idx()]
    }

    pub fn top(&self, s: SortId) -> SortId {
        self.tops[s.idx()]
    }

    pub fn ids(&self) -> impl Iterator<Item = SortId> {
        (0..self.names.len() as u32).map(SortId)
    }

    /// Declared (non-synthesized) subsort edges.
    pub fn edges(&self) -> impl Iterator<Item = (SortId, SortId)> + '_ {
        self.edges.iter().copied().filter(|(_, h)| !self.synthesized[h.idx()])
    }

    /// Every sort below `s`, `s` itself first, then by decreasing height.
    pub fn below(&self, s: SortId) -> Vec<SortId> {
        let mut v: Vec<SortId> = self.ids().filter(|&t| self.leq(t, s)).collect();
        v.sort_by_key(|&t| (std::cmp::Reverse(self.ids().filter(|&u| self.leq(u, t)).count()), t));
        v
    }

    /// Minimal common upper bounds.
    pub fn lubs(&self, a: SortId, b: SortId) -> Vec<SortId> {
        let ups: Vec<SortId> = self.ids().filter(|&u| self.leq(a, u) && self.leq(b, u)).collect();
        ups.iter().copied().filter(|&u| ups.iter().all(|&v| v == u || !self.leq(v, u))).collect()
    }

    /// Maximal common lower bounds.
    pub fn glbs(&self, a: SortId, b: SortId) -> Vec<SortId> {
        let downs: Vec<SortId> = self.ids().filter(|&u| self.leq(u, a) && self.leq(u, b)).collect();
        downs.iter().copied().filter(|&u| downs.iter().all(|&v| v == u || !self.leq(u, v))).collect()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Identity {
    pub elem: SymId,
    pub side: Side,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AxiomSet {
    pub assoc: bool,
    pub comm: bool,
    pub identity: Option<Identity>,
}

impl AxiomSet {
    pub fn is_ac(&self) -> bool {
        self.assoc && self.comm
    }

    pub fn is_free(&self) -> bool {
        !self.assoc && !self.comm && self.identity.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpSig {
    pub args: Vec<SortId>,
    pub result: SortId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tpl {
    Hole,
    Tok(String),
}

#[derive(Clone, Debug)]
pub struct Symbol {
    pub name: Arc<str>,
    pub arity: usize,
    pub axioms: AxiomSet,
    pub decls: Vec<OpSig>,
    pub ctor_attr: bool,
    pub fresh: bool,
    /// Mixfix layout, `None` for prefix syntax.
    pub template: Option<Vec<Tpl>>,
}

/// Operator declaration before identity elements are resolved.
#[derive(Clone, Debug)]
pub struct OpSpec {
    pub name: String,
    pub args: Vec<String>,
    pub result: String,
    pub assoc: bool,
    pub comm: bool,
    pub identity: Option<(String, Side)>,
    pub ctor: bool,
}

impl OpSpec {
    pub fn new(name: &str, args: &[&str], result: &str) -> OpSpec {
        OpSpec {
            name: name.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
            result: result.to_string(),
            assoc: false,
            comm: false,
            identity: None,
            ctor: false,
        }
    }
}

/// Splits a mixfix name such as `_{_}_` into holes and tokens.
pub fn template_of(name: &str) -> Option<Vec<Tpl>> {
    if !name.contains('_') || name == "_" {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<Tpl>| {
        if !cur.is_empty() {
            for tok in crate::syntax::lex_fragment(cur) {
                out.push(Tpl::Tok(tok));
            }
            cur.clear();
        }
    };
    for c in name.chars() {
        if c == '_' {
            flush(&mut cur, &mut out);
            out.push(Tpl::Hole);
        } else {
            cur.push(c);
        }
    }
    flush(&mut cur, &mut out);
    Some(out)
}

#[derive(Clone, Debug)]
pub struct Signature {
    pub sorts: SortGraph,
    syms: Vec<Symbol>,
    by_key: HashMap<(Arc<str>, usize), SymId>,
    /// Whether the built-in NAT fragment was imported.
    pub nat: bool,
}

impl Signature {
    pub fn new(sorts: SortGraph, ops: &[OpSpec]) -> Result<Signature> {
        let mut sig = Signature { sorts, syms: Vec::new(), by_key: HashMap::new(), nat: false };
        for op in ops {
            sig.add_op_raw(op)?;
        }
        // identities are resolved once every constant is known
        for op in ops {
            if let Some((elem, side)) = &op.identity {
                let sym = sig.lookup(&op.name, op.args.len()).expect("declared");
                let e = sig
                    .lookup(elem, 0)
                    .ok_or_else(|| Error::Signature(format!("identity `{elem}` of `{}` is not a declared constant", op.name)))?;
                let id = Identity { elem: e, side: *side };
                let s = &mut sig.syms[sym.idx()];
                match s.axioms.identity {
                    Some(prev) if prev != id => {
                        return Err(Error::Signature(format!("overloads of `{}` disagree on identity", op.name)))
                    }
                    _ => s.axioms.identity = Some(id),
                }
            }
        }
        for (i, s) in sig.syms.iter().enumerate() {
            if let Some(id) = s.axioms.identity {
                let es = &sig.syms[id.elem.idx()];
                let ok = es.decls.iter().any(|d| {
                    s.decls.iter().any(|od| od.args.iter().any(|&a| sig.sorts.same_component(a, d.result)))
                });
                if !ok {
                    return Err(Error::Signature(format!("identity of `{}` has an incompatible sort", s.name)));
                }
            }
            if s.axioms.assoc {
                if s.arity != 2 {
                    return Err(Error::Signature(format!("associative operator `{}` must be binary", s.name)));
                }
                for d in &s.decls {
                    if !d.args.iter().all(|&a| sig.sorts.same_component(a, d.result)) {
                        return Err(Error::Signature(format!(
                            "associative operator `{}` needs argument sorts in its result component",
                            s.name
                        )));
                    }
                }
            }
            if s.axioms.comm && s.arity != 2 {
                return Err(Error::Signature(format!("commutative operator `{}` must be binary", s.name)));
            }
            let _ = i;
        }
        Ok(sig)
    }

    fn add_op_raw(&mut self, op: &OpSpec) -> Result<SymId> {
        let args = op.args.iter().map(|a| self.sorts.id(a)).collect::<Result<Vec<_>>>()?;
        let result = self.sorts.id(&op.result)?;
        let key = (Arc::<str>::from(op.name.as_str()), args.len());
        let sig = OpSig { args, result };
        if let Some(&id) = self.by_key.get(&key) {
            let s = &mut self.syms[id.idx()];
            if s.axioms.assoc != op.assoc || s.axioms.comm != op.comm {
                return Err(Error::Signature(format!("overloads of `{}` must share axiom attributes", op.name)));
            }
            if let Some(first) = s.decls.first() {
                let comp_ok = self.sorts.same_component(first.result, sig.result);
                if !comp_ok {
                    return Err(Error::Signature(format!("overloads of `{}` span different kinds", op.name)));
                }
            }
            if !s.decls.contains(&sig) {
                s.decls.push(sig);
            }
            s.ctor_attr |= op.ctor;
            return Ok(id);
        }
        let id = SymId(self.syms.len() as u32);
        self.syms.push(Symbol {
            name: key.0.clone(),
            arity: key.1,
            axioms: AxiomSet { assoc: op.assoc, comm: op.comm, identity: None },
            decls: vec![sig],
            ctor_attr: op.ctor,
            fresh: false,
            template: template_of(&op.name),
        });
        self.by_key.insert(key, id);
        Ok(id)
    }

    /// Extends the signature with free operators (used for renamed calls).
    pub fn add_fresh_op(&mut self, name: &str, args: Vec<SortId>, result: SortId) -> Result<SymId> {
        let key = (Arc::<str>::from(name), args.len());
        if self.by_key.contains_key(&key) {
            return Err(Error::Signature(format!("operator `{name}` already declared")));
        }
        let id = SymId(self.syms.len() as u32);
        self.syms.push(Symbol {
            name: key.0.clone(),
            arity: key.1,
            axioms: AxiomSet::default(),
            decls: vec![OpSig { args, result }],
            ctor_attr: false,
            fresh: true,
            template: template_of(name),
        });
        self.by_key.insert(key, id);
        Ok(id)
    }

    pub fn sym(&self, id: SymId) -> &Symbol {
        &self.syms[id.idx()]
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymId, &Symbol)> {
        self.syms.iter().enumerate().map(|(i, s)| (SymId(i as u32), s))
    }

    pub fn lookup(&self, name: &str, arity: usize) -> Option<SymId> {
        self.by_key.get(&(Arc::<str>::from(name), arity)).copied()
    }

    pub fn lookup_any(&self, name: &str) -> Vec<SymId> {
        self.symbols().filter(|(_, s)| &*s.name == name).map(|(i, _)| i).collect()
    }

    pub fn axioms(&self, id: SymId) -> AxiomSet {
        self.syms[id.idx()].axioms
    }

    pub fn identity_of(&self, id: SymId) -> Option<Identity> {
        self.syms[id.idx()].axioms.identity
    }

    pub fn sort_leq(&self, a: SortId, b: SortId) -> bool {
        self.sorts.leq(a, b)
    }

    /// Least result sort of one application step over the given argument sorts.
    pub fn op_result(&self, sym: SymId, args: &[SortId]) -> Option<SortId> {
        let s = &self.syms[sym.idx()];
        let mut best: Option<SortId> = None;
        for d in &s.decls {
            if d.args.len() != args.len() {
                continue;
            }
            if d.args.iter().zip(args).all(|(&ds, &a)| self.sorts.leq(a, ds)) {
                best = match best {
                    None => Some(d.result),
                    Some(b) if self.sorts.leq(d.result, b) => Some(d.result),
                    Some(b) => Some(b),
                };
            }
        }
        best
    }

    /// Result sort of a flattened associative application, by iterated binary application.
    pub fn assoc_result(&self, sym: SymId, args: &[SortId]) -> Option<SortId> {
        let mut it = args.iter();
        let mut acc = *it.next()?;
        for &a in it {
            acc = self.op_result(sym, &[acc, a])?;
        }
        Some(acc)
    }

    /// Sort shared by every argument position of an associative operator: the top of its component.
    pub fn assoc_top(&self, sym: SymId) -> SortId {
        self.sorts.top(self.syms[sym.idx()].decls[0].result)
    }
}

/// An oriented equation `lhs = rhs`.
#[derive(Clone, Debug)]
pub struct Equation {
    pub label: Option<String>,
    pub lhs: Term,
    pub rhs: Term,
    pub variant: bool,
}

/// Order-sorted signature plus oriented equations; structural axioms live on the operators.
#[derive(Clone, Debug)]
pub struct Theory {
    pub name: String,
    pub sig: Arc<Signature>,
    pub equations: Vec<Equation>,
    defined: BTreeSet<SymId>,
}

impl Theory {
    pub fn new(name: &str, sig: Arc<Signature>, equations: Vec<Equation>) -> Result<Theory> {
        let mut defined = BTreeSet::new();
        for (i, eq) in equations.iter().enumerate() {
            let tag = eq.label.clone().unwrap_or_else(|| format!("#{}", i + 1));
            let Some(root) = eq.lhs.sym() else {
                return Err(Error::Equation(format!("{tag}: left-hand side is a variable")));
            };
            let lv = eq.lhs.vars();
            if let Some(v) = eq.rhs.vars().into_iter().find(|v| !lv.contains(v)) {
                return Err(Error::Equation(format!("{tag}: variable {} only occurs on the right", v.name)));
            }
            if eq.lhs.sort().is_none() || eq.rhs.sort().is_none() {
                return Err(Error::Equation(format!("{tag}: ill-typed side")));
            }
            defined.insert(root);
        }
        Ok(Theory { name: name.to_string(), sig, equations, defined })
    }

    pub fn is_defined(&self, s: SymId) -> bool {
        self.defined.contains(&s)
    }

    pub fn defined(&self) -> &BTreeSet<SymId> {
        &self.defined
    }
}

/// Partition of the declared symbols into defined (lhs roots) and constructors.
pub fn classify_symbols(th: &Theory) -> (BTreeSet<SymId>, BTreeSet<SymId>) {
    let defined = th.defined.clone();
    let ctors = th.sig.symbols().map(|(i, _)| i).filter(|i| !defined.contains(i)).collect();
    (defined, ctors)
}

pub fn least_sort(t: &Term, th: &Theory) -> Result<SortId> {
    t.sort().ok_or_else(|| Error::IllTyped(crate::syntax::show(&th.sig, t)))
}

pub fn sort_leq(s1: &str, s2: &str, th: &Theory) -> Result<bool> {
    let a = th.sig.sorts.id(s1)?;
    let b = th.sig.sorts.id(s2)?;
    Ok(th.sig.sort_leq(a, b))
}

impl fmt::Display for SortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sort#{}", self.0)
    }
}
