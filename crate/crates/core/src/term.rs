//! Canonical terms modulo the structural axioms.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtOrd};
use std::sync::Arc;

use imbl::OrdMap;

use crate::error::{Error, Result};
use crate::signature::{Side, Signature, SortId, SymId};

const SMALL_LIMIT: usize = 24;

#[derive(Clone)]
pub struct Var {
    pub name: Arc<str>,
    pub sort: SortId,
    pub sort_name: Arc<str>,
}

impl Var {
    pub fn new(name: &str, sort: SortId, sig: &Signature) -> Var {
        Var { name: Arc::from(name), sort, sort_name: sig.sorts.name(sort).clone() }
    }

    /// Base name without the `@N` freshness suffix.
    pub fn base(&self) -> &str {
        match self.name.find('@') {
            Some(i) => &self.name[..i],
            None => &self.name,
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, o: &Var) -> bool {
        self.sort == o.sort && self.name == o.name
    }
}
impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.name.hash(h);
        self.sort.hash(h);
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, o: &Var) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Var {
    fn cmp(&self, o: &Var) -> Ordering {
        self.sort_name
            .cmp(&o.sort_name)
            .then_with(|| self.name.cmp(&o.name))
            .then_with(|| self.sort.cmp(&o.sort))
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort_name)
    }
}

static FRESH: AtomicU64 = AtomicU64::new(1);

/// A variable with a globally unique name derived from `base`.
pub fn fresh_var(base: &str, sort: SortId, sig: &Signature) -> Var {
    let n = FRESH.fetch_add(1, AtOrd::Relaxed);
    let b = match base.find('@') {
        Some(i) => &base[..i],
        None => base,
    };
    Var::new(&format!("{b}@{n}"), sort, sig)
}

fn mix(h: u64, x: u64) -> u64 {
    (h.rotate_left(5) ^ x).wrapping_mul(0x517c_c1b7_2722_0a95)
}

fn str_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

fn finish(h: u64) -> u64 {
    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone)]
enum AcRepr {
    Small(Arc<Vec<(Term, u32)>>),
    Big(OrdMap<Term, u32>),
}

/// Persistent multiset of arguments of an AC operator, in canonical order.
#[derive(Clone)]
pub struct AcArgs {
    repr: AcRepr,
    len: u64,
    hsum: u64,
    nonground: u64,
    sorts: Arc<Vec<(Option<SortId>, u64)>>,
}

impl Default for AcArgs {
    fn default() -> Self {
        AcArgs::new()
    }
}

impl AcArgs {
    pub fn new() -> AcArgs {
        AcArgs { repr: AcRepr::Small(Arc::new(Vec::new())), len: 0, hsum: 0, nonground: 0, sorts: Arc::new(Vec::new()) }
    }

    pub fn from_iter<I: IntoIterator<Item = (Term, u32)>>(it: I) -> AcArgs {
        let mut a = AcArgs::new();
        for (t, k) in it {
            a.insert(t, k);
        }
        a
    }

    /// Total number of elements, counting multiplicity.
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn distinct(&self) -> usize {
        match &self.repr {
            AcRepr::Small(v) => v.len(),
            AcRepr::Big(m) => m.len(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.nonground == 0
    }

    pub fn count(&self, t: &Term) -> u32 {
        match &self.repr {
            AcRepr::Small(v) => v.binary_search_by(|(e, _)| e.cmp(t)).map(|i| v[i].1).unwrap_or(0),
            AcRepr::Big(m) => m.get(t).copied().unwrap_or(0),
        }
    }

    fn bump_meta(&mut self, t: &Term, k: u64, add: bool) {
        let hk = t.hash_value().wrapping_mul(k);
        let sorts = Arc::make_mut(&mut self.sorts);
        let key = t.sort();
        let pos = sorts.iter().position(|(s, _)| *s == key);
        if add {
            self.len += k;
            self.hsum = self.hsum.wrapping_add(hk);
            if !t.is_ground() {
                self.nonground += k;
            }
            match pos {
                Some(i) => sorts[i].1 += k,
                None => {
                    sorts.push((key, k));
                    sorts.sort_by_key(|(s, _)| *s);
                }
            }
        } else {
            self.len -= k;
            self.hsum = self.hsum.wrapping_sub(hk);
            if !t.is_ground() {
                self.nonground -= k;
            }
            let i = pos.expect("sort count present");
            sorts[i].1 -= k;
            if sorts[i].1 == 0 {
                sorts.remove(i);
            }
        }
    }

    pub fn insert(&mut self, t: Term, k: u32) {
        if k == 0 {
            return;
        }
        self.bump_meta(&t, k as u64, true);
        match &mut self.repr {
            AcRepr::Small(v) => {
                let v = Arc::make_mut(v);
                match v.binary_search_by(|(e, _)| e.cmp(&t)) {
                    Ok(i) => v[i].1 += k,
                    Err(i) => v.insert(i, (t, k)),
                }
                if v.len() > SMALL_LIMIT {
                    let m: OrdMap<Term, u32> = v.iter().cloned().collect();
                    self.repr = AcRepr::Big(m);
                }
            }
            AcRepr::Big(m) => {
                *m.entry(t).or_insert(0) += k;
            }
        }
    }

    /// Removes `k` copies of `t`; false (and no change) if fewer are present.
    pub fn remove(&mut self, t: &Term, k: u32) -> bool {
        if k == 0 {
            return true;
        }
        let have = self.count(t);
        if have < k {
            return false;
        }
        self.bump_meta(t, k as u64, false);
        match &mut self.repr {
            AcRepr::Small(v) => {
                let v = Arc::make_mut(v);
                let i = v.binary_search_by(|(e, _)| e.cmp(t)).expect("present");
                if have == k {
                    v.remove(i);
                } else {
                    v[i].1 -= k;
                }
            }
            AcRepr::Big(m) => {
                if have == k {
                    m.remove(t);
                } else {
                    m.insert(t.clone(), have - k);
                }
            }
        }
        true
    }

    pub fn union(&mut self, other: &AcArgs) {
        for (t, k) in other.iter() {
            self.insert(t.clone(), k);
        }
    }

    /// Distinct elements with multiplicities, in canonical order.
    pub fn iter(&self) -> AcIter<'_> {
        match &self.repr {
            AcRepr::Small(v) => AcIter::Small(v.iter()),
            AcRepr::Big(m) => AcIter::Big(m.iter()),
        }
    }

    /// Elements expanded by multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = &Term> + '_ {
        self.iter().flat_map(|(t, k)| std::iter::repeat_n(t, k as usize))
    }

    pub fn to_vec(&self) -> Vec<Term> {
        self.expanded().cloned().collect()
    }

    pub fn first(&self) -> Option<&Term> {
        self.iter().next().map(|(t, _)| t)
    }

    /// Element sorts with counts; `None` marks ill-sorted elements.
    pub fn sort_counts(&self) -> &[(Option<SortId>, u64)] {
        &self.sorts
    }

    fn same(&self, o: &AcArgs) -> bool {
        if self.len != o.len || self.hsum != o.hsum || self.distinct() != o.distinct() {
            return false;
        }
        self.iter().zip(o.iter()).all(|((a, x), (b, y))| x == y && a == b)
    }
}

pub enum AcIter<'a> {
    Small(std::slice::Iter<'a, (Term, u32)>),
    Big(imbl::ordmap::Iter<'a, Term, u32, imbl::shared_ptr::DefaultSharedPtr>),
}

impl<'a> Iterator for AcIter<'a> {
    type Item = (&'a Term, u32);
    fn next(&mut self) -> Option<Self::Item> {
        match self {
            AcIter::Small(it) => it.next().map(|(t, k)| (t, *k)),
            AcIter::Big(it) => it.next().map(|(t, k)| (t, *k)),
        }
    }
}

#[derive(Clone)]
pub enum Args {
    List(Vec<Term>),
    Ac(AcArgs),
}

#[derive(Clone)]
pub struct App {
    pub sym: SymId,
    pub name: Arc<str>,
    pub args: Args,
}

pub enum Kind {
    Var(Var),
    App(App),
}

pub struct Node {
    hash: u64,
    sort: Option<SortId>,
    ground: bool,
    kind: Kind,
}

impl Drop for Node {
    fn drop(&mut self) {
        // unlink long argument chains iteratively
        let Kind::App(App { args: Args::List(v), .. }) = &mut self.kind else { return };
        if v.is_empty() {
            return;
        }
        let mut stack: Vec<Term> = std::mem::take(v);
        while let Some(t) = stack.pop() {
            if let Ok(mut node) = Arc::try_unwrap(t.0) {
                if let Kind::App(App { args: Args::List(v), .. }) = &mut node.kind {
                    stack.append(v);
                }
            }
        }
    }
}

/// Shared immutable term in canonical form.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl Term {
    pub fn var(v: Var) -> Term {
        let hash = finish(mix(mix(1, str_hash(&v.name)), v.sort.0 as u64));
        Term(Arc::new(Node { hash, sort: Some(v.sort), ground: false, kind: Kind::Var(v) }))
    }

    /// Builds a node from already canonical parts; callers own the invariants.
    pub(crate) fn raw_app(sym: SymId, name: Arc<str>, args: Args, sort: Option<SortId>) -> Term {
        let mut h = mix(2, str_hash(&name));
        let ground;
        match &args {
            Args::List(v) => {
                h = mix(h, v.len() as u64);
                for a in v {
                    h = mix(h, a.0.hash);
                }
                ground = v.iter().all(|a| a.0.ground);
            }
            Args::Ac(a) => {
                h = mix(mix(mix(h, 0xac), a.len), a.hsum);
                ground = a.is_ground();
            }
        }
        Term(Arc::new(Node { hash: finish(h), sort, ground, kind: Kind::App(App { sym, name, args }) }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn hash_value(&self) -> u64 {
        self.0.hash
    }

    /// Least sort, `None` when no declaration applies.
    pub fn sort(&self) -> Option<SortId> {
        self.0.sort
    }

    pub fn is_ground(&self) -> bool {
        self.0.ground
    }

    pub fn is_var(&self) -> bool {
        matches!(self.0.kind, Kind::Var(_))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match &self.0.kind {
            Kind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_app(&self) -> Option<&App> {
        match &self.0.kind {
            Kind::App(a) => Some(a),
            _ => None,
        }
    }

    pub fn sym(&self) -> Option<SymId> {
        self.as_app().map(|a| a.sym)
    }

    pub fn name(&self) -> &str {
        match &self.0.kind {
            Kind::Var(v) => &v.name,
            Kind::App(a) => &a.name,
        }
    }

    pub fn list_args(&self) -> Option<&[Term]> {
        match &self.0.kind {
            Kind::App(App { args: Args::List(v), .. }) => Some(v),
            _ => None,
        }
    }

    pub fn ac_args(&self) -> Option<&AcArgs> {
        match &self.0.kind {
            Kind::App(App { args: Args::Ac(a), .. }) => Some(a),
            _ => None,
        }
    }

    /// Arguments in canonical order, AC multisets expanded.
    pub fn args(&self) -> Vec<Term> {
        match &self.0.kind {
            Kind::Var(_) => Vec::new(),
            Kind::App(App { args: Args::List(v), .. }) => v.clone(),
            Kind::App(App { args: Args::Ac(a), .. }) => a.to_vec(),
        }
    }

    pub fn arity(&self) -> usize {
        match &self.0.kind {
            Kind::Var(_) => 0,
            Kind::App(App { args: Args::List(v), .. }) => v.len(),
            Kind::App(App { args: Args::Ac(a), .. }) => a.len(),
        }
    }

    pub fn ptr_eq(&self, o: &Term) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }

    /// Distinct variables in first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>, seen: &mut std::collections::HashSet<Var>) {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if t.is_ground() {
                continue;
            }
            match &t.0.kind {
                Kind::Var(v) => {
                    if seen.insert(v.clone()) {
                        out.push(v.clone());
                    }
                }
                Kind::App(App { args: Args::List(v), .. }) => stack.extend(v.iter().rev()),
                Kind::App(App { args: Args::Ac(a), .. }) => {
                    let ng: Vec<&Term> = a.iter().filter(|(e, _)| !e.is_ground()).map(|(e, _)| e).collect();
                    stack.extend(ng.into_iter().rev());
                }
            }
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        if self.is_ground() {
            return false;
        }
        match &self.0.kind {
            Kind::Var(w) => w == v,
            Kind::App(App { args: Args::List(xs), .. }) => xs.iter().any(|x| x.occurs(v)),
            Kind::App(App { args: Args::Ac(a), .. }) => a.iter().any(|(x, _)| x.occurs(v)),
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![(self, 1usize)];
        while let Some((t, k)) = stack.pop() {
            n += k;
            match &t.0.kind {
                Kind::Var(_) => {}
                Kind::App(App { args: Args::List(v), .. }) => stack.extend(v.iter().map(|x| (x, k))),
                Kind::App(App { args: Args::Ac(a), .. }) => stack.extend(a.iter().map(|(x, c)| (x, k * c as usize))),
            }
        }
        n
    }

    pub fn depth(&self) -> usize {
        match &self.0.kind {
            Kind::Var(_) => 0,
            Kind::App(App { args: Args::List(v), .. }) => {
                // iterative along the last argument to survive long right spines
                let mut d = 1 + v.iter().take(v.len().saturating_sub(1)).map(|x| x.depth()).max().unwrap_or(0);
                let mut cur = v.last().cloned();
                let mut base = 1;
                while let Some(c) = cur {
                    match c.list_args() {
                        Some(w) if !w.is_empty() => {
                            base += 1;
                            for x in &w[..w.len() - 1] {
                                d = d.max(base + x.depth());
                            }
                            cur = w.last().cloned();
                        }
                        _ => {
                            d = d.max(base + c.depth());
                            cur = None;
                        }
                    }
                }
                d
            }
            Kind::App(App { args: Args::Ac(a), .. }) => 1 + a.iter().map(|(x, _)| x.depth()).max().unwrap_or(0),
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, o: &Term) -> bool {
        if Arc::ptr_eq(&self.0, &o.0) {
            return true;
        }
        if self.0.hash != o.0.hash {
            return false;
        }
        match (&self.0.kind, &o.0.kind) {
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::App(a), Kind::App(b)) => {
                if a.name != b.name {
                    return false;
                }
                match (&a.args, &b.args) {
                    (Args::List(x), Args::List(y)) => x == y,
                    (Args::Ac(x), Args::Ac(y)) => x.same(y),
                    _ => false,
                }
            }
            _ => false,
        }
    }
}
impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, h: &mut H) {
        h.write_u64(self.0.hash);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, o: &Term) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Term {
    /// Variables first, then applications by name, arity and arguments.
    fn cmp(&self, o: &Term) -> Ordering {
        if Arc::ptr_eq(&self.0, &o.0) {
            return Ordering::Equal;
        }
        match (&self.0.kind, &o.0.kind) {
            (Kind::Var(a), Kind::Var(b)) => a.cmp(b),
            (Kind::Var(_), Kind::App(_)) => Ordering::Less,
            (Kind::App(_), Kind::Var(_)) => Ordering::Greater,
            (Kind::App(a), Kind::App(b)) => {
                let c = a.name.cmp(&b.name).then_with(|| self.arity().cmp(&o.arity()));
                if c != Ordering::Equal {
                    return c;
                }
                if self == o {
                    return Ordering::Equal;
                }
                match (&a.args, &b.args) {
                    (Args::List(x), Args::List(y)) => x.cmp(y),
                    (Args::Ac(x), Args::Ac(y)) => x.expanded().cmp(y.expanded()),
                    (Args::List(_), Args::Ac(_)) => Ordering::Less,
                    (Args::Ac(_), Args::List(_)) => Ordering::Greater,
                }
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Var(v) => write!(f, "{}", v.name),
            Kind::App(a) => {
                write!(f, "{}", a.name)?;
                let args = self.args();
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, x) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{x:?}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// construction

impl Signature {
    /// Canonical application: flattening, identity erasure and argument sorting.
    pub fn app(&self, sym: SymId, args: Vec<Term>) -> Term {
        let s = self.sym(sym);
        let ax = s.axioms;
        if ax.is_ac() {
            return self.ac_app(sym, args);
        }
        let mut args = args;
        if ax.assoc {
            let mut flat = Vec::with_capacity(args.len());
            for a in args {
                if a.sym() == Some(sym) {
                    flat.extend(a.list_args().expect("assoc args").iter().cloned());
                } else {
                    flat.push(a);
                }
            }
            if let Some(id) = ax.identity {
                let n = flat.len();
                let is_e = |t: &Term| t.sym() == Some(id.elem) && t.arity() == 0;
                let mut kept = Vec::with_capacity(n);
                for (i, a) in flat.iter().enumerate() {
                    if is_e(a) {
                        let erasable = match id.side {
                            Side::Both => true,
                            // e * x = x: needs something to the right
                            Side::Left => i + 1 < n,
                            Side::Right => i > 0,
                        };
                        if erasable {
                            continue;
                        }
                    }
                    kept.push(a.clone());
                }
                // a lone identity must survive when everything else vanished
                if kept.is_empty() {
                    return self.constant_sym(id.elem);
                }
                flat = kept;
            }
            if flat.len() == 1 {
                return flat.pop().unwrap();
            }
            let sorts: Option<Vec<SortId>> = flat.iter().map(|a| a.sort()).collect();
            let sort = sorts.and_then(|ss| self.assoc_result(sym, &ss));
            return Term::raw_app(sym, s.name.clone(), Args::List(flat), sort);
        }
        if let Some(id) = ax.identity {
            if args.len() == 2 {
                let is_e = |t: &Term| t.sym() == Some(id.elem) && t.arity() == 0;
                if matches!(id.side, Side::Right | Side::Both) && is_e(&args[1]) {
                    return args.swap_remove(0);
                }
                if matches!(id.side, Side::Left | Side::Both) && is_e(&args[0]) {
                    return args.pop().unwrap();
                }
            }
        }
        if ax.comm && args.len() == 2 && args[1] < args[0] {
            args.swap(0, 1);
        }
        self.app_raw(sym, args)
    }

    /// Application without any axiom processing (non-AC symbols only).
    pub fn app_raw(&self, sym: SymId, args: Vec<Term>) -> Term {
        let s = self.sym(sym);
        let sorts: Option<Vec<SortId>> = args.iter().map(|a| a.sort()).collect();
        let sort = sorts.and_then(|ss| self.op_result(sym, &ss));
        Term::raw_app(sym, s.name.clone(), Args::List(args), sort)
    }

    fn ac_app(&self, sym: SymId, args: Vec<Term>) -> Term {
        let mut base: Option<AcArgs> = None;
        let mut rest = Vec::with_capacity(args.len());
        // reuse the largest nested multiset as the starting point
        let big = args
            .iter()
            .enumerate()
            .filter(|(_, a)| a.sym() == Some(sym))
            .max_by_key(|(_, a)| a.arity())
            .map(|(i, _)| i);
        for (i, a) in args.into_iter().enumerate() {
            if Some(i) == big {
                base = Some(a.ac_args().expect("ac args").clone());
            } else {
                rest.push(a);
            }
        }
        let mut acc = base.unwrap_or_default();
        for a in rest {
            self.ac_push(sym, &mut acc, a, 1);
        }
        self.ac_from(sym, acc)
    }

    /// Adds `k` copies of `t` to an AC multiset, flattening and erasing the identity.
    pub fn ac_push(&self, sym: SymId, acc: &mut AcArgs, t: Term, k: u32) {
        if t.sym() == Some(sym) {
            if let Some(inner) = t.ac_args() {
                for (e, c) in inner.iter() {
                    acc.insert(e.clone(), c * k);
                }
                return;
            }
        }
        if let Some(id) = self.identity_of(sym) {
            if t.sym() == Some(id.elem) && t.arity() == 0 {
                return;
            }
        }
        acc.insert(t, k);
    }

    /// Term for an already flattened, identity-free AC multiset.
    pub fn ac_from(&self, sym: SymId, acc: AcArgs) -> Term {
        match acc.len() {
            0 => {
                let id = self.identity_of(sym).expect("empty AC argument list needs an identity");
                self.constant_sym(id.elem)
            }
            1 => acc.first().unwrap().clone(),
            _ => {
                let sort = self.ac_sort(sym, &acc);
                Term::raw_app(sym, self.sym(sym).name.clone(), Args::Ac(acc), sort)
            }
        }
    }

    fn ac_sort(&self, sym: SymId, acc: &AcArgs) -> Option<SortId> {
        let counts = acc.sort_counts();
        let mut acc_sort: Option<SortId> = None;
        for &(s, k) in counts {
            let s = s?;
            let mut left = k;
            if acc_sort.is_none() {
                acc_sort = Some(s);
                left -= 1;
            }
            while left > 0 {
                let cur = acc_sort.unwrap();
                let next = self.op_result(sym, &[cur, s])?;
                left -= 1;
                if next == cur {
                    break;
                }
                acc_sort = Some(next);
            }
        }
        acc_sort
    }

    pub fn constant_sym(&self, sym: SymId) -> Term {
        self.app_raw(sym, Vec::new())
    }

    /// Application by operator name; arity selects among overloads, and a
    /// flattened argument list selects the binary associative operator.
    pub fn mk(&self, name: &str, args: Vec<Term>) -> Result<Term> {
        let sym = self
            .lookup(name, args.len())
            .or_else(|| self.lookup(name, 2).filter(|&f| args.len() > 2 && self.axioms(f).assoc))
            .ok_or_else(|| Error::UnknownOp(format!("{name}/{}", args.len())))?;
        Ok(self.app(sym, args))
    }

    pub fn constant(&self, name: &str) -> Result<Term> {
        self.mk(name, Vec::new())
    }

    pub fn mk_var(&self, name: &str, sort: &str) -> Result<Term> {
        let s = self.sorts.id(sort)?;
        Ok(Term::var(Var::new(name, s, self)))
    }

    /// Rebuilds `t` with new arguments, reusing the node when nothing changed.
    pub fn with_args(&self, t: &Term, args: Vec<Term>) -> Term {
        let a = t.as_app().expect("application");
        if let Some(old) = t.list_args() {
            if old.len() == args.len() && old.iter().zip(&args).all(|(x, y)| x.ptr_eq(y)) {
                return t.clone();
            }
        }
        self.app(a.sym, args)
    }

    /// Re-canonicalizes a term built against another signature with the same symbol names.
    pub fn import(&self, t: &Term) -> Result<Term> {
        match t.kind() {
            Kind::Var(v) => {
                let s = self.sorts.id(&v.sort_name)?;
                Ok(Term::var(Var::new(&v.name, s, self)))
            }
            Kind::App(a) => {
                let args = t.args().iter().map(|x| self.import(x)).collect::<Result<Vec<_>>>()?;
                self.mk(&a.name, args)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// positions

/// Path of argument indices, optionally ending in a group of AC arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position {
    pub path: Vec<usize>,
    pub group: Option<Vec<usize>>,
}

impl Position {
    pub fn root() -> Position {
        Position::default()
    }

    pub fn at(path: Vec<usize>) -> Position {
        Position { path, group: None }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() && self.group.is_none() {
            return write!(f, "e");
        }
        let p: Vec<String> = self.path.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{}", p.join("."))?;
        if let Some(g) = &self.group {
            let g: Vec<String> = g.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "{{{}}}", g.join(","))?;
        }
        Ok(())
    }
}

pub fn subterm(t: &Term, path: &[usize]) -> Result<Term> {
    let mut cur = t.clone();
    for &i in path {
        let args = cur.args();
        cur = args.get(i).cloned().ok_or_else(|| Error::InvalidPosition(path.to_vec()))?;
    }
    Ok(cur)
}

/// Non-variable positions in pre-order; AC nodes also list every group of 2..n-1 arguments.
pub fn subterms_at(sig: &Signature, t: &Term) -> Vec<(Position, Term)> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), t.clone())];
    while let Some((path, s)) = stack.pop() {
        if s.is_var() {
            continue;
        }
        out.push((Position::at(path.clone()), s.clone()));
        let args = s.args();
        if let Some(ac) = s.ac_args() {
            let n = args.len();
            if n <= 16 {
                let sym = s.sym().unwrap();
                for mask in 1u32..(1 << n) - 1 {
                    let k = mask.count_ones() as usize;
                    if k < 2 {
                        continue;
                    }
                    let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                    let mut g = AcArgs::new();
                    for &i in &idx {
                        g.insert(args[i].clone(), 1);
                    }
                    out.push((Position { path: path.clone(), group: Some(idx) }, sig.ac_from(sym, g)));
                }
            }
            let _ = ac;
        }
        for (i, a) in args.into_iter().enumerate().rev() {
            let mut p = path.clone();
            p.push(i);
            stack.push((p, a));
        }
    }
    out
}

/// Replaces the subterm at `p` and re-canonicalizes the spine.
pub fn replace(sig: &Signature, t: &Term, p: &Position, s: Term) -> Result<Term> {
    fn go(sig: &Signature, t: &Term, path: &[usize], group: &Option<Vec<usize>>, s: Term, full: &[usize]) -> Result<Term> {
        if path.is_empty() {
            return match group {
                None => Ok(s),
                Some(idx) => {
                    let a = t.as_app().ok_or_else(|| Error::InvalidPosition(full.to_vec()))?;
                    if t.ac_args().is_none() {
                        return Err(Error::InvalidPosition(full.to_vec()));
                    }
                    let args = t.args();
                    if idx.iter().any(|&i| i >= args.len()) {
                        return Err(Error::InvalidPosition(full.to_vec()));
                    }
                    let mut rest: Vec<Term> =
                        args.into_iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, x)| x).collect();
                    rest.push(s);
                    Ok(sig.app(a.sym, rest))
                }
            };
        }
        let a = t.as_app().ok_or_else(|| Error::InvalidPosition(full.to_vec()))?;
        let mut args = t.args();
        let i = path[0];
        if i >= args.len() {
            return Err(Error::InvalidPosition(full.to_vec()));
        }
        args[i] = go(sig, &args[i], &path[1..], group, s, full)?;
        Ok(sig.app(a.sym, args))
    }
    go(sig, t, &p.path, &p.group, s, &p.path)
}

/// Re-canonicalizes an arbitrary term bottom-up.
pub fn canonicalize(sig: &Signature, t: &Term) -> Term {
    match t.kind() {
        Kind::Var(_) => t.clone(),
        Kind::App(a) => {
            let args = t.args().iter().map(|x| canonicalize(sig, x)).collect();
            sig.app(a.sym, args)
        }
    }
}

pub fn eq_modulo(t1: &Term, t2: &Term) -> bool {
    t1 == t2
}
