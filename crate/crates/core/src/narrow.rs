//! Narrowing modulo the axioms and folding variant narrowing trees.

use std::fmt::Write as _;

use crate::error::Result;
use crate::rewrite::{normalize, normalize_subst, CompiledTheory};
use crate::signature::Signature;
use crate::solver::matching::{matches_seq, Cx};
use crate::solver::unify::{may_unify, unify_modulo};
use crate::subst::{fresh_rename, Subst};
use crate::term::{replace, subterms_at, Position, Term, Var};

pub const DEFAULT_MAX_DEPTH: usize = 25;

/// One narrowing step `t ~>[sigma] term`.
#[derive(Clone, Debug)]
pub struct Step {
    pub rule: usize,
    pub label: String,
    pub pos: Position,
    /// Restricted to the variables of the narrowed term.
    pub subst: Subst,
    /// Normalized result.
    pub term: Term,
}

/// Term-and-bindings tuple used for subsumption checks.
fn tuple(sig: &Signature, t: &Term, s: &Subst, vars: &[Var]) -> Vec<Term> {
    let mut v = Vec::with_capacity(vars.len() + 1);
    v.push(t.clone());
    for x in vars {
        v.push(s.apply(sig, &Term::var(x.clone())));
    }
    v
}

/// Printing key that ignores variable names, for deterministic ordering.
pub(crate) fn shape(t: &Term, out: &mut String) {
    match t.as_var() {
        Some(v) => {
            let _ = write!(out, "?{}", v.sort_name);
        }
        None => {
            out.push_str(t.name());
            let args = t.args();
            if !args.is_empty() {
                out.push('(');
                for a in &args {
                    shape(a, out);
                    out.push(',');
                }
                out.push(')');
            }
        }
    }
}

fn shape_key(ts: &[Term]) -> String {
    let mut s = String::new();
    for t in ts {
        shape(t, &mut s);
        s.push('|');
    }
    s
}

/// All one-step narrowings of a normalized term, deduplicated and with
/// strictly less general steps removed.
pub fn narrow_steps(t: &Term, ct: &CompiledTheory) -> Result<Vec<Step>> {
    let sig = ct.sig();
    let tv = t.vars();
    let mut raw: Vec<(Step, String)> = Vec::new();
    for (pos, s) in subterms_at(sig, t) {
        if pos.group.is_some() {
            continue;
        }
        for &ri in ct.rule_indices_for(&s, true) {
            let rule = &ct.rules[ri];
            if !may_unify(sig, &s, &rule.lhs) {
                continue;
            }
            let (lhs, ren) = fresh_rename(sig, &rule.lhs);
            let rhs = ren.apply(sig, &rule.rhs);
            for sigma in unify_modulo(sig, &s, &lhs)? {
                let body = replace(sig, t, &pos, rhs.clone())?;
                let inst = sigma.apply(sig, &body);
                if inst.sort().is_none() {
                    continue;
                }
                let term = normalize(&inst, ct)?;
                let subst = normalize_subst(&sigma.restrict(&tv), ct)?;
                let key = {
                    let mut k = format!("{ri:06}/{:?}/", pos.path);
                    k.push_str(&shape_key(&tuple(sig, &term, &subst, &tv)));
                    k
                };
                raw.push((Step { rule: ri, label: rule.label.clone(), pos: pos.clone(), subst, term }, key));
            }
        }
    }
    raw.sort_by(|a, b| a.1.cmp(&b.1));
    // the result of a step is the normal form of the instance, so steps are
    // compared by their substitutions alone
    let images: Vec<Vec<Term>> = raw.iter().map(|(s, _)| tuple(sig, &s.term, &s.subst, &tv)[1..].to_vec()).collect();
    let cx = Cx::new(sig);
    let n = raw.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !keep[j] || !keep[i] {
                continue;
            }
            // i is dropped when j is strictly more general, or equally general and first
            if matches_seq(&cx, &images[j], &images[i]) && (j < i || !matches_seq(&cx, &images[i], &images[j])) {
                keep[i] = false;
            }
        }
    }
    Ok(raw.into_iter().zip(keep).filter(|(_, k)| *k).map(|((s, _), _)| s).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    /// No narrowing step applies.
    Irreducible,
    /// The whistle blew.
    Whistle,
    /// The depth bound was reached.
    Depth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Expanded,
    Leaf(LeafKind),
    /// Subsumed by the given node.
    Folded(usize),
}

#[derive(Clone, Debug)]
pub struct VariantNode {
    pub term: Term,
    /// Accumulated substitution restricted to the root variables.
    pub subst: Subst,
    pub parent: Option<usize>,
    pub step: Option<(String, Position, Subst)>,
    pub depth: usize,
    pub status: Status,
}

#[derive(Clone, Debug)]
pub struct NarrowingTree {
    /// The call the tree was built for; the root node holds its normal form.
    pub goal: Term,
    pub root_vars: Vec<Var>,
    pub nodes: Vec<VariantNode>,
    pub levels: Vec<Vec<usize>>,
    pub depth_exceeded: bool,
}

impl NarrowingTree {
    pub fn root(&self) -> &VariantNode {
        &self.nodes[0]
    }

    pub fn ancestors(&self, mut i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(p) = self.nodes[i].parent {
            out.push(p);
            i = p;
        }
        out.reverse();
        out
    }
}

/// Ancestor terms (root first) and the candidate term.
pub type Whistle<'a> = dyn Fn(&[&Term], &Term) -> bool + 'a;

/// Breadth-first folding variant narrowing tree for `goal`.
pub fn build_folding_tree(goal: &Term, ct: &CompiledTheory, stop: &Whistle<'_>, max_depth: usize) -> Result<NarrowingTree> {
    let sig = ct.sig();
    let root_vars = goal.vars();
    let root_term = normalize(goal, ct)?;
    let mut tree = NarrowingTree {
        goal: goal.clone(),
        root_vars: root_vars.clone(),
        nodes: vec![VariantNode { term: root_term, subst: Subst::new(), parent: None, step: None, depth: 0, status: Status::Expanded }],
        levels: vec![vec![0]],
        depth_exceeded: false,
    };
    let cx = Cx::new(sig);
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &ni in &frontier {
            let node = tree.nodes[ni].clone();
            let steps = narrow_steps(&node.term, ct)?;
            if steps.is_empty() {
                tree.nodes[ni].status = Status::Leaf(LeafKind::Irreducible);
                continue;
            }
            let anc: Vec<usize> = {
                let mut a = tree.ancestors(ni);
                a.push(ni);
                a
            };
            for st in steps {
                let acc = node.subst.compose(sig, &st.subst).restrict(&root_vars);
                let acc = normalize_subst(&acc, ct)?;
                let cand = tuple(sig, &st.term, &acc, &root_vars);
                let folded = tree.nodes.iter().enumerate().find(|(_, n)| {
                    !matches!(n.status, Status::Folded(_)) && matches_seq(&cx, &tuple(sig, &n.term, &n.subst, &root_vars), &cand)
                });
                let depth = node.depth + 1;
                let status = if let Some((fi, _)) = folded {
                    Status::Folded(fi)
                } else {
                    let anc_terms: Vec<&Term> = anc.iter().map(|&a| &tree.nodes[a].term).collect();
                    if stop(&anc_terms, &st.term) {
                        Status::Leaf(LeafKind::Whistle)
                    } else if depth >= max_depth {
                        tree.depth_exceeded = true;
                        Status::Leaf(LeafKind::Depth)
                    } else {
                        Status::Expanded
                    }
                };
                let id = tree.nodes.len();
                tree.nodes.push(VariantNode {
                    term: st.term,
                    subst: acc,
                    parent: Some(ni),
                    step: Some((st.label, st.pos, st.subst)),
                    depth,
                    status,
                });
                if status == Status::Expanded {
                    next.push(id);
                }
            }
        }
        if !next.is_empty() {
            tree.levels.push(next.clone());
        }
        frontier = next;
    }
    Ok(tree)
}

/// Non-expanded, non-folded nodes.
pub fn leaves(tree: &NarrowingTree) -> Vec<&VariantNode> {
    tree.nodes.iter().filter(|n| matches!(n.status, Status::Leaf(_))).collect()
}

/// `(acc_subst, leaf term)` for every leaf.
pub fn derivations(tree: &NarrowingTree) -> Vec<(Subst, Term)> {
    leaves(tree).into_iter().map(|n| (n.subst.clone(), n.term.clone())).collect()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering; folded nodes get a dashed edge to their subsumer.
pub fn to_dot(tree: &NarrowingTree, sig: &Signature) -> String {
    let show = |t: &Term| crate::syntax::show(sig, t);
    let show_subst = |s: &Subst| {
        let parts: Vec<String> = s.iter().map(|(v, t)| format!("{} -> {}", v.name, show(t))).collect();
        format!("{{{}}}", parts.join(", "))
    };
    let mut out = String::from("digraph narrowing {\n  node [shape=box, fontname=\"monospace\"];\n");
    for (i, n) in tree.nodes.iter().enumerate() {
        let style = match n.status {
            Status::Expanded => "",
            Status::Leaf(LeafKind::Irreducible) => ", style=bold",
            Status::Leaf(LeafKind::Whistle) => ", color=red",
            Status::Leaf(LeafKind::Depth) => ", color=orange",
            Status::Folded(_) => ", style=dashed",
        };
        let _ = writeln!(out, "  n{i} [label=\"{}\"{style}];", dot_escape(&show(&n.term)));
        if let (Some(p), Some((label, pos, s))) = (n.parent, &n.step) {
            let _ = writeln!(out, "  n{p} -> n{i} [label=\"[{}] @{} {}\"];", dot_escape(label), pos, dot_escape(&show_subst(s)));
        }
        if let Status::Folded(f) = n.status {
            let _ = writeln!(out, "  n{i} -> n{f} [style=dotted, label=\"fold\"];");
        }
    }
    out.push_str("}\n");
    out
}
