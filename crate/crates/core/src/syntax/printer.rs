//! Term and module printing.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::signature::{Equation, Side, Signature, SymId, Theory, Tpl};
use crate::syntax::parser::TermParser;
use crate::term::{Term, Var};

#[derive(Clone, Debug)]
enum Doc {
    /// A token; `glue` suppresses the space before it.
    Tok(String, bool),
    /// Optional parentheses, identified for the pretty pass.
    Paren(usize, Vec<Doc>),
}

struct Builder<'a> {
    sig: &'a Signature,
    names: Option<&'a HashMap<Var, String>>,
    next: usize,
}

fn is_open(sig: &Signature, t: &Term) -> bool {
    let Some(f) = t.sym() else { return false };
    if t.arity() == 0 || as_numeral(sig, t).is_some() {
        return false;
    }
    match &sig.sym(f).template {
        Some(tpl) => matches!(tpl.first(), Some(Tpl::Hole)) || matches!(tpl.last(), Some(Tpl::Hole)),
        None => false,
    }
}

fn as_numeral(sig: &Signature, t: &Term) -> Option<u64> {
    if !sig.nat {
        return None;
    }
    let mut n = 0u64;
    let mut cur = t.clone();
    loop {
        match cur.name() {
            "0" if cur.arity() == 0 => break,
            "s_" if cur.arity() == 1 => {
                n += 1;
                let next = cur.args()[0].clone();
                cur = next;
            }
            _ => return None,
        }
    }
    // a user constant could shadow the numeral
    if n > 0 && sig.lookup(&n.to_string(), 0).is_some() {
        return None;
    }
    Some(n)
}

impl<'a> Builder<'a> {
    fn var_name(&self, v: &Var) -> String {
        match self.names.and_then(|m| m.get(v)) {
            Some(n) => n.clone(),
            None => v.name.to_string(),
        }
    }

    fn arg(&mut self, t: &Term, out: &mut Vec<Doc>) {
        if is_open(self.sig, t) {
            let mut inner = Vec::new();
            self.term(t, &mut inner);
            let id = self.next;
            self.next += 1;
            out.push(Doc::Paren(id, inner));
        } else {
            self.term(t, out);
        }
    }

    fn term(&mut self, t: &Term, out: &mut Vec<Doc>) {
        if let Some(v) = t.as_var() {
            out.push(Doc::Tok(self.var_name(v), false));
            return;
        }
        if let Some(n) = as_numeral(self.sig, t) {
            out.push(Doc::Tok(n.to_string(), false));
            return;
        }
        let f = t.sym().unwrap();
        let sym = self.sig.sym(f);
        let args = t.args();
        match &sym.template {
            None => {
                out.push(Doc::Tok(sym.name.to_string(), false));
                if !args.is_empty() {
                    out.push(Doc::Tok("(".into(), true));
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(Doc::Tok(",".into(), true));
                        }
                        self.term(a, out);
                    }
                    out.push(Doc::Tok(")".into(), true));
                }
            }
            Some(tpl) => {
                let holes = tpl.iter().filter(|x| matches!(x, Tpl::Hole)).count();
                let infix = tpl.len() >= 2 && matches!(tpl.first(), Some(Tpl::Hole)) && matches!(tpl.last(), Some(Tpl::Hole));
                if args.len() > holes && holes == 2 && infix {
                    let sep = &tpl[1..tpl.len() - 1];
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            self.toks(sep, out);
                        }
                        self.arg(a, out);
                    }
                } else if args.len() > holes && holes == 2 {
                    // right-nested fallback for non-infix assoc layouts
                    let nested = args[1..].iter().cloned().reduce(|acc, x| self.sig.app_raw(f, vec![acc, x])).unwrap();
                    self.fill(tpl, &[args[0].clone(), nested], out);
                } else {
                    self.fill(tpl, &args, out);
                }
            }
        }
    }

    fn toks(&mut self, sep: &[Tpl], out: &mut Vec<Doc>) {
        for s in sep {
            if let Tpl::Tok(x) = s {
                out.push(Doc::Tok(x.clone(), false));
            }
        }
    }

    fn fill(&mut self, tpl: &[Tpl], args: &[Term], out: &mut Vec<Doc>) {
        let mut k = 0;
        for item in tpl {
            match item {
                Tpl::Tok(x) => out.push(Doc::Tok(x.clone(), false)),
                Tpl::Hole => {
                    self.arg(&args[k], out);
                    k += 1;
                }
            }
        }
    }
}

fn render(docs: &[Doc], dropped: &HashSet<usize>, out: &mut Vec<(String, bool)>) {
    for d in docs {
        match d {
            Doc::Tok(s, g) => out.push((s.clone(), *g)),
            Doc::Paren(id, inner) => {
                if dropped.contains(id) {
                    render(inner, dropped, out);
                } else {
                    out.push(("(".into(), false));
                    render(inner, dropped, out);
                    out.push((")".into(), true));
                }
            }
        }
    }
}

fn join(toks: &[(String, bool)]) -> String {
    let mut s = String::new();
    let mut prev: Option<&str> = None;
    for (t, glue) in toks {
        let tight = match prev {
            None => true,
            Some(p) => *glue || matches!(p, "(" | "{" | "[") || matches!(t.as_str(), ")" | "}" | "]" | ","),
        };
        if !tight {
            s.push(' ');
        }
        s.push_str(t);
        if t == "," {
            s.push(' ');
            prev = None;
            continue;
        }
        prev = Some(t);
    }
    s
}

fn build(sig: &Signature, t: &Term, names: Option<&HashMap<Var, String>>) -> (Vec<Doc>, usize) {
    let mut b = Builder { sig, names, next: 0 };
    let mut docs = Vec::new();
    b.term(t, &mut docs);
    (docs, b.next)
}

/// Prints a term, parenthesizing every open mixfix argument.
pub fn show(sig: &Signature, t: &Term) -> String {
    let (docs, _) = build(sig, t, None);
    let mut toks = Vec::new();
    render(&docs, &HashSet::new(), &mut toks);
    join(&toks)
}

fn show_named(sig: &Signature, t: &Term, names: &HashMap<Var, String>, pretty: bool) -> String {
    let (docs, n) = build(sig, t, Some(names));
    let mut dropped = HashSet::new();
    if pretty && n > 0 {
        let mut tp = TermParser::new(sig);
        for v in t.vars() {
            let shown = names.get(&v).cloned().unwrap_or_else(|| v.name.to_string());
            tp.vars.insert(shown, v.clone());
        }
        let renamed_ok = |toks: &[(String, bool)]| -> bool {
            let text = join(toks);
            matches!(tp.parse(&text), Ok(r) if r == *t)
        };
        for id in 0..n {
            dropped.insert(id);
            let mut toks = Vec::new();
            render(&docs, &dropped, &mut toks);
            if !renamed_ok(&toks) {
                dropped.remove(&id);
            }
        }
    }
    let mut toks = Vec::new();
    render(&docs, &dropped, &mut toks);
    join(&toks)
}

/// Like [`show`] but drops parentheses whenever the text still parses back to `t`.
pub fn show_pretty(sig: &Signature, t: &Term) -> String {
    show_named(sig, t, &HashMap::new(), true)
}

/// What to print as a module.
pub struct ModuleOut<'a> {
    pub name: &'a str,
    pub sig: &'a Signature,
    pub ops: Vec<SymId>,
    pub equations: &'a [Equation],
    pub header: Vec<String>,
    pub pretty: bool,
}

impl<'a> ModuleOut<'a> {
    /// Every declared operator except the NAT built-ins.
    pub fn of_theory(th: &'a Theory) -> ModuleOut<'a> {
        let sig = &*th.sig;
        let ops = sig.symbols().filter(|(_, s)| !is_nat_builtin(sig, &s.name, s.arity)).map(|(i, _)| i).collect();
        ModuleOut { name: &th.name, sig, ops, equations: &th.equations, header: Vec::new(), pretty: true }
    }
}

fn is_nat_builtin(sig: &Signature, name: &str, arity: usize) -> bool {
    sig.nat && ((name == "0" && arity == 0) || (name == "s_" && arity == 1))
}

pub fn print_theory(th: &Theory) -> String {
    print_module(&ModuleOut::of_theory(th))
}

pub fn print_module(m: &ModuleOut<'_>) -> String {
    let sig = m.sig;
    let mut out = String::new();
    for h in &m.header {
        let _ = writeln!(out, "--- {h}");
    }
    let _ = writeln!(out, "fmod {} is", m.name);
    if sig.nat {
        let _ = writeln!(out, "  protecting NAT .");
    }
    let sorts: Vec<&str> = sig
        .sorts
        .ids()
        .filter(|&s| !sig.sorts.is_synthesized(s) && !(sig.nat && &**sig.sorts.name(s) == "Nat"))
        .map(|s| &**sig.sorts.name(s))
        .collect();
    if !sorts.is_empty() {
        let _ = writeln!(out, "  sorts {} .", sorts.join(" "));
    }
    for (lo, hi) in sig.sorts.edges() {
        let _ = writeln!(out, "  subsort {} < {} .", sig.sorts.name(lo), sig.sorts.name(hi));
    }
    for &f in &m.ops {
        let s = sig.sym(f);
        let mut attrs = Vec::new();
        if s.axioms.assoc {
            attrs.push("assoc".to_string());
        }
        if s.axioms.comm {
            attrs.push("comm".to_string());
        }
        if let Some(id) = s.axioms.identity {
            let e = &sig.sym(id.elem).name;
            attrs.push(match id.side {
                Side::Both => format!("id: {e}"),
                Side::Left => format!("left id: {e}"),
                Side::Right => format!("right id: {e}"),
            });
        }
        if s.ctor_attr {
            attrs.push("ctor".to_string());
        }
        let attr = if attrs.is_empty() { String::new() } else { format!(" [{}]", attrs.join(" ")) };
        for d in &s.decls {
            let args: Vec<&str> = d.args.iter().map(|&a| &**sig.sorts.name(a)).collect();
            let sep = if args.is_empty() { "" } else { " " };
            let _ = writeln!(out, "  op {} : {}{sep}-> {}{attr} .", s.name, args.join(" "), sig.sorts.name(d.result));
        }
    }
    // variable display names, declared once per sort
    let mut declared: BTreeMap<String, Var> = BTreeMap::new();
    let mut decl_order: Vec<String> = Vec::new();
    let mut per_eq: Vec<HashMap<Var, String>> = Vec::new();
    for eq in m.equations {
        let mut local: HashMap<Var, String> = HashMap::new();
        let mut used: HashSet<String> = HashSet::new();
        let mut vs = eq.lhs.vars();
        for v in eq.rhs.vars() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        for v in vs {
            let base = v.base().to_string();
            let mut cand = base.clone();
            loop {
                let clash_op = sig.lookup(&cand, 0).is_some() || (sig.nat && cand.parse::<u64>().is_ok());
                let ok_global = declared.get(&cand).is_none_or(|w| w.sort == v.sort);
                if !clash_op && ok_global && !used.contains(&cand) {
                    break;
                }
                cand.push('\'');
            }
            if !declared.contains_key(&cand) {
                declared.insert(cand.clone(), Var::new(&cand, v.sort, sig));
                decl_order.push(cand.clone());
            }
            used.insert(cand.clone());
            local.insert(v, cand);
        }
        per_eq.push(local);
    }
    for n in &decl_order {
        let _ = writeln!(out, "  var {} : {} .", n, declared[n].sort_name);
    }
    for (eq, names) in m.equations.iter().zip(&per_eq) {
        let label = eq.label.as_ref().map(|l| format!("[{l}] : ")).unwrap_or_default();
        let lhs = show_named(sig, &eq.lhs, names, m.pretty);
        let rhs = show_named(sig, &eq.rhs, names, m.pretty);
        let variant = if eq.variant { " [variant]" } else { "" };
        let _ = writeln!(out, "  eq {label}{lhs} = {rhs}{variant} .");
    }
    out.push_str("endfm\n");
    out
}
