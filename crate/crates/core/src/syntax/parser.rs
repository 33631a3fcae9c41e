//! Module files and mixfix terms.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::signature::{Equation, OpSpec, Side, Signature, SortGraph, SymId, Theory, Tpl};
use crate::syntax::lexer::{is_keyword, lex, Tok};
use crate::term::{Term, Var};

/// A parsed functional module.
#[derive(Clone, Debug)]
pub struct Module {
    pub name: String,
    pub sorts: Vec<String>,
    pub subsorts: Vec<(String, String)>,
    pub ops: Vec<OpSpec>,
    pub vars: Vec<(String, String)>,
    pub nat: bool,
    pub theory: Arc<Theory>,
}

impl Module {
    pub fn sig(&self) -> &Signature {
        &self.theory.sig
    }

    /// Term parser over the module's declared variables.
    pub fn term_parser(&self) -> TermParser<'_> {
        let sig = self.sig();
        let mut tp = TermParser::new(sig);
        for (n, s) in &self.vars {
            if let Ok(sid) = sig.sorts.id(s) {
                tp.vars.insert(n.clone(), Var::new(n, sid, sig));
            }
        }
        tp
    }

    pub fn parse_term(&self, text: &str) -> Result<Term> {
        self.term_parser().parse(text)
    }
}

fn perr(t: &Tok, msg: impl Into<String>) -> Error {
    Error::Parse { line: t.line, col: t.col, msg: msg.into() }
}

fn eof_err(toks: &[Tok], msg: &str) -> Error {
    match toks.last() {
        Some(t) => Error::Parse { line: t.line, col: t.col + t.text.len(), msg: msg.to_string() },
        None => Error::Parse { line: 1, col: 1, msg: msg.to_string() },
    }
}

/// Splits a trailing `.` glued to a word when it ends a statement.
fn split_dots(toks: Vec<Tok>) -> Vec<Tok> {
    let mut out: Vec<Tok> = Vec::with_capacity(toks.len());
    for i in 0..toks.len() {
        let t = &toks[i];
        let next_kw = toks.get(i + 1).is_none_or(|n| is_keyword(&n.text));
        if t.text.len() > 1 && t.text.ends_with('.') && next_kw {
            let mut a = t.clone();
            a.text.pop();
            let d = Tok { text: ".".into(), line: t.line, col: t.col + a.text.len() };
            out.push(a);
            out.push(d);
        } else {
            out.push(t.clone());
        }
    }
    out
}

struct RawEq {
    label: Option<String>,
    lhs: Vec<Tok>,
    rhs: Vec<Tok>,
    variant: bool,
    at: Tok,
}

pub fn parse_module(src: &str) -> Result<Module> {
    let toks = split_dots(lex(src));
    if toks.is_empty() {
        return Err(eof_err(&toks, "expected `fmod`"));
    }
    if toks[0].text != "fmod" {
        return Err(perr(&toks[0], "expected `fmod`"));
    }
    let name = toks.get(1).ok_or_else(|| eof_err(&toks, "expected module name"))?.text.clone();
    match toks.get(2) {
        Some(t) if t.text == "is" => {}
        Some(t) => return Err(perr(t, "expected `is`")),
        None => return Err(eof_err(&toks, "expected `is`")),
    }
    let mut i = 3;
    let mut sorts: Vec<String> = Vec::new();
    let mut subsorts: Vec<(String, String)> = Vec::new();
    let mut ops: Vec<OpSpec> = Vec::new();
    let mut vars: Vec<(String, String)> = Vec::new();
    let mut raw_eqs: Vec<RawEq> = Vec::new();
    let mut nat = false;
    let mut ended = false;
    while i < toks.len() {
        let kw = &toks[i];
        if kw.text == "endfm" {
            ended = true;
            if let Some(extra) = toks.get(i + 1) {
                return Err(perr(extra, "unexpected text after `endfm`"));
            }
            break;
        }
        if !is_keyword(&kw.text) {
            return Err(perr(kw, format!("expected a declaration, found `{}`", kw.text)));
        }
        // statement body up to the terminating `.`
        let mut j = i + 1;
        loop {
            match toks.get(j) {
                None => return Err(eof_err(&toks, "missing `.` at end of statement")),
                Some(t) if t.text == "." && toks.get(j + 1).is_none_or(|n| is_keyword(&n.text)) => break,
                Some(t) if is_keyword(&t.text) => return Err(perr(t, format!("missing `.` before `{}`", t.text))),
                _ => j += 1,
            }
        }
        let body = &toks[i + 1..j];
        match kw.text.as_str() {
            "protecting" | "pr" | "including" | "inc" | "extending" | "ex" => {
                if body.len() == 1 && body[0].text == "NAT" {
                    nat = true;
                } else {
                    let at = body.first().unwrap_or(kw);
                    return Err(Error::UnsupportedFeature(format!(
                        "import of `{}` at {}:{}",
                        body.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" "),
                        at.line,
                        at.col
                    )));
                }
            }
            "sort" | "sorts" => {
                if body.is_empty() {
                    return Err(perr(kw, "expected sort names"));
                }
                for t in body {
                    sorts.push(t.text.clone());
                }
            }
            "subsort" | "subsorts" => {
                let groups: Vec<&[Tok]> = body.split(|t| t.text == "<").collect();
                if groups.len() < 2 || groups.iter().any(|g| g.is_empty()) {
                    return Err(perr(kw, "malformed subsort declaration"));
                }
                for w in groups.windows(2) {
                    for lo in w[0] {
                        for hi in w[1] {
                            subsorts.push((lo.text.clone(), hi.text.clone()));
                        }
                    }
                }
            }
            "op" | "ops" => ops.extend(parse_op(kw, body)?),
            "var" | "vars" => {
                let colon = body.iter().position(|t| t.text == ":").ok_or_else(|| perr(kw, "expected `:` in variable declaration"))?;
                if colon == 0 || colon + 2 != body.len() {
                    return Err(perr(kw, "malformed variable declaration"));
                }
                for t in &body[..colon] {
                    vars.push((t.text.clone(), body[colon + 1].text.clone()));
                }
            }
            "eq" => raw_eqs.push(parse_eq(kw, body)?),
            other => return Err(Error::UnsupportedFeature(format!("`{other}` at {}:{}", kw.line, kw.col))),
        }
        i = j + 1;
    }
    if !ended {
        return Err(eof_err(&toks, "missing `endfm`"));
    }
    let mut all_sorts = Vec::new();
    let mut all_ops = Vec::new();
    if nat {
        all_sorts.push("Nat".to_string());
        all_ops.push(OpSpec::new("0", &[], "Nat"));
        all_ops.push(OpSpec::new("s_", &["Nat"], "Nat"));
    }
    all_sorts.extend(sorts.iter().cloned());
    all_ops.extend(ops.iter().cloned());
    let graph = SortGraph::new(&all_sorts, &subsorts)?;
    let mut sig = Signature::new(graph, &all_ops)?;
    sig.nat = nat;
    let sig = Arc::new(sig);
    let mut tp = TermParser::new(&sig);
    for (n, s) in &vars {
        let sid = sig.sorts.id(s)?;
        tp.vars.insert(n.clone(), Var::new(n, sid, &sig));
    }
    let mut eqs = Vec::new();
    for r in raw_eqs {
        let lhs = tp.parse_tokens(&r.lhs).map_err(|e| relocate(e, &r.at))?;
        let rhs = tp.parse_tokens(&r.rhs).map_err(|e| relocate(e, &r.at))?;
        eqs.push(Equation { label: r.label, lhs, rhs, variant: r.variant });
    }
    let theory = Theory::new(&name, sig.clone(), eqs)?;
    Ok(Module { name, sorts, subsorts, ops, vars, nat, theory: Arc::new(theory) })
}

fn relocate(e: Error, at: &Tok) -> Error {
    match e {
        Error::Parse { line: 0, msg, .. } => Error::Parse { line: at.line, col: at.col, msg },
        other => other,
    }
}

fn parse_op(kw: &Tok, body: &[Tok]) -> Result<Vec<OpSpec>> {
    let colon = body.iter().position(|t| t.text == ":").ok_or_else(|| perr(kw, "expected `:` in operator declaration"))?;
    let arrow = body.iter().position(|t| t.text == "->").ok_or_else(|| perr(kw, "expected `->` in operator declaration"))?;
    if colon == 0 || arrow < colon || arrow + 1 >= body.len() {
        return Err(perr(kw, "malformed operator declaration"));
    }
    let names: Vec<String> = if kw.text == "op" {
        vec![body[..colon].iter().map(|t| t.text.as_str()).collect::<String>()]
    } else {
        let mut v = Vec::new();
        let mut k = 0;
        while k < colon {
            if body[k].text == "(" {
                let close = (k..colon).find(|&m| body[m].text == ")").ok_or_else(|| perr(&body[k], "unbalanced `(`"))?;
                v.push(body[k + 1..close].iter().map(|t| t.text.as_str()).collect::<String>());
                k = close + 1;
            } else {
                v.push(body[k].text.clone());
                k += 1;
            }
        }
        v
    };
    let args: Vec<String> = body[colon + 1..arrow].iter().map(|t| t.text.clone()).collect();
    let result = body[arrow + 1].text.clone();
    let mut spec = OpSpec::new("", &[], &result);
    spec.args = args;
    let rest = &body[arrow + 2..];
    if !rest.is_empty() {
        if rest[0].text != "[" || rest.last().unwrap().text != "]" {
            return Err(perr(&rest[0], "expected attribute list"));
        }
        parse_attrs(&rest[1..rest.len() - 1], &mut spec)?;
    }
    let arity = spec.args.len();
    let mut out = Vec::new();
    for n in names {
        let holes = n.chars().filter(|&c| c == '_').count();
        if holes > 0 && holes != arity {
            return Err(perr(kw, format!("operator `{n}` has {holes} placeholders but arity {arity}")));
        }
        let mut s = spec.clone();
        s.name = n;
        out.push(s);
    }
    Ok(out)
}

fn parse_attrs(toks: &[Tok], spec: &mut OpSpec) -> Result<()> {
    let mut k = 0;
    while k < toks.len() {
        let t = &toks[k];
        match t.text.as_str() {
            "assoc" => spec.assoc = true,
            "comm" => spec.comm = true,
            "ctor" => spec.ctor = true,
            "variant" | "memo" => {}
            "id:" | "left" | "right" => {
                let side = match t.text.as_str() {
                    "left" => Side::Left,
                    "right" => Side::Right,
                    _ => Side::Both,
                };
                if side != Side::Both {
                    k += 1;
                    if toks.get(k).map(|x| x.text.as_str()) != Some("id:") {
                        return Err(perr(t, "expected `id:`"));
                    }
                }
                k += 1;
                let e = toks.get(k).ok_or_else(|| perr(t, "expected identity element"))?;
                spec.identity = Some((e.text.clone(), side));
            }
            "prec" => k += 1,
            "gather" | "format" => {
                k += 1;
                if toks.get(k).map(|x| x.text.as_str()) == Some("(") {
                    while k < toks.len() && toks[k].text != ")" {
                        k += 1;
                    }
                }
            }
            other => return Err(Error::UnsupportedFeature(format!("attribute `{other}` at {}:{}", t.line, t.col))),
        }
        k += 1;
    }
    Ok(())
}

fn parse_eq(kw: &Tok, body: &[Tok]) -> Result<RawEq> {
    let mut body = body;
    let mut label = None;
    if body.len() >= 4 && body[0].text == "[" && body[2].text == "]" && body[3].text == ":" {
        label = Some(body[1].text.clone());
        body = &body[4..];
    }
    let mut variant = false;
    if body.last().map(|t| t.text.as_str()) == Some("]") {
        if let Some(open) = body.iter().rposition(|t| t.text == "[") {
            let inner = &body[open + 1..body.len() - 1];
            let known = inner.iter().all(|t| matches!(t.text.as_str(), "variant" | "nonexec" | "label") || open + 1 < body.len());
            if known && inner.iter().any(|t| matches!(t.text.as_str(), "variant" | "nonexec" | "label")) {
                let mut k = 0;
                while k < inner.len() {
                    match inner[k].text.as_str() {
                        "variant" | "nonexec" => {
                            if inner[k].text == "variant" {
                                variant = true;
                            }
                        }
                        "label" => {
                            k += 1;
                            label = inner.get(k).map(|t| t.text.clone());
                        }
                        other => return Err(Error::UnsupportedFeature(format!("equation attribute `{other}`"))),
                    }
                    k += 1;
                }
                body = &body[..open];
            }
        }
    }
    let mut depth = 0i32;
    let mut eqpos = None;
    for (k, t) in body.iter().enumerate() {
        match t.text.as_str() {
            "(" => depth += 1,
            ")" => depth -= 1,
            "=" if depth == 0 => {
                if eqpos.is_some() {
                    return Err(perr(t, "more than one `=` in equation"));
                }
                eqpos = Some(k);
            }
            _ => {}
        }
    }
    let e = eqpos.ok_or_else(|| perr(kw, "expected `=` in equation"))?;
    if e == 0 || e + 1 == body.len() {
        return Err(perr(kw, "empty side in equation"));
    }
    Ok(RawEq { label, lhs: body[..e].to_vec(), rhs: body[e + 1..].to_vec(), variant, at: kw.clone() })
}

// ---------------------------------------------------------------------------
// terms

/// Sort-directed mixfix term parser.
pub struct TermParser<'a> {
    pub sig: &'a Signature,
    pub vars: HashMap<String, Var>,
    pub lets: HashMap<String, Term>,
    mixfix: Vec<(SymId, Vec<Tpl>)>,
}

type Memo = RefCell<HashMap<(usize, usize), Rc<Vec<Term>>>>;

impl<'a> TermParser<'a> {
    pub fn new(sig: &'a Signature) -> TermParser<'a> {
        let mixfix = sig.symbols().filter_map(|(id, s)| s.template.clone().map(|t| (id, t))).collect();
        TermParser { sig, vars: HashMap::new(), lets: HashMap::new(), mixfix }
    }

    pub fn parse(&self, text: &str) -> Result<Term> {
        let toks = lex(text);
        self.parse_tokens(&toks)
    }

    pub fn parse_tokens(&self, toks: &[Tok]) -> Result<Term> {
        if toks.is_empty() {
            return Err(Error::Parse { line: 0, col: 0, msg: "empty term".into() });
        }
        let words: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        let memo: Memo = RefCell::new(HashMap::new());
        let res = self.span(&words, 0, words.len(), &memo);
        match res.len() {
            1 => Ok(res[0].clone()),
            0 => Err(perr(&toks[0], format!("no well-sorted parse for `{}`", words.join(" ")))),
            _ => Err(perr(
                &toks[0],
                format!(
                    "ambiguous term `{}`: {}",
                    words.join(" "),
                    res.iter().map(|t| crate::syntax::show(self.sig, t)).collect::<Vec<_>>().join(" | ")
                ),
            )),
        }
    }

    fn balanced(w: &[&str]) -> bool {
        let mut d = 0i32;
        for t in w {
            match *t {
                "(" => d += 1,
                ")" => {
                    d -= 1;
                    if d < 0 {
                        return false;
                    }
                }
                _ => {}
            }
        }
        d == 0
    }

    fn span(&self, w: &[&str], i: usize, j: usize, memo: &Memo) -> Rc<Vec<Term>> {
        if let Some(r) = memo.borrow().get(&(i, j)) {
            return r.clone();
        }
        let mut out: Vec<Term> = Vec::new();
        if i < j && Self::balanced(&w[i..j]) {
            self.span_into(w, i, j, memo, &mut out);
        }
        out.retain(|t| t.sort().is_some());
        out.sort();
        out.dedup();
        let r = Rc::new(out);
        memo.borrow_mut().insert((i, j), r.clone());
        r
    }

    fn span_into(&self, w: &[&str], i: usize, j: usize, memo: &Memo, out: &mut Vec<Term>) {
        let sig = self.sig;
        if j - i == 1 {
            let t = w[i];
            if let Some(x) = self.lets.get(t) {
                out.push(x.clone());
                return;
            }
            if let Some(v) = self.vars.get(t) {
                out.push(Term::var(v.clone()));
            }
            if let Some(k) = t.rfind(':') {
                if k > 0 && k + 1 < t.len() {
                    if let Ok(s) = sig.sorts.id(&t[k + 1..]) {
                        out.push(Term::var(Var::new(&t[..k], s, sig)));
                    }
                }
            }
            if let Some(c) = sig.lookup(t, 0) {
                out.push(sig.constant_sym(c));
            } else if sig.nat {
                if let Ok(n) = t.parse::<u64>() {
                    out.push(numeral(sig, n));
                }
            }
        }
        if w[i] == "(" && w[j - 1] == ")" && j - i >= 3 && Self::balanced(&w[i + 1..j - 1]) {
            out.extend(self.span(w, i + 1, j - 1, memo).iter().cloned());
        }
        // prefix application f(a1, ..., an)
        if j - i >= 3 && w[i + 1] == "(" && w[j - 1] == ")" && Self::balanced(&w[i + 2..j - 1]) {
            let mut parts = Vec::new();
            let mut d = 0;
            let mut start = i + 2;
            for k in i + 2..j - 1 {
                match w[k] {
                    "(" => d += 1,
                    ")" => d -= 1,
                    "," if d == 0 => {
                        parts.push((start, k));
                        start = k + 1;
                    }
                    _ => {}
                }
            }
            parts.push((start, j - 1));
            if let Some(f) = sig.lookup(w[i], parts.len()) {
                let cands: Vec<Rc<Vec<Term>>> = parts.iter().map(|&(a, b)| self.span(w, a, b, memo)).collect();
                let mut cur = Vec::new();
                product(&cands, 0, &mut cur, &mut |args| out.push(sig.app(f, args.to_vec())));
            }
        }
        for (f, tpl) in &self.mixfix {
            if let Some(Tpl::Tok(s)) = tpl.first() {
                if w[i] != s {
                    continue;
                }
            }
            if let Some(Tpl::Tok(s)) = tpl.last() {
                if w[j - 1] != s {
                    continue;
                }
            }
            let mut acc: Vec<Vec<Term>> = Vec::new();
            self.tpl(w, tpl, i, j, memo, &mut Vec::new(), &mut acc);
            for args in acc {
                out.push(sig.app(*f, args));
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn tpl(&self, w: &[&str], tpl: &[Tpl], i: usize, j: usize, memo: &Memo, cur: &mut Vec<Term>, acc: &mut Vec<Vec<Term>>) {
        if tpl.is_empty() {
            if i == j {
                acc.push(cur.clone());
            }
            return;
        }
        if acc.len() > 4096 {
            return;
        }
        match &tpl[0] {
            Tpl::Tok(s) => {
                if i < j && w[i] == s {
                    self.tpl(w, &tpl[1..], i + 1, j, memo, cur, acc);
                }
            }
            Tpl::Hole => {
                let rest_min = tpl[1..].len();
                if j < i + 1 + rest_min {
                    return;
                }
                let ends: Vec<usize> = if tpl.len() == 1 {
                    vec![j]
                } else {
                    let hi = j - rest_min;
                    match &tpl[1] {
                        Tpl::Tok(s) => (i + 1..=hi).filter(|&e| w[e] == s).collect(),
                        Tpl::Hole => (i + 1..=hi).collect(),
                    }
                };
                for e in ends {
                    let cands = self.span(w, i, e, memo);
                    for c in cands.iter() {
                        cur.push(c.clone());
                        self.tpl(w, &tpl[1..], e, j, memo, cur, acc);
                        cur.pop();
                    }
                }
            }
        }
    }
}

fn product(cands: &[Rc<Vec<Term>>], k: usize, cur: &mut Vec<Term>, f: &mut dyn FnMut(&[Term])) {
    if k == cands.len() {
        f(cur);
        return;
    }
    for c in cands[k].iter() {
        cur.push(c.clone());
        product(cands, k + 1, cur, f);
        cur.pop();
    }
}

/// `s^n(0)` in the built-in naturals.
pub fn numeral(sig: &Signature, n: u64) -> Term {
    let z = sig.lookup("0", 0).expect("NAT zero");
    let s = sig.lookup("s_", 1).expect("NAT successor");
    let mut t = sig.constant_sym(z);
    for _ in 0..n {
        t = sig.app(s, vec![t]);
    }
    t
}
