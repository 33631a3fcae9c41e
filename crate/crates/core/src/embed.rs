//! Homeomorphic embedding modulo the axioms, used as the unfolding whistle.

use std::collections::HashMap;

use crate::signature::{Signature, Theory};
use crate::term::Term;

struct Emb<'a> {
    sig: &'a Signature,
    memo: HashMap<(Term, Term), bool>,
}

impl<'a> Emb<'a> {
    fn emb(&mut self, u: &Term, t: &Term) -> bool {
        if u == t {
            return true;
        }
        if u.is_var() {
            return !t.is_ground();
        }
        if t.is_var() || u.size() > t.size() {
            return false;
        }
        let key = (u.clone(), t.clone());
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let r = self.couple(u, t) || self.dive(u, t);
        self.memo.insert(key, r);
        r
    }

    fn dive(&mut self, u: &Term, t: &Term) -> bool {
        match t.ac_args() {
            Some(m) => m.iter().any(|(x, _)| self.emb(u, x)),
            None => t.list_args().unwrap_or(&[]).iter().any(|x| self.emb(u, x)),
        }
    }

    fn couple(&mut self, u: &Term, t: &Term) -> bool {
        let (Some(f), Some(g)) = (u.sym(), t.sym()) else { return false };
        if f != g {
            return false;
        }
        let us = u.args();
        let ts = t.args();
        let ax = self.sig.axioms(f);
        if ax.assoc && ax.comm {
            return self.injective(&us, &ts);
        }
        if ax.assoc {
            // order-preserving: every u-argument lands in a later t-argument
            let mut j = 0;
            for x in &us {
                while j < ts.len() && !self.emb(x, &ts[j]) {
                    j += 1;
                }
                if j == ts.len() {
                    return false;
                }
                j += 1;
            }
            return true;
        }
        if us.len() != ts.len() {
            return false;
        }
        let straight = us.iter().zip(&ts).all(|(x, y)| self.emb(x, y));
        if straight {
            return true;
        }
        ax.comm && us.len() == 2 && self.emb(&us[0], &ts[1]) && self.emb(&us[1], &ts[0])
    }

    /// Injective assignment of the u-arguments to t-arguments (augmenting paths).
    fn injective(&mut self, us: &[Term], ts: &[Term]) -> bool {
        if us.len() > ts.len() {
            return false;
        }
        let ok: Vec<Vec<bool>> = us.iter().map(|x| ts.iter().map(|y| self.emb(x, y)).collect()).collect();
        let mut owner: Vec<Option<usize>> = vec![None; ts.len()];
        fn augment(i: usize, ok: &[Vec<bool>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
            for j in 0..owner.len() {
                if ok[i][j] && !seen[j] {
                    seen[j] = true;
                    if owner[j].is_none_or(|k| augment(k, ok, owner, seen)) {
                        owner[j] = Some(i);
                        return true;
                    }
                }
            }
            false
        }
        for i in 0..us.len() {
            let mut seen = vec![false; ts.len()];
            if !augment(i, &ok, &mut owner, &mut seen) {
                return false;
            }
        }
        true
    }
}

/// `u ⊴_B t`: `t` reduces to `u` by deleting operators, working on flattened
/// canonical forms. A variable embeds only in terms that contain a variable.
pub fn embeds_modulo(u: &Term, t: &Term, th: &Theory) -> bool {
    embeds_sig(u, t, &th.sig)
}

pub fn embeds_sig(u: &Term, t: &Term, sig: &Signature) -> bool {
    Emb { sig, memo: HashMap::new() }.emb(u, t)
}

/// Plain syntactic embedding over the displayed argument lists, ignoring axioms.
pub fn classic_embedding(u: &Term, t: &Term) -> bool {
    if u.is_var() {
        return !t.is_ground();
    }
    if t.is_var() {
        return false;
    }
    let ts = t.args();
    if ts.iter().any(|x| classic_embedding(u, x)) {
        return true;
    }
    if u.name() != t.name() || u.arity() != t.arity() {
        return false;
    }
    u.args().iter().zip(&ts).all(|(x, y)| classic_embedding(x, y))
}
