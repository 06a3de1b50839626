//! Capture-avoiding substitution, alpha-conversion and first-order grafting.
//!
//! Substitution is simultaneous: `<x/y, y/x> f(x, y) = f(y, x)`, not the
//! composition of the two singleton substitutions. Grafting replaces
//! variables directly, with no regard for binders.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::term::{Term, FRESH_PREFIX};
use crate::typing::Context;

/// A finite mapping from variable names to terms. Identity bindings are
/// dropped on insertion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution {
    map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn identity() -> Substitution {
        Substitution::default()
    }

    pub fn singleton(var: impl Into<String>, image: Term) -> Substitution {
        let mut s = Substitution::identity();
        s.bind(var, image);
        s
    }

    pub fn bind(&mut self, var: impl Into<String>, image: Term) {
        let var = var.into();
        if image == Term::Var(var.clone()) {
            self.map.remove(&var);
        } else {
            self.map.insert(var, image);
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// The image terms.
    pub fn range(&self) -> impl Iterator<Item = &Term> {
        self.map.values()
    }

    /// Free variables of the range.
    pub fn range_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in self.map.values() {
            out.extend(t.free_vars());
        }
        out
    }

    pub fn restrict(&self, keep: &BTreeSet<String>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, (x, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}/{}", crate::syntax::print(t))?;
        }
        write!(f, ">")
    }
}

/// Smallest reserved name `#k` not present in `avoid`.
pub fn fresh_name(avoid: &BTreeSet<String>) -> String {
    let mut k = 1u64;
    loop {
        let candidate = format!("{FRESH_PREFIX}{k}");
        if !avoid.contains(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

fn all_var_names(t: &Term, out: &mut BTreeSet<String>) {
    for s in t.subterms() {
        if let Term::Var(x) = s {
            out.insert(x.clone());
        }
        if let Term::Rule(_, _, Some(ctx)) = s {
            for (v, _) in ctx.entries() {
                out.insert(v.to_string());
            }
        }
    }
}

/// Every occurrence of `from` becomes `to`, binders and local typing
/// contexts included. Alpha-preserving when `to` is globally fresh.
fn rename_var(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Var(x) => {
            if x == from {
                Term::var(to)
            } else {
                t.clone()
            }
        }
        Term::Fun(f, args) => Term::Fun(f.clone(), rename_all(args, from, to)),
        Term::Set(es) => Term::set(rename_all(es, from, to)),
        Term::Rule(l, r, ctx) => Term::Rule(
            Box::new(rename_var(l, from, to)),
            Box::new(rename_var(r, from, to)),
            ctx.as_ref().map(|c| c.rename_var(from, to)),
        ),
        Term::App(f, a) => Term::app(rename_var(f, from, to), rename_var(a, from, to)),
        Term::First(es) => Term::First(rename_all(es, from, to)),
        Term::Choice(es) => Term::Choice(rename_all(es, from, to)),
        Term::Dc(es) => Term::Dc(rename_all(es, from, to)),
        Term::UChoice(es) => Term::uchoice(rename_all(es, from, to)),
        Term::Phi(a) => Term::Phi(Box::new(rename_var(a, from, to))),
        Term::Psi(a) => Term::Psi(Box::new(rename_var(a, from, to))),
    }
}

fn rename_all(ts: &[Term], from: &str, to: &str) -> Vec<Term> {
    ts.iter().map(|t| rename_var(t, from, to)).collect()
}

/// Alpha-conversion: renames the rule-bound variables of `t` that
/// occur in `avoid` to fresh reserved names, innermost rules first.
pub fn alpha_rename(t: &Term, avoid: &BTreeSet<String>) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Fun(f, args) => Term::Fun(f.clone(), alpha_all(args, avoid)),
        Term::Set(es) => Term::set(alpha_all(es, avoid)),
        Term::App(f, a) => Term::app(alpha_rename(f, avoid), alpha_rename(a, avoid)),
        Term::First(es) => Term::First(alpha_all(es, avoid)),
        Term::Choice(es) => Term::Choice(alpha_all(es, avoid)),
        Term::Dc(es) => Term::Dc(alpha_all(es, avoid)),
        Term::UChoice(es) => Term::uchoice(alpha_all(es, avoid)),
        Term::Phi(a) => Term::Phi(Box::new(alpha_rename(a, avoid))),
        Term::Psi(a) => Term::Psi(Box::new(alpha_rename(a, avoid))),
        Term::Rule(l, r, ctx) => {
            let mut l2 = alpha_rename(l, avoid);
            let mut r2 = alpha_rename(r, avoid);
            let mut ctx2 = ctx.clone();
            let clashing: Vec<String> = l
                .free_vars()
                .into_iter()
                .filter(|v| avoid.contains(v))
                .collect();
            if !clashing.is_empty() {
                let mut taken = avoid.clone();
                all_var_names(&l2, &mut taken);
                all_var_names(&r2, &mut taken);
                for v in clashing {
                    let fresh = fresh_name(&taken);
                    taken.insert(fresh.clone());
                    l2 = rename_var(&l2, &v, &fresh);
                    r2 = rename_var(&r2, &v, &fresh);
                    ctx2 = ctx2.map(|c| c.rename_var(&v, &fresh));
                }
            }
            Term::Rule(Box::new(l2), Box::new(r2), ctx2)
        }
    }
}

fn alpha_all(ts: &[Term], avoid: &BTreeSet<String>) -> Vec<Term> {
    ts.iter().map(|t| alpha_rename(t, avoid)).collect()
}

/// Simultaneous capture-avoiding substitution. Rule binders are
/// renamed when they collide with the free variables of the images about to
/// enter their scope; bound occurrences of domain variables are shielded.
pub fn apply_subst(subst: &Substitution, t: &Term) -> Term {
    match t {
        Term::Var(x) => subst.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Fun(f, args) => Term::Fun(f.clone(), apply_all(subst, args)),
        Term::Set(es) => Term::set(apply_all(subst, es)),
        Term::App(f, a) => Term::app(apply_subst(subst, f), apply_subst(subst, a)),
        Term::First(es) => Term::First(apply_all(subst, es)),
        Term::Choice(es) => Term::Choice(apply_all(subst, es)),
        Term::Dc(es) => Term::Dc(apply_all(subst, es)),
        Term::UChoice(es) => Term::uchoice(apply_all(subst, es)),
        Term::Phi(a) => Term::Phi(Box::new(apply_subst(subst, a))),
        Term::Psi(a) => Term::Psi(Box::new(apply_subst(subst, a))),
        Term::Rule(l, r, ctx) => {
            let relevant = subst.restrict(&t.free_vars());
            if relevant.is_identity() {
                return t.clone();
            }
            let bound = l.free_vars();
            let range_vars = relevant.range_vars();
            let capturing: Vec<String> = bound
                .iter()
                .filter(|b| range_vars.contains(*b))
                .cloned()
                .collect();
            let (l2, r2, ctx2) = if capturing.is_empty() {
                ((**l).clone(), (**r).clone(), ctx.clone())
            } else {
                let mut taken: BTreeSet<String> = range_vars;
                taken.extend(relevant.domain().map(str::to_string));
                all_var_names(l, &mut taken);
                all_var_names(r, &mut taken);
                let mut l2 = (**l).clone();
                let mut r2 = (**r).clone();
                let mut ctx2 = ctx.clone();
                for v in capturing {
                    let fresh = fresh_name(&taken);
                    taken.insert(fresh.clone());
                    l2 = rename_var(&l2, &v, &fresh);
                    r2 = rename_var(&r2, &v, &fresh);
                    ctx2 = ctx2.map(|c| c.rename_var(&v, &fresh));
                }
                (l2, r2, ctx2)
            };
            Term::Rule(
                Box::new(apply_subst(&relevant, &l2)),
                Box::new(apply_subst(&relevant, &r2)),
                ctx2,
            )
        }
    }
}

fn apply_all(subst: &Substitution, ts: &[Term]) -> Vec<Term> {
    ts.iter().map(|t| apply_subst(subst, t)).collect()
}

/// First-order grafting: direct replacement with no alpha-conversion.
/// Capture is deliberate.
pub fn graft(subst: &Substitution, t: &Term) -> Term {
    match t {
        Term::Var(x) => subst.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Fun(f, args) => Term::Fun(f.clone(), graft_all(subst, args)),
        Term::Set(es) => Term::set(graft_all(subst, es)),
        Term::Rule(l, r, ctx) => Term::Rule(
            Box::new(graft(subst, l)),
            Box::new(graft(subst, r)),
            ctx.clone(),
        ),
        Term::App(f, a) => Term::app(graft(subst, f), graft(subst, a)),
        Term::First(es) => Term::First(graft_all(subst, es)),
        Term::Choice(es) => Term::Choice(graft_all(subst, es)),
        Term::Dc(es) => Term::Dc(graft_all(subst, es)),
        Term::UChoice(es) => Term::uchoice(graft_all(subst, es)),
        Term::Phi(a) => Term::Phi(Box::new(graft(subst, a))),
        Term::Psi(a) => Term::Psi(Box::new(graft(subst, a))),
    }
}

fn graft_all(subst: &Substitution, ts: &[Term]) -> Vec<Term> {
    ts.iter().map(|t| graft(subst, t)).collect()
}

/// Used by typed-mode contexts; re-exported here so `Context` can stay in
/// the typing module.
impl Context {
    pub(crate) fn rename_var(&self, from: &str, to: &str) -> Context {
        let mut out = Context::empty();
        for (v, ty) in self.entries() {
            let name = if v == from { to } else { v };
            out.insert_unchecked(name, ty.clone());
        }
        out
    }
}
