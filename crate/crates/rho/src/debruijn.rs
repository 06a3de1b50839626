//! De Bruijn terms, the translation from named terms, index matching, and
//! the explicit-substitution rules with their normal-form guarantees. Also
//! hosts the alpha-equality oracle used by tests (named terms compare equal
//! after translation).

use std::fmt;

use crate::eval::{NormalizeKind, ReductionConfig};
use crate::gate::StrategyGate;
use crate::term::Term;

/// A term of the explicit-substitution calculus. Rule binders are counted,
/// not named: `RuleN` binds indices `1..=binders` in both sides.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DbTerm {
    MetaVar(String),
    Index(u32),
    Fun(String, Vec<DbTerm>),
    Set(Vec<DbTerm>),
    RuleN {
        lhs: Box<DbTerm>,
        binders: u32,
        rhs: Box<DbTerm>,
    },
    App(Box<DbTerm>, Box<DbTerm>),
    Closure(Box<DbTerm>, ExplicitSubst),
}

/// An explicit substitution object: identity, shift, lift, cons and
/// composition, plus substitution meta-variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExplicitSubst {
    MetaVar(String),
    Id,
    Shift,
    Lift(Box<ExplicitSubst>),
    Cons(Box<DbTerm>, Box<ExplicitSubst>),
    Comp(Box<ExplicitSubst>, Box<ExplicitSubst>),
}

impl DbTerm {
    pub fn index(n: u32) -> DbTerm {
        assert!(n >= 1, "indices start at 1");
        DbTerm::Index(n)
    }

    pub fn fun(symbol: impl Into<String>, args: Vec<DbTerm>) -> DbTerm {
        DbTerm::Fun(symbol.into(), args)
    }

    pub fn cst(symbol: impl Into<String>) -> DbTerm {
        DbTerm::Fun(symbol.into(), Vec::new())
    }

    pub fn set(mut elements: Vec<DbTerm>) -> DbTerm {
        elements.sort();
        elements.dedup();
        DbTerm::Set(elements)
    }

    pub fn empty_set() -> DbTerm {
        DbTerm::Set(Vec::new())
    }

    pub fn rule_n(lhs: DbTerm, binders: u32, rhs: DbTerm) -> DbTerm {
        DbTerm::RuleN {
            lhs: Box::new(lhs),
            binders,
            rhs: Box::new(rhs),
        }
    }

    pub fn app(fun: DbTerm, arg: DbTerm) -> DbTerm {
        DbTerm::App(Box::new(fun), Box::new(arg))
    }

    pub fn closure(t: DbTerm, s: ExplicitSubst) -> DbTerm {
        DbTerm::Closure(Box::new(t), s)
    }

    pub fn is_empty_set(&self) -> bool {
        matches!(self, DbTerm::Set(es) if es.is_empty())
    }

    /// First-order over indices: only `Fun` and `Index` nodes.
    pub fn is_index_pattern(&self) -> bool {
        match self {
            DbTerm::Index(_) => true,
            DbTerm::Fun(_, args) => args.iter().all(DbTerm::is_index_pattern),
            _ => false,
        }
    }

    pub fn is_ground_first_order(&self) -> bool {
        match self {
            DbTerm::Fun(_, args) => args.iter().all(DbTerm::is_ground_first_order),
            _ => false,
        }
    }

    pub fn max_index(&self) -> u32 {
        match self {
            DbTerm::Index(n) => *n,
            DbTerm::Fun(_, args) => args.iter().map(DbTerm::max_index).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// No `Closure` node anywhere (the shape of sigma normal forms of
    /// meta-variable-free terms).
    pub fn is_closure_free(&self) -> bool {
        match self {
            DbTerm::Closure(..) => false,
            DbTerm::MetaVar(_) | DbTerm::Index(_) => true,
            DbTerm::Fun(_, es) | DbTerm::Set(es) => es.iter().all(DbTerm::is_closure_free),
            DbTerm::RuleN { lhs, rhs, .. } => lhs.is_closure_free() && rhs.is_closure_free(),
            DbTerm::App(f, a) => f.is_closure_free() && a.is_closure_free(),
        }
    }

    pub fn has_meta(&self) -> bool {
        match self {
            DbTerm::MetaVar(_) => true,
            DbTerm::Index(_) => false,
            DbTerm::Fun(_, es) | DbTerm::Set(es) => es.iter().any(DbTerm::has_meta),
            DbTerm::RuleN { lhs, rhs, .. } => lhs.has_meta() || rhs.has_meta(),
            DbTerm::App(f, a) => f.has_meta() || a.has_meta(),
            DbTerm::Closure(t, s) => t.has_meta() || s.has_meta(),
        }
    }
}

impl ExplicitSubst {
    pub fn lift(s: ExplicitSubst) -> ExplicitSubst {
        ExplicitSubst::Lift(Box::new(s))
    }

    pub fn lift_n(s: ExplicitSubst, n: u32) -> ExplicitSubst {
        (0..n).fold(s, |acc, _| ExplicitSubst::lift(acc))
    }

    pub fn cons(t: DbTerm, s: ExplicitSubst) -> ExplicitSubst {
        ExplicitSubst::Cons(Box::new(t), Box::new(s))
    }

    pub fn comp(a: ExplicitSubst, b: ExplicitSubst) -> ExplicitSubst {
        ExplicitSubst::Comp(Box::new(a), Box::new(b))
    }

    /// `shift^n` as a right-nested composition of shifts.
    pub fn shift_n(n: u32) -> ExplicitSubst {
        assert!(n >= 1);
        (1..n).fold(ExplicitSubst::Shift, |acc, _| {
            ExplicitSubst::comp(ExplicitSubst::Shift, acc)
        })
    }

    pub fn has_meta(&self) -> bool {
        match self {
            ExplicitSubst::MetaVar(_) => true,
            ExplicitSubst::Id | ExplicitSubst::Shift => false,
            ExplicitSubst::Lift(s) => s.has_meta(),
            ExplicitSubst::Cons(t, s) => t.has_meta() || s.has_meta(),
            ExplicitSubst::Comp(a, b) => a.has_meta() || b.has_meta(),
        }
    }
}

impl fmt::Display for DbTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DbTerm::MetaVar(x) => write!(f, "?{x}"),
            DbTerm::Index(n) => write!(f, "{n}"),
            DbTerm::Fun(sym, args) => {
                write!(f, "{sym}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            DbTerm::Set(es) => {
                write!(f, "{{")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
            DbTerm::RuleN { lhs, binders, rhs } => write!(f, "{lhs} ->{binders} {rhs}"),
            DbTerm::App(u, v) => write!(f, "[{u}]({v})"),
            DbTerm::Closure(t, s) => write!(f, "{t}<{s}>"),
        }
    }
}

impl ExplicitSubst {
    /// Length of a right-nested shift chain, if this is one.
    fn shift_chain(&self) -> Option<u32> {
        match self {
            ExplicitSubst::Shift => Some(1),
            ExplicitSubst::Comp(a, b) if matches!(**a, ExplicitSubst::Shift) => {
                b.shift_chain().map(|n| n + 1)
            }
            _ => None,
        }
    }
}

impl fmt::Display for ExplicitSubst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.shift_chain() {
            return if n == 1 {
                write!(f, "^")
            } else {
                write!(f, "^{n}")
            };
        }
        match self {
            ExplicitSubst::MetaVar(x) => write!(f, "?{x}"),
            ExplicitSubst::Id => write!(f, "ID"),
            ExplicitSubst::Shift => write!(f, "^"),
            ExplicitSubst::Lift(s) => write!(f, "lift({s})"),
            ExplicitSubst::Cons(t, s) => write!(f, "{t}.{s}"),
            ExplicitSubst::Comp(a, b) => write!(f, "({a} o {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslateError {
    UnboundVariable(String),
    /// Operator forms have no explicit-substitution counterpart.
    NotBaseTerm,
    /// Rule left sides must be first-order.
    NonFirstOrderPattern,
}

impl fmt::Display for TranslateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslateError::UnboundVariable(v) => {
                write!(f, "variable `{v}` is not in the referential")
            }
            TranslateError::NotBaseTerm => write!(f, "term uses operator forms"),
            TranslateError::NonFirstOrderPattern => {
                write!(f, "rule left side is not first-order")
            }
        }
    }
}

impl std::error::Error for TranslateError {}

/// Translates a named term into the index calculus. Rule binders are the
/// left side's variables in left-to-right first-occurrence order, prepended
/// to the referential.
pub fn to_debruijn(t: &Term, referential: &[String]) -> Result<DbTerm, TranslateError> {
    match t {
        Term::Var(x) => referential
            .iter()
            .position(|r| r == x)
            .map(|i| DbTerm::Index((i + 1) as u32))
            .ok_or_else(|| TranslateError::UnboundVariable(x.clone())),
        Term::Fun(f, args) => {
            let inner: Result<Vec<DbTerm>, _> =
                args.iter().map(|a| to_debruijn(a, referential)).collect();
            Ok(DbTerm::Fun(f.clone(), inner?))
        }
        Term::Set(es) => {
            let inner: Result<Vec<DbTerm>, _> =
                es.iter().map(|e| to_debruijn(e, referential)).collect();
            Ok(DbTerm::set(inner?))
        }
        Term::App(u, v) => Ok(DbTerm::app(
            to_debruijn(u, referential)?,
            to_debruijn(v, referential)?,
        )),
        Term::Rule(l, r, _) => {
            if !l.is_first_order() {
                return Err(TranslateError::NonFirstOrderPattern);
            }
            let bound = l.vars_in_order();
            let mut extended: Vec<String> = bound.clone();
            extended.extend(referential.iter().cloned());
            let lhs = to_debruijn(l, &extended)?;
            let rhs = to_debruijn(r, &extended)?;
            Ok(DbTerm::rule_n(lhs, bound.len() as u32, rhs))
        }
        _ => Err(TranslateError::NotBaseTerm),
    }
}

/// Alpha-equality of named terms, decided through the index translation.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    let fa = a.free_vars();
    if fa != b.free_vars() {
        return false;
    }
    let referential: Vec<String> = fa.into_iter().collect();
    match (to_debruijn(a, &referential), to_debruijn(b, &referential)) {
        (Ok(da), Ok(db)) => da == db,
        _ => false,
    }
}

/// Index matching: binds each of the pattern's indices `1..=n`, unmatched
/// indices mapping to themselves, and yields `t1. ... .tn.ID`; `ID` for the
/// empty system. `None` is failure.
pub fn match_db(l: &DbTerm, t: &DbTerm) -> Option<ExplicitSubst> {
    if !l.is_index_pattern() {
        return None;
    }
    let n = l.max_index() as usize;
    let mut bindings: Vec<Option<DbTerm>> = vec![None; n];
    if !decompose_db(l, t, &mut bindings) {
        return None;
    }
    let mut subst = ExplicitSubst::Id;
    for (i, b) in bindings.into_iter().enumerate().rev() {
        let image = b.unwrap_or(DbTerm::Index((i + 1) as u32));
        subst = ExplicitSubst::cons(image, subst);
    }
    Some(subst)
}

fn decompose_db(l: &DbTerm, t: &DbTerm, bindings: &mut Vec<Option<DbTerm>>) -> bool {
    match l {
        DbTerm::Index(i) => {
            let slot = (*i - 1) as usize;
            match &bindings[slot] {
                Some(prev) => prev == t,
                None => {
                    bindings[slot] = Some(t.clone());
                    true
                }
            }
        }
        DbTerm::Fun(f, largs) => match t {
            DbTerm::Fun(g, targs) if f == g && largs.len() == targs.len() => largs
                .iter()
                .zip(targs.iter())
                .all(|(li, ti)| decompose_db(li, ti, bindings)),
            _ => false,
        },
        _ => unreachable!("pattern checked first-order"),
    }
}

/// Names of the substitution-calculus rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[allow(non_camel_case_types)]
pub enum SigmaRule {
    lam,
    app,
    clos,
    vs1,
    vs2,
    fv,
    fv1,
    fv2,
    rv,
    rv1,
    rv2,
    id,
    set,
    ass,
    map,
    sc,
    sl1,
    sl2,
    l1,
    l2,
    le,
    il,
    ir,
    li,
    op,
}

impl fmt::Display for SigmaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// The substitution rule applicable at the head of a term node.
fn sigma_term_head(t: &DbTerm) -> Option<(SigmaRule, DbTerm)> {
    let DbTerm::Closure(inner, s) = t else {
        return None;
    };
    if matches!(s, ExplicitSubst::Id) {
        return Some((SigmaRule::id, (**inner).clone()));
    }
    match inner.as_ref() {
        DbTerm::RuleN { lhs, binders, rhs } => {
            let lifted = ExplicitSubst::lift_n(s.clone(), *binders);
            Some((
                SigmaRule::lam,
                DbTerm::rule_n(
                    DbTerm::closure((**lhs).clone(), lifted.clone()),
                    *binders,
                    DbTerm::closure((**rhs).clone(), lifted),
                ),
            ))
        }
        DbTerm::App(u, v) => Some((
            SigmaRule::app,
            DbTerm::app(
                DbTerm::closure((**u).clone(), s.clone()),
                DbTerm::closure((**v).clone(), s.clone()),
            ),
        )),
        DbTerm::Closure(u, s2) => Some((
            SigmaRule::clos,
            DbTerm::closure((**u).clone(), ExplicitSubst::comp(s2.clone(), s.clone())),
        )),
        DbTerm::Set(es) => Some((
            SigmaRule::set,
            DbTerm::set(
                es.iter()
                    .map(|e| DbTerm::closure(e.clone(), s.clone()))
                    .collect(),
            ),
        )),
        DbTerm::Fun(f, args) => Some((
            SigmaRule::op,
            DbTerm::Fun(
                f.clone(),
                args.iter()
                    .map(|a| DbTerm::closure(a.clone(), s.clone()))
                    .collect(),
            ),
        )),
        DbTerm::Index(n) => match s {
            ExplicitSubst::Shift => Some((SigmaRule::vs1, DbTerm::Index(n + 1))),
            ExplicitSubst::Cons(u, s2) => {
                if *n == 1 {
                    Some((SigmaRule::fv, (**u).clone()))
                } else {
                    Some((
                        SigmaRule::rv,
                        DbTerm::closure(DbTerm::Index(n - 1), (**s2).clone()),
                    ))
                }
            }
            ExplicitSubst::Lift(s2) => {
                if *n == 1 {
                    Some((SigmaRule::fv1, DbTerm::Index(1)))
                } else {
                    Some((
                        SigmaRule::rv1,
                        DbTerm::closure(
                            DbTerm::Index(n - 1),
                            ExplicitSubst::comp((**s2).clone(), ExplicitSubst::Shift),
                        ),
                    ))
                }
            }
            ExplicitSubst::Comp(first, rest) => match first.as_ref() {
                ExplicitSubst::Shift => Some((
                    SigmaRule::vs2,
                    DbTerm::closure(DbTerm::Index(n + 1), (**rest).clone()),
                )),
                ExplicitSubst::Lift(s2) => {
                    if *n == 1 {
                        Some((
                            SigmaRule::fv2,
                            DbTerm::closure(DbTerm::Index(1), (**rest).clone()),
                        ))
                    } else {
                        Some((
                            SigmaRule::rv2,
                            DbTerm::closure(
                                DbTerm::Index(n - 1),
                                ExplicitSubst::comp(
                                    (**s2).clone(),
                                    ExplicitSubst::comp(ExplicitSubst::Shift, (**rest).clone()),
                                ),
                            ),
                        ))
                    }
                }
                _ => None,
            },
            _ => None,
        },
        DbTerm::MetaVar(_) => None,
    }
}

/// The substitution rule applicable at the head of a substitution node.
fn sigma_subst_head(s: &ExplicitSubst) -> Option<(SigmaRule, ExplicitSubst)> {
    match s {
        ExplicitSubst::Lift(inner) if matches!(**inner, ExplicitSubst::Id) => {
            Some((SigmaRule::li, ExplicitSubst::Id))
        }
        ExplicitSubst::Comp(a, b) => {
            if matches!(**a, ExplicitSubst::Id) {
                return Some((SigmaRule::il, (**b).clone()));
            }
            if matches!(**b, ExplicitSubst::Id) {
                return Some((SigmaRule::ir, (**a).clone()));
            }
            match a.as_ref() {
                ExplicitSubst::Comp(x, y) => Some((
                    SigmaRule::ass,
                    ExplicitSubst::comp(
                        (**x).clone(),
                        ExplicitSubst::comp((**y).clone(), (**b).clone()),
                    ),
                )),
                ExplicitSubst::Cons(u, s1) => Some((
                    SigmaRule::map,
                    ExplicitSubst::cons(
                        DbTerm::closure((**u).clone(), (**b).clone()),
                        ExplicitSubst::comp((**s1).clone(), (**b).clone()),
                    ),
                )),
                ExplicitSubst::Shift => match b.as_ref() {
                    ExplicitSubst::Cons(_, s1) => Some((SigmaRule::sc, (**s1).clone())),
                    ExplicitSubst::Lift(s1) => Some((
                        SigmaRule::sl1,
                        ExplicitSubst::comp((**s1).clone(), ExplicitSubst::Shift),
                    )),
                    ExplicitSubst::Comp(b1, b2) => match b1.as_ref() {
                        ExplicitSubst::Lift(s1) => Some((
                            SigmaRule::sl2,
                            ExplicitSubst::comp(
                                (**s1).clone(),
                                ExplicitSubst::comp(ExplicitSubst::Shift, (**b2).clone()),
                            ),
                        )),
                        _ => None,
                    },
                    _ => None,
                },
                ExplicitSubst::Lift(s1) => match b.as_ref() {
                    ExplicitSubst::Lift(t1) => Some((
                        SigmaRule::l1,
                        ExplicitSubst::lift(ExplicitSubst::comp((**s1).clone(), (**t1).clone())),
                    )),
                    ExplicitSubst::Comp(b1, b2) => match b1.as_ref() {
                        ExplicitSubst::Lift(t1) => Some((
                            SigmaRule::l2,
                            ExplicitSubst::comp(
                                ExplicitSubst::lift(ExplicitSubst::comp(
                                    (**s1).clone(),
                                    (**t1).clone(),
                                )),
                                (**b2).clone(),
                            ),
                        )),
                        _ => None,
                    },
                    ExplicitSubst::Cons(u, t1) => Some((
                        SigmaRule::le,
                        ExplicitSubst::cons(
                            (**u).clone(),
                            ExplicitSubst::comp((**s1).clone(), (**t1).clone()),
                        ),
                    )),
                    _ => None,
                },
                _ => None,
            }
        }
        _ => None,
    }
}

/// One substitution-calculus step, leftmost-outermost.
pub fn sigma_step(t: &DbTerm) -> Option<(DbTerm, SigmaRule)> {
    if let Some((rule, reduced)) = sigma_term_head(t) {
        return Some((reduced, rule));
    }
    match t {
        DbTerm::MetaVar(_) | DbTerm::Index(_) => None,
        DbTerm::Fun(f, args) => {
            for (i, a) in args.iter().enumerate() {
                if let Some((next, rule)) = sigma_step(a) {
                    let mut out = args.clone();
                    out[i] = next;
                    return Some((DbTerm::Fun(f.clone(), out), rule));
                }
            }
            None
        }
        DbTerm::Set(es) => {
            for (i, e) in es.iter().enumerate() {
                if let Some((next, rule)) = sigma_step(e) {
                    let mut out = es.clone();
                    out[i] = next;
                    return Some((DbTerm::set(out), rule));
                }
            }
            None
        }
        DbTerm::RuleN { lhs, binders, rhs } => {
            if let Some((next, rule)) = sigma_step(lhs) {
                return Some((DbTerm::rule_n(next, *binders, (**rhs).clone()), rule));
            }
            if let Some((next, rule)) = sigma_step(rhs) {
                return Some((DbTerm::rule_n((**lhs).clone(), *binders, next), rule));
            }
            None
        }
        DbTerm::App(u, v) => {
            if let Some((next, rule)) = sigma_step(u) {
                return Some((DbTerm::app(next, (**v).clone()), rule));
            }
            if let Some((next, rule)) = sigma_step(v) {
                return Some((DbTerm::app((**u).clone(), next), rule));
            }
            None
        }
        DbTerm::Closure(u, s) => {
            if let Some((next, rule)) = sigma_step(u) {
                return Some((DbTerm::closure(next, s.clone()), rule));
            }
            if let Some((next, rule)) = sigma_step_subst(s) {
                return Some((DbTerm::closure((**u).clone(), next), rule));
            }
            None
        }
    }
}

fn sigma_step_subst(s: &ExplicitSubst) -> Option<(ExplicitSubst, SigmaRule)> {
    if let Some((rule, reduced)) = sigma_subst_head(s) {
        return Some((reduced, rule));
    }
    match s {
        ExplicitSubst::MetaVar(_) | ExplicitSubst::Id | ExplicitSubst::Shift => None,
        ExplicitSubst::Lift(inner) => {
            sigma_step_subst(inner).map(|(next, rule)| (ExplicitSubst::lift(next), rule))
        }
        ExplicitSubst::Cons(t, inner) => {
            if let Some((next, rule)) = sigma_step(t) {
                return Some((ExplicitSubst::cons(next, (**inner).clone()), rule));
            }
            sigma_step_subst(inner)
                .map(|(next, rule)| (ExplicitSubst::cons((**t).clone(), next), rule))
        }
        ExplicitSubst::Comp(a, b) => {
            if let Some((next, rule)) = sigma_step_subst(a) {
                return Some((ExplicitSubst::comp(next, (**b).clone()), rule));
            }
            sigma_step_subst(b).map(|(next, rule)| (ExplicitSubst::comp((**a).clone(), next), rule))
        }
    }
}

/// Normalizes with the substitution rules alone; terminates for every input.
pub fn sigma_normalize(t: &DbTerm) -> DbTerm {
    let mut current = t.clone();
    let mut budget = 10_000_000usize;
    while let Some((next, _)) = sigma_step(&current) {
        current = next;
        budget -= 1;
        assert!(budget > 0, "substitution normalization exceeded its budget");
    }
    current
}

/// Normal form of a substitution object under the substitution rules.
pub fn sigma_normalize_subst(s: &ExplicitSubst) -> ExplicitSubst {
    let mut current = s.clone();
    let mut budget = 10_000_000usize;
    while let Some((next, _)) = sigma_step_subst(&current) {
        current = next;
        budget -= 1;
        assert!(budget > 0, "substitution normalization exceeded its budget");
    }
    current
}

/// All one-step sigma successors at every position, for the interleaving
/// checks.
pub fn sigma_successors(t: &DbTerm) -> Vec<DbTerm> {
    let mut out = Vec::new();
    if let Some((_, reduced)) = sigma_term_head(t) {
        out.push(reduced);
    }
    match t {
        DbTerm::MetaVar(_) | DbTerm::Index(_) => {}
        DbTerm::Fun(f, args) => {
            for (i, a) in args.iter().enumerate() {
                for next in sigma_successors(a) {
                    let mut inner = args.clone();
                    inner[i] = next;
                    out.push(DbTerm::Fun(f.clone(), inner));
                }
            }
        }
        DbTerm::Set(es) => {
            for (i, e) in es.iter().enumerate() {
                for next in sigma_successors(e) {
                    let mut inner = es.clone();
                    inner[i] = next;
                    out.push(DbTerm::set(inner));
                }
            }
        }
        DbTerm::RuleN { lhs, binders, rhs } => {
            for next in sigma_successors(lhs) {
                out.push(DbTerm::rule_n(next, *binders, (**rhs).clone()));
            }
            for next in sigma_successors(rhs) {
                out.push(DbTerm::rule_n((**lhs).clone(), *binders, next));
            }
        }
        DbTerm::App(u, v) => {
            for next in sigma_successors(u) {
                out.push(DbTerm::app(next, (**v).clone()));
            }
            for next in sigma_successors(v) {
                out.push(DbTerm::app((**u).clone(), next));
            }
        }
        DbTerm::Closure(u, s) => {
            for next in sigma_successors(u) {
                out.push(DbTerm::closure(next, s.clone()));
            }
            for next in sigma_subst_successors(s) {
                out.push(DbTerm::closure((**u).clone(), next));
            }
        }
    }
    out
}

fn sigma_subst_successors(s: &ExplicitSubst) -> Vec<ExplicitSubst> {
    let mut out = Vec::new();
    if let Some((_, reduced)) = sigma_subst_head(s) {
        out.push(reduced);
    }
    match s {
        ExplicitSubst::MetaVar(_) | ExplicitSubst::Id | ExplicitSubst::Shift => {}
        ExplicitSubst::Lift(inner) => {
            for next in sigma_subst_successors(inner) {
                out.push(ExplicitSubst::lift(next));
            }
        }
        ExplicitSubst::Cons(t, inner) => {
            for next in sigma_successors(t) {
                out.push(ExplicitSubst::cons(next, (**inner).clone()));
            }
            for next in sigma_subst_successors(inner) {
                out.push(ExplicitSubst::cons((**t).clone(), next));
            }
        }
        ExplicitSubst::Comp(a, b) => {
            for next in sigma_subst_successors(a) {
                out.push(ExplicitSubst::comp(next, (**b).clone()));
            }
            for next in sigma_subst_successors(b) {
                out.push(ExplicitSubst::comp((**a).clone(), next));
            }
        }
    }
    out
}

/// The subject conditions of the calculable gate, restated over indices.
/// Only the calculable conditions exist for the explicit calculus; the
/// linear/stable refinements are named-calculus notions, so those gates
/// behave like the calculable one here.
fn db_fire_allowed(gate: StrategyGate, l: &DbTerm, t: &DbTerm) -> bool {
    if !l.is_index_pattern() {
        return false;
    }
    match gate {
        StrategyGate::None => true,
        StrategyGate::Strict | StrategyGate::FirstOrder => t.is_ground_first_order(),
        StrategyGate::ConfStrat | StrategyGate::ConfStratLin | StrategyGate::ConfStratStable => {
            if t.is_ground_first_order() {
                return true;
            }
            db_linear(l) && db_weakly_subsumes(l, t) && db_subject_safe(t)
        }
    }
}

fn db_linear(l: &DbTerm) -> bool {
    fn count(l: &DbTerm, seen: &mut Vec<u32>) -> bool {
        match l {
            DbTerm::Index(n) => {
                if seen.contains(n) {
                    false
                } else {
                    seen.push(*n);
                    true
                }
            }
            DbTerm::Fun(_, args) => args.iter().all(|a| count(a, seen)),
            _ => true,
        }
    }
    count(l, &mut Vec::new())
}

fn db_weakly_subsumes(l: &DbTerm, t: &DbTerm) -> bool {
    if matches!(l, DbTerm::Fun(..)) && !matches!(t, DbTerm::Fun(..)) {
        return false;
    }
    if let (DbTerm::Fun(_, largs), DbTerm::Fun(_, targs)) = (l, t) {
        for (li, ti) in largs.iter().zip(targs.iter()) {
            if !db_weakly_subsumes(li, ti) {
                return false;
            }
        }
    }
    true
}

/// Binder frames for the subject analysis: one per traversed rule, with
/// match images when the rule is the function of a live application.
struct DbFrame {
    binders: u32,
    images: Option<Vec<DbTerm>>,
}

const DB_VALUE_DEPTH: usize = 16;

enum DbHeadValue {
    Known(DbTerm),
    Stuck,
    Unknown,
}

fn subst_images(lhs: &DbTerm, v: &DbTerm, binders: u32) -> Option<Vec<DbTerm>> {
    let sigma = match_db(lhs, v)?;
    let mut images = Vec::with_capacity(binders as usize);
    let mut cur = &sigma;
    for _ in 0..binders {
        match cur {
            ExplicitSubst::Cons(t, rest) => {
                images.push((**t).clone());
                cur = rest;
            }
            _ => images.push(DbTerm::Index(1)),
        }
    }
    Some(images)
}

fn db_image_of(index: u32, frames: &[DbFrame]) -> Option<Option<DbTerm>> {
    // Some(Some(img)): bound with a live image. Some(None): bound, inert.
    // None: free beyond all frames.
    let mut k = index;
    for frame in frames.iter().rev() {
        if k <= frame.binders {
            return Some(
                frame
                    .images
                    .as_ref()
                    .and_then(|imgs| imgs.get((k - 1) as usize).cloned()),
            );
        }
        k -= frame.binders;
    }
    None
}

fn db_head_value(u: &DbTerm, frames: &[DbFrame], depth: usize) -> DbHeadValue {
    if depth == 0 {
        return DbHeadValue::Unknown;
    }
    match u {
        DbTerm::RuleN { .. } => DbHeadValue::Known(u.clone()),
        DbTerm::Index(k) => match db_image_of(*k, frames) {
            None | Some(None) => DbHeadValue::Stuck,
            Some(Some(image)) => db_head_value(&image, &[], depth - 1),
        },
        DbTerm::MetaVar(_) => DbHeadValue::Stuck,
        DbTerm::Set(es) if es.len() == 1 => db_head_value(&es[0], frames, depth - 1),
        DbTerm::Closure(..) => db_head_value(&sigma_normalize(u), frames, depth - 1),
        DbTerm::App(f, a) => match db_head_value(f, frames, depth - 1) {
            DbHeadValue::Known(DbTerm::RuleN { lhs, rhs, .. }) => match match_db(&lhs, a) {
                Some(sigma) => db_head_value(
                    &sigma_normalize(&DbTerm::closure((*rhs).clone(), sigma)),
                    &[],
                    depth - 1,
                ),
                None => DbHeadValue::Unknown,
            },
            DbHeadValue::Stuck => DbHeadValue::Stuck,
            _ => DbHeadValue::Unknown,
        },
        _ => DbHeadValue::Unknown,
    }
}

fn db_function_ok(u: &DbTerm, v: &DbTerm, frames: &[DbFrame], depth: usize) -> bool {
    match u {
        DbTerm::RuleN { lhs, .. } => match_db(lhs, v).is_some(),
        DbTerm::Index(k) => match db_image_of(*k, frames) {
            None | Some(None) => true,
            Some(Some(image)) => db_function_ok(&image, v, &[], depth.saturating_sub(1)),
        },
        DbTerm::MetaVar(_) => true,
        DbTerm::Fun(..) => false,
        DbTerm::Set(es) => es.len() == 1 && db_function_ok(&es[0], v, frames, depth),
        DbTerm::Closure(..) if depth > 0 => {
            db_function_ok(&sigma_normalize(u), v, frames, depth - 1)
        }
        DbTerm::Closure(..) => false,
        DbTerm::App(..) => match db_head_value(u, frames, depth) {
            DbHeadValue::Known(value) => db_function_ok(&value, v, &[], depth),
            DbHeadValue::Stuck => true,
            DbHeadValue::Unknown => false,
        },
    }
}

fn db_subject_safe(t: &DbTerm) -> bool {
    let mut frames = Vec::new();
    db_shape_walk(t, &mut frames)
}

fn db_shape_walk(t: &DbTerm, frames: &mut Vec<DbFrame>) -> bool {
    match t {
        DbTerm::Set(es) => es.len() == 1 && es.iter().all(|e| db_shape_walk(e, frames)),
        DbTerm::App(u, v) => {
            if !db_function_ok(u, v, frames, DB_VALUE_DEPTH) {
                return false;
            }
            if !db_shape_walk(v, frames) {
                return false;
            }
            if let DbTerm::RuleN { lhs, binders, rhs } = u.as_ref() {
                let images = subst_images(lhs, v, *binders);
                frames.push(DbFrame {
                    binders: *binders,
                    images,
                });
                let ok = db_shape_walk(rhs, frames);
                frames.pop();
                ok
            } else {
                db_shape_walk(u, frames)
            }
        }
        DbTerm::RuleN { lhs, binders, rhs } => {
            if !db_shape_walk(lhs, frames) {
                return false;
            }
            frames.push(DbFrame {
                binders: *binders,
                images: None,
            });
            let ok = db_shape_walk(rhs, frames);
            frames.pop();
            ok
        }
        DbTerm::Fun(_, es) => es.iter().all(|e| db_shape_walk(e, frames)),
        DbTerm::Closure(u, _) => db_shape_walk(u, frames),
        DbTerm::MetaVar(_) | DbTerm::Index(_) => true,
    }
}

/// Names of the base evaluation rules of the explicit calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbRule {
    Fire,
    Congruence,
    CongruenceFail,
    Distrib,
    Batch,
    SwitchR,
    OpOnSet,
    Flat,
    Sigma(SigmaRule),
}

fn db_base_head(t: &DbTerm, gate: StrategyGate) -> Option<(DbRule, DbTerm)> {
    match t {
        DbTerm::App(u, v) => {
            if let DbTerm::RuleN { lhs, rhs, .. } = u.as_ref() {
                if db_fire_allowed(gate, lhs, v) {
                    let reduced = match match_db(lhs, v) {
                        Some(sigma) => DbTerm::set(vec![DbTerm::closure((**rhs).clone(), sigma)]),
                        None => DbTerm::empty_set(),
                    };
                    return Some((DbRule::Fire, reduced));
                }
            }
            if let (DbTerm::Fun(f, fargs), DbTerm::Fun(g, gargs)) = (u.as_ref(), v.as_ref()) {
                if f == g && fargs.len() == gargs.len() {
                    let inner: Vec<DbTerm> = fargs
                        .iter()
                        .zip(gargs.iter())
                        .map(|(a, b)| DbTerm::app(a.clone(), b.clone()))
                        .collect();
                    return Some((
                        DbRule::Congruence,
                        DbTerm::set(vec![DbTerm::Fun(f.clone(), inner)]),
                    ));
                }
                return Some((DbRule::CongruenceFail, DbTerm::empty_set()));
            }
            if let DbTerm::Set(us) = u.as_ref() {
                let apps: Vec<DbTerm> = us
                    .iter()
                    .map(|ui| DbTerm::app(ui.clone(), (**v).clone()))
                    .collect();
                return Some((DbRule::Distrib, DbTerm::set(apps)));
            }
            if let DbTerm::Set(vs) = v.as_ref() {
                let apps: Vec<DbTerm> = vs
                    .iter()
                    .map(|vi| DbTerm::app((**u).clone(), vi.clone()))
                    .collect();
                return Some((DbRule::Batch, DbTerm::set(apps)));
            }
            None
        }
        DbTerm::RuleN { lhs, binders, rhs } => {
            if let DbTerm::Set(rs) = rhs.as_ref() {
                let rules: Vec<DbTerm> = rs
                    .iter()
                    .map(|ri| DbTerm::rule_n((**lhs).clone(), *binders, ri.clone()))
                    .collect();
                return Some((DbRule::SwitchR, DbTerm::set(rules)));
            }
            None
        }
        DbTerm::Fun(f, args) => {
            let k = args.iter().position(|a| matches!(a, DbTerm::Set(_)))?;
            let DbTerm::Set(ss) = &args[k] else {
                unreachable!()
            };
            let spread: Vec<DbTerm> = ss
                .iter()
                .map(|s| {
                    let mut inner = args.clone();
                    inner[k] = s.clone();
                    DbTerm::Fun(f.clone(), inner)
                })
                .collect();
            Some((DbRule::OpOnSet, DbTerm::set(spread)))
        }
        DbTerm::Set(es) => {
            let k = es.iter().position(|e| matches!(e, DbTerm::Set(_)))?;
            let mut merged = Vec::new();
            for (i, e) in es.iter().enumerate() {
                if i == k {
                    if let DbTerm::Set(inner) = e {
                        merged.extend(inner.iter().cloned());
                    }
                } else {
                    merged.push(e.clone());
                }
            }
            Some((DbRule::Flat, DbTerm::set(merged)))
        }
        _ => None,
    }
}

/// One step of the full explicit calculus: substitution rules and base
/// rules interleaved, head rules first, argument before function.
pub fn rhosigma_step(t: &DbTerm, gate: StrategyGate) -> Option<(DbTerm, DbRule)> {
    if let Some((rule, reduced)) = sigma_term_head(t) {
        return Some((reduced, DbRule::Sigma(rule)));
    }
    if let Some((rule, reduced)) = db_base_head(t, gate) {
        return Some((reduced, rule));
    }
    match t {
        DbTerm::MetaVar(_) | DbTerm::Index(_) => None,
        DbTerm::Fun(f, args) => {
            for (i, a) in args.iter().enumerate() {
                if let Some((next, rule)) = rhosigma_step(a, gate) {
                    let mut inner = args.clone();
                    inner[i] = next;
                    return Some((DbTerm::Fun(f.clone(), inner), rule));
                }
            }
            None
        }
        DbTerm::Set(es) => {
            for (i, e) in es.iter().enumerate() {
                if let Some((next, rule)) = rhosigma_step(e, gate) {
                    let mut inner = es.clone();
                    inner[i] = next;
                    return Some((DbTerm::set(inner), rule));
                }
            }
            None
        }
        DbTerm::RuleN { lhs, binders, rhs } => {
            if let Some((next, rule)) = rhosigma_step(lhs, gate) {
                return Some((DbTerm::rule_n(next, *binders, (**rhs).clone()), rule));
            }
            if let Some((next, rule)) = rhosigma_step(rhs, gate) {
                return Some((DbTerm::rule_n((**lhs).clone(), *binders, next), rule));
            }
            None
        }
        DbTerm::App(u, v) => {
            if let Some((next, rule)) = rhosigma_step(v, gate) {
                return Some((DbTerm::app((**u).clone(), next), rule));
            }
            if let Some((next, rule)) = rhosigma_step(u, gate) {
                return Some((DbTerm::app(next, (**v).clone()), rule));
            }
            None
        }
        DbTerm::Closure(u, s) => {
            if let Some((next, rule)) = rhosigma_step(u, gate) {
                return Some((DbTerm::closure(next, s.clone()), rule));
            }
            if let Some((next, rule)) = sigma_step_subst(s) {
                return Some((DbTerm::closure((**u).clone(), next), DbRule::Sigma(rule)));
            }
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct DbNormalizeResult {
    pub kind: NormalizeKind,
    pub term: DbTerm,
    pub steps: usize,
}

/// Normalizes under the full explicit calculus.
pub fn rhosigma_normalize(t: &DbTerm, cfg: &ReductionConfig) -> DbNormalizeResult {
    let mut current = t.clone();
    let mut steps = 0usize;
    while steps < cfg.max_steps {
        match rhosigma_step(&current, cfg.gate) {
            None => {
                return DbNormalizeResult {
                    kind: NormalizeKind::NormalForm,
                    term: current,
                    steps,
                }
            }
            Some((next, _)) => {
                current = next;
                steps += 1;
            }
        }
    }
    DbNormalizeResult {
        kind: NormalizeKind::StepLimit,
        term: current,
        steps,
    }
}

/// The polynomial interpretations backing the substitution-calculus
/// termination argument. The pair `(p1, p2)` decreases lexicographically on
/// every substitution step; shipped as test instrumentation.
pub mod measures {
    use super::{DbTerm, ExplicitSubst};

    fn d1(t: &DbTerm) -> u128 {
        match t {
            DbTerm::Set(es) => es.iter().map(d1).sum::<u128>() + 1,
            DbTerm::Closure(u, _) => d1(u),
            _ => 1,
        }
    }

    pub fn p1_term(t: &DbTerm) -> u128 {
        match t {
            DbTerm::MetaVar(_) => 2,
            DbTerm::Index(n) => 2u128
                .checked_pow(*n)
                .expect("index too large for the measure"),
            DbTerm::Fun(_, args) => {
                if args.is_empty() {
                    2
                } else {
                    let prod_d: u128 = args.iter().map(d1).product();
                    let mut sum = 0u128;
                    for (i, a) in args.iter().enumerate() {
                        let others: u128 = args
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, b)| d1(b))
                            .product();
                        sum += p1_term(a) * others;
                    }
                    sum + prod_d
                }
            }
            DbTerm::Set(es) => es.iter().map(p1_term).sum::<u128>() + 2,
            DbTerm::RuleN { lhs, rhs, .. } => {
                p1_term(lhs) * d1(rhs) + p1_term(rhs) * d1(lhs) + 2 * d1(lhs) * d1(rhs)
            }
            DbTerm::App(u, v) => p1_term(u) * d1(v) + p1_term(v) * d1(u),
            DbTerm::Closure(u, s) => p1_term(u) * p1_subst(s),
        }
    }

    pub fn p1_subst(s: &ExplicitSubst) -> u128 {
        match s {
            ExplicitSubst::MetaVar(_) => 2,
            ExplicitSubst::Id => 2,
            ExplicitSubst::Shift => 2,
            ExplicitSubst::Lift(inner) => p1_subst(inner),
            ExplicitSubst::Cons(t, inner) => p1_term(t) + p1_subst(inner),
            ExplicitSubst::Comp(a, b) => p1_subst(a) * p1_subst(b),
        }
    }

    fn d2(t: &DbTerm) -> u128 {
        match t {
            DbTerm::Set(es) => es.iter().map(d2).sum::<u128>() + 1,
            DbTerm::Closure(u, _) => d2(u),
            _ => 1,
        }
    }

    pub fn p2_term(t: &DbTerm) -> u128 {
        match t {
            DbTerm::MetaVar(_) | DbTerm::Index(_) => 1,
            DbTerm::Fun(_, args) => {
                if args.is_empty() {
                    1
                } else {
                    let prod_d: u128 = args.iter().map(d2).product();
                    let mut sum = 0u128;
                    for (i, a) in args.iter().enumerate() {
                        let others: u128 = args
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, b)| d2(b))
                            .product();
                        sum += p2_term(a) * others;
                    }
                    sum + prod_d
                }
            }
            DbTerm::Set(es) => es.iter().map(p2_term).sum::<u128>() + 1,
            DbTerm::RuleN { lhs, rhs, .. } => 2 * (p2_term(lhs) * d2(rhs) + p2_term(rhs) * d2(lhs)),
            DbTerm::App(u, v) => p2_term(u) * d2(v) + p2_term(v) * d2(u) + d2(u) * d2(v),
            DbTerm::Closure(u, s) => p2_term(u) * (p2_subst(s) + 1),
        }
    }

    pub fn p2_subst(s: &ExplicitSubst) -> u128 {
        match s {
            ExplicitSubst::MetaVar(_) => 1,
            ExplicitSubst::Id => 1,
            ExplicitSubst::Shift => 1,
            ExplicitSubst::Lift(inner) => 4 * p2_subst(inner),
            ExplicitSubst::Cons(t, inner) => p2_term(t) + p2_subst(inner) + 1,
            ExplicitSubst::Comp(a, b) => p2_subst(a) * (p2_subst(b) + 1),
        }
    }

    /// The lexicographic measure pair.
    pub fn lex(t: &DbTerm) -> (u128, u128) {
        (p1_term(t), p2_term(t))
    }
}
