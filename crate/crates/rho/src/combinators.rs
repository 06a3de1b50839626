//! Builders for the strategy terms: identity, failure, sequencing, first/dc,
//! the generic traversals, the fixed-point combinator and the recursive
//! traversal/normalization operators up to innermost and outermost.

use std::collections::BTreeSet;
use std::fmt;

use crate::subst::fresh_name;
use crate::term::{Signature, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinatorName {
    Id,
    Fail,
    Seq,
    Try,
    First,
    Dc,
    Phi,
    Psi,
    Theta,
    Sd,
    BottomUp,
    TopDown,
    OnceBu,
    OnceTd,
    RepeatStar,
    Im,
    Om,
    ImRec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CombinatorError {
    /// Traversal expansion needs declared symbols to expand over.
    EmptySignature,
    /// im/om take a set of rewrite rules.
    NonRuleElement(Term),
    /// Conditional encodings need the True constant declared.
    MissingTrueSymbol,
}

impl fmt::Display for CombinatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombinatorError::EmptySignature => {
                write!(f, "traversal expansion needs a non-empty signature")
            }
            CombinatorError::NonRuleElement(_) => {
                write!(f, "normalization operators take a set of rewrite rules")
            }
            CombinatorError::MissingTrueSymbol => {
                write!(
                    f,
                    "conditional rules need the constant True in the signature"
                )
            }
        }
    }
}

impl std::error::Error for CombinatorError {}

/// Fresh-name pool for the bound variables of one built term.
struct Fresh {
    taken: BTreeSet<String>,
}

impl Fresh {
    fn avoiding(terms: &[&Term]) -> Fresh {
        let mut taken = BTreeSet::new();
        for t in terms {
            for s in t.subterms() {
                if let Term::Var(x) = s {
                    taken.insert(x.clone());
                }
            }
        }
        Fresh { taken }
    }

    fn var(&mut self) -> Term {
        let name = fresh_name(&self.taken);
        self.taken.insert(name.clone());
        Term::var(name)
    }
}

/// `id`: applying it to any term yields the singleton of that term.
pub fn make_id() -> Term {
    let mut fresh = Fresh::avoiding(&[]);
    let x = fresh.var();
    Term::rule(x.clone(), x)
}

/// `fail`: applying it to any term yields the empty set.
pub fn make_fail() -> Term {
    let mut fresh = Fresh::avoiding(&[]);
    let x = fresh.var();
    Term::rule(x, Term::empty_set())
}

pub fn make_basic(name: CombinatorName) -> Option<Term> {
    match name {
        CombinatorName::Id => Some(make_id()),
        CombinatorName::Fail => Some(make_fail()),
        CombinatorName::Theta => Some(make_fixpoint()),
        _ => None,
    }
}

/// `u;v`: apply `v` to the result of applying `u`.
pub fn make_seq(u: Term, v: Term) -> Term {
    let mut fresh = Fresh::avoiding(&[&u, &v]);
    let x = fresh.var();
    Term::rule(x.clone(), Term::app(v, Term::app(u, x)))
}

/// `try(s) = first(s, id)`.
pub fn make_try(s: Term) -> Term {
    let mut fresh = Fresh::avoiding(&[&s]);
    let x = fresh.var();
    Term::first(vec![s, Term::rule(x.clone(), x)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraverseKind {
    Phi,
    Psi,
}

/// The traversal operators, either as native operator nodes or expanded
/// over a finite signature.
pub fn make_traverse(
    kind: TraverseKind,
    r: Term,
    sig: &Signature,
    expand: bool,
) -> Result<Term, CombinatorError> {
    if !expand {
        return Ok(match kind {
            TraverseKind::Phi => Term::Phi(Box::new(r)),
            TraverseKind::Psi => Term::Psi(Box::new(r)),
        });
    }
    match kind {
        TraverseKind::Phi => {
            // first(f1(r, id, ..., id), ..., fm(id, ..., id, r))
            let mut alternatives = Vec::new();
            for (f, arity) in sig.non_constants() {
                for slot in 0..arity {
                    let args: Vec<Term> = (0..arity)
                        .map(|i| if i == slot { r.clone() } else { make_id() })
                        .collect();
                    alternatives.push(Term::fun(f.clone(), args));
                }
            }
            if alternatives.is_empty() {
                return Err(CombinatorError::EmptySignature);
            }
            Ok(Term::first(alternatives))
        }
        TraverseKind::Psi => {
            // {c1, ..., cn, f1(r, ..., r), ..., fm(r, ..., r)}
            let mut elements: Vec<Term> = sig.constants().into_iter().map(Term::cst).collect();
            for (f, arity) in sig.non_constants() {
                elements.push(Term::fun(f, vec![r.clone(); arity]));
            }
            if elements.is_empty() {
                return Err(CombinatorError::EmptySignature);
            }
            Ok(Term::set(elements))
        }
    }
}

/// Turing's fixed-point combinator: `[A](A)` with
/// `A = x -> (y -> [y]([[x](x)](y)))`, giving
/// `[theta](G) ->* {[G]([theta](G))}`.
pub fn make_fixpoint() -> Term {
    let mut fresh = Fresh::avoiding(&[]);
    let x = fresh.var();
    let y = fresh.var();
    let body = Term::app(
        y.clone(),
        Term::app(Term::app(x.clone(), x.clone()), y.clone()),
    );
    let a = Term::rule(x, Term::rule(y, body));
    Term::app(a.clone(), a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecursorKind {
    Sd,
    BottomUp,
    TopDown,
    OnceBu,
    OnceTd,
    RepeatStar,
}

/// The recursive traversal operators, each `[theta](G)` for its generator.
pub fn make_recursor(kind: RecursorKind, r: Term) -> Term {
    let mut fresh = Fresh::avoiding(&[&r]);
    let f = fresh.var();
    let x = fresh.var();
    let body = match kind {
        RecursorKind::Sd => {
            // G_sd(r) = f -> (x -> <[Psi(f); r](x)>)
            let seq = make_seq(Term::Psi(Box::new(f.clone())), r);
            Term::choice(vec![Term::app(seq, x.clone())])
        }
        RecursorKind::BottomUp => {
            // G_bu(r) = f -> (x -> [first(Psi(f), id); first(r, id)](x))
            let down = Term::first(vec![Term::Psi(Box::new(f.clone())), make_id()]);
            let here = Term::first(vec![r, make_id()]);
            Term::app(make_seq(down, here), x.clone())
        }
        RecursorKind::TopDown => {
            // G_td(r) = f -> (x -> <[first(r, id); first(Psi(f), id)](x)>)
            let here = Term::first(vec![r, make_id()]);
            let down = Term::first(vec![Term::Psi(Box::new(f.clone())), make_id()]);
            Term::choice(vec![Term::app(make_seq(here, down), x.clone())])
        }
        RecursorKind::OnceBu => {
            // H_bu(r) = f -> (x -> [first(Phi(f), r)](x))
            let pick = Term::first(vec![Term::Phi(Box::new(f.clone())), r]);
            Term::app(pick, x.clone())
        }
        RecursorKind::OnceTd => {
            // H_td(r) = f -> (x -> [first(r, Phi(f))](x))
            let pick = Term::first(vec![r, Term::Phi(Box::new(f.clone()))]);
            Term::app(pick, x.clone())
        }
        RecursorKind::RepeatStar => {
            // J(r) = f -> (x -> [first(r; f, id)](x))
            let again = make_seq(r, f.clone());
            let pick = Term::first(vec![again, make_id()]);
            Term::app(pick, x.clone())
        }
    };
    let generator = Term::rule(f, Term::rule(x, body));
    Term::app(make_fixpoint(), generator)
}

/// The non-guarded spread-down generator; kept only for the negative
/// set-propagation test.
pub fn make_sds(r: Term) -> Term {
    let mut fresh = Fresh::avoiding(&[&r]);
    let f = fresh.var();
    let x = fresh.var();
    let seq = make_seq(Term::Psi(Box::new(f.clone())), r);
    let generator = Term::rule(f, Term::rule(x.clone(), Term::app(seq, x)));
    Term::app(make_fixpoint(), generator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizerKind {
    Im,
    Om,
}

fn check_rule_set(rules: &Term) -> Result<(), CombinatorError> {
    match rules {
        Term::Rule(..) => Ok(()),
        Term::Set(es) if !es.is_empty() => {
            for e in es {
                if !matches!(e, Term::Rule(..)) {
                    return Err(CombinatorError::NonRuleElement(e.clone()));
                }
            }
            Ok(())
        }
        other => Err(CombinatorError::NonRuleElement(other.clone())),
    }
}

/// `im(r) = repeat*(once_bu(r))`, `om(r) = repeat*(once_td(r))`.
pub fn make_normalizer(kind: NormalizerKind, rules: Term) -> Result<Term, CombinatorError> {
    check_rule_set(&rules)?;
    let once = match kind {
        NormalizerKind::Im => make_recursor(RecursorKind::OnceBu, rules),
        NormalizerKind::Om => make_recursor(RecursorKind::OnceTd, rules),
    };
    Ok(make_recursor(RecursorKind::RepeatStar, once))
}

/// A conditional rewrite rule `l -> r if c`; unconditional when `cond` is
/// absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalRule {
    pub lhs: Term,
    pub rhs: Term,
    pub cond: Option<Term>,
}

/// The recursive conditional normalizer:
/// `IM(R) = [theta](f -> (y -> [im({l_i -> [True -> r_i]([f](c_i))} + Rn)](y)))`.
pub fn make_im_recursive(
    rules: &[ConditionalRule],
    sig: &Signature,
) -> Result<Term, CombinatorError> {
    if rules.iter().any(|r| r.cond.is_some()) && sig.arity("True") != Some(0) {
        return Err(CombinatorError::MissingTrueSymbol);
    }
    let mut involved: Vec<&Term> = Vec::new();
    for r in rules {
        involved.push(&r.lhs);
        involved.push(&r.rhs);
        if let Some(c) = &r.cond {
            involved.push(c);
        }
    }
    let mut fresh = Fresh::avoiding(&involved);
    let f = fresh.var();
    let y = fresh.var();
    let mut encoded = Vec::new();
    for rule in rules {
        match &rule.cond {
            None => encoded.push(Term::rule(rule.lhs.clone(), rule.rhs.clone())),
            Some(c) => {
                // l -> [True -> r]([f](c))
                let guard = Term::rule(Term::cst("True"), rule.rhs.clone());
                let checked = Term::app(guard, Term::app(f.clone(), c.clone()));
                encoded.push(Term::rule(rule.lhs.clone(), checked));
            }
        }
    }
    let inner = make_normalizer(NormalizerKind::Im, Term::set(encoded))?;
    let generator = Term::rule(f, Term::rule(y.clone(), Term::app(inner, y)));
    Ok(Term::app(make_fixpoint(), generator))
}
